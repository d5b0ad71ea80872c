#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "brwlab/cli.hpp"
#include "brwlab/config.hpp"

using namespace brwlab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("brwlab_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("constants") {
  const Run r = run({"constants", "--d", "2"});
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string a, b;
  std::getline(lines, a);
  std::getline(lines, b);
  REQUIRE(a.rfind("beta_c=", 0) == 0);
  REQUIRE(b.rfind("beta_2=", 0) == 0);
  CHECK(std::fabs(std::stod(a.substr(7)) - 1.1774100226) < 1e-9);
  CHECK(b == "beta_2=0.8325546112");
}

TEST_CASE("second-moment two-leaf value") {
  const Run r = run({"second-moment", "--d", "2", "--n", "1", "--beta", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "1.8591409142\n");  // (1 + e) / 2
}

TEST_CASE("simulate at depth zero") {
  const Run r = run({"simulate", "--replicas", "1", "--n", "0"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("log_W").get<double>() == 0.0);
  CHECK(j.at("replica").get<int>() == 0);
  CHECK(j.contains("seed"));
  CHECK(j.contains("config_hash"));
}

TEST_CASE("exit codes") {
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"phase-scan", "--nonsense"}).code == 1);
  CHECK(run({"universality", "--profile", "constant", "--n", "4"}).code == 1);
  CHECK(run({"phase-scan", "--profile", "wavy"}).code == 1);
  CHECK(run({"phase-scan", "--config", "/nonexistent/config.json"}).code == 1);
  CHECK(run({"phase-scan", "--n", "2", "--replicas", "5", "--out", "/nonexistent/dir/x.csv"}).code == 2);
  CHECK(run({"kahane", "--n", "4", "--replicas", "200", "--beta", "1"}).code == 0);
  CHECK(run({"kahane", "--n", "4", "--replicas", "200", "--a", "1.5"}).code == 1);
}

TEST_CASE("installed binary reports the same exit codes") {
  const std::string bin = BRWLAB_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  CHECK(status("constants --d 3") == 0);
  CHECK(status("nope") == 1);
}

TEST_CASE("scan output: header, provenance and byte-identical reruns") {
  const fs::path dir = scratch();
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"profile": "linear", "n_list": [4, 6], "beta_list": [0.5, 0.9],
                           "replicas": 300, "seed": 12})";
  const fs::path a = dir / "a.csv", b = dir / "b.csv";
  REQUIRE(run({"universality", "--config", cfg.string(), "--out", a.string(), "--workers", "1"}).code == 0);
  REQUIRE(run({"universality", "--config", cfg.string(), "--out", b.string(), "--workers", "3"}).code == 0);
  const std::string ca = slurp(a);
  CHECK(ca == slurp(b));
  CHECK(ca.substr(0, ca.find('\n')) ==
        "experiment,n,beta,statistic,mean,stderr,ci_lo,ci_hi,count,seed,config_hash");

  const auto ma = nlohmann::json::parse(slurp(a.string() + ".manifest.json"));
  const auto mb = nlohmann::json::parse(slurp(b.string() + ".manifest.json"));
  CHECK(ma.at("config_hash") == mb.at("config_hash"));
  CHECK(ma.at("row_counts").at("universality").get<int>() == 12);
  CHECK(ma.contains("timestamp"));
  CHECK(ma.contains("wall_seconds"));
  CHECK(ma.at("version") == kVersion);
  const std::string hash = ma.at("config_hash").get<std::string>();
  CHECK(hash.size() == 16);
  std::istringstream rows(ca);
  std::string line;
  std::getline(rows, line);
  int count = 0;
  while (std::getline(rows, line)) {
    CHECK(line.rfind("universality,", 0) == 0);
    CHECK(line.size() > hash.size());
    CHECK(line.substr(line.size() - hash.size()) == hash);
    CHECK(line.find(",12," + hash) != std::string::npos);
    ++count;
  }
  CHECK(count == 12);
  fs::remove_all(dir);
}

TEST_CASE("config hash ignores key order and worker count") {
  const auto a = nlohmann::json::parse(R"({"d": 2, "beta": 0.5, "n": 8, "workers": 1})");
  const auto b = nlohmann::json::parse(R"({"n": 8, "workers": 7, "d": 2, "beta": 0.5})");
  const auto c = nlohmann::json::parse(R"({"n": 9, "d": 2, "beta": 0.5})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(hex64(0x1f) == "000000000000001f");
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n": 3, "n_list": [3]})")), ConfigError);
  const ExperimentConfig cfg = config_from_json(nlohmann::json::parse(
      R"({"offspring": {"kind": "poisson", "lambda": 2.5}, "profile": {"table": {"t": [0, 1], "f": [1, 0.5]}},
          "crem": {"x": [0, 0.5, 1], "A": [0, 0.7, 1], "a_prime_0": 1.4}, "n_list": [2, 3]})"));
  CHECK(cfg.offspring().mean() == 2.5);
  CHECK(cfg.profile.kind == ProfileKind::piecewise_table);
  CHECK(cfg.crem.has_value());
}

TEST_CASE("profile tables from files and cascade export") {
  const fs::path dir = scratch();
  const fs::path tab = dir / "f.csv";
  std::ofstream(tab) << "t,f\n0,1\n0.5,0.6\n1,0.2\n";
  const Run r = run({"second-moment", "--n", "2", "--beta", "1", "--profile", "table:" + tab.string()});
  CHECK(r.code == 0);
  // f(1/2) = 0.6, f(1) = 0.2: ((1/2)(1 + (1/2) e^0.6) + (1/4) e^0.8)
  const double expect = 0.5 * (1 + 0.5 * std::exp(0.6)) + 0.25 * std::exp(0.8);
  CHECK(std::stod(r.out) == doctest::Approx(expect).epsilon(1e-9));

  const fs::path out = dir / "cascade.csv";
  REQUIRE(run({"cascade", "--n", "3", "--beta", "0.8", "--out", out.string()}).code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("level,index,log_mass\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 1 + 2 + 4 + 8);
  CHECK(run({"cascade", "--n", "25"}).code == 1);
  fs::remove_all(dir);
}
