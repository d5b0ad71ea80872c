#include "brwlab/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "brwlab/config.hpp"
#include "brwlab/crem.hpp"
#include "brwlab/experiments.hpp"
#include "brwlab/log.hpp"

namespace brwlab::cli {

namespace {

using nlohmann::json;

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kSubcommands = {
    "simulate", "second-moment", "phase-scan", "universality", "fractional", "kahane",
    "critical-fit", "good-env", "crem", "cascade", "constants"};

struct Flags {
  std::string config_path;
  std::string out_path;
  bool to_stdout = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicas;
  std::optional<unsigned> workers;
  std::optional<int> d;
  std::vector<int> n;
  std::vector<double> beta;
  std::optional<double> alpha;
  std::vector<int> n0;
  std::optional<double> a;
  std::optional<std::string> profile;
};

std::string usage() {
  std::string s = "usage: brwlab <subcommand> [--config FILE] [--out FILE] [flags]\nsubcommands:";
  for (const auto& c : kSubcommands) s += " " + c;
  return s + "\n";
}

json load_config(const Flags& f) {
  json j = json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot read config '" + f.config_path + "'");
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config does not parse: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
  }
  if (f.seed) j["seed"] = *f.seed;
  if (f.replicas) j["replicas"] = *f.replicas;
  if (f.workers) j["workers"] = *f.workers;
  if (f.d) j["d"] = *f.d;
  if (f.alpha) j["alpha"] = *f.alpha;
  if (f.a) j["a"] = *f.a;
  if (f.profile) j["profile"] = *f.profile;
  if (!f.n.empty()) {
    j.erase("n");
    j.erase("n_list");
    if (f.n.size() == 1)
      j["n"] = f.n.front();
    else
      j["n_list"] = f.n;
  }
  if (!f.beta.empty()) {
    j.erase("beta");
    j.erase("beta_list");
    if (f.beta.size() == 1)
      j["beta"] = f.beta.front();
    else
      j["beta_list"] = f.beta;
  }
  if (!f.n0.empty()) {
    j.erase("n0");
    j.erase("n0_list");
    if (f.n0.size() == 1)
      j["n0"] = f.n0.front();
    else
      j["n0_list"] = f.n0;
  }
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Data sink: the --out file and/or the caller's stream.
class Sink {
 public:
  Sink(const Flags& f, std::ostream& out) : out_(out) {
    use_stdout_ = f.to_stdout || f.out_path.empty();
    if (!f.out_path.empty()) {
      file_.open(f.out_path, std::ios::binary | std::ios::trunc);
      if (!file_) throw RuntimeFailure("cannot write '" + f.out_path + "'");
    }
  }
  template <class T>
  Sink& operator<<(const T& v) {
    if (file_.is_open()) file_ << v;
    if (use_stdout_) out_ << v;
    return *this;
  }
  void finish(const std::string& path) {
    if (!file_.is_open()) return;
    file_.close();
    if (file_.fail()) throw RuntimeFailure("cannot write '" + path + "'");
  }

 private:
  std::ostream& out_;
  std::ofstream file_;
  bool use_stdout_ = true;
};

void write_manifest(const Flags& f, RunManifest& m) {
  if (f.out_path.empty()) return;
  const std::string path = f.out_path + ".manifest.json";
  std::ofstream mf(path, std::ios::trunc);
  if (!mf) throw RuntimeFailure("cannot write '" + path + "'");
  mf << m.to_json().dump(2) << '\n';
  if (!mf) throw RuntimeFailure("cannot write '" + path + "'");
}

int emit_scan(Sink& sink, const Flags& f, const json& cj, const std::string& sub,
              const ScanResult& r, double seconds, std::ostream& err) {
  std::ostringstream csv;
  write_scan_csv(csv, r);
  sink << csv.str();
  sink.finish(f.out_path);
  RunManifest m;
  m.config = cj;
  m.config_hash = r.config_hash;
  m.subcommand = sub;
  m.wall_seconds = seconds;
  m.timestamp = utc_timestamp();
  m.row_counts[r.experiment] = r.rows.size();
  m.scalars = r.scalars;
  write_manifest(f, m);
  for (const auto& [k, v] : r.scalars) err << k << " = " << format_double(v) << '\n';
  return ok;
}

int dispatch(const std::string& sub, const Flags& f, std::ostream& out, std::ostream& err) {
  const json cj = load_config(f);
  const ExperimentConfig cfg = config_from_json(cj);
  const auto t0 = std::chrono::steady_clock::now();
  auto seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  err << "brwlab " << sub << " config_hash=" << hex64(cfg.config_hash) << '\n';
  Sink sink(f, out);

  if (sub == "constants") {
    const CriticalConstants c = critical_constants(cfg.offspring().mean());
    char buf[96];
    std::snprintf(buf, sizeof buf, "beta_c=%.10f\nbeta_2=%.10f\n", c.beta_c, c.beta_2);
    sink << buf;
    sink.finish(f.out_path);
    return ok;
  }
  if (sub == "second-moment") {
    if (!cfg.offspring().is_deterministic())
      throw ConfigError("second-moment needs a deterministic d-ary tree");
    const int d = cfg.offspring().arity();
    for (double beta : cfg.beta_list)
      for (int n : cfg.n_list) {
        const double v = std::exp(
            exact_second_moment_dary(d, n, beta, VarianceProfile::make(cfg.profile, n)));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10f\n", v);
        if (cfg.n_list.size() * cfg.beta_list.size() > 1)
          sink << "n=" << n << " beta=" << format_double(beta) << ' ';
        sink << buf;
      }
    sink.finish(f.out_path);
    return ok;
  }
  if (sub == "simulate") {
    PartitionOptions opts;
    if (!f.n0.empty() || cj.contains("alpha") || cj.contains("n0")) opts.barrier = cfg.barrier;
    std::uint64_t rows = 0;
    for (double beta : cfg.beta_list)
      for (int n : cfg.n_list)
        for (const ReplicaOutcome& o : run_ensemble(cfg, n, beta, opts)) {
          sink << outcome_json(o, cfg.config_hash).dump() << '\n';
          ++rows;
        }
    sink.finish(f.out_path);
    RunManifest m;
    m.config = cj;
    m.config_hash = cfg.config_hash;
    m.subcommand = sub;
    m.wall_seconds = seconds();
    m.timestamp = utc_timestamp();
    m.row_counts["simulate"] = rows;
    write_manifest(f, m);
    return ok;
  }
  if (sub == "cascade") {
    int m = cj.contains("m") ? cj.at("m").get<int>() : cfg.n_list.front();
    if (!f.n.empty()) m = f.n.front();
    if (m < 0 || m > kCascadeMaxDepth)
      throw ConfigError("cascade depth must lie in [0, " + std::to_string(kCascadeMaxDepth) + "]");
    const DyadicMeasure mu = cascade_measure(m, cfg.beta_list.front(), cell_seed(cfg, 0));
    std::ostringstream csv;
    csv << "level,index,log_mass\n";
    for (int k = 0; k <= m; ++k) {
      const auto level = mu.level(k);
      for (std::size_t i = 0; i < level.size(); ++i)
        csv << k << ',' << i << ',' << format_double(level[i].value) << '\n';
    }
    sink << csv.str();
    sink.finish(f.out_path);
    return ok;
  }

  using Runner = std::function<ScanResult(const ExperimentConfig&)>;
  const std::map<std::string, Runner> scans = {
      {"phase-scan", phase_scan_l2},
      {"universality", universality_gap},
      {"fractional", fractional_moment_scan},
      {"critical-fit", [](const ExperimentConfig& c) { return critical_decay_fit(c).scan; }},
      {"good-env", good_env_mass},
      {"crem", crem_scan},
  };
  if (sub == "kahane") {
    const KahaneResult k = kahane_check(cfg);
    emit_scan(sink, f, cj, sub, k.scan, seconds(), err);
    err << (k.pass ? "kahane: PASS\n" : "kahane: FAIL\n");
    return k.pass ? ok : check_failed;
  }
  const auto it = scans.find(sub);
  if (it == scans.end()) throw ConfigError("unknown subcommand '" + sub + "'");
  return emit_scan(sink, f, cj, sub, it->second(cfg), seconds(), err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage();
    return config_error;
  }
  const std::string sub = args.front();
  if (sub == "--help" || sub == "-h") {
    out << usage();
    return ok;
  }
  if (std::find(kSubcommands.begin(), kSubcommands.end(), sub) == kSubcommands.end()) {
    err << "unknown subcommand '" << sub << "'\n" << usage();
    return config_error;
  }

  Flags f;
  CLI::App app{"brwlab " + sub, "brwlab " + sub};
  app.add_option("--config", f.config_path, "JSON config file");
  app.add_option("--out", f.out_path, "output file");
  app.add_flag("--stdout", f.to_stdout, "write data to standard output");
  app.add_option("--seed", f.seed, "base seed");
  app.add_option("--replicas", f.replicas, "replicas per cell");
  app.add_option("--workers", f.workers, "worker threads");
  app.add_option("--d", f.d, "tree arity");
  app.add_option("--n", f.n, "depth(s), comma separated")->delimiter(',');
  app.add_option("--beta", f.beta, "inverse temperature(s), comma separated")->delimiter(',');
  app.add_option("--alpha", f.alpha, "barrier slope");
  app.add_option("--n0", f.n0, "barrier start(s), comma separated")->delimiter(',');
  app.add_option("--a", f.a, "fractional exponent");
  app.add_option("--profile", f.profile, "linear | constant | table:<path>");

  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << usage();
    return config_error;
  }

  // Warnings raised during the run go to `err`.
  WarningSink previous = set_warning_sink([&err](std::string_view m) { err << "warning: " << m << '\n'; });
  struct Restore {
    WarningSink& prev;
    ~Restore() { set_warning_sink(std::move(prev)); }
  } restore{previous};

  try {
    return dispatch(sub, f, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return runtime_error;
  }
}

}  // namespace brwlab::cli
