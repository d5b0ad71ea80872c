#include "brwlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace brwlab {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "d",        "n",       "n_list", "beta",     "beta_list",        "replicas", "seed",
    "workers",  "a",       "alpha",  "n0",       "n0_list",          "n1",       "ci_level",
    "override", "m",       "survival", "offspring", "growth_threshold", "profile", "crem"};

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

std::vector<double> number_list(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number()) throw ConfigError(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<int> int_list(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of integers");
  std::vector<int> out;
  for (const json& v : j) {
    if (!v.is_number_integer()) throw ConfigError(std::string(what) + " must be an array of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

ProfileSpec read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read profile table '" + path + "'");
  std::vector<double> t, f;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) {
      if (t.empty()) continue;  // header
      throw ConfigError("malformed profile table line: " + line);
    }
    t.push_back(a);
    f.push_back(b);
  }
  return ProfileSpec::table(std::move(t), std::move(f));
}

ProfileSpec parse_profile(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "constant" || s == "constant_one") return ProfileSpec::constant();
    if (s == "linear") return ProfileSpec::linear();
    if (s.rfind("table:", 0) == 0) return read_table_file(s.substr(6));
    throw ConfigError("unknown profile '" + s + "'");
  }
  if (j.is_object() && j.contains("table")) {
    const json& t = j.at("table");
    if (!t.is_object() || !t.contains("t") || !t.contains("f"))
      throw ConfigError("profile table needs 't' and 'f'");
    return ProfileSpec::table(number_list(t.at("t"), "profile t"), number_list(t.at("f"), "profile f"));
  }
  if (j.is_object() && j.contains("grid")) return ProfileSpec::custom(number_list(j.at("grid"), "profile grid"));
  throw ConfigError("profile must be \"constant\", \"linear\", \"table:<path>\" or an object");
}

OffspringLaw parse_offspring(const json& j, int d) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError("offspring needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "deterministic") return OffspringLaw::deterministic(j.contains("d") ? get_as<int>(j, "d") : d);
  if (kind == "poisson") return OffspringLaw::poisson(get_as<double>(j, "lambda"));
  if (kind == "geometric") return OffspringLaw::geometric(get_as<double>(j, "p"));
  if (kind == "binomial") return OffspringLaw::binomial(get_as<int>(j, "trials"), get_as<double>(j, "p"));
  if (kind == "table") return OffspringLaw::table(number_list(j.at("probabilities"), "probabilities"));
  throw ConfigError("unknown offspring kind '" + kind + "'");
}

CremProfile parse_crem(const json& j) {
  if (j.is_string() && j.get<std::string>() == "identity") return CremProfile::identity();
  if (!j.is_object() || !j.contains("x") || !j.contains("A"))
    throw ConfigError("crem needs 'x' and 'A' knots");
  const double slope = j.contains("a_prime_0") ? get_as<double>(j, "a_prime_0") : 1.0;
  return CremProfile::piecewise(number_list(j.at("x"), "crem x"), number_list(j.at("A"), "crem A"),
                                slope);
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!kKnownKeys.count(k)) throw ConfigError("unknown config key '" + k + "'");
  if (j.contains("n") && j.contains("n_list")) throw ConfigError("give either 'n' or 'n_list'");
  if (j.contains("beta") && j.contains("beta_list"))
    throw ConfigError("give either 'beta' or 'beta_list'");

  ExperimentConfig c;
  try {
    if (j.contains("d")) c.d = get_as<int>(j, "d");
    if (j.contains("n")) c.n_list = {get_as<int>(j, "n")};
    if (j.contains("n_list")) c.n_list = int_list(j.at("n_list"), "n_list");
    if (j.contains("beta")) c.beta_list = {get_as<double>(j, "beta")};
    if (j.contains("beta_list")) c.beta_list = number_list(j.at("beta_list"), "beta_list");
    if (j.contains("replicas")) c.replicas = get_as<std::uint64_t>(j, "replicas");
    if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
    if (j.contains("workers")) c.workers = get_as<unsigned>(j, "workers");
    if (j.contains("a")) c.a = get_as<double>(j, "a");
    if (j.contains("alpha")) c.barrier.alpha = get_as<double>(j, "alpha");
    if (j.contains("n0")) c.barrier.n0 = get_as<int>(j, "n0");
    if (j.contains("n0_list")) c.n0_list = int_list(j.at("n0_list"), "n0_list");
    if (j.contains("n1")) c.n1 = get_as<int>(j, "n1");
    if (j.contains("ci_level")) c.ci_level = get_as<double>(j, "ci_level");
    if (j.contains("growth_threshold")) c.growth_threshold = get_as<double>(j, "growth_threshold");
    if (j.contains("override")) c.override_checks = get_as<bool>(j, "override");
    if (j.contains("survival")) {
      const std::string s = get_as<std::string>(j, "survival");
      if (s == "raw")
        c.survival = SurvivalMode::raw;
      else if (s == "conditioned")
        c.survival = SurvivalMode::conditioned;
      else
        throw ConfigError("survival must be \"raw\" or \"conditioned\"");
    }
    if (j.contains("offspring")) {
      c.law = parse_offspring(j.at("offspring"), c.d);
      if (c.law->is_deterministic()) c.d = c.law->arity();
    }
    if (j.contains("profile")) c.profile = parse_profile(j.at("profile"));
    if (j.contains("crem")) c.crem = parse_crem(j.at("crem"));
    c.config_hash = config_hash(j);
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::uint64_t config_hash(const json& j) {
  json canonical = j;
  if (canonical.is_object()) canonical.erase("workers");
  const std::string s = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_scan_csv(std::ostream& os, const ScanResult& r, bool header) {
  if (header) os << kCsvHeader << '\n';
  const std::string hash = hex64(r.config_hash);
  for (const ScanRow& row : r.rows) {
    os << r.experiment << ',' << row.n << ',' << format_double(row.beta) << ',' << row.statistic
       << ',' << format_double(row.mean) << ',' << format_double(row.std_error) << ','
       << format_double(row.ci_lo) << ',' << format_double(row.ci_hi) << ',' << row.count << ','
       << r.seed << ',' << hash << '\n';
  }
}

json outcome_json(const ReplicaOutcome& o, std::uint64_t hash) {
  auto lw = [](LogWeight w) -> json {
    if (w.is_zero()) return nullptr;
    return w.value;
  };
  json j;
  j["replica"] = o.replica;
  j["seed"] = o.seed;
  j["config_hash"] = hex64(hash);
  j["n"] = o.n;
  j["beta"] = o.beta;
  j["log_W"] = lw(o.log_W);
  j["log_Wbar"] = lw(o.log_Wbar);
  j["log_J"] = lw(o.log_J);
  j["log_Jbar"] = lw(o.log_Jbar);
  if (o.has_derivative) j["D_n"] = o.D_n;
  j["leaves"] = o.leaf_count;
  return j;
}

json RunManifest::to_json() const {
  json j;
  j["config"] = config;
  j["config_hash"] = hex64(config_hash);
  j["version"] = version;
  j["subcommand"] = subcommand;
  j["wall_seconds"] = wall_seconds;
  j["timestamp"] = timestamp;
  j["row_counts"] = row_counts;
  json s = json::object();
  for (const auto& [k, v] : scalars) s[k] = std::isfinite(v) ? json(v) : json(format_double(v));
  j["scalars"] = s;
  return j;
}

}  // namespace brwlab
