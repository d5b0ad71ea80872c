#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "brwlab/brw.hpp"
#include "brwlab/cli.hpp"
#include "brwlab/config.hpp"
#include "brwlab/crem.hpp"
#include "brwlab/experiments.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace brwlab;

namespace {

ProfileSpec profile_of(const std::string& name) {
  return config_from_json(nlohmann::json{{"profile", name}}).profile;
}

py::object log_or_none(LogWeight w) {
  if (w.is_zero()) return py::none();
  return py::float_(w.value);
}

py::dict scan_dict(const ScanResult& r) {
  py::list rows;
  for (const ScanRow& row : r.rows)
    rows.append(py::dict("statistic"_a = row.statistic, "n"_a = row.n, "beta"_a = row.beta,
                         "mean"_a = row.mean, "stderr"_a = row.std_error, "ci_lo"_a = row.ci_lo,
                         "ci_hi"_a = row.ci_hi, "median"_a = row.median, "count"_a = row.count));
  std::ostringstream csv;
  write_scan_csv(csv, r);
  return py::dict("experiment"_a = r.experiment, "rows"_a = rows, "scalars"_a = r.scalars,
                  "seed"_a = r.seed, "config_hash"_a = hex64(r.config_hash), "csv"_a = csv.str());
}

py::dict run_experiment(const std::string& name, const std::string& config_json) {
  const ExperimentConfig cfg = config_from_json(nlohmann::json::parse(config_json));
  py::gil_scoped_release release;
  ScanResult r;
  if (name == "universality") r = universality_gap(cfg);
  else if (name == "phase-scan") r = phase_scan_l2(cfg);
  else if (name == "fractional") r = fractional_moment_scan(cfg);
  else if (name == "kahane") r = kahane_check(cfg).scan;
  else if (name == "critical-fit") r = critical_decay_fit(cfg).scan;
  else if (name == "good-env") r = good_env_mass(cfg);
  else if (name == "crem") r = crem_scan(cfg);
  else throw std::invalid_argument("unknown experiment '" + name + "'");
  py::gil_scoped_acquire acquire;
  return scan_dict(r);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian branching random walk partition functions";
  m.attr("__version__") = kVersion;
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("critical_constants", [](double d) {
    const CriticalConstants c = critical_constants(d);
    return py::dict("beta_c"_a = c.beta_c, "beta_2"_a = c.beta_2, "d"_a = c.d);
  }, "d"_a);

  m.def("partition", [](int d, int n, double beta, std::uint64_t seed, const std::string& profile,
                        std::optional<double> alpha, int n0) {
    TreeStream t{OffspringLaw::deterministic(d), n, seed, SurvivalMode::raw};
    PartitionOptions o;
    if (alpha) o.barrier = BarrierSpec{*alpha, n0};
    ReplicaOutcome r;
    {
      py::gil_scoped_release release;
      r = partition_pair(t, beta, VarianceProfile::make(profile_of(profile), n), o);
    }
    py::dict out("log_W"_a = log_or_none(r.log_W), "log_Wbar"_a = log_or_none(r.log_Wbar),
                 "log_J"_a = log_or_none(r.log_J), "log_Jbar"_a = log_or_none(r.log_Jbar),
                 "leaves"_a = r.leaf_count);
    if (r.has_derivative) out["D_n"] = r.D_n;
    return out;
  }, "d"_a, "n"_a, "beta"_a, "seed"_a, "profile"_a = "constant", "alpha"_a = py::none(), "n0"_a = 0,
     "log W_n, log Wbar_n and, with a barrier, log J_n, log Jbar_n on the complete d-ary tree.");

  m.def("exact_second_moment", [](int d, int n, double beta, const std::string& profile) {
    return exact_second_moment_dary(d, n, beta, VarianceProfile::make(profile_of(profile), n));
  }, "d"_a, "n"_a, "beta"_a, "profile"_a = "constant", "log E[Wbar_n^2].");

  m.def("replica_seed", &replica_seed, "base"_a, "replica"_a);

  m.def("girsanov_shift", &girsanov_shift, "cov"_a, "mu"_a, "alpha"_a);

  m.def("fractional_rate", &fractional_rate, "a"_a, "beta"_a, "d"_a);
  m.def("optimal_fractional_exponent", &optimal_fractional_exponent, "beta"_a, "d"_a);

  auto crem_of = [](std::optional<std::vector<double>> x, std::optional<std::vector<double>> a,
                    double a_prime_0) {
    if (!x) return CremProfile::identity();
    return CremProfile::piecewise(*x, a.value_or(std::vector<double>{}), a_prime_0);
  };
  m.def("crem_partition", [crem_of](int n, double beta, std::uint64_t seed,
                                    std::optional<std::vector<double>> x,
                                    std::optional<std::vector<double>> a, double a_prime_0) {
    return crem_partition(n, beta, crem_of(x, a, a_prime_0), seed).value;
  }, "n"_a, "beta"_a, "seed"_a, "x"_a = py::none(), "A"_a = py::none(), "a_prime_0"_a = 1.0,
     "log Z_n; the identity profile unless knots are given.");
  m.def("crem_second_moment", [crem_of](int n, double beta, std::optional<std::vector<double>> x,
                                        std::optional<std::vector<double>> a, double a_prime_0) {
    return crem_second_moment(n, beta, crem_of(x, a, a_prime_0));
  }, "n"_a, "beta"_a, "x"_a = py::none(), "A"_a = py::none(), "a_prime_0"_a = 1.0);
  m.def("crem_beta_c", [crem_of](std::optional<std::vector<double>> x,
                                 std::optional<std::vector<double>> a, double a_prime_0) {
    return crem_beta_c(crem_of(x, a, a_prime_0));
  }, "x"_a = py::none(), "A"_a = py::none(), "a_prime_0"_a = 1.0);

  m.def("cascade", [](int m_depth, double beta, std::uint64_t seed) {
    const DyadicMeasure mu = cascade_measure(m_depth, beta, seed);
    py::array_t<double> out(static_cast<py::ssize_t>(mu.masses.size()));
    auto v = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < mu.masses.size(); ++i) v(static_cast<py::ssize_t>(i)) = mu.masses[i].value;
    return out;
  }, "m"_a, "beta"_a, "seed"_a, "Log masses of the 2^m dyadic cells.");

  m.def("run_experiment", &run_experiment, "name"_a, "config_json"_a,
        "Runs a scan from a JSON config; returns rows, scalars and the CSV text.");

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, "args"_a, "Runs the command line front end in-process: (exit code, stdout, stderr).");
}
