#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dssalloc/analysis.hpp"
#include "dssalloc/cli.hpp"
#include "dssalloc/conditions.hpp"
#include "dssalloc/error.hpp"
#include "dssalloc/numerics.hpp"
#include "dssalloc/presets.hpp"
#include "dssalloc/simulator.hpp"

namespace py = pybind11;
using namespace dssalloc;

namespace {

SystemConfig system(int nodes, int m, int alpha) { return {nodes, m, alpha, std::nullopt}; }

py::dict threshold_dict(const Threshold& t) {
  py::list terms;
  for (const auto& term : t.terms) terms.append(py::make_tuple(term.alpha, term.value));
  py::dict d;
  d["value"] = t.value;
  d["witness_alpha"] = t.witness_alpha;
  d["vacuous"] = t.vacuous;
  d["terms"] = terms;
  return d;
}

py::list rows_list(const std::vector<SweepRow>& rows) {
  py::list out;
  for (const auto& r : rows) out.append(py::make_tuple(r.alpha, r.service_rate, r.recovery_probability));
  return out;
}

py::dict estimate_dict(const SimEstimate& e) {
  py::dict d;
  d["mean"] = e.mean;
  d["std_error"] = e.std_error;
  d["trials"] = e.trials;
  d["per_phi_counts"] = e.per_phi_counts;
  d["per_phi_mean_time"] = e.per_phi_mean_time;
  d["topups"] = e.topups;
  return d;
}

SimConfig sim_config(long long trials, std::uint64_t seed, int workers, long long min_count) {
  return {trials, seed, workers > 0 ? workers : default_workers(), min_count};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Allocation analysis for coded distributed storage";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<NoClosedFormError>(m, "NoClosedFormError", base.ptr());
  py::register_exception<OverflowError>(m, "OverflowError", base.ptr());
  py::register_exception<InsufficientTrialsError>(m, "InsufficientTrialsError", base.ptr());

  py::class_<FixedSize>(m, "FixedSize")
      .def(py::init<int>(), py::arg("r"))
      .def_readwrite("r", &FixedSize::accessed)
      .def("__repr__", [](const FixedSize& a) { return "FixedSize(r=" + std::to_string(a.accessed) + ")"; });
  py::class_<Probabilistic>(m, "Probabilistic")
      .def(py::init<double>(), py::arg("p"))
      .def_readwrite("p", &Probabilistic::failure)
      .def("__repr__", [](const Probabilistic& a) { return "Probabilistic(p=" + cli::num(a.failure) + ")"; });

  py::class_<SmallExp>(m, "SmallExp")
      .def(py::init<double>(), py::arg("mu") = 1.0)
      .def_readwrite("mu", &SmallExp::mu);
  py::class_<ScaledExp>(m, "ScaledExp")
      .def(py::init<double>(), py::arg("mu") = 1.0)
      .def_readwrite("mu", &ScaledExp::mu);
  py::class_<ShiftedExp>(m, "ShiftedExp")
      .def(py::init<double, double>(), py::arg("delta"), py::arg("mu") = 1.0)
      .def_readwrite("delta", &ShiftedExp::delta)
      .def_readwrite("mu", &ShiftedExp::mu);
  py::class_<ConstantTime>(m, "ConstantTime")
      .def(py::init<double>(), py::arg("delta") = 1.0)
      .def_readwrite("delta", &ConstantTime::delta);

  m.def("harmonic", static_cast<double (*)(int)>(&harmonic), py::arg("n"));
  m.def("hypergeometric_pmf", &hypergeometric_pmf, py::arg("phi"), py::arg("N"), py::arg("D"),
        py::arg("r"));
  m.def("binomial_pmf", &binomial_pmf, py::arg("phi"), py::arg("n"), py::arg("q"));

  m.def("conditional_rate", &conditional_rate, py::arg("service"), py::arg("alpha"), py::arg("phi"));
  m.def(
      "access_pmf",
      [](int nodes, int mm, int alpha, const AccessModel& access) {
        return access_pmf(system(nodes, mm, alpha), access);
      },
      py::arg("nodes"), py::arg("m"), py::arg("alpha"), py::arg("access"));
  m.def(
      "service_rate",
      [](int nodes, int mm, int alpha, const AccessModel& access, const ServiceModel& service) {
        return service_rate(system(nodes, mm, alpha), access, service);
      },
      py::arg("nodes"), py::arg("m"), py::arg("alpha"), py::arg("access"), py::arg("service"));
  m.def(
      "recovery_probability",
      [](int nodes, int mm, int alpha, const AccessModel& access) {
        return recovery_probability(system(nodes, mm, alpha), access);
      },
      py::arg("nodes"), py::arg("m"), py::arg("alpha"), py::arg("access"));
  m.def("minimal_spreading_rate", &minimal_spreading_rate, py::arg("access"), py::arg("service"),
        py::arg("nodes"), py::arg("m"));
  m.def("maximal_spreading_rate", &maximal_spreading_rate, py::arg("access"), py::arg("service"),
        py::arg("nodes"), py::arg("m"));
  m.def(
      "optimal_alpha",
      [](const AccessModel& access, const ServiceModel& service, int nodes, int mm,
         const std::string& objective, std::optional<int> alpha_cap) {
        Objective obj;
        if (objective == "service_rate") {
          obj = Objective::service_rate;
        } else if (objective == "recovery_probability") {
          obj = Objective::recovery_probability;
        } else {
          throw ConfigError("objective must be service_rate or recovery_probability");
        }
        const auto best = optimal_alpha(access, service, nodes, mm, obj, alpha_cap);
        return py::make_tuple(best.alpha, best.value, rows_list(best.table));
      },
      py::arg("access"), py::arg("service"), py::arg("nodes"), py::arg("m"),
      py::arg("objective") = "service_rate", py::arg("alpha_cap") = py::none());

  m.def(
      "conditions",
      [](const AccessModel& access, const ServiceModel& service, int nodes, int mm) {
        const auto rep = minimal_spreading_conditions(access, service, nodes, mm);
        py::dict d;
        d["access"] = to_string(rep.access_kind);
        d["service"] = to_string(rep.service_kind);
        d["alpha_max"] = rep.alpha_max;
        d["optimality"] = threshold_dict(rep.optimality);
        d["nonoptimality"] = threshold_dict(rep.nonoptimality);
        d["verdict"] = to_string(rep.verdict);
        return d;
      },
      py::arg("access"), py::arg("service"), py::arg("nodes"), py::arg("m"));
  m.def("scaled_prob_m1_optimal_range", [](double p) {
    const auto b = scaled_prob_m1_optimal_range(p);
    return py::make_tuple(b.lo, b.hi);
  });
  m.def("constant_prob_m1_optimal_alpha", &constant_prob_m1_optimal_alpha, py::arg("p"));

  m.def(
      "estimate_service_rate",
      [](int nodes, int mm, int alpha, const AccessModel& access, const ServiceModel& service,
         long long trials, std::uint64_t seed, int workers, long long min_count) {
        SimEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_service_rate(system(nodes, mm, alpha), access, service,
                                    sim_config(trials, seed, workers, min_count));
        }
        return estimate_dict(e);
      },
      py::arg("nodes"), py::arg("m"), py::arg("alpha"), py::arg("access"), py::arg("service"),
      py::arg("trials") = 1'000'000, py::arg("seed") = 1, py::arg("workers") = 0,
      py::arg("min_count") = 100);
  m.def(
      "estimate_recovery_probability",
      [](int nodes, int mm, int alpha, const AccessModel& access, long long trials,
         std::uint64_t seed, int workers) {
        SimEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_recovery_probability(system(nodes, mm, alpha), access,
                                            sim_config(trials, seed, workers, 0));
        }
        return estimate_dict(e);
      },
      py::arg("nodes"), py::arg("m"), py::arg("alpha"), py::arg("access"),
      py::arg("trials") = 1'000'000, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def("presets", [] {
    py::list out;
    for (const auto& p : presets()) out.append(py::make_tuple(p.name, p.description));
    return out;
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::main(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
