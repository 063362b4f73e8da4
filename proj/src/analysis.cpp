#include "dssalloc/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "dssalloc/detail/overloaded.hpp"
#include "dssalloc/error.hpp"
#include "dssalloc/numerics.hpp"

namespace dssalloc {

using detail::overloaded;

namespace {

void check_scenario(const SystemConfig& config, const AccessModel& access) {
  config.validate();
  validate(access, config.nodes);
}

// C(N - m, r) / C(N, r): probability that an r-subset misses all m data nodes.
double miss_all_probability(int nodes, int m, int r) {
  double ratio = 1.0;
  for (int i = 0; i < r; ++i) ratio *= double(nodes - m - i) / double(nodes - i);
  return std::max(ratio, 0.0);
}

}  // namespace

std::vector<double> access_pmf(const SystemConfig& config, const AccessModel& access) {
  check_scenario(config, access);
  const int data = config.data_nodes();
  std::vector<double> pmf(data + 1, 0.0);
  std::visit(overloaded{
                 [&](const FixedSize& a) {
                   for (int phi = 0; phi <= data; ++phi) {
                     pmf[phi] = hypergeometric_pmf(phi, config.nodes, data, a.accessed);
                   }
                 },
                 [&](const Probabilistic& a) {
                   for (int phi = 0; phi <= data; ++phi) {
                     pmf[phi] = binomial_pmf(phi, data, 1.0 - a.failure);
                   }
                 },
             },
             access);
  return pmf;
}

int max_phi(const SystemConfig& config, const AccessModel& access) {
  if (const auto* fixed = std::get_if<FixedSize>(&access)) {
    return std::min(fixed->accessed, config.data_nodes());
  }
  return config.data_nodes();
}

int feasible_alpha_limit(int nodes, int m, const AccessModel& access) {
  if (nodes < 1 || m < 1) return 0;
  int limit = nodes / m;
  if (const auto* fixed = std::get_if<FixedSize>(&access)) limit = std::min(limit, fixed->accessed);
  return limit;
}

double service_rate(const SystemConfig& config, const AccessModel& access,
                    const ServiceModel& service) {
  validate(service);
  const auto pmf = access_pmf(config, access);
  double rate = 0.0;
  for (int phi = config.alpha; phi <= max_phi(config, access); ++phi) {
    rate += pmf[phi] * conditional_rate(service, config.alpha, phi);
  }
  return rate;
}

double recovery_probability(const SystemConfig& config, const AccessModel& access) {
  const auto pmf = access_pmf(config, access);
  double prob = 0.0;
  for (int phi = config.alpha; phi <= max_phi(config, access); ++phi) prob += pmf[phi];
  return std::min(prob, 1.0);
}

MetricResult evaluate(const SystemConfig& config, const AccessModel& access,
                      const ServiceModel& service) {
  MetricResult result;
  result.alpha = config.alpha;
  result.service_rate = service_rate(config, access, service);
  result.recovery_probability = recovery_probability(config, access);
  result.provenance = AnalyticProvenance{};
  return result;
}

double minimal_spreading_rate(const AccessModel& access, const ServiceModel& service, int nodes,
                              int m) {
  const SystemConfig config{nodes, m, 1, std::nullopt};
  check_scenario(config, access);
  validate(service);
  if (std::holds_alternative<ShiftedExp>(service)) {
    throw NoClosedFormError("minimal spreading rate has no closed form under shifted-exponential service");
  }
  return std::visit(
      overloaded{
          [&](const FixedSize& a) -> double {
            const int r = a.accessed;
            if (const auto* c = std::get_if<ConstantTime>(&service)) {
              return (1.0 - miss_all_probability(nodes, m, r)) / c->delta;
            }
            const double mu = std::visit(
                overloaded{[](const SmallExp& s) { return s.mu; },
                           [](const ScaledExp& s) { return s.mu; },
                           [](const auto&) { return 0.0; }},
                service);
            return mu * m * r / nodes;
          },
          [&](const Probabilistic& a) -> double {
            if (const auto* c = std::get_if<ConstantTime>(&service)) {
              return (1.0 - std::pow(a.failure, m)) / c->delta;
            }
            const double mu = std::visit(
                overloaded{[](const SmallExp& s) { return s.mu; },
                           [](const ScaledExp& s) { return s.mu; },
                           [](const auto&) { return 0.0; }},
                service);
            return mu * m * (1.0 - a.failure);
          },
      },
      access);
}

double maximal_spreading_rate(const AccessModel& access, const ServiceModel& service, int nodes,
                              int m) {
  const auto* fixed = std::get_if<FixedSize>(&access);
  if (fixed == nullptr) {
    throw NoClosedFormError("maximal spreading closed form needs fixed-size access");
  }
  const int r = fixed->accessed;
  validate(access, nodes);
  validate(service);
  if (m < 1) throw ConfigError(fmt::format("m must be positive, got {}", m));
  if (r * m > nodes) {
    throw InfeasibleError(fmt::format("alpha = r = {} needs r*m = {} <= N = {}", r, r * m, nodes));
  }
  // C(rm, r) / C(N, r): the accessed r nodes all hold data.
  const double all_data = std::exp(log_binomial(r * m, r) - log_binomial(nodes, r));
  if (const auto* s = std::get_if<ScaledExp>(&service)) {
    return s->mu * r * all_data / harmonic(r);
  }
  if (const auto* c = std::get_if<ConstantTime>(&service)) {
    return r * all_data / c->delta;
  }
  throw NoClosedFormError(
      fmt::format("maximal spreading closed form not available for {} service", name(service)));
}

std::vector<SweepRow> alpha_table(const Scenario& scenario) {
  validate(scenario.service);
  validate(scenario.access, scenario.nodes);
  int limit = feasible_alpha_limit(scenario.nodes, scenario.m, scenario.access);
  if (scenario.alpha_cap) limit = std::min(limit, *scenario.alpha_cap);
  std::vector<SweepRow> rows;
  rows.reserve(std::max(limit, 0));
  for (int alpha = 1; alpha <= limit; ++alpha) {
    const SystemConfig config{scenario.nodes, scenario.m, alpha, std::nullopt};
    rows.push_back({alpha, service_rate(config, scenario.access, scenario.service),
                    recovery_probability(config, scenario.access)});
  }
  return rows;
}

OptimalAlpha optimal_alpha(const AccessModel& access, const ServiceModel& service, int nodes, int m,
                           Objective objective, std::optional<int> alpha_cap) {
  OptimalAlpha best;
  best.table = alpha_table({nodes, m, access, service, alpha_cap});
  if (best.table.empty()) {
    throw InfeasibleError(fmt::format("no feasible alpha for N={} m={}", nodes, m));
  }
  best.value = -1.0;
  for (const auto& row : best.table) {
    const double v =
        objective == Objective::service_rate ? row.service_rate : row.recovery_probability;
    if (v > best.value) {
      best.value = v;
      best.alpha = row.alpha;
    }
  }
  return best;
}

std::optional<SweepParameter> parse_sweep_parameter(const std::string& s) {
  if (s == "alpha") return SweepParameter::alpha;
  if (s == "m") return SweepParameter::m;
  if (s == "r") return SweepParameter::r;
  if (s == "p") return SweepParameter::p;
  return std::nullopt;
}

std::string to_string(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::alpha: return "alpha";
    case SweepParameter::m: return "m";
    case SweepParameter::r: return "r";
    case SweepParameter::p: return "p";
  }
  return "?";
}

std::vector<double> SweepAxis::values() const {
  if (!(step > 0.0)) throw ConfigError(fmt::format("sweep step must be positive, got {}", step));
  if (stop < start) throw ConfigError(fmt::format("sweep stop {} below start {}", stop, start));
  std::vector<double> out;
  const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 1'000'000) throw ConfigError("sweep grid has more than 10^6 points");
  for (long long i = 0; i < count; ++i) {
    // Snap to 12 decimals so 0.05-steps print and compare cleanly.
    out.push_back(std::round((start + i * step) * 1e12) / 1e12);
  }
  return out;
}

namespace {

std::optional<int> as_integer(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9) return std::nullopt;
  return static_cast<int>(r);
}

SweepSeries evaluate_point(const Scenario& base, SweepParameter parameter, double value) {
  SweepSeries series;
  series.scenario = base;
  series.grid_value = value;
  auto skip = [&](std::string why) {
    series.notes.push_back(fmt::format("{}={}: {}", to_string(parameter), value, why));
    return series;
  };
  switch (parameter) {
    case SweepParameter::m: {
      const auto m = as_integer(value);
      if (!m || *m < 1 || *m > base.nodes) return skip("m must be an integer in [1, N]");
      series.scenario.m = *m;
      break;
    }
    case SweepParameter::r: {
      const auto r = as_integer(value);
      if (!std::holds_alternative<FixedSize>(base.access)) return skip("r needs fixed-size access");
      if (!r || *r < 1 || *r > base.nodes) return skip("r must be an integer in [1, N]");
      series.scenario.access = FixedSize{*r};
      break;
    }
    case SweepParameter::p: {
      if (!std::holds_alternative<Probabilistic>(base.access)) return skip("p needs probabilistic access");
      if (!(value >= 0.0 && value <= 1.0)) return skip("p must lie in [0, 1]");
      series.scenario.access = Probabilistic{value};
      break;
    }
    case SweepParameter::alpha:
      break;
  }
  series.rows = alpha_table(series.scenario);
  if (series.rows.empty()) return skip("no feasible alpha");
  return series;
}

}  // namespace

std::vector<SweepSeries> sweep(const Scenario& base, const SweepAxis& axis, int workers) {
  const auto grid = axis.values();
  if (axis.parameter == SweepParameter::alpha) {
    SweepSeries series;
    series.scenario = base;
    for (const auto& row : alpha_table(base)) {
      if (row.alpha >= axis.start - 1e-9 && row.alpha <= axis.stop + 1e-9) series.rows.push_back(row);
    }
    for (double v : grid) {
      const auto a = as_integer(v);
      if (!a || std::none_of(series.rows.begin(), series.rows.end(),
                             [&](const SweepRow& r) { return r.alpha == *a; })) {
        series.notes.push_back(fmt::format("alpha={}: infeasible", v));
      }
    }
    return {series};
  }

  std::vector<SweepSeries> out(grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < grid.size(); i = next++) {
        out[i] = evaluate_point(base, axis.parameter, grid[i]);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = grid.size();
    }
  };
  const int n = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(grid.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace dssalloc
