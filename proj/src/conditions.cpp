#include "dssalloc/conditions.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dssalloc/analysis.hpp"
#include "dssalloc/error.hpp"
#include "dssalloc/numerics.hpp"

namespace dssalloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One per-alpha coefficient of a threshold inequality, kept both as a double
// (for reporting) and exactly (for verdicts).
struct Coefficient {
  double log_value = 0.0;
  Rational exact;
};

// Scaled service is represented by shift = nullopt.
struct ShiftParams {
  double value = 0.0;  // delta * mu
  Rational exact;
};

std::optional<ShiftParams> shift_of(double delta, double mu) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ConfigError(fmt::format("shift delta must be >= 0, got {}", delta));
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ConfigError(fmt::format("service rate mu must be positive, got {}", mu));
  }
  return ShiftParams{delta * mu, Rational(delta) * Rational(mu)};
}

void require_positive(int nodes, int m) {
  if (nodes < 1) throw ConfigError(fmt::format("N must be positive, got {}", nodes));
  if (m < 1) throw ConfigError(fmt::format("m must be positive, got {}", m));
}

Rational power(Rational base, unsigned exponent) {
  Rational out = 1;
  while (exponent > 0) {
    if (exponent & 1u) out *= base;
    base *= base;
    exponent >>= 1u;
  }
  return out;
}

// Optimality: 1/(alpha C(m alpha - 1, alpha - 1)) for scaled service,
// (d + alpha) / (alpha (d m + 1) C(m alpha - 1, alpha - 1)) for shifted, d = delta mu.
Coefficient optimality_coefficient(int m, int alpha, const std::optional<ShiftParams>& shift) {
  const int top = m * alpha - 1;
  const double log_c = log_binomial(top, alpha - 1);
  const BigInt c = binomial_big(top, alpha - 1);
  if (!shift) {
    return {-std::log(double(alpha)) - log_c, Rational(BigInt(1), alpha * c)};
  }
  const double d = shift->value;
  const Rational& dx = shift->exact;
  return {std::log(d + alpha) - std::log(double(alpha)) - std::log(d * m + 1.0) - log_c,
          (dx + alpha) / (alpha * (dx * m + 1) * Rational(c))};
}

// Non-optimality: m / M for scaled service, (d m M + m alpha^2) / (alpha (d + 1) M)
// for shifted, with M = m alpha - alpha + 1.
Coefficient nonoptimality_coefficient(int m, int alpha, const std::optional<ShiftParams>& shift) {
  const int spread = m * alpha - alpha + 1;
  if (!shift) {
    return {std::log(double(m)) - std::log(double(spread)), Rational(m, spread)};
  }
  const double d = shift->value;
  const Rational& dx = shift->exact;
  const double num = d * m * spread + double(m) * alpha * alpha;
  return {std::log(num) - std::log(double(alpha)) - std::log(d + 1.0) - std::log(double(spread)),
          (dx * m * spread + m * alpha * alpha) / (alpha * (dx + 1) * spread)};
}

double root(const Coefficient& c, int alpha) { return std::exp(c.log_value / (alpha - 1)); }

enum class Extremum { min, max };

template <class TermFn>
Threshold collect(int alpha_max, Extremum extremum, double empty_value, TermFn term) {
  Threshold t;
  t.value = empty_value;
  for (int alpha = 2; alpha <= alpha_max; ++alpha) {
    const double v = term(alpha);
    t.terms.push_back({alpha, v});
    const bool better = t.witness_alpha == 0 ||
                        (extremum == Extremum::min ? v < t.value : v > t.value);
    if (better) {
      t.value = v;
      t.witness_alpha = alpha;
    }
  }
  return t;
}

Threshold fixed_optimality(int nodes, int m, int r_max, const std::optional<ShiftParams>& shift) {
  require_positive(nodes, m);
  return collect(r_max, Extremum::min, kInf, [&](int alpha) {
    return 1.0 + root(optimality_coefficient(m, alpha, shift), alpha) * (nodes - 1);
  });
}

Threshold fixed_nonoptimality(int nodes, int m, int r_max, const std::optional<ShiftParams>& shift) {
  require_positive(nodes, m);
  return collect(r_max, Extremum::min, kInf, [&](int alpha) {
    return root(nonoptimality_coefficient(m, alpha, shift), alpha) * (nodes - alpha + 1) + alpha - 1;
  });
}

Threshold clamp_vacuous(Threshold t) {
  if (!t.terms.empty() && t.value < 0.0) {
    t.value = 0.0;
    t.witness_alpha = 0;
    t.vacuous = true;
  }
  return t;
}

Threshold prob_optimality(int m, int alpha_max, const std::optional<ShiftParams>& shift) {
  require_positive(1, m);
  return clamp_vacuous(collect(alpha_max, Extremum::max, -kInf, [&](int alpha) {
    return 1.0 - root(optimality_coefficient(m, alpha, shift), alpha);
  }));
}

Threshold prob_nonoptimality(int m, int alpha_max, const std::optional<ShiftParams>& shift) {
  require_positive(1, m);
  return clamp_vacuous(collect(alpha_max, Extremum::max, -kInf, [&](int alpha) {
    return 1.0 - root(nonoptimality_coefficient(m, alpha, shift), alpha);
  }));
}

std::optional<ShiftParams> shift_for(const ServiceModel& service) {
  if (const auto* s = std::get_if<ShiftedExp>(&service)) return shift_of(s->delta, s->mu);
  if (std::holds_alternative<ScaledExp>(service)) return std::nullopt;
  throw ConfigError(fmt::format(
      "minimal spreading conditions need scaled_exp or shifted_exp service, got {}", name(service)));
}

}  // namespace

Threshold fixed_scaled_optimality_threshold(int nodes, int m, int r_max) {
  return fixed_optimality(nodes, m, r_max, std::nullopt);
}

Threshold fixed_scaled_nonoptimality_threshold(int nodes, int m, int r_max) {
  return fixed_nonoptimality(nodes, m, r_max, std::nullopt);
}

Threshold fixed_shifted_optimality_threshold(int nodes, int m, double delta, double mu, int r_max) {
  return fixed_optimality(nodes, m, r_max, shift_of(delta, mu));
}

Threshold fixed_shifted_nonoptimality_threshold(int nodes, int m, double delta, double mu,
                                                int r_max) {
  return fixed_nonoptimality(nodes, m, r_max, shift_of(delta, mu));
}

Threshold prob_scaled_optimality_threshold(int m, int alpha_max) {
  return prob_optimality(m, alpha_max, std::nullopt);
}

Threshold prob_scaled_nonoptimality_threshold(int m, int alpha_max) {
  return prob_nonoptimality(m, alpha_max, std::nullopt);
}

Threshold prob_shifted_optimality_threshold(int m, double delta, double mu, int alpha_max) {
  return prob_optimality(m, alpha_max, shift_of(delta, mu));
}

Threshold prob_shifted_nonoptimality_threshold(int m, double delta, double mu, int alpha_max) {
  return prob_nonoptimality(m, alpha_max, shift_of(delta, mu));
}

std::string to_string(AccessKind kind) {
  return kind == AccessKind::fixed_size ? "fixed_size" : "probabilistic";
}

std::string to_string(ServiceKind kind) {
  return kind == ServiceKind::scaled_exp ? "scaled_exp" : "shifted_exp";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::optimal: return "optimal";
    case Verdict::non_optimal: return "non_optimal";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "?";
}

bool optimality_condition_holds(const AccessModel& access, const ServiceModel& service, int nodes,
                                int m, int alpha) {
  require_positive(nodes, m);
  validate(access, nodes);
  if (alpha < 2) throw ConfigError(fmt::format("conditions compare alpha >= 2, got {}", alpha));
  const auto shift = shift_for(service);
  const Rational y = optimality_coefficient(m, alpha, shift).exact;
  const unsigned e = alpha - 1;
  if (const auto* fixed = std::get_if<FixedSize>(&access)) {
    // r <= 1 + y^(1/e) (N - 1)  <=>  (r - 1)^e <= y (N - 1)^e
    return power(Rational(fixed->accessed - 1), e) <= y * power(Rational(nodes - 1), e);
  }
  // p >= 1 - y^(1/e)  <=>  (1 - p)^e <= y
  const Rational q = 1 - Rational(std::get<Probabilistic>(access).failure);
  return power(q, e) <= y;
}

bool nonoptimality_condition_holds(const AccessModel& access, const ServiceModel& service,
                                   int nodes, int m, int alpha) {
  require_positive(nodes, m);
  validate(access, nodes);
  if (alpha < 2) throw ConfigError(fmt::format("conditions compare alpha >= 2, got {}", alpha));
  const auto shift = shift_for(service);
  const Rational z = nonoptimality_coefficient(m, alpha, shift).exact;
  const unsigned e = alpha - 1;
  if (const auto* fixed = std::get_if<FixedSize>(&access)) {
    // r >= z^(1/e) (N - alpha + 1) + alpha - 1  <=>  (r - alpha + 1)^e >= z (N - alpha + 1)^e
    const int slack = fixed->accessed - alpha + 1;
    if (slack < 0) return false;
    return power(Rational(slack), e) >= z * power(Rational(nodes - alpha + 1), e);
  }
  // p <= 1 - z^(1/e)  <=>  (1 - p)^e >= z
  const Rational q = 1 - Rational(std::get<Probabilistic>(access).failure);
  return power(q, e) >= z;
}

ConditionReport minimal_spreading_conditions(const AccessModel& access,
                                             const ServiceModel& service, int nodes, int m) {
  require_positive(nodes, m);
  validate(access, nodes);
  validate(service);
  const auto shift = shift_for(service);

  ConditionReport report;
  report.service_kind = shift ? ServiceKind::shifted_exp : ServiceKind::scaled_exp;
  report.alpha_max = feasible_alpha_limit(nodes, m, access);

  if (std::holds_alternative<FixedSize>(access)) {
    report.access_kind = AccessKind::fixed_size;
    report.optimality = fixed_optimality(nodes, m, report.alpha_max, shift);
    report.nonoptimality = fixed_nonoptimality(nodes, m, report.alpha_max, shift);
  } else {
    report.access_kind = AccessKind::probabilistic;
    report.optimality = prob_optimality(m, report.alpha_max, shift);
    report.nonoptimality = prob_nonoptimality(m, report.alpha_max, shift);
    report.optimality_vacuous = report.optimality.vacuous;
    report.nonoptimality_vacuous = report.nonoptimality.vacuous;
  }

  bool optimal = true;
  bool non_optimal = false;
  for (int alpha = 2; alpha <= report.alpha_max; ++alpha) {
    optimal = optimal && optimality_condition_holds(access, service, nodes, m, alpha);
    non_optimal = non_optimal || nonoptimality_condition_holds(access, service, nodes, m, alpha);
  }
  if (optimal && non_optimal) {
    throw Error(fmt::format("optimality and non-optimality conditions both hold for N={} m={}",
                            nodes, m));
  }
  report.verdict = optimal       ? Verdict::optimal
                   : non_optimal ? Verdict::non_optimal
                                 : Verdict::indeterminate;
  return report;
}

namespace {

// 0.8 / 0.2 lands a hair above 4; snap ratios that are integers up to rounding
std::vector<int> floor_ceil_at_least_one(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, nearest)) x = nearest;
  const int lo = std::max(1, static_cast<int>(std::floor(x)));
  const int hi = std::max(1, static_cast<int>(std::ceil(x)));
  return lo == hi ? std::vector<int>{lo} : std::vector<int>{lo, hi};
}

}  // namespace

AlphaBracket scaled_prob_m1_optimal_range(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError(fmt::format("optimal-alpha bracket needs 0 < p < 1, got {}", p));
  }
  return {(0.5 - p) / p, (1.0 - p) / p};
}

std::vector<int> constant_prob_m1_optimal_alpha(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError(fmt::format("constant-service optimal alpha needs 0 <= p < 1, got {}", p));
  }
  return floor_ceil_at_least_one(p / (1.0 - p));
}

ConstantAlphaReport constant_prob_m1_report(double p, double delta, int alpha_max) {
  ConstantAlphaReport report;
  report.closed_form_candidates = constant_prob_m1_optimal_alpha(p);
  if (p > 0.0) {
    report.corrected_candidates = floor_ceil_at_least_one((1.0 - p) / p);
  }
  const auto best = optimal_alpha(Probabilistic{p}, ConstantTime{delta}, alpha_max, 1,
                                  Objective::service_rate);
  report.brute_force_alpha = best.alpha;
  report.brute_force_rate = best.value;
  report.agrees = std::find(report.closed_form_candidates.begin(), report.closed_form_candidates.end(),
                            best.alpha) != report.closed_form_candidates.end();
  return report;
}

}  // namespace dssalloc
