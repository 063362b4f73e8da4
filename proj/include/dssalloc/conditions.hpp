#pragma once

// Sufficient conditions for the minimal spreading allocation (alpha = 1) to be
// optimal or non-optimal under large-file service.
//
// Fixed-size thresholds bound r from above (optimality) or below
// (non-optimality) and take the minimum of a per-alpha expression.
// Probabilistic thresholds bound p from below (optimality) or above
// (non-optimality) and take the maximum. Each Threshold keeps every per-alpha
// term so callers can inspect the whole curve, not just its extremum.

#include <optional>
#include <string>
#include <vector>

#include "dssalloc/models.hpp"

namespace dssalloc {

struct ThresholdTerm {
  int alpha = 0;
  double value = 0.0;
};

struct Threshold {
  /// Extremum over `terms`. With no admissible alpha: +inf for fixed-size
  /// thresholds, -inf for probabilistic ones. A probabilistic threshold whose
  /// terms are all negative is reported as 0 with `vacuous` set.
  double value = 0.0;
  int witness_alpha = 0;  // 0 when `terms` is empty or vacuous
  std::vector<ThresholdTerm> terms;
  bool vacuous = false;  // no p in [0, 1] satisfies the condition
};

// Fixed-size access, alpha over [2, r_max].
Threshold fixed_scaled_optimality_threshold(int nodes, int m, int r_max);
Threshold fixed_scaled_nonoptimality_threshold(int nodes, int m, int r_max);
Threshold fixed_shifted_optimality_threshold(int nodes, int m, double delta, double mu, int r_max);
Threshold fixed_shifted_nonoptimality_threshold(int nodes, int m, double delta, double mu,
                                                int r_max);

// Probabilistic access, alpha over [2, alpha_max].
Threshold prob_scaled_optimality_threshold(int m, int alpha_max);
Threshold prob_scaled_nonoptimality_threshold(int m, int alpha_max);
Threshold prob_shifted_optimality_threshold(int m, double delta, double mu, int alpha_max);
Threshold prob_shifted_nonoptimality_threshold(int m, double delta, double mu, int alpha_max);

enum class AccessKind { fixed_size, probabilistic };
enum class ServiceKind { scaled_exp, shifted_exp };
enum class Verdict { optimal, non_optimal, indeterminate };

std::string to_string(AccessKind kind);
std::string to_string(ServiceKind kind);
std::string to_string(Verdict verdict);

struct ConditionReport {
  AccessKind access_kind = AccessKind::fixed_size;
  ServiceKind service_kind = ServiceKind::scaled_exp;
  int alpha_max = 0;  // largest alpha the thresholds range over
  Threshold optimality;
  Threshold nonoptimality;
  Verdict verdict = Verdict::indeterminate;
  /// Copies of the thresholds' `vacuous` flags.
  bool optimality_vacuous = false;
  bool nonoptimality_vacuous = false;
};

/// Evaluates both thresholds for the given scenario and classifies the
/// minimal spreading allocation. The verdict is decided by exact rational
/// comparisons of the power-cleared inequalities, one alpha at a time, over
/// alpha in [2, min(r, floor(N/m))] (fixed-size) or [2, floor(N/m)]
/// (probabilistic). Service must be ScaledExp or ShiftedExp.
ConditionReport minimal_spreading_conditions(const AccessModel& access,
                                             const ServiceModel& service, int nodes, int m);

/// Exact per-alpha checks backing the verdict.
bool optimality_condition_holds(const AccessModel& access, const ServiceModel& service, int nodes,
                                int m, int alpha);
bool nonoptimality_condition_holds(const AccessModel& access, const ServiceModel& service,
                                   int nodes, int m, int alpha);

/// Bracket on the optimal alpha for probabilistic access, scaled-exponential
/// service and m = 1: [(1/2 - p)/p, (1 - p)/p]. Requires 0 < p < 1.
struct AlphaBracket {
  double lo = 0.0;
  double hi = 0.0;
};
AlphaBracket scaled_prob_m1_optimal_range(double p);

/// Candidate optimal alphas {floor(p/(1-p)), ceil(p/(1-p))}, clamped below at 1,
/// for probabilistic access, constant service and m = 1. Requires 0 <= p < 1.
std::vector<int> constant_prob_m1_optimal_alpha(double p);

/// The candidate set next to a brute-force search of the exact service rate.
/// `corrected_candidates` are floor/ceil of (1-p)/p, where the ratio
/// mu_s(alpha+1)/mu_s(alpha) = (alpha+1)(1-p)/alpha crosses one.
struct ConstantAlphaReport {
  std::vector<int> closed_form_candidates;
  std::vector<int> corrected_candidates;
  int brute_force_alpha = 0;
  double brute_force_rate = 0.0;
  bool agrees = false;  // brute_force_alpha is among closed_form_candidates
};
ConstantAlphaReport constant_prob_m1_report(double p, double delta = 1.0, int alpha_max = 200);

}  // namespace dssalloc
