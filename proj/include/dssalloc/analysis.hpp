#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dssalloc/models.hpp"

namespace dssalloc {

enum class Objective { service_rate, recovery_probability };

struct AnalyticProvenance {};
struct SimulatedProvenance {
  double half_width = 0.0;
  long long trials = 0;
};

struct MetricResult {
  int alpha = 0;
  double service_rate = 0.0;
  double recovery_probability = 0.0;
  std::variant<AnalyticProvenance, SimulatedProvenance> provenance;
};

struct SweepRow {
  int alpha = 0;
  double service_rate = 0.0;
  double recovery_probability = 0.0;
};

/// Distribution of phi, the number of data-holding nodes in the accessed set.
/// Entry i is P(phi = i) for i in [0, m*alpha].
std::vector<double> access_pmf(const SystemConfig& config, const AccessModel& access);

/// Largest phi the access model can produce: min(r, m*alpha) or m*alpha.
int max_phi(const SystemConfig& config, const AccessModel& access);

/// Largest alpha worth evaluating: floor(N/m), and at most r under fixed-size access.
int feasible_alpha_limit(int nodes, int m, const AccessModel& access);

/// Expected conditional service rate over accessed sets, sum_phi P(phi) mu_s(alpha|phi).
double service_rate(const SystemConfig& config, const AccessModel& access,
                    const ServiceModel& service);

/// P(phi >= alpha).
double recovery_probability(const SystemConfig& config, const AccessModel& access);

MetricResult evaluate(const SystemConfig& config, const AccessModel& access,
                      const ServiceModel& service);

/// Closed-form rate of the alpha = 1 (replication) allocation.
/// Throws NoClosedFormError for shifted-exponential service.
double minimal_spreading_rate(const AccessModel& access, const ServiceModel& service, int nodes,
                              int m);

/// Closed-form rate of alpha = r under fixed-size access, for scaled-exponential
/// and constant service. Throws NoClosedFormError for other pairs and
/// InfeasibleError when r*m > N.
double maximal_spreading_rate(const AccessModel& access, const ServiceModel& service, int nodes,
                              int m);

struct OptimalAlpha {
  int alpha = 0;
  double value = 0.0;
  std::vector<SweepRow> table;
};

/// Exhaustive search over feasible alpha; ties go to the smaller alpha.
/// `alpha_cap` further limits the search range when set.
/// Throws InfeasibleError when no alpha is feasible.
OptimalAlpha optimal_alpha(const AccessModel& access, const ServiceModel& service, int nodes, int m,
                           Objective objective, std::optional<int> alpha_cap = std::nullopt);

/// One curve of a parameter sweep: every feasible alpha for a fixed scenario.
struct Scenario {
  int nodes = 0;
  int m = 0;
  AccessModel access;
  ServiceModel service;
  std::optional<int> alpha_cap;
};

std::vector<SweepRow> alpha_table(const Scenario& scenario);

enum class SweepParameter { alpha, m, r, p };

std::optional<SweepParameter> parse_sweep_parameter(const std::string& s);
std::string to_string(SweepParameter parameter);

struct SweepAxis {
  SweepParameter parameter = SweepParameter::alpha;
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  /// Grid values start, start+step, ... up to stop (inclusive within 1e-9 of a step).
  std::vector<double> values() const;
};

struct SweepSeries {
  Scenario scenario;
  std::optional<double> grid_value;  // unset for a plain alpha sweep
  std::vector<SweepRow> rows;
  std::vector<std::string> notes;    // grid points skipped as infeasible
};

/// Evaluates `base` at every grid value of `axis` (m, r or p), or a single
/// alpha table restricted to [start, stop] for an alpha axis. Infeasible grid
/// points become empty series with a note; the output order follows the grid.
std::vector<SweepSeries> sweep(const Scenario& base, const SweepAxis& axis, int workers = 1);

}  // namespace dssalloc
