#pragma once

// Monte-Carlo estimates of the service rate and recovery probability.
//
// Randomness is counter based: trial t of seed s always sees the same stream,
// and trials are accumulated in fixed-size blocks merged in block order, so an
// estimate depends on (seed, trials) only.

#include <cstdint>
#include <map>

#include "dssalloc/models.hpp"

namespace dssalloc {

struct SimConfig {
  long long trials = 1'000'000;
  std::uint64_t seed = 1;
  int workers = 1;
  /// Strata with fewer samples than this are topped up. 0 disables top-up.
  long long min_count = 100;
};

struct SimEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long long trials = 0;
  std::map<int, long long> per_phi_counts;     // sums to `trials`
  std::map<int, double> per_phi_mean_time;     // phi >= alpha, including top-up draws
  std::map<int, long long> topups;             // extra draws per phi
};

/// splitmix64-based stream; `Rng(seed, index)` is independent for each index.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t index);
  std::uint64_t next();
  double uniform();                  // [0, 1)
  double exponential(double rate);   // Exp(rate)

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

int sample_phi(const AccessModel& access, const SystemConfig& config, Rng& rng);

/// alpha-th smallest of phi i.i.d. node completion times.
double sample_completion_time(const ServiceModel& service, int alpha, int phi, Rng& rng);

/// Stratified estimate sum_phi P(phi) / T(phi) with exact weights P(phi) and
/// simulated conditional mean times T(phi). Throws InsufficientTrialsError
/// when top-up is disabled and a weighted stratum with phi >= alpha is empty.
SimEstimate estimate_service_rate(const SystemConfig& config, const AccessModel& access,
                                  const ServiceModel& service, const SimConfig& sim);

/// Fraction of trials with phi >= alpha.
SimEstimate estimate_recovery_probability(const SystemConfig& config, const AccessModel& access,
                                          const SimConfig& sim);

/// Total-variation distance between the empirical phi counts and the analytic pmf.
double phi_total_variation(const SimEstimate& estimate, const SystemConfig& config,
                           const AccessModel& access);

/// Worker count from DSS_ALLOC_THREADS, else hardware concurrency (at least 1).
int default_workers();

}  // namespace dssalloc
