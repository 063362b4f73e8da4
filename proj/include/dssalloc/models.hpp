#pragma once

#include <optional>
#include <string>
#include <variant>

namespace dssalloc {

/// A file of k blocks, MDS-encoded into m*k blocks, spread quasi-uniformly:
/// m*alpha of the N nodes each hold k/alpha blocks, the rest hold nothing.
struct SystemConfig {
  int nodes = 0;       // N
  int redundancy = 0;  // m
  int alpha = 0;       // spreading parameter
  std::optional<int> blocks;  // k; metadata only, never enters a rate

  int data_nodes() const { return redundancy * alpha; }
  int max_alpha() const { return redundancy > 0 ? nodes / redundancy : 0; }

  /// Throws ConfigError unless all fields are positive and m*alpha <= N.
  void validate() const;
  /// True when k is set and alpha does not divide it.
  bool block_split_uneven() const;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

/// The request reaches a uniformly random r-subset of the N nodes.
struct FixedSize {
  int accessed = 0;  // r
  friend bool operator==(const FixedSize&, const FixedSize&) = default;
};

/// Every node independently fails to respond with probability p.
struct Probabilistic {
  double failure = 0.0;  // p
  friend bool operator==(const Probabilistic&, const Probabilistic&) = default;
};

using AccessModel = std::variant<FixedSize, Probabilistic>;

/// Small file: each node's waiting time is Exp(mu) regardless of alpha.
struct SmallExp {
  double mu = 1.0;
  friend bool operator==(const SmallExp&, const SmallExp&) = default;
};

/// Large file: a node holding 1/alpha of the file finishes in Exp(alpha*mu).
struct ScaledExp {
  double mu = 1.0;
  friend bool operator==(const ScaledExp&, const ScaledExp&) = default;
};

/// Large file: delta/alpha transfer time plus Exp(mu) processing.
struct ShiftedExp {
  double delta = 0.0;
  double mu = 1.0;
  friend bool operator==(const ShiftedExp&, const ShiftedExp&) = default;
};

/// Deterministic delta/alpha per node.
struct ConstantTime {
  double delta = 1.0;
  friend bool operator==(const ConstantTime&, const ConstantTime&) = default;
};

using ServiceModel = std::variant<SmallExp, ScaledExp, ShiftedExp, ConstantTime>;

void validate(const AccessModel& access, int nodes);
void validate(const ServiceModel& service);

std::string name(const AccessModel& access);
std::string name(const ServiceModel& service);

struct RateBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Service rate of an accessed set holding phi data nodes: the reciprocal
/// of the mean alpha-th order statistic of phi node completion times.
/// Zero when phi < alpha (the set cannot recover the file).
double conditional_rate(const ServiceModel& service, int alpha, int phi);

/// Analytic (lower, upper) bounds on conditional_rate for alpha <= phi <= m*alpha.
/// Throws ConfigError outside that range.
RateBounds conditional_rate_bounds(const ServiceModel& service, int alpha, int phi, int m);

/// Mean of the alpha-th order statistic, i.e. 1 / conditional_rate for phi >= alpha.
double conditional_mean_time(const ServiceModel& service, int alpha, int phi);

}  // namespace dssalloc
