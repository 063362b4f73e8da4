#include "dssalloc/models.hpp"

#include <fmt/format.h>

#include <cmath>

#include "dssalloc/detail/overloaded.hpp"
#include "dssalloc/error.hpp"
#include "dssalloc/numerics.hpp"

namespace dssalloc {

namespace {

using detail::overloaded;

void require_rate(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ConfigError(fmt::format("service rate mu must be positive and finite, got {}", mu));
  }
}

}  // namespace

void SystemConfig::validate() const {
  if (nodes < 1) throw ConfigError(fmt::format("N must be positive, got {}", nodes));
  if (redundancy < 1) throw ConfigError(fmt::format("m must be positive, got {}", redundancy));
  if (alpha < 1) throw ConfigError(fmt::format("alpha must be positive, got {}", alpha));
  if (blocks && *blocks < 1) throw ConfigError(fmt::format("k must be positive, got {}", *blocks));
  if (redundancy * alpha > nodes) {
    throw ConfigError(
        fmt::format("m*alpha = {} exceeds N = {}", redundancy * alpha, nodes));
  }
}

bool SystemConfig::block_split_uneven() const {
  return blocks && alpha > 0 && *blocks % alpha != 0;
}

void validate(const AccessModel& access, int nodes) {
  std::visit(overloaded{
                 [&](const FixedSize& a) {
                   if (a.accessed < 1 || a.accessed > nodes) {
                     throw ConfigError(
                         fmt::format("fixed-size access needs 1 <= r <= N = {}, got r = {}", nodes,
                                     a.accessed));
                   }
                 },
                 [](const Probabilistic& a) {
                   if (!(a.failure >= 0.0 && a.failure <= 1.0)) {
                     throw ConfigError(
                         fmt::format("failure probability p must lie in [0, 1], got {}", a.failure));
                   }
                 },
             },
             access);
}

void validate(const ServiceModel& service) {
  std::visit(overloaded{
                 [](const SmallExp& s) { require_rate(s.mu); },
                 [](const ScaledExp& s) { require_rate(s.mu); },
                 [](const ShiftedExp& s) {
                   require_rate(s.mu);
                   if (!(s.delta >= 0.0) || !std::isfinite(s.delta)) {
                     throw ConfigError(fmt::format("shift delta must be >= 0, got {}", s.delta));
                   }
                 },
                 [](const ConstantTime& s) {
                   if (!(s.delta > 0.0) || !std::isfinite(s.delta)) {
                     throw ConfigError(
                         fmt::format("constant service time delta must be > 0, got {}", s.delta));
                   }
                 },
             },
             service);
}

std::string name(const AccessModel& access) {
  return std::holds_alternative<FixedSize>(access) ? "fixed_size" : "probabilistic";
}

std::string name(const ServiceModel& service) {
  return std::visit(overloaded{
                        [](const SmallExp&) { return std::string("small_exp"); },
                        [](const ScaledExp&) { return std::string("scaled_exp"); },
                        [](const ShiftedExp&) { return std::string("shifted_exp"); },
                        [](const ConstantTime&) { return std::string("constant"); },
                    },
                    service);
}

double conditional_mean_time(const ServiceModel& service, int alpha, int phi) {
  if (alpha < 1) throw ConfigError(fmt::format("alpha must be positive, got {}", alpha));
  if (phi < alpha) {
    throw ConfigError(fmt::format("mean completion time needs phi >= alpha, got phi={} alpha={}",
                                  phi, alpha));
  }
  const double gap = harmonic_difference(phi, phi - alpha);
  return std::visit(overloaded{
                        [&](const SmallExp& s) { return gap / s.mu; },
                        [&](const ScaledExp& s) { return gap / (alpha * s.mu); },
                        [&](const ShiftedExp& s) { return s.delta / alpha + gap / s.mu; },
                        [&](const ConstantTime& s) { return s.delta / alpha; },
                    },
                    service);
}

double conditional_rate(const ServiceModel& service, int alpha, int phi) {
  if (alpha < 1) throw ConfigError(fmt::format("alpha must be positive, got {}", alpha));
  if (phi < alpha) return 0.0;
  const double gap = harmonic_difference(phi, phi - alpha);
  return std::visit(overloaded{
                        [&](const SmallExp& s) { return s.mu / gap; },
                        [&](const ScaledExp& s) { return alpha * s.mu / gap; },
                        [&](const ShiftedExp& s) {
                          return alpha * s.mu / (s.delta * s.mu + alpha * gap);
                        },
                        [&](const ConstantTime& s) { return alpha / s.delta; },
                    },
                    service);
}

RateBounds conditional_rate_bounds(const ServiceModel& service, int alpha, int phi, int m) {
  if (alpha < 1 || m < 1 || phi < alpha || phi > m * alpha) {
    throw ConfigError(fmt::format("rate bounds need alpha <= phi <= m*alpha, got alpha={} phi={} m={}",
                                  alpha, phi, m));
  }
  const double span = phi - alpha + 1;
  return std::visit(
      overloaded{
          [&](const SmallExp& s) { return RateBounds{0.0, s.mu * phi}; },
          [&](const ScaledExp& s) { return RateBounds{s.mu * span, s.mu * phi}; },
          [&](const ShiftedExp& s) {
            const double dm = s.delta * s.mu;
            const double lower =
                alpha * s.mu * span / (dm * (m * alpha - alpha + 1) + double(alpha) * alpha);
            return RateBounds{lower, s.mu * phi / (dm + alpha)};
          },
          [&](const ConstantTime& s) { return RateBounds{alpha / s.delta, alpha / s.delta}; },
      },
      service);
}

}  // namespace dssalloc
