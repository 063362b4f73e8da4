#include "dssalloc/numerics.hpp"

#include <fmt/format.h>

#include <vector>

#include "dssalloc/error.hpp"

namespace dssalloc {

namespace {

constexpr int kHarmonicTableSize = 4096;

const std::vector<double>& harmonic_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kHarmonicTableSize + 1, 0.0);
    for (int i = 1; i <= kHarmonicTableSize; ++i) t[i] = t[i - 1] + 1.0 / i;
    return t;
  }();
  return table;
}

}  // namespace

LogProb LogProb::from_prob(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(fmt::format("probability {} outside [0, 1]", p));
  }
  if (p == 0.0) return zero();
  return {std::log(p)};
}

double harmonic(int n) {
  if (n < 0) throw ConfigError(fmt::format("harmonic number of negative n={}", n));
  if (n <= kHarmonicTableSize) return harmonic_table()[n];
  constexpr double kEulerGamma = 0.57721566490153286061;
  const double x = n;
  const double inv2 = 1.0 / (x * x);
  return std::log(x) + kEulerGamma + 0.5 / x -
         inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

Rational harmonic_exact(int n) {
  if (n < 0 || n > kMaxExactHarmonic) {
    throw ConfigError(fmt::format("exact harmonic number needs 0 <= n <= {}, got {}",
                                  kMaxExactHarmonic, n));
  }
  // Common denominator lcm(1..n), reduced once at the end.
  BigInt den = 1;
  for (int i = 2; i <= n; ++i) den = boost::multiprecision::lcm(den, BigInt(i));
  BigInt num = 0;
  for (int i = 1; i <= n; ++i) num += den / i;
  return Rational(num, den);
}

double harmonic_difference(int hi, int lo) {
  if (lo < 0 || hi < lo) {
    throw ConfigError(fmt::format("harmonic difference needs 0 <= lo <= hi, got ({}, {})", hi, lo));
  }
  double sum = 0.0;
  for (int i = hi; i > lo; --i) sum += 1.0 / i;
  return sum;
}

std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (int i = 1; i <= k; ++i) {
    // c * (n - k + i) / i is an integer at every step.
    c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (c > std::numeric_limits<std::uint64_t>::max()) {
      throw OverflowError(fmt::format("C({}, {}) exceeds 64 bits", n, k));
    }
  }
  return static_cast<std::uint64_t>(c);
}

BigInt binomial_big(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

double log_binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  try {
    return std::log(static_cast<double>(binomial(n, k)));
  } catch (const OverflowError&) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  }
}

LogProb hypergeometric_log_pmf(int phi, int N, int D, int r) {
  if (N < 0 || D < 0 || D > N || r < 0 || r > N) {
    throw ConfigError(
        fmt::format("hypergeometric needs 0 <= D <= N and 0 <= r <= N, got N={} D={} r={}", N, D, r));
  }
  const double a = log_binomial(D, phi);
  const double b = log_binomial(N - D, r - phi);
  if (std::isinf(a) || std::isinf(b)) return LogProb::zero();
  return {a + b - log_binomial(N, r)};
}

double hypergeometric_pmf(int phi, int N, int D, int r) {
  return hypergeometric_log_pmf(phi, N, D, r).prob();
}

LogProb binomial_log_pmf(int phi, int n, double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw ConfigError(fmt::format("success probability {} outside [0, 1]", q));
  }
  if (n < 0) throw ConfigError(fmt::format("binomial trials n={} negative", n));
  if (phi < 0 || phi > n) return LogProb::zero();
  // 0^0 = 1 at the endpoints.
  double lp = log_binomial(n, phi);
  if (phi > 0) {
    if (q == 0.0) return LogProb::zero();
    lp += phi * std::log(q);
  }
  if (n - phi > 0) {
    if (q == 1.0) return LogProb::zero();
    lp += (n - phi) * std::log1p(-q);
  }
  return {lp};
}

double binomial_pmf(int phi, int n, double q) {
  return binomial_log_pmf(phi, n, q).prob();
}

}  // namespace dssalloc
