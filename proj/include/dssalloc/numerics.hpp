#pragma once

// Combinatorial primitives shared by every rate and probability formula.
//
// Binomials follow the zero convention C(n, k) = 0 whenever k < 0, k > n or
// n < 0, so sums over phi never need boundary special cases. The pmfs are
// evaluated in log space and exponentiated once.

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

namespace dssalloc {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Natural-log probability. `value` is <= 0, or -inf for an impossible event.
struct LogProb {
  double value = -std::numeric_limits<double>::infinity();

  static LogProb zero() { return {}; }
  static LogProb one() { return {0.0}; }
  static LogProb from_prob(double p);

  double prob() const { return std::exp(value); }
  bool is_zero() const { return std::isinf(value) && value < 0; }

  friend LogProb operator*(LogProb a, LogProb b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return {a.value + b.value};
  }
  friend bool operator==(LogProb, LogProb) = default;
};

/// H_n = 1 + 1/2 + ... + 1/n, with H_0 = 0.
double harmonic(int n);

/// Exact H_n for 0 <= n <= kMaxExactHarmonic.
inline constexpr int kMaxExactHarmonic = 10000;
Rational harmonic_exact(int n);

/// H_hi - H_lo summed directly over (lo, hi] to avoid cancellation.
double harmonic_difference(int hi, int lo);

/// Exact C(n, k). Throws OverflowError when the value exceeds 64 bits.
std::uint64_t binomial(int n, int k);

/// Arbitrary-precision C(n, k), same zero convention.
BigInt binomial_big(int n, int k);

/// log C(n, k); -inf for the zero cases.
double log_binomial(int n, int k);

/// P(phi of the D data nodes land in a uniform r-subset of N nodes).
LogProb hypergeometric_log_pmf(int phi, int N, int D, int r);
double hypergeometric_pmf(int phi, int N, int D, int r);

/// C(n, phi) q^phi (1 - q)^(n - phi).
LogProb binomial_log_pmf(int phi, int n, double q);
double binomial_pmf(int phi, int n, double q);

}  // namespace dssalloc
