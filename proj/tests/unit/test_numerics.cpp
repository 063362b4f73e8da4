#include <catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dssalloc/error.hpp"
#include "dssalloc/numerics.hpp"

using namespace dssalloc;
using Catch::Approx;

namespace {

// Pascal's triangle up to row n, plain additions.
std::vector<std::vector<std::uint64_t>> pascal(int n) {
  std::vector<std::vector<std::uint64_t>> rows(n + 1);
  for (int i = 0; i <= n; ++i) {
    rows[i].assign(i + 1, 1);
    for (int j = 1; j < i; ++j) rows[i][j] = rows[i - 1][j - 1] + rows[i - 1][j];
  }
  return rows;
}

Rational harmonic_by_sum(int n) {
  Rational h = 0;
  for (int i = 1; i <= n; ++i) h += Rational(1, i);
  return h;
}

// P(phi) by walking every r-subset of N labels, data on labels [0, D).
std::vector<double> hypergeometric_by_enumeration(int N, int D, int r) {
  std::vector<long long> hits(D + 1, 0);
  long long total = 0;
  for (std::uint32_t mask = 0; mask < (1u << N); ++mask) {
    if (std::popcount(mask) != r) continue;
    ++total;
    ++hits[std::popcount(mask & ((1u << D) - 1))];
  }
  std::vector<double> out;
  for (auto h : hits) out.push_back(double(h) / double(total));
  return out;
}

// P(phi) by summing the probability of every success pattern.
std::vector<double> binomial_by_enumeration(int n, double q) {
  std::vector<double> out(n + 1, 0.0);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double pr = 1.0;
    for (int i = 0; i < n; ++i) pr *= (mask >> i & 1u) ? q : 1.0 - q;
    out[std::popcount(mask)] += pr;
  }
  return out;
}

}  // namespace

TEST_CASE("harmonic numbers", "[numerics]") {
  CHECK(harmonic(0) == 0.0);
  CHECK(harmonic(1) == 1.0);
  CHECK(harmonic(4) == Approx(25.0 / 12.0).epsilon(1e-15));
  CHECK(harmonic_exact(4) == Rational(25, 12));

  for (int n = 1; n <= 60; ++n) {
    const Rational want = harmonic_by_sum(n);
    REQUIRE(harmonic_exact(n) == want);
    REQUIRE(harmonic_exact(n) - harmonic_exact(n - 1) == Rational(1, n));
    CHECK(harmonic(n) == Approx(want.convert_to<double>()).epsilon(1e-14));
  }
  // table boundary and the asymptotic branch
  for (int n : {4095, 4096, 4097, 5000, 100000}) {
    double direct = 0.0;
    for (int i = n; i >= 1; --i) direct += 1.0 / i;
    CHECK(harmonic(n) == Approx(direct).epsilon(1e-13));
  }
  CHECK(harmonic_difference(7, 3) == Approx(1.0 / 4 + 1.0 / 5 + 1.0 / 6 + 1.0 / 7).epsilon(1e-15));
  CHECK(harmonic_difference(5, 5) == 0.0);
}

TEST_CASE("binomial coefficients against Pascal's triangle", "[numerics]") {
  const auto rows = pascal(62);
  for (int n = 0; n <= 62; ++n) {
    for (int k = 0; k <= n; ++k) {
      REQUIRE(binomial(n, k) == rows[n][k]);
      REQUIRE(binomial_big(n, k) == BigInt(rows[n][k]));
      CHECK(log_binomial(n, k) == Approx(std::log(double(rows[n][k]))).margin(1e-12));
    }
  }
  CHECK(binomial(3, 1) == 3);
  CHECK(binomial(2, 5) == 0);
  CHECK(binomial(40, 10) == 847660528ULL);
  CHECK(binomial(5, -1) == 0);
  CHECK(log_binomial(2, 5) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("binomial overflow is reported", "[numerics]") {
  CHECK_THROWS_AS(binomial(200, 100), OverflowError);
  // the big-integer path keeps going
  const BigInt c = binomial_big(200, 100);
  CHECK(c > BigInt(std::numeric_limits<std::uint64_t>::max()));
  CHECK(log_binomial(200, 100) == Approx(std::log(c.convert_to<double>())).epsilon(1e-12));
}

TEST_CASE("hypergeometric pmf matches subset enumeration", "[numerics]") {
  CHECK(hypergeometric_pmf(1, 4, 2, 2) == Approx(2.0 / 3.0));
  CHECK(hypergeometric_pmf(0, 10, 0, 3) == 1.0);
  CHECK(hypergeometric_pmf(2, 6, 2, 3) == Approx(0.2));

  for (int N = 1; N <= 12; ++N) {
    for (int D = 0; D <= N; ++D) {
      for (int r = 0; r <= N; ++r) {
        const auto want = hypergeometric_by_enumeration(N, D, r);
        double total = 0.0;
        for (int phi = 0; phi <= D; ++phi) {
          const double got = hypergeometric_pmf(phi, N, D, r);
          REQUIRE(got == Approx(want[phi]).margin(1e-14));
          total += got;
        }
        REQUIRE(total == Approx(1.0).epsilon(1e-13));
        CHECK(hypergeometric_pmf(-1, N, D, r) == 0.0);
        CHECK(hypergeometric_pmf(D + 1, N, D, r) == 0.0);
      }
    }
  }
}

TEST_CASE("hypergeometric pmf rejects bad shapes", "[numerics]") {
  CHECK_THROWS_AS(hypergeometric_pmf(0, 5, 6, 2), ConfigError);
  CHECK_THROWS_AS(hypergeometric_pmf(0, 5, 2, 6), ConfigError);
  CHECK_THROWS_AS(hypergeometric_pmf(0, 5, -1, 2), ConfigError);
}

TEST_CASE("binomial pmf matches pattern enumeration", "[numerics]") {
  CHECK(binomial_pmf(1, 2, 0.5) == Approx(0.5));
  CHECK(binomial_pmf(7, 7, 1.0) == 1.0);
  CHECK(binomial_pmf(0, 7, 0.0) == 1.0);
  CHECK(binomial_pmf(2, 3, 0.7) == Approx(0.441));
  for (int n = 0; n <= 14; ++n) {
    for (double q : {0.0, 0.05, 0.3, 0.5, 0.77, 1.0}) {
      const auto want = binomial_by_enumeration(n, q);
      double total = 0.0;
      for (int phi = 0; phi <= n; ++phi) {
        const double got = binomial_pmf(phi, n, q);
        REQUIRE(got == Approx(want[phi]).margin(1e-14));
        total += got;
      }
      REQUIRE(total == Approx(1.0).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(binomial_pmf(1, 2, 1.5), ConfigError);
  CHECK_THROWS_AS(binomial_pmf(1, 2, -0.1), ConfigError);
}

TEST_CASE("log-space pmfs stay finite where doubles underflow", "[numerics]") {
  // C(1000, 500) / C(2000, 1000)-sized terms underflow double; the log must not
  const LogProb lp = hypergeometric_log_pmf(500, 2000, 1000, 1000);
  CHECK(std::isfinite(lp.value));
  const LogProb tiny = binomial_log_pmf(3000, 3000, 1e-3);
  CHECK(tiny.value == Approx(3000 * std::log(1e-3)).epsilon(1e-12));
  CHECK(tiny.prob() == 0.0);
  CHECK(LogProb::zero().is_zero());
  CHECK((LogProb::from_prob(0.5) * LogProb::from_prob(0.5)).prob() == Approx(0.25));
}
