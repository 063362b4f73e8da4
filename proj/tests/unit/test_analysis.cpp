#include <catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <cstdint>

#include "dssalloc/analysis.hpp"
#include "dssalloc/error.hpp"

using namespace dssalloc;
using Catch::Approx;

namespace {

// mean of the alpha-th order statistic of phi Exp(rate): sum 1/(rate*i), i in (phi-alpha, phi]
double rate_of(const ServiceModel& s, int alpha, int phi) {
  if (phi < alpha) return 0.0;
  double gap = 0.0;
  for (int i = phi - alpha + 1; i <= phi; ++i) gap += 1.0 / i;
  if (auto* v = std::get_if<SmallExp>(&s)) return v->mu / gap;
  if (auto* v = std::get_if<ScaledExp>(&s)) return alpha * v->mu / gap;
  if (auto* v = std::get_if<ShiftedExp>(&s)) return 1.0 / (v->delta / alpha + gap / v->mu);
  return alpha / std::get<ConstantTime>(s).delta;
}

struct Pair {
  double rate = 0.0;
  double recovery = 0.0;
};

// Average over every r-subset of N nodes; the first m*alpha labels hold data.
Pair fixed_by_subsets(int N, int m, int alpha, int r, const ServiceModel& s) {
  const std::uint32_t data = (1u << (m * alpha)) - 1;
  Pair acc;
  long long count = 0;
  for (std::uint32_t mask = 0; mask < (1u << N); ++mask) {
    if (std::popcount(mask) != r) continue;
    const int phi = std::popcount(mask & data);
    acc.rate += rate_of(s, alpha, phi);
    acc.recovery += phi >= alpha ? 1.0 : 0.0;
    ++count;
  }
  return {acc.rate / count, acc.recovery / count};
}

// Weighted over every responding pattern of the m*alpha data nodes.
Pair prob_by_patterns(int m, int alpha, double p, const ServiceModel& s) {
  const int n = m * alpha;
  Pair acc;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const int phi = std::popcount(mask);
    const double w = std::pow(1 - p, phi) * std::pow(p, n - phi);
    acc.rate += w * rate_of(s, alpha, phi);
    acc.recovery += phi >= alpha ? w : 0.0;
  }
  return acc;
}

const ServiceModel kServices[] = {SmallExp{1.0}, ScaledExp{2.0}, ShiftedExp{3.0, 1.0},
                                  ConstantTime{1.5}};

}  // namespace

TEST_CASE("service rate spot values", "[analysis]") {
  CHECK(service_rate({40, 1, 1, {}}, FixedSize{10}, SmallExp{1.0}) == Approx(0.25));
  CHECK(service_rate({3, 1, 1, {}}, FixedSize{2}, SmallExp{1.0}) == Approx(2.0 / 3.0));
  CHECK(service_rate({40, 3, 1, {}}, Probabilistic{0.3}, SmallExp{1.0}) == Approx(2.1));
  CHECK(service_rate({40, 1, 2, {}}, Probabilistic{0.2}, ScaledExp{1.0}) ==
        Approx(2 * 0.64 / 1.5));
  // alpha > r: no accessed set can recover
  CHECK(service_rate({40, 2, 5, {}}, FixedSize{4}, ScaledExp{1.0}) == 0.0);
}

TEST_CASE("recovery probability spot values", "[analysis]") {
  CHECK(recovery_probability({40, 4, 10, {}}, FixedSize{10}) == Approx(1.0));
  CHECK(recovery_probability({6, 2, 2, {}}, FixedSize{3}) == Approx(0.8));
  for (int m = 1; m <= 4; ++m) {
    for (double p : {0.0, 0.1, 0.5, 0.9}) {
      CHECK(recovery_probability({40, m, 1, {}}, Probabilistic{p}) ==
            Approx(1 - std::pow(p, m)).margin(1e-15));
    }
  }
}

TEST_CASE("fixed-size access agrees with subset enumeration", "[analysis]") {
  for (int N = 2; N <= 12; ++N) {
    for (int m = 1; m <= 3; ++m) {
      for (int alpha = 1; m * alpha <= N; ++alpha) {
        for (int r = 1; r <= N; ++r) {
          for (const auto& s : kServices) {
            const SystemConfig c{N, m, alpha, std::nullopt};
            const Pair want = fixed_by_subsets(N, m, alpha, r, s);
            INFO("N=" << N << " m=" << m << " alpha=" << alpha << " r=" << r << " " << name(s));
            REQUIRE(service_rate(c, FixedSize{r}, s) == Approx(want.rate).epsilon(1e-12).margin(1e-15));
            REQUIRE(recovery_probability(c, FixedSize{r}) == Approx(want.recovery).margin(1e-14));
          }
        }
      }
    }
  }
}

TEST_CASE("probabilistic access agrees with pattern enumeration", "[analysis]") {
  for (int m = 1; m <= 3; ++m) {
    for (int alpha = 1; m * alpha <= 15; ++alpha) {
      for (double p : {0.0, 0.1, 0.35, 0.6, 0.95, 1.0}) {
        for (const auto& s : kServices) {
          const SystemConfig c{40, m, alpha, std::nullopt};
          const Pair want = prob_by_patterns(m, alpha, p, s);
          INFO("m=" << m << " alpha=" << alpha << " p=" << p << " " << name(s));
          REQUIRE(service_rate(c, Probabilistic{p}, s) == Approx(want.rate).epsilon(1e-12).margin(1e-15));
          REQUIRE(recovery_probability(c, Probabilistic{p}) == Approx(want.recovery).margin(1e-14));
        }
      }
    }
  }
}

TEST_CASE("access pmf is a distribution", "[analysis]") {
  for (int N : {10, 40}) {
    for (int m = 1; m <= 4; ++m) {
      for (int alpha = 1; m * alpha <= N; ++alpha) {
        const SystemConfig c{N, m, alpha, std::nullopt};
        for (int r = 1; r <= N; r += 3) {
          const auto pmf = access_pmf(c, FixedSize{r});
          REQUIRE(int(pmf.size()) == m * alpha + 1);
          double total = 0.0;
          for (int phi = 0; phi <= m * alpha; ++phi) {
            REQUIRE(pmf[phi] >= 0.0);
            if (phi > r) REQUIRE(pmf[phi] == 0.0);
            total += pmf[phi];
          }
          REQUIRE(total == Approx(1.0).epsilon(1e-12));
          REQUIRE(max_phi(c, FixedSize{r}) == std::min(r, m * alpha));
        }
        const auto pmf = access_pmf(c, Probabilistic{0.4});
        double total = 0.0;
        for (double v : pmf) total += v;
        REQUIRE(total == Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("closed forms at the extremes of spreading", "[analysis]") {
  CHECK(minimal_spreading_rate(FixedSize{10}, SmallExp{1.0}, 40, 3) == Approx(0.75));
  CHECK(minimal_spreading_rate(Probabilistic{0.0}, SmallExp{1.0}, 40, 2) == Approx(2.0));
  CHECK(minimal_spreading_rate(FixedSize{2}, ConstantTime{2.0}, 4, 2) == Approx(5.0 / 12.0));
  CHECK(maximal_spreading_rate(FixedSize{2}, ScaledExp{1.0}, 4, 2) == Approx(4.0 / 3.0));
  CHECK(maximal_spreading_rate(FixedSize{2}, ConstantTime{1.0}, 4, 2) == Approx(2.0));
  CHECK(maximal_spreading_rate(FixedSize{1}, ScaledExp{2.0}, 8, 1) == Approx(2.0 / 8.0));

  CHECK_THROWS_AS(minimal_spreading_rate(FixedSize{10}, ShiftedExp{3.0, 1.0}, 40, 3),
                  NoClosedFormError);
  CHECK_THROWS_AS(maximal_spreading_rate(FixedSize{10}, SmallExp{1.0}, 40, 3), NoClosedFormError);
  CHECK_THROWS_AS(maximal_spreading_rate(Probabilistic{0.2}, ScaledExp{1.0}, 40, 3),
                  NoClosedFormError);
  CHECK_THROWS_AS(maximal_spreading_rate(FixedSize{20}, ScaledExp{1.0}, 40, 3), InfeasibleError);
}

TEST_CASE("closed forms equal the general sum", "[analysis]") {
  const ServiceModel minimal[] = {SmallExp{1.5}, ScaledExp{0.5}, ConstantTime{2.0}};
  const ServiceModel maximal[] = {ScaledExp{0.5}, ConstantTime{2.0}};
  for (int N : {10, 20, 40}) {
    for (int m = 1; m <= 4; ++m) {
      for (int r = 1; r <= N; ++r) {
        for (const auto& s : minimal) {
          REQUIRE(minimal_spreading_rate(FixedSize{r}, s, N, m) ==
                  Approx(service_rate({N, m, 1, {}}, FixedSize{r}, s)).epsilon(1e-9));
        }
        if (r * m > N) continue;
        for (const auto& s : maximal) {
          REQUIRE(maximal_spreading_rate(FixedSize{r}, s, N, m) ==
                  Approx(service_rate({N, m, r, {}}, FixedSize{r}, s)).epsilon(1e-9));
        }
      }
      for (int i = 0; i <= 10; ++i) {
        const double p = i / 10.0;
        for (const auto& s : minimal) {
          REQUIRE(minimal_spreading_rate(Probabilistic{p}, s, N, m) ==
                  Approx(service_rate({N, m, 1, {}}, Probabilistic{p}, s)).epsilon(1e-9).margin(1e-15));
        }
      }
    }
  }
}

TEST_CASE("small-file service is best with one chunk per node", "[analysis]") {
  for (int N : {10, 20, 40}) {
    for (int m = 1; m <= 4; ++m) {
      for (int r = 1; r <= N; ++r) {
        const double best = minimal_spreading_rate(FixedSize{r}, SmallExp{1.0}, N, m);
        for (int alpha = 2; alpha <= std::min(r, N / m); ++alpha) {
          REQUIRE(service_rate({N, m, alpha, {}}, FixedSize{r}, SmallExp{1.0}) < best);
        }
      }
      for (int i = 1; i <= 9; ++i) {
        const double p = i / 10.0;
        const double best = minimal_spreading_rate(Probabilistic{p}, SmallExp{1.0}, N, m);
        for (int alpha = 2; alpha <= N / m; ++alpha) {
          REQUIRE(service_rate({N, m, alpha, {}}, Probabilistic{p}, SmallExp{1.0}) < best);
        }
      }
    }
  }
}

TEST_CASE("scaled-exponential rate sits between its phi-sandwich", "[analysis]") {
  for (int m = 1; m <= 4; ++m) {
    for (int alpha = 1; m * alpha <= 40; ++alpha) {
      const SystemConfig c{40, m, alpha, std::nullopt};
      for (int r = alpha; r <= 40; r += 5) {
        const auto pmf = access_pmf(c, FixedSize{r});
        double lo = 0.0, hi = 0.0;
        for (int phi = alpha; phi < int(pmf.size()); ++phi) {
          lo += pmf[phi] * (phi - alpha + 1);
          hi += pmf[phi] * phi;
        }
        const double rate = service_rate(c, FixedSize{r}, ScaledExp{1.0});
        REQUIRE(lo <= rate * (1 + 1e-12));
        REQUIRE(rate <= hi * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("optimal alpha search", "[analysis]") {
  CHECK(optimal_alpha(FixedSize{10}, ScaledExp{1.0}, 40, 4, Objective::service_rate).alpha == 10);
  CHECK(optimal_alpha(FixedSize{10}, ScaledExp{1.0}, 40, 3, Objective::service_rate).alpha == 3);
  const auto pr = optimal_alpha(Probabilistic{0.2}, ScaledExp{1.0}, 40, 1, Objective::service_rate);
  CHECK(pr.alpha == 2);
  CHECK(pr.value == Approx(2 * 0.64 / 1.5));
  CHECK(pr.table.size() == 40);

  const auto capped = optimal_alpha(Probabilistic{0.2}, ScaledExp{1.0}, 40, 1,
                                    Objective::service_rate, 1);
  CHECK(capped.alpha == 1);
  CHECK(capped.table.size() == 1);

  // fixed-size: alpha never exceeds r or N/m
  const auto t = optimal_alpha(FixedSize{7}, SmallExp{1.0}, 40, 3, Objective::recovery_probability);
  CHECK(t.table.size() == 7);
  for (const auto& row : t.table) CHECK(row.recovery_probability <= t.value);

  // ties go to the smallest alpha: every alpha recovers surely at p = 0
  const auto tie = optimal_alpha(Probabilistic{0.0}, SmallExp{1.0}, 12, 2,
                                 Objective::recovery_probability);
  CHECK(tie.alpha == 1);
  CHECK(tie.value == 1.0);

  CHECK_THROWS_AS(optimal_alpha(FixedSize{10}, ScaledExp{1.0}, 40, 41, Objective::service_rate),
                  InfeasibleError);
}

TEST_CASE("alpha sweeps and parameter grids", "[analysis]") {
  // small-file, m=4 r=10: rate peaks at alpha 1, recovery reaches 1 at alpha 10
  const auto rows = alpha_table({40, 4, FixedSize{10}, SmallExp{1.0}, std::nullopt});
  REQUIRE(rows.size() == 10);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].service_rate < rows[0].service_rate);
  CHECK(rows.back().recovery_probability == Approx(1.0));

  // m=3 r=14: alpha 13 puts data on 39 of 40 nodes, so any 14 accessed hold >= 13
  const auto r14 = optimal_alpha(FixedSize{14}, SmallExp{1.0}, 40, 3,
                                 Objective::recovery_probability);
  CHECK(r14.alpha == 13);
  CHECK(r14.value == Approx(1.0).epsilon(1e-12));
  CHECK(r14.table[11].recovery_probability < 1.0);

  SweepAxis axis{SweepParameter::p, 0.1, 0.9, 0.2};
  const auto grid = axis.values();
  REQUIRE(grid.size() == 5);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  CHECK(grid.back() == Approx(0.9));

  const auto series = sweep({40, 2, Probabilistic{0.5}, ScaledExp{1.0}, 5}, axis, 2);
  REQUIRE(series.size() == 5);
  for (std::size_t i = 0; i < series.size(); ++i) {
    CHECK(*series[i].grid_value == Approx(grid[i]));
    CHECK(series[i].rows.size() == 5);
  }

  // m = 30 leaves no feasible alpha at N = 40 r = 10 once m > 40: noted, not thrown
  SweepAxis maxis{SweepParameter::m, 39, 41, 1};
  const auto ms = sweep({40, 1, FixedSize{10}, SmallExp{1.0}, std::nullopt}, maxis);
  REQUIRE(ms.size() == 3);
  CHECK(ms[0].rows.size() == 1);
  CHECK(ms[2].rows.empty());
  CHECK_FALSE(ms[2].notes.empty());

  CHECK(parse_sweep_parameter("r") == SweepParameter::r);
  CHECK_FALSE(parse_sweep_parameter("q").has_value());
}

TEST_CASE("invalid configurations are rejected", "[analysis]") {
  CHECK_THROWS_AS(service_rate({40, 5, 9, {}}, FixedSize{10}, SmallExp{1.0}), ConfigError);
  CHECK_THROWS_AS(service_rate({40, 1, 1, {}}, FixedSize{41}, SmallExp{1.0}), ConfigError);
  CHECK_THROWS_AS(recovery_probability({40, 1, 1, {}}, Probabilistic{-0.5}), ConfigError);
  CHECK(feasible_alpha_limit(40, 3, FixedSize{10}) == 10);
  CHECK(feasible_alpha_limit(40, 3, FixedSize{20}) == 13);
  CHECK(feasible_alpha_limit(40, 3, Probabilistic{0.1}) == 13);
}
