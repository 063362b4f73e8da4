#include <catch_amalgamated.hpp>

#include <cmath>

#include "dssalloc/error.hpp"
#include "dssalloc/models.hpp"
#include "dssalloc/numerics.hpp"

using namespace dssalloc;
using Catch::Approx;

namespace {

// E[alpha-th smallest of phi iid Exp(rate)] = integral of P(T > t), with
// P(T > t) = sum_{j<alpha} C(phi,j) (1-e^-rt)^j e^-rt(phi-j). Simpson's rule.
double order_stat_mean_by_quadrature(int alpha, int phi, double rate) {
  auto survival = [&](double t) {
    const double f = 1.0 - std::exp(-rate * t);
    double s = 0.0;
    for (int j = 0; j < alpha; ++j) {
      double c = 1.0;
      for (int i = 0; i < j; ++i) c = c * (phi - i) / (i + 1);
      s += c * std::pow(f, j) * std::exp(-rate * t * (phi - j));
    }
    return s;
  };
  const double upper = 60.0 / rate;
  const int n = 20000;
  const double h = upper / n;
  double acc = survival(0.0) + survival(upper);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * survival(i * h);
  return acc * h / 3.0;
}

double expected_mean(const ServiceModel& s, int alpha, int phi) {
  if (auto* v = std::get_if<SmallExp>(&s)) return order_stat_mean_by_quadrature(alpha, phi, v->mu);
  if (auto* v = std::get_if<ScaledExp>(&s))
    return order_stat_mean_by_quadrature(alpha, phi, alpha * v->mu);
  if (auto* v = std::get_if<ShiftedExp>(&s))
    return v->delta / alpha + order_stat_mean_by_quadrature(alpha, phi, v->mu);
  return std::get<ConstantTime>(s).delta / alpha;
}

}  // namespace

TEST_CASE("conditional rate spot values", "[models]") {
  CHECK(conditional_rate(SmallExp{1.0}, 1, 1) == Approx(1.0));
  CHECK(conditional_rate(SmallExp{1.0}, 2, 2) == Approx(2.0 / 3.0));
  CHECK(conditional_rate(ScaledExp{1.0}, 2, 2) == Approx(4.0 / 3.0));
  CHECK(conditional_rate(ShiftedExp{3.0, 1.0}, 2, 2) == Approx(1.0 / 3.0));
  CHECK(conditional_rate(ConstantTime{1.0}, 4, 7) == Approx(4.0));
  CHECK(conditional_rate(SmallExp{1.0}, 3, 2) == 0.0);
  CHECK(conditional_rate(ConstantTime{2.0}, 3, 0) == 0.0);
}

TEST_CASE("conditional mean time matches order-statistic quadrature", "[models]") {
  const ServiceModel models[] = {SmallExp{1.0}, SmallExp{2.5}, ScaledExp{1.0}, ScaledExp{0.4},
                                 ShiftedExp{3.0, 1.0}, ShiftedExp{0.5, 2.0}, ConstantTime{1.7}};
  for (const auto& s : models) {
    for (int alpha = 1; alpha <= 5; ++alpha) {
      for (int phi = alpha; phi <= 3 * alpha; ++phi) {
        INFO(name(s) << " alpha=" << alpha << " phi=" << phi);
        const double want = expected_mean(s, alpha, phi);
        REQUIRE(conditional_mean_time(s, alpha, phi) == Approx(want).epsilon(1e-9));
        REQUIRE(conditional_rate(s, alpha, phi) == Approx(1.0 / want).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("shifted exponential with zero shift is the small-file model", "[models]") {
  for (double mu : {0.5, 1.0, 3.0}) {
    for (int alpha = 1; alpha <= 8; ++alpha) {
      for (int phi = alpha; phi <= 4 * alpha; ++phi) {
        REQUIRE(conditional_rate(ShiftedExp{0.0, mu}, alpha, phi) ==
                Approx(conditional_rate(SmallExp{mu}, alpha, phi)).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("rate bounds bracket the conditional rate", "[models]") {
  const auto b = conditional_rate_bounds(ShiftedExp{3.0, 1.0}, 2, 4, 2);
  CHECK(b.lower == Approx(6.0 / 13.0));
  CHECK(b.upper == Approx(0.8));
  const auto s = conditional_rate_bounds(ScaledExp{1.0}, 1, 3, 3);
  CHECK(s.lower == Approx(3.0));
  CHECK(s.upper == Approx(3.0));

  const ServiceModel models[] = {SmallExp{1.0}, ScaledExp{2.0}, ShiftedExp{3.0, 1.0},
                                 ShiftedExp{0.2, 5.0}, ConstantTime{1.0}};
  for (const auto& svc : models) {
    for (int m = 1; m <= 5; ++m) {
      for (int alpha = 1; alpha <= 12; ++alpha) {
        for (int phi = alpha; phi <= m * alpha; ++phi) {
          const auto bb = conditional_rate_bounds(svc, alpha, phi, m);
          const double rate = conditional_rate(svc, alpha, phi);
          INFO(name(svc) << " m=" << m << " alpha=" << alpha << " phi=" << phi);
          REQUIRE(bb.lower <= rate * (1 + 1e-12));
          REQUIRE(rate <= bb.upper * (1 + 1e-12));
        }
      }
    }
  }
  CHECK_THROWS_AS(conditional_rate_bounds(SmallExp{1.0}, 3, 2, 2), ConfigError);
  CHECK_THROWS_AS(conditional_rate_bounds(SmallExp{1.0}, 2, 5, 2), ConfigError);
}

TEST_CASE("conditional rate is increasing in phi", "[models]") {
  const ServiceModel models[] = {SmallExp{1.0}, ScaledExp{1.0}, ShiftedExp{3.0, 1.0}};
  for (const auto& s : models) {
    for (int alpha = 1; alpha <= 10; ++alpha) {
      for (int phi = alpha; phi < 5 * alpha; ++phi) {
        REQUIRE(conditional_rate(s, alpha, phi + 1) > conditional_rate(s, alpha, phi));
      }
    }
  }
}

TEST_CASE("system and model validation", "[models]") {
  CHECK_NOTHROW(SystemConfig{40, 4, 10, std::nullopt}.validate());
  CHECK_THROWS_AS((SystemConfig{40, 4, 11, std::nullopt}.validate()), ConfigError);
  CHECK_THROWS_AS((SystemConfig{0, 1, 1, std::nullopt}.validate()), ConfigError);
  CHECK_THROWS_AS((SystemConfig{10, 0, 1, std::nullopt}.validate()), ConfigError);
  CHECK_FALSE(SystemConfig{40, 2, 5, 10}.block_split_uneven());
  CHECK(SystemConfig{40, 2, 3, 10}.block_split_uneven());
  CHECK(SystemConfig{40, 3, 7, std::nullopt}.max_alpha() == 13);

  CHECK_THROWS_AS(validate(AccessModel{FixedSize{0}}, 10), ConfigError);
  CHECK_THROWS_AS(validate(AccessModel{FixedSize{11}}, 10), ConfigError);
  CHECK_THROWS_AS(validate(AccessModel{Probabilistic{1.2}}, 10), ConfigError);
  CHECK_NOTHROW(validate(AccessModel{Probabilistic{0.0}}, 10));
  CHECK_THROWS_AS(validate(ServiceModel{SmallExp{0.0}}), ConfigError);
  CHECK_THROWS_AS(validate(ServiceModel{ShiftedExp{-1.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(validate(ServiceModel{ConstantTime{0.0}}), ConfigError);
}
