#include "dssalloc/acceptance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dssalloc/analysis.hpp"
#include "dssalloc/cli.hpp"
#include "dssalloc/conditions.hpp"
#include "dssalloc/error.hpp"
#include "dssalloc/numerics.hpp"
#include "dssalloc/presets.hpp"
#include "dssalloc/simulator.hpp"

namespace dssalloc::acceptance {

namespace {

constexpr int kGridNodes[] = {10, 20, 40};
constexpr double kGridMu[] = {0.5, 1.0, 2.0};
constexpr double kGridDelta[] = {1.0, 3.0};

// p in {0.05, 0.10, ..., 0.95}
std::vector<double> grid_p() {
  std::vector<double> out;
  for (int i = 1; i <= 19; ++i) out.push_back(i / 20.0);
  return out;
}

double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

// Visits every (N, m, access) of the shared grid.
template <class Fn>
void for_each_access(Fn fn) {
  for (int nodes : kGridNodes) {
    for (int m = 1; m <= 4; ++m) {
      for (int r = 2; r <= nodes; ++r) fn(nodes, m, AccessModel(FixedSize{r}));
      for (double p : grid_p()) fn(nodes, m, AccessModel(Probabilistic{p}));
    }
  }
}

std::string describe(int nodes, int m, const AccessModel& access, const ServiceModel& service) {
  std::string a = std::visit(
      [](const auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, FixedSize>) {
          return fmt::format("r={}", x.accessed);
        } else {
          return fmt::format("p={}", x.failure);
        }
      },
      access);
  return fmt::format("N={} m={} {} {}", nodes, m, a, name(service));
}

Rational exact(double v) { return Rational(v); }

}  // namespace

Outcome closed_form_identities() {
  Outcome o{"1", "minimal-spreading closed forms", false, ""};
  long long checks = 0;
  double worst = 0.0;
  std::string first_bad;
  for_each_access([&](int nodes, int m, const AccessModel& access) {
    for (double mu : kGridMu) {
      for (const ServiceModel& service : {ServiceModel(SmallExp{mu}), ServiceModel(ScaledExp{mu})}) {
        const double got = service_rate({nodes, m, 1, std::nullopt}, access, service);
        double want = 0.0;
        if (const auto* f = std::get_if<FixedSize>(&access)) {
          want = mu * m * f->accessed / nodes;
        } else {
          want = mu * m * (1.0 - std::get<Probabilistic>(access).failure);
        }
        const double e = rel_err(got, want);
        worst = std::max(worst, e);
        ++checks;
        if (e > 1e-9 && first_bad.empty()) {
          first_bad = fmt::format("{}: {} vs {}", describe(nodes, m, access, service), got, want);
        }
      }
    }
  });
  o.passed = first_bad.empty();
  o.detail = fmt::format("{} checks, worst relative error {:.2e}{}", checks, worst,
                         first_bad.empty() ? "" : "; first failure " + first_bad);
  return o;
}

Outcome small_file_optimality() {
  Outcome o{"2", "small-file argmax is alpha = 1", false, ""};
  long long checks = 0;
  long long bad = 0;
  std::string first_bad;
  for_each_access([&](int nodes, int m, const AccessModel& access) {
    for (double mu : kGridMu) {
      const auto best = optimal_alpha(access, SmallExp{mu}, nodes, m, Objective::service_rate);
      ++checks;
      if (best.alpha != 1) {
        ++bad;
        if (first_bad.empty()) {
          first_bad = fmt::format("{} -> alpha*={}", describe(nodes, m, access, SmallExp{mu}),
                                  best.alpha);
        }
      }
    }
  });
  o.passed = bad == 0;
  o.detail = fmt::format("{} scenarios, {} exceptions{}", checks, bad,
                         first_bad.empty() ? "" : "; first " + first_bad);
  return o;
}

Outcome threshold_numbers() {
  Outcome o{"3", "threshold values", true, ""};
  std::vector<std::string> parts;
  auto check = [&](const std::string& what, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    o.passed = o.passed && ok;
    parts.push_back(fmt::format("{} {:.6g}{}", what, got, ok ? "" : fmt::format(" (want {})", want)));
  };

  check("a.opt", fixed_scaled_optimality_threshold(40, 2, 20).value, 7.5, 1e-3);
  check("a.nonopt", fixed_scaled_nonoptimality_threshold(40, 2, 20).value, 27.0, 1e-3);

  check("b.opt", prob_scaled_optimality_threshold(2, 20).value, 0.8333, 1e-3);
  const auto b_non = prob_scaled_nonoptimality_threshold(2, 20);
  check("b.nonopt(alpha=2)", b_non.terms.at(0).value, 1.0 / 3.0, 1e-3);
  check("b.nonopt(alpha=2)~0.33", b_non.terms.at(0).value, 0.33, 5e-3);

  // alpha = 2 term: 1 + (N-1)(d+2) / (2 (2d+1) C(3,1)) with d = 3
  const double c_opt = fixed_shifted_optimality_threshold(40, 2, 3.0, 1.0, 20).value;
  check("c.opt", c_opt, 1.0 + 39.0 * 5.0 / 42.0, 1e-3);
  const bool below_six = c_opt >= 5.0 && c_opt < 6.0;
  o.passed = o.passed && below_six;
  parts.push_back(fmt::format("c.opt in [5,6): {}", below_six ? "yes" : "no"));

  check("d.opt", prob_shifted_optimality_threshold(2, 3.0, 1.0, 20).value, 0.881, 1e-3);
  check("d.nonopt", prob_shifted_nonoptimality_threshold(2, 3.0, 1.0, 20).value, 0.0815, 1e-3);

  std::string detail;
  for (const auto& p : parts) detail += (detail.empty() ? "" : ", ") + p;
  o.detail = detail;
  return o;
}

Outcome fig4_trend() {
  Outcome o{"4a", "fig4 alpha* for r=10, m=1..4", false, ""};
  const int want[] = {1, 1, 3, 10};
  std::vector<int> got;
  for (const auto& c : find_preset("fig4").curves) {
    const auto* f = std::get_if<FixedSize>(&c.scenario.access);
    if (f == nullptr || f->accessed != 10 || got.size() == 4) continue;
    got.push_back(optimal_alpha(c.scenario.access, c.scenario.service, c.scenario.nodes,
                                c.scenario.m, Objective::service_rate)
                      .alpha);
  }
  o.passed = got.size() == 4 && std::equal(got.begin(), got.end(), want);
  o.detail = fmt::format("alpha* = {} (want 1 1 3 10)", fmt::join(got, " "));
  return o;
}

Outcome fig2_trend() {
  Outcome o{"4b", "fig2 alpha*=1 for rate, P_s(10)=1 at m=4", false, ""};
  std::vector<int> got;
  double p10 = -1.0;
  for (const auto& c : find_preset("fig2").curves) {
    const auto& s = c.scenario;
    got.push_back(optimal_alpha(s.access, s.service, s.nodes, s.m, Objective::service_rate).alpha);
    if (s.m == 4) p10 = recovery_probability({s.nodes, 4, 10, std::nullopt}, s.access);
  }
  const bool all_one = std::all_of(got.begin(), got.end(), [](int a) { return a == 1; });
  o.passed = all_one && std::abs(p10 - 1.0) <= 1e-12;
  o.detail = fmt::format("rate alpha* = {}, P_s(alpha=10, m=4) = {}", fmt::join(got, " "),
                         cli::num(p10));
  return o;
}

Outcome fig3_trend() {
  Outcome o{"4c", "fig3 argmax P_s = 12 at r=14", false, ""};
  for (const auto& c : find_preset("fig3").curves) {
    const auto& s = c.scenario;
    if (std::get<FixedSize>(s.access).accessed != 14) continue;
    const auto best = optimal_alpha(s.access, s.service, s.nodes, s.m, Objective::recovery_probability);
    o.passed = best.alpha == 12;
    const auto at = [&](int a) { return best.table.at(a - 1).recovery_probability; };
    o.detail = fmt::format("argmax = {} with P_s(12) = {}, P_s(13) = {} (alpha up to floor(N/m) = {})",
                           best.alpha, cli::num(at(12)), cli::num(at(13)), best.table.size());
  }
  return o;
}

Outcome certificate_soundness() {
  Outcome o{"5", "optimality certificates agree with brute force", false, ""};
  long long cases = 0, fired_opt = 0, fired_non = 0, bad = 0;
  std::string first_bad;
  for_each_access([&](int nodes, int m, const AccessModel& access) {
    for (double mu : kGridMu) {
      std::vector<ServiceModel> services{ScaledExp{mu}};
      for (double d : kGridDelta) services.push_back(ShiftedExp{d, mu});
      for (const auto& service : services) {
        const auto report = minimal_spreading_conditions(access, service, nodes, m);
        const auto best = optimal_alpha(access, service, nodes, m, Objective::service_rate);
        ++cases;
        bool wrong = false;
        if (report.verdict == Verdict::optimal) {
          ++fired_opt;
          wrong = best.alpha != 1;
        } else if (report.verdict == Verdict::non_optimal) {
          ++fired_non;
          wrong = best.alpha == 1;
        }
        if (wrong) {
          ++bad;
          if (first_bad.empty()) {
            first_bad = fmt::format("{} verdict {} but alpha* = {}", describe(nodes, m, access, service),
                                    to_string(report.verdict), best.alpha);
          }
        }
      }
    }
  });
  o.passed = bad == 0;
  o.detail = fmt::format("{} scenarios, optimality fired {}, non-optimality fired {}, {} counterexamples{}",
                         cases, fired_opt, fired_non, bad, first_bad.empty() ? "" : "; first " + first_bad);
  return o;
}

Outcome scaled_bracket() {
  Outcome o{"6", "m=1 probabilistic scaled argmax inside bracket", true, ""};
  std::vector<std::string> parts;
  for (int i = 1; i <= 9; ++i) {
    const double p = i / 20.0;
    const int alpha = optimal_alpha(Probabilistic{p}, ScaledExp{1.0}, 200, 1, Objective::service_rate).alpha;
    // with p = i/20: (1/2 - p)/p = (10 - i)/i and (1 - p)/p = (20 - i)/i
    const double lo = std::max(1.0, double(10 - i) / i);
    const int hi = (20 - i + i - 1) / i;
    const bool ok = alpha >= lo && alpha <= hi;
    o.passed = o.passed && ok;
    parts.push_back(fmt::format("p={}:{}{}", p, alpha, ok ? "" : "!"));
  }
  std::string detail;
  for (const auto& s : parts) detail += (detail.empty() ? "" : " ") + s;
  o.detail = "alpha* " + detail;
  return o;
}

Outcome simulator_oracle(const Options& options) {
  Outcome o{"7", "simulator agrees with analytic values", false, ""};
  struct Point {
    int nodes, m, alpha;
    int r;
    double p;
  };
  const Point fixed_points[] = {
      {10, 1, 1, 3, 0}, {12, 2, 2, 5, 0}, {15, 3, 2, 8, 0}, {20, 2, 4, 10, 0}, {20, 3, 3, 12, 0}};
  const Point prob_points[] = {
      {10, 1, 2, 0, 0.2}, {12, 2, 3, 0, 0.3}, {15, 3, 2, 0, 0.5}, {20, 2, 5, 0, 0.1}, {20, 3, 4, 0, 0.4}};
  const ServiceModel services[] = {SmallExp{1.0}, ScaledExp{1.5}, ShiftedExp{2.0, 1.0}};

  int points = 0, agree = 0;
  double worst_tv = 0.0;
  std::string misses;
  for (int access_kind = 0; access_kind < 2; ++access_kind) {
    for (const auto& service : services) {
      for (int i = 0; i < 5; ++i) {
        const Point& pt = access_kind == 0 ? fixed_points[i] : prob_points[i];
        const AccessModel access =
            access_kind == 0 ? AccessModel(FixedSize{pt.r}) : AccessModel(Probabilistic{pt.p});
        const SystemConfig config{pt.nodes, pt.m, pt.alpha, std::nullopt};
        const SimConfig sim{options.trials, options.seed + 7919ULL * static_cast<unsigned>(points),
                            options.workers, 100};
        const auto rate = estimate_service_rate(config, access, service, sim);
        const auto prob = estimate_recovery_probability(config, access, sim);
        const double rate_exact = service_rate(config, access, service);
        const double prob_exact = recovery_probability(config, access);
        const double prob_se = std::sqrt(prob_exact * (1.0 - prob_exact) / double(sim.trials));
        const bool rate_ok =
            std::abs(rate.mean - rate_exact) <= 3.0 * rate.std_error + 1e-12 * std::abs(rate_exact);
        const bool prob_ok = std::abs(prob.mean - prob_exact) <= 3.0 * prob_se + 1e-12 * prob_exact;
        worst_tv = std::max(worst_tv, phi_total_variation(rate, config, access));
        ++points;
        if (rate_ok && prob_ok) {
          ++agree;
        } else {
          misses += fmt::format("; miss {} alpha={} ({}{})", describe(pt.nodes, pt.m, access, service),
                                pt.alpha, rate_ok ? "" : "rate", prob_ok ? "" : " prob");
        }
      }
    }
  }
  o.passed = agree >= 28 && worst_tv < 0.005;
  o.detail = fmt::format("{}/{} points within 3 SE, worst phi TV {:.2e}, trials {}{}", agree, points,
                         worst_tv, options.trials, misses);
  return o;
}

Outcome bound_suites() {
  Outcome o{"8", "rate bounds and minimal-vs-maximal ordering", false, ""};
  long long checks = 0, bad = 0;
  std::string first_bad;
  auto fail = [&](std::string why) {
    ++bad;
    if (first_bad.empty()) first_bad = std::move(why);
  };

  // conditional sandwiches; phi <= m*alpha <= 40
  for (double mu : kGridMu) {
    std::vector<ServiceModel> services{SmallExp{mu}, ScaledExp{mu}};
    for (double d : kGridDelta) services.push_back(ShiftedExp{d, mu});
    for (const auto& service : services) {
      for (int m = 1; m <= 4; ++m) {
        for (int alpha = 1; alpha * m <= 40; ++alpha) {
          for (int phi = alpha; phi <= m * alpha; ++phi) {
            const double rate = conditional_rate(service, alpha, phi);
            const auto b = conditional_rate_bounds(service, alpha, phi, m);
            const double slack = 1e-12 * b.upper;
            ++checks;
            if (rate < b.lower - slack || rate > b.upper + slack) {
              fail(fmt::format("{} alpha={} phi={} m={}: {} not in [{}, {}]", name(service), alpha,
                               phi, m, rate, b.lower, b.upper));
            }
          }
        }
      }
    }
  }

  // averaged scaled sandwich over the access grid
  for_each_access([&](int nodes, int m, const AccessModel& access) {
    for (double mu : kGridMu) {
      const int limit = feasible_alpha_limit(nodes, m, access);
      for (int alpha = 1; alpha <= limit; ++alpha) {
        const SystemConfig config{nodes, m, alpha, std::nullopt};
        const auto pmf = access_pmf(config, access);
        double lo = 0.0, hi = 0.0;
        for (int phi = alpha; phi < static_cast<int>(pmf.size()); ++phi) {
          lo += pmf[phi] * mu * (phi - alpha + 1);
          hi += pmf[phi] * mu * phi;
        }
        const double rate = service_rate(config, access, ScaledExp{mu});
        ++checks;
        if (rate < lo * (1 - 1e-12) || rate > hi * (1 + 1e-12)) {
          fail(fmt::format("{} alpha={}: {} not in [{}, {}]", describe(nodes, m, access, ScaledExp{mu}),
                           alpha, rate, lo, hi));
        }
      }
    }
  });

  // maximal vs minimal spreading where alpha = r is feasible with r*m >= N, i.e. r*m = N
  long long extreme_points = 0;
  for (int nodes : kGridNodes) {
    for (int m = 1; m <= 4; ++m) {
      for (int r = 2; r <= nodes; ++r) {
        if (r * m != nodes) continue;
        const Rational ratio = Rational(binomial_big(r * m, r), binomial_big(nodes, r));
        const Rational miss = Rational(binomial_big(nodes - m, r), binomial_big(nodes, r));
        for (double mu : kGridMu) {
          const Rational hi = exact(mu) * r * ratio / harmonic_exact(r);
          const Rational lo = exact(mu) * m * r / nodes;
          const double hi_d = maximal_spreading_rate(FixedSize{r}, ScaledExp{mu}, nodes, m);
          const double lo_d = minimal_spreading_rate(FixedSize{r}, ScaledExp{mu}, nodes, m);
          ++extreme_points;
          if (!(hi >= lo)) fail(fmt::format("scaled N={} m={} r={} mu={}: max < min", nodes, m, r, mu));
          if (rel_err(hi_d, hi.convert_to<double>()) > 1e-12 || rel_err(lo_d, lo.convert_to<double>()) > 1e-12) {
            fail(fmt::format("scaled closed form mismatch N={} m={} r={}", nodes, m, r));
          }
        }
        for (double d : kGridDelta) {
          const Rational hi = Rational(r) * ratio / exact(d);
          const Rational lo = (1 - miss) / exact(d);
          const double hi_d = maximal_spreading_rate(FixedSize{r}, ConstantTime{d}, nodes, m);
          const double lo_d = minimal_spreading_rate(FixedSize{r}, ConstantTime{d}, nodes, m);
          ++extreme_points;
          if (!(hi >= lo)) fail(fmt::format("constant N={} m={} r={} delta={}: max < min", nodes, m, r, d));
          if (rel_err(hi_d, hi.convert_to<double>()) > 1e-12 || rel_err(lo_d, lo.convert_to<double>()) > 1e-12) {
            fail(fmt::format("constant closed form mismatch N={} m={} r={}", nodes, m, r));
          }
        }
      }
    }
  }
  checks += extreme_points;
  o.passed = bad == 0 && extreme_points > 0;
  o.detail = fmt::format("{} checks ({} extreme-spreading points), {} violations{}", checks, extreme_points, bad,
                         first_bad.empty() ? "" : "; first " + first_bad);
  return o;
}

Outcome determinism(const Options& options) {
  Outcome o{"9", "byte-identical simulate and sweep output", false, ""};
  auto capture = [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::main(args, out, err);
    return std::make_pair(code, out.str());
  };
  const std::string trials = std::to_string(options.trials);
  const std::string seed = std::to_string(options.seed);
  const std::vector<std::vector<std::string>> sims = {
      {"simulate", "-N", "20", "-m", "2", "--alpha", "3", "--access", "fixed_size", "-r", "8",
       "--service", "scaled_exp", "--trials", trials, "--seed", seed, "--format", "json"},
      {"simulate", "-N", "15", "-m", "3", "--alpha", "2", "--access", "probabilistic", "-p", "0.35",
       "--service", "shifted_exp", "--delta", "2", "--trials", trials, "--seed", seed, "--format", "csv"},
  };
  bool ok = true;
  std::vector<std::string> parts;
  for (const auto& base : sims) {
    auto one = base, eight = base;
    one.insert(one.end(), {"--workers", "1"});
    eight.insert(eight.end(), {"--workers", "8"});
    const auto a = capture(one);
    const auto b = capture(eight);
    const bool same = a.first == 0 && b.first == 0 && a.second == b.second && !a.second.empty();
    ok = ok && same;
    parts.push_back(fmt::format("simulate {} {}", base[8], same ? "identical" : "DIFFERENT"));
  }
  for (const char* preset : {"fig4", "fig10"}) {
    const std::vector<std::string> args{"sweep", "--preset", preset, "--format", "csv"};
    const auto a = capture(args);
    const auto b = capture(args);
    const bool same = a.first == 0 && a.second == b.second && !a.second.empty();
    ok = ok && same;
    parts.push_back(fmt::format("sweep {} {}", preset, same ? "stable" : "UNSTABLE"));
  }
  {
    const std::vector<std::string> base{"sweep", "-m", "2", "--access", "probabilistic", "--service",
                                        "scaled_exp", "--sweep-param", "p", "--start", "0.05",
                                        "--stop", "0.95", "--step", "0.05", "--format", "csv"};
    auto one = base, eight = base;
    one.insert(one.end(), {"--workers", "1"});
    eight.insert(eight.end(), {"--workers", "8"});
    const auto a = capture(one);
    const auto b = capture(eight);
    const bool same = a.first == 0 && a.second == b.second && !a.second.empty();
    ok = ok && same;
    parts.push_back(fmt::format("p-grid sweep 1 vs 8 workers {}", same ? "identical" : "DIFFERENT"));
  }
  o.passed = ok;
  std::string detail;
  for (const auto& s : parts) detail += (detail.empty() ? "" : ", ") + s;
  o.detail = detail;
  return o;
}

std::vector<Outcome> run_all(const Options& options,
                             const std::function<void(const Outcome&)>& on_outcome) {
  struct Step {
    const char* id;
    std::function<Outcome()> fn;
  };
  const std::vector<Step> steps = {
      {"1", closed_form_identities},
      {"2", small_file_optimality},
      {"3", threshold_numbers},
      {"4a", fig4_trend},
      {"4b", fig2_trend},
      {"4c", fig3_trend},
      {"5", certificate_soundness},
      {"6", scaled_bracket},
      {"7", [&] { return simulator_oracle(options); }},
      {"8", bound_suites},
      {"9", [&] { return determinism(options); }},
  };
  std::vector<Outcome> out;
  for (const auto& step : steps) {
    Outcome o;
    try {
      o = step.fn();
    } catch (const std::exception& e) {
      o = Outcome{step.id, "(aborted)", false, fmt::format("threw: {}", e.what())};
    }
    if (on_outcome) on_outcome(o);
    out.push_back(std::move(o));
  }
  return out;
}

std::string format_line(const Outcome& outcome) {
  return fmt::format("{} {:<3} {}  ({})", outcome.passed ? "PASS" : "FAIL", outcome.id, outcome.title,
                     outcome.detail);
}

}  // namespace dssalloc::acceptance
