#include "dssalloc/presets.hpp"

#include <fmt/format.h>

#include "dssalloc/error.hpp"

namespace dssalloc {

namespace {

constexpr int kNodes = 40;
constexpr int kProbAlphaCap = 10;

PresetCurve fixed(int m, int r, ServiceModel service) {
  return {fmt::format("m={} r={}", m, r), {kNodes, m, FixedSize{r}, service, std::nullopt}};
}

PresetCurve prob(int m, double p, ServiceModel service) {
  return {fmt::format("m={} p={}", m, p), {kNodes, m, Probabilistic{p}, service, kProbAlphaCap}};
}

std::vector<Preset> build() {
  const ServiceModel small = SmallExp{1.0};
  const ServiceModel scaled = ScaledExp{1.0};
  const ServiceModel shifted = ShiftedExp{3.0, 1.0};
  std::vector<Preset> out;

  auto m_then_r = [](std::string name, std::string desc, ServiceModel s, int r, int m,
                     std::vector<int> rs) {
    Preset p{std::move(name), std::move(desc), {}};
    for (int mm = 1; mm <= 4; ++mm) p.curves.push_back(fixed(mm, r, s));
    for (int rr : rs) p.curves.push_back(fixed(m, rr, s));
    return p;
  };
  auto grid_fixed = [](std::string name, std::string desc, ServiceModel s) {
    Preset p{std::move(name), std::move(desc), {}};
    for (int m : {3, 4}) {
      for (int r : {8, 10}) p.curves.push_back(fixed(m, r, s));
    }
    return p;
  };
  auto m_then_p = [](std::string name, std::string desc, ServiceModel s, int m,
                     std::vector<double> ps) {
    Preset p{std::move(name), std::move(desc), {}};
    for (int mm = 1; mm <= 4; ++mm) p.curves.push_back(prob(mm, 0.3, s));
    for (double pp : ps) p.curves.push_back(prob(m, pp, s));
    return p;
  };
  auto grid_prob = [](std::string name, std::string desc, ServiceModel s) {
    Preset p{std::move(name), std::move(desc), {}};
    for (int m : {2, 3}) {
      for (double pp : {0.45, 0.7}) p.curves.push_back(prob(m, pp, s));
    }
    return p;
  };

  {
    Preset p{"fig2", "small-file exp(1), fixed-size, N=40, r=10, m=1..4", {}};
    for (int m = 1; m <= 4; ++m) p.curves.push_back(fixed(m, 10, small));
    out.push_back(std::move(p));
  }
  {
    Preset p{"fig3", "small-file exp(1), fixed-size, N=40, m=3, r=10..14", {}};
    for (int r = 10; r <= 14; ++r) p.curves.push_back(fixed(3, r, small));
    out.push_back(std::move(p));
  }
  out.push_back(m_then_r("fig4",
                         "scaled exp(1), fixed-size, N=40; r=10 with m=1..4, then m=3 with "
                         "r in {8,10,12,13}",
                         scaled, 10, 3, {8, 10, 12, 13}));
  out.push_back(grid_fixed("fig5", "scaled exp(1), fixed-size, N=40, m in {3,4} x r in {8,10}",
                           scaled));
  out.push_back(m_then_p("fig6",
                         "scaled exp(1), probabilistic, N=40, alpha<=10; p=0.3 with m=1..4, "
                         "then m=2 with p in {0.5,0.55,0.65,0.7}",
                         scaled, 2, {0.5, 0.55, 0.65, 0.7}));
  out.push_back(grid_prob("fig7",
                          "scaled exp(1), probabilistic, N=40, alpha<=10, m in {2,3} x p in "
                          "{0.45,0.7}",
                          scaled));
  out.push_back(m_then_r("fig8",
                         "shifted exp(3,1), fixed-size, N=40; r=10 with m=1..4, then m=2 with "
                         "r in {10,13,17,20}",
                         shifted, 10, 2, {10, 13, 17, 20}));
  out.push_back(grid_fixed("fig9", "shifted exp(3,1), fixed-size, N=40, m in {3,4} x r in {8,10}",
                           shifted));
  out.push_back(m_then_p("fig10",
                         "shifted exp(3,1), probabilistic, N=40, alpha<=10; p=0.3 with m=1..4, "
                         "then m=2 with p in {0.4,0.5,0.6,0.7}",
                         shifted, 2, {0.4, 0.5, 0.6, 0.7}));
  out.push_back(grid_prob("fig11",
                          "shifted exp(3,1), probabilistic, N=40, alpha<=10, m in {2,3} x p in "
                          "{0.45,0.7}",
                          shifted));
  {
    Preset p{"small-prob-m", "small-file exp(1), probabilistic, N=40, p=0.3, m=1..4", {}};
    for (int m = 1; m <= 4; ++m) p.curves.push_back(prob(m, 0.3, small));
    out.push_back(std::move(p));
  }
  {
    Preset p{"small-prob-p", "small-file exp(1), probabilistic, N=40, m=3, p in {0.2,0.4,0.6,0.8}",
             {}};
    for (double pp : {0.2, 0.4, 0.6, 0.8}) p.curves.push_back(prob(3, pp, small));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError(fmt::format("unknown preset '{}' (known: {})", name, known));
}

}  // namespace dssalloc
