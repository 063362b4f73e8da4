#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dssalloc::acceptance {

struct Outcome {
  std::string id;  // "1", "4a", ...
  std::string title;
  bool passed = false;
  std::string detail;
};

struct Options {
  long long trials = 1'000'000;
  std::uint64_t seed = 20240917;
  int workers = 1;
};

Outcome closed_form_identities();
Outcome small_file_optimality();
Outcome threshold_numbers();
Outcome fig4_trend();
Outcome fig2_trend();
Outcome fig3_trend();
Outcome certificate_soundness();
Outcome scaled_bracket();
Outcome simulator_oracle(const Options& options);
Outcome bound_suites();
Outcome determinism(const Options& options);

/// Every criterion in order; `on_outcome` sees each result as it finishes.
std::vector<Outcome> run_all(const Options& options,
                             const std::function<void(const Outcome&)>& on_outcome = {});

/// "PASS 4a  title  (detail)"
std::string format_line(const Outcome& outcome);

}  // namespace dssalloc::acceptance
