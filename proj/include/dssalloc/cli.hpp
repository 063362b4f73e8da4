#pragma once

// Command-line front end: RunSpec <-> JSON, and execution of one command.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dssalloc/analysis.hpp"
#include "dssalloc/simulator.hpp"

namespace dssalloc::cli {

enum class Command { rate, prob, optimal, conditions, sweep, simulate, validate };
enum class Format { table, csv, json };

// Exit codes.
constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kConfig = 2;
constexpr int kInfeasible = 3;
constexpr int kValidation = 4;

// Access and service are kept as loose field bags until a command resolves
// them, since e.g. `conditions` runs without r or p.
struct AccessSpec {
  std::string model;  // fixed_size | probabilistic
  std::optional<int> r;
  std::optional<double> p;
};

struct ServiceSpec {
  std::string model;  // small_exp | scaled_exp | shifted_exp | constant
  std::optional<double> mu;
  std::optional<double> delta;
};

struct SimSpec {
  long long trials = 1'000'000;
  std::uint64_t seed = 1;
  std::optional<int> workers;
  long long min_count = 100;
};

struct RunSpec {
  Command command = Command::rate;
  int nodes = 40;
  std::optional<int> m;
  std::optional<int> alpha;
  std::optional<int> blocks;
  std::optional<AccessSpec> access;
  std::optional<ServiceSpec> service;
  Objective objective = Objective::service_rate;
  std::optional<int> alpha_max;
  std::optional<SweepAxis> sweep_axis;
  std::optional<std::string> preset;
  SimSpec sim;
  Format format = Format::table;
  std::optional<std::string> output_path;
};

std::string to_string(Command c);
std::string to_string(Format f);
Command parse_command(const std::string& s);
Format parse_format(const std::string& s);

/// Accepts short aliases (fixed, prob, small, scaled, shifted, const).
std::string canonical_access(const std::string& s);
std::string canonical_service(const std::string& s);

/// Throws ConfigError on unknown fields or wrong types.
RunSpec from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunSpec& spec);

/// Resolved models; throw ConfigError when a required field is missing.
AccessModel resolve_access(const RunSpec& spec);
ServiceModel resolve_service(const RunSpec& spec);

/// Executes `spec`, writing the artifact to `out` (or output_path) and a
/// one-line reason to `err` on failure. Returns the exit code.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Full command line: `dssalloc <command> [options]`.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "%.12g" formatting used for every number the CLI prints.
std::string num(double v);

}  // namespace dssalloc::cli
