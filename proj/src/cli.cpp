#include "dssalloc/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <variant>

#include "dssalloc/acceptance.hpp"
#include "dssalloc/conditions.hpp"
#include "dssalloc/detail/overloaded.hpp"
#include "dssalloc/error.hpp"
#include "dssalloc/presets.hpp"

namespace dssalloc::cli {

using nlohmann::json;
using detail::overloaded;

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  return fmt::format("{:.12g}", v);
}

namespace {

// ---- names ----------------------------------------------------------------

constexpr std::pair<Command, const char*> kCommands[] = {
    {Command::rate, "rate"},         {Command::prob, "prob"},
    {Command::optimal, "optimal"},   {Command::conditions, "conditions"},
    {Command::sweep, "sweep"},       {Command::simulate, "simulate"},
    {Command::validate, "validate"},
};

constexpr std::pair<Format, const char*> kFormats[] = {
    {Format::table, "table"}, {Format::csv, "csv"}, {Format::json, "json"}};

std::string objective_name(Objective o) {
  return o == Objective::service_rate ? "service_rate" : "recovery_probability";
}

Objective parse_objective(const std::string& s) {
  if (s == "service_rate" || s == "rate") return Objective::service_rate;
  if (s == "recovery_probability" || s == "recovery_prob" || s == "prob") {
    return Objective::recovery_probability;
  }
  throw ConfigError(fmt::format("unknown objective '{}' (service_rate | recovery_probability)", s));
}

// ---- JSON reading -----------------------------------------------------------

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(fmt::format("'{}' must be a JSON object", where));
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(fmt::format("unknown field '{}' in {}", key, where));
    }
  }
}

int get_int(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(fmt::format("'{}' must be an integer", key));
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(fmt::format("'{}' out of range", key));
  }
  return static_cast<int>(x);
}

long long get_long(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(fmt::format("'{}' must be an integer", key));
  return v.get<long long>();
}

double get_double(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(fmt::format("'{}' must be a number", key));
  return v.get<double>();
}

std::string get_string(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(fmt::format("'{}' must be a string", key));
  return v.get<std::string>();
}

// ---- output -----------------------------------------------------------------

using Cell = std::variant<std::monostate, long long, double, std::string, bool>;

std::string text(const Cell& c) {
  return std::visit(overloaded{
                        [](std::monostate) { return std::string(); },
                        [](long long v) { return std::to_string(v); },
                        [](double v) { return num(v); },
                        [](const std::string& s) { return s; },
                        [](bool b) { return std::string(b ? "true" : "false"); },
                    },
                    c);
}

json to_json_cell(const Cell& c) {
  return std::visit(overloaded{
                        [](std::monostate) { return json(nullptr); },
                        [](long long v) { return json(v); },
                        [](double v) {
                          if (!std::isfinite(v)) return json(num(v));
                          return json(std::stod(num(v)));
                        },
                        [](const std::string& s) { return json(s); },
                        [](bool b) { return json(b); },
                    },
                    c);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

using Fields = std::vector<std::pair<std::string, Cell>>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Report {
  Fields summary;
  std::optional<Table> table;
  std::string table_key = "table";
  json extra = json::object();  // json format only
};

void write_aligned(std::ostream& os, const std::vector<std::vector<std::string>>& lines) {
  std::vector<std::size_t> width;
  for (const auto& line : lines) {
    width.resize(std::max(width.size(), line.size()), 0);
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  for (const auto& line : lines) {
    std::string row;
    for (std::size_t i = 0; i < line.size(); ++i) {
      row += line[i];
      if (i + 1 < line.size()) row += std::string(width[i] - line[i].size() + 2, ' ');
    }
    os << row << '\n';
  }
}

void render(const Report& report, Format format, std::ostream& os) {
  switch (format) {
    case Format::csv: {
      std::vector<std::string> header;
      std::vector<std::vector<Cell>> rows;
      if (report.table) {
        header = report.table->columns;
        rows = report.table->rows;
      } else {
        rows.emplace_back();
        for (const auto& [k, v] : report.summary) {
          header.push_back(k);
          rows.back().push_back(v);
        }
      }
      std::string line;
      for (std::size_t i = 0; i < header.size(); ++i) line += (i ? "," : "") + csv_field(header[i]);
      os << line << '\n';
      for (const auto& row : rows) {
        line.clear();
        for (std::size_t i = 0; i < row.size(); ++i) line += (i ? "," : "") + csv_field(text(row[i]));
        os << line << '\n';
      }
      break;
    }
    case Format::json: {
      nlohmann::ordered_json j = nlohmann::ordered_json::object();
      for (const auto& [k, v] : report.summary) j[k] = to_json_cell(v);
      if (report.table) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& row : report.table->rows) {
          nlohmann::ordered_json obj = nlohmann::ordered_json::object();
          for (std::size_t i = 0; i < row.size(); ++i) obj[report.table->columns[i]] = to_json_cell(row[i]);
          arr.push_back(std::move(obj));
        }
        j[report.table_key] = std::move(arr);
      }
      for (const auto& [k, v] : report.extra.items()) j[k] = v;
      os << j.dump(2) << '\n';
      break;
    }
    case Format::table: {
      std::vector<std::vector<std::string>> lines;
      for (const auto& [k, v] : report.summary) lines.push_back({k, text(v)});
      write_aligned(os, lines);
      if (report.table) {
        if (!report.summary.empty()) os << '\n';
        lines.clear();
        lines.push_back(report.table->columns);
        for (const auto& row : report.table->rows) {
          std::vector<std::string> cells;
          for (const auto& c : row) cells.push_back(text(c));
          lines.push_back(std::move(cells));
        }
        write_aligned(os, lines);
      }
      break;
    }
  }
}

// ---- scenario helpers ---------------------------------------------------------

int require_m(const RunSpec& spec) {
  if (!spec.m) throw ConfigError("m is required");
  return *spec.m;
}

int require_alpha(const RunSpec& spec) {
  if (!spec.alpha) throw ConfigError("alpha is required");
  return *spec.alpha;
}

Fields scenario_fields(int nodes, int m, const AccessModel& access,
                       const std::optional<ServiceModel>& service) {
  Fields f{{"N", (long long)nodes}, {"m", (long long)m}, {"access", name(access)}};
  const auto* fixed = std::get_if<FixedSize>(&access);
  const auto* prob = std::get_if<Probabilistic>(&access);
  f.emplace_back("r", fixed ? Cell((long long)fixed->accessed) : Cell());
  f.emplace_back("p", prob ? Cell(prob->failure) : Cell());
  Cell svc, mu, delta;
  if (service) {
    svc = name(*service);
    std::visit(overloaded{
                   [&](const SmallExp& s) { mu = s.mu; },
                   [&](const ScaledExp& s) { mu = s.mu; },
                   [&](const ShiftedExp& s) {
                     mu = s.mu;
                     delta = s.delta;
                   },
                   [&](const ConstantTime& s) { delta = s.delta; },
               },
               *service);
  }
  f.emplace_back("service", svc);
  f.emplace_back("mu", mu);
  f.emplace_back("delta", delta);
  return f;
}

std::vector<Cell> values(const Fields& f) {
  std::vector<Cell> out;
  for (const auto& [k, v] : f) out.push_back(v);
  return out;
}

std::vector<std::string> keys(const Fields& f) {
  std::vector<std::string> out;
  for (const auto& [k, v] : f) out.push_back(k);
  return out;
}

void require_fits(int nodes, int m, int alpha) {
  if (alpha >= 1 && m >= 1 && static_cast<long long>(m) * alpha > nodes) {
    throw InfeasibleError(fmt::format("m*alpha = {} exceeds N = {}", m * alpha, nodes));
  }
}

int workers_for(const RunSpec& spec) {
  if (spec.sim.workers) {
    if (*spec.sim.workers < 1) throw ConfigError("workers must be positive");
    return *spec.sim.workers;
  }
  return default_workers();
}

// ---- commands -------------------------------------------------------------------

Report cmd_metric(const RunSpec& spec, std::ostream& err, bool with_rate) {
  const int m = require_m(spec);
  const int alpha = require_alpha(spec);
  const auto access = resolve_access(spec);
  std::optional<ServiceModel> service;
  if (with_rate || spec.service) service = resolve_service(spec);
  require_fits(spec.nodes, m, alpha);
  const SystemConfig config{spec.nodes, m, alpha, spec.blocks};
  config.validate();
  if (config.block_split_uneven()) {
    err << fmt::format("note: k={} is not divisible by alpha={}; nodes hold ceil/floor shares\n",
                       *spec.blocks, alpha);
  }
  Fields row = scenario_fields(spec.nodes, m, access, service);
  row.emplace_back("alpha", (long long)alpha);
  if (service) row.emplace_back("service_rate", service_rate(config, access, *service));
  row.emplace_back("recovery_prob", recovery_probability(config, access));
  Report r;
  r.table = Table{keys(row), {values(row)}};
  if (spec.format != Format::csv) {
    r.summary = row;
    r.table.reset();
  }
  return r;
}

Report cmd_optimal(const RunSpec& spec) {
  const int m = require_m(spec);
  const auto access = resolve_access(spec);
  const auto service = resolve_service(spec);
  const auto best = optimal_alpha(access, service, spec.nodes, m, spec.objective, spec.alpha_max);
  Report r;
  const Fields scen = scenario_fields(spec.nodes, m, access, service);
  r.summary = scen;
  r.summary.emplace_back("objective", objective_name(spec.objective));
  r.summary.emplace_back("alpha_star", (long long)best.alpha);
  r.summary.emplace_back("value", best.value);
  Table t;
  t.columns = keys(scen);
  for (const char* c : {"alpha", "service_rate", "recovery_prob", "optimal"}) t.columns.push_back(c);
  for (const auto& row : best.table) {
    auto cells = values(scen);
    cells.emplace_back((long long)row.alpha);
    cells.emplace_back(row.service_rate);
    cells.emplace_back(row.recovery_probability);
    cells.emplace_back(row.alpha == best.alpha);
    t.rows.push_back(std::move(cells));
  }
  if (spec.format == Format::table) {
    // the scenario is already in the summary
    for (auto& row : t.rows) row.erase(row.begin(), row.begin() + scen.size());
    t.columns.erase(t.columns.begin(), t.columns.begin() + scen.size());
  }
  r.table = std::move(t);
  return r;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (int x : v) out += (out.empty() ? "" : " ") + std::to_string(x);
  return out;
}

Report cmd_conditions(const RunSpec& spec) {
  const int m = require_m(spec);
  if (!spec.access) throw ConfigError("access model is required");
  const ServiceModel service = resolve_service(spec);
  const bool fixed = canonical_access(spec.access->model) == "fixed_size";
  const bool has_param = fixed ? spec.access->r.has_value() : spec.access->p.has_value();
  Report rep;

  if (const auto* c = std::get_if<ConstantTime>(&service)) {
    if (fixed || m != 1 || !has_param) {
      throw ConfigError("constant service conditions need probabilistic access, m = 1 and p");
    }
    const double p = *spec.access->p;
    const auto report = constant_prob_m1_report(p, c->delta, spec.alpha_max.value_or(200));
    rep.summary = scenario_fields(spec.nodes, m, Probabilistic{p}, service);
    rep.summary.emplace_back("closed_form_candidates", join(report.closed_form_candidates));
    rep.summary.emplace_back("corrected_candidates", join(report.corrected_candidates));
    rep.summary.emplace_back("brute_force_alpha", (long long)report.brute_force_alpha);
    rep.summary.emplace_back("brute_force_rate", report.brute_force_rate);
    rep.summary.emplace_back("agrees", report.agrees);
    return rep;
  }

  ConditionReport report;
  if (has_param) {
    if (spec.alpha_max) throw ConfigError("alpha_max applies only when r / p is not given");
    report = minimal_spreading_conditions(resolve_access(spec), service, spec.nodes, m);
  } else {
    if (spec.nodes < 1 || m < 1) throw ConfigError("N and m must be positive");
    const int limit = spec.alpha_max.value_or(spec.nodes / m);
    report.access_kind = fixed ? AccessKind::fixed_size : AccessKind::probabilistic;
    report.alpha_max = limit;
    const auto* shifted = std::get_if<ShiftedExp>(&service);
    if (!shifted && !std::holds_alternative<ScaledExp>(service)) {
      throw ConfigError("conditions need scaled_exp or shifted_exp service");
    }
    report.service_kind = shifted ? ServiceKind::shifted_exp : ServiceKind::scaled_exp;
    if (fixed) {
      report.optimality = shifted ? fixed_shifted_optimality_threshold(spec.nodes, m, shifted->delta,
                                                                       shifted->mu, limit)
                                  : fixed_scaled_optimality_threshold(spec.nodes, m, limit);
      report.nonoptimality =
          shifted ? fixed_shifted_nonoptimality_threshold(spec.nodes, m, shifted->delta,
                                                          shifted->mu, limit)
                  : fixed_scaled_nonoptimality_threshold(spec.nodes, m, limit);
    } else {
      report.optimality = shifted ? prob_shifted_optimality_threshold(m, shifted->delta,
                                                                      shifted->mu, limit)
                                  : prob_scaled_optimality_threshold(m, limit);
      report.nonoptimality = shifted ? prob_shifted_nonoptimality_threshold(
                                           m, shifted->delta, shifted->mu, limit)
                                     : prob_scaled_nonoptimality_threshold(m, limit);
      report.optimality_vacuous = report.optimality.vacuous;
      report.nonoptimality_vacuous = report.nonoptimality.vacuous;
    }
  }

  rep.summary = {{"access", to_string(report.access_kind)},
                 {"service", to_string(report.service_kind)},
                 {"N", (long long)spec.nodes},
                 {"m", (long long)m}};
  if (has_param) {
    if (fixed) {
      rep.summary.emplace_back("r", (long long)*spec.access->r);
    } else {
      rep.summary.emplace_back("p", *spec.access->p);
    }
  }
  rep.summary.emplace_back("alpha_max", (long long)report.alpha_max);
  const char* bound = fixed ? "r" : "p";
  rep.summary.emplace_back("optimality_threshold", report.optimality.value);
  rep.summary.emplace_back("optimality_alpha", (long long)report.optimality.witness_alpha);
  rep.summary.emplace_back("optimality_rule",
                           fmt::format("{} {} threshold", bound, fixed ? "<=" : ">="));
  rep.summary.emplace_back("nonoptimality_threshold", report.nonoptimality.value);
  rep.summary.emplace_back("nonoptimality_alpha", (long long)report.nonoptimality.witness_alpha);
  rep.summary.emplace_back("nonoptimality_rule",
                           fmt::format("{} {} threshold", bound, fixed ? ">=" : "<="));
  if (!fixed) {
    rep.summary.emplace_back("optimality_vacuous", report.optimality_vacuous);
    rep.summary.emplace_back("nonoptimality_vacuous", report.nonoptimality_vacuous);
  }
  rep.summary.emplace_back("verdict", has_param ? to_string(report.verdict) : std::string("n/a"));
  if (!fixed && has_param && m == 1 && std::holds_alternative<ScaledExp>(service)) {
    const double p = *spec.access->p;
    if (p > 0.0 && p < 1.0) {
      const auto b = scaled_prob_m1_optimal_range(p);
      rep.summary.emplace_back("alpha_range_lo", b.lo);
      rep.summary.emplace_back("alpha_range_hi", b.hi);
    }
  }

  Table t{{"alpha", "optimality_term", "nonoptimality_term"}, {}};
  for (std::size_t i = 0; i < report.optimality.terms.size(); ++i) {
    t.rows.push_back({(long long)report.optimality.terms[i].alpha, report.optimality.terms[i].value,
                      report.nonoptimality.terms[i].value});
  }
  rep.table = std::move(t);
  rep.table_key = "terms";
  return rep;
}

Report cmd_sweep(const RunSpec& spec, std::ostream& err) {
  Table t;
  t.columns = {"series", "N", "m", "access", "r", "p", "service", "mu", "delta",
               "alpha", "service_rate", "recovery_prob"};
  auto emit = [&](const std::string& label, const Scenario& scenario,
                  const std::vector<SweepRow>& rows) {
    const Fields head = scenario_fields(scenario.nodes, scenario.m, scenario.access, scenario.service);
    for (const auto& row : rows) {
      std::vector<Cell> cells{label};
      for (auto& v : values(head)) cells.push_back(v);
      cells.emplace_back((long long)row.alpha);
      cells.emplace_back(row.service_rate);
      cells.emplace_back(row.recovery_probability);
      t.rows.push_back(std::move(cells));
    }
  };

  if (spec.preset) {
    if (spec.sweep_axis) throw ConfigError("preset and sweep_axis are mutually exclusive");
    for (const auto& c : find_preset(*spec.preset).curves) {
      emit(c.label, c.scenario, alpha_table(c.scenario));
    }
  } else {
    Scenario base{spec.nodes, 0, {}, resolve_service(spec), spec.alpha_max};
    const auto parameter = spec.sweep_axis ? spec.sweep_axis->parameter : SweepParameter::alpha;
    base.m = parameter == SweepParameter::m ? 1 : require_m(spec);
    if (parameter == SweepParameter::r || parameter == SweepParameter::p) {
      if (!spec.access) throw ConfigError("access model is required");
      const bool fixed = canonical_access(spec.access->model) == "fixed_size";
      if (fixed != (parameter == SweepParameter::r)) {
        throw ConfigError(fmt::format("sweep over {} does not match {} access",
                                      to_string(parameter), spec.access->model));
      }
      // placeholder, replaced at every grid point
      base.access = fixed ? AccessModel(FixedSize{1}) : AccessModel(Probabilistic{0.0});
    } else {
      base.access = resolve_access(spec);
    }
    if (!spec.sweep_axis) {
      emit("base", base, alpha_table(base));
    } else {
      for (const auto& s : sweep(base, *spec.sweep_axis, workers_for(spec))) {
        for (const auto& note : s.notes) err << "note: " << note << '\n';
        const std::string label =
            s.grid_value ? fmt::format("{}={}", to_string(parameter), *s.grid_value) : "base";
        emit(label, s.scenario, s.rows);
      }
    }
  }
  Report out;
  out.table = std::move(t);
  out.table_key = "rows";
  return out;
}

Report cmd_simulate(const RunSpec& spec) {
  const int m = require_m(spec);
  const int alpha = require_alpha(spec);
  const auto access = resolve_access(spec);
  const auto service = resolve_service(spec);
  require_fits(spec.nodes, m, alpha);
  const SystemConfig config{spec.nodes, m, alpha, spec.blocks};
  config.validate();
  const SimConfig sim{spec.sim.trials, spec.sim.seed, workers_for(spec), spec.sim.min_count};

  const auto rate = estimate_service_rate(config, access, service, sim);
  const auto prob = estimate_recovery_probability(config, access, sim);
  const double rate_exact = service_rate(config, access, service);
  const double prob_exact = recovery_probability(config, access);
  const double prob_se = std::sqrt(prob_exact * (1.0 - prob_exact) / double(sim.trials));
  const bool rate_ok = std::abs(rate.mean - rate_exact) <= 3.0 * rate.std_error + 1e-12 * std::abs(rate_exact);
  const bool prob_ok = std::abs(prob.mean - prob_exact) <= 3.0 * prob_se + 1e-12 * prob_exact;
  long long topups = 0;
  for (const auto& [phi, n] : rate.topups) topups += n;

  Report r;
  r.summary = scenario_fields(spec.nodes, m, access, service);
  r.summary.emplace_back("alpha", (long long)alpha);
  r.summary.emplace_back("trials", sim.trials);
  r.summary.emplace_back("seed", std::to_string(sim.seed));
  r.summary.emplace_back("min_count", sim.min_count);
  r.summary.emplace_back("topup_draws", topups);
  r.summary.emplace_back("phi_tv_distance", phi_total_variation(rate, config, access));
  r.summary.emplace_back("pass", rate_ok && prob_ok);
  r.table = Table{{"metric", "estimate", "std_error", "analytic", "abs_diff", "within_3se"},
                  {{std::string("service_rate"), rate.mean, rate.std_error, rate_exact,
                    std::abs(rate.mean - rate_exact), rate_ok},
                   {std::string("recovery_prob"), prob.mean, prob.std_error, prob_exact,
                    std::abs(prob.mean - prob_exact), prob_ok}}};
  r.table_key = "metrics";
  json strata = json::array();
  for (const auto& [phi, count] : rate.per_phi_counts) {
    json s{{"phi", phi}, {"count", count}};
    if (auto it = rate.per_phi_mean_time.find(phi); it != rate.per_phi_mean_time.end()) {
      s["mean_time"] = std::stod(num(it->second));
    }
    if (auto it = rate.topups.find(phi); it != rate.topups.end()) s["topup"] = it->second;
    strata.push_back(std::move(s));
  }
  r.extra["strata"] = std::move(strata);
  return r;
}

int cmd_validate(const RunSpec& spec, std::ostream& out) {
  acceptance::Options options;
  options.trials = spec.sim.trials;
  options.seed = spec.sim.seed;
  options.workers = workers_for(spec);
  const bool stream = spec.format == Format::table && !spec.output_path;
  const auto outcomes = acceptance::run_all(options, [&](const acceptance::Outcome& o) {
    if (stream) out << acceptance::format_line(o) << '\n' << std::flush;
  });
  bool ok = true;
  for (const auto& o : outcomes) ok = ok && o.passed;
  if (!stream) {
    Report r;
    Table t{{"criterion", "passed", "title", "detail"}, {}};
    for (const auto& o : outcomes) t.rows.push_back({o.id, o.passed, o.title, o.detail});
    if (spec.format == Format::table) {
      for (const auto& o : outcomes) out << acceptance::format_line(o) << '\n';
    } else {
      r.table = std::move(t);
      r.table_key = "criteria";
      render(r, spec.format, out);
    }
  }
  return ok ? kOk : kValidation;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [k, v] : kCommands) {
    if (k == c) return v;
  }
  return "?";
}

std::string to_string(Format f) {
  for (const auto& [k, v] : kFormats) {
    if (k == f) return v;
  }
  return "?";
}

Command parse_command(const std::string& s) {
  for (const auto& [k, v] : kCommands) {
    if (s == v) return k;
  }
  throw ConfigError(fmt::format(
      "unknown command '{}' (rate | prob | optimal | conditions | sweep | simulate | validate)", s));
}

Format parse_format(const std::string& s) {
  for (const auto& [k, v] : kFormats) {
    if (s == v) return k;
  }
  throw ConfigError(fmt::format("unknown format '{}' (table | csv | json)", s));
}

std::string canonical_access(const std::string& s) {
  if (s == "fixed_size" || s == "fixed") return "fixed_size";
  if (s == "probabilistic" || s == "prob") return "probabilistic";
  throw ConfigError(fmt::format("unknown access model '{}' (fixed_size | probabilistic)", s));
}

std::string canonical_service(const std::string& s) {
  if (s == "small_exp" || s == "small") return "small_exp";
  if (s == "scaled_exp" || s == "scaled") return "scaled_exp";
  if (s == "shifted_exp" || s == "shifted") return "shifted_exp";
  if (s == "constant" || s == "const") return "constant";
  throw ConfigError(
      fmt::format("unknown service model '{}' (small_exp | scaled_exp | shifted_exp | constant)", s));
}

RunSpec from_json(const json& j) {
  check_keys(j, "run spec",
             {"command", "system", "access", "service", "objective", "alpha_max", "sweep_axis",
              "preset", "sim", "output"});
  RunSpec spec;
  try {
    if (!j.contains("command")) throw ConfigError("'command' is required");
    spec.command = parse_command(get_string(j, "command"));
    if (j.contains("system")) {
      const auto& s = j.at("system");
      check_keys(s, "system", {"n", "m", "alpha", "k"});
      if (s.contains("n")) spec.nodes = get_int(s, "n");
      if (s.contains("m")) spec.m = get_int(s, "m");
      if (s.contains("alpha")) spec.alpha = get_int(s, "alpha");
      if (s.contains("k")) spec.blocks = get_int(s, "k");
    }
    if (j.contains("access")) {
      const auto& a = j.at("access");
      check_keys(a, "access", {"model", "r", "p"});
      AccessSpec access;
      access.model = canonical_access(get_string(a, "model"));
      if (a.contains("r")) access.r = get_int(a, "r");
      if (a.contains("p")) access.p = get_double(a, "p");
      spec.access = access;
    }
    if (j.contains("service")) {
      const auto& s = j.at("service");
      check_keys(s, "service", {"model", "mu", "delta"});
      ServiceSpec service;
      service.model = canonical_service(get_string(s, "model"));
      if (s.contains("mu")) service.mu = get_double(s, "mu");
      if (s.contains("delta")) service.delta = get_double(s, "delta");
      spec.service = service;
    }
    if (j.contains("objective")) spec.objective = parse_objective(get_string(j, "objective"));
    if (j.contains("alpha_max")) spec.alpha_max = get_int(j, "alpha_max");
    if (j.contains("sweep_axis")) {
      const auto& a = j.at("sweep_axis");
      check_keys(a, "sweep_axis", {"parameter", "start", "stop", "step"});
      SweepAxis axis;
      const auto param = parse_sweep_parameter(get_string(a, "parameter"));
      if (!param) throw ConfigError("sweep_axis.parameter must be alpha, m, r or p");
      axis.parameter = *param;
      axis.start = get_double(a, "start");
      axis.stop = get_double(a, "stop");
      if (a.contains("step")) axis.step = get_double(a, "step");
      spec.sweep_axis = axis;
    }
    if (j.contains("preset")) spec.preset = get_string(j, "preset");
    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      check_keys(s, "sim", {"trials", "seed", "workers", "min_count"});
      if (s.contains("trials")) spec.sim.trials = get_long(s, "trials");
      if (s.contains("seed")) {
        const auto& v = s.at("seed");
        if (!v.is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
        spec.sim.seed = v.get<std::uint64_t>();
      }
      if (s.contains("workers")) spec.sim.workers = get_int(s, "workers");
      if (s.contains("min_count")) spec.sim.min_count = get_long(s, "min_count");
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      check_keys(o, "output", {"path", "format"});
      if (o.contains("path")) spec.output_path = get_string(o, "path");
      if (o.contains("format")) spec.format = parse_format(get_string(o, "format"));
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed run spec: {}", e.what()));
  }
  return spec;
}

json to_json(const RunSpec& spec) {
  json j;
  j["command"] = to_string(spec.command);
  json system{{"n", spec.nodes}};
  if (spec.m) system["m"] = *spec.m;
  if (spec.alpha) system["alpha"] = *spec.alpha;
  if (spec.blocks) system["k"] = *spec.blocks;
  j["system"] = system;
  if (spec.access) {
    json a{{"model", spec.access->model}};
    if (spec.access->r) a["r"] = *spec.access->r;
    if (spec.access->p) a["p"] = *spec.access->p;
    j["access"] = a;
  }
  if (spec.service) {
    json s{{"model", spec.service->model}};
    if (spec.service->mu) s["mu"] = *spec.service->mu;
    if (spec.service->delta) s["delta"] = *spec.service->delta;
    j["service"] = s;
  }
  j["objective"] = objective_name(spec.objective);
  if (spec.alpha_max) j["alpha_max"] = *spec.alpha_max;
  if (spec.sweep_axis) {
    j["sweep_axis"] = {{"parameter", to_string(spec.sweep_axis->parameter)},
                       {"start", spec.sweep_axis->start},
                       {"stop", spec.sweep_axis->stop},
                       {"step", spec.sweep_axis->step}};
  }
  if (spec.preset) j["preset"] = *spec.preset;
  json sim{{"trials", spec.sim.trials}, {"seed", spec.sim.seed}, {"min_count", spec.sim.min_count}};
  if (spec.sim.workers) sim["workers"] = *spec.sim.workers;
  j["sim"] = sim;
  json output{{"format", to_string(spec.format)}};
  if (spec.output_path) output["path"] = *spec.output_path;
  j["output"] = output;
  return j;
}

AccessModel resolve_access(const RunSpec& spec) {
  if (!spec.access) throw ConfigError("access model is required");
  const auto& a = *spec.access;
  if (canonical_access(a.model) == "fixed_size") {
    if (a.p) throw ConfigError("p does not apply to fixed_size access");
    if (!a.r) throw ConfigError("fixed_size access needs r");
    AccessModel out = FixedSize{*a.r};
    validate(out, spec.nodes);
    return out;
  }
  if (a.r) throw ConfigError("r does not apply to probabilistic access");
  if (!a.p) throw ConfigError("probabilistic access needs p");
  AccessModel out = Probabilistic{*a.p};
  validate(out, spec.nodes);
  return out;
}

ServiceModel resolve_service(const RunSpec& spec) {
  if (!spec.service) throw ConfigError("service model is required");
  const auto& s = *spec.service;
  const std::string model = canonical_service(s.model);
  ServiceModel out;
  if (model == "small_exp" || model == "scaled_exp") {
    if (s.delta) throw ConfigError(fmt::format("delta does not apply to {} service", model));
    const double mu = s.mu.value_or(1.0);
    out = model == "small_exp" ? ServiceModel(SmallExp{mu}) : ServiceModel(ScaledExp{mu});
  } else if (model == "shifted_exp") {
    if (!s.delta) throw ConfigError("shifted_exp service needs delta");
    out = ShiftedExp{*s.delta, s.mu.value_or(1.0)};
  } else {
    if (s.mu) throw ConfigError("mu does not apply to constant service");
    if (!s.delta) throw ConfigError("constant service needs delta");
    out = ConstantTime{*s.delta};
  }
  validate(out);
  return out;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  int code = kInternal;
  const char* kind = "internal";
  std::string reason;
  try {
    std::ostringstream buf;
    std::ostream& sink = spec.output_path ? static_cast<std::ostream&>(buf) : out;
    switch (spec.command) {
      case Command::rate: render(cmd_metric(spec, err, true), spec.format, sink); break;
      case Command::prob: render(cmd_metric(spec, err, false), spec.format, sink); break;
      case Command::optimal: render(cmd_optimal(spec), spec.format, sink); break;
      case Command::conditions: render(cmd_conditions(spec), spec.format, sink); break;
      case Command::sweep: render(cmd_sweep(spec, err), spec.format, sink); break;
      case Command::simulate: render(cmd_simulate(spec), spec.format, sink); break;
      case Command::validate: code = cmd_validate(spec, sink); break;
    }
    if (spec.command != Command::validate) code = kOk;
    if (spec.output_path) {
      std::ofstream file(*spec.output_path, std::ios::binary);
      if (!file) throw ConfigError(fmt::format("cannot write '{}'", *spec.output_path));
      file << buf.str();
    }
    if (code == kValidation) {
      err << "error code=4 kind=validation: one or more acceptance criteria failed\n";
    }
    return code;
  } catch (const ConfigError& e) {
    code = kConfig, kind = "config", reason = e.what();
  } catch (const InsufficientTrialsError& e) {
    code = kConfig, kind = "insufficient_trials", reason = e.what();
  } catch (const InfeasibleError& e) {
    code = kInfeasible, kind = "infeasible", reason = e.what();
  } catch (const NoClosedFormError& e) {
    code = kInfeasible, kind = "no_closed_form", reason = e.what();
  } catch (const OverflowError& e) {
    code = kInfeasible, kind = "overflow", reason = e.what();
  } catch (const std::exception& e) {
    code = kInternal, kind = "internal", reason = e.what();
  }
  err << fmt::format("error code={} kind={}: {}\n", code, kind, one_line(reason));
  return code;
}

namespace {

constexpr const char* kFooter = R"(Commands:
  rate        service rate and recovery probability at one alpha
  prob        recovery probability at one alpha (service optional)
  optimal     best alpha for --objective, with the full alpha table
  conditions  minimal-spreading optimality / non-optimality thresholds
  sweep       alpha tables over a preset or a --sweep-param grid
  simulate    Monte-Carlo estimate next to the analytic value
  validate    run the acceptance suite (exit 4 on any failure)

CSV columns:
  rate        N,m,access,r,p,service,mu,delta,alpha,service_rate,recovery_prob
  prob        N,m,access,r,p,service,mu,delta,alpha,recovery_prob
  optimal     N,m,access,r,p,service,mu,delta,alpha,service_rate,recovery_prob,optimal
  conditions  alpha,optimality_term,nonoptimality_term
  sweep       series,N,m,access,r,p,service,mu,delta,alpha,service_rate,recovery_prob
  simulate    metric,estimate,std_error,analytic,abs_diff,within_3se
  validate    criterion,passed,title,detail

Exit codes: 0 ok, 2 config error, 3 infeasible, 4 validation failure.
DSS_ALLOC_THREADS overrides the worker count.)";

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Allocation analysis for coded distributed storage", "dssalloc"};
  app.footer(kFooter);
  std::string command, config_path, access, service, objective, format, sweep_param, preset, output;
  int nodes = 0, m = 0, alpha = 0, k = 0, r = 0, alpha_max = 0, workers = 0;
  double p = 0, mu = 0, delta = 0, start = 0, stop = 0, step = 1;
  long long trials = 0, min_count = 0;
  std::uint64_t seed = 0;
  bool print_spec = false;

  app.add_option("command", command, "rate | prob | optimal | conditions | sweep | simulate | validate");
  auto* o_config = app.add_option("--config", config_path, "JSON run spec; flags override its fields");
  auto* o_nodes = app.add_option("-N,--nodes", nodes, "number of storage nodes (default 40)");
  auto* o_m = app.add_option("-m,--m", m, "redundancy level");
  auto* o_alpha = app.add_option("-a,--alpha", alpha, "spreading parameter");
  auto* o_k = app.add_option("-k,--k", k, "data blocks per file");
  auto* o_access = app.add_option("--access", access, "fixed_size | probabilistic");
  auto* o_r = app.add_option("-r,--r", r, "accessed nodes (fixed_size)");
  auto* o_p = app.add_option("-p,--p", p, "node failure probability (probabilistic)");
  auto* o_service = app.add_option("--service", service, "small_exp | scaled_exp | shifted_exp | constant");
  auto* o_mu = app.add_option("--mu", mu, "exponential rate (default 1)");
  auto* o_delta = app.add_option("--delta", delta, "shift or constant time");
  auto* o_objective = app.add_option("--objective", objective, "service_rate | recovery_probability");
  auto* o_alpha_max = app.add_option("--alpha-max", alpha_max, "upper limit on alpha");
  auto* o_preset = app.add_option("--preset", preset, "figure preset for sweep (fig2..fig11, small-prob-m, small-prob-p)");
  auto* o_sweep = app.add_option("--sweep-param", sweep_param, "alpha | m | r | p");
  auto* o_start = app.add_option("--start", start, "sweep start");
  auto* o_stop = app.add_option("--stop", stop, "sweep stop");
  auto* o_step = app.add_option("--step", step, "sweep step (default 1)");
  auto* o_trials = app.add_option("--trials", trials, "Monte-Carlo trials (default 1000000)");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed (default 1)");
  auto* o_workers = app.add_option("--workers", workers, "worker threads");
  auto* o_min_count = app.add_option("--min-count", min_count, "per-phi sample floor (default 100)");
  auto* o_format = app.add_option("--format", format, "table | csv | json");
  auto* o_output = app.add_option("-o,--output", output, "write the artifact to a file");
  app.add_flag("--print-spec", print_spec, "print the resolved run spec as JSON and exit");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << fmt::format("error code={} kind=config: {}\n", kConfig, one_line(e.what()));
    return kConfig;
  }

  RunSpec spec;
  try {
    if (*o_config) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError(fmt::format("cannot read '{}'", config_path));
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(fmt::format("invalid JSON in '{}': {}", config_path, e.what()));
      }
      if (!command.empty() && !j.contains("command")) j["command"] = command;
      spec = from_json(j);
    } else if (command.empty()) {
      throw ConfigError("a command is required (see --help)");
    }
    if (!command.empty()) spec.command = parse_command(command);
    if (*o_nodes) spec.nodes = nodes;
    if (*o_m) spec.m = m;
    if (*o_alpha) spec.alpha = alpha;
    if (*o_k) spec.blocks = k;
    if (*o_access) {
      const auto model = canonical_access(access);
      if (!spec.access || spec.access->model != model) spec.access = AccessSpec{model, {}, {}};
    }
    if (*o_r) {
      if (!spec.access) spec.access = AccessSpec{"fixed_size", {}, {}};
      spec.access->r = r;
    }
    if (*o_p) {
      if (!spec.access) spec.access = AccessSpec{"probabilistic", {}, {}};
      spec.access->p = p;
    }
    if (*o_service) {
      const auto model = canonical_service(service);
      if (!spec.service || spec.service->model != model) spec.service = ServiceSpec{model, {}, {}};
    }
    if (*o_mu || *o_delta) {
      if (!spec.service) throw ConfigError("--mu / --delta need --service");
      if (*o_mu) spec.service->mu = mu;
      if (*o_delta) spec.service->delta = delta;
    }
    if (*o_objective) spec.objective = parse_objective(objective);
    if (*o_alpha_max) spec.alpha_max = alpha_max;
    if (*o_preset) spec.preset = preset;
    if (*o_sweep) {
      const auto param = parse_sweep_parameter(sweep_param);
      if (!param) throw ConfigError(fmt::format("unknown sweep parameter '{}'", sweep_param));
      if (!*o_start || !*o_stop) throw ConfigError("--sweep-param needs --start and --stop");
      spec.sweep_axis = SweepAxis{*param, start, stop, step};
    } else if (*o_start || *o_stop || *o_step) {
      throw ConfigError("--start / --stop / --step need --sweep-param");
    }
    if (*o_trials) spec.sim.trials = trials;
    if (*o_seed) spec.sim.seed = seed;
    if (*o_workers) spec.sim.workers = workers;
    if (*o_min_count) spec.sim.min_count = min_count;
    if (*o_format) spec.format = parse_format(format);
    if (*o_output) spec.output_path = output;
  } catch (const ConfigError& e) {
    err << fmt::format("error code={} kind=config: {}\n", kConfig, one_line(e.what()));
    return kConfig;
  }

  if (print_spec) {
    out << to_json(spec).dump(2) << '\n';
    return kOk;
  }
  return run(spec, out, err);
}

}  // namespace dssalloc::cli
