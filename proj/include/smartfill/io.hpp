#pragma once

// Instance files, experiment definitions and report writers.
//
// Instance file (JSON, UTF-8):
//   { "label": "optional",
//     "bandwidth": 10,
//     "jobs": [ {"size": 4, "weight": 0.25}, ... ],
//     "speedup": {"family": "log", "a": 1.0, "p": 1.0} }
// Speedup families: power(a,p), shifted_power(a,z,p), log(a,p),
// saturating(a,z,p), inverted_shift(a,z,p), sum(terms: [{coef, f}]).
// `a` defaults to 1.

#include <chrono>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "smartfill/baselines.hpp"
#include "smartfill/error.hpp"
#include "smartfill/scheduler.hpp"
#include "smartfill/speedup.hpp"

namespace malleable::io {

using nlohmann::json;

namespace detail {

inline const json& require(const json& node, const std::string& key, const std::string& where) {
  if (!node.is_object()) throw ParseError(where + ": expected an object");
  auto it = node.find(key);
  if (it == node.end()) throw ParseError(where + "." + key + ": missing key");
  return *it;
}

inline double number(const json& node, const std::string& where) {
  if (!node.is_number()) throw ParseError(where + ": expected a number");
  return node.get<double>();
}

inline double number_at(const json& node, const std::string& key, const std::string& where) {
  return number(require(node, key, where), where + "." + key);
}

inline double number_or(const json& node, const std::string& key, double fallback, const std::string& where) {
  auto it = node.find(key);
  return it == node.end() ? fallback : number(*it, where + "." + key);
}

inline std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

inline json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":" + line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace detail

inline SpeedupFunction speedup_from_json(const json& node, double bound, const std::string& where = "speedup") {
  const json& tag = detail::require(node, "family", where);
  if (!tag.is_string()) throw ParseError(where + ".family: expected a string");
  const std::string family = tag.get<std::string>();
  auto a = [&] { return detail::number_or(node, "a", 1.0, where); };
  auto z = [&] { return detail::number_at(node, "z", where); };
  auto p = [&] { return detail::number_at(node, "p", where); };
  try {
    if (family == "power") return SpeedupFunction::power(a(), p(), bound);
    if (family == "shifted_power") return SpeedupFunction::shifted_power(a(), z(), p(), bound);
    if (family == "log") return SpeedupFunction::log(a(), p(), bound);
    if (family == "saturating") return SpeedupFunction::saturating(a(), z(), p(), bound);
    if (family == "inverted_shift") return SpeedupFunction::inverted_shift(a(), z(), p(), bound);
    if (family == "sum") {
      const json& terms = detail::require(node, "terms", where);
      if (!terms.is_array() || terms.empty()) throw ParseError(where + ".terms: expected a non-empty array");
      std::vector<std::pair<double, SpeedupFunction>> parts;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string at = where + ".terms[" + std::to_string(i) + "]";
        parts.emplace_back(detail::number_at(terms[i], "coef", at),
                           speedup_from_json(detail::require(terms[i], "f", at), bound, at + ".f"));
      }
      return SpeedupFunction::sum(std::move(parts), bound);
    }
  } catch (const InvalidInstance& e) {
    throw ValidationError(where + ": " + e.what());
  }
  throw ParseError(where + ".family: unknown family '" + family + "'");
}

inline json speedup_to_json(const SpeedupFunction& f) {
  switch (f.family()) {
    case Family::power:
    case Family::log: return json{{"family", family_name(f.family())}, {"a", f.a()}, {"p", f.p()}};
    case Family::shifted_power:
    case Family::saturating:
    case Family::inverted_shift:
      return json{{"family", family_name(f.family())}, {"a", f.a()}, {"z", f.z()}, {"p", f.p()}};
    case Family::sum: {
      json terms = json::array();
      for (const auto& t : f.terms()) terms.push_back(json{{"coef", t.coef}, {"f", speedup_to_json(*t.fn)}});
      return json{{"family", "sum"}, {"terms", terms}};
    }
    case Family::custom: break;
  }
  throw FamilyError("custom speedup functions cannot be serialized");
}

struct ParsedInstance {
  NormalizedJobs jobs;
  std::vector<std::string> warnings;

  const ProblemInstance& instance() const { return jobs.instance; }
};

inline ParsedInstance parse_instance_json(const json& doc, const std::string& source) {
  const std::string where = source;
  const double bandwidth = detail::number_at(doc, "bandwidth", where);
  if (!(bandwidth > 0.0)) throw ValidationError(where + ".bandwidth: must be positive");

  const json& jobs = detail::require(doc, "jobs", where);
  if (!jobs.is_array() || jobs.empty()) throw ParseError(where + ".jobs: expected a non-empty array");
  std::vector<double> sizes, weights;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string at = where + ".jobs[" + std::to_string(i) + "]";
    sizes.push_back(detail::number_at(jobs[i], "size", at));
    weights.push_back(detail::number_at(jobs[i], "weight", at));
    if (!(sizes.back() > 0.0)) throw ValidationError(at + ".size: must be positive");
    if (!(weights.back() > 0.0)) throw ValidationError(at + ".weight: must be positive");
  }

  std::string label;
  if (auto it = doc.find("label"); it != doc.end()) {
    if (!it->is_string()) throw ParseError(where + ".label: expected a string");
    label = it->get<std::string>();
  }

  const SpeedupFunction f = speedup_from_json(detail::require(doc, "speedup", where), bandwidth, where + ".speedup");
  if (const auto report = validate(f); !report.ok())
    throw ValidationError(where + ".speedup: speedup function violates the model axioms\n" + report.summary());

  ParsedInstance out{[&] {
    try {
      return normalize_jobs(bandwidth, sizes, weights, f, label);
    } catch (const InvalidInstance& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }(), {}};
  if (out.jobs.reordered) out.warnings.push_back("jobs re-sorted by decreasing size (ties by increasing weight)");
  if (out.jobs.perturbed) out.warnings.push_back("equal sizes separated by a relative 1e-12 perturbation");
  return out;
}

inline ParsedInstance parse_instance_text(std::string_view text, const std::string& source = "instance") {
  return parse_instance_json(detail::parse_json(text, source), source);
}

inline ParsedInstance parse_instance(const std::string& path) {
  return parse_instance_text(detail::read_file(path), path);
}

// Numbers in reports: 12 significant digits.
inline std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

struct ExperimentSpec {
  std::string id = "custom";
  std::vector<int> job_counts;
  double bandwidth = 10.0;
  std::string weight_rule = "inverse_size";  // or "uniform"
  SpeedupFunction speedup = SpeedupFunction::power(1.0, 0.5, 10.0);
  std::optional<PowerFit> fit;                  // heSRPT approximation for non-power speedups
  std::vector<std::string> policies{"smartfill", "hesrpt"};
};

// Sizes x_i = M - i + 1 (largest first) with the configured weight rule.
inline ProblemInstance experiment_instance(const ExperimentSpec& spec, int jobs) {
  std::vector<double> sizes, weights;
  for (int i = 0; i < jobs; ++i) {
    const double x = jobs - i;
    sizes.push_back(x);
    weights.push_back(spec.weight_rule == "uniform" ? 1.0 : 1.0 / x);
  }
  return ProblemInstance::make(spec.bandwidth, sizes, weights, spec.speedup, spec.id);
}

inline std::vector<int> standard_job_counts() { return {10, 20, 30, 40, 50, 60, 70, 80, 90, 100}; }

inline ExperimentSpec builtin_experiment(const std::string& id) {
  ExperimentSpec spec;
  spec.id = id;
  spec.job_counts = standard_job_counts();
  spec.bandwidth = 10.0;
  spec.weight_rule = "inverse_size";
  if (id == "power_equivalence") {
    spec.speedup = SpeedupFunction::power(1.0, 0.5, 10.0);
  } else if (id == "log_comparison") {
    spec.speedup = SpeedupFunction::log(1.0, 1.0, 10.0);
    spec.fit = PowerFit{0.79, 0.48};
  } else if (id == "sqrt_comparison") {
    spec.speedup = SpeedupFunction::shifted_power(1.0, 4.0, 0.5, 10.0);
    spec.fit = PowerFit{0.26, 0.82};
  } else {
    throw ParseError("unknown experiment id '" + id + "'");
  }
  return spec;
}

// Custom experiment file:
//   {"id": "...", "m": [10, 20], "bandwidth": 10, "weights": "inverse_size",
//    "speedup": {...}, "fit": {"a": .., "p": ..}, "policies": ["smartfill", "hesrpt", "equal"]}
inline ExperimentSpec experiment_from_json(const json& doc, const std::string& source) {
  ExperimentSpec spec;
  if (auto it = doc.find("id"); it != doc.end() && it->is_string()) spec.id = it->get<std::string>();
  spec.bandwidth = detail::number_or(doc, "bandwidth", 10.0, source);
  if (!(spec.bandwidth > 0.0)) throw ValidationError(source + ".bandwidth: must be positive");
  if (auto it = doc.find("m"); it != doc.end()) {
    if (!it->is_array() || it->empty()) throw ParseError(source + ".m: expected a non-empty array");
    for (const auto& m : *it) {
      if (!m.is_number_integer() || m.get<int>() < 1) throw ParseError(source + ".m: expected positive integers");
      spec.job_counts.push_back(m.get<int>());
    }
  } else {
    spec.job_counts = standard_job_counts();
  }
  if (auto it = doc.find("weights"); it != doc.end()) {
    if (!it->is_string() || (*it != "uniform" && *it != "inverse_size"))
      throw ParseError(source + ".weights: expected \"uniform\" or \"inverse_size\"");
    spec.weight_rule = it->get<std::string>();
  }
  spec.speedup = speedup_from_json(detail::require(doc, "speedup", source), spec.bandwidth, source + ".speedup");
  if (const auto report = validate(spec.speedup); !report.ok())
    throw ValidationError(source + ".speedup: speedup function violates the model axioms\n" + report.summary());
  if (auto it = doc.find("fit"); it != doc.end())
    spec.fit = PowerFit{detail::number_at(*it, "a", source + ".fit"), detail::number_at(*it, "p", source + ".fit")};
  if (auto it = doc.find("policies"); it != doc.end()) {
    spec.policies.clear();
    for (const auto& p : *it) {
      if (!p.is_string()) throw ParseError(source + ".policies: expected strings");
      const auto name = p.get<std::string>();
      if (name != "smartfill" && name != "hesrpt" && name != "equal")
        throw ParseError(source + ".policies: unknown policy '" + name + "'");
      spec.policies.push_back(name);
    }
  }
  return spec;
}

inline ExperimentSpec load_experiment(const std::string& path) {
  const std::string text = detail::read_file(path);
  return experiment_from_json(detail::parse_json(text, path), path);
}

// Runs one policy by name. "hesrpt" is exact heSRPT for power speedups and the
// power-approximation variant otherwise (fit defaults to fit_power).
inline ScheduleResult run_policy(const ProblemInstance& inst, const std::string& policy,
                                 const std::optional<PowerFit>& fit = std::nullopt) {
  if (policy == "smartfill") return smartfill(inst);
  if (policy == "equal") return equal_split(inst);
  if (policy == "hesrpt") {
    if (inst.speedup.family() == Family::power && !fit) return hesrpt_power(inst);
    return hesrpt_approx(inst, fit ? *fit : fit_power(inst.speedup, inst.bandwidth));
  }
  throw ParseError("unknown policy '" + policy + "'");
}

struct ExperimentRow {
  int jobs = 0;
  std::string policy;
  double objective = 0.0;
  double mean_slowdown = 0.0;
  double runtime_ms = 0.0;
};

// Rows ordered by (M, position of the policy in spec.policies). With
// `timing` off the runtime column is written as 0 so output is reproducible.
inline std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec, bool timing = true) {
  std::vector<ExperimentRow> rows;
  for (int m : spec.job_counts) {
    const ProblemInstance inst = experiment_instance(spec, m);
    for (const auto& policy : spec.policies) {
      const auto start = std::chrono::steady_clock::now();
      const ScheduleResult r = run_policy(inst, policy, spec.fit);
      const auto stop = std::chrono::steady_clock::now();
      rows.push_back({m, policy, r.objective, r.objective / m,
                      timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0});
    }
  }
  return rows;
}

inline void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << "M,policy,J,mean_slowdown,runtime_ms\n";
  for (const auto& r : rows)
    out << r.jobs << ',' << r.policy << ',' << fmt(r.objective) << ',' << fmt(r.mean_slowdown) << ','
        << fmt(r.runtime_ms) << '\n';
}

struct SolveExtras {
  std::optional<CdrReport> cdr;
  std::optional<LinearityCheck> linearity;
};

// One row per job in solve order (largest first): input index, original
// size, weight, completion time, interval duration, a_i, c_i and the job's
// allocation in every interval.
inline void write_schedule_csv(std::ostream& out, const NormalizedJobs& jobs, const ScheduleResult& r,
                               const SolveExtras& extras = {}) {
  const std::size_t M = jobs.instance.size();
  out << "job,input_index,size,weight,completion_time,duration,coefficient,cdr_constant";
  for (std::size_t l = 0; l < M; ++l) out << ",theta_" << l + 1;
  out << '\n';
  for (std::size_t i = 0; i < M; ++i) {
    out << i + 1 << ',' << jobs.order[i] << ',' << fmt(jobs.original_sizes[i]) << ','
        << fmt(jobs.instance.weights[i]) << ',' << fmt(r.completion_times[i]) << ',' << fmt(r.durations[i]) << ','
        << fmt(r.coefficients[i]) << ',' << fmt(r.cdr_constants[i]);
    for (std::size_t l = 0; l < M; ++l) out << ',' << fmt(r.matrix(i, l));
    out << '\n';
  }
  out << "\nmetric,value\n";
  out << "policy," << r.policy << '\n';
  out << "objective," << fmt(r.objective) << '\n';
  out << "mean_slowdown," << fmt(r.mean_slowdown()) << '\n';
  if (extras.cdr) {
    out << "cdr_violations," << extras.cdr->violations.size() << '\n';
    out << "cdr_max_ratio_error," << fmt(extras.cdr->max_ratio_error) << '\n';
  }
  if (extras.linearity) out << "linearity_residual," << fmt(extras.linearity->residual) << '\n';
}

inline void write_schedule_table(std::ostream& out, const NormalizedJobs& jobs, const ScheduleResult& r,
                                 const SolveExtras& extras = {}) {
  const std::size_t M = jobs.instance.size();
  if (!jobs.instance.label.empty()) out << "instance: " << jobs.instance.label << '\n';
  out << "policy: " << r.policy << "   jobs: " << M << "   bandwidth: " << fmt(jobs.instance.bandwidth) << '\n';
  out << "objective J: " << fmt(r.objective) << "   mean slowdown J/M: " << fmt(r.mean_slowdown()) << "\n\n";
  const int w = 16;
  out << std::left << std::setw(6) << "job" << std::setw(8) << "input" << std::setw(w) << "size" << std::setw(w)
      << "weight" << std::setw(w) << "T_i" << std::setw(w) << "d_i" << std::setw(w) << "a_i" << std::setw(w) << "c_i"
      << '\n';
  for (std::size_t i = 0; i < M; ++i) {
    out << std::setw(6) << i + 1 << std::setw(8) << jobs.order[i] << std::setw(w) << fmt(jobs.original_sizes[i])
        << std::setw(w) << fmt(jobs.instance.weights[i]) << std::setw(w) << fmt(r.completion_times[i])
        << std::setw(w) << fmt(r.durations[i]) << std::setw(w) << fmt(r.coefficients[i]) << std::setw(w)
        << fmt(r.cdr_constants[i]) << '\n';
  }
  out << "\nallocation matrix (row = job, column = interval; column l has jobs 1..l present)\n";
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t l = 0; l < M; ++l) out << std::setw(w) << fmt(r.matrix(i, l));
    out << '\n';
  }
  if (extras.cdr) {
    out << "\nCDR check: " << extras.cdr->violations.size() << " violation(s), max ratio error "
        << fmt(extras.cdr->max_ratio_error) << '\n';
    for (const auto& v : extras.cdr->violations)
      out << "  " << v.kind << " jobs (" << v.i + 1 << "," << v.j + 1 << ") interval " << v.column + 1
          << " residual " << fmt(v.residual) << '\n';
  }
  if (extras.linearity) out << "linearity residual |J - sum a_i x_i| / J: " << fmt(extras.linearity->residual) << '\n';
}

}  // namespace malleable::io
