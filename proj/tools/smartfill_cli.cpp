// smartfill: solve instances, reproduce the experiment series, run the
// property suites and fit power approximations.
//
// Exit codes: 0 success, 1 solver or suite failure, 2 malformed input,
// 3 input that violates the model (axioms, ordering).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smartfill/smartfill.hpp"

namespace {

using namespace malleable;

enum Exit { kOk = 0, kFailure = 1, kParse = 2, kValidation = 3 };

// Writes to --output when given, otherwise stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ParseError(path + ": cannot open for writing");
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

SpeedupFunction speedup_argument(const std::string& text, double bandwidth) {
  const std::string body = std::filesystem::exists(text) ? io::detail::read_file(text) : text;
  const auto fn = io::speedup_from_json(io::detail::parse_json(body, "--speedup"), bandwidth, "--speedup");
  if (const auto report = validate(fn); !report.ok())
    throw ValidationError("--speedup violates the model axioms\n" + report.summary());
  return fn;
}

struct SolveArgs {
  std::string instance;
  std::string policy = "smartfill";
  std::string format = "table";
  std::string output;
  bool verify = false;
};

int cmd_solve(const SolveArgs& args) {
  const io::ParsedInstance parsed = io::parse_instance(args.instance);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
  const ProblemInstance& inst = parsed.instance();
  const ScheduleResult result = io::run_policy(inst, args.policy);

  io::SolveExtras extras;
  if (args.verify) {
    extras.cdr = verify_cdr(inst, result);
    extras.linearity = linearity_check(inst, result);
  }
  Sink sink(args.output);
  if (args.format == "csv") {
    io::write_schedule_csv(sink.out(), parsed.jobs, result, extras);
  } else {
    io::write_schedule_table(sink.out(), parsed.jobs, result, extras);
  }
  // CDR only characterizes the optimal policy; baselines are reported, not judged.
  if (args.verify && args.policy == "smartfill" && (!extras.cdr->ok() || extras.linearity->residual > 1e-8))
    return kFailure;
  return kOk;
}

struct ExperimentArgs {
  std::string experiment;
  std::string output;
  std::string speedup;
  std::vector<std::string> policies;
  bool deterministic = false;
};

int cmd_experiment(const ExperimentArgs& args) {
  io::ExperimentSpec spec = std::filesystem::exists(args.experiment) ? io::load_experiment(args.experiment)
                                                                     : io::builtin_experiment(args.experiment);
  if (!args.speedup.empty()) {
    spec.speedup = speedup_argument(args.speedup, spec.bandwidth);
    spec.fit.reset();
  }
  if (!args.policies.empty()) spec.policies = args.policies;
  const auto rows = io::run_experiment(spec, !args.deterministic);
  Sink sink(args.output);
  io::write_experiment_csv(sink.out(), rows);
  return kOk;
}

struct VerifyArgs {
  std::vector<std::string> suites;
  std::vector<std::string> families;
  std::vector<std::size_t> m;
  std::size_t trials = 0;
  std::uint64_t seed = suites::SuiteOptions{}.seed;
};

int cmd_verify(const VerifyArgs& args) {
  suites::SuiteOptions opt;
  opt.seed = args.seed;
  opt.trials = args.trials;
  opt.job_counts = args.m;
  for (const auto& f : args.families) opt.families.push_back(suites::parse_family(f));
  const auto names = args.suites.empty() ? suites::suite_names() : args.suites;
  bool all_ok = true;
  for (const auto& name : names) {
    const auto report = suites::run_suite(name, opt);
    std::cout << (report.ok() ? "PASS " : "FAIL ") << report.summary() << '\n';
    for (const auto& f : report.failures) std::cout << "  failed: " << f << '\n';
    all_ok = all_ok && report.ok();
  }
  return all_ok ? kOk : kFailure;
}

struct FitArgs {
  std::string speedup;
  double bandwidth = 10.0;
};

int cmd_fit(const FitArgs& args) {
  const auto fit = fit_power(speedup_argument(args.speedup, args.bandwidth), args.bandwidth);
  std::cout << "a,p\n" << io::fmt(fit.a) << ',' << io::fmt(fit.p) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal bandwidth allocation for malleable jobs with concave speedup"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Schedule one instance file");
  s->add_option("instance", solve.instance, "Instance file (JSON)")->required();
  s->add_option("--policy", solve.policy)->check(CLI::IsMember({"smartfill", "hesrpt", "equal"}));
  s->add_option("--format", solve.format)->check(CLI::IsMember({"csv", "table"}));
  s->add_option("--output,-o", solve.output, "Write the report here instead of stdout");
  s->add_flag("--verify", solve.verify, "Append CDR and linearity residuals");

  ExperimentArgs experiment;
  auto* e = app.add_subcommand("experiment", "Run a built-in experiment id or an experiment file, emit CSV");
  e->add_option("experiment", experiment.experiment, "power_equivalence | log_comparison | sqrt_comparison | file")
      ->required();
  e->add_option("--output,-o", experiment.output, "CSV destination (default stdout)");
  e->add_option("--speedup", experiment.speedup, "Replace the speedup function (JSON text or file)");
  e->add_option("--policy", experiment.policies, "Policies to run (repeatable)")
      ->check(CLI::IsMember({"smartfill", "hesrpt", "equal"}));
  e->add_flag("--deterministic", experiment.deterministic, "Write runtime_ms as 0 for reproducible output");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Randomized property suites");
  v->add_option("--suite", verify.suites, "gwf | oracle | structure | linearity (repeatable, default all)")
      ->check(CLI::IsMember(suites::suite_names()));
  v->add_option("--family", verify.families, "Restrict to speedup families (repeatable)");
  v->add_option("--m", verify.m, "Job counts (repeatable)");
  v->add_option("--trials", verify.trials, "Trials per family and job count");
  v->add_option("--seed", verify.seed);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Least-squares power approximation a*theta^p");
  f->add_option("--speedup", fit.speedup, "Speedup function (JSON text or file)")->required();
  f->add_option("--bandwidth,-B", fit.bandwidth)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (s->parsed()) return cmd_solve(solve);
    if (e->parsed()) return cmd_experiment(experiment);
    if (v->parsed()) return cmd_verify(verify);
    if (f->parsed()) return cmd_fit(fit);
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << '\n';
    return kParse;
  } catch (const ValidationError& err) {
    std::cerr << "validation error: " << err.what() << '\n';
    return kValidation;
  } catch (const InvalidInstance& err) {
    std::cerr << "validation error: " << err.what() << '\n';
    return kValidation;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kFailure;
  }
  return kOk;
}
