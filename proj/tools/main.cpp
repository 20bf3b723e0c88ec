#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "instability/errors.hpp"
#include "pool.hpp"

using namespace instab;
using namespace instab::cli;

namespace {

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--state", in.state, "state JSON file")->required();
  cmd->add_option("--channel", in.channel, "channel JSON file")->required();
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cout << error_json(kind, message, code);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instability monotones, one-shot tasks, and property verification"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string output;
  app.add_option("-o,--output", output, "write results here instead of stdout");

  MonotoneArgs mono;
  auto* c_mono = app.add_subcommand("monotone", "M^lambda_{alpha,z} against the free states");
  add_inputs(c_mono, mono.in);
  c_mono->add_option("--alpha", mono.alpha)->required();
  c_mono->add_option("--z", mono.z)->capture_default_str();
  c_mono->add_option("--lambda", mono.lambda)->capture_default_str();

  TaskArgs task;
  auto* c_yield = app.add_subcommand("yield", "one-shot yield with its measurement witness");
  add_inputs(c_yield, task.in);
  c_yield->add_option("--eps", task.eps)->capture_default_str();

  auto* c_cost = app.add_subcommand("cost", "exact cost, or the smoothed cost interval when --eps > 0");
  add_inputs(c_cost, task.in);
  c_cost->add_option("--eps", task.eps)->capture_default_str();
  c_cost->add_option("--delta", task.delta, "smoothing slack, 0 < delta < eps")->capture_default_str();

  auto* c_bat = app.add_subcommand("battery", "battery-assisted yield (or catalytic yield at eps = 0)");
  add_inputs(c_bat, task.in);
  c_bat->add_option("--eps", task.eps)->capture_default_str();
  c_bat->add_flag("--catalytic", task.catalytic);

  SweepArgs sw;
  sw.jobs = default_jobs();
  auto* c_sweep = app.add_subcommand("sweep", "CSV of M^lambda_{alpha,z} over a parameter grid");
  add_inputs(c_sweep, sw.in);
  c_sweep->add_option("--alpha", sw.alpha, "list a,b,c or range lo:hi:step")->capture_default_str();
  c_sweep->add_option("--z", sw.z)->capture_default_str();
  c_sweep->add_option("--lambda", sw.lambda)->capture_default_str();
  c_sweep->add_option("--max-evals", sw.max_evals)->capture_default_str();
  c_sweep->add_option("--jobs", sw.jobs)->check(CLI::PositiveNumber);

  RegularizeArgs reg;
  auto* c_reg = app.add_subcommand("regularize", "multi-copy yield and cost rates as CSV");
  add_inputs(c_reg, reg.in);
  c_reg->add_option("--eps", reg.eps)->capture_default_str();
  c_reg->add_option("--nmax", reg.n_max)->capture_default_str();
  c_reg->add_option("--sdp-max-dim", reg.sdp_max_dim)->capture_default_str();
  c_reg->add_option("--exact-max-dim", reg.exact_max_dim)->capture_default_str();

  VerifyArgs ver;
  ver.jobs = default_jobs();
  auto* c_ver = app.add_subcommand("verify", "run the property suites");
  c_ver->add_option("--seed", ver.seed)->capture_default_str();
  c_ver->add_option("--suite", ver.suites, "restrict to the named suites");
  c_ver->add_option("--jobs", ver.jobs)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("parse", e.what(), kExitParse);
  }

  Result result;
  try {
    if (c_mono->parsed())
      result = monotone(mono);
    else if (c_yield->parsed())
      result = yield(task);
    else if (c_cost->parsed())
      result = cost(task);
    else if (c_bat->parsed())
      result = battery(task);
    else if (c_sweep->parsed())
      result = sweep(sw);
    else if (c_reg->parsed())
      result = regularize(reg);
    else
      result = verify(ver);
  } catch (const ParseError& e) {
    return fail("parse", e.what(), kExitParse);
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), kExitValidation);
  } catch (const BudgetError& e) {
    return fail("budget", e.what(), kExitBudget);
  } catch (const SolverError& e) {
    return fail("solver", e.what(), kExitSolver);
  } catch (const std::exception& e) {
    return fail("solver", e.what(), kExitSolver);
  }

  if (output.empty()) {
    std::cout << result.text;
  } else {
    std::ofstream out(output);
    if (!out) return fail("parse", "cannot write " + output, kExitParse);
    out << result.text;
  }
  return result.exit_code;
}
