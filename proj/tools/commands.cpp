#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "instability/divergences.hpp"
#include "instability/errors.hpp"
#include "instability/free_optimize.hpp"
#include "instability/io.hpp"
#include "instability/log.hpp"
#include "instability/sdp.hpp"
#include "instability/tasks.hpp"
#include "instability/verify.hpp"
#include "pool.hpp"

namespace instab::cli {

namespace {

struct Loaded {
  CMat rho;
  InstabilitySystem sys;
};

Loaded load(const Inputs& in) {
  require(!in.state.empty(), "--state is required");
  require(!in.channel.empty(), "--channel is required");
  try {
    CMat rho = state_from_json(read_json_file(in.state));
    DestructionChannel ch = channel_from_json(read_json_file(in.channel));
    require(rho.rows() == ch.dim(), "state dimension " + std::to_string(rho.rows()) +
                                        " does not match channel dimension " + std::to_string(ch.dim()));
    return {std::move(rho), InstabilitySystem(std::move(ch))};
  } catch (const Json::exception& e) {
    throw ParseError(e.what());
  }
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Defense in depth: the task layer verifies its witnesses; re-check them here
// from the printed data alone.
void reverify(const TaskReport& r, const CMat& rho, const InstabilitySystem& sys) {
  const auto& ch = sys.channel();
  auto fail = [&](const std::string& what) { throw SolverError(std::string("witness re-verification failed: ") + what); };
  if (r.quantity == TaskQuantity::yield) {
    const auto chk = check_effect(r.effect, rho, ch, r.epsilon);
    if (chk.worst() > kAccuracyTol || chk.scalar > kAccuracyTol) fail("yield effect");
    const auto meas = measurement_channel(r.effect);
    if (trace_distance(meas(rho), currency_state()) > r.epsilon + kAccuracyTol) fail("yield accuracy");
  } else if (r.quantity == TaskQuantity::battery_yield) {
    const auto chk = check_effect(r.effect, rho, ch, r.epsilon);
    if (chk.worst() > kAccuracyTol) fail("battery effect");
    const double bound = std::exp2(-r.value);
    if (lambda_max(CMat(ch.apply_dual(r.effect))) > bound * (1 + 1e-6)) fail("battery scale");
  } else if (r.quantity == TaskQuantity::cost || r.quantity == TaskQuantity::cost_interval) {
    if (r.preparation.size() != 2) fail("missing preparation");
    const auto prep = preparation_channel(r.preparation[0], r.preparation[1]);
    const LinearMap delta = [&](const CMat& x) { return ch.apply(x); };
    if (covariance_check(prep, 2, currency_map(r.upper), delta) > kCovarianceTol) fail("preparation covariance");
    if (lambda_min(r.preparation[1]) < -1e-9) fail("preparation positivity");
    if (trace_distance(r.preparation[0], rho) > r.epsilon + kAccuracyTol) fail("preparation accuracy");
  }
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec, const char* what) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
      throw ParseError(std::string(what) + ": cannot parse \"" + s + "\"");
    return v;
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ParseError(std::string(what) + ": range must be lo:hi:step");
    const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
    require(step > 0 && hi >= lo, std::string(what) + ": range needs step > 0 and hi >= lo");
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    require(count <= 1000000, std::string(what) + ": range has too many points");
    for (long long k = 0; k < count; ++k) out.push_back(lo + k * step);
    return out;
  }
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  if (out.empty()) throw ParseError(std::string(what) + ": empty list");
  return out;
}

std::string error_json(const std::string& kind, const std::string& message, int exit_code) {
  Json j;
  j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", exit_code}};
  return j.dump() + "\n";
}

Result monotone(const MonotoneArgs& args) {
  const auto in = load(args.in);
  const auto& ch = in.sys.channel();
  const auto res = m_lambda(in.rho, {args.alpha, args.z}, args.lambda, ch);
  // σ* must be a free state; at λ = 0 its divergence must reproduce the value.
  const CMat& s = res.sigma_star;
  if (lambda_min(s) < -1e-9 || std::abs(real_trace(s) - 1) > 1e-9 ||
      max_abs_entry(CMat(ch.apply(s) - s)) > 1e-8)
    throw SolverError("monotone: optimizer returned a state outside the free set");
  if (args.lambda == 0 && args.alpha != 1) {
    const double check = d_alpha_z(in.rho, s, {args.alpha, args.z});
    if (std::abs(check - res.value) > 1e-7 * std::max(1.0, std::abs(res.value)))
      throw SolverError("monotone: value does not match D(rho||sigma_star)");
  }
  Json j;
  j["value"] = res.value;
  j["alpha"] = args.alpha;
  j["z"] = args.z;
  j["lambda"] = args.lambda;
  j["method"] = to_string(res.method);
  j["residual"] = res.residual;
  j["iterations"] = res.iterations;
  j["sigma_star"] = matrix_to_json(s);
  return {dump(j)};
}

Result yield(const TaskArgs& args) {
  const auto in = load(args.in);
  const auto r = one_shot_yield(in.rho, in.sys, args.eps);
  reverify(r, in.rho, in.sys);
  return {dump(report_to_json(r))};
}

Result cost(const TaskArgs& args) {
  const auto in = load(args.in);
  const auto r = args.eps == 0 && args.delta == 0 ? one_shot_cost_exact(in.rho, in.sys)
                                                  : one_shot_cost_eps(in.rho, in.sys, args.eps, args.delta);
  reverify(r, in.rho, in.sys);
  return {dump(report_to_json(r))};
}

Result battery(const TaskArgs& args) {
  const auto in = load(args.in);
  if (args.catalytic) {
    require(args.eps == 0, "catalytic yield is available only at eps = 0");
    return {dump(report_to_json(catalytic_yield0(in.rho, in.sys)))};
  }
  const auto r = battery_yield(in.rho, in.sys, args.eps);
  reverify(r, in.rho, in.sys);
  return {dump(report_to_json(r))};
}

Result sweep(const SweepArgs& args) {
  const auto in = load(args.in);
  const auto alphas = parse_grid(args.alpha, "--alpha");
  const auto zs = parse_grid(args.z, "--z");
  const auto lambdas = parse_grid(args.lambda, "--lambda");
  const long long total = static_cast<long long>(alphas.size()) * zs.size() * lambdas.size();
  if (total > args.max_evals)
    throw BudgetError("sweep: " + std::to_string(total) + " grid points exceed the budget of " +
                      std::to_string(args.max_evals));

  struct Point {
    double alpha, z, lambda;
  };
  std::vector<Point> valid;
  std::vector<std::string> skipped;
  for (double a : alphas)
    for (double z : zs) {
      if (!in_dpi_region({a, z}) || a <= 0) {
        skipped.push_back("# skipped alpha=" + fmt(a) + " z=" + fmt(z) + ": outside the data-processing region");
        continue;
      }
      for (double l : lambdas) {
        if (l < 0 || l > 1) {
          skipped.push_back("# skipped lambda=" + fmt(l) + ": outside [0, 1]");
          continue;
        }
        valid.push_back({a, z, l});
      }
    }

  std::vector<OptimizerResult> results(valid.size());
  parallel_for(valid.size(), args.jobs, [&](std::size_t i) {
    results[i] = m_lambda(in.rho, {valid[i].alpha, valid[i].z}, valid[i].lambda, in.sys.channel());
  });

  std::ostringstream os;
  os << "alpha,z,lambda,value,residual,method\n";
  for (std::size_t i = 0; i < valid.size(); ++i)
    os << fmt(valid[i].alpha) << ',' << fmt(valid[i].z) << ',' << fmt(valid[i].lambda) << ','
       << fmt(results[i].value) << ',' << fmt(results[i].residual) << ',' << to_string(results[i].method) << '\n';
  for (const auto& s : skipped) os << s << '\n';
  return {os.str()};
}

Result regularize(const RegularizeArgs& args) {
  const auto in = load(args.in);
  SweepBudget budget;
  budget.sdp_max_dim = args.sdp_max_dim;
  budget.exact_max_dim = args.exact_max_dim;
  const auto r = regularize_sweep(in.rho, in.sys, args.eps, args.n_max, budget);
  std::string text = sweep_csv(r);
  for (const auto& n : r.notes) text += "# " + n + "\n";
  return {text};
}

Result verify(const VerifyArgs& args) {
  std::vector<std::string> names = args.suites.empty() ? suite_names() : args.suites;
  for (const auto& n : names) {
    bool known = false;
    for (const auto& k : suite_names()) known = known || k == n;
    require(known, "unknown suite \"" + n + "\"");
  }
  std::vector<SuiteResult> results(names.size());
  parallel_for(names.size(), args.jobs, [&](std::size_t i) {
    // Each suite draws from its own stream, independent of scheduling.
    results[i] = run_suite(names[i], args.seed * 1000003ULL + i);
    log_message(LogLevel::info, "suite " + names[i] + " finished in " + fmt(results[i].seconds) + " s");
  });
  Json suites = Json::array();
  int passed = 0, failed = 0;
  for (const auto& r : results) {
    Json metrics = Json::array();
    for (const auto& m : r.metrics)
      metrics.push_back({{"name", m.name},
                         {"worst", m.worst},
                         {"tolerance", m.tolerance},
                         {"samples", m.samples},
                         {"ok", m.ok()},
                         {"worst_case", m.worst_case}});
    suites.push_back({{"name", r.name},
                      {"passed", r.passed()},
                      {"checks", r.checks()},
                      {"failures", r.failures()},
                      {"metrics", std::move(metrics)},
                      {"notes", r.notes}});
    (r.passed() ? passed : failed)++;
  }
  Json j;
  j["seed"] = args.seed;
  j["passed"] = passed;
  j["failed"] = failed;
  j["suites"] = std::move(suites);
  return {dump(j), failed == 0 ? 0 : kExitVerifyFailed};
}

}  // namespace instab::cli
