#include "instability/tasks.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "instability/divergences.hpp"
#include "instability/free_optimize.hpp"
#include "instability/log.hpp"

namespace instab {

const char* to_string(TaskQuantity q) {
  switch (q) {
    case TaskQuantity::yield:
      return "yield";
    case TaskQuantity::cost:
      return "cost";
    case TaskQuantity::cost_interval:
      return "cost_interval";
    case TaskQuantity::battery_yield:
      return "battery_yield";
    case TaskQuantity::catalytic_yield0:
      return "catalytic_yield0";
  }
  return "?";
}

namespace {

CMat gibbs(double weight0) {
  CMat g = CMat::Zero(2, 2);
  g(0, 0) = weight0;
  g(1, 1) = 1 - weight0;
  return g;
}

LinearMap gibbs_map(double weight0) {
  const CMat g = gibbs(weight0);
  return [g](const CMat& x) -> CMat { return x.trace() * g; };
}

LinearMap as_map(const DestructionChannel& ch) {
  return [&ch](const CMat& x) { return ch.apply(x); };
}

void check_eps(double eps, const char* what) {
  require(eps >= 0 && eps < 1, std::string(what) + ": epsilon must lie in [0, 1)");
}

void check_system(const CMat& rho, const InstabilitySystem& sys, const char* what) {
  require_state(rho, what);
  require(rho.rows() == sys.dim(), std::string(what) + ": state and system dimensions differ");
}

void verify_or_throw(const TaskReport& r, const char* what) {
  const auto& res = r.residuals;
  if (res.covariance <= kCovarianceTol && res.accuracy <= kAccuracyTol && res.effect <= kAccuracyTol) return;
  std::ostringstream msg;
  msg << what << ": witness failed re-verification (covariance " << res.covariance << ", accuracy " << res.accuracy
      << ", effect " << res.effect << ")";
  throw SolverError(msg.str());
}

// The preparation pair for exact cost m of ρ, or the constant preparation
// when ρ is free.
std::pair<CMat, CMat> preparation_pair(const CMat& rho, const CMat& delta_rho, double m) {
  if (m <= 1e-12) return {rho, rho};
  const double scale = std::exp2(m);
  return {rho, hermitize(CMat((scale * delta_rho - rho) / (scale - 1)))};
}

// Residuals of the preparation witness for cost m.
TaskResiduals preparation_residuals(const CMat& target, const CMat& rho, double m, const DestructionChannel& ch,
                                    const std::pair<CMat, CMat>& prep, double eps) {
  TaskResiduals res;
  const auto map = preparation_channel(prep.first, prep.second);
  res.covariance = covariance_check(map, 2, gibbs_map(std::exp2(-m)), as_map(ch));
  res.effect = std::max(0.0, -lambda_min(prep.second));
  res.accuracy = trace_distance(map(currency_state()), target) - eps;
  (void)rho;
  return res;
}

// Brings a candidate back to a state inside the ε-ball around ρ.
CMat into_ball(CMat tau, const CMat& rho, double eps) {
  tau = hermitize(tau);
  const double lo = lambda_min(tau);
  if (lo < 0) tau += -lo * CMat::Identity(tau.rows(), tau.cols());
  tau /= real_trace(tau);
  const double dist = trace_distance(tau, rho);
  if (dist > eps) tau = hermitize(CMat(rho + (tau - rho) * (eps / dist)));
  return tau;
}

}  // namespace

double covariance_check(const LinearMap& channel, int in_dim, const LinearMap& delta_in, const LinearMap& delta_out) {
  double worst = 0;
  for (int r = 0; r < in_dim; ++r)
    for (int c = 0; c < in_dim; ++c) {
      CMat e = CMat::Zero(in_dim, in_dim);
      e(r, c) = 1;
      const CMat diff = channel(delta_in(e)) - delta_out(channel(e));
      worst = std::max(worst, schatten_norm(diff, 1.0));
    }
  return worst;
}

LinearMap measurement_channel(const CMat& effect) {
  const CMat id = CMat::Identity(effect.rows(), effect.cols());
  return [effect, id](const CMat& x) -> CMat {
    CMat out = CMat::Zero(2, 2);
    out(0, 0) = (x * effect).trace();
    out(1, 1) = (x * (id - effect)).trace();
    return out;
  };
}

LinearMap preparation_channel(const CMat& rho0, const CMat& rho1) {
  return [rho0, rho1](const CMat& x) -> CMat { return x(0, 0) * rho0 + x(1, 1) * rho1; };
}

LinearMap currency_map(double m) {
  require(m >= 0, "currency_map: m must be nonnegative");
  return gibbs_map(std::exp2(-m));
}

TaskReport one_shot_yield(const CMat& rho, const InstabilitySystem& sys, double eps, const SdpOptions& options) {
  check_eps(eps, "one_shot_yield");
  check_system(rho, sys, "one_shot_yield: rho");
  const auto& ch = sys.channel();
  const auto h = restricted_ht(rho, ch, eps, options);
  TaskReport r;
  r.quantity = TaskQuantity::yield;
  r.value = r.lower = r.upper = h.value;
  r.epsilon = eps;
  r.effect = h.effect;
  r.witness = "measurement channel tau -> tr[tau G]|0><0| + tr[tau (I-G)]|1><1| into the currency system";
  const auto meas = measurement_channel(h.effect);
  r.residuals.covariance = covariance_check(meas, ch.dim(), as_map(ch), gibbs_map(h.c));
  r.residuals.accuracy = trace_distance(meas(rho), currency_state()) - eps;
  const auto chk = check_effect(h.effect, rho, ch, eps);
  r.residuals.effect = std::max(chk.worst(), chk.scalar);
  verify_or_throw(r, "one_shot_yield");
  return r;
}

TaskReport one_shot_cost_exact(const CMat& rho, const InstabilitySystem& sys) {
  check_system(rho, sys, "one_shot_cost_exact: rho");
  const auto& ch = sys.channel();
  const CMat delta_rho = ch.apply(rho);
  double m = d_max(rho, delta_rho);
  if (m < 1e-12) m = 0;
  TaskReport r;
  r.quantity = TaskQuantity::cost;
  r.value = r.lower = r.upper = m;
  const auto prep = preparation_pair(rho, delta_rho, m);
  r.preparation = {prep.first, prep.second};
  r.witness = m == 0 ? "constant preparation of the free state"
                     : "preparation channel |0><0| -> rho, |1><1| -> (2^m Delta(rho) - rho)/(2^m - 1)";
  r.residuals = preparation_residuals(rho, rho, m, ch, prep, 0);
  verify_or_throw(r, "one_shot_cost_exact");
  return r;
}

TaskReport one_shot_cost_eps(const CMat& rho, const InstabilitySystem& sys, double eps, double delta,
                             const CostEpsOptions& options) {
  check_eps(eps, "one_shot_cost_eps");
  check_system(rho, sys, "one_shot_cost_eps: rho");
  if (eps == 0) {
    require(delta == 0, "one_shot_cost_eps: delta must be 0 when epsilon is 0");
    TaskReport r = one_shot_cost_exact(rho, sys);
    r.quantity = TaskQuantity::cost_interval;
    r.notes.push_back("epsilon = 0: both endpoints equal the exact cost");
    return r;
  }
  require(delta > 0 && delta < eps, "one_shot_cost_eps: delta must lie in (0, epsilon)");
  const auto& ch = sys.channel();
  TaskReport r;
  r.quantity = TaskQuantity::cost_interval;
  r.epsilon = eps;
  r.delta = delta;

  const auto smooth = dmax_smoothed_free(rho, ch, eps, options.sdp);
  double certified = smooth.sdp.primal_objective;
  if (smooth.sdp.dual_objective > 0) certified = std::min(certified, smooth.sdp.dual_objective);
  r.lower = r.value = std::log2(certified);

  std::vector<CMat> candidates{rho};
  std::vector<CMat> directions{ch.apply(rho)};
  if (options.use_sdp_states) {
    candidates.push_back(smooth.tau);
    directions.push_back(smooth.omega / real_trace(smooth.omega));
    // Mixture toward the free optimizer of the (ε−δ)-problem.
    const auto inner = dmax_smoothed_free(rho, ch, eps - delta, options.sdp);
    const CMat sigma = inner.omega / real_trace(inner.omega);
    candidates.push_back((1 - delta) * inner.tau + delta * sigma);
    const double bound = inner.value + std::log2(1 / delta);
    r.notes.push_back("upper bound from the (eps - delta) problem: " + std::to_string(bound));
  }
  for (const auto& sigma : directions) {
    const double dist = trace_distance(rho, sigma);
    if (dist <= 0) continue;
    const double eta_max = std::min(1.0, eps / dist);
    for (int k = 1; k <= options.mixture_steps; ++k) {
      const double eta = eta_max * k / options.mixture_steps;
      candidates.push_back((1 - eta) * rho + eta * sigma);
    }
  }
  double best = kInfinity;
  CMat best_tau;
  for (const auto& c : candidates) {
    const CMat tau = into_ball(c, rho, eps);
    const double v = d_max(tau, ch.apply(tau));
    if (v < best) {
      best = v;
      best_tau = tau;
    }
  }
  r.upper = std::max(best, 0.0);
  if (r.upper < r.lower) {
    r.notes.push_back("upper fell below the certified lower bound by " + std::to_string(r.lower - r.upper));
    log_message(LogLevel::info, r.notes.back());
  }
  const auto prep = preparation_pair(best_tau, ch.apply(best_tau), r.upper);
  r.preparation = {prep.first, prep.second};
  r.witness = "preparation channel for the best smoothed state (cost = upper)";
  r.residuals = preparation_residuals(rho, best_tau, r.upper, ch, prep, eps);
  verify_or_throw(r, "one_shot_cost_eps");
  return r;
}

TaskReport battery_yield(const CMat& rho, const InstabilitySystem& sys, double eps, const SdpOptions& options) {
  check_eps(eps, "battery_yield");
  check_system(rho, sys, "battery_yield: rho");
  const auto& ch = sys.channel();
  const auto f = ht_free(rho, ch, eps, options);
  TaskReport r;
  r.quantity = TaskQuantity::battery_yield;
  r.value = r.lower = r.upper = f.value;
  r.epsilon = eps;
  r.effect = f.effect;
  r.witness = "effect G with 0 <= G <= I, tr[rho G] >= 1 - eps, Delta*(G) <= 2^{-value} I";
  const auto chk = check_effect(f.effect, rho, ch, eps);
  r.residuals.effect = chk.worst();
  r.residuals.effect =
      std::max(r.residuals.effect, std::max(0.0, lambda_max(ch.apply_dual(f.effect)) - f.c) / std::max(f.c, 1e-300));
  const auto joint = tensor_compose(ch, currency_channel(1));
  const double via_currency = restricted_ht(tensor_product(rho, currency_state()), joint, eps, options).value - 1;
  r.residuals.cross_check = std::abs(via_currency - f.value);
  if (r.residuals.cross_check > 1e-6)
    r.notes.push_back("battery identity mismatch: " + std::to_string(r.residuals.cross_check));
  verify_or_throw(r, "battery_yield");
  return r;
}

TaskReport catalytic_yield0(const CMat& rho, const InstabilitySystem& sys) {
  check_system(rho, sys, "catalytic_yield0: rho");
  TaskReport r;
  r.quantity = TaskQuantity::catalytic_yield0;
  r.value = r.lower = r.upper = d_min_free(rho, sys.channel());
  r.effect = support_projector(rho);
  r.witness = "support projector of rho";
  return r;
}

LiftedEffect lift_effect(const CMat& effect, const DestructionChannel& ch) {
  require(effect.rows() == ch.dim() && effect.cols() == ch.dim(), "lift_effect: dimension mismatch");
  const Effect checked{effect};
  const CMat& g = checked.matrix();
  const CMat dual = hermitize(ch.apply_dual(g));
  LiftedEffect out;
  out.p = std::min(1.0, std::max(0.0, lambda_max(dual)));
  const CMat id = CMat::Identity(ch.dim(), ch.dim());
  out.effect = hermitize(CMat((1 - out.p) * g + out.p * id - (1 - out.p) * dual));
  return out;
}

CMat compose_effect(const CMat& gamma, const CMat& lambda, double t, const DestructionChannel& ca,
                    const DestructionChannel& cb) {
  require(t > 0 && std::isfinite(t), "compose_effect: t must be positive");
  require(gamma.rows() == ca.dim() && lambda.rows() == cb.dim(), "compose_effect: dimension mismatch");
  const Effect g{gamma};
  const Effect l{lambda};
  const double w = std::exp2(-t);
  const CMat idb = CMat::Identity(cb.dim(), cb.dim());
  require((cb.apply_dual(l.matrix()) - w * idb).cwiseAbs().maxCoeff() <= 1e-9,
          "compose_effect: Lambda must satisfy Delta_B*(Lambda) = 2^{-t} I");
  const CMat dual = hermitize(ca.apply_dual(g.matrix()));
  const double p = std::max(0.0, lambda_max(dual));
  require(p * w <= 1 - w + 1e-12, "compose_effect: requires 2^{-(t+m)} <= 1 - 2^{-t}");
  const CMat ida = CMat::Identity(ca.dim(), ca.dim());
  return hermitize(CMat(tensor_product(g.matrix(), l.matrix()) +
                        (w / (1 - w)) * tensor_product(CMat(p * ida - dual), CMat(idb - l.matrix()))));
}

SweepResult regularize_sweep(const CMat& rho, const InstabilitySystem& sys, double eps, int n_max,
                             const SweepBudget& budget, const SdpOptions& options) {
  check_eps(eps, "regularize_sweep");
  check_system(rho, sys, "regularize_sweep: rho");
  require(n_max >= 1, "regularize_sweep: n_max must be at least 1");
  const auto& ch = sys.channel();
  SweepResult out;
  out.epsilon = eps;
  out.target = umegaki(rho, ch.apply(rho));
  CMat rho_n = rho;
  std::optional<DestructionChannel> ch_n;
  long long dim = ch.dim();
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) dim *= ch.dim();
    SweepRow row;
    row.n = n;
    if (dim > budget.exact_max_dim) {
      out.notes.push_back("n=" + std::to_string(n) + ": skipped, dimension " + std::to_string(dim) +
                          " exceeds the exact-cost budget " + std::to_string(budget.exact_max_dim));
      out.rows.push_back(row);
      continue;
    }
    if (n > 1) {
      rho_n = tensor_product(rho_n, rho);
      ch_n = tensor_compose(*ch_n, ch);
    } else {
      ch_n = ch;
    }
    row.cost_hi_rate = d_max(rho_n, ch_n->apply(rho_n)) / n;
    if (dim <= budget.sdp_max_dim) {
      row.yield_rate = restricted_ht(rho_n, *ch_n, eps, options).value / n;
      row.cost_lo_rate = dmax_smoothed_free(rho_n, *ch_n, eps, options).value / n;
    } else {
      out.notes.push_back("n=" + std::to_string(n) + ": SDP rows skipped, dimension " + std::to_string(dim) +
                          " exceeds the SDP budget " + std::to_string(budget.sdp_max_dim));
    }
    out.rows.push_back(row);
  }
  // Trend diagnostics.
  double prev_hi = kInfinity, prev_lo = kInfinity;
  bool lo_trend = true;
  for (const auto& row : out.rows) {
    if (row.cost_hi_rate) {
      const double gap = std::abs(*row.cost_hi_rate - out.target);
      if (gap > prev_hi + 1e-9) out.cost_trend_nonincreasing = false;
      prev_hi = gap;
    }
    if (row.cost_lo_rate) {
      const double gap = std::abs(*row.cost_lo_rate - out.target);
      if (gap > prev_lo + 1e-9) lo_trend = false;
      prev_lo = gap;
    }
    if (row.yield_rate && *row.yield_rate > out.target + 1e-6) out.yield_below_target = false;
  }
  out.notes.push_back(std::string("trend: |cost_hi_rate - D| ") +
                      (out.cost_trend_nonincreasing ? "nonincreasing" : "increases somewhere"));
  out.notes.push_back(std::string("trend: |cost_lo_rate - D| ") + (lo_trend ? "nonincreasing" : "increases somewhere"));
  out.notes.push_back(std::string("yield_rate <= D: ") + (out.yield_below_target ? "yes" : "no"));
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  auto num = [](const std::optional<double>& v) -> std::string {
    if (!v) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", *v);
    return buf;
  };
  std::ostringstream os;
  os << "n,yield_rate,cost_lo_rate,cost_hi_rate,umegaki\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << num(row.yield_rate) << ',' << num(row.cost_lo_rate) << ',' << num(row.cost_hi_rate) << ','
       << num(r.target) << '\n';
  os << "# target D(rho||Delta(rho)) = " << num(r.target) << '\n';
  return os.str();
}

}  // namespace instab
