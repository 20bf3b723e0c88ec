#include "instability/free_optimize.hpp"

#include <cmath>
#include <sstream>

#include "instability/log.hpp"

namespace instab {

namespace {

double trace_power(const CMat& m, double z) {
  const auto e = eigh(hermitize(m));
  const double tol = rank_tolerance(e.values);
  double acc = 0;
  for (int i = 0; i < e.values.size(); ++i)
    if (e.values(i) > tol) acc += std::pow(e.values(i), z);
  return acc;
}

CMat normalized(const CMat& m) { return hermitize(m) / real_trace(m); }

CMat project_free(const DestructionChannel& ch, const CMat& s) { return normalized(ch.apply(s)); }

bool single_free_state(const DestructionChannel& ch) { return ch.blocks().size() == 1 && ch.blocks()[0].dB == 1; }

// +1 maximize, −1 minimize, 0 constant.
int sense(double r) { return r > 0 ? 1 : (r < 0 ? -1 : 0); }

bool better(int s, double a, double b) { return s >= 0 ? a > b : a < b; }

}  // namespace

const char* to_string(OptimizerMethod m) {
  switch (m) {
    case OptimizerMethod::closed_form_z1:
      return "closed_form_z1";
    case OptimizerMethod::closed_form_petz:
      return "closed_form_petz";
    case OptimizerMethod::fixed_point:
      return "fixed_point";
    case OptimizerMethod::grid_fallback:
      return "grid_fallback";
    case OptimizerMethod::exact:
      return "exact";
  }
  return "?";
}

bool in_functional_region(double r, double z, double tol) {
  if (!(z > 0) || !std::isfinite(z) || !std::isfinite(r)) return false;
  if (r < -1 - tol || r > 1 + tol) return false;
  if (r > 0 && r < 1) return z <= 1 / r + tol;
  if (r >= 1) return z < 1;
  return true;
}

void validate(const TraceFunctionalSpec& spec) {
  if (!in_functional_region(spec.r, spec.z))
    throw ValidationError("trace functional: (r, z) = (" + std::to_string(spec.r) + ", " + std::to_string(spec.z) +
                          ") lies outside the admissible region");
  require(spec.X.rows() == spec.channel.dim() && spec.X.cols() == spec.channel.dim(),
          "trace functional: X dimension does not match the channel");
  require_psd(spec.X, "trace functional: X");
  require(real_trace(spec.X) > 0, "trace functional: X must be nonzero");
  if (spec.initial.size()) require_state(spec.initial, "trace functional: initial state");
}

double evaluate_functional(const TraceFunctionalSpec& spec, const CMat& sigma) {
  const auto e = eigh(sigma);
  if (spec.r < 0) {
    const CMat perp = CMat::Identity(sigma.rows(), sigma.cols()) - mat_pow(e, 0.0);
    if (trace_product(perp, spec.X) > 1e-10 * real_trace(spec.X)) return kInfinity;
  }
  const CMat half = mat_pow(e, spec.r / 2);
  return trace_power(half * spec.X * half, spec.z);
}

CMat fixed_point_map(const TraceFunctionalSpec& spec, const CMat& sigma) {
  const CMat half = mat_pow(sigma, spec.r / 2);
  const CMat g = mat_pow(hermitize(half * spec.X * half), spec.z);
  return project_free(spec.channel, g);
}

double fixed_point_residual(const TraceFunctionalSpec& spec, const CMat& sigma) {
  return schatten_norm(sigma - fixed_point_map(spec, sigma), 1.0);
}

OptimizerResult z1_closed_form(const CMat& X, double r, const DestructionChannel& channel) {
  require(r >= -1 && r < 1, "z1_closed_form: r must lie in [-1, 1)");
  require(X.rows() == channel.dim(), "z1_closed_form: dimension mismatch");
  const CMat y = hermitize(channel.apply_dual(channel.twist(X, r - 1)));
  const double p = 1 / (1 - r);
  OptimizerResult out;
  out.sigma_star = normalized(channel.twist(mat_pow(y, p), 1.0));
  out.value = schatten_norm(y, p);
  out.method = OptimizerMethod::closed_form_z1;
  out.residual = fixed_point_residual({X, r, 1.0, channel, CMat()}, out.sigma_star);
  return out;
}

double pythagorean_residual(const CMat& X, double r, const CMat& sigma_star, const CMat& sigma,
                            const DestructionChannel& channel) {
  const TraceFunctionalSpec spec{X, r, 1.0, channel, CMat()};
  const double overlap = std::real((mat_pow(sigma, r) * mat_pow(sigma_star, 1 - r)).trace());
  return std::abs(evaluate_functional(spec, sigma) - evaluate_functional(spec, sigma_star) * overlap);
}

GridResult grid_oracle(const TraceFunctionalSpec& spec, int resolution, std::uint64_t seed) {
  validate(spec);
  const int params = free_parameter_count(spec.channel);
  if (params > 4)
    throw BudgetError("grid_oracle: " + std::to_string(params) + " free parameters exceed the budget of 4");
  const auto grid = enumerate_free_grid(spec.channel, resolution, seed);
  const int s = sense(spec.r);
  GridResult out;
  bool first = true;
  for (const auto& sigma : grid) {
    const double v = evaluate_functional(spec, sigma);
    ++out.evaluations;
    if (first || better(s, v, out.value)) {
      out.value = v;
      out.sigma_best = sigma;
      first = false;
    }
  }
  return out;
}

OptimizerResult optimize_trace_functional(const TraceFunctionalSpec& spec, const FixedPointOptions& opt) {
  validate(spec);
  const DestructionChannel& ch = spec.channel;
  const CMat start = spec.initial.size() ? spec.initial : normalized(spec.X);
  OptimizerResult out;

  if (spec.r == 0 || single_free_state(ch)) {
    out.sigma_star = single_free_state(ch) ? ch.fixed_state() : project_free(ch, start);
    out.value = evaluate_functional(spec, out.sigma_star);
    out.residual = spec.r == 0 ? 0.0 : fixed_point_residual(spec, out.sigma_star);
    out.method = OptimizerMethod::exact;
    return out;
  }
  if (spec.z == 1 && spec.r < 1 && opt.use_closed_form) return z1_closed_form(spec.X, spec.r, ch);

  const int s = sense(spec.r);
  CMat sigma = (1 - 1e-3) * project_free(ch, start) + 1e-3 * ch.fixed_state();
  double f = evaluate_functional(spec, sigma);
  double eta = spec.r < 0 ? 1 / (1 + std::abs(spec.r) * spec.z) : 1.0;
  double prev_step = kInfinity;
  int nondecreasing = 0;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const CMat target = fixed_point_map(spec, sigma);
    const CMat cand = hermitize((1 - eta) * sigma + eta * target);
    const double fc = evaluate_functional(spec, cand);
    const double slack = 1e-14 * std::max(1.0, std::abs(f));
    if (better(s, f, fc) && std::abs(fc - f) > slack) {
      // At the damping floor a regression means the iterate sits where the
      // map is numerically unstable (rank-deficient optimum); keep the best.
      if (eta <= opt.eta_floor) break;
      eta = std::max(opt.eta_floor, eta / 2);
      continue;
    }
    const double step = schatten_norm(cand - sigma, 1.0);
    sigma = cand;
    f = fc;
    if (step < opt.step_tol) break;
    nondecreasing = step >= prev_step ? nondecreasing + 1 : 0;
    if (nondecreasing >= 10 && eta > opt.eta_floor) {
      eta = std::max(opt.eta_floor, eta / 2);
      nondecreasing = 0;
    }
    prev_step = step;
  }
  sigma = project_free(ch, sigma);
  out.sigma_star = sigma;
  out.value = evaluate_functional(spec, sigma);
  out.residual = fixed_point_residual(spec, sigma);
  out.iterations = it;
  out.method = OptimizerMethod::fixed_point;
  if (out.residual <= opt.residual_tol) return out;

  std::ostringstream msg;
  msg << "fixed-point iteration stopped after " << it << " iterations with residual " << out.residual;
  log_message(LogLevel::info, msg.str());
  if (!opt.allow_fallback) return out;
  out.method = OptimizerMethod::grid_fallback;
  if (free_parameter_count(ch) <= 4) {
    const auto g = grid_oracle(spec, opt.fallback_resolution);
    if (better(s, g.value, out.value)) {
      out.sigma_star = g.sigma_best;
      out.value = g.value;
      out.residual = fixed_point_residual(spec, g.sigma_best);
    }
  }
  return out;
}

double d_min_free(const CMat& rho, const DestructionChannel& channel) {
  require_state(rho, "d_min_free: rho");
  require(rho.rows() == channel.dim(), "d_min_free: dimension mismatch");
  const double top = schatten_norm(channel.apply_dual(support_projector(rho)), kInfinity);
  return -std::log2(top);
}

OptimizerResult umegaki_free(const CMat& rho, const DestructionChannel& channel) {
  require_state(rho, "umegaki_free: rho");
  require(rho.rows() == channel.dim(), "umegaki_free: dimension mismatch");
  OptimizerResult out;
  out.sigma_star = hermitize(channel.apply(rho));
  out.value = umegaki(rho, out.sigma_star);
  out.method = OptimizerMethod::exact;
  return out;
}

OptimizerResult petz_free(const CMat& rho, double alpha, const DestructionChannel& channel) {
  require(alpha >= 0 && alpha <= 2, "petz_free: alpha must lie in [0, 2]");
  require_state(rho, "petz_free: rho");
  require(rho.rows() == channel.dim(), "petz_free: dimension mismatch");
  if (alpha == 1) return umegaki_free(rho, channel);
  if (alpha == 0) {
    OptimizerResult out;
    const auto e = eigh(hermitize(channel.apply_dual(support_projector(rho))));
    const CMat v = e.vectors.col(e.values.size() - 1);
    out.sigma_star = project_free(channel, v * v.adjoint());
    out.value = -std::log2(e.values.maxCoeff());
    out.method = OptimizerMethod::closed_form_petz;
    return out;
  }
  OptimizerResult out = z1_closed_form(mat_pow(rho, alpha), 1 - alpha, channel);
  out.value = out.value > 0 ? std::log2(out.value) / (alpha - 1) : kInfinity;
  out.method = OptimizerMethod::closed_form_petz;
  return out;
}

OptimizerResult m_lambda(const CMat& rho, const RenyiParams& p, double lambda, const DestructionChannel& channel,
                         const FixedPointOptions& options) {
  validate(p);
  require(lambda >= 0 && lambda <= 1, "m_lambda: lambda must lie in [0, 1]");
  require_state(rho, "m_lambda: rho");
  require(rho.rows() == channel.dim(), "m_lambda: dimension mismatch");
  if (p.alpha == 1) return umegaki_free(rho, channel);
  const CMat drho = hermitize(channel.apply(rho));
  if (lambda == 1) {
    OptimizerResult out;
    out.sigma_star = drho;
    out.value = d_alpha_z(rho, drho, p);
    out.method = OptimizerMethod::exact;
    return out;
  }
  const CMat a = mat_pow(rho, p.alpha / (2 * p.z)) * mat_pow(drho, lambda * (1 - p.alpha) / (2 * p.z));
  TraceFunctionalSpec spec{hermitize(a.adjoint() * a), (1 - lambda) * (1 - p.alpha) / p.z, p.z, channel, drho};
  OptimizerResult out = optimize_trace_functional(spec, options);
  out.value = out.value > 0 ? std::log2(out.value) / (p.alpha - 1) : kInfinity;
  return out;
}

}  // namespace instab
