#include "instability/divergences.hpp"

#include <cmath>

namespace instab {

bool in_dpi_region(const RenyiParams& p, double tol) {
  const double a = p.alpha, z = p.z;
  if (!(a > 0) || !(z > 0) || !std::isfinite(a) || !std::isfinite(z)) return false;
  if (a < 1) return z >= std::max(a, 1 - a) - tol;
  if (a == 1) return true;
  return z >= std::max(a / 2, a - 1) - tol && z <= a + tol;
}

void validate(const RenyiParams& p) {
  if (!in_dpi_region(p))
    throw ValidationError("(alpha, z) = (" + std::to_string(p.alpha) + ", " + std::to_string(p.z) +
                          ") lies outside the data-processing region");
}

bool support_violated(const CMat& rho, const CMat& S, double tol) {
  const int d = static_cast<int>(S.rows());
  const CMat perp = CMat::Identity(d, d) - support_projector(S);
  return trace_product(perp, rho) > tol * std::max(1.0, real_trace(rho));
}

namespace {

void check_pair(const CMat& rho, const CMat& S, const char* what) {
  require(rho.rows() == S.rows() && rho.cols() == S.cols() && rho.rows() == rho.cols(),
          std::string(what) + ": dimension mismatch");
  require_psd(rho, what);
  require_psd(S, what);
  require(real_trace(S) > 0, std::string(what) + ": second argument must be nonzero");
}

double trace_power(const CMat& m, double z) {
  const auto e = eigh(hermitize(m));
  const double tol = rank_tolerance(e.values);
  double acc = 0;
  for (int i = 0; i < e.values.size(); ++i)
    if (e.values(i) > tol) acc += std::pow(e.values(i), z);
  return acc;
}

}  // namespace

double alpha_z_quasi(const CMat& rho, const CMat& S, const RenyiParams& p) {
  const double a = p.alpha, z = p.z;
  const CMat rp = mat_pow(rho, a / (2 * z));
  const CMat sp = mat_pow(S, (1 - a) / z);
  return trace_power(rp * sp * rp, z);
}

double d_alpha_z(const CMat& rho, const CMat& S, const RenyiParams& p) {
  validate(p);
  check_pair(rho, S, "d_alpha_z");
  if (p.alpha == 1.0) return umegaki(rho, S);
  if (p.alpha > 1 && support_violated(rho, S)) return kInfinity;
  const double q = alpha_z_quasi(rho, S, p);
  if (!(q > 0)) return kInfinity;
  return std::log2(q) / (p.alpha - 1);
}

double umegaki(const CMat& rho, const CMat& S) {
  check_pair(rho, S, "umegaki");
  if (support_violated(rho, S)) return kInfinity;
  const auto e = eigh(rho);
  const double tol = rank_tolerance(e.values);
  double ent = 0;
  for (int i = 0; i < e.values.size(); ++i)
    if (e.values(i) > tol) ent += e.values(i) * std::log2(e.values(i));
  return ent - trace_product(rho, mat_log2(S));
}

double d_min(const CMat& rho, const CMat& S) {
  check_pair(rho, S, "d_min");
  const double t = trace_product(S, support_projector(rho));
  if (t <= 1e-14 * real_trace(S)) return kInfinity;
  return -std::log2(t);
}

double d_max(const CMat& rho, const CMat& S) {
  check_pair(rho, S, "d_max");
  if (support_violated(rho, S)) return kInfinity;
  const CMat inv = mat_pow(S, -0.5);
  return std::log2(lambda_max(hermitize(inv * rho * inv)));
}

HypothesisTest d_hypothesis(const CMat& rho, const CMat& sigma, double eps) {
  require(eps >= 0 && eps <= 1, "d_hypothesis: epsilon must lie in [0, 1]");
  require_state(rho, "d_hypothesis: rho");
  require_state(sigma, "d_hypothesis: sigma");
  require(rho.rows() == sigma.rows(), "d_hypothesis: dimension mismatch");
  const int d = static_cast<int>(rho.rows());
  HypothesisTest out;
  if (eps >= 1) {
    out.value = kInfinity;
    out.effect = CMat::Zero(d, d);
    return out;
  }
  const double target = 1 - eps;
  if (eps == 0) {
    out.effect = support_projector(rho);
    out.value = d_min(rho, sigma);
    out.threshold = kInfinity;
    return out;
  }

  auto mass = [&](double t) {
    const auto e = eigh(hermitize(t * rho - sigma));
    const double tol = rank_tolerance(e.values);
    CMat v = CMat::Zero(d, d);
    for (int i = 0; i < d; ++i)
      if (e.values(i) > tol) v += e.vectors.col(i) * e.vectors.col(i).adjoint();
    return trace_product(rho, v);
  };

  double lo = 0, hi = 1;
  while (mass(hi) < target) {
    lo = hi;
    hi *= 2;
    if (hi > 1e300) throw SolverError("d_hypothesis: threshold search diverged");
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < target ? lo : hi) = mid;
  }
  const double t = hi;
  const auto e = eigh(hermitize(t * rho - sigma));
  const double scale = t * lambda_max(rho) + lambda_max(sigma);
  const double tol = 1e-10 * scale;
  CMat pos = CMat::Zero(d, d), ker = CMat::Zero(d, d);
  int nearest = 0;
  for (int i = 0; i < d; ++i) {
    if (std::abs(e.values(i)) < std::abs(e.values(nearest))) nearest = i;
    const CMat pr = e.vectors.col(i) * e.vectors.col(i).adjoint();
    if (e.values(i) > tol)
      pos += pr;
    else if (e.values(i) >= -tol)
      ker += pr;
  }
  if (trace_product(rho, ker) <= 0 && e.values(nearest) <= tol)
    ker = e.vectors.col(nearest) * e.vectors.col(nearest).adjoint();
  const double have = trace_product(rho, pos);
  const double kmass = trace_product(rho, ker);
  double q = kmass > 0 ? (target - have) / kmass : 0;
  q = std::clamp(q, 0.0, 1.0);
  out.effect = hermitize(pos + q * ker);
  out.threshold = t;
  const double primal = trace_product(sigma, out.effect);
  out.value = primal > 0 ? -std::log2(primal) : kInfinity;
  return out;
}

}  // namespace instab
