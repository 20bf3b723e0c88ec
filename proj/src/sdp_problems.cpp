#include <cmath>

#include "instability/divergences.hpp"
#include "instability/free_optimize.hpp"
#include "instability/sdp.hpp"

namespace instab {

namespace {

// Real Hilbert–Schmidt Gram–Schmidt; drops near-dependent inputs.
std::vector<CMat> orthonormalize(const std::vector<CMat>& in) {
  std::vector<CMat> out;
  for (CMat v : in) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : out) v -= trace_product(u, v) * u;
    const double n = std::sqrt(std::max(0.0, trace_product(v, v)));
    if (n > 1e-10) out.push_back(v / n);
  }
  return out;
}

CMat embed_block(const DestructionChannel& ch, int i, const CMat& local) {
  CMat m = CMat::Zero(ch.dim(), ch.dim());
  const int o = ch.offset(i);
  m.block(o, o, local.rows(), local.cols()) = local;
  return m;
}

CMat combine(const std::vector<CMat>& basis, const RVec& y, int offset = 0) {
  CMat out = CMat::Zero(basis[0].rows(), basis[0].cols());
  for (std::size_t k = 0; k < basis.size(); ++k) out += y(offset + static_cast<int>(k)) * basis[k];
  return hermitize(out);
}

void check_eps(double eps, const char* what) {
  require(eps >= 0 && eps <= 1, std::string(what) + ": epsilon must lie in [0, 1]");
}

void check_input(const CMat& rho, const DestructionChannel& ch, const char* what) {
  require_state(rho, what);
  require(rho.rows() == ch.dim(), std::string(what) + ": dimension mismatch");
}

// Lower bound on the optimal type-II weight c (the free test is at most the
// test against the free state Δ(ρ)); the objective is divided by it so the
// solver's relative gap controls −log₂ c.
double weight_scale(const CMat& rho, const DestructionChannel& ch, double eps) {
  const double v = d_hypothesis(rho, ch.apply(rho), eps).value;
  return std::isfinite(v) ? std::max(std::exp2(-v), 1e-300) : 1.0;
}

}  // namespace

std::vector<CMat> scalar_dual_basis(const DestructionChannel& ch) {
  const int d = ch.dim();
  std::vector<CMat> local;
  const auto& blocks = ch.blocks();
  // Off-block-diagonal Hermitian units.
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = i + 1; j < blocks.size(); ++j)
      for (int a = 0; a < blocks[i].size(); ++a)
        for (int b = 0; b < blocks[j].size(); ++b) {
          const int r = ch.offset(static_cast<int>(i)) + a, c = ch.offset(static_cast<int>(j)) + b;
          CMat re = CMat::Zero(d, d), im = CMat::Zero(d, d);
          re(r, c) = re(c, r) = 1 / std::sqrt(2.0);
          im(r, c) = cplx(0, -1 / std::sqrt(2.0));
          im(c, r) = cplx(0, 1 / std::sqrt(2.0));
          local.push_back(re);
          local.push_back(im);
        }
  // Inside block i: (τ_i^⊥ ⊂ L(A_i)) ⊗ L(B_i), plus the τ_i ⊗ I_B direction of
  // the identity's projection onto im Δ.
  CMat identity_part = CMat::Zero(d, d);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& blk = blocks[i];
    std::vector<CMat> gen{blk.tau};
    for (const auto& h : hermitian_basis(blk.dA)) gen.push_back(h);
    const auto a_basis = orthonormalize(gen);
    const auto b_basis = hermitian_basis(blk.dB);
    for (std::size_t k = 1; k < a_basis.size(); ++k)
      for (const auto& h : b_basis) local.push_back(embed_block(ch, static_cast<int>(i), tensor_product(a_basis[k], h)));
    const double t2 = trace_product(blk.tau, blk.tau);
    identity_part += embed_block(ch, static_cast<int>(i), tensor_product(blk.tau, CMat::Identity(blk.dB, blk.dB)) / t2);
  }
  local.push_back(identity_part / std::sqrt(trace_product(identity_part, identity_part)));
  std::vector<CMat> out;
  out.reserve(local.size());
  for (const auto& m : local) out.push_back(ch.from_block_basis(m));
  return out;
}

EffectCheck check_effect(const CMat& effect, const CMat& rho, const DestructionChannel& ch, double eps) {
  EffectCheck out;
  const auto e = eigh(effect);
  out.lower = std::max(0.0, -e.values.minCoeff());
  out.upper = std::max(0.0, e.values.maxCoeff() - 1);
  out.acceptance = std::max(0.0, 1 - eps - trace_product(rho, effect));
  const CMat dual = ch.apply_dual(effect);
  const double c = real_trace(dual) / ch.dim();
  out.scalar = (dual - c * CMat::Identity(ch.dim(), ch.dim())).cwiseAbs().maxCoeff();
  return out;
}

HypothesisTestSdp restricted_ht(const CMat& rho, const DestructionChannel& ch, double eps, const SdpOptions& opt) {
  check_eps(eps, "restricted_ht");
  check_input(rho, ch, "restricted_ht: rho");
  const int d = ch.dim();
  const CMat id = CMat::Identity(d, d);
  HypothesisTestSdp out;
  if (eps >= 1) {
    out.value = kInfinity;
    out.c = 0;
    out.effect = CMat::Zero(d, d);
    return out;
  }
  const CMat sigma0 = ch.fixed_state();

  if (eps == 0) {
    // Γ = ρ⁰ + W Γ_K W† with W an isometry onto ker ρ.
    const auto e = eigh(rho);
    const double tol = rank_tolerance(e.values);
    std::vector<int> kernel;
    for (int i = 0; i < d; ++i)
      if (e.values(i) <= tol) kernel.push_back(i);
    const int k = static_cast<int>(kernel.size());
    CMat W(d, k);
    for (int i = 0; i < k; ++i) W.col(i) = e.vectors.col(kernel[i]);
    const CMat proj = id - W * W.adjoint();
    if (k == 0) {
      out.effect = id;
      out.c = 1;
      out.value = 0;
      return out;
    }
    const auto hb = hermitian_basis(k);
    const auto alg = ch.algebra_basis();
    const int nu = static_cast<int>(hb.size());
    SdpProblem p;
    p.c = RVec::Zero(nu + 1);
    p.c(nu) = 1 / weight_scale(rho, ch, eps);
    std::vector<CMat> lifted;
    for (const auto& h : hb) lifted.push_back(W * h * W.adjoint());
    p.eq_A = RMat::Zero(alg.size(), nu + 1);
    p.eq_b = RVec::Zero(alg.size());
    const CMat dproj = ch.apply_dual(proj);
    std::vector<CMat> dl;
    for (const auto& l : lifted) dl.push_back(ch.apply_dual(l));
    for (std::size_t r = 0; r < alg.size(); ++r) {
      for (int j = 0; j < nu; ++j) p.eq_A(r, j) = trace_product(alg[r], dl[j]);
      p.eq_A(r, nu) = -trace_product(alg[r], id);
      p.eq_b(r) = -trace_product(alg[r], dproj);
    }
    LmiBlock lower{CMat::Zero(k, k), {}}, upper{CMat::Identity(k, k), {}};
    for (const auto& h : hb) {
      lower.F.push_back(h);
      upper.F.push_back(-h);
    }
    lower.F.push_back(CMat::Zero(k, k));
    upper.F.push_back(CMat::Zero(k, k));
    p.blocks = {lower, upper};
    out.sdp = solve(p, opt);
    require_optimal(out.sdp, "restricted_ht");
    out.effect = hermitize(proj + W * combine(hb, out.sdp.y) * W.adjoint());
    out.c = out.sdp.y(nu);
    out.value = -std::log2(out.c);
    return out;
  }

  const auto basis = scalar_dual_basis(ch);
  const int n = static_cast<int>(basis.size());
  const double scale = weight_scale(rho, ch, eps);
  SdpProblem p;
  p.c.resize(n);
  LmiBlock pos{CMat::Zero(d, d), {}}, sub{id, {}}, acc{CMat::Constant(1, 1, -(1 - eps)), {}};
  for (int k = 0; k < n; ++k) {
    p.c(k) = trace_product(sigma0, basis[k]) / scale;
    pos.F.push_back(basis[k]);
    sub.F.push_back(-basis[k]);
    acc.F.push_back(CMat::Constant(1, 1, trace_product(rho, basis[k])));
  }
  p.blocks = {pos, sub, acc};
  out.sdp = solve(p, opt);
  require_optimal(out.sdp, "restricted_ht");
  out.effect = combine(basis, out.sdp.y);
  out.c = out.sdp.primal_objective * scale;
  out.value = -std::log2(out.c);
  return out;
}

HypothesisTestSdp ht_free(const CMat& rho, const DestructionChannel& ch, double eps, const SdpOptions& opt) {
  check_eps(eps, "ht_free");
  check_input(rho, ch, "ht_free: rho");
  const int d = ch.dim();
  const CMat id = CMat::Identity(d, d);
  HypothesisTestSdp out;
  if (eps >= 1) {
    out.value = kInfinity;
    out.effect = CMat::Zero(d, d);
    return out;
  }
  if (eps == 0) {
    // Any feasible Γ dominates ρ⁰ on supp ρ and adding kernel weight only
    // raises Δ*(Γ), so Γ = ρ⁰ is optimal.
    out.effect = support_projector(rho);
    out.c = schatten_norm(ch.apply_dual(out.effect), kInfinity);
    out.value = -std::log2(out.c);
    return out;
  }
  const auto hb = hermitian_basis(d);
  const int n = static_cast<int>(hb.size());
  SdpProblem p;
  p.c = RVec::Zero(n + 1);
  p.c(n) = 1 / weight_scale(rho, ch, eps);
  LmiBlock pos{CMat::Zero(d, d), {}}, sub{id, {}}, acc{CMat::Constant(1, 1, -(1 - eps)), {}}, dom{CMat::Zero(d, d), {}};
  for (int k = 0; k < n; ++k) {
    pos.F.push_back(hb[k]);
    sub.F.push_back(-hb[k]);
    acc.F.push_back(CMat::Constant(1, 1, trace_product(rho, hb[k])));
    dom.F.push_back(-hermitize(ch.apply_dual(hb[k])));
  }
  pos.F.push_back(CMat::Zero(d, d));
  sub.F.push_back(CMat::Zero(d, d));
  acc.F.push_back(CMat::Zero(1, 1));
  dom.F.push_back(id);
  p.blocks = {pos, sub, acc, dom};
  out.sdp = solve(p, opt);
  require_optimal(out.sdp, "ht_free");
  out.effect = combine(hb, out.sdp.y);
  out.c = out.sdp.y(n);
  out.value = -std::log2(out.c);
  return out;
}

SmoothedDmax dmax_smoothed_free(const CMat& rho, const DestructionChannel& ch, double eps, const SdpOptions& opt) {
  check_eps(eps, "dmax_smoothed_free");
  require(eps < 1, "dmax_smoothed_free: epsilon must be below 1");
  check_input(rho, ch, "dmax_smoothed_free: rho");
  const int d = ch.dim();
  const CMat id = CMat::Identity(d, d);
  const auto hb = hermitian_basis(d);
  const int nh = static_cast<int>(hb.size());

  // Free-cone coordinates: ω = Σ_k β_k ω_k with ω_k = τ_i ⊗ h (block basis).
  std::vector<CMat> omega_basis;
  RVec omega_trace;
  {
    std::vector<double> traces;
    for (std::size_t i = 0; i < ch.blocks().size(); ++i) {
      const auto& blk = ch.blocks()[i];
      for (const auto& h : hermitian_basis(blk.dB)) {
        omega_basis.push_back(ch.from_block_basis(embed_block(ch, static_cast<int>(i), tensor_product(blk.tau, h))));
        traces.push_back(std::real(h.trace()));
      }
    }
    omega_trace = Eigen::Map<RVec>(traces.data(), static_cast<Eigen::Index>(traces.size()));
  }
  const int nb = static_cast<int>(omega_basis.size());

  // β_i ⪰ 0 blocks.
  std::vector<LmiBlock> beta_blocks;
  {
    int k0 = 0;
    for (const auto& blk : ch.blocks()) {
      LmiBlock lb{CMat::Zero(blk.dB, blk.dB), {}};
      const auto local = hermitian_basis(blk.dB);
      for (int k = 0; k < nb; ++k) {
        const int rel = k - k0;
        lb.F.push_back(rel >= 0 && rel < static_cast<int>(local.size()) ? local[rel] : CMat::Zero(blk.dB, blk.dB));
      }
      beta_blocks.push_back(std::move(lb));
      k0 += static_cast<int>(local.size());
    }
  }

  SmoothedDmax out;
  SdpProblem p;
  if (eps == 0) {
    p.c = omega_trace;
    LmiBlock dom{-rho, omega_basis};
    p.blocks = beta_blocks;
    p.blocks.push_back(dom);
    out.sdp = solve(p, opt);
    require_optimal(out.sdp, "dmax_smoothed_free");
    out.tau = rho;
    out.omega = combine(omega_basis, out.sdp.y);
  } else {
    // Variables: τ (nh), P (nh), β (nb).
    const int nv = 2 * nh + nb;
    p.c = RVec::Zero(nv);
    p.c.tail(nb) = omega_trace;
    p.eq_A = RMat::Zero(1, nv);
    for (int k = 0; k < nh; ++k) p.eq_A(0, k) = std::real(hb[k].trace());
    p.eq_b = RVec::Ones(1);
    auto zeros = [&](int size) { return CMat::Zero(size, size); };
    LmiBlock tau_pos{zeros(d), {}}, p_pos{zeros(d), {}}, p_dom{rho, {}}, budget{CMat::Constant(1, 1, eps), {}},
        dom{zeros(d), {}};
    for (int k = 0; k < nv; ++k) {
      const bool is_tau = k < nh, is_p = k >= nh && k < 2 * nh, is_beta = k >= 2 * nh;
      const CMat& h = hb[k % nh];
      tau_pos.F.push_back(is_tau ? h : zeros(d));
      p_pos.F.push_back(is_p ? h : zeros(d));
      p_dom.F.push_back(is_p ? h : (is_tau ? CMat(-h) : zeros(d)));
      budget.F.push_back(CMat::Constant(1, 1, is_p ? -std::real(h.trace()) : 0.0));
      dom.F.push_back(is_beta ? omega_basis[k - 2 * nh] : (is_tau ? CMat(-h) : zeros(d)));
    }
    for (auto& lb : beta_blocks) {
      std::vector<CMat> f(2 * nh, zeros(lb.F0.rows()));
      f.insert(f.end(), lb.F.begin(), lb.F.end());
      lb.F = std::move(f);
    }
    p.blocks = {tau_pos, p_pos, p_dom, budget, dom};
    p.blocks.insert(p.blocks.end(), beta_blocks.begin(), beta_blocks.end());
    out.sdp = solve(p, opt);
    require_optimal(out.sdp, "dmax_smoothed_free");
    out.tau = combine(hb, out.sdp.y, 0);
    RVec beta = out.sdp.y.tail(nb);
    out.omega = combine(omega_basis, beta);
  }
  out.value = std::log2(out.sdp.primal_objective);
  (void)id;
  return out;
}

}  // namespace instab
