#include "instability/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "instability/log.hpp"

namespace instab {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal:
      return "optimal";
    case SdpStatus::infeasible:
      return "infeasible";
    case SdpStatus::max_iter:
      return "max_iter";
  }
  return "?";
}

void require_optimal(const SdpSolution& s, const std::string& what) {
  if (s.status == SdpStatus::optimal) return;
  std::ostringstream msg;
  msg << what << ": SDP status " << to_string(s.status) << " (gap " << s.gap << ", primal infeasibility "
      << s.primal_infeasibility << ", dual infeasibility " << s.dual_infeasibility << ")";
  if (!s.detail.empty()) msg << ": " << s.detail;
  throw SolverError(msg.str());
}

namespace {

using Eigen::Map;
using Eigen::VectorXd;

RMat embed(const CMat& h, bool complex_block) {
  if (!complex_block) return h.real();
  const Eigen::Index n = h.rows();
  RMat out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  out.bottomRightCorner(n, n) = h.real();
  return out;
}

CMat unembed(const RMat& x, Eigen::Index n, bool complex_block) {
  if (!complex_block) return x.cast<cplx>();
  CMat out(n, n);
  const RMat re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  const RMat im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = cplx(re(i, j), im(i, j));
  return out;
}

bool block_is_real(const LmiBlock& b) {
  auto real_enough = [](const CMat& m) {
    return m.size() == 0 || m.imag().cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, m.cwiseAbs().maxCoeff());
  };
  if (!real_enough(b.F0)) return false;
  for (const auto& f : b.F)
    if (!real_enough(f)) return false;
  return true;
}

template <typename S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct StdBlock {
  int n = 0;
  MatT<S> C;
  MatT<S> A;  // m × n², row i = vec(A_i)
};

template <typename D>
MatT<typename D::Scalar> sym(const Eigen::MatrixBase<D>& m) {
  using S = typename D::Scalar;
  const MatT<S> e = m;
  return (e + e.transpose()) * S(0.5);
}

template <typename D>
VecT<typename D::Scalar> vec(const Eigen::MatrixBase<D>& m) {
  using S = typename D::Scalar;
  const MatT<S> e = m;
  return Map<const VecT<S>>(e.data(), e.size());
}

template <typename D>
MatT<typename D::Scalar> unvec(const Eigen::MatrixBase<D>& v, int n) {
  using S = typename D::Scalar;
  const VecT<S> e = v;
  return Map<const MatT<S>>(e.data(), n, n);
}

// Largest α with X + α dX ⪰ 0 (∞ if none).
template <typename S>
S max_step(const MatT<S>& x, const MatT<S>& dx) {
  Eigen::LLT<MatT<S>> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatT<S> l_inv_dx = llt.matrixL().solve(dx);
  const MatT<S> s = llt.matrixL().solve(l_inv_dx.transpose());
  Eigen::SelfAdjointEigenSolver<MatT<S>> es(sym(s), Eigen::EigenvaluesOnly);
  const S lmin = es.eigenvalues().minCoeff();
  return lmin >= 0 ? kInfinity : -1.0 / lmin;
}

constexpr double kNeighbourhood = 1e-2;

template <typename S>
struct CoreResult {
  VecT<S> w;
  std::vector<MatT<S>> X, Z;
  int iterations = 0;
  S pinf = 0, dinf = 0, relgap = 0;
  bool diverged = false;
  std::string detail;
};

// `objective_scale` converts scaled objective values back to user units so
// the gap is judged the way the caller will judge it.
template <typename S>
CoreResult<S> solve_standard(const VecT<S>& b, std::vector<StdBlock<S>>& blocks, const SdpOptions& opt,
                          S objective_scale) {
  const int m = static_cast<int>(b.size());
  int total = 0;
  S normC = 1, normA = 1;
  for (const auto& blk : blocks) {
    total += blk.n;
    normC = std::max(normC, blk.C.norm());
    for (int i = 0; i < m; ++i) normA = std::max(normA, blk.A.row(i).norm());
  }
  const S normb = std::max(S(1), b.norm());

  CoreResult<S> r;
  S xi_p = 10, xi_d = 10;
  for (const auto& blk : blocks) {
    xi_p = std::max(xi_p, std::sqrt(static_cast<S>(blk.n)));
    xi_d = std::max(xi_d, std::sqrt(static_cast<S>(blk.n)));
  }
  for (int i = 0; i < m; ++i) {
    S an = 0;
    for (const auto& blk : blocks) an += blk.A.row(i).squaredNorm();
    xi_p = std::max(xi_p, (1 + std::abs(b(i))) / (1 + std::sqrt(an)));
  }
  xi_d = std::max(xi_d, std::max(normC, normA));
  for (const auto& blk : blocks) {
    r.X.push_back(xi_p * MatT<S>::Identity(blk.n, blk.n));
    r.Z.push_back(xi_d * MatT<S>::Identity(blk.n, blk.n));
  }
  r.w = VecT<S>::Zero(m);

  auto op = [&](const std::vector<MatT<S>>& p) {
    VecT<S> out = VecT<S>::Zero(m);
    for (std::size_t j = 0; j < blocks.size(); ++j) out += blocks[j].A * vec(p[j]);
    return out;
  };
  auto adj = [&](const VecT<S>& v, std::size_t j) { return unvec(blocks[j].A.transpose() * v, blocks[j].n); };

  const std::size_t nb = blocks.size();
  int stalled = 0;
  // Near the optimum rounding can make the iterates drift; the best one seen
  // is returned.
  CoreResult<S> best;
  S best_merit = kInfinity;
  int no_improve = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    r.iterations = it;
    const VecT<S> rp = b - op(r.X);
    std::vector<MatT<S>> rd(nb);
    S rd_norm2 = 0, pobj = 0, xz = 0;
    for (std::size_t j = 0; j < nb; ++j) {
      rd[j] = blocks[j].C - r.Z[j] - adj(r.w, j);
      rd_norm2 += rd[j].squaredNorm();
      pobj += (blocks[j].C.array() * r.X[j].array()).sum();
      xz += (r.X[j].array() * r.Z[j].array()).sum();
    }
    const S dobj = b.dot(r.w);
    const S mu = xz / total;
    r.pinf = rp.norm() / (1 + normb);
    r.dinf = std::sqrt(rd_norm2) / (1 + normC);
    r.relgap = objective_scale * std::abs(pobj - dobj) /
               (1 + objective_scale * std::max(std::abs(pobj), std::abs(dobj)));
    const S merit = std::max({r.pinf / opt.feas_tol, r.dinf / opt.feas_tol, r.relgap / opt.gap_tol});
    if (merit < best_merit) {
      best_merit = merit;
      best = r;
      no_improve = 0;
    } else if (++no_improve >= 20) {
      r.detail = "progress stalled";
      break;
    }
    if (r.pinf < opt.target_tol && r.dinf < opt.target_tol && r.relgap < opt.target_tol) break;

    S xnorm = 0;
    for (const auto& x : r.X) xnorm = std::max(xnorm, x.norm());
    if (xnorm > 1e13) {
      r.diverged = true;
      r.detail = "multiplier norm diverged; the constraints appear infeasible";
      break;
    }
    if (r.w.cwiseAbs().maxCoeff() > 1e13) {
      r.diverged = true;
      r.detail = "variables diverged; the objective appears unbounded below";
      break;
    }

    std::vector<MatT<S>> zinv(nb);
    MatT<S> M = MatT<S>::Zero(m, m);
    for (std::size_t j = 0; j < nb; ++j) {
      const int n = blocks[j].n;
      Eigen::LLT<MatT<S>> llt(r.Z[j]);
      if (llt.info() != Eigen::Success) {
        r.detail = "slack lost positive definiteness";
        r.diverged = true;
        return r;
      }
      zinv[j] = llt.solve(MatT<S>::Identity(n, n));
      MatT<S> bj(n * n, m);
      for (int k = 0; k < m; ++k) {
        const MatT<S> ak = unvec(blocks[j].A.row(k).transpose(), n);
        bj.col(k) = vec(zinv[j] * ak * r.X[j]);
      }
      M.noalias() += blocks[j].A * bj;
    }
    M = sym(M);
    Eigen::LLT<MatT<S>> mchol(M);
    Eigen::LDLT<MatT<S>> mldlt;
    const bool use_llt = mchol.info() == Eigen::Success;
    if (!use_llt) mldlt.compute(M);

    // Complementarity residuals are passed without the −XZ term; it is
    // folded in analytically (−XZ·Z⁻¹ = −X) so no product with Z⁻¹ has to
    // cancel it numerically.
    VecT<S> base = b;
    {
      std::vector<MatT<S>> xrz(nb);
      for (std::size_t j = 0; j < nb; ++j) xrz[j] = r.X[j] * rd[j] * zinv[j];
      base += op(xrz);
    }
    auto direction = [&](const std::vector<MatT<S>>& rc, std::vector<MatT<S>>& dx, VecT<S>& dw, std::vector<MatT<S>>& dz) {
      std::vector<MatT<S>> rcz(nb);
      for (std::size_t j = 0; j < nb; ++j) rcz[j] = rc[j] * zinv[j];
      const VecT<S> rhs = base - op(rcz);
      auto schur_solve = [&](const VecT<S>& v) { return use_llt ? VecT<S>(mchol.solve(v)) : VecT<S>(mldlt.solve(v)); };
      dw = schur_solve(rhs);
      dx.resize(nb);
      dz.resize(nb);
      // Refine against the primal equations 𝒜(dX) = r_p, which the Schur
      // solve alone meets only to the conditioning of M.
      for (int refine = 0;; ++refine) {
        for (std::size_t j = 0; j < nb; ++j) {
          dz[j] = rd[j] - adj(dw, j);
          dx[j] = sym(rcz[j] - r.X[j] - r.X[j] * dz[j] * zinv[j]);
        }
        if (refine == 2) break;
        const VecT<S> err = rp - op(dx);
        if (err.norm() <= 1e-15 * (1 + rp.norm())) break;
        dw -= schur_solve(err);
      }
    };

    std::vector<MatT<S>> rc(nb), dxa, dza, dx, dz;
    VecT<S> dwa, dw;
    for (std::size_t j = 0; j < nb; ++j) rc[j] = MatT<S>::Zero(blocks[j].n, blocks[j].n);
    direction(rc, dxa, dwa, dza);
    S ap = 1, ad = 1;
    for (std::size_t j = 0; j < nb; ++j) {
      ap = std::min(ap, max_step(r.X[j], dxa[j]));
      ad = std::min(ad, max_step(r.Z[j], dza[j]));
    }
    S xz_aff = 0;
    for (std::size_t j = 0; j < nb; ++j)
      xz_aff += ((r.X[j] + ap * dxa[j]).array() * (r.Z[j] + ad * dza[j]).array()).sum();
    const S mu_aff = xz_aff / total;
    const S sigma = std::clamp(S(std::pow(std::max(S(0), mu_aff) / mu, S(3))), S(0), S(1));

    for (std::size_t j = 0; j < nb; ++j)
      rc[j] = sigma * mu * MatT<S>::Identity(blocks[j].n, blocks[j].n) - dxa[j] * dza[j];
    direction(rc, dx, dw, dz);
    const S gamma = 0.9 + 0.09 * std::min(ap, ad);
    ap = 1;
    ad = 1;
    for (std::size_t j = 0; j < nb; ++j) {
      ap = std::min(ap, gamma * max_step(r.X[j], dx[j]));
      ad = std::min(ad, gamma * max_step(r.Z[j], dz[j]));
    }
    // Rounding can push a near-boundary iterate out of the cone; shorten
    // the step until both factors stay positive definite.
    // The step is also kept inside a wide neighbourhood of the central path,
    // λ_min(XZ) ≥ θ μ, which protects the conditioning of later iterations.
    std::vector<MatT<S>> nx(nb), nz(nb);
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      accepted = true;
      S new_xz = 0, new_min = kInfinity;
      for (std::size_t j = 0; j < nb && accepted; ++j) {
        nx[j] = sym(r.X[j] + ap * dx[j]);
        nz[j] = sym(r.Z[j] + ad * dz[j]);
        Eigen::LLT<MatT<S>> lx(nx[j]);
        accepted = lx.info() == Eigen::Success && Eigen::LLT<MatT<S>>(nz[j]).info() == Eigen::Success;
        if (!accepted) break;
        const MatT<S> lower = lx.matrixL();
        const MatT<S> inner = lower.transpose() * nz[j] * lower;
        new_min = std::min(new_min, Eigen::SelfAdjointEigenSolver<MatT<S>>(sym(inner), Eigen::EigenvaluesOnly).eigenvalues()(0));
        new_xz += (nx[j].array() * nz[j].array()).sum();
      }
      if (accepted && tries < 40) accepted = new_min >= kNeighbourhood * new_xz / total;
      if (!accepted) {
        ap *= tries < 40 ? 0.8 : 0.5;
        ad *= tries < 40 ? 0.8 : 0.5;
      }
    }
    if (!accepted) {
      r.detail = "numerical breakdown at the cone boundary";
      break;
    }
    r.X = std::move(nx);
    r.Z = std::move(nz);
    r.w += ad * dw;
    if (log_level() >= LogLevel::debug) {
      std::ostringstream msg;
      msg << "sdp it " << it << " pinf " << r.pinf << " dinf " << r.dinf << " gap " << r.relgap << " mu " << mu
          << " sigma " << sigma << " ap " << ap << " ad " << ad;
      log_message(LogLevel::debug, msg.str());
    }
    stalled = (ap < 1e-9 && ad < 1e-9) ? stalled + 1 : 0;
    if (stalled >= 3) {
      r.detail = "step lengths collapsed";
      break;
    }
    r.iterations = it + 1;
  }
  if (!r.diverged && best_merit < kInfinity) {
    const std::string detail = r.detail;
    const int iterations = r.iterations;
    r = best;
    r.detail = detail;
    r.iterations = iterations;
  }
  return r;
}

// Runs the core in scalar type S and converts the result back.
template <typename S>
CoreResult<double> run_core(const VectorXd& b, const std::vector<StdBlock<double>>& blocks, const SdpOptions& opt,
                            double objective_scale) {
  std::vector<StdBlock<S>> cast;
  for (const auto& blk : blocks) cast.push_back({blk.n, blk.C.cast<S>(), blk.A.cast<S>()});
  const CoreResult<S> r = solve_standard<S>(b.cast<S>(), cast, opt, objective_scale);
  CoreResult<double> out;
  out.w = r.w.template cast<double>();
  for (const auto& x : r.X) out.X.push_back(x.template cast<double>());
  for (const auto& z : r.Z) out.Z.push_back(z.template cast<double>());
  out.iterations = r.iterations;
  out.pinf = static_cast<double>(r.pinf);
  out.dinf = static_cast<double>(r.dinf);
  out.relgap = static_cast<double>(r.relgap);
  out.diverged = r.diverged;
  out.detail = r.detail;
  return out;
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SdpOptions& opt) {
  const int m = p.num_vars();
  require(m >= 0, "sdp: bad variable count");
  for (const auto& blk : p.blocks) {
    require(blk.F0.rows() == blk.F0.cols() && blk.F0.rows() > 0, "sdp: block F0 must be square");
    require(static_cast<int>(blk.F.size()) == m, "sdp: each block needs one coefficient matrix per variable");
    require(is_hermitian(blk.F0), "sdp: block data must be Hermitian");
    for (const auto& f : blk.F) {
      require(f.rows() == blk.F0.rows() && f.cols() == blk.F0.cols(), "sdp: coefficient size mismatch");
      require(is_hermitian(f), "sdp: block data must be Hermitian");
    }
  }
  require(p.eq_A.rows() == p.eq_b.size(), "sdp: equality rows and right-hand side differ in size");
  require(p.eq_A.rows() == 0 || p.eq_A.cols() == m, "sdp: equality matrix has wrong column count");

  SdpSolution sol;
  // Eliminate equalities: y = y0 + N w.
  VectorXd y0 = VectorXd::Zero(m);
  RMat N = RMat::Identity(m, m);
  if (p.eq_A.rows() > 0) {
    Eigen::JacobiSVD<RMat> svd(p.eq_A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double top = sv.size() ? sv.maxCoeff() : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-12 * std::max(1.0, top)) ++rank;
    y0 = svd.solve(p.eq_b);
    if ((p.eq_A * y0 - p.eq_b).norm() > 1e-9 * (1 + p.eq_b.norm())) {
      sol.status = SdpStatus::infeasible;
      sol.detail = "linear equalities are inconsistent";
      return sol;
    }
    N = svd.matrixV().rightCols(m - rank);
  }
  const int mr = static_cast<int>(N.cols());

  std::vector<StdBlock<double>> blocks;
  std::vector<bool> complex_block;
  for (const auto& blk : p.blocks) {
    const bool cb = !block_is_real(blk);
    complex_block.push_back(cb);
    const int n = static_cast<int>(blk.F0.rows()) * (cb ? 2 : 1);
    StdBlock<double> s;
    s.n = n;
    std::vector<RMat> fe;
    fe.reserve(m);
    for (const auto& f : blk.F) fe.push_back(embed(f, cb));
    s.C = embed(blk.F0, cb);
    for (int i = 0; i < m; ++i)
      if (y0(i) != 0) s.C += y0(i) * fe[i];
    s.A = RMat::Zero(mr, static_cast<Eigen::Index>(n) * n);
    for (int k = 0; k < mr; ++k) {
      RMat a = RMat::Zero(n, n);
      for (int i = 0; i < m; ++i)
        if (N(i, k) != 0) a -= N(i, k) * fe[i];
      s.A.row(k) = vec(sym(a)).transpose();
    }
    s.C = sym(s.C);
    blocks.push_back(std::move(s));
  }
  const VectorXd creduced = N.transpose() * p.c;

  // Scale data to unit size.
  double sc = 1;
  for (const auto& b : blocks) sc = std::max(sc, b.C.norm());
  const double sb = std::max(1.0, creduced.norm());
  for (auto& b : blocks) b.C /= sc;
  const VectorXd bscaled = -creduced / sb;

  VectorXd w = VectorXd::Zero(mr);
  std::vector<RMat> X;
  CoreResult<double> core;
  if (mr > 0 && !blocks.empty()) {
    core = run_core<double>(bscaled, blocks, opt, sc * sb);
    // Degenerate problems can stall in double precision once the Schur
    // complement becomes too ill-conditioned; retry in extended precision.
    auto meets = [&](const CoreResult<double>& c) {
      return c.pinf <= opt.feas_tol && c.dinf <= opt.feas_tol && c.relgap <= opt.gap_tol;
    };
    if (!core.diverged && !meets(core)) {
      log_message(LogLevel::debug, "sdp: retrying in extended precision");
      auto ext = run_core<long double>(bscaled, blocks, opt, sc * sb);
      ext.iterations += core.iterations;
      if (meets(ext) || std::max({ext.pinf, ext.dinf, ext.relgap}) < std::max({core.pinf, core.dinf, core.relgap}))
        core = std::move(ext);
    }
    w = core.w * sc;
    for (auto& x : core.X) X.push_back(x * sb);
    sol.iterations = core.iterations;
    sol.detail = core.detail;
  } else {
    for (const auto& b : blocks) X.push_back(RMat::Zero(b.n, b.n));
  }

  sol.y = y0 + N * w;
  double worst = 0;
  double lower = p.c.dot(y0);
  for (std::size_t j = 0; j < p.blocks.size(); ++j) {
    CMat s = p.blocks[j].F0;
    for (int i = 0; i < m; ++i) s += sol.y(i) * p.blocks[j].F[i];
    s = hermitize(s);
    worst = std::max(worst, -lambda_min(s));
    sol.slacks.push_back(std::move(s));
    const Eigen::Index n0 = p.blocks[j].F0.rows();
    sol.multipliers.push_back(hermitize(unembed(X[j], n0, complex_block[j])));
    lower -= (blocks[j].C * sc).cwiseProduct(X[j]).sum();
  }
  double eq_res = 0;
  if (p.eq_A.rows() > 0) eq_res = (p.eq_A * sol.y - p.eq_b).norm();
  sol.primal_infeasibility = std::max(0.0, std::max(worst, eq_res));
  sol.dual_infeasibility = core.pinf;
  sol.primal_objective = p.c.dot(sol.y);
  sol.dual_objective = lower;
  sol.gap = sol.primal_objective - sol.dual_objective;

  const bool ok = std::abs(sol.gap) <= opt.gap_tol * (1 + std::abs(sol.primal_objective)) &&
                  sol.primal_infeasibility <= opt.feas_tol && sol.dual_infeasibility <= opt.feas_tol;
  if (core.diverged)
    sol.status = SdpStatus::infeasible;
  else if (ok)
    sol.status = SdpStatus::optimal;
  else
    sol.status = mr == 0 && worst <= opt.feas_tol ? SdpStatus::optimal : SdpStatus::max_iter;
  if (mr == 0 && worst > opt.feas_tol) {
    sol.status = SdpStatus::infeasible;
    sol.detail = "the unique point allowed by the equalities violates a matrix inequality";
  }
  if (sol.status != SdpStatus::optimal) {
    std::ostringstream msg;
    msg << "sdp finished with status " << to_string(sol.status) << " after " << sol.iterations
        << " iterations (gap " << sol.gap << ", pinf " << sol.primal_infeasibility << ", dinf "
        << sol.dual_infeasibility << ")";
    log_message(LogLevel::info, msg.str());
  }
  return sol;
}

}  // namespace instab
