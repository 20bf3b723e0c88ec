#pragma once

// Dense complex Hermitian linear algebra on Eigen matrices.
//
// Everything here is a free function templated on the Eigen expression type,
// so callers can pass products and sums without materializing temporaries.
// Tensor products use a fixed index convention: in kron(A, B) the left
// factor is the most significant index, i.e. |i>|j> sits at row i*dim(B)+j.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "instability/errors.hpp"

namespace instab {

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using CMat = CMatrix<double>;
using RVec = RVector<double>;
using cplx = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Relative rank cut-off used for every support decision.
inline constexpr double kRankEps = 1e-13;

template <typename Derived>
using ScalarOf = typename Derived::Scalar;
template <typename Derived>
using RealOf = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

template <typename Derived>
RealOf<Derived> max_abs_entry(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return RealOf<Derived>(0);
  return m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, RealOf<Derived> rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  if (!m.allFinite()) return false;
  using Real = RealOf<Derived>;
  const Real scale = std::max(Real(1), max_abs_entry(m));
  return max_abs_entry(m - m.adjoint()) <= rel_tol * scale * Real(std::max<Eigen::Index>(1, m.rows()));
}

template <typename Derived>
CMatrix<RealOf<Derived>> hermitize(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.adjoint()) / RealOf<Derived>(2);
}

template <typename Real>
struct EigenDecomposition {
  RVector<Real> values;   // ascending
  CMatrix<Real> vectors;  // unitary, columns are eigenvectors
};

template <typename Derived>
EigenDecomposition<RealOf<Derived>> eigh(const Eigen::MatrixBase<Derived>& h) {
  using Real = RealOf<Derived>;
  if (!is_hermitian(h)) throw ValidationError("eigh: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> solver(hermitize(h));
  if (solver.info() != Eigen::Success) throw SolverError("eigh: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// Eigenvalues below this are treated as exact zeros.
template <typename Real>
Real rank_tolerance(const RVector<Real>& eigenvalues) {
  if (eigenvalues.size() == 0) return Real(0);
  const Real top = eigenvalues.cwiseAbs().maxCoeff();
  return Real(eigenvalues.size()) * Real(kRankEps) * top;
}

template <typename Real, typename F>
CMatrix<Real> spectral_apply(const EigenDecomposition<Real>& e, F&& f) {
  RVector<Real> mapped(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) mapped(i) = f(e.values(i));
  return e.vectors * mapped.asDiagonal() * e.vectors.adjoint();
}

// Support convention: eigenvalues at or below rank tolerance (including small
// negative round-off) map to 0 for every exponent, so negative powers are
// pseudo-inverses and r = 0 yields the support projector.
template <typename Real>
CMatrix<Real> mat_pow(const EigenDecomposition<Real>& e, Real r) {
  const Real tol = rank_tolerance(e.values);
  return spectral_apply(e, [&](Real x) { return x > tol ? std::pow(x, r) : Real(0); });
}

template <typename Derived>
CMatrix<RealOf<Derived>> mat_pow(const Eigen::MatrixBase<Derived>& p, RealOf<Derived> r) {
  return mat_pow(eigh(p), r);
}

template <typename Derived>
CMatrix<RealOf<Derived>> support_projector(const Eigen::MatrixBase<Derived>& p) {
  return mat_pow(eigh(p), RealOf<Derived>(0));
}

// Base-2 logarithm restricted to the support.
template <typename Derived>
CMatrix<RealOf<Derived>> mat_log2(const Eigen::MatrixBase<Derived>& p) {
  using Real = RealOf<Derived>;
  const auto e = eigh(p);
  const Real tol = rank_tolerance(e.values);
  return spectral_apply(e, [&](Real x) { return x > tol ? std::log2(x) : Real(0); });
}

template <typename Derived>
RealOf<Derived> lambda_max(const Eigen::MatrixBase<Derived>& h) {
  return eigh(h).values.maxCoeff();
}

template <typename Derived>
RealOf<Derived> lambda_min(const Eigen::MatrixBase<Derived>& h) {
  return eigh(h).values.minCoeff();
}

template <typename Derived>
RealOf<Derived> real_trace(const Eigen::MatrixBase<Derived>& m) {
  return std::real(m.trace());
}

// tr[A B] for Hermitian A, B without forming the product.
template <typename DA, typename DB>
RealOf<DA> trace_product(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return std::real((a.transpose().cwiseProduct(b)).sum());
}

// Schatten p-(quasi)norm, p in [1/2, inf]; singular values of a Hermitian
// operator are the absolute eigenvalues.
template <typename Derived>
RealOf<Derived> schatten_norm(const Eigen::MatrixBase<Derived>& x, RealOf<Derived> p) {
  using Real = RealOf<Derived>;
  if (!(p >= Real(0.5))) throw ValidationError("schatten_norm: p must lie in [1/2, inf]");
  const RVector<Real> s = eigh(x).values.cwiseAbs();
  if (std::isinf(p)) return s.size() ? s.maxCoeff() : Real(0);
  const Real top = s.size() ? s.maxCoeff() : Real(0);
  if (top == Real(0)) return Real(0);
  Real acc = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) acc += std::pow(s(i) / top, p);
  return top * std::pow(acc, Real(1) / p);
}

template <typename DA, typename DB>
CMatrix<RealOf<DA>> tensor_product(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  CMatrix<RealOf<DA>> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Partial trace over every factor not listed in `keep`. `dims` lists the
// factor dimensions, most significant first; the kept factors retain their
// relative order.
template <typename Derived>
CMatrix<RealOf<Derived>> partial_trace(const Eigen::MatrixBase<Derived>& x, const std::vector<int>& dims,
                                       const std::vector<int>& keep) {
  using Real = RealOf<Derived>;
  const int n = static_cast<int>(dims.size());
  long total = 1;
  for (int d : dims) {
    require(d > 0, "partial_trace: factor dimensions must be positive");
    total *= d;
  }
  require(x.rows() == total && x.cols() == total, "partial_trace: dims do not match operator size");
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    require(k >= 0 && k < n, "partial_trace: keep index out of range");
    kept[k] = true;
  }
  std::vector<long> stride(n, 1);
  for (int k = n - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];

  long kept_dim = 1, traced_dim = 1;
  std::vector<int> kept_idx, traced_idx;
  for (int k = 0; k < n; ++k) {
    if (kept[k]) {
      kept_idx.push_back(k);
      kept_dim *= dims[k];
    } else {
      traced_idx.push_back(k);
      traced_dim *= dims[k];
    }
  }
  // Map a (kept multi-index, traced multi-index) pair to a full index.
  auto offsets = [&](const std::vector<int>& idx) {
    long count = 1;
    for (int k : idx) count *= dims[k];
    std::vector<long> out(count, 0);
    for (long c = 0; c < count; ++c) {
      long rem = c, off = 0;
      for (int t = static_cast<int>(idx.size()) - 1; t >= 0; --t) {
        const int k = idx[t];
        off += (rem % dims[k]) * stride[k];
        rem /= dims[k];
      }
      out[c] = off;
    }
    return out;
  };
  const auto kept_off = offsets(kept_idx);
  const auto traced_off = offsets(traced_idx);
  CMatrix<Real> out = CMatrix<Real>::Zero(kept_dim, kept_dim);
  for (long i = 0; i < kept_dim; ++i)
    for (long j = 0; j < kept_dim; ++j) {
      std::complex<Real> acc = 0;
      for (long t = 0; t < traced_dim; ++t) acc += x(kept_off[i] + traced_off[t], kept_off[j] + traced_off[t]);
      out(i, j) = acc;
    }
  return out;
}

template <typename DA, typename DB>
RealOf<DA> trace_distance(const Eigen::MatrixBase<DA>& rho, const Eigen::MatrixBase<DB>& tau) {
  require(rho.rows() == tau.rows() && rho.cols() == tau.cols(), "trace_distance: dimension mismatch");
  return RealOf<DA>(0.5) * schatten_norm(rho - tau, RealOf<DA>(1));
}

// ---------------------------------------------------------------------------
// Validated operator roles.

template <typename Real>
class BasicHermitianOperator {
 public:
  BasicHermitianOperator() = default;
  explicit BasicHermitianOperator(CMatrix<Real> m) : m_(std::move(m)) {
    require(m_.rows() == m_.cols() && m_.rows() > 0, "HermitianOperator: matrix must be square and non-empty");
    require(is_hermitian(m_), "HermitianOperator: matrix is not Hermitian");
    m_ = hermitize(m_);
  }
  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix<Real>& matrix() const { return m_; }
  operator const CMatrix<Real>&() const { return m_; }

 protected:
  CMatrix<Real> m_;
};

template <typename Real>
class BasicDensityMatrix : public BasicHermitianOperator<Real> {
 public:
  static constexpr Real kTol = Real(1e-10);
  BasicDensityMatrix() = default;
  explicit BasicDensityMatrix(CMatrix<Real> m) : BasicHermitianOperator<Real>(std::move(m)) {
    const auto e = eigh(this->m_);
    const Real top = std::max(Real(0), e.values.maxCoeff());
    require(e.values.minCoeff() >= -kTol * std::max(Real(1), top), "DensityMatrix: matrix is not positive semidefinite");
    require(std::abs(real_trace(this->m_) - Real(1)) <= kTol, "DensityMatrix: trace is not 1");
  }
};

template <typename Real>
class BasicEffect : public BasicHermitianOperator<Real> {
 public:
  static constexpr Real kTol = Real(1e-10);
  BasicEffect() = default;
  explicit BasicEffect(CMatrix<Real> m) : BasicHermitianOperator<Real>(std::move(m)) {
    const auto e = eigh(this->m_);
    require(e.values.minCoeff() >= -kTol && e.values.maxCoeff() <= Real(1) + kTol,
            "Effect: eigenvalues must lie in [0, 1]");
  }
};

using HermitianOperator = BasicHermitianOperator<double>;
using DensityMatrix = BasicDensityMatrix<double>;
using Effect = BasicEffect<double>;

// Unnormalized-state check used at API boundaries that accept plain matrices.
inline void require_state(const CMat& rho, const char* what, double tol = 1e-10) {
  require(rho.rows() == rho.cols() && rho.rows() > 0, std::string(what) + ": must be a non-empty square matrix");
  require(is_hermitian(rho), std::string(what) + ": must be Hermitian");
  const auto e = eigh(rho);
  require(e.values.minCoeff() >= -tol * std::max(1.0, e.values.maxCoeff()), std::string(what) + ": must be PSD");
  require(std::abs(real_trace(rho) - 1.0) <= tol, std::string(what) + ": must have unit trace");
}

inline void require_psd(const CMat& p, const char* what, double tol = 1e-10) {
  require(p.rows() == p.cols() && p.rows() > 0, std::string(what) + ": must be a non-empty square matrix");
  require(is_hermitian(p), std::string(what) + ": must be Hermitian");
  const auto e = eigh(p);
  require(e.values.minCoeff() >= -tol * std::max(1.0, e.values.maxCoeff()), std::string(what) + ": must be PSD");
}

}  // namespace instab
