#pragma once

// Small dense semidefinite programs in linear-matrix-inequality form:
//
//   minimize cᵀy  subject to  F0_j + Σ_i y_i F_ij ⪰ 0 (each block j),
//                             E y = e.
//
// Blocks are complex Hermitian; purely real blocks are solved as real
// symmetric ones and complex blocks through the embedding
// A + iB ↦ [[A, −B], [B, A]]. Equalities are eliminated up front
// (particular solution plus null-space basis). Linear inequalities are 1×1
// blocks.
//
// The solver is an infeasible-start primal-dual path-following method with
// the HKM search direction and Mehrotra's predictor-corrector, applied to
// the standard pair
//
//   (P) min ⟨C, X⟩ s.t. ⟨A_i, X⟩ = b_i, X ⪰ 0
//   (D) max bᵀw    s.t. C − Σ w_i A_i ⪰ 0,
//
// with the user problem as (D).

#include <string>
#include <vector>

#include "instability/hermitian.hpp"

namespace instab {

using RMat = Eigen::MatrixXd;

struct LmiBlock {
  CMat F0;
  std::vector<CMat> F;  // one per variable
};

struct SdpProblem {
  RVec c;
  std::vector<LmiBlock> blocks;
  RMat eq_A;  // may be empty
  RVec eq_b;

  int num_vars() const { return static_cast<int>(c.size()); }
};

enum class SdpStatus { optimal, infeasible, max_iter };
const char* to_string(SdpStatus s);

struct SdpOptions {
  double feas_tol = 1e-8;    // required for status optimal
  double gap_tol = 1e-7;     // relative to 1 + |objective|
  double target_tol = 1e-10; // internal stopping target
  int max_iter = 200;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::max_iter;
  RVec y;
  std::vector<CMat> slacks;       // F0_j + Σ y_i F_ij
  std::vector<CMat> multipliers;  // dual matrices X_j
  double primal_objective = 0;    // cᵀy
  double dual_objective = 0;      // lower bound from the multipliers
  double gap = 0;
  double primal_infeasibility = 0;  // max(0, −λ_min of any slack) and ‖Ey − e‖
  double dual_infeasibility = 0;
  int iterations = 0;
  std::string detail;
};

SdpSolution solve(const SdpProblem& problem, const SdpOptions& options = {});

// Throws SolverError unless the status is optimal.
void require_optimal(const SdpSolution& s, const std::string& what);

}  // namespace instab

// ---------------------------------------------------------------------------
// Formulations.

#include "instability/destruction.hpp"

namespace instab {

struct HypothesisTestSdp {
  double value = 0;  // −log2 c
  double c = 0;      // optimal type-II weight
  CMat effect;       // witness Γ
  SdpSolution sdp;
};

// Restricted test: min c s.t. 0 ⪯ Γ ⪯ I, Δ*(Γ) = cI, tr ρΓ ≥ 1−ε.
// Γ is parameterized in {Γ : Δ*(Γ) ∝ I} = (im Δ)^⊥ ⊕ ℝI through an explicit
// orthonormal basis built from the block data.
HypothesisTestSdp restricted_ht(const CMat& rho, const DestructionChannel& channel, double eps,
                                const SdpOptions& options = {});

// Unrestricted against the free set: min c s.t. 0 ⪯ Γ ⪯ I, tr ρΓ ≥ 1−ε,
// Δ*(Γ) ⪯ cI.
HypothesisTestSdp ht_free(const CMat& rho, const DestructionChannel& channel, double eps,
                          const SdpOptions& options = {});

struct SmoothedDmax {
  double value = 0;  // log2 tr ω
  CMat tau;          // optimal smoothed state
  CMat omega;        // optimal free operator, ω ⪰ τ
  SdpSolution sdp;
};

// min log2 tr ω over τ with ½‖τ − ρ‖_1 ≤ ε and free ω ⪰ τ.
SmoothedDmax dmax_smoothed_free(const CMat& rho, const DestructionChannel& channel, double eps,
                                const SdpOptions& options = {});

// Orthonormal Hermitian basis of {Γ : Δ*(Γ) ∝ I}.
std::vector<CMat> scalar_dual_basis(const DestructionChannel& channel);

struct EffectCheck {
  double lower = 0;       // max(0, −λ_min(Γ))
  double upper = 0;       // max(0, λ_max(Γ) − 1)
  double acceptance = 0;  // max(0, 1−ε − tr ρΓ)
  double scalar = 0;      // ‖Δ*(Γ) − cI‖_∞ with c = tr[Δ(I)Γ]/d
  double worst() const { return std::max({lower, upper, acceptance}); }
};
EffectCheck check_effect(const CMat& effect, const CMat& rho, const DestructionChannel& channel, double eps);

}  // namespace instab
