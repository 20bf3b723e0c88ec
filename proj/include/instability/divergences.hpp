#pragma once

// Two-argument quantum divergences, in bits.
//
// The second argument may be any nonzero PSD operator; scaling it by t shifts
// every divergence by -log2 t. Support violations and the orthogonal case give
// kInfinity (also for D_{α,z} at α < 1 when ρ ⊥ S, where Q = 0).

#include "instability/hermitian.hpp"

namespace instab {

struct RenyiParams {
  double alpha = 1.0;
  double z = 1.0;
};

// Region where the data-processing inequality holds:
// α ∈ (0,1): z ≥ max(α, 1−α); α = 1: z > 0; α > 1: max(α/2, α−1) ≤ z ≤ α.
bool in_dpi_region(const RenyiParams& p, double tol = 1e-12);
void validate(const RenyiParams& p);

// (1/(α−1)) log2 tr[(ρ^{α/2z} S^{(1−α)/z} ρ^{α/2z})^z]; α = 1 is Umegaki.
double d_alpha_z(const CMat& rho, const CMat& S, const RenyiParams& p);
// The quasi-trace Q inside the logarithm (no α = 1 dispatch).
double alpha_z_quasi(const CMat& rho, const CMat& S, const RenyiParams& p);

inline double petz(const CMat& rho, const CMat& S, double alpha) { return d_alpha_z(rho, S, {alpha, 1.0}); }
inline double sandwiched(const CMat& rho, const CMat& S, double alpha) { return d_alpha_z(rho, S, {alpha, alpha}); }

double umegaki(const CMat& rho, const CMat& S);
double d_min(const CMat& rho, const CMat& S);
double d_max(const CMat& rho, const CMat& S);

// True when tr[ρ (I − S⁰)] exceeds tol·tr ρ.
bool support_violated(const CMat& rho, const CMat& S, double tol = 1e-10);

struct HypothesisTest {
  double value = 0;  // −log2 tr[σΓ]
  CMat effect;       // optimal Γ
  double threshold = 0;
};

// −log2 min{tr σΓ : 0 ⪯ Γ ⪯ I, tr ρΓ ≥ 1−ε}. The optimum is a projector onto
// the positive part of tρ − σ plus a fraction of its null space, with t found
// by bisection on the monotone map t ↦ tr[ρ P_{>0}(tρ − σ)].
HypothesisTest d_hypothesis(const CMat& rho, const CMat& sigma, double eps);

}  // namespace instab
