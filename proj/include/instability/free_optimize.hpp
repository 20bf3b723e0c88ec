#pragma once

// Optimization of trace functionals F(σ) = tr[(σ^{r/2} X σ^{r/2})^z] over the
// free states of a destruction channel, and the instability monotones built
// on them.
//
// F is concave for r > 0 and convex for r < 0 on the region 𝔐_F, so the
// optimizer maximizes for r > 0 and minimizes for r < 0. At r = 0 F does not
// depend on σ.

#include <cstdint>

#include "instability/destruction.hpp"
#include "instability/divergences.hpp"

namespace instab {

struct TraceFunctionalSpec {
  CMat X;
  double r = 0;
  double z = 1;
  DestructionChannel channel;
  CMat initial;  // optional starting state; defaults to Δ(X) normalized
};

// (r, z) ∈ 𝔐_F: r ∈ [−1, 1], z > 0, 0 < r < 1 ⇒ z ≤ 1/r, r = 1 ⇒ z < 1.
bool in_functional_region(double r, double z, double tol = 1e-12);
void validate(const TraceFunctionalSpec& spec);

enum class OptimizerMethod { closed_form_z1, closed_form_petz, fixed_point, grid_fallback, exact };
const char* to_string(OptimizerMethod m);

struct OptimizerResult {
  CMat sigma_star;
  double value = 0;     // F(σ*) for functionals, the divergence for monotones
  double residual = 0;  // ‖σ* − N(Δ(G(σ*)))‖_1
  int iterations = 0;
  OptimizerMethod method = OptimizerMethod::fixed_point;
};

struct FixedPointOptions {
  double residual_tol = 1e-9;
  double step_tol = 1e-11;
  int max_iter = 10000;
  double eta_floor = 1.0 / 64;
  int fallback_resolution = 21;
  bool allow_fallback = true;
  bool use_closed_form = true;  // dispatch z = 1 to the closed form
};

// F(σ); +∞ when r < 0 and supp X ⊄ supp σ.
double evaluate_functional(const TraceFunctionalSpec& spec, const CMat& sigma);
// N(Δ(G(σ))) and its defect.
CMat fixed_point_map(const TraceFunctionalSpec& spec, const CMat& sigma);
double fixed_point_residual(const TraceFunctionalSpec& spec, const CMat& sigma);

OptimizerResult optimize_trace_functional(const TraceFunctionalSpec& spec, const FixedPointOptions& options = {});

// z = 1: σ* ∝ 𝒯(Δ*(𝒯^{r−1}X)^{1/(1−r)}), F(σ*) = ‖Δ*(𝒯^{r−1}X)‖_{1/(1−r)}.
OptimizerResult z1_closed_form(const CMat& X, double r, const DestructionChannel& channel);
// |F(σ) − F(σ*)·tr[σ^r σ*^{1−r}]| for z = 1.
double pythagorean_residual(const CMat& X, double r, const CMat& sigma_star, const CMat& sigma,
                            const DestructionChannel& channel);

// min over free σ of the Petz divergence D_α(ρ‖σ), α ∈ [0, 2].
OptimizerResult petz_free(const CMat& rho, double alpha, const DestructionChannel& channel);
double d_min_free(const CMat& rho, const DestructionChannel& channel);
OptimizerResult umegaki_free(const CMat& rho, const DestructionChannel& channel);

// M^λ_{α,z}(ρ); λ = 0 is D_{α,z}(ρ‖ℱ), λ = 1 is D_{α,z}(ρ‖Δρ).
OptimizerResult m_lambda(const CMat& rho, const RenyiParams& p, double lambda, const DestructionChannel& channel,
                         const FixedPointOptions& options = {});
inline OptimizerResult d_alpha_z_free(const CMat& rho, const RenyiParams& p, const DestructionChannel& channel,
                                      const FixedPointOptions& options = {}) {
  return m_lambda(rho, p, 0.0, channel, options);
}

struct GridResult {
  CMat sigma_best;
  double value = 0;
  std::size_t evaluations = 0;
};

// Exhaustive evaluation of F over enumerate_free_grid; refuses (BudgetError)
// above four free parameters.
GridResult grid_oracle(const TraceFunctionalSpec& spec, int resolution = 21, std::uint64_t seed = 0);

}  // namespace instab
