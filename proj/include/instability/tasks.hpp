#pragma once

// Operational tasks: currency states, one-shot yield and cost with their
// witnessing channels, battery-assisted and catalytic yields, the effect
// constructions used to compose tests, and multi-copy sweeps.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "instability/destruction.hpp"
#include "instability/sdp.hpp"

namespace instab {

using LinearMap = std::function<CMat(const CMat&)>;

// Currency φ_m: |0⟩⟨0| on a two-level system with Gibbs weight 2^{−m} on |0⟩.
struct CurrencyState {
  double m = 1;
  CMat state() const { return currency_state(); }
  InstabilitySystem system() const { return InstabilitySystem(currency_channel(m)); }
};

enum class TaskQuantity { yield, cost, cost_interval, battery_yield, catalytic_yield0 };
const char* to_string(TaskQuantity q);

struct TaskResiduals {
  double covariance = 0;   // witness channel covariance defect
  double accuracy = 0;     // output distance minus ε (≤ 0 when accurate)
  double effect = 0;       // effect-constraint violation
  double cross_check = 0;  // disagreement with an independent route, if any
};

struct TaskReport {
  TaskQuantity quantity = TaskQuantity::yield;
  double value = 0;  // point value; for intervals the lower end
  double lower = 0;
  double upper = 0;
  double epsilon = 0;
  double delta = 0;
  std::string witness;              // description of the witnessing object
  CMat effect;                      // measurement witness (yield-type tasks)
  std::vector<CMat> preparation;    // outputs on |0⟩⟨0|, |1⟩⟨1| (cost) or the best smoothed state
  TaskResiduals residuals;
  std::vector<std::string> notes;
};

// max over matrix units E of ‖𝒩(Δ_in(E)) − Δ_out(𝒩(E))‖_1.
double covariance_check(const LinearMap& channel, int in_dim, const LinearMap& delta_in, const LinearMap& delta_out);

// τ ↦ tr[τΓ]|0⟩⟨0| + tr[τ(I−Γ)]|1⟩⟨1|.
LinearMap measurement_channel(const CMat& effect);
// X ↦ ⟨0|X|0⟩ ρ0 + ⟨1|X|1⟩ ρ1.
LinearMap preparation_channel(const CMat& rho0, const CMat& rho1);
// X ↦ tr[X] γ_m (the currency destruction channel, valid for every m ≥ 0).
LinearMap currency_map(double m);

// Tolerances applied when re-verifying witnesses.
inline constexpr double kCovarianceTol = 1e-9;
inline constexpr double kAccuracyTol = 1e-8;

TaskReport one_shot_yield(const CMat& rho, const InstabilitySystem& sys, double eps, const SdpOptions& options = {});
TaskReport one_shot_cost_exact(const CMat& rho, const InstabilitySystem& sys);

struct CostEpsOptions {
  int mixture_steps = 8;      // η values per mixing direction
  bool use_sdp_states = true; // smoothed-D_max optimizers as candidates
  SdpOptions sdp;
};
// [lower, upper] bracket of the ε-smoothed cost. ε = 0 (with δ = 0) returns
// the exact cost at both ends.
TaskReport one_shot_cost_eps(const CMat& rho, const InstabilitySystem& sys, double eps, double delta,
                             const CostEpsOptions& options = {});

TaskReport battery_yield(const CMat& rho, const InstabilitySystem& sys, double eps, const SdpOptions& options = {});
TaskReport catalytic_yield0(const CMat& rho, const InstabilitySystem& sys);

// Γ' = (1−p)Γ + pI − (1−p)Δ*(Γ) with p = ‖Δ*(Γ)‖_∞; Δ*(Γ') = pI.
struct LiftedEffect {
  CMat effect;
  double p = 1;
};
LiftedEffect lift_effect(const CMat& effect, const DestructionChannel& channel);

// Υ = Γ⊗Λ + (2^{−t}/(1−2^{−t}))(pI − Δ_A*(Γ))⊗(I−Λ) for Λ with Δ_B*(Λ) = 2^{−t}I.
// Requires 2^{−(t+m)} ≤ 1 − 2^{−t} with p = 2^{−m} = ‖Δ_A*(Γ)‖_∞.
CMat compose_effect(const CMat& gamma, const CMat& lambda, double t, const DestructionChannel& channel_a,
                    const DestructionChannel& channel_b);

struct SweepRow {
  int n = 0;
  std::optional<double> yield_rate;    // restricted_ht(ρ^{⊗n}, ε)/n
  std::optional<double> cost_lo_rate;  // D_max^ε(ρ^{⊗n}‖ℱ)/n
  std::optional<double> cost_hi_rate;  // D_max(ρ^{⊗n}‖Δρ^{⊗n})/n
};

struct SweepBudget {
  int sdp_max_dim = 16;     // yield and smoothed-D_max rows
  int exact_max_dim = 256;  // exact-cost rows (eigenvalues only)
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double target = 0;  // D(ρ‖Δρ)
  double epsilon = 0;
  std::vector<std::string> notes;  // skipped rows and trend diagnostics
  bool cost_trend_nonincreasing = true;
  bool yield_below_target = true;
};

SweepResult regularize_sweep(const CMat& rho, const InstabilitySystem& sys, double eps, int n_max,
                             const SweepBudget& budget = {}, const SdpOptions& options = {});
std::string sweep_csv(const SweepResult& r);

}  // namespace instab
