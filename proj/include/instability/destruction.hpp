#pragma once

// Destruction channels as block-structured faithful conditional expectations.
//
// A channel is stored as a unitary `basis` (columns are the block-basis
// vectors written in computational coordinates) and a list of blocks
// (d_A, d_B, tau) with tau a full-rank state on A. In the block basis
//
//   Δ(X) = ⊕_i tau_i ⊗ tr_{A_i}[Π_i X Π_i],
//
// where each block H_i = A_i ⊗ B_i is indexed with A most significant.
// Idempotence and faithfulness hold by construction.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "instability/hermitian.hpp"

namespace instab {

struct Block {
  int dA = 1;
  int dB = 1;
  CMat tau;  // full-rank state on A (dA x dA)

  int size() const { return dA * dB; }
};

using BlockSpec = std::vector<Block>;

class DestructionChannel {
 public:
  // `basis` may be empty to mean the computational basis.
  DestructionChannel(BlockSpec blocks, CMat basis = CMat());

  int dim() const { return dim_; }
  const BlockSpec& blocks() const { return blocks_; }
  const CMat& basis() const { return basis_; }
  bool has_identity_basis() const { return identity_basis_; }
  int offset(int block) const { return offsets_[block]; }

  CMat apply(const CMat& x) const;
  CMat apply_dual(const CMat& y) const;
  // Δ(I)^{r/2} X Δ(I)^{r/2}
  CMat twist(const CMat& x, double r) const;

  // Δ(I) = ⊕ d_A tau ⊗ I_B.
  const CMat& image_of_identity() const { return delta_identity_; }
  CMat fixed_state() const { return delta_identity_ / static_cast<double>(dim_); }
  // Δ(I)^s computed blockwise from tau^s.
  CMat identity_power(double s) const;

  // The trace-preserving conditional expectation onto the same algebra.
  DestructionChannel trace_preserving() const;
  bool is_unital(double tol = 1e-12) const;

  // Change of basis to/from the block basis.
  CMat to_block_basis(const CMat& x) const;
  CMat from_block_basis(const CMat& x) const;

  // Choi matrix J = Σ_jk E_jk ⊗ Δ(E_jk) (input factor first) and a Kraus
  // decomposition extracted from it.
  CMat choi() const;
  std::vector<CMat> kraus() const;

  // Orthonormal (Hilbert-Schmidt) Hermitian basis of the fixed-point algebra
  // im Δ* = ⊕ I_A ⊗ L(B_i), and of the free cone's linear span im Δ.
  std::vector<CMat> algebra_basis() const;

 private:
  int dim_ = 0;
  BlockSpec blocks_;
  CMat basis_;
  bool identity_basis_ = true;
  std::vector<int> offsets_;
  CMat delta_identity_;
  std::vector<EigenDecomposition<double>> tau_eig_;
};

// A system is a dimension together with its destruction mechanism.
class InstabilitySystem {
 public:
  explicit InstabilitySystem(DestructionChannel channel) : channel_(std::move(channel)) {}
  int dim() const { return channel_.dim(); }
  const DestructionChannel& channel() const { return channel_; }

 private:
  DestructionChannel channel_;
};

// Standard mechanisms.
DestructionChannel dephaser(int dim);
DestructionChannel dephaser(const CMat& basis);
DestructionChannel replacer(const CMat& gamma);
DestructionChannel depolarizer(int dim);
DestructionChannel cond_depolarizer(int dA, int dB);
DestructionChannel cond_replacer(const CMat& gammaA, int dB);
// Trace-preserving conditional expectation on the given block dimensions;
// any tau in `blocks` is replaced by the maximally mixed state.
DestructionChannel tpce(const BlockSpec& blocks, const CMat& basis = CMat());

enum class ChannelKind { dephaser, replacer, depolarizer, cond_depolarizer, cond_replacer, tpce };

struct ChannelParams {
  int dim = 0;
  int dA = 0;
  int dB = 0;
  CMat gamma;
  CMat basis;
  BlockSpec blocks;
};

DestructionChannel standard_channel(ChannelKind kind, const ChannelParams& params);
std::optional<ChannelKind> parse_channel_kind(const std::string& name);

// Currency system: two-level replacer with Gibbs weight 2^{-m} on |0>.
DestructionChannel currency_channel(double m);
CMat currency_gibbs(double m);
CMat currency_state();

// Δ^A ⊗ Δ^B with its block structure (left factor most significant).
DestructionChannel tensor_compose(const DestructionChannel& a, const DestructionChannel& b);
InstabilitySystem tensor_compose(const InstabilitySystem& a, const InstabilitySystem& b);
DestructionChannel tensor_power(const DestructionChannel& a, int n);

// Free states ⊕ p_i tau_i ⊗ beta_i.
struct FreeCoords {
  std::vector<double> weights;
  std::vector<CMat> betas;  // states on B_i
};

CMat free_state(const DestructionChannel& channel, const FreeCoords& coords);
int free_parameter_count(const DestructionChannel& channel);
// Grid over the free-state family: simplex grid on block weights, Bloch grid
// for d_B = 2, seeded random states plus a diagonal grid for d_B > 2.
std::vector<CMat> enumerate_free_grid(const DestructionChannel& channel, int resolution = 21,
                                      std::uint64_t seed = 0);

// U = ⊕ u_i ⊗ v_i (block basis) with u_i commuting with tau_i, optionally
// composed with a permutation of identical blocks.
CMat random_free_unitary(const DestructionChannel& channel, std::uint64_t seed);

class Rng;
// Random block partition of `dim` with random full-rank tau_i (bounded away
// from singular) and, with probability 1/2, a Haar-random basis.
DestructionChannel random_destruction_channel(int dim, Rng& rng);

// max over matrix units of ‖a(E) - b(E)‖_1.
double channel_distance(const std::function<CMat(const CMat&)>& a, const std::function<CMat(const CMat&)>& b,
                        int dim);

// Hermitian matrix-unit basis {E_jj, (E_jk+E_kj)/√2, i(E_jk-E_kj)/√2}.
std::vector<CMat> hermitian_basis(int dim);

}  // namespace instab
