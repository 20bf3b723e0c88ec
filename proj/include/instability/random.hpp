#pragma once

// Seeded generators for states, unitaries, and effects. Used by the property
// suites, the CLI verifier, and ε-ball sampling.

#include <cstdint>
#include <random>

#include "instability/hermitian.hpp"

namespace instab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::uint64_t next() { return engine_(); }

  CMat ginibre(int rows, int cols) {
    CMat g(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) g(i, j) = cplx(normal(), normal());
    return g;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Haar-random unitary (QR of a Ginibre matrix with phase fix).
CMat random_unitary(int dim, Rng& rng);

// Random density matrix of the given rank (default full rank), induced measure.
CMat random_state(int dim, Rng& rng, int rank = -1);

CMat random_pure_state(int dim, Rng& rng);

CMat random_hermitian(int dim, Rng& rng);

// Effect with Haar eigenbasis and eigenvalues uniform in [0, 1].
CMat random_effect(int dim, Rng& rng);

}  // namespace instab
