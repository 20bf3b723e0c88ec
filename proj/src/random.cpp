#include "instability/random.hpp"

namespace instab {

CMat random_unitary(int dim, Rng& rng) {
  const CMat g = rng.ginibre(dim, dim);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ() * CMat::Identity(dim, dim);
  const CMat r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) {
    const cplx d = r(j, j);
    const double a = std::abs(d);
    if (a > 0) q.col(j) *= d / a;
  }
  return q;
}

CMat random_state(int dim, Rng& rng, int rank) {
  if (rank <= 0 || rank > dim) rank = dim;
  const CMat g = rng.ginibre(dim, rank);
  CMat rho = g * g.adjoint();
  rho /= real_trace(rho);
  return hermitize(rho);
}

CMat random_pure_state(int dim, Rng& rng) { return random_state(dim, rng, 1); }

CMat random_hermitian(int dim, Rng& rng) {
  const CMat g = rng.ginibre(dim, dim);
  return hermitize(g);
}

CMat random_effect(int dim, Rng& rng) {
  const CMat u = random_unitary(dim, rng);
  RVec lam(dim);
  for (int i = 0; i < dim; ++i) lam(i) = rng.uniform();
  return hermitize(u * lam.asDiagonal() * u.adjoint());
}

}  // namespace instab
