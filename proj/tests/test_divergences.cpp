#include "doctest.h"

#include "instability/destruction.hpp"
#include "instability/divergences.hpp"
#include "instability/random.hpp"
#include "oracles.hpp"

using namespace instab;
using oracle::diag;

namespace {

const std::vector<RenyiParams> kParams = {{0.3, 0.7}, {0.5, 0.5}, {0.5, 1.0}, {0.8, 1.0}, {1.5, 1.0},
                                          {1.5, 1.5}, {2.0, 1.0}, {2.0, 2.0}, {1.7, 1.2}, {0.6, 3.0}};

}  // namespace

TEST_CASE("parameter region") {
  CHECK(in_dpi_region({0.5, 0.5}));
  CHECK(in_dpi_region({0.3, 0.7}));
  CHECK_FALSE(in_dpi_region({0.3, 0.5}));
  CHECK(in_dpi_region({1.0, 0.1}));
  CHECK(in_dpi_region({2.0, 1.0}));
  CHECK_FALSE(in_dpi_region({2.0, 0.9}));
  CHECK_FALSE(in_dpi_region({2.0, 2.1}));
  CHECK_FALSE(in_dpi_region({3.0, 1.0}));
  CHECK_FALSE(in_dpi_region({-1.0, 1.0}));
  CHECK_THROWS_AS(d_alpha_z(diag({1, 0}), diag({0.5, 0.5}), {3.0, 1.0}), ValidationError);
}

TEST_CASE("fixed values") {
  const CMat plus = oracle::ket_plus(2);
  const CMat half = CMat::Identity(2, 2) / 2.0;
  CHECK(d_alpha_z(plus, half, {2, 2}) == doctest::Approx(1).epsilon(1e-12));
  CHECK(umegaki(plus, half) == doctest::Approx(1).epsilon(1e-12));
  CHECK(umegaki(diag({0.7, 0.3}), half) == doctest::Approx(0.7 * std::log2(1.4) + 0.3 * std::log2(0.6)).epsilon(1e-12));
  CHECK(d_min(plus, diag({1.0 / 3, 2.0 / 3})) == doctest::Approx(1).epsilon(1e-12));
  CHECK(d_max(plus, diag({1.0 / 3, 2.0 / 3})) == doctest::Approx(std::log2(9.0 / 4)).epsilon(1e-12));
  CHECK(d_max(plus, half) == doctest::Approx(1).epsilon(1e-12));

  Rng rng(1);
  const CMat rho = random_state(3, rng);
  const CMat sigma = random_state(3, rng);
  CHECK(d_min(rho, sigma) == doctest::Approx(0).scale(1));
  for (const auto& p : kParams) {
    CHECK(std::abs(d_alpha_z(rho, rho, p)) < 1e-12);
    CHECK(d_alpha_z(rho, 2.0 * sigma, p) == doctest::Approx(d_alpha_z(rho, sigma, p) - 1).epsilon(1e-11));
  }
  CHECK(std::abs(umegaki(rho, rho)) < 1e-12);
  CHECK(std::abs(d_max(rho, rho)) < 1e-12);
  CHECK(std::abs(d_min(rho, rho)) < 1e-12);
}

TEST_CASE("support conventions") {
  const CMat e0 = diag({1, 0}), e1 = diag({0, 1});
  CHECK(d_max(e0, e1) == kInfinity);
  CHECK(umegaki(e0, e1) == kInfinity);
  CHECK(d_min(e0, e1) == kInfinity);
  CHECK(d_alpha_z(e0, e1, {2, 2}) == kInfinity);
  CHECK(d_alpha_z(e0, e1, {0.5, 1}) == kInfinity);
  // ρ inside supp S with S singular stays finite.
  CHECK(d_max(e0, diag({0.5, 0})) == doctest::Approx(1));
  CHECK(d_alpha_z(e0, diag({0.5, 0}), {1.5, 1}) == doctest::Approx(1));
}

TEST_CASE("agreement with Schur-based matrix functions") {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + trial % 4;
    const CMat rho = random_state(d, rng), sigma = random_state(d, rng);
    for (const auto& p : kParams)
      CHECK(d_alpha_z(rho, sigma, p) == doctest::Approx(oracle::d_alpha_z_fullrank(rho, sigma, p.alpha, p.z)).epsilon(1e-8));
    CHECK(umegaki(rho, sigma) == doctest::Approx(oracle::umegaki_fullrank(rho, sigma)).epsilon(1e-9));
    const CMat sm = oracle::spow(sigma, -0.5);
    const CMat h = sm * rho * sm;
    CHECK(d_max(rho, sigma) == doctest::Approx(std::log2(oracle::lambda_max_power((h + h.adjoint()) / 2.0))).epsilon(1e-8));
  }
}

TEST_CASE("commuting case reduces to classical formulas") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 5;
    RVec p(d), q(d);
    for (int i = 0; i < d; ++i) p(i) = rng.uniform(0.05, 1), q(i) = rng.uniform(0.05, 1);
    p /= p.sum();
    q /= q.sum();
    const CMat rho = CMat(p.cast<cplx>().asDiagonal()), sigma = CMat(q.cast<cplx>().asDiagonal());
    for (const auto& pr : kParams) {
      double acc = 0;
      for (int i = 0; i < d; ++i) acc += std::pow(p(i), pr.alpha) * std::pow(q(i), 1 - pr.alpha);
      CHECK(d_alpha_z(rho, sigma, pr) == doctest::Approx(std::log2(acc) / (pr.alpha - 1)).epsilon(1e-11));
    }
    double kl = 0, mx = 0;
    for (int i = 0; i < d; ++i) kl += p(i) * std::log2(p(i) / q(i)), mx = std::max(mx, p(i) / q(i));
    CHECK(umegaki(rho, sigma) == doctest::Approx(kl).epsilon(1e-11));
    CHECK(d_max(rho, sigma) == doctest::Approx(std::log2(mx)).epsilon(1e-11));
  }
}

TEST_CASE("hierarchy, additivity, data processing") {
  Rng rng(77);
  const std::vector<DestructionChannel> channels = {dephaser(2), dephaser(3), cond_depolarizer(2, 2),
                                                    replacer(random_state(3, rng)), dephaser(random_unitary(4, rng))};
  for (int trial = 0; trial < 500; ++trial) {
    const auto& ch = channels[trial % channels.size()];
    const int d = ch.dim();
    const CMat rho = random_state(d, rng, 1 + trial % d), sigma = random_state(d, rng);
    const double dmin = d_min(rho, sigma), du = umegaki(rho, sigma), dmax = d_max(rho, sigma);
    CHECK(dmin <= du + 1e-8);
    CHECK(du <= dmax + 1e-8);
    const CMat dr = ch.apply(rho), ds = ch.apply(sigma);
    CHECK(d_min(dr, ds) <= dmin + 1e-8);
    CHECK(umegaki(dr, ds) <= du + 1e-8);
    CHECK(d_max(dr, ds) <= dmax + 1e-8);
    const auto& p = kParams[trial % kParams.size()];
    CHECK(d_alpha_z(dr, ds, p) <= d_alpha_z(rho, sigma, p) + 1e-8);
    const double eps = 0.05 * (trial % 10);
    CHECK(d_hypothesis(dr, ds, eps).value <= d_hypothesis(rho, sigma, eps).value + 1e-8);
  }
  for (int trial = 0; trial < 40; ++trial) {
    const CMat r1 = random_state(2, rng), r2 = random_state(3, rng), s1 = random_state(2, rng), s2 = random_state(3, rng);
    const CMat r = tensor_product(r1, r2), s = tensor_product(s1, s2);
    for (const auto& p : kParams)
      CHECK(d_alpha_z(r, s, p) == doctest::Approx(d_alpha_z(r1, s1, p) + d_alpha_z(r2, s2, p)).epsilon(1e-8));
    CHECK(umegaki(r, s) == doctest::Approx(umegaki(r1, s1) + umegaki(r2, s2)).epsilon(1e-8));
    CHECK(d_max(r, s) == doctest::Approx(d_max(r1, s1) + d_max(r2, s2)).epsilon(1e-8));
    const CMat p1 = random_state(2, rng, 1), p2 = random_state(3, rng, 2);
    CHECK(d_min(tensor_product(p1, p2), s) == doctest::Approx(d_min(p1, s1) + d_min(p2, s2)).epsilon(1e-8));
  }
}

TEST_CASE("hypothesis testing") {
  const CMat half = CMat::Identity(2, 2) / 2.0;
  auto h = d_hypothesis(diag({0.7, 0.3}), half, 0.3);
  CHECK(h.value == doctest::Approx(1).epsilon(1e-10));
  CHECK(oracle::max_abs(h.effect - diag({1, 0})) < 1e-9);
  h = d_hypothesis(diag({0.7, 0.3}), half, 1.0);
  CHECK(h.value == kInfinity);
  CHECK(oracle::max_abs(h.effect) == 0);
  CHECK_THROWS_AS(d_hypothesis(diag({0.7, 0.3}), half, 1.5), ValidationError);

  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 4;
    const CMat rho = random_state(d, rng, trial % 3 == 0 ? 1 : d), sigma = random_state(d, rng);
    CHECK(d_hypothesis(rho, sigma, 0).value == doctest::Approx(d_min(rho, sigma)).epsilon(1e-10));
    double prev = d_hypothesis(rho, sigma, 0).value;
    for (double eps : {0.01, 0.1, 0.3, 0.6, 0.9}) {
      const auto r = d_hypothesis(rho, sigma, eps);
      CHECK(r.value >= prev - 1e-10);
      prev = r.value;
      // Witness is a feasible effect achieving the value.
      const auto e = eigh(r.effect);
      CHECK(e.values.minCoeff() >= -1e-10);
      CHECK(e.values.maxCoeff() <= 1 + 1e-10);
      CHECK(trace_product(rho, r.effect) >= 1 - eps - 1e-9);
      CHECK(-std::log2(trace_product(sigma, r.effect)) == doctest::Approx(r.value).epsilon(1e-12));
      CHECK(r.value == doctest::Approx(oracle::hypothesis_dual(rho, sigma, eps)).epsilon(1e-7));
      // D_H^ε ≤ (D(ρ‖σ) + h(ε)) / (1−ε)
      const double hb = -eps * std::log2(eps) - (1 - eps) * std::log2(1 - eps);
      if (trial % 3 != 0) CHECK(r.value <= (umegaki(rho, sigma) + hb) / (1 - eps) + 1e-9);
    }
  }
}
