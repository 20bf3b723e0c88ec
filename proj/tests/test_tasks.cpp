#include <doctest.h>

#include <cmath>

#include "instability/divergences.hpp"
#include "instability/free_optimize.hpp"
#include "instability/random.hpp"
#include "instability/tasks.hpp"
#include "oracles.hpp"

using namespace instab;

namespace {

InstabilitySystem currency_system(double m) { return InstabilitySystem(currency_channel(m)); }

CMat mixed_plus(double lambda) { return lambda * oracle::ket_plus(2) + (1 - lambda) * oracle::diag({0.5, 0.5}); }

}  // namespace

TEST_CASE("currency is its own yield and cost") {
  for (double m : {0.5, 1.0, 2.0, 3.7}) {
    const auto sys = currency_system(m);
    const auto y = one_shot_yield(currency_state(), sys, 0);
    const auto c = one_shot_cost_exact(currency_state(), sys);
    CHECK(y.value == doctest::Approx(m).epsilon(1e-6));
    CHECK(c.value == doctest::Approx(m).epsilon(1e-6));
    CHECK(y.residuals.covariance <= kCovarianceTol);
    CHECK(c.residuals.covariance <= kCovarianceTol);
  }
}

TEST_CASE("yield examples") {
  for (int d = 2; d <= 4; ++d) {
    const InstabilitySystem sys(dephaser(d));
    const auto y = one_shot_yield(oracle::ket_plus(d), sys, 0);
    CHECK(y.value == doctest::Approx(std::log2(d)).epsilon(1e-7));
    CHECK(y.residuals.accuracy <= kAccuracyTol);
  }
  for (int d = 2; d <= 3; ++d) {
    const InstabilitySystem sys(cond_depolarizer(d, d));
    const auto y = one_shot_yield(oracle::max_entangled(d), sys, 0);
    CHECK(y.value == doctest::Approx(2 * std::log2(d)).epsilon(1e-6));
    const auto c = catalytic_yield0(oracle::max_entangled(d), sys);
    CHECK(c.value == doctest::Approx(2 * std::log2(d)).epsilon(1e-6));
  }
}

TEST_CASE("yield witness reproduces the currency state within epsilon") {
  const InstabilitySystem sys(dephaser(2));
  const CMat rho = mixed_plus(0.7);
  for (double eps : {0.0, 0.05, 0.2}) {
    const auto y = one_shot_yield(rho, sys, eps);
    CHECK(y.value == doctest::Approx(oracle::restricted_ht_qubit_dephaser(rho, eps)).epsilon(1e-3));
    const auto meas = measurement_channel(y.effect);
    CHECK(trace_distance(meas(rho), currency_state()) <= eps + 1e-8);
    CHECK(covariance_check(meas, 2, [&](const CMat& x) { return sys.channel().apply(x); },
                           currency_map(y.value)) <= 1e-9);
  }
}

TEST_CASE("exact cost examples") {
  const InstabilitySystem sys(dephaser(2));
  CHECK(one_shot_cost_exact(oracle::diag({0.3, 0.7}), sys).value == 0);
  CHECK(one_shot_cost_exact(oracle::ket_plus(2), sys).value == doctest::Approx(1).epsilon(1e-10));
  const auto c = one_shot_cost_exact(mixed_plus(0.5), sys);
  CHECK(c.value == doctest::Approx(std::log2(1.5)).epsilon(1e-10));
  REQUIRE(c.preparation.size() == 2);
  CHECK(lambda_min(c.preparation[1]) >= -1e-10);
  CHECK(real_trace(c.preparation[1]) == doctest::Approx(1));
  CHECK(c.residuals.covariance <= kCovarianceTol);
}

TEST_CASE("epsilon cost interval") {
  const InstabilitySystem sys(dephaser(2));
  const CMat rho = mixed_plus(0.8);
  const auto exact = one_shot_cost_exact(rho, sys);
  const auto zero = one_shot_cost_eps(rho, sys, 0, 0);
  CHECK(zero.lower == doctest::Approx(exact.value));
  CHECK(zero.upper == doctest::Approx(exact.value));
  CHECK_THROWS_AS(one_shot_cost_eps(rho, sys, 0.1, 0.1), ValidationError);
  CHECK_THROWS_AS(one_shot_cost_eps(rho, sys, 0.1, 0), ValidationError);

  double prev_lower = kInfinity, prev_upper = kInfinity;
  for (double eps : {0.02, 0.05, 0.1, 0.2}) {
    const double delta = eps / 2;
    const auto r = one_shot_cost_eps(rho, sys, eps, delta);
    CHECK(r.lower <= r.upper + 1e-7);
    CHECK(r.upper <= exact.value + 1e-12);
    CHECK(r.upper - r.lower <= std::log2(1 / delta) + 1e-6);
    CHECK(r.lower <= prev_lower + 1e-7);
    CHECK(r.upper <= prev_upper + 1e-9);
    CHECK(r.residuals.accuracy <= kAccuracyTol);
    prev_lower = r.lower;
    prev_upper = r.upper;
  }

  // Brute-force over the ε-ball of a qubit: no state in the ball beats the lower bound.
  const double eps = 0.1;
  const auto r = one_shot_cost_eps(rho, sys, eps, 0.05);
  double brute = kInfinity;
  for (int i = 0; i <= 60; ++i)
    for (int j = 0; j <= 60; ++j)
      for (int k = 0; k <= 60; ++k) {
        const double x = -1 + 2.0 * i / 60, y = -1 + 2.0 * j / 60, z = -1 + 2.0 * k / 60;
        if (x * x + y * y + z * z > 1) continue;
        CMat tau(2, 2);
        tau << cplx(1 + z, 0), cplx(x, -y), cplx(x, y), cplx(1 - z, 0);
        tau /= 2;
        if (trace_distance(tau, rho) > eps) continue;
        brute = std::min(brute, d_max(tau, sys.channel().apply(tau)));
      }
  CHECK(r.lower <= brute + 1e-7);
  CHECK(r.upper <= brute + 1e-6);
}

TEST_CASE("battery and catalytic yields") {
  const InstabilitySystem sys(dephaser(2));
  for (double eps : {0.0, 0.1, 0.3}) {
    const auto b = battery_yield(oracle::ket_plus(2), sys, eps);
    CHECK(b.value == doctest::Approx(1 - std::log2(1 - eps)).epsilon(1e-6));
    CHECK(b.residuals.cross_check <= 1e-6);
  }
  CHECK(battery_yield(oracle::diag({0.4, 0.6}), sys, 0).value == doctest::Approx(0).epsilon(1e-7));
  CHECK(catalytic_yield0(oracle::ket_plus(2), sys).value == doctest::Approx(1).epsilon(1e-8));
  CHECK(catalytic_yield0(mixed_plus(0.5), sys).value == doctest::Approx(0).epsilon(1e-10));

  Rng rng(41);
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 2;
    const InstabilitySystem s(random_destruction_channel(d, rng));
    const CMat rho = random_state(d, rng, 1 + rng.integer(0, d - 1));
    const double eps = t % 3 == 0 ? 0.0 : rng.uniform(0.01, 0.4);
    const auto y = one_shot_yield(rho, s, eps);
    const auto b = battery_yield(rho, s, eps);
    CHECK(y.value <= b.value + 1e-6);
    CHECK(b.residuals.cross_check <= 1e-6);
    if (eps == 0) CHECK(b.value == doctest::Approx(catalytic_yield0(rho, s).value).epsilon(1e-6));
  }
}

TEST_CASE("operational sandwich") {
  Rng rng(77);
  for (int t = 0; t < 40; ++t) {
    const int d = 2 + t % 3;
    const InstabilitySystem s(random_destruction_channel(d, rng));
    const CMat rho = random_state(d, rng, 1 + rng.integer(0, d - 1));
    const double y0 = one_shot_yield(rho, s, 0).value;
    const double dmin = d_min_free(rho, s.channel());
    const double dkl = umegaki_free(rho, s.channel()).value;
    const double c0 = one_shot_cost_exact(rho, s).value;
    CHECK(y0 <= dmin + 1e-6);
    CHECK(dmin <= dkl + 1e-6);
    CHECK(dkl <= c0 + 1e-6);
  }
}

TEST_CASE("currency additivity") {
  for (auto [m, t] : {std::pair{0.5, 1.0}, {1.0, 2.0}, {0.3, 3.7}}) {
    const InstabilitySystem joint(tensor_compose(currency_channel(m), currency_channel(t)));
    const CMat phi = tensor_product(currency_state(), currency_state());
    CHECK(one_shot_yield(phi, joint, 0).value == doctest::Approx(m + t).epsilon(1e-6));
    CHECK(one_shot_cost_exact(phi, joint).value == doctest::Approx(m + t).epsilon(1e-6));
  }
}

TEST_CASE("effect lifting") {
  const auto deph = dephaser(2);
  const auto lifted = lift_effect(oracle::ket_plus(2), deph);
  CHECK(lifted.p == doctest::Approx(0.5));
  CHECK(oracle::max_abs(lifted.effect - (0.5 * oracle::ket_plus(2) + oracle::diag({0.25, 0.25}))) < 1e-12);
  CHECK(oracle::max_abs(deph.apply_dual(lifted.effect) - oracle::diag({0.5, 0.5})) < 1e-12);
  const auto id = lift_effect(CMat::Identity(2, 2), deph);
  CHECK(id.p == doctest::Approx(1));
  CHECK(oracle::max_abs(id.effect - CMat::Identity(2, 2)) < 1e-12);

  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const int d = 2 + t % 4;
    const auto ch = random_destruction_channel(d, rng);
    const CMat g = random_effect(d, rng);
    const auto l = lift_effect(g, ch);
    const CMat idd = CMat::Identity(d, d);
    CHECK(oracle::max_abs(ch.apply_dual(l.effect) - l.p * idd) <= 1e-9);
    CHECK(lambda_min(CMat(l.effect - (1 - l.p) * g)) >= -1e-10);
    CHECK(lambda_min(l.effect) >= -1e-10);
    CHECK(lambda_max(l.effect) <= 1 + 1e-10);
  }
}

TEST_CASE("effect composition") {
  const auto depol = depolarizer(2);
  const CMat lambda0 = oracle::diag({1, 0});
  const CMat id2 = CMat::Identity(2, 2);
  // Γ = I: Υ = I ⊗ Λ.
  CHECK(oracle::max_abs(compose_effect(id2, lambda0, 1, dephaser(2), depol) - oracle::kron(id2, lambda0)) < 1e-12);
  CHECK_THROWS_AS(compose_effect(id2, id2, 1, dephaser(2), depol), ValidationError);

  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 3;
    const auto ch = random_destruction_channel(d, rng);
    const CMat g = random_effect(d, rng);
    const CMat ups = compose_effect(g, lambda0, 1, ch, depol);
    const double p = lambda_max(CMat(ch.apply_dual(g)));
    const auto joint = tensor_compose(ch, depol);
    const CMat id = CMat::Identity(2 * d, 2 * d);
    CHECK(oracle::max_abs(joint.apply_dual(ups) - 0.5 * p * id) <= 1e-9);
    CHECK(lambda_min(CMat(ups - oracle::kron(g, lambda0))) >= -1e-9);
    CHECK(lambda_min(ups) >= -1e-9);
    CHECK(lambda_max(ups) <= 1 + 1e-9);
  }
}

TEST_CASE("covariance check examples") {
  const auto deph = dephaser(3);
  const LinearMap d = [&](const CMat& x) { return deph.apply(x); };
  CHECK(covariance_check(d, 3, d, d) <= 1e-12);

  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const auto ch = random_destruction_channel(2 + t % 3, rng);
    const CMat u = random_free_unitary(ch, rng.next());
    const LinearMap conj = [&](const CMat& x) -> CMat { return u * x * u.adjoint(); };
    const LinearMap m = [&](const CMat& x) { return ch.apply(x); };
    CHECK(covariance_check(conj, ch.dim(), m, m) <= 1e-10);
  }

  const auto repl = replacer(oracle::diag({0.25, 0.75}));
  const LinearMap constant = [](const CMat& x) -> CMat { return x.trace() * oracle::diag({0.25, 0.75}); };
  CHECK(covariance_check(constant, 3, d, [&](const CMat& x) { return repl.apply(x); }) <= 1e-12);
  // A non-covariant map is flagged.
  const LinearMap identity = [](const CMat& x) { return x; };
  CHECK(covariance_check(identity, 3, d, [](const CMat& x) -> CMat { return x.trace() * CMat::Identity(3, 3) / 3.0; }) >
        0.1);
}

TEST_CASE("regularization sweep") {
  const auto cur = regularize_sweep(currency_state(), currency_system(1.5), 0, 4);
  REQUIRE(cur.rows.size() == 4);
  for (const auto& row : cur.rows) {
    REQUIRE(row.yield_rate);
    CHECK(*row.yield_rate == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(*row.cost_hi_rate == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(*row.cost_lo_rate == doctest::Approx(1.5).epsilon(1e-6));
  }
  CHECK(cur.target == doctest::Approx(1.5).epsilon(1e-9));

  const auto plus = regularize_sweep(oracle::ket_plus(2), InstabilitySystem(dephaser(2)), 0, 3);
  for (const auto& row : plus.rows) {
    CHECK(*row.yield_rate == doctest::Approx(1).epsilon(1e-6));
    CHECK(*row.cost_hi_rate == doctest::Approx(1).epsilon(1e-9));
  }

  SweepBudget small;
  small.sdp_max_dim = 4;
  small.exact_max_dim = 8;
  const auto mixed = regularize_sweep(mixed_plus(0.8), InstabilitySystem(dephaser(2)), 0.05, 4, small);
  REQUIRE(mixed.rows.size() == 4);
  CHECK(mixed.rows[1].yield_rate);
  CHECK_FALSE(mixed.rows[2].yield_rate);
  CHECK(mixed.rows[2].cost_hi_rate);
  CHECK_FALSE(mixed.rows[3].cost_hi_rate);
  CHECK(mixed.cost_trend_nonincreasing);
  CHECK(mixed.yield_below_target);

  const std::string csv = sweep_csv(mixed);
  CHECK(csv.rfind("n,yield_rate,cost_lo_rate,cost_hi_rate,umegaki\n", 0) == 0);
  CHECK(csv.find("\n4,,,,") != std::string::npos);
}
