// Acceptance report: one PASS/FAIL line per criterion. Thresholds and time
// limits are fixed below; the library suites supply the measurements and the
// test-side oracles cross-check the derived quantities.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "instability/divergences.hpp"
#include "instability/free_optimize.hpp"
#include "instability/random.hpp"
#include "instability/sdp.hpp"
#include "instability/verify.hpp"
#include "oracles.hpp"

using namespace instab;

namespace {

struct Threshold {
  std::string metric;
  double limit;
};

struct Criterion {
  int id;
  std::string title;
  std::string suite;
  std::vector<Threshold> thresholds;
  double time_limit;
  std::function<void(std::vector<Metric>&)> oracle;  // optional extra measurements
};

double dmax_oracle(const CMat& rho, const CMat& s) {
  const CMat w = oracle::spow(s, -0.5);
  Eigen::SelfAdjointEigenSolver<CMat> es(CMat((w * rho * w + (w * rho * w).adjoint()) / 2.0));
  return std::log2(es.eigenvalues().maxCoeff());
}

Metric make_metric(const std::string& name) { return Metric{name, 0, 0, 0, ""}; }

void record(Metric& m, double deviation, const std::string& where) {
  ++m.samples;
  if (std::isnan(deviation)) deviation = kInfinity;
  if (deviation >= m.worst) {
    m.worst = deviation;
    m.worst_case = where;
  }
}

// Closed-form optimum evaluated with Schur-based matrix functions.
void closed_form_oracle(std::vector<Metric>& out) {
  Metric m = make_metric("oracle.closed_form_value");
  Rng rng(303);
  for (int t = 0; t < 50; ++t) {
    const int d = 2 + t % 5;
    const auto ch = random_destruction_channel(d, rng);
    const CMat rho = random_state(d, rng);
    for (double a : {0.3, 0.5, 0.9, 1.3, 1.8}) {
      const auto res = petz_free(rho, a, ch);
      const double v = oracle::d_alpha_z_fullrank(rho, res.sigma_star, a, 1.0);
      record(m, std::abs(v - res.value) / std::max(1.0, std::abs(v)), "trial " + std::to_string(t));
    }
  }
  out.push_back(m);
}

void chain_rule_oracle(std::vector<Metric>& out) {
  Metric m = make_metric("oracle.chain_rule");
  Rng rng(404);
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 4;
    const auto ch = random_destruction_channel(d, rng);
    const CMat rho = random_state(d, rng);
    double a = rng.uniform(0.05, 1.95);
    if (std::abs(a - 1) < 1e-3) a = 1.5;
    const auto res = z1_closed_form(mat_pow(rho, a), 1 - a, ch);
    CMat sigma = ch.apply(random_state(d, rng));
    sigma /= real_trace(sigma);
    const double lhs = oracle::d_alpha_z_fullrank(rho, sigma, a, 1);
    const double rhs =
        oracle::d_alpha_z_fullrank(rho, res.sigma_star, a, 1) + oracle::d_alpha_z_fullrank(res.sigma_star, sigma, a, 1);
    record(m, std::abs(lhs - rhs), "trial " + std::to_string(t));
  }
  out.push_back(m);
}

void cost_oracle(std::vector<Metric>& out) {
  Metric m = make_metric("oracle.zero_eps_dmax");
  Rng rng(505);
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 2;
    const auto ch = random_destruction_channel(d, rng);
    const CMat rho = random_state(d, rng);
    record(m, std::abs(d_max(rho, ch.apply(rho)) - dmax_oracle(rho, ch.apply(rho))), "trial " + std::to_string(t));
  }
  out.push_back(m);
}

void sdp_oracle(std::vector<Metric>& out) {
  Metric restricted = make_metric("oracle.qubit_restricted");
  Metric free = make_metric("oracle.qubit_free");
  Metric smoothed = make_metric("oracle.qubit_dmax_free");
  Metric np = make_metric("oracle.replacer_neyman_pearson");
  Rng rng(606);
  const auto deph = dephaser(2);
  for (int t = 0; t < 10; ++t) {
    const CMat rho = random_state(2, rng);
    const std::string where = "trial " + std::to_string(t);
    for (double eps : {0.0, 0.05, 0.2}) {
      record(restricted, std::abs(restricted_ht(rho, deph, eps).value - oracle::restricted_ht_qubit_dephaser(rho, eps)),
             where);
      if (eps > 0) record(free, std::abs(ht_free(rho, deph, eps).value - oracle::ht_free_qubit_dephaser(rho, eps)), where);
    }
    record(smoothed, std::abs(dmax_smoothed_free(rho, deph, 0).value - oracle::dmax_free_qubit_dephaser(rho)), where);
  }
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 3;
    const CMat gamma = hermitize(CMat(0.8 * random_state(d, rng) + 0.2 * CMat::Identity(d, d) / double(d)));
    const CMat rho = random_state(d, rng);
    const double eps = rng.uniform(0.01, 0.5);
    const double expected = oracle::hypothesis_dual(rho, gamma, eps);
    record(np, std::abs(restricted_ht(rho, replacer(gamma), eps).value - expected) / std::max(1.0, expected),
           "trial " + std::to_string(t));
  }
  out.insert(out.end(), {restricted, free, smoothed, np});
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2g", v);
  return buf;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "currency self-consistency", "currency", {{"yield", 1e-6}, {"cost", 1e-6}}, 5, nullptr},
      {2,
       "coherent and maximally entangled equivalences",
       "equivalences",
       {{"coherent.yield", 1e-6},
        {"coherent.cost", 1e-6},
        {"maximally_entangled.yield", 1e-6},
        {"maximally_entangled.cost", 1e-6}},
       30,
       nullptr},
      {3,
       "closed form vs fixed point",
       "closed_form",
       {{"agreement", 1e-8}, {"residual", 1e-9}, {"oracle.closed_form_value", 1e-8}},
       60,
       closed_form_oracle},
      {4, "chain rule", "chain_rule", {{"chain_rule", 1e-8}, {"oracle.chain_rule", 1e-8}}, 30, chain_rule_oracle},
      {5, "additivity on the (alpha,z) x lambda grid", "additivity", {{"additivity", 1e-6}}, 120, nullptr},
      {6,
       "extremality sandwich",
       "sandwich",
       {{"normalization", 1e-8}, {"lower", 1e-8}, {"upper", 1e-8}},
       120,
       nullptr},
      {7,
       "battery identity",
       "battery",
       {{"identity", 1e-6}, {"zero_eps.free", 1e-6}, {"zero_eps.restricted", 1e-6}},
       120,
       nullptr},
      {8,
       "effect constructions",
       "effects",
       {{"lift.membership", 1e-9},
        {"lift.domination", 1e-9},
        {"compose.membership", 1e-9},
        {"compose.domination", 1e-9}},
       20,
       nullptr},
      {9,
       "smoothed cost sandwich",
       "cost_sandwich",
       {{"ordered", 1e-6}, {"width", 1e-6}, {"zero_eps", 1e-9}, {"oracle.zero_eps_dmax", 1e-9}},
       120,
       cost_oracle},
      {10, "asymptotic reversibility trend", "regularize", {{"cost_trend", 1e-9}, {"yield_bound", 1e-6}}, 300, nullptr},
      {11,
       "hypothesis-testing SDPs vs oracles",
       "sdp",
       {{"replacer.restricted", 1e-7},
        {"replacer.free", 1e-7},
        {"oracle.replacer_neyman_pearson", 1e-7},
        {"oracle.qubit_restricted", 1e-3},
        {"oracle.qubit_free", 1e-3},
        {"oracle.qubit_dmax_free", 1e-3}},
       60,
       sdp_oracle},
      {12, "data processing under covariant channels", "dpi", {{"monotonicity", 1e-7}, {"covariance", 1e-9}}, 180,
       nullptr},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Metric> metrics;
    std::vector<std::string> notes;
    std::string error;
    try {
      auto res = run_suite(c.suite, 1000 + c.id);
      metrics = res.metrics;
      notes = res.notes;
      if (c.oracle) c.oracle(metrics);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool ok = error.empty() && seconds <= c.time_limit;
    std::string detail;
    for (const auto& t : c.thresholds) {
      const Metric* m = nullptr;
      for (const auto& x : metrics)
        if (x.name == t.metric) m = &x;
      if (!m || m->samples == 0) {
        ok = false;
        detail += " " + t.metric + "=missing";
        continue;
      }
      const bool pass = m->worst <= t.limit;
      ok = ok && pass;
      detail += " " + t.metric + "=" + short_num(m->worst) + (pass ? "" : "(>" + short_num(t.limit) + ")");
      if (!pass && !m->worst_case.empty()) detail += "[" + m->worst_case + "]";
    }
    if (!error.empty()) detail += " error: " + error;
    std::printf("criterion %2d %s  %-46s %6.2fs/%gs %s\n", c.id, ok ? "PASS" : "FAIL", c.title.c_str(), seconds,
                c.time_limit, detail.c_str());
    for (const auto& n : notes) std::printf("             note: %s\n", n.c_str());
    std::fflush(stdout);
    failed += ok ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
