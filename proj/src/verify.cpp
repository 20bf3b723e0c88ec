#include "instability/verify.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "instability/divergences.hpp"
#include "instability/errors.hpp"
#include "instability/free_optimize.hpp"
#include "instability/random.hpp"
#include "instability/sdp.hpp"
#include "instability/tasks.hpp"

namespace instab {

bool SuiteResult::passed() const { return failures() == 0; }

int SuiteResult::checks() const {
  int n = 0;
  for (const auto& m : metrics) n += m.samples;
  return n;
}

int SuiteResult::failures() const {
  int n = 0;
  for (const auto& m : metrics) n += m.ok() ? 0 : 1;
  return n;
}

const Metric* SuiteResult::find(const std::string& metric) const {
  for (const auto& m : metrics)
    if (m.name == metric) return &m;
  return nullptr;
}

namespace {

class Recorder {
 public:
  void declare(const std::string& name, double tolerance) {
    if (!index_.count(name)) {
      index_[name] = metrics_.size();
      metrics_.push_back(Metric{name, 0, tolerance, 0, ""});
    }
  }

  // A NaN deviation counts as infinitely bad.
  void record(const std::string& name, double deviation, const std::string& instance = "") {
    Metric& m = metrics_.at(index_.at(name));
    ++m.samples;
    if (std::isnan(deviation)) deviation = kInfinity;
    if (deviation > m.worst || m.worst_case.empty()) {
      if (deviation > m.worst) m.worst = deviation;
      m.worst_case = instance;
    }
  }

  std::vector<Metric> take() { return std::move(metrics_); }

 private:
  std::vector<Metric> metrics_;
  std::map<std::string, std::size_t> index_;
};

double excess(double lhs, double rhs) { return std::max(0.0, lhs - rhs); }

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::string describe(int trial, int dim) {
  std::ostringstream os;
  os << "trial " << trial << ", dim " << dim;
  return os.str();
}

CMat random_free_state(const DestructionChannel& ch, Rng& rng) {
  const CMat s = ch.apply(random_state(ch.dim(), rng));
  return hermitize(CMat(s / real_trace(s)));
}

CMat ket_plus(int d) { return CMat::Constant(d, d, cplx(1.0 / d, 0)); }

CMat max_entangled(int d) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = 1 / std::sqrt(double(d));
  return v * v.adjoint();
}

// Suites.

void currency_suite(Recorder& rec, Rng&) {
  rec.declare("yield", 1e-6);
  rec.declare("cost", 1e-6);
  for (double m : {0.5, 1.0, 2.0, 3.7}) {
    const InstabilitySystem sys(currency_channel(m));
    const std::string tag = "m = " + std::to_string(m);
    rec.record("yield", std::abs(one_shot_yield(currency_state(), sys, 0).value - m), tag);
    rec.record("cost", std::abs(one_shot_cost_exact(currency_state(), sys).value - m), tag);
  }
}

void equivalence_suite(Recorder& rec, Rng&) {
  rec.declare("coherent.yield", 1e-6);
  rec.declare("coherent.cost", 1e-6);
  rec.declare("maximally_entangled.yield", 1e-6);
  rec.declare("maximally_entangled.cost", 1e-6);
  for (int d = 2; d <= 4; ++d) {
    const InstabilitySystem sys(dephaser(d));
    const std::string tag = "d = " + std::to_string(d);
    rec.record("coherent.yield", std::abs(one_shot_yield(ket_plus(d), sys, 0).value - std::log2(d)), tag);
    rec.record("coherent.cost", std::abs(one_shot_cost_exact(ket_plus(d), sys).value - std::log2(d)), tag);
  }
  for (int d = 2; d <= 3; ++d) {
    const InstabilitySystem sys(cond_depolarizer(d, d));
    const std::string tag = "d = " + std::to_string(d);
    const double expected = 2 * std::log2(d);
    rec.record("maximally_entangled.yield", std::abs(one_shot_yield(max_entangled(d), sys, 0).value - expected), tag);
    rec.record("maximally_entangled.cost", std::abs(one_shot_cost_exact(max_entangled(d), sys).value - expected),
               tag);
  }
}

void closed_form_suite(Recorder& rec, Rng& rng) {
  rec.declare("agreement", 1e-8);
  rec.declare("residual", 1e-9);
  FixedPointOptions iterate;
  iterate.use_closed_form = false;
  iterate.allow_fallback = false;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 5;
    const auto ch = random_destruction_channel(d, rng);
    const CMat rho = random_state(d, rng);
    for (double a : {0.3, 0.5, 0.9, 1.3, 1.8}) {
      const auto closed = petz_free(rho, a, ch);
      const TraceFunctionalSpec spec{mat_pow(rho, a), 1 - a, 1.0, ch, hermitize(ch.apply(rho))};
      const auto fp = optimize_trace_functional(spec, iterate);
      const std::string tag = describe(trial, d) + ", alpha " + std::to_string(a);
      rec.record("agreement", rel_diff(std::log2(fp.value) / (a - 1), closed.value), tag);
      rec.record("residual", fp.residual, tag);
    }
  }
}

void chain_rule_suite(Recorder& rec, Rng& rng) {
  rec.declare("chain_rule", 1e-8);
  rec.declare("pythagorean", 1e-9);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 4;
    const auto ch = random_destruction_channel(d, rng);
    const CMat rho = random_state(d, rng);
    double a = rng.uniform(0.05, 1.95);
    if (std::abs(a - 1) < 1e-3) a = 1.5;
    const CMat x = mat_pow(rho, a);
    const auto res = z1_closed_form(x, 1 - a, ch);
    const CMat sigma = random_free_state(ch, rng);
    const std::string tag = describe(trial, d);
    rec.record("pythagorean", pythagorean_residual(x, 1 - a, res.sigma_star, sigma, ch) / std::max(1.0, res.value),
               tag);
    const double lhs = petz(rho, sigma, a);
    const double rhs = petz(rho, res.sigma_star, a) + petz(res.sigma_star, sigma, a);
    rec.record("chain_rule", std::abs(lhs - rhs), tag);
  }
}

void additivity_suite(Recorder& rec, Rng& rng) {
  rec.declare("additivity", 1e-6);
  const RenyiParams grid[] = {{0.3, 0.8}, {0.5, 0.6}, {0.8, 1.0}, {1.5, 1.2}, {2.0, 2.0}};
  const double lambdas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int trial = 0; trial < 4; ++trial) {
    const auto c1 = random_destruction_channel(2, rng);
    const auto c2 = random_destruction_channel(2, rng);
    const auto c12 = tensor_compose(c1, c2);
    const CMat r1 = random_state(2, rng), r2 = random_state(2, rng);
    const CMat r12 = tensor_product(r1, r2);
    for (const auto& p : grid)
      for (double lam : lambdas) {
        const double whole = m_lambda(r12, p, lam, c12).value;
        const double parts = m_lambda(r1, p, lam, c1).value + m_lambda(r2, p, lam, c2).value;
        std::ostringstream tag;
        tag << "pair " << trial << ", alpha " << p.alpha << ", z " << p.z << ", lambda " << lam;
        rec.record("additivity", std::abs(whole - parts), tag.str());
      }
  }
}

void sandwich_suite(Recorder& rec, Rng& rng) {
  rec.declare("normalization", 1e-8);
  rec.declare("lower", 1e-8);
  rec.declare("upper", 1e-8);
  const auto cur = currency_channel(1.0);
  for (const auto& m : standard_monotones())
    rec.record("normalization", std::abs(m.value(currency_state(), cur) - 1), m.name);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 3;
    const auto ch = random_destruction_channel(d, rng);
    const CMat rho = random_state(d, rng, 1 + rng.integer(0, d - 1));
    const double lo = d_min_free(rho, ch);
    const double hi = d_max(rho, ch.apply(rho));
    for (const auto& m : standard_monotones()) {
      const double v = m.value(rho, ch);
      const std::string tag = describe(trial, d) + ", " + m.name;
      rec.record("lower", excess(lo, v), tag);
      rec.record("upper", excess(v, hi), tag);
    }
  }
}

void battery_suite(Recorder& rec, Rng& rng) {
  rec.declare("identity", 1e-6);
  rec.declare("zero_eps.free", 1e-6);
  rec.declare("zero_eps.restricted", 1e-6);
  const auto cur = currency_channel(1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 2;
    const auto ch = random_destruction_channel(d, rng);
    const CMat rho = random_state(d, rng, 1 + rng.integer(0, d - 1));
    const auto joint = tensor_compose(ch, cur);
    const CMat rho_phi = tensor_product(rho, currency_state());
    const double eps = rng.uniform(0.01, 0.5);
    const std::string tag = describe(trial, d) + ", eps " + std::to_string(eps);
    rec.record("identity", std::abs(ht_free(rho, ch, eps).value - (restricted_ht(rho_phi, joint, eps).value - 1)), tag);
    const double dmin = d_min_free(rho, ch);
    const double free0 = ht_free(rho, ch, 0).value;
    const double restricted0 = restricted_ht(rho_phi, joint, 0).value - 1;
    rec.record("identity", std::abs(free0 - restricted0), describe(trial, d) + ", eps 0");
    rec.record("zero_eps.free", std::abs(free0 - dmin), describe(trial, d));
    rec.record("zero_eps.restricted", std::abs(restricted0 - dmin), describe(trial, d));
  }
}

void effects_suite(Recorder& rec, Rng& rng) {
  rec.declare("lift.membership", 1e-9);
  rec.declare("lift.domination", 1e-9);
  rec.declare("compose.membership", 1e-9);
  rec.declare("compose.domination", 1e-9);
  const auto depol = depolarizer(2);
  CMat zero = CMat::Zero(2, 2);
  zero(0, 0) = 1;
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + trial % 4;
    const auto ch = random_destruction_channel(d, rng);
    const CMat g = random_effect(d, rng);
    const std::string tag = describe(trial, d);
    const auto l = lift_effect(g, ch);
    rec.record("lift.membership", max_abs_entry(CMat(ch.apply_dual(l.effect) - l.p * CMat::Identity(d, d))), tag);
    rec.record("lift.domination", std::max(0.0, -lambda_min(CMat(l.effect - (1 - l.p) * g))), tag);

    // Λ is |0><0| on a depolarized qubit (t = 1) or a lifted random effect.
    DestructionChannel cb = depol;
    CMat lambda = zero;
    double t = 1;
    const double p = std::max(0.0, lambda_max(CMat(ch.apply_dual(g))));
    if (trial % 2 == 1) {
      const int db = 2 + rng.integer(0, 1);
      cb = random_destruction_channel(db, rng);
      const auto lb = lift_effect(random_effect(db, rng), cb);
      const double s = std::min(1.0, 1 / (lb.p * (1 + p)));
      lambda = s * lb.effect;
      t = -std::log2(s * lb.p);
    }
    const CMat ups = compose_effect(g, lambda, t, ch, cb);
    const auto joint = tensor_compose(ch, cb);
    const int n = joint.dim();
    rec.record("compose.membership",
               max_abs_entry(CMat(joint.apply_dual(ups) - std::exp2(-t) * p * CMat::Identity(n, n))), tag);
    rec.record("compose.domination", std::max(0.0, -lambda_min(CMat(ups - tensor_product(g, lambda)))), tag);
  }
}

void cost_suite(Recorder& rec, Rng& rng) {
  rec.declare("ordered", 1e-6);
  rec.declare("width", 1e-6);
  rec.declare("zero_eps", 1e-9);
  const double eps = 0.1, delta = 0.05;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 2;
    const InstabilitySystem sys(random_destruction_channel(d, rng));
    const CMat rho = random_state(d, rng, 1 + rng.integer(0, d - 1));
    const auto r = one_shot_cost_eps(rho, sys, eps, delta);
    const std::string tag = describe(trial, d);
    rec.record("ordered", excess(r.lower, r.upper), tag);
    rec.record("width", excess(r.upper, r.lower + std::log2(1 / delta)), tag);
    const double exact = d_max(rho, sys.channel().apply(rho));
    const auto z = one_shot_cost_eps(rho, sys, 0, 0);
    rec.record("zero_eps", std::max(std::abs(z.lower - exact), std::abs(z.upper - exact)), tag);
  }
}

void regularize_suite(Recorder& rec, Rng&, std::vector<std::string>& notes) {
  rec.declare("cost_trend", 1e-9);
  rec.declare("yield_bound", 1e-6);
  const double lambda = 0.8, eps = 0.05;
  CMat rho = lambda * ket_plus(2);
  rho += (1 - lambda) * CMat::Identity(2, 2) / 2.0;
  const auto sweep = regularize_sweep(rho, InstabilitySystem(dephaser(2)), eps, 4);
  double prev = kInfinity;
  for (const auto& row : sweep.rows) {
    const std::string tag = "n = " + std::to_string(row.n);
    if (row.cost_hi_rate) {
      const double gap = std::abs(*row.cost_hi_rate - sweep.target);
      rec.record("cost_trend", std::isinf(prev) ? 0.0 : excess(gap, prev), tag);
      prev = gap;
    }
    if (row.yield_rate) rec.record("yield_bound", excess(*row.yield_rate, sweep.target), tag);
  }
  notes = sweep.notes;
}

void sdp_suite(Recorder& rec, Rng& rng) {
  rec.declare("replacer.restricted", 1e-7);
  rec.declare("replacer.free", 1e-7);
  rec.declare("coherent.restricted", 1e-7);
  rec.declare("coherent.free", 1e-7);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 3;
    const CMat gamma = 0.8 * random_state(d, rng) + 0.2 * CMat::Identity(d, d) / double(d);
    const auto ch = replacer(hermitize(gamma));
    const CMat rho = random_state(d, rng, 1 + rng.integer(0, d - 1));
    const double eps = trial % 5 == 0 ? 0.0 : rng.uniform(0.01, 0.6);
    const double expected = d_hypothesis(rho, ch.apply(rho), eps).value;
    const std::string tag = describe(trial, d);
    rec.record("replacer.restricted", rel_diff(restricted_ht(rho, ch, eps).value, expected), tag);
    rec.record("replacer.free", rel_diff(ht_free(rho, ch, eps).value, expected), tag);
  }
  for (double eps : {0.0, 0.1, 0.3}) {
    const std::string tag = "eps " + std::to_string(eps);
    rec.record("coherent.restricted", std::abs(restricted_ht(ket_plus(2), dephaser(2), eps).value - 1 + std::log2(1 - eps)), tag);
    rec.record("coherent.free", std::abs(ht_free(ket_plus(2), dephaser(2), eps).value - 1 + std::log2(1 - eps)), tag);
  }
}

// Covariant channels generated per instance; each maps (ρ, Δ) to (𝒩(ρ), Δ').
struct Generated {
  std::string name;
  CMat input;
  DestructionChannel in_channel;
  CMat output;
  DestructionChannel out_channel;
};

std::vector<Generated> covariant_images(const CMat& rho, const DestructionChannel& ch, Rng& rng) {
  std::vector<Generated> out;
  const int d = ch.dim();
  out.push_back({"destruction", rho, ch, hermitize(ch.apply(rho)), ch});

  const CMat u = random_free_unitary(ch, rng.next());
  out.push_back({"free_unitary", rho, ch, hermitize(CMat(u * rho * u.adjoint())), ch});

  const auto other = random_destruction_channel(2, rng);
  out.push_back({"tensor_free", rho, ch, tensor_product(rho, random_free_state(other, rng)), tensor_compose(ch, other)});

  const auto ancilla = random_destruction_channel(2, rng);
  const CMat joint = random_state(2 * d, rng);
  out.push_back({"partial_trace", joint, tensor_compose(ch, ancilla), hermitize(partial_trace(joint, {d, 2}, {0})), ch});

  // Measurement into a currency system: dephaser-like input, replacer output.
  const auto lifted = lift_effect(random_effect(d, rng), ch);
  if (lifted.p < 1 - 1e-6 && lifted.p > 1e-6) {
    const auto meas = measurement_channel(lifted.effect);
    out.push_back({"measurement", rho, ch, hermitize(meas(rho)), currency_channel(-std::log2(lifted.p))});
  }
  // Preparation witness of the exact cost, applied to a random currency-system state.
  const CMat drho = ch.apply(rho);
  const double m = d_max(rho, drho);
  if (m > 1e-6) {
    const double scale = std::exp2(m);
    const auto prep = preparation_channel(rho, hermitize(CMat((scale * drho - rho) / (scale - 1))));
    const CMat in = random_state(2, rng);
    out.push_back({"preparation", in, currency_channel(m), hermitize(prep(in)), ch});
  }
  return out;
}

void dpi_suite(Recorder& rec, Rng& rng) {
  rec.declare("monotonicity", 1e-7);
  rec.declare("covariance", 1e-9);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 2;
    const auto ch = random_destruction_channel(d, rng);
    const CMat rho = random_state(d, rng, 1 + rng.integer(0, d - 1));
    for (const auto& g : covariant_images(rho, ch, rng)) {
      for (const auto& m : all_monotones()) {
        const double before = m.value(g.input, g.in_channel);
        const double after = m.value(g.output, g.out_channel);
        rec.record("monotonicity", excess(after, before), describe(trial, d) + ", " + g.name + ", " + m.name);
      }
    }
    // Covariance of the generated witness channels themselves.
    const auto lifted = lift_effect(random_effect(d, rng), ch);
    const auto meas = measurement_channel(lifted.effect);
    const CMat gibbs = currency_gibbs(-std::log2(std::max(lifted.p, 1e-300)));
    rec.record("covariance",
               covariance_check(meas, d, [&](const CMat& x) { return ch.apply(x); },
                                [&](const CMat& x) -> CMat { return x.trace() * gibbs; }),
               describe(trial, d));
  }
}

}  // namespace

const std::vector<NamedMonotone>& standard_monotones() {
  static const std::vector<NamedMonotone> list = {
      {"umegaki_free", [](const CMat& r, const DestructionChannel& c) { return umegaki_free(r, c).value; }},
      {"petz_free(0.5)", [](const CMat& r, const DestructionChannel& c) { return petz_free(r, 0.5, c).value; }},
      {"petz_free(1.5)", [](const CMat& r, const DestructionChannel& c) { return petz_free(r, 1.5, c).value; }},
      {"d_alpha_z_free(0.7,0.8)",
       [](const CMat& r, const DestructionChannel& c) { return d_alpha_z_free(r, {0.7, 0.8}, c).value; }},
      {"d_alpha_z_free(1.5,1.5)",
       [](const CMat& r, const DestructionChannel& c) { return d_alpha_z_free(r, {1.5, 1.5}, c).value; }},
      {"m_lambda(0.7,0.8,0.5)",
       [](const CMat& r, const DestructionChannel& c) { return m_lambda(r, {0.7, 0.8}, 0.5, c).value; }},
      {"m_lambda(1.5,1,0.3)",
       [](const CMat& r, const DestructionChannel& c) { return m_lambda(r, {1.5, 1.0}, 0.3, c).value; }},
      {"d_min_free", [](const CMat& r, const DestructionChannel& c) { return d_min_free(r, c); }},
      {"d_max_destroyed", [](const CMat& r, const DestructionChannel& c) { return d_max(r, c.apply(r)); }},
  };
  return list;
}

const std::vector<NamedMonotone>& all_monotones() {
  static const std::vector<NamedMonotone> list = [] {
    auto l = standard_monotones();
    l.push_back({"yield0", [](const CMat& r, const DestructionChannel& c) { return restricted_ht(r, c, 0).value; }});
    l.push_back(
        {"restricted_ht(0.1)", [](const CMat& r, const DestructionChannel& c) { return restricted_ht(r, c, 0.1).value; }});
    l.push_back({"ht_free(0.1)", [](const CMat& r, const DestructionChannel& c) { return ht_free(r, c, 0.1).value; }});
    return l;
  }();
  return list;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"currency", "equivalences", "closed_form", "chain_rule",
                                                 "additivity", "sandwich", "battery", "effects",
                                                 "cost_sandwich", "regularize", "sdp", "dpi"};
  return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  Recorder rec;
  Rng rng(seed);
  SuiteResult out;
  out.name = name;
  if (name == "currency")
    currency_suite(rec, rng);
  else if (name == "equivalences")
    equivalence_suite(rec, rng);
  else if (name == "closed_form")
    closed_form_suite(rec, rng);
  else if (name == "chain_rule")
    chain_rule_suite(rec, rng);
  else if (name == "additivity")
    additivity_suite(rec, rng);
  else if (name == "sandwich")
    sandwich_suite(rec, rng);
  else if (name == "battery")
    battery_suite(rec, rng);
  else if (name == "effects")
    effects_suite(rec, rng);
  else if (name == "cost_sandwich")
    cost_suite(rec, rng);
  else if (name == "regularize")
    regularize_suite(rec, rng, out.notes);
  else if (name == "sdp")
    sdp_suite(rec, rng);
  else if (name == "dpi")
    dpi_suite(rec, rng);
  else
    throw ValidationError("unknown verification suite \"" + name + "\"");
  out.metrics = rec.take();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace instab
