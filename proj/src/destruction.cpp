#include "instability/destruction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "instability/random.hpp"

namespace instab {

namespace {

constexpr double kUnitaryTol = 1e-10;

bool is_identity(const CMat& u) {
  return u.rows() == u.cols() && (u - CMat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() == 0.0;
}

CMat maximally_mixed(int d) { return CMat::Identity(d, d) / static_cast<double>(d); }

double trace_norm_general(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues().sum();
}

}  // namespace

std::vector<CMat> hermitian_basis(int dim) {
  std::vector<CMat> out;
  out.reserve(static_cast<std::size_t>(dim) * dim);
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < dim; ++j) {
    CMat e = CMat::Zero(dim, dim);
    e(j, j) = 1.0;
    out.push_back(e);
  }
  for (int j = 0; j < dim; ++j)
    for (int k = j + 1; k < dim; ++k) {
      CMat re = CMat::Zero(dim, dim);
      re(j, k) = s;
      re(k, j) = s;
      out.push_back(re);
      CMat im = CMat::Zero(dim, dim);
      im(j, k) = cplx(0, -s);
      im(k, j) = cplx(0, s);
      out.push_back(im);
    }
  return out;
}

DestructionChannel::DestructionChannel(BlockSpec blocks, CMat basis) : blocks_(std::move(blocks)) {
  require(!blocks_.empty(), "DestructionChannel: at least one block is required");
  dim_ = 0;
  for (const auto& b : blocks_) {
    require(b.dA > 0 && b.dB > 0, "DestructionChannel: block dimensions must be positive");
    require(b.tau.rows() == b.dA && b.tau.cols() == b.dA, "DestructionChannel: tau must be dA x dA");
    offsets_.push_back(dim_);
    dim_ += b.size();
  }
  for (auto& b : blocks_) {
    require(is_hermitian(b.tau), "DestructionChannel: tau must be Hermitian");
    b.tau = hermitize(b.tau);
    require(std::abs(real_trace(b.tau) - 1.0) <= 1e-10, "DestructionChannel: tau must have unit trace");
    auto e = eigh(b.tau);
    const double tol = static_cast<double>(b.dA) * kRankEps * e.values.cwiseAbs().maxCoeff();
    require(e.values.minCoeff() > tol, "DestructionChannel: tau must be full rank (faithfulness)");
    tau_eig_.push_back(std::move(e));
  }
  if (basis.size() == 0 || is_identity(basis)) {
    identity_basis_ = true;
    basis_ = CMat::Identity(dim_, dim_);
  } else {
    require(basis.rows() == dim_ && basis.cols() == dim_, "DestructionChannel: basis size must equal total block dimension");
    const double err = (basis.adjoint() * basis - CMat::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
    require(err <= kUnitaryTol, "DestructionChannel: basis must be unitary");
    identity_basis_ = false;
    basis_ = std::move(basis);
  }
  delta_identity_ = identity_power(1.0);
}

CMat DestructionChannel::to_block_basis(const CMat& x) const {
  return identity_basis_ ? x : CMat(basis_.adjoint() * x * basis_);
}

CMat DestructionChannel::from_block_basis(const CMat& x) const {
  return identity_basis_ ? x : CMat(basis_ * x * basis_.adjoint());
}

CMat DestructionChannel::apply(const CMat& x) const {
  require(x.rows() == dim_ && x.cols() == dim_, "apply: dimension mismatch");
  const CMat y = to_block_basis(x);
  CMat out = CMat::Zero(dim_, dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    const int o = offsets_[i];
    CMat reduced = CMat::Zero(b.dB, b.dB);
    for (int a = 0; a < b.dA; ++a) reduced += y.block(o + a * b.dB, o + a * b.dB, b.dB, b.dB);
    out.block(o, o, b.size(), b.size()) = tensor_product(b.tau, reduced);
  }
  return from_block_basis(out);
}

CMat DestructionChannel::apply_dual(const CMat& x) const {
  require(x.rows() == dim_ && x.cols() == dim_, "apply_dual: dimension mismatch");
  const CMat y = to_block_basis(x);
  CMat out = CMat::Zero(dim_, dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    const int o = offsets_[i];
    // W = tr_A[(tau ⊗ I) Y_i]
    CMat w = CMat::Zero(b.dB, b.dB);
    for (int a = 0; a < b.dA; ++a)
      for (int a2 = 0; a2 < b.dA; ++a2) w += b.tau(a, a2) * y.block(o + a2 * b.dB, o + a * b.dB, b.dB, b.dB);
    out.block(o, o, b.size(), b.size()) = tensor_product(CMat::Identity(b.dA, b.dA), w);
  }
  return from_block_basis(out);
}

CMat DestructionChannel::identity_power(double s) const {
  CMat out = CMat::Zero(dim_, dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    const double da = b.dA;
    const CMat tp = spectral_apply(tau_eig_[i], [&](double x) { return std::pow(da * x, s); });
    out.block(offsets_[i], offsets_[i], b.size(), b.size()) = tensor_product(tp, CMat::Identity(b.dB, b.dB));
  }
  return from_block_basis(out);
}

CMat DestructionChannel::twist(const CMat& x, double r) const {
  require(x.rows() == dim_ && x.cols() == dim_, "twist: dimension mismatch");
  if (r == 0.0) return x;
  const CMat half = identity_power(r / 2.0);
  return half * x * half;
}

DestructionChannel DestructionChannel::trace_preserving() const {
  BlockSpec bs = blocks_;
  for (auto& b : bs) b.tau = maximally_mixed(b.dA);
  return DestructionChannel(std::move(bs), identity_basis_ ? CMat() : basis_);
}

bool DestructionChannel::is_unital(double tol) const {
  return (delta_identity_ - CMat::Identity(dim_, dim_)).cwiseAbs().maxCoeff() <= tol;
}

CMat DestructionChannel::choi() const {
  const int d = dim_;
  CMat j = CMat::Zero(d * d, d * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      CMat e = CMat::Zero(d, d);
      e(r, c) = 1.0;
      j.block(r * d, c * d, d, d) = apply(e);
    }
  return j;
}

std::vector<CMat> DestructionChannel::kraus() const {
  const int d = dim_;
  const auto e = eigh(hermitize(choi()));
  const double tol = rank_tolerance(e.values);
  std::vector<CMat> out;
  for (int m = 0; m < e.values.size(); ++m) {
    if (e.values(m) <= tol) continue;
    CMat k(d, d);
    const double s = std::sqrt(e.values(m));
    // |K>> = Σ_j |j> ⊗ K|j>, so entry (r*d + i) of the eigenvector is K(i, r).
    for (int r = 0; r < d; ++r)
      for (int i = 0; i < d; ++i) k(i, r) = s * e.vectors(r * d + i, m);
    out.push_back(std::move(k));
  }
  return out;
}

std::vector<CMat> DestructionChannel::algebra_basis() const {
  std::vector<CMat> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    const CMat id_a = CMat::Identity(b.dA, b.dA) / std::sqrt(static_cast<double>(b.dA));
    for (const CMat& h : hermitian_basis(b.dB)) {
      CMat m = CMat::Zero(dim_, dim_);
      m.block(offsets_[i], offsets_[i], b.size(), b.size()) = tensor_product(id_a, h);
      out.push_back(from_block_basis(m));
    }
  }
  return out;
}

DestructionChannel dephaser(int dim) {
  require(dim > 0, "dephaser: dimension must be positive");
  BlockSpec bs(dim, Block{1, 1, CMat::Ones(1, 1)});
  return DestructionChannel(std::move(bs));
}

DestructionChannel dephaser(const CMat& basis) {
  const int d = static_cast<int>(basis.rows());
  BlockSpec bs(d, Block{1, 1, CMat::Ones(1, 1)});
  return DestructionChannel(std::move(bs), basis);
}

DestructionChannel replacer(const CMat& gamma) {
  require(gamma.rows() == gamma.cols() && gamma.rows() > 0, "replacer: gamma must be square");
  return DestructionChannel(BlockSpec{Block{static_cast<int>(gamma.rows()), 1, gamma}});
}

DestructionChannel depolarizer(int dim) {
  require(dim > 0, "depolarizer: dimension must be positive");
  return replacer(maximally_mixed(dim));
}

DestructionChannel cond_depolarizer(int dA, int dB) {
  require(dA > 0 && dB > 0, "cond_depolarizer: dimensions must be positive");
  return DestructionChannel(BlockSpec{Block{dA, dB, maximally_mixed(dA)}});
}

DestructionChannel cond_replacer(const CMat& gammaA, int dB) {
  require(dB > 0, "cond_replacer: dB must be positive");
  return DestructionChannel(BlockSpec{Block{static_cast<int>(gammaA.rows()), dB, gammaA}});
}

DestructionChannel tpce(const BlockSpec& blocks, const CMat& basis) {
  BlockSpec bs = blocks;
  for (auto& b : bs) {
    require(b.dA > 0, "tpce: dA must be positive");
    b.tau = maximally_mixed(b.dA);
  }
  return DestructionChannel(std::move(bs), basis);
}

DestructionChannel standard_channel(ChannelKind kind, const ChannelParams& p) {
  switch (kind) {
    case ChannelKind::dephaser:
      return p.basis.size() ? dephaser(p.basis) : dephaser(p.dim);
    case ChannelKind::replacer:
      return replacer(p.gamma);
    case ChannelKind::depolarizer:
      return depolarizer(p.dim);
    case ChannelKind::cond_depolarizer:
      return cond_depolarizer(p.dA, p.dB);
    case ChannelKind::cond_replacer:
      return cond_replacer(p.gamma, p.dB);
    case ChannelKind::tpce:
      return tpce(p.blocks, p.basis);
  }
  throw ValidationError("standard_channel: unknown kind");
}

std::optional<ChannelKind> parse_channel_kind(const std::string& name) {
  if (name == "dephaser") return ChannelKind::dephaser;
  if (name == "replacer") return ChannelKind::replacer;
  if (name == "depolarizer") return ChannelKind::depolarizer;
  if (name == "cond_depolarizer") return ChannelKind::cond_depolarizer;
  if (name == "cond_replacer") return ChannelKind::cond_replacer;
  if (name == "tpce") return ChannelKind::tpce;
  return std::nullopt;
}

CMat currency_gibbs(double m) {
  require(m >= 0.0 && std::isfinite(m), "currency: m must be a finite nonnegative number");
  CMat g = CMat::Zero(2, 2);
  g(0, 0) = std::exp2(-m);
  g(1, 1) = 1.0 - std::exp2(-m);
  return g;
}

DestructionChannel currency_channel(double m) {
  require(m > 0.0, "currency: m must be positive");
  return replacer(currency_gibbs(m));
}

CMat currency_state() {
  CMat s = CMat::Zero(2, 2);
  s(0, 0) = 1.0;
  return s;
}

DestructionChannel tensor_compose(const DestructionChannel& a, const DestructionChannel& b) {
  const int db = b.dim();
  const int d = a.dim() * db;
  BlockSpec blocks;
  std::vector<int> perm;  // new block-basis index -> product index
  perm.reserve(d);
  for (std::size_t i = 0; i < a.blocks().size(); ++i) {
    const auto& ba = a.blocks()[i];
    for (std::size_t j = 0; j < b.blocks().size(); ++j) {
      const auto& bb = b.blocks()[j];
      blocks.push_back(Block{ba.dA * bb.dA, ba.dB * bb.dB, tensor_product(ba.tau, bb.tau)});
      for (int ai = 0; ai < ba.dA; ++ai)
        for (int aj = 0; aj < bb.dA; ++aj)
          for (int bi = 0; bi < ba.dB; ++bi)
            for (int bj = 0; bj < bb.dB; ++bj) {
              const int ia = a.offset(static_cast<int>(i)) + ai * ba.dB + bi;
              const int ib = b.offset(static_cast<int>(j)) + aj * bb.dB + bj;
              perm.push_back(ia * db + ib);
            }
    }
  }
  bool trivial = a.has_identity_basis() && b.has_identity_basis();
  for (int k = 0; k < d && trivial; ++k) trivial = perm[k] == k;
  if (trivial) return DestructionChannel(std::move(blocks));
  const CMat product = tensor_product(a.basis(), b.basis());
  CMat basis(d, d);
  for (int k = 0; k < d; ++k) basis.col(k) = product.col(perm[k]);
  return DestructionChannel(std::move(blocks), std::move(basis));
}

InstabilitySystem tensor_compose(const InstabilitySystem& a, const InstabilitySystem& b) {
  return InstabilitySystem(tensor_compose(a.channel(), b.channel()));
}

DestructionChannel tensor_power(const DestructionChannel& a, int n) {
  require(n >= 1, "tensor_power: n must be at least 1");
  DestructionChannel out = a;
  for (int k = 1; k < n; ++k) out = tensor_compose(out, a);
  return out;
}

CMat free_state(const DestructionChannel& channel, const FreeCoords& coords) {
  const auto& blocks = channel.blocks();
  require(coords.weights.size() == blocks.size() && coords.betas.size() == blocks.size(),
          "free_state: need one weight and one beta per block");
  double total = 0;
  for (double w : coords.weights) {
    require(w >= -1e-12, "free_state: weights must be nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-10, "free_state: weights must sum to 1");
  const int d = channel.dim();
  CMat out = CMat::Zero(d, d);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    require(coords.betas[i].rows() == b.dB && coords.betas[i].cols() == b.dB, "free_state: beta has wrong size");
    require_state(coords.betas[i], "free_state: beta");
    out.block(channel.offset(static_cast<int>(i)), channel.offset(static_cast<int>(i)), b.size(), b.size()) =
        std::max(0.0, coords.weights[i]) * tensor_product(b.tau, coords.betas[i]);
  }
  return hermitize(channel.from_block_basis(out));
}

int free_parameter_count(const DestructionChannel& channel) {
  int n = static_cast<int>(channel.blocks().size()) - 1;
  for (const auto& b : channel.blocks()) n += b.dB * b.dB - 1;
  return n;
}

namespace {

// All nonnegative integer vectors of length `parts` summing to `total`.
void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.push_back(k);
    compositions(total - k, parts - 1, cur, out);
    cur.pop_back();
  }
}

std::vector<CMat> beta_grid(int dB, int resolution, Rng& rng) {
  std::vector<CMat> out;
  if (dB == 1) {
    out.push_back(CMat::Ones(1, 1));
    return out;
  }
  const int r = std::max(2, resolution);
  if (dB == 2) {
    for (int ix = 0; ix < r; ++ix)
      for (int iy = 0; iy < r; ++iy)
        for (int iz = 0; iz < r; ++iz) {
          const double x = -1.0 + 2.0 * ix / (r - 1);
          const double y = -1.0 + 2.0 * iy / (r - 1);
          const double z = -1.0 + 2.0 * iz / (r - 1);
          if (x * x + y * y + z * z > 1.0 + 1e-12) continue;
          CMat b(2, 2);
          b << cplx(1 + z, 0), cplx(x, -y), cplx(x, y), cplx(1 - z, 0);
          out.push_back(b / 2.0);
        }
    return out;
  }
  std::vector<int> cur;
  std::vector<std::vector<int>> comps;
  compositions(r - 1, dB, cur, comps);
  for (const auto& c : comps) {
    CMat b = CMat::Zero(dB, dB);
    for (int k = 0; k < dB; ++k) b(k, k) = static_cast<double>(c[k]) / (r - 1);
    out.push_back(b);
  }
  const int extra = r * r;
  for (int k = 0; k < extra; ++k) out.push_back(random_state(dB, rng, 1 + (k % dB)));
  return out;
}

}  // namespace

std::vector<CMat> enumerate_free_grid(const DestructionChannel& channel, int resolution, std::uint64_t seed) {
  require(resolution >= 2, "enumerate_free_grid: resolution must be at least 2");
  Rng rng(seed);
  const auto& blocks = channel.blocks();
  const int nb = static_cast<int>(blocks.size());
  std::vector<std::vector<int>> weight_grid;
  std::vector<int> cur;
  compositions(resolution - 1, nb, cur, weight_grid);
  std::vector<std::vector<CMat>> betas;
  for (const auto& b : blocks) betas.push_back(beta_grid(b.dB, resolution, rng));

  std::vector<CMat> out;
  for (const auto& w : weight_grid) {
    FreeCoords coords;
    for (int i = 0; i < nb; ++i) coords.weights.push_back(static_cast<double>(w[i]) / (resolution - 1));
    // Only blocks with positive weight need their beta varied.
    std::vector<std::size_t> counters(nb, 0);
    while (true) {
      coords.betas.clear();
      for (int i = 0; i < nb; ++i) coords.betas.push_back(betas[i][counters[i]]);
      out.push_back(free_state(channel, coords));
      int k = nb - 1;
      while (k >= 0) {
        if (w[k] != 0 && counters[k] + 1 < betas[k].size()) {
          ++counters[k];
          break;
        }
        counters[k] = 0;
        --k;
      }
      if (k < 0) break;
    }
  }
  return out;
}

CMat random_free_unitary(const DestructionChannel& channel, std::uint64_t seed) {
  Rng rng(seed);
  const auto& blocks = channel.blocks();
  const int d = channel.dim();
  const int nb = static_cast<int>(blocks.size());

  CMat local = CMat::Zero(d, d);
  for (int i = 0; i < nb; ++i) {
    const auto& b = blocks[i];
    const auto e = eigh(b.tau);
    // Random unitary inside each eigenspace of tau.
    CMat inner = CMat::Zero(b.dA, b.dA);
    const double scale = std::max(1.0, e.values.maxCoeff());
    int start = 0;
    while (start < b.dA) {
      int end = start + 1;
      while (end < b.dA && std::abs(e.values(end) - e.values(start)) <= 1e-12 * scale) ++end;
      inner.block(start, start, end - start, end - start) = random_unitary(end - start, rng);
      start = end;
    }
    const CMat u = e.vectors * inner * e.vectors.adjoint();
    const CMat v = random_unitary(b.dB, rng);
    local.block(channel.offset(i), channel.offset(i), b.size(), b.size()) = tensor_product(u, v);
  }

  // Shuffle identical blocks.
  std::vector<int> target(nb);
  std::iota(target.begin(), target.end(), 0);
  std::vector<bool> seen(nb, false);
  for (int i = 0; i < nb; ++i) {
    if (seen[i]) continue;
    std::vector<int> cls;
    for (int j = i; j < nb; ++j) {
      if (seen[j]) continue;
      const auto& bi = blocks[i];
      const auto& bj = blocks[j];
      if (bi.dA == bj.dA && bi.dB == bj.dB && (bi.tau - bj.tau).cwiseAbs().maxCoeff() <= 1e-13) {
        cls.push_back(j);
        seen[j] = true;
      }
    }
    std::vector<int> shuffled = cls;
    for (int k = static_cast<int>(shuffled.size()) - 1; k > 0; --k) std::swap(shuffled[k], shuffled[rng.integer(0, k)]);
    for (std::size_t k = 0; k < cls.size(); ++k) target[cls[k]] = shuffled[k];
  }
  CMat perm = CMat::Zero(d, d);
  for (int i = 0; i < nb; ++i)
    for (int k = 0; k < blocks[i].size(); ++k) perm(channel.offset(target[i]) + k, channel.offset(i) + k) = 1.0;

  const CMat in_block = perm * local;
  return channel.has_identity_basis() ? in_block : CMat(channel.basis() * in_block * channel.basis().adjoint());
}

DestructionChannel random_destruction_channel(int dim, Rng& rng) {
  require(dim > 0, "random_destruction_channel: dimension must be positive");
  BlockSpec blocks;
  int remaining = dim;
  while (remaining > 0) {
    const int size = rng.integer(1, remaining);
    std::vector<int> divisors;
    for (int k = 1; k <= size; ++k)
      if (size % k == 0) divisors.push_back(k);
    const int dA = divisors[rng.integer(0, static_cast<int>(divisors.size()) - 1)];
    const CMat tau = 0.8 * random_state(dA, rng) + 0.2 * maximally_mixed(dA);
    blocks.push_back(Block{dA, size / dA, hermitize(tau)});
    remaining -= size;
  }
  const bool rotate = rng.uniform() < 0.5;
  return DestructionChannel(std::move(blocks), rotate ? random_unitary(dim, rng) : CMat());
}

double channel_distance(const std::function<CMat(const CMat&)>& a, const std::function<CMat(const CMat&)>& b, int dim) {
  double worst = 0;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      CMat e = CMat::Zero(dim, dim);
      e(r, c) = 1.0;
      worst = std::max(worst, trace_norm_general(a(e) - b(e)));
    }
  return worst;
}

}  // namespace instab
