#include "instability/io.hpp"

#include <fstream>
#include <sstream>

#include "instability/errors.hpp"

namespace instab {

namespace {

const Json& field(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(std::string(what) + ": missing field \"" + key + "\"");
  return j.at(key);
}

int int_field(const Json& j, const char* key, const char* what) {
  const Json& v = field(j, key, what);
  if (!v.is_number_integer()) throw ParseError(std::string(what) + ": field \"" + key + "\" must be an integer");
  return v.get<int>();
}

double number_field(const Json& j, const char* key, const char* what) {
  const Json& v = field(j, key, what);
  if (!v.is_number()) throw ParseError(std::string(what) + ": field \"" + key + "\" must be a number");
  return v.get<double>();
}

cplx entry_from_json(const Json& e, const char* what) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw ParseError(std::string(what) + ": entries must be [re, im] pairs");
}


}  // namespace

Json matrix_to_json(const CMat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMat matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ParseError(std::string(what) + ": expected a nonempty array of rows");
  const auto rows = j.size();
  if (!j[0].is_array()) throw ParseError(std::string(what) + ": expected a nonempty array of rows");
  const auto cols = j[0].size();
  CMat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ParseError(std::string(what) + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = entry_from_json(j[r][c], what);
  }
  return m;
}

Json state_to_json(const CMat& rho) { return {{"dim", rho.rows()}, {"matrix", matrix_to_json(rho)}}; }

CMat state_from_json(const Json& j) {
  const int dim = int_field(j, "dim", "state");
  const CMat m = matrix_from_json(field(j, "matrix", "state"), "state.matrix");
  require(m.rows() == dim && m.cols() == dim, "state: matrix shape does not match dim");
  require_state(m, "state");
  return hermitize(m);
}

Json channel_to_json(const DestructionChannel& ch) {
  Json j;
  j["dim"] = ch.dim();
  j["basis"] = ch.has_identity_basis() ? Json("identity") : matrix_to_json(ch.basis());
  Json blocks = Json::array();
  for (const auto& b : ch.blocks()) blocks.push_back({{"dA", b.dA}, {"dB", b.dB}, {"tau", matrix_to_json(b.tau)}});
  j["blocks"] = std::move(blocks);
  return j;
}

DestructionChannel channel_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("channel: expected an object");
  auto basis_of = [&]() -> CMat {
    if (!j.contains("basis")) return CMat();
    const Json& b = j.at("basis");
    if (b.is_string()) {
      if (b.get<std::string>() != "identity") throw ParseError("channel: basis must be a matrix or \"identity\"");
      return CMat();
    }
    return matrix_from_json(b, "channel.basis");
  };
  auto blocks_of = [&]() {
    const Json& arr = field(j, "blocks", "channel");
    if (!arr.is_array() || arr.empty()) throw ParseError("channel: blocks must be a nonempty array");
    BlockSpec blocks;
    for (const auto& b : arr) {
      Block blk;
      blk.dA = int_field(b, "dA", "channel.blocks");
      blk.dB = int_field(b, "dB", "channel.blocks");
      require(blk.dA >= 1 && blk.dB >= 1, "channel: block dimensions must be positive");
      blk.tau = b.contains("tau") ? matrix_from_json(b.at("tau"), "channel.blocks.tau")
                                  : CMat(CMat::Identity(blk.dA, blk.dA) / static_cast<double>(blk.dA));
      blocks.push_back(std::move(blk));
    }
    return blocks;
  };

  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) throw ParseError("channel: kind must be a string");
    const std::string name = j.at("kind").get<std::string>();
    if (name == "currency") return currency_channel(number_field(j, "m", "channel"));
    const auto kind = parse_channel_kind(name);
    if (!kind) throw ParseError("channel: unknown kind \"" + name + "\"");
    ChannelParams p;
    if (j.contains("dim")) p.dim = int_field(j, "dim", "channel");
    if (j.contains("dA")) p.dA = int_field(j, "dA", "channel");
    if (j.contains("dB")) p.dB = int_field(j, "dB", "channel");
    if (j.contains("gamma")) p.gamma = matrix_from_json(j.at("gamma"), "channel.gamma");
    p.basis = basis_of();
    switch (*kind) {
      case ChannelKind::dephaser:
        if (p.basis.size() == 0) require(p.dim >= 1, "channel: dephaser needs dim or basis");
        break;
      case ChannelKind::depolarizer:
        require(p.dim >= 1, "channel: depolarizer needs dim");
        break;
      case ChannelKind::replacer:
        require(p.gamma.size() > 0, "channel: replacer needs gamma");
        break;
      case ChannelKind::cond_depolarizer:
        require(p.dA >= 1 && p.dB >= 1, "channel: cond_depolarizer needs dA and dB");
        break;
      case ChannelKind::cond_replacer:
        require(p.gamma.size() > 0 && p.dB >= 1, "channel: cond_replacer needs gamma and dB");
        break;
      case ChannelKind::tpce:
        p.blocks = blocks_of();
        break;
    }
    auto ch = standard_channel(*kind, p);
    if (p.dim > 0) require(ch.dim() == p.dim, "channel: dim does not match the construction");
    return ch;
  }

  const int dim = int_field(j, "dim", "channel");
  DestructionChannel ch(blocks_of(), basis_of());
  require(ch.dim() == dim, "channel: dim does not match the block sizes");
  return ch;
}

Json report_to_json(const TaskReport& r) {
  Json j;
  j["quantity"] = to_string(r.quantity);
  j["value"] = r.value;
  if (r.quantity == TaskQuantity::cost_interval) {
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    j["delta"] = r.delta;
  }
  j["epsilon"] = r.epsilon;
  j["witness"] = r.witness;
  if (r.effect.size()) j["effect"] = matrix_to_json(r.effect);
  if (!r.preparation.empty()) {
    Json prep = Json::array();
    for (const auto& m : r.preparation) prep.push_back(matrix_to_json(m));
    j["preparation"] = std::move(prep);
  }
  j["residuals"] = {{"covariance", r.residuals.covariance},
                    {"accuracy", r.residuals.accuracy},
                    {"effect", r.residuals.effect},
                    {"cross_check", r.residuals.cross_check}};
  j["notes"] = r.notes;
  return j;
}

Json sdp_problem_to_json(const SdpProblem& p) {
  auto real_matrix = [](const RMat& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  Json j;
  j["c"] = std::vector<double>(p.c.data(), p.c.data() + p.c.size());
  Json blocks = Json::array();
  for (const auto& b : p.blocks) {
    Json F = Json::array();
    for (const auto& f : b.F) F.push_back(matrix_to_json(f));
    blocks.push_back({{"F0", matrix_to_json(b.F0)}, {"F", std::move(F)}});
  }
  j["blocks"] = std::move(blocks);
  j["eq_A"] = real_matrix(p.eq_A);
  j["eq_b"] = std::vector<double>(p.eq_b.data(), p.eq_b.data() + p.eq_b.size());
  return j;
}

Json sdp_solution_to_json(const SdpSolution& s) {
  const char* status = s.status == SdpStatus::optimal      ? "optimal"
                       : s.status == SdpStatus::infeasible ? "infeasible"
                                                           : "max_iter";
  return {{"status", status},
          {"primal_objective", s.primal_objective},
          {"dual_objective", s.dual_objective},
          {"gap", s.gap},
          {"primal_infeasibility", s.primal_infeasibility},
          {"dual_infeasibility", s.dual_infeasibility},
          {"iterations", s.iterations},
          {"detail", s.detail}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace instab
