#include <doctest.h>

#include "instability/errors.hpp"
#include "instability/io.hpp"
#include "instability/random.hpp"
#include "oracles.hpp"

using namespace instab;

TEST_CASE("matrix and state round trip") {
  Rng rng(2);
  const CMat rho = random_state(3, rng);
  const CMat back = state_from_json(state_to_json(rho));
  CHECK(oracle::max_abs(back - rho) == 0);

  const auto j = Json::parse(R"({"dim": 2, "matrix": [[0.5, 0.5], [[0.5, 0], [0.5, 0]]]})");
  CHECK(oracle::max_abs(state_from_json(j) - oracle::ket_plus(2)) < 1e-15);
}

TEST_CASE("malformed inputs") {
  CHECK_THROWS_AS(state_from_json(Json::parse(R"({"matrix": [[1]]})")), ParseError);
  CHECK_THROWS_AS(state_from_json(Json::parse(R"({"dim": 2, "matrix": [[1, 0], [0]]})")), ParseError);
  CHECK_THROWS_AS(state_from_json(Json::parse(R"({"dim": 1, "matrix": [["x"]]})")), ParseError);
  // Parses but is not a state.
  CHECK_THROWS_AS(state_from_json(Json::parse(R"({"dim": 2, "matrix": [[1, 0], [0, 1]]})")), ValidationError);
  CHECK_THROWS_AS(state_from_json(Json::parse(R"({"dim": 3, "matrix": [[1, 0], [0, 0]]})")), ValidationError);
  CHECK_THROWS_AS(channel_from_json(Json::parse(R"({"kind": "teleporter"})")), ParseError);
  CHECK_THROWS_AS(channel_from_json(Json::parse(R"({"kind": "depolarizer"})")), ValidationError);
}

TEST_CASE("channel shortcuts and schema") {
  const auto deph = channel_from_json(Json::parse(R"({"kind": "dephaser", "dim": 3})"));
  CHECK(deph.dim() == 3);
  CHECK(deph.blocks().size() == 3);

  const auto repl = channel_from_json(Json::parse(R"({"kind": "replacer", "gamma": [[0.25, 0], [0, 0.75]]})"));
  CHECK(oracle::max_abs(repl.apply(oracle::ket_plus(2)) - oracle::diag({0.25, 0.75})) < 1e-14);

  const auto cur = channel_from_json(Json::parse(R"({"kind": "currency", "m": 2})"));
  CHECK(oracle::max_abs(cur.apply(currency_state()) - currency_gibbs(2)) < 1e-14);

  const auto cd = channel_from_json(Json::parse(R"({"kind": "cond_depolarizer", "dA": 2, "dB": 3})"));
  CHECK(cd.dim() == 6);

  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto ch = random_destruction_channel(2 + t % 4, rng);
    const auto back = channel_from_json(channel_to_json(ch));
    const CMat x = random_hermitian(ch.dim(), rng);
    CHECK(oracle::max_abs(back.apply(x) - ch.apply(x)) < 1e-12);
  }

  const auto raw = channel_from_json(Json::parse(
      R"({"dim": 3, "basis": "identity", "blocks": [{"dA": 1, "dB": 1}, {"dA": 2, "dB": 1, "tau": [[0.3, 0], [0, 0.7]]}]})"));
  CHECK(raw.dim() == 3);
  CHECK_THROWS_AS(channel_from_json(Json::parse(R"({"dim": 4, "blocks": [{"dA": 1, "dB": 1}]})")), ValidationError);
}

TEST_CASE("report serialization") {
  TaskReport r;
  r.quantity = TaskQuantity::cost_interval;
  r.value = r.lower = 0.5;
  r.upper = 0.75;
  r.notes = {"a"};
  const auto j = report_to_json(r);
  CHECK(j["quantity"] == "cost_interval");
  CHECK(j["upper"].get<double>() == 0.75);
  CHECK(j["notes"].size() == 1);
}
