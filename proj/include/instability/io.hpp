#pragma once

// JSON serialization. Complex matrices are nested arrays of [re, im] pairs
// (a bare number is accepted as a real entry on input).
//
// State:   {"dim": n, "matrix": [[[re, im], ...], ...]}
// Channel: {"dim": n, "basis": matrix | "identity", "blocks": [{"dA", "dB", "tau"}, ...]}
//          or a shortcut {"kind": "dephaser" | "replacer" | "depolarizer" |
//          "cond_depolarizer" | "cond_replacer" | "tpce" | "currency", ...}

#include <json.hpp>
#include <string>

#include "instability/destruction.hpp"
#include "instability/sdp.hpp"
#include "instability/tasks.hpp"

namespace instab {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const CMat& m);
CMat matrix_from_json(const Json& j, const char* what = "matrix");

Json state_to_json(const CMat& rho);
// Validates Hermiticity, positivity and unit trace.
CMat state_from_json(const Json& j);

Json channel_to_json(const DestructionChannel& ch);
DestructionChannel channel_from_json(const Json& j);

Json report_to_json(const TaskReport& r);
Json sdp_problem_to_json(const SdpProblem& p);
Json sdp_solution_to_json(const SdpSolution& s);

// Throws ParseError on unreadable files or malformed JSON.
Json read_json_file(const std::string& path);

}  // namespace instab
