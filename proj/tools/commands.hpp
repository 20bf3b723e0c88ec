#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace instab::cli {

// Exit codes.
inline constexpr int kExitParse = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitBudget = 4;
inline constexpr int kExitVerifyFailed = 5;

struct Inputs {
  std::string state;
  std::string channel;
};

struct MonotoneArgs {
  Inputs in;
  double alpha = 1;
  double z = 1;
  double lambda = 0;
};

struct TaskArgs {
  Inputs in;
  double eps = 0;
  double delta = 0;
  bool catalytic = false;
};

struct SweepArgs {
  Inputs in;
  std::string alpha = "0.5:2:0.25";
  std::string z = "1";
  std::string lambda = "0";
  long long max_evals = 10000;
  int jobs = 1;
};

struct RegularizeArgs {
  Inputs in;
  double eps = 0;
  int n_max = 4;
  int sdp_max_dim = 16;
  int exact_max_dim = 256;
};

struct VerifyArgs {
  std::uint64_t seed = 7;
  std::vector<std::string> suites;
  int jobs = 1;
};

struct Result {
  std::string text;
  int exit_code = 0;
};

Result monotone(const MonotoneArgs& args);
Result yield(const TaskArgs& args);
Result cost(const TaskArgs& args);
Result battery(const TaskArgs& args);
Result sweep(const SweepArgs& args);
Result regularize(const RegularizeArgs& args);
Result verify(const VerifyArgs& args);

// "a,b,c" or "lo:hi:step" (inclusive of hi up to rounding).
std::vector<double> parse_grid(const std::string& spec, const char* what);

std::string error_json(const std::string& kind, const std::string& message, int exit_code);

}  // namespace instab::cli
