#pragma once

// Property suites over seeded random instances. Each suite reports named
// worst-case metrics (a deviation or an inequality violation) together with
// the tolerance it is judged against.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "instability/destruction.hpp"

namespace instab {

struct Metric {
  std::string name;
  double worst = 0;
  double tolerance = 0;
  int samples = 0;
  std::string worst_case;  // description of the instance attaining `worst`

  bool ok() const { return worst <= tolerance; }
};

struct SuiteResult {
  std::string name;
  std::vector<Metric> metrics;
  std::vector<std::string> notes;
  double seconds = 0;

  bool passed() const;
  int checks() const;
  int failures() const;
  const Metric* find(const std::string& metric) const;
};

// Normalized monotones (value 1 on the one-bit currency state).
struct NamedMonotone {
  std::string name;
  std::function<double(const CMat&, const DestructionChannel&)> value;
};
const std::vector<NamedMonotone>& standard_monotones();
// standard_monotones plus the non-additive hypothesis-testing monotones
// (zero-error yield, restricted and free tests at a fixed error).
const std::vector<NamedMonotone>& all_monotones();

const std::vector<std::string>& suite_names();
// Throws ValidationError for an unknown name.
SuiteResult run_suite(const std::string& name, std::uint64_t seed);

}  // namespace instab
