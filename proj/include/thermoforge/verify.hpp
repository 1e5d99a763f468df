#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace thermoforge {

enum class Suite { Numerics, Generators, Compiler, Channels, Majorization, Cooling, All };

std::string_view to_string(Suite s);
Suite suite_from_string(std::string_view s);

/// One named invariant, aggregated over all trials. `measured` is the worst
/// value seen; the check passes iff measured ≤ tolerance.
struct CheckResult {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct VerifyOptions {
  Suite suite = Suite::All;
  std::uint64_t seed = 7;
  int trials = 100;
  bool inject_violation = false;  // adds a known-false curve dominance check
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;
  int trials = 0;
  [[nodiscard]] bool all_pass() const;
};

/// Randomized invariant suites. Trials run concurrently; trial k of a suite
/// draws from a seed derived from (seed, suite, k) only, and results are
/// folded in trial order, so the report depends on (seed, trials) alone.
VerifyReport run_verify(const VerifyOptions& opts);

}  // namespace thermoforge
