#pragma once

namespace stoptime {

// Depth caps for the enumeration-backed engines.  The antichain cap guards
// everything that enumerates (maximal) antichains, the branch cap everything
// that enumerates branches.  STOPTIME_ENUM_CAP overrides both at startup.
struct Config {
  int antichain_cap = 3;   // norm fallback + antichain-constrained LPs
  int branch_cap = 4;      // branch-constrained LPs
  int tree_enum_cap = 4;   // enumerate_antichains hard cap
  int dual_oracle_cap = 2; // dual-norm oracle for non-polyhedral bases
  int exact_norm_cap = 2;  // op_norm_exact_tiny
};

Config& config();

}  // namespace stoptime
