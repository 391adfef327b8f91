#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>

#include "ctensor/exec.hpp"
#include "ctensor/ir.hpp"

namespace ct {

/// Reference semantics, independent of lowering: every continuous loop
/// enumerates the Cartesian product of the pieces (fill gaps included) of
/// the accesses it resolves, and runs its body once per non-empty
/// intersection. Discrete loops visit every integer.
struct OracleResult {
  std::map<std::string, ContTensor> outputs;
  std::int64_t tuples_visited = 0;
  /// Assignments whose rhs multiplies stored entries only (no fill).
  std::int64_t stored_products = 0;
};

OracleResult oracle_eval(const NodePtr& program, const Bindings& inputs, bool sum_skip = false);

/// Midpoint-rule approximation. Continuous loops carrying d(idx) are
/// sampled with step h over their bounds, clamped to [clamp_lo, clamp_hi];
/// other continuous loops visit the coordinates of the pinpoint levels they
/// index. Throws Error if a sampled range is not finite after clamping.
std::map<std::string, ContTensor> riemann_check(const NodePtr& program, const Bindings& inputs, double h,
                                                double clamp_lo = -std::numeric_limits<double>::infinity(),
                                                double clamp_hi = std::numeric_limits<double>::infinity());

/// Compares two outputs pointwise at the endpoints and midpoints of every
/// piece of either. Relative tolerance on values; `why` gets the first
/// difference.
bool tensors_match(const ContTensor& a, const ContTensor& b, double rel_tol, std::string* why = nullptr);

}  // namespace ct
