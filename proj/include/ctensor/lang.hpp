#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctensor/ir.hpp"
#include "ctensor/storage.hpp"

namespace ct {

/// Parses a kernel: a chain of `for` / `if` / `let` headers ending in one
/// assignment. Loop kind comes from an explicit `: real` / `: int` suffix,
/// otherwise from the bound literals (decimal point or inf means real).
NodePtr parse_program(const std::string& src);

/// Identifiers that are neither loop indices nor let names.
std::set<std::string> free_params(const NodePtr& prog);

/// Replaces parameters with literals. Throws BindingError for any parameter
/// left unbound.
NodePtr bind_params(const NodePtr& prog, const std::map<std::string, double>& params);

/// Level kinds of a bound tensor, as validation sees them.
struct TensorSig {
  std::vector<LevelKind> kinds;
  std::vector<bool> pinpoint;
  int rank() const { return static_cast<int>(kinds.size()); }
};
using Signatures = std::map<std::string, TensorSig>;

TensorSig signature_of(const ContTensor& t);

struct Diagnostic {
  std::string rule;  // R-INV, R-PIN, R-SUM, R-ARITY, R-SCOPE
  std::string message;
};

/// Validity rules for continuous programs. With `sum_skip` summation over
/// intervals is permitted (it is skipped at run time instead).
std::vector<Diagnostic> validate(const NodePtr& prog, const Signatures& sigs, bool sum_skip = false);

/// The single assignment of a program.
NodePtr find_assign(const NodePtr& prog);

/// Index variable of the affine term that resolves an access dimension: the
/// most deeply nested loop index appearing in `e`, or "" if none.
std::string deepest_index(const NodePtr& e, const std::map<std::string, int>& depth);

/// Loop depth of every index of the program (outermost = 0).
std::map<std::string, int> loop_depths(const NodePtr& prog);

}  // namespace ct
