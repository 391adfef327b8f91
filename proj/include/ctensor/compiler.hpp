#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctensor/exec.hpp"
#include "ctensor/ir.hpp"

namespace ct {

/// Rewrites to a fixpoint, innermost first: annihilators, identities,
/// no-op reductions, dead control flow and constant folding.
NodePtr simplify(const NodePtr& n);

/// Orderings between symbolic endpoints, harvested from looplets.
/// Each term is read as atom + c + k*eps; facts become difference
/// constraints and queries are answered by shortest paths.
class FactSet {
 public:
  void add_le(const NodePtr& a, const NodePtr& b);
  std::size_t size() const { return facts_.size(); }
  const std::vector<std::pair<NodePtr, NodePtr>>& facts() const { return facts_; }

  /// Sound but incomplete: true means a <= b holds in every run.
  bool prove_le(const NodePtr& a, const NodePtr& b) const;
  bool prove_eq(const NodePtr& a, const NodePtr& b) const {
    return prove_le(a, b) && prove_le(b, a);
  }

 private:
  std::vector<std::pair<NodePtr, NodePtr>> facts_;
  std::set<std::string> keys_;
};

/// Drops max/min operands and guards that the facts make redundant, and
/// guards whose body only integrates over the clamped length of the
/// guarded interval.
NodePtr optimize_bounds(const NodePtr& plan, const FactSet& facts);

struct CompileOptions {
  bool sum_skip_intervals = false;
  bool opt_bounds = false;
};

struct Compiled {
  NodePtr program;        // source with parameters bound
  NodePtr plan;           // lowering output
  NodePtr post;           // after the final simplify (and bound analysis)
  std::vector<OutputSpec> outputs;
  std::string looplets;   // every unfurled looplet, in order
  FactSet facts;
};

/// Lowers a validated, parameter-free program against bound inputs.
/// Throws LayoutError when loop order does not match level order and
/// UnloweredError if a continuous loop survives.
Compiled compile_program(const NodePtr& program, const Bindings& inputs, const CompileOptions& opt = {});

}  // namespace ct
