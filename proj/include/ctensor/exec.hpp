#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ctensor/ir.hpp"
#include "ctensor/storage.hpp"

namespace ct {

using Bindings = std::map<std::string, ContTensor>;

struct ExecStats {
  std::uint64_t multiplies = 0;
  std::uint64_t segments_visited = 0;
  std::uint64_t pieces_emitted = 0;
};

struct OutputDim {
  bool continuous = false;
  std::int64_t size = 0;  // dense dims only
};

/// Shape of an output tensor: one entry per lhs index, plus the reduction
/// operator whose identity is the fill value.
struct OutputSpec {
  std::string name;
  AssignOp op = AssignOp::add;
  std::vector<OutputDim> dims;
};

/// Collects reduction updates keyed by coordinate path. Identical
/// coordinates accumulate; partially overlapping intervals are rejected at
/// finalize.
class OutputBuilder {
 public:
  explicit OutputBuilder(OutputSpec spec);

  const OutputSpec& spec() const { return spec_; }
  void update(std::vector<Coord> path, AssignOp op, double v);
  /// Sorted, disjoint, fill pieces dropped, touching equal leaf pieces merged.
  ContTensor finalize() const;

 private:
  struct PathLess {
    bool operator()(const std::vector<Coord>& a, const std::vector<Coord>& b) const {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), coord_less);
    }
  };
  OutputSpec spec_;
  std::map<std::vector<Coord>, double, PathLess> acc_;
};

double combine(AssignOp op, double acc, double v);

struct RunResult {
  std::map<std::string, ContTensor> outputs;
  ExecStats stats;
  std::vector<std::string> diagnostics;
};

/// Executes a lowered plan. Throws UnloweredError if the plan still holds
/// continuous loops or unresolved accesses.
RunResult run_plan(const NodePtr& plan, const Bindings& inputs,
                   const std::vector<OutputSpec>& outputs);

/// Evaluates an expression without free variables.
Lim eval_closed(const NodePtr& e, const Bindings& inputs);

}  // namespace ct
