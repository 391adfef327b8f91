#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ctensor/interval.hpp"

namespace ct {

enum class Op {
  add, sub, mul, div, neg,
  lt, le, gt, ge, eq, ne,
  land, lor, lnot,
  max, min, sqrt, abs, sin, cos,
  // introduced by lowering
  add_eps, sub_eps, length, is_int, ceil, floor, drop_eps,
};

enum class AssignOp { overwrite, add, lor, land, max, min };

enum class LevelQuery { left, right, last_right, seek, lookup, dense_child };

enum class NodeKind {
  // expressions
  lit, var, call, access, diff, read, level, iv_pair, looplet_ref,
  // statements
  block, for_cont, for_disc, disc_loop, if_, let, assign, while_, point_only,
};

struct Node;
struct Looplet;
using NodePtr = std::shared_ptr<const Node>;
using LoopletPtr = std::shared_ptr<const Looplet>;

struct StepperSlot {
  std::string pvar;
  NodePtr seek;  // initial position, evaluated once on loop entry
  NodePtr stop;  // stop of the current piece, in terms of pvar
};

/// One immutable IR node. Which fields are meaningful depends on `kind`:
///   lit          value
///   var          name
///   call         op, args
///   access       name = tensor, level, args = {pos, index exprs...}
///   diff         name = index
///   read         name = tensor, args = {pos}
///   level        name = tensor, level, query, args = {pos[, p | target | x | i]}
///   iv_pair      args = {start, stop}; a continuous output coordinate
///   looplet_ref  looplet
///   block        args = statements
///   for_cont     name = index, args = {lo, hi, body}, flag = pinpoint region
///   for_disc     name = index, args = {lo, hi, body}, flag = pinpoint region
///   disc_loop    name = var, args = {lo, hi, body}
///   if_          args = {cond, body}
///   let          name, args = {value, body}
///   assign       aop, args = {lhs access, rhs}
///   while_       name = cursor, name2 = cursor stop, args = {lo, hi, body}, steppers
///   point_only   args = {len, body}, flag = strict
struct Node {
  NodeKind kind = NodeKind::block;
  Lim value;
  std::string name, name2;
  Op op = Op::add;
  AssignOp aop = AssignOp::add;
  LevelQuery query = LevelQuery::left;
  int level = 0;
  bool flag = false;
  std::vector<NodePtr> args;
  LoopletPtr looplet;
  std::vector<StepperSlot> steppers;

  const NodePtr& arg(std::size_t i) const { return args.at(i); }
};

enum class LoopletKind { run, phase, sequence, stepper, lookup };

/// Describes one fiber over the whole real line.
///   run       body = payload expression
///   phase     start (may be null), stop, child, pinpoint
///   sequence  children (phases)
///   stepper   seek(target), stop(p), body(p); next is always p + 1
///   lookup    dense level: random access only, never lowered as a looplet
struct Looplet {
  LoopletKind kind = LoopletKind::run;
  NodePtr body;
  NodePtr start, stop;
  LoopletPtr child;
  bool pinpoint = false;
  std::vector<LoopletPtr> children;
  std::string pvar;  // name hint for stepper positions
  std::function<NodePtr(const NodePtr&)> seek;
  std::function<NodePtr(const NodePtr&)> step_stop;
  std::function<LoopletPtr(const NodePtr&)> step_body;
  /// Orderings a <= b that hold whenever this looplet is live.
  std::vector<std::pair<NodePtr, NodePtr>> facts;
};

namespace ir {

NodePtr lit(const Lim& v);
NodePtr lit(double v);
NodePtr var(const std::string& name);
NodePtr call(Op op, std::vector<NodePtr> args);
NodePtr access(const std::string& tensor, int level, NodePtr pos, std::vector<NodePtr> idxs);
NodePtr diff(const std::string& index);
NodePtr read(const std::string& tensor, NodePtr pos);
NodePtr level_query(LevelQuery q, const std::string& tensor, int level, std::vector<NodePtr> args);
NodePtr iv_pair(NodePtr start, NodePtr stop);
NodePtr looplet_ref(LoopletPtr lp);

NodePtr block(std::vector<NodePtr> stmts);
NodePtr for_cont(const std::string& idx, NodePtr lo, NodePtr hi, NodePtr body, bool pin = false);
NodePtr for_disc(const std::string& idx, NodePtr lo, NodePtr hi, NodePtr body, bool pin = false);
NodePtr disc_loop(const std::string& v, NodePtr lo, NodePtr hi, NodePtr body);
NodePtr if_(NodePtr cond, NodePtr body);
NodePtr let(const std::string& name, NodePtr value, NodePtr body);
NodePtr assign(AssignOp op, NodePtr lhs, NodePtr rhs);
NodePtr while_(const std::string& cursor, const std::string& cstop, NodePtr lo, NodePtr hi,
               std::vector<StepperSlot> steppers, NodePtr body);
NodePtr point_only(NodePtr len, NodePtr body, bool strict);

/// Copy of `n` with different children.
NodePtr with_args(const NodePtr& n, std::vector<NodePtr> args);

bool is_lit(const NodePtr& n);
bool is_lit(const NodePtr& n, double v);
bool is_empty_block(const NodePtr& n);
bool is_stmt(const NodePtr& n);
bool is_loop(const NodePtr& n);

const char* op_name(Op op);
const char* assign_op_name(AssignOp op);
/// Identity element of a reduction; accumulators start here.
Lim assign_identity(AssignOp op);

/// Pure evaluation of an operator on limit values.
Lim apply_op(Op op, const Lim* args, std::size_t n);
bool truthy(const Lim& v);

/// Applies `f` bottom-up; `f` returns null to keep the rebuilt node.
NodePtr transform(const NodePtr& n, const std::function<NodePtr(const NodePtr&)>& f);
/// Visits every node (pre-order); return false to skip the subtree.
void visit(const NodePtr& n, const std::function<bool(const NodePtr&)>& f);
/// Replaces every var named `name` (including d(name)) with `value`.
NodePtr substitute(const NodePtr& n, const std::string& name, const NodePtr& value);
bool mentions(const NodePtr& n, const std::string& name);

std::string print_expr(const NodePtr& n);
std::string print_stmt(const NodePtr& n, int indent = 0);
std::string print_looplet(const LoopletPtr& lp, int indent = 0);

/// Deterministic fresh names (`base_1`, `base_2`, ...) for one lowering run.
class NameGen {
 public:
  std::string fresh(const std::string& base);

 private:
  int counter_ = 0;
};

}  // namespace ir
}  // namespace ct
