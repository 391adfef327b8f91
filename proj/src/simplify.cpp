#include <limits>

#include "ctensor/compiler.hpp"

namespace ct {

using namespace ir;

namespace {

bool is_bool_expr(const NodePtr& n) {
  if (n->kind != NodeKind::call) return false;
  switch (n->op) {
    case Op::lt: case Op::le: case Op::gt: case Op::ge: case Op::eq: case Op::ne:
    case Op::land: case Op::lor: case Op::lnot: case Op::is_int:
      return true;
    default:
      return false;
  }
}

std::vector<NodePtr> flatten(Op op, const std::vector<NodePtr>& args) {
  std::vector<NodePtr> out;
  for (const auto& a : args) {
    if (a->kind == NodeKind::call && a->op == op) {
      out.insert(out.end(), a->args.begin(), a->args.end());
    } else {
      out.push_back(a);
    }
  }
  return out;
}

NodePtr rewrite_call(const NodePtr& n) {
  bool all_lit = !n->args.empty();
  for (const auto& a : n->args) all_lit = all_lit && is_lit(a);
  if (all_lit) {
    std::vector<Lim> vs;
    for (const auto& a : n->args) vs.push_back(a->value);
    return lit(apply_op(n->op, vs.data(), vs.size()));
  }
  switch (n->op) {
    case Op::add: {
      auto args = flatten(Op::add, n->args);
      std::vector<NodePtr> keep;
      for (const auto& a : args) {
        if (!is_lit(a, 0.0)) keep.push_back(a);
      }
      if (keep.empty()) return lit(0.0);
      if (keep.size() == 1) return keep[0];
      if (keep.size() != n->args.size() || args.size() != n->args.size()) return call(Op::add, keep);
      return nullptr;
    }
    case Op::sub:
      if (is_lit(n->arg(1), 0.0)) return n->arg(0);
      return nullptr;
    case Op::mul: {
      auto args = flatten(Op::mul, n->args);
      std::vector<NodePtr> keep;
      for (const auto& a : args) {
        if (is_lit(a, 0.0)) return lit(0.0);
        if (!is_lit(a, 1.0)) keep.push_back(a);
      }
      if (keep.empty()) return lit(1.0);
      if (keep.size() == 1) return keep[0];
      if (keep.size() != n->args.size() || args.size() != n->args.size()) return call(Op::mul, keep);
      return nullptr;
    }
    case Op::land:
    case Op::lor: {
      bool is_and = n->op == Op::land;
      auto args = flatten(n->op, n->args);
      std::vector<NodePtr> keep;
      for (const auto& a : args) {
        if (is_lit(a)) {
          bool t = truthy(a->value);
          if (is_and && !t) return lit(0.0);
          if (!is_and && t) return lit(1.0);
          continue;
        }
        keep.push_back(a);
      }
      if (keep.empty()) return lit(is_and ? 1.0 : 0.0);
      if (keep.size() == 1 && is_bool_expr(keep[0])) return keep[0];
      if (keep.size() != n->args.size() || args.size() != n->args.size()) return call(n->op, keep);
      return nullptr;
    }
    case Op::max:
    case Op::min: {
      if (n->args.size() == 1) return n->arg(0);
      auto args = flatten(n->op, n->args);
      if (args.size() != n->args.size()) return call(n->op, args);
      return nullptr;
    }
    case Op::le:
    case Op::ge:
    case Op::eq:
      if (print_expr(n->arg(0)) == print_expr(n->arg(1))) return lit(1.0);
      return nullptr;
    default:
      return nullptr;
  }
}

bool noop_assign(const NodePtr& n) {
  const NodePtr& r = n->arg(1);
  if (!is_lit(r)) return false;
  switch (n->aop) {
    case AssignOp::add: return is_lit(r, 0.0);
    case AssignOp::lor: return !truthy(r->value);
    case AssignOp::land: return truthy(r->value);
    case AssignOp::max: return r->value.val == -std::numeric_limits<double>::infinity();
    case AssignOp::min: return r->value.val == std::numeric_limits<double>::infinity();
    case AssignOp::overwrite: return false;
  }
  return false;
}

NodePtr rewrite(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::call:
      return rewrite_call(n);
    case NodeKind::assign:
      return noop_assign(n) ? block({}) : nullptr;
    case NodeKind::if_:
      if (is_empty_block(n->arg(1))) return block({});
      if (is_lit(n->arg(0))) return truthy(n->arg(0)->value) ? n->arg(1) : block({});
      return nullptr;
    case NodeKind::let:
      return is_empty_block(n->arg(1)) ? block({}) : nullptr;
    case NodeKind::point_only:
      return is_empty_block(n->arg(1)) ? block({}) : nullptr;
    case NodeKind::for_cont:
    case NodeKind::for_disc:
    case NodeKind::disc_loop:
    case NodeKind::while_: {
      if (is_empty_block(n->arg(2))) return block({});
      if (is_lit(n->arg(0)) && is_lit(n->arg(1))) {
        Lim lo = n->arg(0)->value, hi = n->arg(1)->value;
        if (n->kind == NodeKind::disc_loop) {
          if (hi.val < lo.val) return block({});
        } else if (hi < lo) {
          return block({});
        }
      }
      return nullptr;
    }
    case NodeKind::block: {
      std::vector<NodePtr> out;
      bool changed = false;
      for (const auto& s : n->args) {
        if (s->kind == NodeKind::block) {
          out.insert(out.end(), s->args.begin(), s->args.end());
          changed = true;
        } else {
          out.push_back(s);
        }
      }
      if (out.size() == 1) return out[0];
      return changed ? block(out) : nullptr;
    }
    default:
      return nullptr;
  }
}

}  // namespace

NodePtr simplify(const NodePtr& n) {
  NodePtr cur = n;
  for (int round = 0; round < 64; ++round) {
    bool changed = false;
    NodePtr next = transform(cur, [&](const NodePtr& x) -> NodePtr {
      // rewrite until this node is stable, so one bottom-up pass settles
      // most programs
      NodePtr r = rewrite(x);
      if (!r) return nullptr;
      changed = true;
      for (int k = 0; k < 16; ++k) {
        NodePtr again = rewrite(r);
        if (!again) break;
        r = again;
      }
      return r;
    });
    cur = next;
    if (!changed) break;
  }
  return cur;
}

}  // namespace ct
