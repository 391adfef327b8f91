#include <functional>

#include "ctensor/lang.hpp"

namespace ct {

using namespace ir;

TensorSig signature_of(const ContTensor& t) {
  TensorSig s;
  for (const auto& lv : t.levels) {
    s.kinds.push_back(level_kind(lv));
    s.pinpoint.push_back(is_pinpoint_level(lv));
  }
  return s;
}

NodePtr find_assign(const NodePtr& prog) {
  NodePtr found;
  visit(prog, [&](const NodePtr& n) {
    if (n->kind == NodeKind::assign && !found) found = n;
    return !found;
  });
  return found;
}

std::map<std::string, int> loop_depths(const NodePtr& prog) {
  std::map<std::string, int> out;
  std::function<void(const NodePtr&, int)> walk = [&](const NodePtr& n, int d) {
    if (is_loop(n)) {
      out.emplace(n->name, d);
      walk(n->arg(2), d + 1);
      return;
    }
    if (is_stmt(n)) {
      for (const auto& a : n->args) walk(a, d);
    }
  };
  walk(prog, 0);
  return out;
}

std::string deepest_index(const NodePtr& e, const std::map<std::string, int>& depth) {
  std::string best;
  int bd = -1;
  visit(e, [&](const NodePtr& n) {
    if (n->kind == NodeKind::var) {
      auto it = depth.find(n->name);
      if (it != depth.end() && it->second > bd) {
        bd = it->second;
        best = n->name;
      }
    }
    return true;
  });
  return best;
}

namespace {

// Coefficients of loop indices in an index expression; false if the
// expression is not a sum of +-index terms and index-free terms.
bool affine(const NodePtr& e, const std::map<std::string, int>& depth, int sign,
            std::map<std::string, int>& coef) {
  auto uses_index = [&](const NodePtr& x) { return !deepest_index(x, depth).empty(); };
  if (!uses_index(e)) return true;
  switch (e->kind) {
    case NodeKind::var:
      coef[e->name] += sign;
      return true;
    case NodeKind::call:
      switch (e->op) {
        case Op::add:
          for (const auto& a : e->args) {
            if (!affine(a, depth, sign, coef)) return false;
          }
          return true;
        case Op::sub:
          return affine(e->arg(0), depth, sign, coef) && affine(e->arg(1), depth, -sign, coef);
        case Op::neg:
          return affine(e->arg(0), depth, -sign, coef);
        default:
          return false;
      }
    default:
      return false;
  }
}

struct Checker {
  const Signatures& sigs;
  bool sum_skip;
  std::vector<Diagnostic> out;
  std::map<std::string, int> depth;
  std::map<std::string, bool> continuous;
  // index -> pinpoint flags of the rhs/condition dims it resolves
  std::map<std::string, std::vector<bool>> resolved;
  std::set<std::string> bare_uses;
  std::set<std::string> rhs_tensors;

  void diag(const char* rule, std::string msg) { out.push_back({rule, std::move(msg)}); }

  void loops(const NodePtr& n) {
    if (is_loop(n)) {
      if (continuous.count(n->name)) diag("R-SCOPE", "index " + n->name + " is bound twice");
      continuous[n->name] = n->kind == NodeKind::for_cont;
    }
    if (n->kind == NodeKind::let && continuous.count(n->name)) {
      diag("R-SCOPE", "let " + n->name + " shadows a loop index");
    }
    if (is_stmt(n) && n->kind != NodeKind::assign) {
      for (const auto& a : n->args) loops(a);
    }
  }

  void access(const NodePtr& a) {
    rhs_tensors.insert(a->name);
    auto it = sigs.find(a->name);
    std::size_t n = a->args.size() - 1;
    if (it == sigs.end()) {
      diag("R-ARITY", "no tensor bound to " + a->name);
    } else if (static_cast<int>(n) != it->second.rank()) {
      diag("R-ARITY", a->name + " has rank " + std::to_string(it->second.rank()) + " but is accessed with " +
                          std::to_string(n) + " indices");
    }
    for (std::size_t k = 0; k < n; ++k) {
      const NodePtr& e = a->args[k + 1];
      std::map<std::string, int> coef;
      std::string where = a->name + " dimension " + std::to_string(k);
      if (!affine(e, depth, 1, coef)) {
        diag("R-INV", where + ": index expression " + print_expr(e) + " has no interval-preserving inverse");
        continue;
      }
      int conts = 0;
      bool ok = true;
      for (const auto& [idx, c] : coef) {
        if (c == 0) continue;
        if (c != 1 && c != -1) {
          diag("R-INV", where + ": coefficient " + std::to_string(c) + " on " + idx);
          ok = false;
        }
        if (continuous.at(idx)) ++conts;
      }
      if (conts > 2) diag("R-INV", where + ": more than two continuous indices");
      std::string deep = deepest_index(e, depth);
      if (ok && !deep.empty() && it != sigs.end() && static_cast<int>(k) < it->second.rank()) {
        resolved[deep].push_back(it->second.pinpoint[k]);
      }
    }
  }

  // Walks a value expression: records accesses and bare index uses.
  void expr(const NodePtr& e) {
    switch (e->kind) {
      case NodeKind::access: access(e); return;
      case NodeKind::diff: {
        auto it = continuous.find(e->name);
        if (it == continuous.end() || !it->second) {
          diag("R-SCOPE", "d(" + e->name + ") does not name a continuous loop index");
        }
        return;
      }
      case NodeKind::var:
        if (continuous.count(e->name) && continuous.at(e->name)) bare_uses.insert(e->name);
        return;
      default:
        for (const auto& a : e->args) expr(a);
    }
  }

  void stmts(const NodePtr& n) {
    switch (n->kind) {
      case NodeKind::for_cont:
      case NodeKind::for_disc:
        expr(n->arg(0));
        expr(n->arg(1));
        stmts(n->arg(2));
        return;
      case NodeKind::if_:
        expr(n->arg(0));
        stmts(n->arg(1));
        return;
      case NodeKind::let:
        expr(n->arg(0));
        stmts(n->arg(1));
        return;
      case NodeKind::assign: expr(n->arg(1)); return;
      default:
        for (const auto& a : n->args) stmts(a);
    }
  }

  void run(const NodePtr& prog) {
    depth = loop_depths(prog);
    loops(prog);
    NodePtr asg = find_assign(prog);
    if (!asg) {
      diag("R-SCOPE", "program has no assignment");
      return;
    }
    stmts(prog);
    const NodePtr& lhs = asg->arg(0);
    if (rhs_tensors.count(lhs->name)) {
      diag("R-SCOPE", "tensor " + lhs->name + " appears on both sides of the assignment");
    }
    std::set<std::string> lhs_idx;
    for (std::size_t k = 1; k < lhs->args.size(); ++k) {
      const NodePtr& e = lhs->args[k];
      if (e->kind != NodeKind::var || !continuous.count(e->name)) {
        diag("R-INV", "output " + lhs->name + " must be indexed by plain loop indices, got " + print_expr(e));
      } else {
        lhs_idx.insert(e->name);
      }
    }

    for (const auto& idx : bare_uses) {
      const auto& dims = resolved[idx];
      bool all_pin = !dims.empty();
      for (bool p : dims) all_pin = all_pin && p;
      if (!all_pin) {
        diag("R-PIN", "continuous index " + idx +
                          " is used as a value but does not range over pinpoint dimensions only");
      }
    }

    if (asg->aop == AssignOp::add && !sum_skip) {
      const NodePtr& rhs = asg->arg(1);
      for (const auto& [idx, cont] : continuous) {
        if (!cont || lhs_idx.count(idx)) continue;
        bool has_d = false;
        visit(rhs, [&](const NodePtr& x) {
          if (x->kind == NodeKind::diff && x->name == idx) has_d = true;
          return !has_d;
        });
        if (has_d) continue;
        bool any_pin = false;
        for (bool p : resolved[idx]) any_pin = any_pin || p;
        if (!any_pin) {
          diag("R-SUM", "summation over continuous index " + idx +
                            " without d(" + idx + ") ranges over intervals; the sum diverges");
        }
      }
    }
  }
};

}  // namespace

std::vector<Diagnostic> validate(const NodePtr& prog, const Signatures& sigs, bool sum_skip) {
  Checker c{sigs, sum_skip, {}, {}, {}, {}, {}, {}};
  c.run(prog);
  return c.out;
}

}  // namespace ct
