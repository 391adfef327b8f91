#include <cmath>
#include <functional>
#include <set>

#include "ctensor/compiler.hpp"
#include "ctensor/lang.hpp"
#include "ctensor/looplet.hpp"

namespace ct {

using namespace ir;

namespace {

std::set<std::string> vars_of(const NodePtr& e) {
  std::set<std::string> out;
  visit(e, [&](const NodePtr& n) {
    if (n->kind == NodeKind::var) out.insert(n->name);
    return true;
  });
  return out;
}

// Splits an affine index expression into coef * idx + rest.
std::pair<int, NodePtr> split_affine(const NodePtr& e, const std::string& idx) {
  if (!mentions(e, idx)) return {0, e};
  if (e->kind == NodeKind::var) return {1, lit(0.0)};
  if (e->kind == NodeKind::call) {
    switch (e->op) {
      case Op::add: {
        int c = 0;
        std::vector<NodePtr> rest;
        for (const auto& a : e->args) {
          auto [ca, ra] = split_affine(a, idx);
          c += ca;
          rest.push_back(ra);
        }
        return {c, call(Op::add, rest)};
      }
      case Op::sub: {
        auto [c0, r0] = split_affine(e->arg(0), idx);
        auto [c1, r1] = split_affine(e->arg(1), idx);
        return {c0 - c1, call(Op::sub, {r0, r1})};
      }
      case Op::neg: {
        auto [c, r] = split_affine(e->arg(0), idx);
        return {-c, call(Op::neg, {r})};
      }
      default: break;
    }
  }
  throw LayoutError("index expression " + print_expr(e) + " is not affine in " + idx);
}

NodePtr make_loop(const NodePtr& like, NodePtr lo, NodePtr hi, NodePtr body, bool pin) {
  return like->kind == NodeKind::for_cont ? for_cont(like->name, lo, hi, body, pin)
                                          : for_disc(like->name, lo, hi, body, pin);
}

NodePtr replace_ref(const NodePtr& body, const Looplet* target, const NodePtr& with) {
  return transform(body, [&](const NodePtr& n) -> NodePtr {
    if (n->kind == NodeKind::looplet_ref && n->looplet.get() == target) return with;
    return nullptr;
  });
}

NodePtr replace_diff(const NodePtr& body, const std::string& idx, double v) {
  return transform(body, [&](const NodePtr& n) -> NodePtr {
    if (n->kind == NodeKind::diff && n->name == idx) return lit(v);
    return nullptr;
  });
}

LoopletPtr make_phase(NodePtr start, NodePtr stop, LoopletPtr child, bool pin) {
  auto p = std::make_shared<Looplet>();
  p->kind = LoopletKind::phase;
  p->start = std::move(start);
  p->stop = std::move(stop);
  p->child = std::move(child);
  p->pinpoint = pin;
  return p;
}

struct Lowerer {
  const Bindings& inputs;
  CompileOptions opt;
  NameGen names;
  FactSet facts;
  std::string dump;

  const ContTensor& tensor(const std::string& name) {
    auto it = inputs.find(name);
    if (it == inputs.end()) throw BindingError("no tensor bound to " + name);
    return it->second;
  }

  void harvest(const LoopletPtr& lp) {
    for (const auto& [a, b] : lp->facts) facts.add_le(a, b);
  }

  // Random access for every dimension whose index is already bound.
  NodePtr resolve(const NodePtr& n, const std::set<std::string>& pending) {
    if (is_loop(n)) {
      auto inner = pending;
      inner.insert(n->name);
      // children first: gcc 11 leaks braced-list elements when a later one throws
      auto lo = resolve(n->arg(0), pending), hi = resolve(n->arg(1), pending), body = resolve(n->arg(2), inner);
      return with_args(n, {lo, hi, body});
    }
    if (n->kind == NodeKind::assign) {
      auto rhs = resolve(n->arg(1), pending);
      return with_args(n, {n->arg(0), rhs});
    }
    if (n->kind == NodeKind::access) {
      const ContTensor& t = tensor(n->name);
      int level = n->level;
      NodePtr pos = n->arg(0);
      std::vector<NodePtr> idxs(n->args.begin() + 1, n->args.end());
      std::size_t k = 0;
      for (; k < idxs.size(); ++k) {
        const NodePtr& e = idxs[k];
        bool free = false;
        for (const auto& v : vars_of(e)) free = free || pending.count(v);
        if (free) break;
        auto q = level_kind(t.levels[level]) == LevelKind::dense ? LevelQuery::dense_child : LevelQuery::lookup;
        pos = level_query(q, t.name, level, {pos, e});
        ++level;
      }
      if (k == idxs.size()) return read(t.name, pos);
      if (k == 0) return n;
      return access(t.name, level, pos, std::vector<NodePtr>(idxs.begin() + static_cast<long>(k), idxs.end()));
    }
    if (n->args.empty()) return n;
    std::vector<NodePtr> args;
    bool changed = false;
    for (const auto& a : n->args) {
      args.push_back(resolve(a, pending));
      changed = changed || args.back() != a;
    }
    return changed ? with_args(n, args) : n;
  }

  // Replaces accesses led by exactly `idx` with looplets.
  NodePtr unfurl_accesses(const NodePtr& loop) {
    const std::string& idx = loop->name;
    const bool cont = loop->kind == NodeKind::for_cont;
    std::function<NodePtr(const NodePtr&, const std::set<std::string>&)> walk =
        [&](const NodePtr& n, const std::set<std::string>& pending) -> NodePtr {
      if (is_loop(n)) {
        auto inner = pending;
        inner.insert(n->name);
        auto body = walk(n->arg(2), inner);
        return with_args(n, {n->arg(0), n->arg(1), body});
      }
      if (n->kind == NodeKind::assign) {
        auto rhs = walk(n->arg(1), pending);
        return with_args(n, {n->arg(0), rhs});
      }
      if (n->kind == NodeKind::access && n->args.size() > 1) {
        std::set<std::string> free;
        for (const auto& v : vars_of(n->arg(1))) {
          if (pending.count(v)) free.insert(v);
        }
        if (free != std::set<std::string>{idx}) return n;
        const ContTensor& t = tensor(n->name);
        const Level& lv = t.levels.at(n->level);
        if (level_kind(lv) == LevelKind::dense) {
          if (cont) {
            throw LayoutError("continuous loop " + idx + " iterates dense dimension " + std::to_string(n->level) +
                              " of " + n->name + "; loop order must follow level order");
          }
          return n;
        }
        auto [coef, off] = split_affine(n->arg(1), idx);
        if (coef != 1) {
          throw LayoutError("access " + print_expr(n) + " reflects loop " + idx + "; only +" + idx +
                            " is supported in a leading index");
        }
        std::vector<NodePtr> rest(n->args.begin() + 2, n->args.end());
        auto lp = unfurl(t, n->level, n->arg(0), simplify(off), rest, names);
        dump += "# " + print_expr(n) + " in loop " + idx + "\n" + print_looplet(lp) + "\n";
        return looplet_ref(lp);
      }
      if (n->kind == NodeKind::access || n->args.empty()) return n;
      std::vector<NodePtr> args;
      for (const auto& a : n->args) args.push_back(walk(a, pending));
      return with_args(n, args);
    };
    auto body = walk(loop->arg(2), {idx});
    return with_args(loop, {loop->arg(0), loop->arg(1), body});
  }

  NodePtr lower_stmt(const NodePtr& in) {
    NodePtr n = resolve(in, {});
    if (is_loop(n)) return lower_loop(unfurl_accesses(n));
    if (!is_stmt(n) || n->kind == NodeKind::assign) return n;
    std::vector<NodePtr> args;
    for (const auto& a : n->args) args.push_back(is_stmt(a) ? lower_stmt(a) : a);
    return with_args(n, args);
  }

  std::vector<LoopletPtr> refs(const NodePtr& body) {
    std::vector<LoopletPtr> out;
    std::set<const Looplet*> seen;
    visit(body, [&](const NodePtr& n) {
      if (n->kind == NodeKind::looplet_ref && seen.insert(n->looplet.get()).second) out.push_back(n->looplet);
      return true;
    });
    return out;
  }

  NodePtr lower_loop(const NodePtr& loop) {
    NodePtr body = simplify(loop->arg(2));
    if (is_empty_block(body)) return block({});
    const NodePtr &lo = loop->arg(0), &hi = loop->arg(1);
    auto lps = refs(body);
    auto first = [&](LoopletKind k) -> LoopletPtr {
      for (const auto& lp : lps) {
        if (lp->kind == k) return lp;
      }
      return nullptr;
    };

    if (first(LoopletKind::run)) {
      for (const auto& lp : lps) {
        if (lp->kind == LoopletKind::run) body = replace_ref(body, lp.get(), lp->body);
      }
      return lower_loop(make_loop(loop, lo, hi, body, loop->flag));
    }

    if (first(LoopletKind::phase)) {
      std::vector<NodePtr> starts{lo}, stops{hi};
      bool pin = loop->flag;
      for (const auto& lp : lps) {
        if (lp->kind != LoopletKind::phase) continue;
        harvest(lp);
        if (lp->start) starts.push_back(lp->start);
        stops.push_back(lp->stop);
        pin = pin || lp->pinpoint;
        body = replace_ref(body, lp.get(), looplet_ref(lp->child));
      }
      std::string s = names.fresh("s"), e = names.fresh("e");
      NodePtr inner = lower_loop(make_loop(loop, var(s), var(e), body, pin));
      return let(s, simplify(call(Op::max, starts)),
                 let(e, simplify(call(Op::min, stops)), if_(call(Op::le, {var(s), var(e)}), inner)));
    }

    if (auto seq = first(LoopletKind::sequence)) {
      harvest(seq);
      std::vector<NodePtr> copies;
      NodePtr prev_stop;
      for (const auto& child : seq->children) {
        LoopletPtr ph = child;
        if (ph->kind != LoopletKind::phase) ph = make_phase(nullptr, lit(Lim::pos_inf()), child, false);
        NodePtr start = ph->start ? ph->start : (prev_stop ? call(Op::add_eps, {prev_stop}) : nullptr);
        if (prev_stop) facts.add_le(prev_stop, ph->stop);
        auto fixed = make_phase(start, ph->stop, ph->child, ph->pinpoint);
        copies.push_back(lower_loop(make_loop(loop, lo, hi, replace_ref(body, seq.get(), looplet_ref(fixed)),
                                              loop->flag)));
        prev_stop = ph->stop;
      }
      return block(copies);
    }

    if (first(LoopletKind::stepper)) {
      std::string cursor = names.fresh(loop->name), cstop = names.fresh(loop->name + "_stop");
      std::vector<StepperSlot> slots;
      for (const auto& lp : lps) {
        if (lp->kind != LoopletKind::stepper) continue;
        std::string pv = names.fresh(lp->pvar);
        slots.push_back({pv, lp->seek(lo), lp->step_stop(var(pv))});
        body = replace_ref(body, lp.get(), looplet_ref(lp->step_body(var(pv))));
      }
      NodePtr inner = lower_loop(make_loop(loop, var(cursor), var(cstop), body, loop->flag));
      return while_(cursor, cstop, lo, hi, slots, inner);
    }

    if (!lps.empty()) {
      throw LayoutError("loop " + loop->name + " cannot be lowered over a dense looplet");
    }
    return terminal(loop, body);
  }

  NodePtr terminal(const NodePtr& loop, const NodePtr& body) {
    const std::string& idx = loop->name;
    const NodePtr &lo = loop->arg(0), &hi = loop->arg(1);
    if (loop->kind == NodeKind::for_disc) {
      if (loop->flag) return if_(call(Op::is_int, {lo}), let(idx, lo, lower_stmt(body)));
      return disc_loop(idx, call(Op::ceil, {lo}), call(Op::floor, {hi}), lower_stmt(body));
    }
    if (loop->flag) return let(idx, lo, lower_stmt(simplify(replace_diff(body, idx, 0.0))));
    return lower_stmt(simplify(reduce(idx, lo, hi, body)));
  }

  // Eliminates a continuous loop over an interval on which the body is
  // constant.
  NodePtr reduce(const std::string& idx, const NodePtr& s, const NodePtr& e, const NodePtr& body) {
    NodePtr len = call(Op::length, {s, e});
    NodePtr out = transform(body, [&](const NodePtr& n) -> NodePtr {
      if (n->kind != NodeKind::assign) return nullptr;
      const NodePtr& lhs = n->arg(0);
      bool lhs_has = false;
      std::vector<NodePtr> largs = lhs->args;
      for (std::size_t k = 1; k < largs.size(); ++k) {
        if (largs[k]->kind == NodeKind::var && largs[k]->name == idx) {
          largs[k] = iv_pair(s, e);
          lhs_has = true;
        }
      }
      bool has_d = false;
      visit(n->arg(1), [&](const NodePtr& x) {
        has_d = has_d || (x->kind == NodeKind::diff && x->name == idx);
        return !has_d;
      });
      NodePtr rhs = replace_diff(n->arg(1), idx, 1.0);
      if (lhs_has) return assign(n->aop, with_args(lhs, largs), rhs);
      if (n->aop != AssignOp::add) return assign(n->aop, lhs, rhs);
      if (has_d) return assign(n->aop, lhs, call(Op::mul, {len, rhs}));
      if (opt.sum_skip_intervals) return if_(call(Op::eq, {len, lit(0.0)}), n);
      return point_only(len, n, true);
    });
    bool used = false;
    visit(out, [&](const NodePtr& x) {
      used = used || (x->kind == NodeKind::var && x->name == idx);
      return !used;
    });
    if (used) {
      throw UnloweredError("continuous index " + idx +
                           " is used as a value over an interval region; it must range over pinpoints");
    }
    return out;
  }
};

std::vector<OutputSpec> output_specs(const NodePtr& prog) {
  NodePtr asg = find_assign(prog);
  if (!asg) throw ValidationError("program has no assignment");
  std::map<std::string, NodePtr> loops;
  visit(prog, [&](const NodePtr& n) {
    if (is_loop(n)) loops.emplace(n->name, n);
    return true;
  });
  OutputSpec spec;
  spec.name = asg->arg(0)->name;
  spec.op = asg->aop;
  for (std::size_t k = 1; k < asg->arg(0)->args.size(); ++k) {
    const NodePtr& e = asg->arg(0)->args[k];
    auto it = e->kind == NodeKind::var ? loops.find(e->name) : loops.end();
    if (it == loops.end()) throw ValidationError("output index " + print_expr(e) + " is not a loop index");
    OutputDim d;
    d.continuous = it->second->kind == NodeKind::for_cont;
    if (!d.continuous) {
      NodePtr lo = simplify(it->second->arg(0)), hi = simplify(it->second->arg(1));
      if (!is_lit(lo) || !is_lit(hi)) {
        throw BindingError("bounds of discrete output index " + e->name + " must be known at compile time");
      }
      if (lo->value.val < 0) throw LayoutError("discrete output index " + e->name + " starts below 0");
      d.size = std::max<Pos>(0, static_cast<Pos>(std::floor(hi->value.val)) + 1);
    }
    spec.dims.push_back(d);
  }
  return {spec};
}

void check_lowered(const NodePtr& n) {
  visit(n, [&](const NodePtr& x) {
    switch (x->kind) {
      case NodeKind::assign:
        check_lowered(x->arg(1));
        return false;
      case NodeKind::access:
        throw UnloweredError("access " + print_expr(x) + " was not lowered; check loop order against level order");
      case NodeKind::looplet_ref:
      case NodeKind::diff:
      case NodeKind::for_cont:
      case NodeKind::for_disc:
        throw UnloweredError("lowering left a " + print_stmt(x) + "behind");
      default:
        return true;
    }
  });
}

}  // namespace

Compiled compile_program(const NodePtr& program, const Bindings& inputs, const CompileOptions& opt) {
  Compiled out;
  out.program = program;
  out.outputs = output_specs(program);
  Lowerer l{inputs, opt, {}, {}, {}};
  out.plan = l.lower_stmt(simplify(program));
  NodePtr post = simplify(out.plan);
  if (opt.opt_bounds) post = simplify(optimize_bounds(post, l.facts));
  check_lowered(post);
  out.post = post;
  out.looplets = std::move(l.dump);
  out.facts = std::move(l.facts);
  return out;
}

}  // namespace ct
