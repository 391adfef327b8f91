#include "ctensor/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "ctensor/errors.hpp"

namespace ct {

namespace {

struct AccState {
  int level = 0;
  Pos pos = 0;
};

struct Ctx {
  std::map<std::string, double> env;
  std::map<std::string, Iv> regions;    // continuous indices over an interval region
  std::map<std::string, double> steps;  // sampled indices (Riemann mode): d(idx) = step
  std::map<const Node*, AccState> acc;
  // under a condition that depends on an index over an interval region
  bool unknown = false;
};

bool truth(double v) { return v != 0 && !std::isnan(v); }

std::set<std::string> vars_of(const NodePtr& e) {
  std::set<std::string> out;
  ir::visit(e, [&](const NodePtr& n) {
    if (n->kind == NodeKind::var) out.insert(n->name);
    return true;
  });
  return out;
}

bool mentions_diff(const NodePtr& e, const std::string& idx) {
  bool found = false;
  ir::visit(e, [&](const NodePtr& n) {
    found = found || (n->kind == NodeKind::diff && n->name == idx);
    return !found;
  });
  return found;
}

// Input accesses of a subtree; assignment targets are outputs.
std::vector<NodePtr> input_accesses(const NodePtr& n) {
  std::vector<NodePtr> out;
  std::function<void(const NodePtr&)> walk = [&](const NodePtr& x) {
    if (x->kind == NodeKind::assign) {
      walk(x->arg(1));
      return;
    }
    if (x->kind == NodeKind::access) {
      out.push_back(x);
      return;
    }
    for (const auto& a : x->args) walk(a);
  };
  walk(n);
  return out;
}

struct Oracle {
  explicit Oracle(const Bindings& in) : inputs(in) {}

  const Bindings& inputs;
  bool sum_skip = false;
  bool riemann = false;
  double h = 0, clamp_lo = 0, clamp_hi = 0;
  std::map<std::string, bool> cont;
  std::map<std::string, OutputBuilder> outs;
  OracleResult res;

  const ContTensor& tensor(const std::string& name) const {
    auto it = inputs.find(name);
    if (it == inputs.end()) throw BindingError("no tensor bound to " + name);
    return it->second;
  }

  // Follows every leading dimension whose index expression is bound.
  void advance(const NodePtr& a, AccState& st, const Ctx& c) {
    const ContTensor& t = tensor(a->name);
    while (st.level < t.rank() && st.pos >= 0) {
      const NodePtr& e = a->args[st.level + 1];
      for (const auto& v : vars_of(e)) {
        if (!c.env.count(v)) return;
      }
      bool ignored = true;
      double x = eval(e, c, ignored);
      const Level& lv = t.levels[st.level];
      if (level_kind(lv) == LevelKind::dense) {
        auto size = std::get<DenseLevel>(lv).size;
        bool ok = x == std::floor(x) && x >= 0 && x < static_cast<double>(size);
        st.pos = ok ? st.pos * size + static_cast<Pos>(x) : -1;
      } else {
        st.pos = find_piece(lv, st.pos, Lim(x));
      }
      ++st.level;
    }
  }

  double eval(const NodePtr& e, const Ctx& c, bool& stored) {
    switch (e->kind) {
      case NodeKind::lit: return e->value.val;
      case NodeKind::var: {
        auto it = c.env.find(e->name);
        if (it != c.env.end()) return it->second;
        // not constant over the region: NaN marks the value unknown
        if (c.regions.count(e->name)) return std::nan("");
        throw BindingError("unbound name " + e->name);
      }
      case NodeKind::diff: {
        if (auto it = c.steps.find(e->name); it != c.steps.end()) return it->second;
        if (auto it = c.regions.find(e->name); it != c.regions.end()) {
          return it->second.stop.val - it->second.start.val;
        }
        return 0.0;
      }
      case NodeKind::access: {
        const ContTensor& t = tensor(e->name);
        auto it = c.acc.find(e.get());
        AccState st = it == c.acc.end() ? AccState{} : it->second;
        advance(e, st, c);
        if (st.pos >= 0 && st.level < t.rank()) {
          throw UnloweredError("access " + ir::print_expr(e) + " is not resolved by its loops");
        }
        stored = stored && st.pos >= 0;
        return st.pos < 0 ? t.fill : t.values[static_cast<std::size_t>(st.pos)];
      }
      case NodeKind::call: break;
      default: throw Error("oracle: unexpected node in expression");
    }
    std::vector<double> v;
    for (const auto& a : e->args) v.push_back(eval(a, c, stored));
    auto all = [&](auto f) { return std::all_of(v.begin(), v.end(), f); };
    auto any = [&](auto f) { return std::any_of(v.begin(), v.end(), f); };
    auto is_nan = [](double x) { return std::isnan(x); };
    auto is_false = [](double x) { return x == 0; };
    if (e->op == Op::land && any(is_false)) return 0.0;
    if (e->op == Op::lor && any(truth)) return 1.0;
    if (e->op == Op::mul && any(is_false)) return 0.0;
    if (any(is_nan)) return std::nan("");
    switch (e->op) {
      case Op::add: { double s = 0; for (double x : v) s += x; return s; }
      case Op::sub: return v[0] - v[1];
      case Op::mul: {
        // zero annihilates, so fill regions of infinite measure contribute 0
        if (any([](double x) { return x == 0; })) return 0.0;
        double s = 1;
        for (double x : v) s *= x;
        return s;
      }
      case Op::div: return v[0] / v[1];
      case Op::neg: return -v[0];
      case Op::lt: return v[0] < v[1];
      case Op::le: return v[0] <= v[1];
      case Op::gt: return v[0] > v[1];
      case Op::ge: return v[0] >= v[1];
      case Op::eq: return v[0] == v[1];
      case Op::ne: return v[0] != v[1];
      case Op::land: return all(truth);
      case Op::lor: return any(truth);
      case Op::lnot: return !truth(v[0]);
      case Op::max: return *std::max_element(v.begin(), v.end());
      case Op::min: return *std::min_element(v.begin(), v.end());
      case Op::sqrt: return std::sqrt(v[0]);
      case Op::abs: return std::fabs(v[0]);
      case Op::sin: return std::sin(v[0]);
      case Op::cos: return std::cos(v[0]);
      default: throw Error(std::string("oracle: operator ") + ir::op_name(e->op) + " is not a source operator");
    }
  }

  double closed(const NodePtr& e, const Ctx& c) {
    bool ignored = true;
    double v = eval(e, c, ignored);
    if (std::isnan(v)) throw UnloweredError("expression " + ir::print_expr(e) + " is not constant over its region");
    return v;
  }

  void exec(const NodePtr& n, Ctx& c) {
    switch (n->kind) {
      case NodeKind::block:
        for (const auto& s : n->args) exec(s, c);
        return;
      case NodeKind::if_:
      {
        bool s = true;
        double cond = eval(n->arg(0), c, s);
        if (std::isnan(cond)) {
          Ctx inner = c;
          inner.unknown = true;
          exec(n->arg(1), inner);
        } else if (truth(cond)) {
          exec(n->arg(1), c);
        }
        return;
      }
      case NodeKind::let: {
        Ctx inner = c;
        bool ignored = true;
        inner.env[n->name] = eval(n->arg(0), c, ignored);
        exec(n->arg(1), inner);
        return;
      }
      case NodeKind::for_disc: {
        double lo = std::ceil(closed(n->arg(0), c)), hi = std::floor(closed(n->arg(1), c));
        for (double v = lo; v <= hi; v += 1) {
          Ctx inner = c;
          inner.env[n->name] = v;
          exec(n->arg(2), inner);
        }
        return;
      }
      case NodeKind::for_cont:
        if (riemann) {
          sample_loop(n, c);
        } else {
          piece_loop(n, c);
        }
        return;
      case NodeKind::assign:
        assign(n, c);
        return;
      default:
        throw Error("oracle: unexpected statement");
    }
  }

  struct Part {
    const Node* node;
    int level;
    std::vector<FiberPiece> pieces;  // in loop coordinates
  };

  // Leading offset of `e` in idx, checking the coefficient is +1.
  double offset_of(const NodePtr& e, const std::string& idx, const Ctx& c) {
    Ctx probe = c;
    probe.env[idx] = 0;
    double off = closed(e, probe);
    probe.env[idx] = 1;
    if (std::fabs(closed(e, probe) - off - 1) > 1e-9) {
      throw LayoutError("index expression " + ir::print_expr(e) + " does not advance with " + idx);
    }
    return off;
  }

  // Accesses whose next unresolved dimension is led by exactly idx.
  std::vector<Part> parts_for(const NodePtr& loop, Ctx& c, bool with_fill) {
    const std::string& idx = loop->name;
    std::vector<Part> parts;
    for (const auto& a : input_accesses(loop->arg(2))) {
      const ContTensor& t = tensor(a->name);
      AccState st = c.acc.count(a.get()) ? c.acc[a.get()] : AccState{};
      advance(a, st, c);
      c.acc[a.get()] = st;
      if (st.pos < 0 || st.level >= t.rank()) continue;
      const NodePtr& e = a->args[st.level + 1];
      std::set<std::string> unbound;
      for (const auto& v : vars_of(e)) {
        if (!c.env.count(v)) unbound.insert(v);
      }
      if (unbound != std::set<std::string>{idx}) continue;
      const Level& lv = t.levels[st.level];
      if (level_kind(lv) == LevelKind::dense) {
        throw LayoutError("continuous loop " + idx + " iterates dense dimension of " + a->name);
      }
      AffineMap<double> g(offset_of(e, idx, c), 1);
      Part p{a.get(), st.level, fiber_pieces(t, st.level, st.pos, with_fill)};
      for (auto& fp : p.pieces) fp.iv = iv_apply_inverse(g, fp.iv);
      parts.push_back(std::move(p));
    }
    return parts;
  }

  void piece_loop(const NodePtr& loop, const Ctx& outer) {
    Ctx c = outer;
    const std::string& idx = loop->name;
    Iv range{Lim(closed(loop->arg(0), c)), Lim(closed(loop->arg(1), c))};
    if (range.empty()) return;
    auto parts = parts_for(loop, c, true);
    std::function<void(std::size_t, const Iv&, Ctx&)> rec = [&](std::size_t k, const Iv& reg, Ctx& cur) {
      if (k == parts.size()) {
        ++res.tuples_visited;
        Ctx inner = cur;
        if (reg.start == reg.stop) {
          inner.env[idx] = reg.start.val;
        } else {
          inner.regions[idx] = reg;
        }
        exec(loop->arg(2), inner);
        return;
      }
      for (const auto& fp : parts[k].pieces) {
        if (reg.stop < fp.iv.start) break;
        Iv r = iv_intersect(reg, fp.iv);
        if (r.empty()) continue;
        cur.acc[parts[k].node] = AccState{parts[k].level + 1, fp.child};
        rec(k + 1, r, cur);
      }
    };
    rec(0, range, c);
  }

  void sample_loop(const NodePtr& loop, const Ctx& outer) {
    Ctx c = outer;
    const std::string& idx = loop->name;
    double lo = closed(loop->arg(0), c), hi = closed(loop->arg(1), c);
    if (hi < lo) return;
    if (mentions_diff(loop->arg(2), idx)) {
      lo = std::max(lo, clamp_lo);
      hi = std::min(hi, clamp_hi);
      if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw Error("riemann_check: loop " + idx + " has non-finite bounds; pass a clamp range");
      }
      auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((hi - lo) / h)));
      double step = (hi - lo) / static_cast<double>(n);
      for (std::int64_t k = 0; k < n; ++k) {
        Ctx inner = c;
        inner.env[idx] = lo + (static_cast<double>(k) + 0.5) * step;
        inner.steps[idx] = step;
        exec(loop->arg(2), inner);
      }
      return;
    }
    // no measure: visit the stored points the loop resolves
    std::set<double> points;
    for (const auto& p : parts_for(loop, c, false)) {
      for (const auto& fp : p.pieces) {
        if (!iv_is_pinpoint(fp.iv)) {
          throw Error("riemann_check: loop " + idx + " without d(" + idx + ") ranges over intervals");
        }
        if (lo <= fp.iv.start.val && fp.iv.start.val <= hi) points.insert(fp.iv.start.val);
      }
    }
    for (double x : points) {
      Ctx inner = c;
      inner.env[idx] = x;
      exec(loop->arg(2), inner);
    }
  }

  void assign(const NodePtr& n, const Ctx& c) {
    const NodePtr& lhs = n->arg(0);
    std::vector<Coord> coords;
    std::set<std::string> lhs_vars;
    for (std::size_t k = 1; k < lhs->args.size(); ++k) {
      const std::string& v = lhs->args[k]->name;
      lhs_vars.insert(v);
      if (!cont.at(v)) {
        coords.emplace_back(static_cast<std::int64_t>(c.env.at(v)));
      } else if (auto it = c.regions.find(v); it != c.regions.end()) {
        coords.emplace_back(it->second);
      } else if (c.env.count(v) && !c.steps.count(v)) {
        coords.emplace_back(Iv{Lim(c.env.at(v)), Lim(c.env.at(v))});
      } else {
        throw Error("oracle: output index " + v + " cannot be placed");
      }
    }
    bool stored = true;
    double value = eval(n->arg(1), c, stored);
    if (c.unknown || std::isnan(value)) {
      // only an identity update is independent of the unknown value
      if (value == ir::assign_identity(n->aop).val) return;
      throw UnloweredError("assignment to " + lhs->name + " depends on a continuous index used as a value over an interval region");
    }
    if (n->aop == AssignOp::add) {
      for (const auto& [v, reg] : c.regions) {
        if (lhs_vars.count(v) || mentions_diff(n->arg(1), v)) continue;
        if (reg.stop.val > reg.start.val) {
          if (sum_skip) return;
          if (value != 0) {
            throw SummationOverInterval("sum over continuous index " + v + " on " + to_string(reg) +
                                        " of nonzero value diverges");
          }
        }
      }
    }
    bool has_mul = false;
    ir::visit(n->arg(1), [&](const NodePtr& x) {
      has_mul = has_mul || (x->kind == NodeKind::call && x->op == Op::mul);
      return true;
    });
    if (has_mul && stored) ++res.stored_products;
    outs.at(lhs->name).update(std::move(coords), n->aop, value);
  }

  void setup(const NodePtr& prog) {
    std::map<std::string, NodePtr> loops;
    NodePtr asg;
    ir::visit(prog, [&](const NodePtr& n) {
      if (ir::is_loop(n)) {
        cont[n->name] = n->kind == NodeKind::for_cont;
        loops[n->name] = n;
      }
      if (n->kind == NodeKind::assign && !asg) asg = n;
      return true;
    });
    if (!asg) throw ValidationError("program has no assignment");
    OutputSpec spec{asg->arg(0)->name, asg->aop, {}};
    for (std::size_t k = 1; k < asg->arg(0)->args.size(); ++k) {
      const NodePtr& e = asg->arg(0)->args[k];
      if (e->kind != NodeKind::var || !loops.count(e->name)) {
        throw ValidationError("output index " + ir::print_expr(e) + " is not a loop index");
      }
      OutputDim d;
      d.continuous = cont.at(e->name);
      if (!d.continuous) d.size = static_cast<std::int64_t>(std::floor(closed(loops.at(e->name)->arg(1), {}))) + 1;
      spec.dims.push_back(d);
    }
    outs.emplace(spec.name, OutputBuilder(spec));
  }

  std::map<std::string, ContTensor> finish() {
    std::map<std::string, ContTensor> out;
    for (const auto& [name, b] : outs) out.emplace(name, b.finalize());
    return out;
  }
};

}  // namespace

OracleResult oracle_eval(const NodePtr& program, const Bindings& inputs, bool sum_skip) {
  Oracle o(inputs);
  o.sum_skip = sum_skip;
  o.setup(program);
  Ctx c;
  o.exec(program, c);
  o.res.outputs = o.finish();
  return o.res;
}

std::map<std::string, ContTensor> riemann_check(const NodePtr& program, const Bindings& inputs, double h,
                                                double clamp_lo, double clamp_hi) {
  if (!(h > 0)) throw Error("riemann_check: step must be positive");
  Oracle o(inputs);
  o.riemann = true;
  o.h = h;
  o.clamp_lo = clamp_lo;
  o.clamp_hi = clamp_hi;
  o.setup(program);
  Ctx c;
  o.exec(program, c);
  return o.finish();
}

bool tensors_match(const ContTensor& a, const ContTensor& b, double rel_tol, std::string* why) {
  auto say = [&](const std::string& s) {
    if (why) *why = s;
    return false;
  };
  if (a.rank() != b.rank()) return say("rank " + std::to_string(a.rank()) + " vs " + std::to_string(b.rank()));
  auto close = [&](double x, double y) {
    if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y);
    if (x == y) return true;
    return std::fabs(x - y) <= rel_tol * std::max(std::fabs(x), std::fabs(y));
  };
  if (!close(a.fill, b.fill)) return say("fill differs");
  if (a.rank() == 0) {
    double x = a.values.empty() ? a.fill : a.values[0], y = b.values.empty() ? b.fill : b.values[0];
    return close(x, y) ? true : say(std::to_string(x) + " vs " + std::to_string(y));
  }
  auto samples = [](const Coord& c) {
    std::vector<double> out;
    if (const auto* i = std::get_if<std::int64_t>(&c)) {
      out.push_back(static_cast<double>(*i));
      return out;
    }
    const Iv& iv = std::get<Iv>(c);
    double s = iv.start.val, e = iv.stop.val;
    if (std::isfinite(s)) out.push_back(s);
    if (std::isfinite(e)) out.push_back(e);
    if (std::isfinite(s) && std::isfinite(e)) {
      out.push_back(0.5 * (s + e));
    } else if (std::isfinite(s)) {
      out.push_back(s + 1);
    } else if (std::isfinite(e)) {
      out.push_back(e - 1);
    } else {
      out.push_back(0);
    }
    return out;
  };
  for (const ContTensor* t : {&a, &b}) {
    for (const auto& piece : tensor_pieces(*t, false)) {
      std::vector<std::vector<double>> axes;
      for (const auto& c : piece.coords) axes.push_back(samples(c));
      std::vector<double> pt(axes.size());
      std::function<bool(std::size_t)> rec = [&](std::size_t k) {
        if (k == axes.size()) {
          double x = tensor_eval(a, pt), y = tensor_eval(b, pt);
          if (close(x, y)) return true;
          std::string at;
          for (double v : pt) at += (at.empty() ? "" : ", ") + to_string(Lim(v));
          return say("at (" + at + "): " + to_string(Lim(x)) + " vs " + to_string(Lim(y)));
        }
        for (double v : axes[k]) {
          pt[k] = v;
          if (!rec(k + 1)) return false;
        }
        return true;
      };
      if (!rec(0)) return false;
    }
  }
  return true;
}

}  // namespace ct
