#include "ctensor/exec.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_map>

namespace ct {

using ir::truthy;

double combine(AssignOp op, double acc, double v) {
  switch (op) {
    case AssignOp::overwrite: return v;
    case AssignOp::add: return acc + v;
    case AssignOp::lor: return truthy(Lim(acc)) || truthy(Lim(v)) ? 1.0 : 0.0;
    case AssignOp::land: return truthy(Lim(acc)) && truthy(Lim(v)) ? 1.0 : 0.0;
    case AssignOp::max: return std::isnan(v) ? v : std::max(acc, v);
    case AssignOp::min: return std::isnan(v) ? v : std::min(acc, v);
  }
  return v;
}

OutputBuilder::OutputBuilder(OutputSpec spec) : spec_(std::move(spec)) {}

void OutputBuilder::update(std::vector<Coord> path, AssignOp op, double v) {
  auto [it, fresh] = acc_.try_emplace(std::move(path), ir::assign_identity(spec_.op).val);
  (void)fresh;
  it->second = combine(op, it->second, v);
}

namespace {

bool touching(const Iv& a, const Iv& b) { return add_eps(a.stop) == b.start; }

std::string path_str(const std::vector<Coord>& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    if (auto* k = std::get_if<std::int64_t>(&p[i])) {
      s += std::to_string(*k);
    } else {
      s += to_string(std::get<Iv>(p[i]));
    }
  }
  return s + ")";
}

}  // namespace

ContTensor OutputBuilder::finalize() const {
  const double fill = ir::assign_identity(spec_.op).val;
  const std::size_t rank = spec_.dims.size();
  if (rank == 0) {
    ContTensor t;
    t.name = spec_.name;
    t.fill = fill;
    t.values = {acc_.empty() ? fill : acc_.begin()->second};
    return t;
  }

  std::vector<Entry> kept;
  for (const auto& [path, v] : acc_) {
    bool is_fill = v == fill || (std::isnan(v) && std::isnan(fill));
    if (!is_fill) kept.push_back({path, v});
  }

  // disjointness of distinct intervals sharing a prefix, at every continuous dim
  for (std::size_t k = 0; k < rank; ++k) {
    if (!spec_.dims[k].continuous) continue;
    std::map<std::vector<Coord>, std::vector<Iv>, PathLess> by_prefix;
    for (const auto& e : kept) {
      std::vector<Coord> prefix(e.coords.begin(), e.coords.begin() + k);
      by_prefix[prefix].push_back(std::get<Iv>(e.coords[k]));
    }
    for (auto& [prefix, ivs] : by_prefix) {
      std::sort(ivs.begin(), ivs.end(), [](const Iv& a, const Iv& b) {
        return coord_less(Coord(a), Coord(b));
      });
      ivs.erase(std::unique(ivs.begin(), ivs.end()), ivs.end());
      for (std::size_t i = 0; i + 1 < ivs.size(); ++i) {
        if (ivs[i + 1].start <= ivs[i].stop) {
          throw OverlapError("output " + spec_.name + ": pieces " + to_string(ivs[i]) + " and " +
                             to_string(ivs[i + 1]) + " overlap under " + path_str(prefix));
        }
      }
    }
  }

  // merge touching equal pieces along a continuous leaf dim
  if (spec_.dims.back().continuous) {
    std::vector<Entry> merged;
    for (auto& e : kept) {
      if (!merged.empty()) {
        Entry& m = merged.back();
        bool same_prefix = std::equal(m.coords.begin(), m.coords.end() - 1, e.coords.begin(),
                                      [](const Coord& a, const Coord& b) {
                                        return !coord_less(a, b) && !coord_less(b, a);
                                      });
        Iv& mi = std::get<Iv>(m.coords.back());
        const Iv& ei = std::get<Iv>(e.coords.back());
        if (same_prefix && m.value == e.value && touching(mi, ei)) {
          mi.stop = ei.stop;
          continue;
        }
      }
      merged.push_back(std::move(e));
    }
    kept = std::move(merged);
  }

  std::vector<LevelSpec> specs;
  for (std::size_t k = 0; k < rank; ++k) {
    if (!spec_.dims[k].continuous) {
      specs.push_back(LevelSpec::dense(spec_.dims[k].size));
      continue;
    }
    bool all_points = true;
    for (const auto& e : kept) {
      const Iv& iv = std::get<Iv>(e.coords[k]);
      if (!(iv.start == iv.stop && iv.start.eps == 0)) all_points = false;
    }
    specs.push_back(all_points ? LevelSpec::pinpoint() : LevelSpec::interval());
  }
  return build_tensor(spec_.name, specs, std::move(kept), fill);
}

namespace {

struct XNode;
using XPtr = XNode*;

struct XStep {
  int slot;
  XPtr seek, stop;
};

struct XNode {
  NodeKind kind;
  Op op = Op::add;
  AssignOp aop = AssignOp::add;
  LevelQuery query = LevelQuery::left;
  int slot = -1, slot2 = -1;
  const ContTensor* tensor = nullptr;
  const Level* lv = nullptr;
  OutputBuilder* out = nullptr;
  Lim value;
  bool flag = false;
  std::vector<XPtr> kids;
  std::vector<XStep> steps;
};

class Interp {
 public:
  Interp(const Bindings& in, std::map<std::string, OutputBuilder>& outs) : in_(in), outs_(outs) {}

  XPtr compile(const NodePtr& n);
  Lim eval(const XNode* x);
  void exec(const XNode* x);

  ExecStats stats;
  std::vector<Lim> slots;

 private:
  int bind(const std::string& name) {
    int s = static_cast<int>(slots.size());
    slots.emplace_back();
    scope_[name].push_back(s);
    return s;
  }
  void unbind(const std::string& name) { scope_[name].pop_back(); }
  const ContTensor& tensor(const std::string& name) {
    auto it = in_.find(name);
    if (it == in_.end()) throw BindingError("no tensor bound to " + name);
    return it->second;
  }
  XPtr node(NodeKind k) {
    arena_.push_back(std::make_unique<XNode>());
    arena_.back()->kind = k;
    return arena_.back().get();
  }

  const Bindings& in_;
  std::map<std::string, OutputBuilder>& outs_;
  std::vector<std::unique_ptr<XNode>> arena_;
  std::unordered_map<std::string, std::vector<int>> scope_;
  bool probe_ = false;
};

XPtr Interp::compile(const NodePtr& n) {
  XPtr x = node(n->kind);
  auto kids = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) x->kids.push_back(compile(n->args[i]));
  };
  switch (n->kind) {
    case NodeKind::lit: x->value = n->value; break;
    case NodeKind::var: {
      auto it = scope_.find(n->name);
      if (it == scope_.end() || it->second.empty()) {
        throw BindingError("unbound variable " + n->name);
      }
      x->slot = it->second.back();
      break;
    }
    case NodeKind::call:
      x->op = n->op;
      kids(0, n->args.size());
      break;
    case NodeKind::read:
      x->tensor = &tensor(n->name);
      kids(0, 1);
      break;
    case NodeKind::level:
      x->tensor = &tensor(n->name);
      x->lv = &x->tensor->levels.at(n->level);
      x->query = n->query;
      kids(0, n->args.size());
      break;
    case NodeKind::iv_pair: kids(0, 2); break;
    case NodeKind::access:
    case NodeKind::diff:
    case NodeKind::looplet_ref:
    case NodeKind::for_cont:
    case NodeKind::for_disc:
      throw UnloweredError("plan still contains: " + (ir::is_stmt(n) ? ir::print_stmt(n)
                                                                      : ir::print_expr(n)));
    case NodeKind::block: kids(0, n->args.size()); break;
    case NodeKind::disc_loop: {
      kids(0, 2);
      x->slot = bind(n->name);
      x->kids.push_back(compile(n->arg(2)));
      unbind(n->name);
      break;
    }
    case NodeKind::if_: kids(0, 2); break;
    case NodeKind::let: {
      kids(0, 1);
      x->slot = bind(n->name);
      x->kids.push_back(compile(n->arg(1)));
      unbind(n->name);
      break;
    }
    case NodeKind::assign: {
      const NodePtr& lhs = n->arg(0);
      auto it = outs_.find(lhs->name);
      if (it == outs_.end()) throw BindingError("no output declared for " + lhs->name);
      x->out = &it->second;
      x->aop = n->aop;
      if (lhs->args.size() - 1 != x->out->spec().dims.size()) {
        throw ArityError("output " + lhs->name + " rank mismatch");
      }
      for (std::size_t i = 1; i < lhs->args.size(); ++i) x->kids.push_back(compile(lhs->args[i]));
      x->kids.push_back(compile(n->arg(1)));
      break;
    }
    case NodeKind::while_: {
      kids(0, 2);
      x->slot = bind(n->name);
      x->slot2 = bind(n->name2);
      for (const auto& s : n->steppers) {
        XStep st;
        st.seek = compile(s.seek);
        st.slot = bind(s.pvar);
        st.stop = compile(s.stop);
        x->steps.push_back(st);
      }
      x->kids.push_back(compile(n->arg(2)));
      for (auto it = n->steppers.rbegin(); it != n->steppers.rend(); ++it) unbind(it->pvar);
      unbind(n->name2);
      unbind(n->name);
      break;
    }
    case NodeKind::point_only:
      x->flag = n->flag;
      kids(0, 2);
      break;
  }
  return x;
}

Lim last_right(const Level& lv, Pos pos) {
  auto [lo, hi] = fiber_range(lv, pos);
  // an empty fiber stops just before -inf so its stepper phase is empty
  return hi > lo ? piece_right(lv, hi - 1) : Lim(-std::numeric_limits<double>::infinity(), -1);
}

Lim Interp::eval(const XNode* x) {
  switch (x->kind) {
    case NodeKind::lit: return x->value;
    case NodeKind::var: return slots[x->slot];
    case NodeKind::call: {
      Lim buf[8];
      std::vector<Lim> big;
      Lim* a = buf;
      std::size_t n = x->kids.size();
      if (n > 8) {
        big.resize(n);
        a = big.data();
      }
      for (std::size_t i = 0; i < n; ++i) a[i] = eval(x->kids[i]);
      if (x->op == Op::mul) ++stats.multiplies;
      return ir::apply_op(x->op, a, n);
    }
    case NodeKind::read: {
      auto p = static_cast<Pos>(eval(x->kids[0]).val);
      return Lim(p < 0 ? x->tensor->fill : x->tensor->values.at(p));
    }
    case NodeKind::level: {
      auto pos = static_cast<Pos>(eval(x->kids[0]).val);
      switch (x->query) {
        case LevelQuery::left: return piece_left(*x->lv, pos);
        case LevelQuery::right: return piece_right(*x->lv, pos);
        case LevelQuery::last_right: return last_right(*x->lv, pos);
        case LevelQuery::seek:
        {
          Lim off = x->kids.size() > 2 ? eval(x->kids[2]) : Lim(0);
          return Lim(static_cast<double>(seek_right(*x->lv, pos, eval(x->kids[1]), off)));
        }
        case LevelQuery::lookup: {
          if (pos < 0) return Lim(-1);
          Lim c = eval(x->kids[1]);
          return Lim(static_cast<double>(find_piece(*x->lv, pos, c)));
        }
        case LevelQuery::dense_child: {
          if (pos < 0) return Lim(-1);
          Lim c = eval(x->kids[1]);
          auto size = std::get<DenseLevel>(*x->lv).size;
          if (c.eps != 0 || c.val != std::floor(c.val) || c.val < 0 ||
              c.val >= static_cast<double>(size)) {
            return Lim(-1);
          }
          return Lim(static_cast<double>(pos * size + static_cast<Pos>(c.val)));
        }
      }
      break;
    }
    default: break;
  }
  throw std::logic_error("eval on a statement node");
}

void Interp::exec(const XNode* x) {
  switch (x->kind) {
    case NodeKind::block:
      for (auto* k : x->kids) exec(k);
      return;
    case NodeKind::disc_loop: {
      Lim lo = eval(x->kids[0]), hi = eval(x->kids[1]);
      if (!std::isfinite(lo.val) || !std::isfinite(hi.val)) {
        if (hi < lo) return;
        throw LayoutError("discrete loop with unbounded range");
      }
      for (double v = lo.val; v <= hi.val; v += 1) {
        slots[x->slot] = Lim(v);
        exec(x->kids[2]);
      }
      return;
    }
    case NodeKind::if_:
      if (truthy(eval(x->kids[0]))) exec(x->kids[1]);
      return;
    case NodeKind::let:
      slots[x->slot] = eval(x->kids[0]);
      exec(x->kids[1]);
      return;
    case NodeKind::assign: {
      const auto& dims = x->out->spec().dims;
      std::size_t n = dims.size();
      double v = eval(x->kids[n]).val;
      if (probe_) {
        if (x->aop == AssignOp::add && v != 0) {
          throw SummationOverInterval("summation of a nonzero value over a positive-length "
                                      "interval into " + x->out->spec().name);
        }
        return;
      }
      std::vector<Coord> path;
      path.reserve(n);
      bool cont = false;
      for (std::size_t i = 0; i < n; ++i) {
        const XNode* k = x->kids[i];
        if (dims[i].continuous) {
          cont = true;
          if (k->kind == NodeKind::iv_pair) {
            path.emplace_back(Iv{eval(k->kids[0]), eval(k->kids[1])});
          } else {
            Lim c = eval(k);
            path.emplace_back(Iv{c, c});
          }
        } else {
          Lim c = eval(k);
          if (c.eps != 0 || c.val != std::floor(c.val) || c.val < 0 ||
              c.val >= static_cast<double>(dims[i].size)) {
            throw std::out_of_range("output " + x->out->spec().name + " coordinate " +
                                    to_string(c) + " outside dense rank " + std::to_string(i));
          }
          path.emplace_back(static_cast<std::int64_t>(c.val));
        }
      }
      if (cont) ++stats.pieces_emitted;
      x->out->update(std::move(path), x->aop, v);
      return;
    }
    case NodeKind::while_: {
      Lim cursor = eval(x->kids[0]);
      for (const auto& s : x->steps) slots[s.slot] = eval(s.seek);
      while (true) {
        Lim hi = eval(x->kids[1]);
        if (hi < cursor) break;
        Lim cstop = hi;
        for (const auto& s : x->steps) cstop = std::min(cstop, eval(s.stop));
        slots[x->slot] = cursor;
        slots[x->slot2] = cstop;
        ++stats.segments_visited;
        exec(x->kids[2]);
        for (const auto& s : x->steps) {
          if (eval(s.stop) == cstop) slots[s.slot] = Lim(slots[s.slot].val + 1);
        }
        cursor = add_eps(cstop);
        if (cstop == Lim::pos_inf()) break;
      }
      return;
    }
    case NodeKind::point_only: {
      Lim len = eval(x->kids[0]);
      if (len.val == 0) {
        exec(x->kids[1]);
      } else if (x->flag) {
        bool saved = probe_;
        probe_ = true;
        exec(x->kids[1]);
        probe_ = saved;
      }
      return;
    }
    default: throw std::logic_error("exec on an expression node");
  }
}

}  // namespace

RunResult run_plan(const NodePtr& plan, const Bindings& inputs,
                   const std::vector<OutputSpec>& outputs) {
  std::map<std::string, OutputBuilder> outs;
  for (const auto& o : outputs) outs.emplace(o.name, OutputBuilder(o));
  Interp in(inputs, outs);
  XPtr root = in.compile(plan);
  in.exec(root);
  RunResult r;
  r.stats = in.stats;
  for (const auto& [name, b] : outs) {
    ContTensor t = b.finalize();
    for (double v : t.values) {
      if (std::isnan(v)) {
        r.diagnostics.push_back("output " + name + " contains NaN");
        break;
      }
    }
    r.outputs.emplace(name, std::move(t));
  }
  return r;
}

Lim eval_closed(const NodePtr& e, const Bindings& inputs) {
  std::map<std::string, OutputBuilder> none;
  Interp in(inputs, none);
  XPtr x = in.compile(e);
  return in.eval(x);
}

}  // namespace ct
