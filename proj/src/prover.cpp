#include <cmath>
#include <functional>
#include <map>

#include "ctensor/compiler.hpp"

namespace ct {

using namespace ir;

namespace {

// atom + c + k*eps; atom "" is the constant zero. inf = +-1 for the
// infinite literals.
struct Term {
  std::string atom;
  double c = 0;
  int k = 0;
  int inf = 0;
};

// Weight of a difference bound A - B <= (c, k), ordered lexicographically.
struct W {
  double c = 0;
  int k = 0;
  W operator+(const W& o) const { return {c + o.c, k + o.k}; }
  bool operator<(const W& o) const { return c < o.c || (c == o.c && k < o.k); }
  bool operator<=(const W& o) const { return !(o < *this); }
};

Term term(const NodePtr& e) {
  if (e->kind == NodeKind::lit) {
    if (std::isinf(e->value.val)) return {"", 0, 0, e->value.val > 0 ? 1 : -1};
    return {"", e->value.val, e->value.eps, 0};
  }
  if (e->kind == NodeKind::call) {
    if (e->op == Op::add_eps || e->op == Op::sub_eps) {
      Term t = term(e->arg(0));
      t.k += e->op == Op::add_eps ? 1 : -1;
      return t;
    }
    if ((e->op == Op::add || e->op == Op::sub) && e->args.size() == 2 && is_lit(e->arg(1)) &&
        std::isfinite(e->arg(1)->value.val)) {
      Term t = term(e->arg(0));
      if (t.inf) return t;
      double v = e->arg(1)->value.val;
      int k = e->arg(1)->value.eps;
      if (e->op == Op::add) {
        t.c += v;
        t.k += k;
      } else {
        t.c -= v;
        t.k -= k;
      }
      return t;
    }
  }
  return {print_expr(e), 0, 0, 0};
}

using Graph = std::map<std::string, std::map<std::string, W>>;

void add_edge(Graph& g, const Term& a, const Term& b) {
  if (a.inf || b.inf) return;
  W w{b.c - a.c, b.k - a.k};
  auto& slot = g[a.atom];
  auto it = slot.find(b.atom);
  if (it == slot.end() || w < it->second) slot[b.atom] = w;
}

// Tightest derivable bound on A - B, if any (Bellman-Ford from A).
bool shortest(const Graph& g, const std::string& from, const std::string& to, W& out) {
  std::map<std::string, W> dist{{from, W{}}};
  for (std::size_t round = 0; round <= g.size() + 1; ++round) {
    bool changed = false;
    for (const auto& [u, du] : std::map<std::string, W>(dist)) {
      auto it = g.find(u);
      if (it == g.end()) continue;
      for (const auto& [v, w] : it->second) {
        W nd = du + w;
        auto dv = dist.find(v);
        if (dv == dist.end() || nd < dv->second) {
          dist[v] = nd;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  auto it = dist.find(to);
  if (it == dist.end()) return false;
  out = it->second;
  return true;
}

bool prove_terms(const Graph& g, const NodePtr& a, const NodePtr& b) {
  Term ta = term(a), tb = term(b);
  if (ta.inf == -1 || tb.inf == 1) return true;
  if (ta.inf == 1 || tb.inf == -1) return false;
  W target{tb.c - ta.c, tb.k - ta.k};
  if (ta.atom == tb.atom) return W{} <= target;
  W d;
  return shortest(g, ta.atom, tb.atom, d) && d <= target;
}

bool is_call(const NodePtr& n, Op op) { return n->kind == NodeKind::call && n->op == op; }

}  // namespace

void FactSet::add_le(const NodePtr& a, const NodePtr& b) {
  std::string key = print_expr(a) + " <= " + print_expr(b);
  if (!keys_.insert(key).second) return;
  facts_.emplace_back(a, b);
}

bool FactSet::prove_le(const NodePtr& a, const NodePtr& b) const {
  if (is_call(a, Op::max)) {
    for (const auto& x : a->args) {
      if (!prove_le(x, b)) return false;
    }
    return true;
  }
  if (is_call(b, Op::min)) {
    for (const auto& y : b->args) {
      if (!prove_le(a, y)) return false;
    }
    return true;
  }
  if (is_call(a, Op::min)) {
    for (const auto& x : a->args) {
      if (prove_le(x, b)) return true;
    }
    return false;
  }
  if (is_call(b, Op::max)) {
    for (const auto& y : b->args) {
      if (prove_le(a, y)) return true;
    }
    return false;
  }
  Graph g;
  for (const auto& [x, y] : facts_) add_edge(g, term(x), term(y));
  return prove_terms(g, a, b);
}

namespace {

struct BoundsPass {
  const FactSet& facts;
  std::map<std::string, NodePtr> env;

  NodePtr expand(const NodePtr& e) {
    return transform(e, [&](const NodePtr& x) -> NodePtr {
      if (x->kind != NodeKind::var) return nullptr;
      auto it = env.find(x->name);
      return it == env.end() ? nullptr : it->second;
    });
  }

  NodePtr prune(const NodePtr& v) {
    if (!is_call(v, Op::max) && !is_call(v, Op::min)) return v;
    bool is_max = v->op == Op::max;
    std::vector<NodePtr> keep(v->args.begin(), v->args.end());
    for (std::size_t i = 0; i < keep.size();) {
      bool redundant = false;
      for (std::size_t j = 0; j < keep.size() && !redundant; ++j) {
        if (j == i) continue;
        NodePtr a = expand(keep[i]), b = expand(keep[j]);
        redundant = is_max ? facts.prove_le(a, b) : facts.prove_le(b, a);
      }
      if (redundant && keep.size() > 1) {
        keep.erase(keep.begin() + static_cast<long>(i));
      } else {
        ++i;
      }
    }
    return keep.size() == 1 ? keep[0] : call(v->op, keep);
  }

  // Every statement is `+= length(s, e) * ...` for the guarded s, e: when
  // the guard fails the clamped length is 0 and the update is a no-op.
  static bool clamped_measure(const NodePtr& body, const NodePtr& s, const NodePtr& e) {
    std::vector<NodePtr> stmts = body->kind == NodeKind::block ? body->args : std::vector<NodePtr>{body};
    if (stmts.empty()) return false;
    std::string want = print_expr(call(Op::length, {s, e}));
    for (const auto& st : stmts) {
      if (st->kind != NodeKind::assign || st->aop != AssignOp::add) return false;
      for (std::size_t k = 1; k < st->arg(0)->args.size(); ++k) {
        if (st->arg(0)->args[k]->kind == NodeKind::iv_pair) return false;
      }
      const NodePtr& r = st->arg(1);
      bool found = print_expr(r) == want;
      if (is_call(r, Op::mul)) {
        for (const auto& f : r->args) found = found || print_expr(f) == want;
      }
      if (!found) return false;
    }
    return true;
  }

  NodePtr run(const NodePtr& n) {
    switch (n->kind) {
      case NodeKind::let: {
        NodePtr v = prune(n->arg(0));
        auto saved = env;
        env[n->name] = expand(v);
        NodePtr body = run(n->arg(1));
        env = std::move(saved);
        return let(n->name, v, body);
      }
      case NodeKind::if_: {
        NodePtr body = run(n->arg(1));
        const NodePtr& c = n->arg(0);
        if (is_call(c, Op::le)) {
          if (facts.prove_le(expand(c->arg(0)), expand(c->arg(1)))) return body;
          if (clamped_measure(body, c->arg(0), c->arg(1))) return body;
        }
        return if_(c, body);
      }
      case NodeKind::assign:
        return n;
      default: {
        if (!is_stmt(n)) return n;
        std::vector<NodePtr> args;
        for (const auto& a : n->args) args.push_back(is_stmt(a) ? run(a) : a);
        return with_args(n, args);
      }
    }
  }
};

}  // namespace

NodePtr optimize_bounds(const NodePtr& plan, const FactSet& facts) {
  BoundsPass p{facts, {}};
  return p.run(plan);
}

}  // namespace ct
