#include "ctensor/ir.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ct::ir {

namespace {

std::shared_ptr<Node> make(NodeKind k) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  return n;
}

}  // namespace

NodePtr lit(const Lim& v) {
  auto n = make(NodeKind::lit);
  n->value = v;
  return n;
}

NodePtr lit(double v) { return lit(Lim(v)); }

NodePtr var(const std::string& name) {
  auto n = make(NodeKind::var);
  n->name = name;
  return n;
}

NodePtr call(Op op, std::vector<NodePtr> args) {
  auto n = make(NodeKind::call);
  n->op = op;
  n->args = std::move(args);
  return n;
}

NodePtr access(const std::string& tensor, int level, NodePtr pos, std::vector<NodePtr> idxs) {
  auto n = make(NodeKind::access);
  n->name = tensor;
  n->level = level;
  n->args.push_back(std::move(pos));
  for (auto& i : idxs) n->args.push_back(std::move(i));
  return n;
}

NodePtr diff(const std::string& index) {
  auto n = make(NodeKind::diff);
  n->name = index;
  return n;
}

NodePtr read(const std::string& tensor, NodePtr pos) {
  auto n = make(NodeKind::read);
  n->name = tensor;
  n->args = {std::move(pos)};
  return n;
}

NodePtr level_query(LevelQuery q, const std::string& tensor, int level, std::vector<NodePtr> args) {
  auto n = make(NodeKind::level);
  n->query = q;
  n->name = tensor;
  n->level = level;
  n->args = std::move(args);
  return n;
}

NodePtr iv_pair(NodePtr start, NodePtr stop) {
  auto n = make(NodeKind::iv_pair);
  n->args = {std::move(start), std::move(stop)};
  return n;
}

NodePtr looplet_ref(LoopletPtr lp) {
  auto n = make(NodeKind::looplet_ref);
  n->looplet = std::move(lp);
  return n;
}

NodePtr block(std::vector<NodePtr> stmts) {
  auto n = make(NodeKind::block);
  n->args = std::move(stmts);
  return n;
}

namespace {

NodePtr loop(NodeKind k, const std::string& idx, NodePtr lo, NodePtr hi, NodePtr body, bool pin) {
  auto n = make(k);
  n->name = idx;
  n->args = {std::move(lo), std::move(hi), std::move(body)};
  n->flag = pin;
  return n;
}

}  // namespace

NodePtr for_cont(const std::string& idx, NodePtr lo, NodePtr hi, NodePtr body, bool pin) {
  return loop(NodeKind::for_cont, idx, std::move(lo), std::move(hi), std::move(body), pin);
}

NodePtr for_disc(const std::string& idx, NodePtr lo, NodePtr hi, NodePtr body, bool pin) {
  return loop(NodeKind::for_disc, idx, std::move(lo), std::move(hi), std::move(body), pin);
}

NodePtr disc_loop(const std::string& v, NodePtr lo, NodePtr hi, NodePtr body) {
  return loop(NodeKind::disc_loop, v, std::move(lo), std::move(hi), std::move(body), false);
}

NodePtr if_(NodePtr cond, NodePtr body) {
  auto n = make(NodeKind::if_);
  n->args = {std::move(cond), std::move(body)};
  return n;
}

NodePtr let(const std::string& name, NodePtr value, NodePtr body) {
  auto n = make(NodeKind::let);
  n->name = name;
  n->args = {std::move(value), std::move(body)};
  return n;
}

NodePtr assign(AssignOp op, NodePtr lhs, NodePtr rhs) {
  auto n = make(NodeKind::assign);
  n->aop = op;
  n->args = {std::move(lhs), std::move(rhs)};
  return n;
}

NodePtr while_(const std::string& cursor, const std::string& cstop, NodePtr lo, NodePtr hi,
               std::vector<StepperSlot> steppers, NodePtr body) {
  auto n = make(NodeKind::while_);
  n->name = cursor;
  n->name2 = cstop;
  n->args = {std::move(lo), std::move(hi), std::move(body)};
  n->steppers = std::move(steppers);
  return n;
}

NodePtr point_only(NodePtr len, NodePtr body, bool strict) {
  auto n = make(NodeKind::point_only);
  n->args = {std::move(len), std::move(body)};
  n->flag = strict;
  return n;
}

NodePtr with_args(const NodePtr& n, std::vector<NodePtr> args) {
  auto c = std::make_shared<Node>(*n);
  c->args = std::move(args);
  return c;
}

bool is_lit(const NodePtr& n) { return n->kind == NodeKind::lit; }

bool is_lit(const NodePtr& n, double v) {
  return n->kind == NodeKind::lit && n->value.eps == 0 && n->value.val == v;
}

bool is_empty_block(const NodePtr& n) { return n->kind == NodeKind::block && n->args.empty(); }

bool is_stmt(const NodePtr& n) { return n->kind >= NodeKind::block; }

bool is_loop(const NodePtr& n) {
  return n->kind == NodeKind::for_cont || n->kind == NodeKind::for_disc;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::neg: return "-";
    case Op::lt: return "<";
    case Op::le: return "<=";
    case Op::gt: return ">";
    case Op::ge: return ">=";
    case Op::eq: return "==";
    case Op::ne: return "!=";
    case Op::land: return "&&";
    case Op::lor: return "||";
    case Op::lnot: return "!";
    case Op::max: return "max";
    case Op::min: return "min";
    case Op::sqrt: return "sqrt";
    case Op::abs: return "abs";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::add_eps: return "add_eps";
    case Op::sub_eps: return "sub_eps";
    case Op::length: return "length";
    case Op::is_int: return "is_int";
    case Op::ceil: return "ceil";
    case Op::floor: return "floor";
    case Op::drop_eps: return "drop_eps";
  }
  return "?";
}

const char* assign_op_name(AssignOp op) {
  switch (op) {
    case AssignOp::overwrite: return "=";
    case AssignOp::add: return "+=";
    case AssignOp::lor: return "|=";
    case AssignOp::land: return "&=";
    case AssignOp::max: return "max=";
    case AssignOp::min: return "min=";
  }
  return "?";
}

Lim assign_identity(AssignOp op) {
  switch (op) {
    case AssignOp::land: return Lim(1);
    case AssignOp::max: return Lim::neg_inf();
    case AssignOp::min: return Lim::pos_inf();
    default: return Lim(0);
  }
}

bool truthy(const Lim& v) { return v.val != 0 && !std::isnan(v.val); }

namespace {

bool is_integral(double x) { return std::isfinite(x) && x == std::floor(x); }

// Limit order, with NaN comparing false like IEEE.
int cmp3(const Lim& a, const Lim& b, bool& unordered) {
  unordered = std::isnan(a.val) || std::isnan(b.val);
  if (unordered) return 0;
  auto c = a <=> b;
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

}  // namespace

Lim apply_op(Op op, const Lim* a, std::size_t n) {
  auto need = [&](std::size_t k) {
    if (n != k) throw std::invalid_argument(std::string("operator ") + op_name(op) + " arity");
  };
  switch (op) {
    case Op::add: {
      Lim r = n ? a[0] : Lim(0);
      for (std::size_t i = 1; i < n; ++i) r = r + a[i];
      return r;
    }
    case Op::sub: need(2); return a[0] - a[1];
    case Op::mul: {
      double r = 1;
      for (std::size_t i = 0; i < n; ++i) r *= a[i].val;
      return Lim(r);
    }
    case Op::div: need(2); return Lim(a[0].val / a[1].val);
    case Op::neg: need(1); return Lim(-a[0].val, -a[0].eps);
    case Op::lt: case Op::le: case Op::gt: case Op::ge: case Op::eq: case Op::ne: {
      need(2);
      bool un = false;
      int c = cmp3(a[0], a[1], un);
      if (un) return Lim(op == Op::ne ? 1 : 0);
      bool r = op == Op::lt ? c < 0 : op == Op::le ? c <= 0 : op == Op::gt ? c > 0
             : op == Op::ge ? c >= 0 : op == Op::eq ? c == 0 : c != 0;
      return Lim(r ? 1 : 0);
    }
    case Op::land: {
      for (std::size_t i = 0; i < n; ++i) {
        if (!truthy(a[i])) return Lim(0);
      }
      return Lim(1);
    }
    case Op::lor: {
      for (std::size_t i = 0; i < n; ++i) {
        if (truthy(a[i])) return Lim(1);
      }
      return Lim(0);
    }
    case Op::lnot: need(1); return Lim(truthy(a[0]) ? 0 : 1);
    case Op::max: case Op::min: {
      if (n == 0) throw std::invalid_argument("max/min of nothing");
      Lim r = a[0];
      for (std::size_t i = 1; i < n; ++i) {
        if (std::isnan(a[i].val)) return a[i];
        if (op == Op::max ? r < a[i] : a[i] < r) r = a[i];
      }
      return r;
    }
    case Op::sqrt: need(1); return Lim(std::sqrt(a[0].val));
    case Op::abs: need(1); return Lim(std::fabs(a[0].val));
    case Op::sin: need(1); return Lim(std::sin(a[0].val));
    case Op::cos: need(1); return Lim(std::cos(a[0].val));
    case Op::add_eps: need(1); return add_eps(a[0]);
    case Op::sub_eps: need(1); return sub_eps(a[0]);
    case Op::length: {
      need(2);
      if (a[1] <= a[0]) return Lim(0);
      return Lim(drop_eps(a[1] - a[0]));
    }
    case Op::is_int: need(1); return Lim(a[0].eps == 0 && is_integral(a[0].val) ? 1 : 0);
    case Op::ceil: {
      need(1);
      double v = a[0].val;
      if (is_integral(v)) return Lim(a[0].eps > 0 ? v + 1 : v);
      return Lim(std::ceil(v));
    }
    case Op::floor: {
      need(1);
      double v = a[0].val;
      if (is_integral(v)) return Lim(a[0].eps < 0 ? v - 1 : v);
      return Lim(std::floor(v));
    }
    case Op::drop_eps: need(1); return Lim(a[0].val);
  }
  throw std::logic_error("unknown operator");
}

NodePtr transform(const NodePtr& n, const std::function<NodePtr(const NodePtr&)>& f) {
  bool changed = false;
  std::vector<NodePtr> args;
  args.reserve(n->args.size());
  for (const auto& a : n->args) {
    args.push_back(transform(a, f));
    changed |= args.back() != a;
  }
  std::vector<StepperSlot> steppers = n->steppers;
  for (auto& s : steppers) {
    auto seek = transform(s.seek, f), stop = transform(s.stop, f);
    changed |= seek != s.seek || stop != s.stop;
    s.seek = seek;
    s.stop = stop;
  }
  NodePtr cur = n;
  if (changed) {
    auto c = std::make_shared<Node>(*n);
    c->args = std::move(args);
    c->steppers = std::move(steppers);
    cur = c;
  }
  NodePtr r = f(cur);
  return r ? r : cur;
}

void visit(const NodePtr& n, const std::function<bool(const NodePtr&)>& f) {
  if (!f(n)) return;
  for (const auto& a : n->args) visit(a, f);
  for (const auto& s : n->steppers) {
    visit(s.seek, f);
    visit(s.stop, f);
  }
}

NodePtr substitute(const NodePtr& n, const std::string& name, const NodePtr& value) {
  return transform(n, [&](const NodePtr& x) -> NodePtr {
    if (x->kind == NodeKind::var && x->name == name) return value;
    return nullptr;
  });
}

bool mentions(const NodePtr& n, const std::string& name) {
  bool found = false;
  visit(n, [&](const NodePtr& x) {
    if (found) return false;
    if ((x->kind == NodeKind::var || x->kind == NodeKind::diff) && x->name == name) found = true;
    return !found;
  });
  return found;
}

namespace {

int prec(const NodePtr& n) {
  if (n->kind != NodeKind::call) return 100;
  switch (n->op) {
    case Op::lor: return 1;
    case Op::land: return 2;
    case Op::lt: case Op::le: case Op::gt: case Op::ge: case Op::eq: case Op::ne: return 3;
    case Op::add: case Op::sub: return 4;
    case Op::mul: case Op::div: return 5;
    case Op::neg: case Op::lnot: return 6;
    default: return 100;
  }
}

std::string join(const std::vector<NodePtr>& xs, std::size_t from, const char* sep) {
  std::string s;
  for (std::size_t i = from; i < xs.size(); ++i) {
    if (i > from) s += sep;
    s += print_expr(xs[i]);
  }
  return s;
}

std::string level_tag(const Node& n) {
  return n.name + "@" + std::to_string(n.level);
}

}  // namespace

std::string print_expr(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::lit: return to_string(n->value);
    case NodeKind::var: return n->name;
    case NodeKind::diff: return "d(" + n->name + ")";
    case NodeKind::call: {
      int p = prec(n);
      if (p == 100) return std::string(op_name(n->op)) + "(" + join(n->args, 0, ", ") + ")";
      auto wrap = [&](const NodePtr& c) {
        std::string s = print_expr(c);
        return prec(c) <= p ? "(" + s + ")" : s;
      };
      if (n->op == Op::neg || n->op == Op::lnot) return op_name(n->op) + wrap(n->arg(0));
      std::string s;
      for (std::size_t i = 0; i < n->args.size(); ++i) {
        if (i) s += std::string(" ") + op_name(n->op) + " ";
        s += wrap(n->args[i]);
      }
      return s;
    }
    case NodeKind::access:
      if (n->level == 0 && is_lit(n->arg(0), 0)) return n->name + "[" + join(n->args, 1, ", ") + "]";
      return level_tag(*n) + "(" + print_expr(n->arg(0)) + ")[" + join(n->args, 1, ", ") + "]";
    case NodeKind::read: return n->name + ".val[" + print_expr(n->arg(0)) + "]";
    case NodeKind::level: {
      static const char* names[] = {"left", "right", "last_right", "seek", "lookup", "dense_child"};
      return std::string(names[static_cast<int>(n->query)]) + "(" + level_tag(*n) + ", " +
             join(n->args, 0, ", ") + ")";
    }
    case NodeKind::iv_pair:
      return "[" + print_expr(n->arg(0)) + ", " + print_expr(n->arg(1)) + "]";
    case NodeKind::looplet_ref: return "<" + print_looplet(n->looplet) + ">";
    default: return "<stmt>";
  }
}

std::string print_stmt(const NodePtr& n, int indent) {
  std::string pad(indent, ' ');
  switch (n->kind) {
    case NodeKind::block: {
      if (n->args.empty()) return pad + "block()\n";
      std::string s;
      for (const auto& c : n->args) s += print_stmt(c, indent);
      return s;
    }
    case NodeKind::for_cont:
    case NodeKind::for_disc: {
      bool cont = n->kind == NodeKind::for_cont;
      std::string s = pad + "for " + n->name + " = " + print_expr(n->arg(0)) + ":" +
                      print_expr(n->arg(1)) + (cont ? " : real" : " : int");
      if (n->flag) s += "  # pinpoint";
      return s + "\n" + print_stmt(n->arg(2), indent + 2);
    }
    case NodeKind::disc_loop:
      return pad + "loop " + n->name + " = " + print_expr(n->arg(0)) + ":" + print_expr(n->arg(1)) +
             "\n" + print_stmt(n->arg(2), indent + 2);
    case NodeKind::if_:
      return pad + "if " + print_expr(n->arg(0)) + "\n" + print_stmt(n->arg(1), indent + 2);
    case NodeKind::let:
      return pad + "let " + n->name + " = " + print_expr(n->arg(0)) + "\n" +
             print_stmt(n->arg(1), indent + 2);
    case NodeKind::assign:
      return pad + print_expr(n->arg(0)) + " " + assign_op_name(n->aop) + " " +
             print_expr(n->arg(1)) + "\n";
    case NodeKind::while_: {
      std::string s = pad + "while " + n->name + " = " + print_expr(n->arg(0)) + ":" +
                      print_expr(n->arg(1)) + " (" + n->name2 + ")\n";
      for (const auto& st : n->steppers) {
        s += pad + "  step " + st.pvar + " = " + print_expr(st.seek) + " until " +
             print_expr(st.stop) + "\n";
      }
      return s + print_stmt(n->arg(2), indent + 2);
    }
    case NodeKind::point_only:
      return pad + "point_only " + print_expr(n->arg(0)) + (n->flag ? " strict" : "") + "\n" +
             print_stmt(n->arg(1), indent + 2);
    default: return pad + print_expr(n) + "\n";
  }
}

std::string print_looplet(const LoopletPtr& lp, int indent) {
  std::string pad(indent, ' ');
  switch (lp->kind) {
    case LoopletKind::run: return pad + "Run(" + print_expr(lp->body) + ")\n";
    case LoopletKind::phase: {
      std::string s = pad + "Phase(";
      if (lp->start) s += "start=" + print_expr(lp->start) + ", ";
      s += "stop=" + print_expr(lp->stop) + (lp->pinpoint ? ", pinpoint" : "") + ")\n";
      return s + print_looplet(lp->child, indent + 2);
    }
    case LoopletKind::sequence: {
      std::string s = pad + "Sequence\n";
      for (const auto& c : lp->children) s += print_looplet(c, indent + 2);
      return s;
    }
    case LoopletKind::stepper: {
      auto p = var(lp->pvar);
      std::string s = pad + "Stepper(seek=" + print_expr(lp->seek(var("target"))) +
                      ", stop=" + print_expr(lp->step_stop(p)) + ", next=" + lp->pvar + "+1)\n";
      return s + print_looplet(lp->step_body(p), indent + 2);
    }
    case LoopletKind::lookup: return pad + "Lookup(" + print_expr(lp->body) + ")\n";
  }
  return pad + "?\n";
}

std::string NameGen::fresh(const std::string& base) {
  return base + "_" + std::to_string(++counter_);
}

}  // namespace ct::ir
