#include <cctype>
#include <limits>

#include "ctensor/lang.hpp"

namespace ct {

using namespace ir;

namespace {

enum class Tok { ident, number, inf, punct, sep, eof };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto adv = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    int l = line, cl = col;
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') adv(1);
    } else if (c == '\n' || c == ';') {
      out.push_back({Tok::sep, std::string(1, c), l, cl});
      adv(1);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
    } else if (src.compare(i, 3, "\xE2\x88\x9E") == 0) {
      out.push_back({Tok::inf, "inf", l, cl});
      adv(3);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      out.push_back({Tok::number, src.substr(i, j - i), l, cl});
      adv(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string w = src.substr(i, j - i);
      out.push_back({(w == "inf" || w == "Inf") ? Tok::inf : Tok::ident, w, l, cl});
      adv(j - i);
    } else {
      static const char* two[] = {"<=", ">=", "==", "!=", "&&", "||", "+=", "|=", "&="};
      std::string p(1, c);
      for (const char* t : two) {
        if (src.compare(i, 2, t) == 0) p = t;
      }
      if (std::string("+-*/<>=!()[],:&|").find(c) == std::string::npos) {
        throw SyntaxError(std::string("unexpected character '") + c + "'", l, cl);
      }
      out.push_back({Tok::punct, p, l, cl});
      adv(p.size());
    }
  }
  out.push_back({Tok::eof, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  NodePtr program() {
    skip_seps();
    NodePtr s = stmt();
    skip_ends();
    if (peek().kind != Tok::eof) fail("expected end of program");
    return s;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return t_[std::min(i_ + k, t_.size() - 1)]; }
  const Token& next() { return t_[std::min(i_++, t_.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw SyntaxError(msg + (t.kind == Tok::eof ? " at end of input" : " near '" + t.text + "'"),
                      t.line, t.col);
  }
  bool is_punct(const char* p, std::size_t k = 0) const {
    return peek(k).kind == Tok::punct && peek(k).text == p;
  }
  bool is_word(const char* w) const { return peek().kind == Tok::ident && peek().text == w; }
  void expect(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    next();
  }
  std::string ident() {
    if (peek().kind != Tok::ident) fail("expected identifier");
    return next().text;
  }
  void skip_seps() {
    while (peek().kind == Tok::sep) next();
  }
  void skip_ends() {
    skip_seps();
    while (is_word("end")) {
      next();
      skip_seps();
    }
  }

  NodePtr stmt() {
    skip_seps();
    if (is_word("for")) return for_stmt();
    if (is_word("if")) {
      next();
      NodePtr cond = expr();
      if (is_punct(":")) next();
      NodePtr body = stmt();
      skip_one_end();
      return if_(cond, body);
    }
    if (is_word("let")) {
      next();
      std::string name = ident();
      expect("=");
      NodePtr v = expr();
      NodePtr body = stmt();
      skip_one_end();
      return let(name, v, body);
    }
    return assignment();
  }

  void skip_one_end() {
    std::size_t save = i_;
    skip_seps();
    if (is_word("end")) {
      next();
    } else {
      i_ = save;
    }
  }

  NodePtr for_stmt() {
    const Token& at = next();
    std::string idx = ident();
    expect("=");
    lits_.clear();
    NodePtr lo = expr();
    expect(":");
    NodePtr hi = expr();
    int kind = 0;  // 1 real, 2 int
    if (is_punct(":")) {
      next();
      std::string k = ident();
      if (k == "real") {
        kind = 1;
      } else if (k == "int") {
        kind = 2;
      } else {
        fail("expected 'real' or 'int'");
      }
    }
    if (kind == 0) {
      bool any_real = false, any_int = false;
      for (bool r : lits_) (r ? any_real : any_int) = true;
      if (any_real && any_int) {
        throw SyntaxError("loop " + idx + " mixes integer and real bounds", at.line, at.col);
      }
      if (!any_real && !any_int) {
        throw SyntaxError("loop " + idx + " needs ': real' or ': int'", at.line, at.col);
      }
      kind = any_real ? 1 : 2;
    }
    NodePtr body = stmt();
    skip_one_end();
    return kind == 1 ? for_cont(idx, lo, hi, body) : for_disc(idx, lo, hi, body);
  }

  NodePtr assignment() {
    std::string name = ident();
    std::vector<NodePtr> idxs;
    if (is_punct("[")) {
      next();
      if (!is_punct("]")) {
        idxs.push_back(expr());
        while (is_punct(",")) {
          next();
          idxs.push_back(expr());
        }
      }
      expect("]");
    }
    AssignOp op;
    if (is_punct("=")) {
      op = AssignOp::overwrite;
    } else if (is_punct("+=")) {
      op = AssignOp::add;
    } else if (is_punct("|=")) {
      op = AssignOp::lor;
    } else if (is_punct("&=")) {
      op = AssignOp::land;
    } else if ((is_word("max") || is_word("min")) && is_punct("=", 1)) {
      op = peek().text == "max" ? AssignOp::max : AssignOp::min;
      next();
    } else {
      fail("expected an assignment operator");
    }
    next();
    NodePtr rhs = expr();
    return assign(op, access(name, 0, lit(0.0), idxs), rhs);
  }

  NodePtr expr() { return binary(0); }

  // precedence levels: || && compare additive multiplicative
  NodePtr binary(int level) {
    if (level == 5) return unary();
    NodePtr lhs = binary(level + 1);
    while (true) {
      Op op;
      if (!match_op(level, op)) return lhs;
      next();
      NodePtr rhs = binary(level + 1);
      lhs = call(op, {lhs, rhs});
      if (level == 2 && match_op(2, op)) fail("chained comparison");
    }
  }

  bool match_op(int level, Op& op) const {
    if (peek().kind != Tok::punct) return false;
    const std::string& p = peek().text;
    switch (level) {
      case 0: if (p == "||") { op = Op::lor; return true; } return false;
      case 1: if (p == "&&") { op = Op::land; return true; } return false;
      case 2:
        if (p == "<") op = Op::lt;
        else if (p == "<=") op = Op::le;
        else if (p == ">") op = Op::gt;
        else if (p == ">=") op = Op::ge;
        else if (p == "==") op = Op::eq;
        else if (p == "!=") op = Op::ne;
        else return false;
        return true;
      case 3:
        if (p == "+") op = Op::add;
        else if (p == "-") op = Op::sub;
        else return false;
        return true;
      case 4:
        if (p == "*") op = Op::mul;
        else if (p == "/") op = Op::div;
        else return false;
        return true;
    }
    return false;
  }

  NodePtr unary() {
    if (is_punct("-")) {
      next();
      NodePtr x = unary();
      if (x->kind == NodeKind::lit) return lit(Lim(-x->value.val, -x->value.eps));
      return call(Op::neg, {x});
    }
    if (is_punct("+")) {
      next();
      return unary();
    }
    if (is_punct("!")) {
      next();
      return call(Op::lnot, {unary()});
    }
    return primary();
  }

  NodePtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::number) {
      next();
      lits_.push_back(t.text.find_first_of(".eE") != std::string::npos);
      return lit(std::stod(t.text));
    }
    if (t.kind == Tok::inf) {
      next();
      lits_.push_back(true);
      return lit(Lim::pos_inf());
    }
    if (is_punct("(")) {
      next();
      NodePtr e = expr();
      expect(")");
      return e;
    }
    if (t.kind != Tok::ident) fail("expected an expression");
    std::string name = next().text;
    if (is_punct("[")) {
      next();
      std::vector<NodePtr> idxs;
      if (!is_punct("]")) {
        idxs.push_back(expr());
        while (is_punct(",")) {
          next();
          idxs.push_back(expr());
        }
      }
      expect("]");
      return access(name, 0, lit(0.0), idxs);
    }
    if (is_punct("(")) {
      next();
      if (name == "d") {
        std::string idx = ident();
        expect(")");
        return diff(idx);
      }
      std::vector<NodePtr> args{expr()};
      while (is_punct(",")) {
        next();
        args.push_back(expr());
      }
      expect(")");
      static const std::pair<const char*, Op> fns[] = {{"max", Op::max}, {"min", Op::min},
                                                       {"sqrt", Op::sqrt}, {"abs", Op::abs},
                                                       {"sin", Op::sin}, {"cos", Op::cos}};
      for (const auto& [fname, op] : fns) {
        if (name == fname) {
          bool unary_fn = op != Op::max && op != Op::min;
          if (unary_fn && args.size() != 1) fail(name + " takes one argument");
          if (!unary_fn && args.size() < 2) fail(name + " takes at least two arguments");
          return call(op, args);
        }
      }
      throw SyntaxError("unknown function " + name, t.line, t.col);
    }
    return var(name);
  }

  std::vector<Token> t_;
  std::size_t i_ = 0;
  std::vector<bool> lits_;  // literal kinds seen while parsing loop bounds
};

void collect_free(const NodePtr& n, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (n->kind) {
    case NodeKind::var:
      if (!bound.count(n->name)) out.insert(n->name);
      return;
    case NodeKind::for_cont:
    case NodeKind::for_disc:
    case NodeKind::disc_loop: {
      collect_free(n->arg(0), bound, out);
      collect_free(n->arg(1), bound, out);
      bool fresh = bound.insert(n->name).second;
      collect_free(n->arg(2), bound, out);
      if (fresh) bound.erase(n->name);
      return;
    }
    case NodeKind::let: {
      collect_free(n->arg(0), bound, out);
      bool fresh = bound.insert(n->name).second;
      collect_free(n->arg(1), bound, out);
      if (fresh) bound.erase(n->name);
      return;
    }
    default:
      for (const auto& a : n->args) collect_free(a, bound, out);
  }
}

}  // namespace

NodePtr parse_program(const std::string& src) { return Parser(lex(src)).program(); }

std::set<std::string> free_params(const NodePtr& prog) {
  std::set<std::string> bound, out;
  collect_free(prog, bound, out);
  return out;
}

NodePtr bind_params(const NodePtr& prog, const std::map<std::string, double>& params) {
  NodePtr out = prog;
  for (const auto& name : free_params(prog)) {
    auto it = params.find(name);
    if (it == params.end()) throw BindingError("parameter " + name + " is not bound (use --param)");
    out = substitute(out, name, lit(it->second));
  }
  return out;
}

}  // namespace ct
