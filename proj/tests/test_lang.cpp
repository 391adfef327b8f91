#include "ctensor/lang.hpp"
#include "doctest.h"

using namespace ct;

namespace {

TensorSig sig(std::vector<LevelKind> kinds) {
  TensorSig s;
  for (auto k : kinds) {
    s.kinds.push_back(k);
    s.pinpoint.push_back(k == LevelKind::pinpoint);
  }
  return s;
}

bool has_rule(const std::vector<Diagnostic>& ds, const std::string& rule) {
  for (const auto& d : ds) {
    if (d.rule == rule) return true;
  }
  return false;
}

const auto I = LevelKind::interval;
const auto P = LevelKind::pinpoint;
const auto D = LevelKind::dense;

}  // namespace

TEST_CASE("parse integral dot product") {
  auto p = parse_program("for i = 0.0:9.0\n s += x[i] * y[i] * d(i)\nend\n");
  REQUIRE(p->kind == NodeKind::for_cont);
  CHECK(p->name == "i");
  const auto& a = p->arg(2);
  REQUIRE(a->kind == NodeKind::assign);
  CHECK(a->aop == AssignOp::add);
  bool has_d = false;
  ir::visit(a->arg(1), [&](const NodePtr& n) {
    has_d |= n->kind == NodeKind::diff && n->name == "i";
    return true;
  });
  CHECK(has_d);
}

TEST_CASE("loop kinds") {
  CHECK(parse_program("for id = 1:N\n Out[id] |= A[id]")->kind == NodeKind::for_disc);
  CHECK(parse_program("for i = -inf:inf; s += A[i]")->kind == NodeKind::for_cont);
  CHECK(parse_program("for i = -\xE2\x88\x9E:\xE2\x88\x9E; s += A[i]")->kind == NodeKind::for_cont);
  CHECK(parse_program("for r = -R:R : real; s += A[r]")->kind == NodeKind::for_cont);
  CHECK(parse_program("for c = 0:C-1 : int; s += A[c]")->kind == NodeKind::for_disc);
  CHECK_THROWS_AS(parse_program("for r = -R:R; s += A[r]"), SyntaxError);
  CHECK_THROWS_AS(parse_program("for r = 0:9.0; s += A[r]"), SyntaxError);
}

TEST_CASE("syntax errors carry a position") {
  try {
    parse_program("for i = 0.0:1.0\n  s += x[i");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(parse_program("s += "), SyntaxError);
  CHECK_THROWS_AS(parse_program("s += foo(1)"), SyntaxError);
}

TEST_CASE("print then parse is stable") {
  const char* progs[] = {
      "for i = -inf:inf\n  if Mask[i]\n    for j = -inf:inf\n      Z[i] += A[i+j]*B[j]*d(j)\n",
      "for dx=-1.7:1.7\n for dy=-1.7:1.7\n  if dx*dx+dy*dy <= 1.7*1.7\n   count += A[2.2+dx,3.9+dy]\n",
      "for r = -R:R : real\n for s = -R:R : real\n  if (r*r + s*s <= R*R)\n   for id = 0:N-1 : int\n"
      "    Out[id] |= Points[Ox+r,Oy+s,id]\n",
      "for i = 0.0:1.0; let w = 2 - i; s max= -A[i] / w + (1 - 2) - (3 - 4)",
  };
  for (const char* src : progs) {
    auto a = parse_program(src);
    std::string printed = ir::print_stmt(a);
    auto b = parse_program(printed);
    CHECK(ir::print_stmt(b) == printed);
  }
}

TEST_CASE("params") {
  auto p = parse_program("for r = -R:R : real; Out[r] = A[Ox + r]");
  CHECK(free_params(p) == std::set<std::string>{"Ox", "R"});
  CHECK_THROWS_AS(bind_params(p, {{"R", 1.0}}), BindingError);
  auto q = bind_params(p, {{"R", 1.5}, {"Ox", 2.0}});
  CHECK(free_params(q).empty());
}

TEST_CASE("validity rules") {
  Signatures s{{"A", sig({I})}, {"P", sig({P})}, {"B", sig({I})}};
  auto check = [&](const char* src, bool sum_skip = false) {
    return validate(parse_program(src), s, sum_skip);
  };
  CHECK(has_rule(check("for i = 0.0:10.0; s += A[i*i] * d(i)"), "R-INV"));
  CHECK(has_rule(check("for i = 0.0:10.0; s += A[sin(i)] * d(i)"), "R-INV"));
  CHECK(has_rule(check("for i = 0.0:10.0; s += A[2*i] * d(i)"), "R-INV"));
  CHECK(has_rule(check("for i = 0.0:10.0; A2[i] += i"), "R-PIN"));
  CHECK(has_rule(check("for i = 0.0:10.0; s += A[i]"), "R-SUM"));
  CHECK(check("for i = 0.0:10.0; s += A[i]", true).empty());
  CHECK(check("for i = 0.0:10.0; s += P[i] * i").empty());
  CHECK(check("for i = 0.0:10.0; s += P[i]").empty());
  CHECK(has_rule(check("for i = 0.0:10.0; s += A[i, i] * d(i)"), "R-ARITY"));
  CHECK(has_rule(check("for i = 0.0:10.0; s += Q[i] * d(i)"), "R-ARITY"));
  CHECK(has_rule(check("for i = 0.0:10.0; A[i] = A[i]"), "R-SCOPE"));
  CHECK(check("for i = -inf:inf; if P[i]; for j = -inf:inf; Z[i] += A[i+j]*B[j]*d(j)").empty());
  CHECK(has_rule(check("for i = 0.0:1.0; for j = 0.0:1.0; for k = 0.0:1.0; s += A[i+j+k]*d(i)*d(j)*d(k)"),
                 "R-INV"));
  CHECK(has_rule(check("for i = 0.0:1.0; Z[i + 1] = A[i]"), "R-INV"));
}

TEST_CASE("mixed dense and pinpoint dims") {
  Signatures s{{"Points", sig({P, P, P})}, {"Q", sig({D, P, I})}, {"Data", sig({D, D, I})}};
  auto radius = parse_program(
      "for r = -R:R : real\n for s = -R:R : real\n  if (r*r + s*s <= R*R)\n   for id = 0:N-1 : int\n"
      "    Out[id] |= Points[Ox+r,Oy+s,id]\n");
  CHECK(validate(radius, s).empty());
  auto count = parse_program(
      "for chr = 0:C-1 : int; for id = 0:N-1 : int; for jd = 0:M-1 : int; for x = -inf:inf\n"
      " if (Q[chr,id,x] && Data[chr,jd,x]); Count[chr,id] += 1");
  CHECK(has_rule(validate(count, s), "R-SUM"));
}
