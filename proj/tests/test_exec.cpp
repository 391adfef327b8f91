#include "ctensor/exec.hpp"
#include "doctest.h"

using namespace ct;
using namespace ct::ir;

namespace {

OutputSpec cont1(AssignOp op = AssignOp::add) { return {"Z", op, {{true, 0}}}; }
Iv cl(double a, double b) { return Iv{Lim(a), Lim(b)}; }

}  // namespace

TEST_CASE("builder merges touching equal pieces and drops fill") {
  OutputBuilder b(cont1());
  b.update({iv_from_kind(2.0, 3.0, Closure::right_open)}, AssignOp::add, 1.0);
  b.update({iv_from_kind(0.0, 2.0, Closure::right_open)}, AssignOp::add, 1.0);
  b.update({cl(5, 6)}, AssignOp::add, 0.0);
  b.update({cl(7, 8)}, AssignOp::add, 4.0);
  b.update({cl(7, 8)}, AssignOp::add, -1.0);
  auto t = b.finalize();
  validate_tensor(t);
  auto pieces = tensor_pieces(t, false);
  REQUIRE(pieces.size() == 2);
  CHECK(std::get<Iv>(pieces[0].coords[0]) == iv_from_kind(0.0, 3.0, Closure::right_open));
  CHECK(pieces[1].value == 3);
}

TEST_CASE("builder rejects partial overlap") {
  OutputBuilder b(cont1(AssignOp::overwrite));
  b.update({cl(0, 2)}, AssignOp::overwrite, 1.0);
  b.update({cl(1, 3)}, AssignOp::overwrite, 2.0);
  CHECK_THROWS_AS(b.finalize(), OverlapError);
}

TEST_CASE("reductions start at their identity") {
  CHECK(combine(AssignOp::max, assign_identity(AssignOp::max).val, -5) == -5);
  CHECK(combine(AssignOp::min, assign_identity(AssignOp::min).val, 7) == 7);
  CHECK(combine(AssignOp::lor, 0, 3) == 1);
  CHECK(combine(AssignOp::land, 1, 0) == 0);
  CHECK(combine(AssignOp::overwrite, 4, 2) == 2);
}

TEST_CASE("hand-written plan: integral over a clamped region") {
  Bindings in;
  in.emplace("A", build_tensor("A", {LevelSpec::interval()}, {{{cl(1, 3)}, 2.0}}));
  NodePtr s = lit(Lim(0.5)), e = lit(Lim(2.0));
  NodePtr pos = level_query(LevelQuery::lookup, "A", 0, {lit(0.0), lit(1.5)});
  NodePtr plan = assign(AssignOp::add, access("s", 0, lit(0.0), {}),
                        call(Op::mul, {call(Op::length, {s, e}), read("A", pos)}));
  auto r = run_plan(plan, in, {{"s", AssignOp::add, {}}});
  CHECK(r.outputs.at("s").values.at(0) == 3.0);
  CHECK(r.stats.multiplies == 1);
}

TEST_CASE("unlowered plans are rejected") {
  Bindings in;
  NodePtr plan = for_cont("i", lit(0.0), lit(1.0), assign(AssignOp::add, access("s", 0, lit(0.0), {}), lit(1.0)));
  CHECK_THROWS_AS(run_plan(plan, in, {{"s", AssignOp::add, {}}}), UnloweredError);
  NodePtr unbound = assign(AssignOp::add, access("s", 0, lit(0.0), {}), var("q"));
  CHECK_THROWS_AS(run_plan(unbound, in, {{"s", AssignOp::add, {}}}), BindingError);
}

TEST_CASE("while loop co-iterates steppers") {
  // two fibers of breakpoints; count segments visited
  Bindings in;
  in.emplace("A", build_tensor("A", {LevelSpec::interval()},
                               {{{cl(0, 1)}, 1.0}, {{cl(2, 3)}, 1.0}, {{cl(4, 5)}, 1.0}}));
  NodePtr p = var("p");
  NodePtr right = level_query(LevelQuery::right, "A", 0, {p});
  NodePtr seek = level_query(LevelQuery::seek, "A", 0, {lit(0.0), lit(Lim::neg_inf())});
  NodePtr body = assign(AssignOp::add, access("n", 0, lit(0.0), {}), lit(1.0));
  NodePtr last = level_query(LevelQuery::last_right, "A", 0, {lit(0.0)});
  NodePtr plan = while_("c", "cs", lit(Lim::neg_inf()), last, {{"p", seek, right}}, body);
  auto r = run_plan(plan, in, {{"n", AssignOp::add, {}}});
  CHECK(r.outputs.at("n").values.at(0) == 3);
  CHECK(r.stats.segments_visited == 3);

  // running past the last piece is caught, not read out of bounds
  NodePtr past = while_("c", "cs", lit(Lim::neg_inf()), lit(Lim::pos_inf()), {{"p", seek, right}}, body);
  CHECK_THROWS(run_plan(past, in, {{"n", AssignOp::add, {}}}));
}
