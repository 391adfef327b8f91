#include <cmath>

#include "ctensor/compiler.hpp"
#include "ctensor/lang.hpp"
#include "doctest.h"

using namespace ct;

namespace {

ContTensor vec(const std::string& name, std::vector<std::pair<Iv, double>> pieces, bool pin = false) {
  std::vector<Entry> es;
  for (auto& [iv, v] : pieces) es.push_back({{iv}, v});
  return build_tensor(name, {pin ? LevelSpec::pinpoint() : LevelSpec::interval()}, es);
}

Iv cl(double a, double b) { return Iv{Lim(a), Lim(b)}; }
Iv pt(double a) { return Iv{Lim(a), Lim(a)}; }

Compiled compile(const std::string& src, const Bindings& in, CompileOptions opt = {}) {
  return compile_program(parse_program(src), in, opt);
}

double scalar(const RunResult& r, const std::string& name) {
  const auto& t = r.outputs.at(name);
  return t.values.empty() ? t.fill : t.values.at(0);
}

double run_scalar(const std::string& src, const Bindings& in, CompileOptions opt = {}) {
  auto c = compile(src, in, opt);
  return scalar(run_plan(c.post, in, c.outputs), c.outputs.at(0).name);
}

// Midpoint rule for int A[i+j] * B[j] dj; independent of the compiler.
double midpoint(const ContTensor& a, const ContTensor& b, double i) {
  const double lo = -10, hi = 10;
  const int n = 200000;
  const double h = (hi - lo) / n;
  double sum = 0;
  for (int k = 0; k < n; ++k) {
    double j = lo + (k + 0.5) * h;
    sum += tensor_eval(a, {i + j}) * tensor_eval(b, {j}) * h;
  }
  return sum;
}

const char* kDot = "for i = -inf:inf\n  s += x[i] * y[i] * d(i)\n";

}  // namespace

TEST_CASE("dot integral over interval vectors") {
  Bindings in{{"x", vec("x", {{cl(1, 3), 1.0}, {cl(4.1, 5.1), 2.0}})}, {"y", vec("y", {{cl(2, 5), 1.0}})}};
  // overlaps [2, 3] and [4.1, 5]
  double expect = 1.0 * (3 - 2) + 2.0 * (5 - 4.1);
  CHECK(run_scalar(kDot, in) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(run_scalar(kDot, in, {false, true}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("dot sum over pinpoints") {
  Bindings in{{"x", vec("x", {{pt(1), 7.0}, {pt(3), 2.0}, {pt(5.1), 8.0}}, true)},
              {"y", vec("y", {{pt(3), 2.0}, {pt(4), 9.0}, {pt(5.1), 5.0}}, true)}};
  CHECK(run_scalar("for i = -inf:inf\n  s += x[i] * y[i]\n", in) == 44);
}

TEST_CASE("single-interval plan keeps one integral and no guard after bound analysis") {
  Bindings in{{"a", vec("a", {{cl(1, 4), 2.0}})}, {"b", vec("b", {{cl(2, 6), 3.0}})}};
  const char* src = "for i = -inf:inf\n  s += a[i] * b[i] * d(i)\n";
  auto plain = compile(src, in);
  std::string p = ir::print_stmt(plain.post);
  CHECK(p.find("if ") != std::string::npos);
  CHECK(p.find("while") == std::string::npos);

  auto opt = compile(src, in, {false, true});
  std::string q = ir::print_stmt(opt.post);
  CHECK(q.find("if ") == std::string::npos);
  CHECK(q.find("-inf") == std::string::npos);
  CHECK(q.find("length(") != std::string::npos);
  int assigns = 0;
  ir::visit(opt.post, [&](const NodePtr& n) {
    assigns += n->kind == NodeKind::assign;
    return true;
  });
  CHECK(assigns == 1);
  auto r = run_plan(opt.post, in, opt.outputs);
  CHECK(scalar(r, "s") == doctest::Approx(2.0 * 3.0 * 2.0));
  CHECK(r.stats.multiplies == 1);
}

TEST_CASE("disjoint supports never multiply") {
  Bindings in{{"x", vec("x", {{cl(0, 1), 1.0}, {cl(2, 3), 1.0}})}, {"y", vec("y", {{cl(5, 6), 4.0}, {cl(7, 8), 1.0}})}};
  auto c = compile(kDot, in);
  auto r = run_plan(c.post, in, c.outputs);
  CHECK(scalar(r, "s") == 0);
  CHECK(r.stats.multiplies == 0);
}

TEST_CASE("shifted access and masked convolution") {
  Bindings in{{"Mask", vec("Mask", {{pt(0), 1.0}, {pt(2), 1.0}}, true)},
              {"A", vec("A", {{cl(0, 2), 1.0}, {cl(3, 4), 5.0}})},
              {"B", vec("B", {{cl(-1, 1), 2.0}})}};
  auto c = compile("for i = -inf:inf\n if Mask[i]\n  for j = -inf:inf\n   Z[i] += A[i+j]*B[j]*d(j)\n", in);
  auto r = run_plan(c.post, in, c.outputs);
  const auto& z = r.outputs.at("Z");
  for (double i : {0.0, 2.0}) {
    CHECK(tensor_eval(z, {i}) == doctest::Approx(midpoint(in.at("A"), in.at("B"), i)).epsilon(1e-4));
  }
  CHECK(tensor_eval(z, {1.0}) == 0);
}

TEST_CASE("continuous outputs keep interval coordinates") {
  Bindings in{{"A", vec("A", {{cl(0, 2), 1.0}, {cl(3, 4), 5.0}})}};
  auto c = compile("for i = -inf:inf\n  Z[i] = A[i] * 2\n", in);
  auto r = run_plan(c.post, in, c.outputs);
  const auto& z = r.outputs.at("Z");
  CHECK(tensor_eval(z, {1.0}) == 2);
  CHECK(tensor_eval(z, {3.5}) == 10);
  CHECK(tensor_eval(z, {2.5}) == 0);
}

TEST_CASE("layout and lowering errors") {
  Bindings in{{"D", build_tensor("D", {LevelSpec::dense(3)}, {{{std::int64_t{1}}, 2.0}})},
              {"A", vec("A", {{cl(0, 2), 1.0}})}};
  CHECK_THROWS_AS(compile("for i = 0.0:2.0\n s += D[i] * d(i)\n", in), LayoutError);
  CHECK_THROWS_AS(compile("for i = 0.0:2.0\n s += A[-i] * d(i)\n", in), LayoutError);
  CHECK_THROWS_AS(compile("for i = 0.0:2.0\n s += A[i] * i * d(i)\n", in), UnloweredError);
  CHECK(run_scalar("for k = 0:2\n s += D[k]\n", in) == 2);
}

TEST_CASE("point-only summation") {
  Bindings in{{"P", vec("P", {{pt(1), 3.0}, {pt(2.5), 4.0}}, true)}, {"A", vec("A", {{cl(0, 2), 1.0}})}};
  CHECK(run_scalar("for i = -inf:inf\n s += P[i]\n", in) == 7);
  // summing an interval-valued function over an interval region
  auto c = compile("for i = -inf:inf\n s += A[i]\n", in);
  CHECK_THROWS_AS(run_plan(c.post, in, c.outputs), SummationOverInterval);
  CHECK(run_scalar("for i = -inf:inf\n s += A[i]\n", in, {true, false}) == 0);
}

TEST_CASE("looplet dump and facts") {
  Bindings in{{"x", vec("x", {{cl(1, 3), 1.0}, {cl(4.1, 5.1), 2.0}})}, {"y", vec("y", {{cl(2, 5), 1.0}})}};
  auto c = compile(kDot, in);
  CHECK(c.looplets.find("Stepper") != std::string::npos);
  CHECK(c.facts.size() > 0);
}
