#include <cmath>
#include <random>

#include "ctensor/compiler.hpp"
#include "ctensor/lang.hpp"
#include "ctensor/oracle.hpp"
#include "doctest.h"

using namespace ct;

namespace {

Iv cl(double a, double b) { return Iv{Lim(a), Lim(b)}; }
Iv pt(double a) { return Iv{Lim(a), Lim(a)}; }

ContTensor vec(const std::string& name, std::vector<std::pair<Iv, double>> pieces, bool pin = false) {
  std::vector<Entry> es;
  for (auto& [iv, v] : pieces) es.push_back({{iv}, v});
  return build_tensor(name, {pin ? LevelSpec::pinpoint() : LevelSpec::interval()}, es);
}

// Sorted disjoint random pieces with endpoints on `grid`.
ContTensor random_vec(const std::string& name, std::mt19937& rng, int max_pieces, double grid) {
  std::uniform_int_distribution<int> count(0, max_pieces), gap(0, 6), width(0, 6), val(1, 9);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::pair<Iv, double>> ps;
  int at = -40;
  for (int n = count(rng); n > 0; --n) {
    int s = at + gap(rng) + 1, e = s + width(rng);
    Iv iv{Lim(s * grid, coin(rng) ? 0 : 1), Lim(e * grid, coin(rng) ? 0 : -1)};
    if (!iv.empty()) ps.push_back({iv, static_cast<double>(val(rng))});
    at = e + 1;
  }
  return vec(name, ps);
}

double scalar(const ContTensor& t) { return t.values.empty() ? t.fill : t.values.at(0); }

const char* kDot = "for i = -inf:inf\n  s += x[i] * y[i] * d(i)\n";

}  // namespace

TEST_CASE("oracle on the interval dot fixture") {
  Bindings in{{"x", vec("x", {{cl(1, 3), 1.0}, {cl(4.1, 5.1), 2.0}})}, {"y", vec("y", {{cl(2, 5), 1.0}})}};
  auto r = oracle_eval(parse_program(kDot), in);
  CHECK(scalar(r.outputs.at("s")) == doctest::Approx(2.8).epsilon(1e-12));
  // 5 pieces of x against 3 of y, only overlapping pairs survive
  CHECK(r.tuples_visited <= 5 * 3);
  CHECK(r.stored_products == 2);
}

TEST_CASE("oracle dot sum over pinpoints") {
  Bindings in{{"x", vec("x", {{pt(1), 7.0}, {pt(3), 2.0}, {pt(5.1), 8.0}}, true)},
              {"y", vec("y", {{pt(3), 2.0}, {pt(4), 9.0}, {pt(5.1), 5.0}}, true)}};
  auto r = oracle_eval(parse_program("for i = -inf:inf\n  s += x[i] * y[i]\n"), in);
  CHECK(scalar(r.outputs.at("s")) == 44);
}

TEST_CASE("oracle masked convolution tuple count") {
  Bindings in{{"Mask", vec("Mask", {{pt(0.5), 1.0}}, true)},
              {"A", vec("A", {{cl(0, 2), 1.0}, {cl(3, 4), 5.0}})},
              {"B", vec("B", {{cl(-1, 1), 2.0}})}};
  auto prog = parse_program("for i = -inf:inf\n if Mask[i]\n  for j = -inf:inf\n   Z[i] += A[i+j]*B[j]*d(j)\n");
  auto r = oracle_eval(prog, in);
  // (1 point + 2 gaps) outer regions; inner (2 + 3 gaps) x (1 + 2 gaps) tuples at most
  CHECK(r.tuples_visited <= 3 + 3 * (5 * 3));
  auto c = compile_program(prog, in);
  auto got = run_plan(c.post, in, c.outputs);
  std::string why;
  CHECK_MESSAGE(tensors_match(got.outputs.at("Z"), r.outputs.at("Z"), 1e-12, &why), why);
  CHECK(tensor_eval(r.outputs.at("Z"), {0.5}) == doctest::Approx(2.0 * 1.5));
}

TEST_CASE("empty inputs give fill-only results") {
  Bindings in{{"x", vec("x", {})}, {"y", vec("y", {{cl(0, 1), 3.0}})}};
  auto r = oracle_eval(parse_program(kDot), in);
  CHECK(scalar(r.outputs.at("s")) == 0);
  auto z = riemann_check(parse_program(kDot), in, 1e-3, -2, 2);
  CHECK(scalar(z.at("s")) == 0);
}

TEST_CASE("compiled dot integral matches the oracle on random inputs") {
  std::mt19937 rng(7);
  auto prog = parse_program(kDot);
  for (int trial = 0; trial < 200; ++trial) {
    Bindings in{{"x", random_vec("x", rng, 8, 0.05)}, {"y", random_vec("y", rng, 8, 0.05)}};
    auto o = oracle_eval(prog, in);
    auto c = compile_program(prog, in);
    auto r = run_plan(c.post, in, c.outputs);
    std::string why;
    REQUIRE_MESSAGE(tensors_match(r.outputs.at("s"), o.outputs.at("s"), 1e-9, &why), why);
    CHECK(r.stats.multiplies == o.stored_products);
  }
}

TEST_CASE("riemann sums converge to the plan") {
  Bindings in{{"x", vec("x", {{cl(1, 3), 1.0}, {cl(4.1, 5.1), 2.0}})}, {"y", vec("y", {{cl(2, 5), 1.0}})}};
  auto prog = parse_program(kDot);
  auto c = compile_program(prog, in);
  double exact = scalar(run_plan(c.post, in, c.outputs).outputs.at("s"));
  double approx = scalar(riemann_check(prog, in, 1e-3, 0, 6).at("s"));
  CHECK(std::fabs(exact - approx) <= 5e-3);
  CHECK_THROWS_AS(riemann_check(prog, in, 1e-3), Error);

  // breakpoints off the sampling grid so the error is visible
  std::mt19937 rng(11);
  double err_h = 0, err_h2 = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Bindings r{{"x", random_vec("x", rng, 6, 0.0377)}, {"y", random_vec("y", rng, 6, 0.0413)}};
    auto rc = compile_program(prog, r);
    double ex = scalar(run_plan(rc.post, r, rc.outputs).outputs.at("s"));
    err_h += std::fabs(ex - scalar(riemann_check(prog, r, 1e-2, -3, 3).at("s")));
    err_h2 += std::fabs(ex - scalar(riemann_check(prog, r, 5e-3, -3, 3).at("s")));
  }
  CHECK(err_h > 0);
  CHECK(err_h2 <= 0.75 * err_h);
}

TEST_CASE("oracle enforces the summation rule") {
  Bindings in{{"A", vec("A", {{cl(0, 2), 1.0}})}};
  auto prog = parse_program("for i = -inf:inf\n s += A[i]\n");
  CHECK_THROWS_AS(oracle_eval(prog, in), SummationOverInterval);
  CHECK(scalar(oracle_eval(prog, in, true).outputs.at("s")) == 0);
}

TEST_CASE("tensors_match detects closure differences") {
  auto a = vec("a", {{iv_from_kind(1.0, 3.0, Closure::right_open), 1.0}});
  auto b = vec("b", {{cl(1, 3), 1.0}});
  std::string why;
  CHECK_FALSE(tensors_match(a, b, 1e-9, &why));
  CHECK(why.find("3") != std::string::npos);
  CHECK(tensors_match(a, a, 0));
}
