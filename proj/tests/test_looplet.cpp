#include <random>

#include "ctensor/exec.hpp"
#include "ctensor/looplet.hpp"
#include "doctest.h"

using namespace ct;

namespace {

std::vector<WalkPiece> walk_fiber(const ContTensor& t, int level, Pos pos) {
  ir::NameGen names;
  Bindings b{{t.name, t}};
  auto lp = unfurl(t, level, ir::lit(double(pos)), ir::lit(0.0), {}, names);
  return walk_looplet(lp, Iv::everything(), [&](const NodePtr& e) { return eval_closed(e, b); });
}

double payload_value(const ContTensor& t, const WalkPiece& w) {
  return eval_closed(w.payload, {{t.name, t}}).val;
}

void check_tiling(const std::vector<WalkPiece>& ws) {
  REQUIRE(!ws.empty());
  CHECK(ws.front().range.start == Lim::neg_inf());
  CHECK(ws.back().range.stop == Lim::pos_inf());
  for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
    CHECK(add_eps(ws[i].range.stop) == ws[i + 1].range.start);
  }
}

}  // namespace

TEST_CASE("interval level with two pieces") {
  auto fx = build_tensor("x", {LevelSpec::interval()},
                         {{{Iv{Lim(1), Lim(3)}}, 1.0}, {{Iv{Lim(4.1), Lim(5.1)}}, 2.0}});
  ir::NameGen names;
  auto lp = unfurl(fx, 0, ir::lit(0.0), ir::lit(0.0), {}, names);
  CHECK(lp->kind == LoopletKind::sequence);
  CHECK(lp->children.at(0)->child->kind == LoopletKind::stepper);
  auto ws = walk_fiber(fx, 0, 0);
  check_tiling(ws);
  REQUIRE(ws.size() == 5);
  CHECK(payload_value(fx, ws[1]) == 1);
  CHECK(payload_value(fx, ws[3]) == 2);
  CHECK(ws[3].range == Iv{Lim(4.1), Lim(5.1)});
}

TEST_CASE("single piece unfurls without a stepper") {
  auto t = build_tensor("a", {LevelSpec::interval()}, {{{Iv{Lim(1), Lim(3)}}, 7.0}});
  ir::NameGen names;
  auto lp = unfurl(t, 0, ir::lit(0.0), ir::lit(0.0), {}, names);
  REQUIRE(lp->kind == LoopletKind::sequence);
  REQUIRE(lp->children.size() == 3);
  Bindings b{{"a", t}};
  CHECK(eval_closed(lp->children[0]->stop, b) == Lim(1, -1));
  CHECK(eval_closed(lp->children[1]->stop, b) == Lim(3, 0));
  CHECK(eval_closed(lp->children[2]->stop, b) == Lim::pos_inf());
  check_tiling(walk_fiber(t, 0, 0));
}

TEST_CASE("empty fiber is one fill phase") {
  auto t = build_tensor("e", {LevelSpec::interval()}, {});
  auto ws = walk_fiber(t, 0, 0);
  REQUIRE(ws.size() == 1);
  CHECK(ws[0].range == Iv::everything());
  CHECK(payload_value(t, ws[0]) == 0);
}

TEST_CASE("pinpoint and regular levels") {
  auto p = build_tensor("p", {LevelSpec::pinpoint()}, {{{Iv::point(1)}, 1.0}, {{Iv::point(3)}, 2.0}});
  auto ws = walk_fiber(p, 0, 0);
  check_tiling(ws);
  REQUIRE(ws.size() == 5);
  CHECK(ws[1].pinpoint);
  CHECK(ws[1].range == Iv::point(1));
  CHECK(ws[2].range == Iv{Lim(1, 1), Lim(3, -1)});

  auto r = build_tensor("r", {LevelSpec::regular(1.0, 1.0)},
                        {{{iv_from_kind(0.0, 1.0, Closure::right_open)}, 1.0},
                         {{iv_from_kind(1.0, 2.0, Closure::right_open)}, 2.0},
                         {{iv_from_kind(2.0, 3.0, Closure::right_open)}, 3.0}});
  auto wr = walk_fiber(r, 0, 0);
  check_tiling(wr);
  int payload = 0;
  for (const auto& w : wr) {
    if (payload_value(r, w) != 0) {
      ++payload;
      CHECK(w.range.stop.eps == -1);
    }
  }
  CHECK(payload == 3);

  auto rp = build_tensor("rp", {LevelSpec::regular(1.0, 0.0)}, {{{Iv::point(0)}, 1.0}, {{Iv::point(2)}, 1.0}});
  auto wp = walk_fiber(rp, 0, 0);
  check_tiling(wp);
  CHECK(wp[1].pinpoint);
  CHECK(wp[1].range == Iv::point(0));
}

TEST_CASE("walked looplet agrees with tensor_eval") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> g(0, 40), k(0, 3), cnt(0, 8);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Entry> es;
    for (std::int64_t row = 0; row < 3; ++row) {
      std::vector<double> cuts;
      int n = cnt(rng);
      for (int i = 0; i < 2 * n; ++i) cuts.push_back(g(rng) * 0.25);
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      for (std::size_t i = 0; i + 1 < cuts.size(); i += 2) {
        es.push_back({{row, iv_from_kind(cuts[i], cuts[i + 1], Closure(k(rng)))}, double(i + 1)});
      }
    }
    auto t = build_tensor("t", {LevelSpec::dense(3), LevelSpec::interval()}, es);
    for (Pos row = 0; row < 3; ++row) {
      auto ws = walk_fiber(t, 1, row);
      check_tiling(ws);
      for (int q = 0; q < 200; ++q) {
        double x = (g(rng) - 2) * 0.125;
        for (const auto& w : ws) {
          if (w.range.contains(x)) {
            REQUIRE(payload_value(t, w) == tensor_eval(t, {double(row), x}));
          }
        }
      }
    }
  }
}

TEST_CASE("offset shifts the looplet into loop coordinates") {
  auto t = build_tensor("a", {LevelSpec::interval()},
                        {{{Iv{Lim(1), Lim(3)}}, 1.0}, {{Iv{Lim(5), Lim(6)}}, 2.0}});
  ir::NameGen names;
  Bindings b{{"a", t}};
  auto lp = unfurl(t, 0, ir::lit(0.0), ir::lit(2.0), {}, names);
  auto ws = walk_looplet(lp, Iv::everything(), [&](const NodePtr& e) { return eval_closed(e, b); });
  check_tiling(ws);
  CHECK(ws[1].range == Iv{Lim(-1), Lim(1)});
  CHECK(ws[3].range == Iv{Lim(3), Lim(4)});
}
