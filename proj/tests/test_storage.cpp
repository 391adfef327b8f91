#include <random>

#include "ctensor/storage.hpp"
#include "doctest.h"

using namespace ct;

namespace {

ContTensor make_fx() {
  return build_tensor("x", {LevelSpec::interval()},
                      {{{Iv{Lim(1), Lim(3)}}, 1.0}, {{Iv{Lim(4.1), Lim(5.1)}}, 2.0}});
}

}  // namespace

TEST_CASE("f_x evaluation") {
  auto fx = make_fx();
  validate_tensor(fx);
  CHECK(tensor_eval(fx, {2.0}) == 1);
  CHECK(tensor_eval(fx, {4.5}) == 2);
  CHECK(tensor_eval(fx, {3.5}) == 0);
  CHECK(tensor_eval(fx, {0.5}) == 0);
  CHECK(tensor_eval(fx, {6.0}) == 0);
  CHECK(tensor_eval(fx, {3.0}) == 1);
  CHECK(tensor_eval(fx, {4.1}) == 2);
  CHECK_THROWS_AS(tensor_eval(fx, {1.0, 2.0}), ArityError);
}

TEST_CASE("f_x pieces") {
  auto fx = make_fx();
  CHECK(tensor_pieces(fx, false).size() == 2);
  auto all = tensor_pieces(fx, true);
  REQUIRE(all.size() == 5);
  CHECK(std::get<Iv>(all[0].coords[0]) == Iv{Lim::neg_inf(), Lim(1, -1)});
  CHECK(std::get<Iv>(all[2].coords[0]) == Iv{Lim(3, 1), Lim(4.1, -1)});
  CHECK(std::get<Iv>(all[4].coords[0]) == Iv{Lim(5.1, 1), Lim::pos_inf()});
  CHECK(all[3].value == 2);

  auto empty = build_tensor("e", {LevelSpec::interval()}, {});
  auto ep = tensor_pieces(empty, true);
  REQUIRE(ep.size() == 1);
  CHECK(std::get<Iv>(ep[0].coords[0]) == Iv::everything());
}

TEST_CASE("builder rejects overlap and disorder") {
  CHECK_THROWS_AS(build_level(LevelSpec::interval(),
                              {{iv_from_kind(1.0, 3.0, Closure::right_open),
                                iv_from_kind(2.0, 4.0, Closure::right_open)}}),
                  OverlapError);
  CHECK_THROWS_AS(build_level(LevelSpec::interval(), {{Iv{Lim(4), Lim(5)}, Iv{Lim(1), Lim(2)}}}),
                  UnsortedError);
  CHECK_THROWS_AS(build_level(LevelSpec::interval(), {{Iv{Lim(1), Lim(3)}, Iv{Lim(3), Lim(4)}}}),
                  OverlapError);
  auto touching = build_level(LevelSpec::interval(), {{iv_from_kind(1.0, 3.0, Closure::right_open),
                                                       iv_from_kind(3.0, 4.0, Closure::right_open)}});
  CHECK(std::get<IntervalLevel>(touching).homogeneous);
  CHECK_FALSE(std::get<IntervalLevel>(touching).rclose);
  auto mixed = build_level(LevelSpec::interval(), {{iv_from_kind(1.0, 3.0, Closure::right_open),
                                                    iv_from_kind(3.0, 4.0, Closure::closed)}});
  CHECK_FALSE(std::get<IntervalLevel>(mixed).homogeneous);
  auto empty = build_level(LevelSpec::interval(), {{}});
  CHECK(std::get<IntervalLevel>(empty).ptr == std::vector<Pos>{0, 0});
}

TEST_CASE("regular level") {
  auto t = build_tensor("r", {LevelSpec::regular(1.0, 1.0)},
                        {{{iv_from_kind(0.0, 1.0, Closure::right_open)}, 1.0},
                         {{iv_from_kind(2.0, 3.0, Closure::right_open)}, 3.0}});
  CHECK(tensor_eval(t, {0.5}) == 1);
  CHECK(tensor_eval(t, {1.0}) == 0);
  CHECK(tensor_eval(t, {2.99}) == 3);
  auto pins = build_tensor("p", {LevelSpec::regular(1.0, 0.0)},
                           {{{Iv::point(0)}, 1.0}, {{Iv::point(2)}, 1.0}});
  CHECK(is_pinpoint_tensor(pins));
  CHECK(tensor_eval(pins, {2.0}) == 1);
  CHECK(tensor_eval(pins, {1.0}) == 0);
  CHECK_THROWS_AS(build_tensor("bad", {LevelSpec::regular(1.0, 1.0)},
                               {{{iv_from_kind(0.5, 1.5, Closure::right_open)}, 1.0}}),
                  SchemaError);
}

TEST_CASE("mixed dense and continuous ranks") {
  auto t = build_tensor("q", {LevelSpec::dense(2), LevelSpec::pinpoint(), LevelSpec::interval()},
                        {{{std::int64_t{1}, Iv::point(3), Iv{Lim(4), Lim(7)}}, 1.0},
                         {{std::int64_t{0}, Iv::point(5), Iv{Lim(0), Lim(1)}}, 2.0},
                         {{std::int64_t{1}, Iv::point(3), Iv{Lim(9), Lim(10)}}, 5.0}});
  validate_tensor(t);
  CHECK(tensor_eval(t, {1, 3, 5}) == 1);
  CHECK(tensor_eval(t, {1, 3, 9.5}) == 5);
  CHECK(tensor_eval(t, {0, 5, 0.5}) == 2);
  CHECK(tensor_eval(t, {0, 3, 0.5}) == 0);
  CHECK_THROWS_AS(tensor_eval(t, {2, 3, 5}), std::out_of_range);
  CHECK(tensor_pieces(t, false).size() == 3);
  CHECK_THROWS_AS(build_tensor("d", {LevelSpec::pinpoint()},
                               {{{Iv::point(1)}, 1.0}, {{Iv::point(1)}, 2.0}}),
                  OverlapError);
}

TEST_CASE("eval agrees with a linear scan of pieces") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> g(0, 40), k(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> cuts;
    for (int i = 0; i < 10; ++i) cuts.push_back(g(rng) * 0.25);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Entry> es;
    for (std::size_t i = 0; i + 1 < cuts.size(); i += 2) {
      Iv iv = iv_from_kind(cuts[i], cuts[i + 1], Closure(k(rng)));
      es.push_back({{iv}, double(i + 1)});
    }
    auto t = build_tensor("t", {LevelSpec::interval()}, es);
    auto pieces = tensor_pieces(t, true);
    for (int q = 0; q < 500; ++q) {
      double x = (g(rng) - 2) * 0.125;
      double scan = 0;
      int hits = 0;
      for (const auto& p : pieces) {
        if (std::get<Iv>(p.coords[0]).contains(x)) {
          scan = p.value;
          ++hits;
        }
      }
      REQUIRE(hits == 1);
      REQUIRE(tensor_eval(t, {x}) == scan);
    }
  }
}
