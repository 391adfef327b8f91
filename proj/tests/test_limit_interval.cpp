#include <random>

#include "ctensor/interval.hpp"
#include "doctest.h"

using namespace ct;

TEST_CASE("limit arithmetic saturates") {
  CHECK(Lim(3, 1) + Lim(2, -1) == Lim(5, 0));
  CHECK(Lim(3, 0) + Lim(4, 0) == Lim(7, 0));
  CHECK((Lim(1, 1) + Lim(2, 1)).eps == 1);
  CHECK(Lim(3, 0) - Lim(3, -1) == Lim(0, 1));
  CHECK(Lim(5, 1) - Lim(2, 1) == Lim(3, 0));
  CHECK((Lim(0, -1) - Lim(0, 1)).eps == -1);
}

TEST_CASE("limit order") {
  CHECK(Lim(3, -1) < Lim(3, 0));
  CHECK_FALSE(Lim(3, 0) < Lim(3, 0));
  CHECK(Lim(2.5, 1) < Lim(3, -1));
  CHECK(Lim(3, 0) < 3.5);
  CHECK(drop_eps(Lim(3, -1)) == 3);
  CHECK(drop_eps(Lim(4.1, 1)) == 4.1);
  CHECK_THROWS_AS((void)(Lim(std::nan(""), 0) < Lim(1)), std::domain_error);
}

TEST_CASE("limit rendering") {
  CHECK(to_string(Lim(3, 1)) == "3+eps");
  CHECK(to_string(Lim(3, -1)) == "3-eps");
  CHECK(to_string(Lim::pos_inf()) == "+inf");
  CHECK(to_string(Lim(2.5)) == "2.5");
}

TEST_CASE("interval kinds") {
  auto a = iv_from_kind(1.0, 3.0, Closure::right_open);
  CHECK(a.start == Lim(1, 0));
  CHECK(a.stop == Lim(3, -1));
  CHECK(iv_is_pinpoint(iv_from_kind(2.0, 2.0, Closure::closed)));
  CHECK(iv_from_kind(5.0, 5.0, Closure::open).empty());
  CHECK(to_string(a) == "[1,3)");
  CHECK(to_string(iv_from_kind(1.0, 3.0, Closure::left_open)) == "(1,3]");
}

TEST_CASE("intersection and length") {
  Iv a{Lim(1), Lim(3)}, b{Lim(2), Lim(4)};
  CHECK(iv_intersect(a, b) == Iv{Lim(2), Lim(3)});
  CHECK(iv_intersect(iv_from_kind(1.0, 3.0, Closure::right_open), Iv{Lim(3), Lim(5)}).empty());
  CHECK(iv_is_pinpoint(iv_intersect(a, Iv{Lim(3), Lim(5)})));
  CHECK(iv_length(Iv{Lim(2), Lim(3)}) == 1);
  CHECK(iv_length(iv_from_kind(1.0, 3.0, Closure::right_open)) == 2);
  CHECK(iv_length(Iv::point(4.1)) == 0);
  CHECK_THROWS_AS(iv_length(Iv{Lim(3), Lim(1)}), std::domain_error);
  CHECK_THROWS_AS(iv_is_pinpoint(Iv{Lim(3), Lim(1)}), std::domain_error);
  CHECK_FALSE(iv_is_pinpoint(Iv{Lim(3), Lim(3, 1)}));
}

TEST_CASE("affine inverse") {
  Iv r = iv_apply_inverse(AffineMap<double>(2.2, 1), Iv{Lim(3), Lim(5)});
  CHECK(r.start.val == doctest::Approx(0.8));
  CHECK(r.stop.val == doctest::Approx(2.8));
  CHECK(iv_apply_inverse(AffineMap<double>(1, 1), iv_from_kind(1.0, 3.0, Closure::right_open)) ==
        iv_from_kind(0.0, 2.0, Closure::right_open));
  CHECK(iv_apply_inverse(AffineMap<double>(0, -1), Iv{Lim(1), Lim(3)}) == Iv{Lim(-3), Lim(-1)});
  CHECK(iv_apply_inverse(AffineMap<double>(0, -1), iv_from_kind(1.0, 3.0, Closure::right_open)) ==
        iv_from_kind(-3.0, -1.0, Closure::left_open));
  CHECK_THROWS_AS(AffineMap<double>(0, 2), std::invalid_argument);
}

TEST_CASE("generic over the endpoint type") {
  Limit<long> a(3, 1), b(2, -1);
  CHECK(a + b == Limit<long>(5, 0));
  Interval<long> x{Limit<long>(1), Limit<long>(4)};
  CHECK(iv_length(x) == 3);
}

TEST_CASE("membership sampling on 0.25 grid") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> g(-20, 20), k(0, 3);
  for (int n = 0; n < 2000; ++n) {
    double a0 = g(rng) * 0.25, a1 = g(rng) * 0.25, b0 = g(rng) * 0.25, b1 = g(rng) * 0.25;
    Iv a = iv_from_kind(std::min(a0, a1), std::max(a0, a1), Closure(k(rng)));
    Iv b = iv_from_kind(std::min(b0, b1), std::max(b0, b1), Closure(k(rng)));
    Iv c = iv_intersect(a, b);
    for (int i = -44; i <= 44; ++i) {
      double x = i * 0.125;
      REQUIRE(c.contains(x) == (a.contains(x) && b.contains(x)));
    }
  }
}
