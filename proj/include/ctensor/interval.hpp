#pragma once

#include <stdexcept>
#include <string>

#include "ctensor/limit.hpp"

namespace ct {

enum class Closure { closed, right_open, left_open, open };

/// Closed interval over limits. Empty iff start > stop; empty intervals are
/// kept as-is so callers can guard on `start <= stop`.
template <typename T>
struct Interval {
  Limit<T> start;
  Limit<T> stop;

  static Interval everything() { return {Limit<T>::neg_inf(), Limit<T>::pos_inf()}; }
  static Interval point(T x) { return {Limit<T>(x), Limit<T>(x)}; }

  bool empty() const { return stop < start; }
  bool contains(const Limit<T>& x) const { return start <= x && x <= stop; }
  bool contains(T x) const { return contains(Limit<T>(x)); }

  friend bool operator==(const Interval&, const Interval&) = default;
};

using Iv = Interval<double>;

template <typename T>
Interval<T> iv_from_kind(T a, T b, Closure kind) {
  switch (kind) {
    case Closure::closed: return {Limit<T>(a, 0), Limit<T>(b, 0)};
    case Closure::right_open: return {Limit<T>(a, 0), Limit<T>(b, -1)};
    case Closure::left_open: return {Limit<T>(a, 1), Limit<T>(b, 0)};
    case Closure::open: return {Limit<T>(a, 1), Limit<T>(b, -1)};
  }
  throw std::invalid_argument("bad closure kind");
}

template <typename T>
Interval<T> iv_intersect(const Interval<T>& a, const Interval<T>& b) {
  return {std::max(a.start, b.start), std::min(a.stop, b.stop)};
}

/// Lebesgue length; inclusiveness does not matter, so eps is dropped.
template <typename T>
T iv_length(const Interval<T>& a) {
  if (a.empty()) throw std::domain_error("length of an empty interval");
  T len = drop_eps(a.stop - a.start);
  return len < T(0) ? T(0) : len;
}

template <typename T>
bool iv_is_pinpoint(const Interval<T>& a) {
  if (a.empty()) throw std::domain_error("pinpoint test on an empty interval");
  return a.start.eps == 0 && a.stop.eps == 0 && a.start.val == a.stop.val;
}

/// Index map g(i) = scale * i + offset with scale restricted to +1 or -1.
template <typename T>
struct AffineMap {
  T offset{};
  int scale = 1;

  AffineMap() = default;
  AffineMap(T off, int s) : offset(off), scale(s) {
    if (s != 1 && s != -1) throw std::invalid_argument("AffineMap scale must be +1 or -1");
  }
  T operator()(T i) const { return scale * i + offset; }
};

/// Preimage of an interval under g. A reflection swaps the endpoints and
/// flips their eps tags.
template <typename T>
Interval<T> iv_apply_inverse(const AffineMap<T>& m, const Interval<T>& a) {
  if (m.scale == 1) {
    return {a.start - Limit<T>(m.offset), a.stop - Limit<T>(m.offset)};
  }
  const Limit<T> off(m.offset);
  return {off - a.stop, off - a.start};
}

template <typename T>
std::string to_string(const Interval<T>& a) {
  auto num = [](const Limit<T>& x) { return to_string(Limit<T>(x.val)); };
  std::string s;
  s += a.start.eps > 0 ? "(" : "[";
  s += num(a.start) + "," + num(a.stop);
  s += a.stop.eps < 0 ? ")" : "]";
  return s;
}

}  // namespace ct
