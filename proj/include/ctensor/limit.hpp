#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ct {

/// A real endpoint augmented with an infinitesimal tag: `val + eps * ε`
/// with eps in {-1, 0, +1}. Ordered lexicographically on (val, eps), which
/// lets every open or half-open interval be stored as a closed one.
template <typename T>
struct Limit {
  T val{};
  std::int8_t eps = 0;

  constexpr Limit() = default;
  constexpr Limit(T v, int e = 0) : val(v), eps(clamp_eps(e)) {}

  static constexpr std::int8_t clamp_eps(int e) {
    return static_cast<std::int8_t>(std::min(std::max(e, -1), 1));
  }

  static constexpr Limit pos_inf() { return Limit(std::numeric_limits<T>::infinity()); }
  static constexpr Limit neg_inf() { return Limit(-std::numeric_limits<T>::infinity()); }
};

using Lim = Limit<double>;

template <typename T>
constexpr Limit<T> operator+(const Limit<T>& a, const Limit<T>& b) {
  return Limit<T>(a.val + b.val, a.eps + b.eps);
}

template <typename T>
constexpr Limit<T> operator-(const Limit<T>& a, const Limit<T>& b) {
  return Limit<T>(a.val - b.val, a.eps - b.eps);
}

template <typename T>
constexpr Limit<T> operator+(const Limit<T>& a, T b) { return a + Limit<T>(b); }
template <typename T>
constexpr Limit<T> operator-(const Limit<T>& a, T b) { return a - Limit<T>(b); }

namespace detail {
template <typename T>
inline void check_nan(const Limit<T>& a) {
  if constexpr (std::numeric_limits<T>::has_quiet_NaN) {
    if (a.val != a.val) throw std::domain_error("comparison against a NaN endpoint");
  }
}
}  // namespace detail

template <typename T>
constexpr std::strong_ordering operator<=>(const Limit<T>& a, const Limit<T>& b) {
  detail::check_nan(a);
  detail::check_nan(b);
  if (a.val < b.val) return std::strong_ordering::less;
  if (b.val < a.val) return std::strong_ordering::greater;
  return a.eps <=> b.eps;
}

template <typename T>
constexpr bool operator==(const Limit<T>& a, const Limit<T>& b) {
  return (a <=> b) == 0;
}

// Plain numbers compare as exact (eps = 0) limits.
template <typename T>
constexpr std::strong_ordering operator<=>(const Limit<T>& a, T b) { return a <=> Limit<T>(b); }
template <typename T>
constexpr bool operator==(const Limit<T>& a, T b) { return a == Limit<T>(b); }

/// Discards the infinitesimal part (3+ε => 3).
template <typename T>
constexpr T drop_eps(const Limit<T>& a) { return a.val; }

template <typename T>
constexpr Limit<T> add_eps(const Limit<T>& a) { return Limit<T>(a.val, a.eps + 1); }
template <typename T>
constexpr Limit<T> sub_eps(const Limit<T>& a) { return Limit<T>(a.val, a.eps - 1); }

template <typename T>
std::string to_string(const Limit<T>& a) {
  std::ostringstream os;
  if (std::isinf(static_cast<double>(a.val))) {
    os << (a.val > 0 ? "+inf" : "-inf");
  } else {
    // shortest form that reads back to the same double
    for (int prec = 1; prec <= 17; ++prec) {
      std::ostringstream t;
      t.precision(prec);
      t << a.val;
      if (std::stod(t.str()) == static_cast<double>(a.val) || prec == 17) {
        os << t.str();
        break;
      }
    }
  }
  if (a.eps > 0) os << "+eps";
  if (a.eps < 0) os << "-eps";
  return os.str();
}

template <typename T>
std::ostream& operator<<(std::ostream& os, const Limit<T>& a) {
  return os << to_string(a);
}

}  // namespace ct
