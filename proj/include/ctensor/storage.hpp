#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ctensor/errors.hpp"
#include "ctensor/interval.hpp"

namespace ct {

using Pos = std::int64_t;

enum class LevelKind { dense, pinpoint, interval, regular };

const char* to_string(LevelKind k);

/// Discrete rank [0, size).
struct DenseLevel {
  std::int64_t size = 0;
};

/// Nonzero only at points; fiber p spans crd[ptr[p]] .. crd[ptr[p+1]-1].
struct PinpointLevel {
  std::vector<Pos> ptr{0};
  std::vector<double> crd;
};

/// Disjoint sorted intervals. Homogeneous levels keep one pair of closure
/// flags; heterogeneous levels keep one flag per endpoint.
struct IntervalLevel {
  std::vector<Pos> ptr{0};
  std::vector<double> left, right;
  bool homogeneous = true;
  bool lclose = true, rclose = true;
  std::vector<std::uint8_t> lclose_v, rclose_v;

  Lim left_at(Pos p) const {
    bool c = homogeneous ? lclose : lclose_v[p] != 0;
    return Lim(left.at(p), c ? 0 : 1);
  }
  Lim right_at(Pos p) const {
    bool c = homogeneous ? rclose : rclose_v[p] != 0;
    return Lim(right.at(p), c ? 0 : -1);
  }
};

/// Pieces [stride*x, stride*x + len) (closed on the right when rclose).
/// len == 0 encodes pinpoints.
struct RegularLevel {
  double stride = 1.0;
  double len = 1.0;
  bool rclose = false;
  std::vector<Pos> ptr{0};
  std::vector<std::int64_t> xs;

  Lim left_at(Pos p) const { return Lim(stride * static_cast<double>(xs.at(p))); }
  Lim right_at(Pos p) const {
    return Lim(stride * static_cast<double>(xs.at(p)) + len, (rclose || len == 0.0) ? 0 : -1);
  }
};

using Level = std::variant<DenseLevel, PinpointLevel, IntervalLevel, RegularLevel>;

LevelKind level_kind(const Level& lv);
bool is_pinpoint_level(const Level& lv);
/// Number of positions at this level given the parent's position count.
Pos level_positions(const Level& lv, Pos parent_positions);
/// [begin, end) of the entries of fiber `pos` (sparse levels only).
std::pair<Pos, Pos> fiber_range(const Level& lv, Pos pos);
Lim piece_left(const Level& lv, Pos p);
Lim piece_right(const Level& lv, Pos p);
/// First entry of fiber `pos` whose right endpoint, less `off`, is >=
/// target, or the fiber end. Comparing in the caller's shifted coordinates
/// keeps the result consistent with stops computed as `right - off`.
Pos seek_right(const Level& lv, Pos pos, const Lim& target, const Lim& off = Lim(0));
/// Entry of fiber `pos` containing x, or -1.
Pos find_piece(const Level& lv, Pos pos, const Lim& x);

struct LevelSpec {
  LevelKind kind = LevelKind::interval;
  std::int64_t size = 0;  // dense
  double stride = 1.0;    // regular
  double len = 1.0;
  bool rclose = false;

  static LevelSpec dense(std::int64_t n) { return {LevelKind::dense, n}; }
  static LevelSpec pinpoint() { return {LevelKind::pinpoint}; }
  static LevelSpec interval() { return {LevelKind::interval}; }
  static LevelSpec regular(double stride, double len, bool rclose = false) {
    return {LevelKind::regular, 0, stride, len, rclose};
  }
};

/// Builds one sparse level from per-fiber piece lists (sorted by start).
/// Throws UnsortedError / OverlapError naming the fiber and positions.
Level build_level(const LevelSpec& spec, const std::vector<std::vector<Iv>>& fibers);

struct ContTensor {
  std::string name;
  double fill = 0.0;
  std::vector<Level> levels;
  std::vector<double> values;

  int rank() const { return static_cast<int>(levels.size()); }
  /// Position count of each level (root = 1 before level 0).
  std::vector<Pos> positions() const;
};

/// Checks ptr monotonicity, array sizes, per-fiber order and disjointness.
void validate_tensor(const ContTensor& t);

bool is_pinpoint_tensor(const ContTensor& t);

/// Coordinate of one rank: an integer for dense ranks, an interval otherwise.
using Coord = std::variant<std::int64_t, Iv>;
bool coord_less(const Coord& a, const Coord& b);

struct Entry {
  std::vector<Coord> coords;
  double value = 0.0;
};

/// Builds a tensor from coordinate entries in any order. Duplicate
/// coordinates are rejected.
ContTensor build_tensor(std::string name, const std::vector<LevelSpec>& specs,
                        std::vector<Entry> entries, double fill = 0.0);

/// Value at a point; continuous ranks take reals, dense ranks integers.
double tensor_eval(const ContTensor& t, const std::vector<double>& coords);

struct FiberPiece {
  Iv iv;
  Pos child = -1;  // entry position, -1 for a reconstructed fill gap
};

/// Pieces of one fiber of a continuous level, in order. With include_fill
/// the gaps are reconstructed so the result tiles (-inf, +inf).
std::vector<FiberPiece> fiber_pieces(const ContTensor& t, int level, Pos pos, bool include_fill);

struct TensorPiece {
  std::vector<Coord> coords;  // shorter than rank for fill gaps above the leaf
  double value = 0.0;
};

std::vector<TensorPiece> tensor_pieces(const ContTensor& t, bool include_fill);

}  // namespace ct
