#include "ctensor/storage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ct {

const char* to_string(LevelKind k) {
  switch (k) {
    case LevelKind::dense: return "dense";
    case LevelKind::pinpoint: return "pinpoint";
    case LevelKind::interval: return "interval";
    case LevelKind::regular: return "regular";
  }
  return "?";
}

LevelKind level_kind(const Level& lv) { return static_cast<LevelKind>(lv.index()); }

bool is_pinpoint_level(const Level& lv) {
  if (std::holds_alternative<PinpointLevel>(lv)) return true;
  if (auto* r = std::get_if<RegularLevel>(&lv)) return r->len == 0.0;
  return false;
}

namespace {

const std::vector<Pos>& ptr_of(const Level& lv) {
  return std::visit(
      [](const auto& l) -> const std::vector<Pos>& {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, DenseLevel>) {
          throw std::logic_error("dense level has no ptr");
        } else {
          return l.ptr;
        }
      },
      lv);
}

std::string fiber_msg(Pos fiber, Pos a, Pos b) {
  std::ostringstream os;
  os << "fiber " << fiber << ", positions " << a << " and " << b;
  return os.str();
}

}  // namespace

Pos level_positions(const Level& lv, Pos parent_positions) {
  if (auto* d = std::get_if<DenseLevel>(&lv)) return parent_positions * d->size;
  return ptr_of(lv).back();
}

std::pair<Pos, Pos> fiber_range(const Level& lv, Pos pos) {
  const auto& ptr = ptr_of(lv);
  if (pos < 0 || pos + 1 >= static_cast<Pos>(ptr.size())) return {0, 0};
  return {ptr[pos], ptr[pos + 1]};
}

Lim piece_left(const Level& lv, Pos p) {
  switch (level_kind(lv)) {
    case LevelKind::pinpoint: return Lim(std::get<PinpointLevel>(lv).crd.at(p));
    case LevelKind::interval: return std::get<IntervalLevel>(lv).left_at(p);
    case LevelKind::regular: return std::get<RegularLevel>(lv).left_at(p);
    default: throw std::logic_error("piece_left on dense level");
  }
}

Lim piece_right(const Level& lv, Pos p) {
  switch (level_kind(lv)) {
    case LevelKind::pinpoint: return Lim(std::get<PinpointLevel>(lv).crd.at(p));
    case LevelKind::interval: return std::get<IntervalLevel>(lv).right_at(p);
    case LevelKind::regular: return std::get<RegularLevel>(lv).right_at(p);
    default: throw std::logic_error("piece_right on dense level");
  }
}

Pos seek_right(const Level& lv, Pos pos, const Lim& target, const Lim& off) {
  auto [lo, hi] = fiber_range(lv, pos);
  while (lo < hi) {
    Pos mid = lo + (hi - lo) / 2;
    if (piece_right(lv, mid) - off < target) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

Pos find_piece(const Level& lv, Pos pos, const Lim& x) {
  Pos hi = fiber_range(lv, pos).second;
  Pos p = seek_right(lv, pos, x);
  if (p < hi && piece_left(lv, p) <= x) return p;
  return -1;
}

namespace {

void check_fiber(const Level& lv, Pos fiber, Pos lo, Pos hi) {
  for (Pos p = lo; p < hi; ++p) {
    Lim l = piece_left(lv, p), r = piece_right(lv, p);
    if (std::isnan(l.val) || std::isnan(r.val)) {
      throw SchemaError("NaN endpoint in fiber " + std::to_string(fiber));
    }
    if (r < l) {
      throw SchemaError("empty interval at position " + std::to_string(p) + " in fiber " +
                        std::to_string(fiber));
    }
    if (p + 1 < hi) {
      Lim nl = piece_left(lv, p + 1);
      if (nl < l) throw UnsortedError("unsorted pieces in " + fiber_msg(fiber, p, p + 1));
      if (nl <= r) throw OverlapError("overlapping pieces in " + fiber_msg(fiber, p, p + 1));
    }
  }
}

}  // namespace

Level build_level(const LevelSpec& spec, const std::vector<std::vector<Iv>>& fibers) {
  Level out;
  std::vector<Pos> ptr{0};
  for (const auto& f : fibers) ptr.push_back(ptr.back() + static_cast<Pos>(f.size()));

  switch (spec.kind) {
    case LevelKind::dense:
      throw std::invalid_argument("build_level: dense levels carry no pieces");
    case LevelKind::pinpoint: {
      PinpointLevel l;
      l.ptr = ptr;
      for (const auto& f : fibers) {
        for (const auto& iv : f) {
          if (!(iv.start.eps == 0 && iv.stop.eps == 0 && iv.start.val == iv.stop.val)) {
            throw SchemaError("pinpoint level given a non-pinpoint interval " + to_string(iv));
          }
          l.crd.push_back(iv.start.val);
        }
      }
      out = std::move(l);
      break;
    }
    case LevelKind::interval: {
      IntervalLevel l;
      l.ptr = ptr;
      for (const auto& f : fibers) {
        for (const auto& iv : f) {
          l.left.push_back(iv.start.val);
          l.right.push_back(iv.stop.val);
          l.lclose_v.push_back(iv.start.eps == 0);
          l.rclose_v.push_back(iv.stop.eps == 0);
          if (iv.start.eps < 0 || iv.stop.eps > 0) {
            throw SchemaError("interval endpoint with outward eps: " + to_string(iv));
          }
        }
      }
      auto all_same = [](const std::vector<std::uint8_t>& v) {
        return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
      };
      if (all_same(l.lclose_v) && all_same(l.rclose_v)) {
        l.homogeneous = true;
        l.lclose = l.lclose_v.empty() || l.lclose_v.front();
        l.rclose = l.rclose_v.empty() || l.rclose_v.front();
        l.lclose_v.clear();
        l.rclose_v.clear();
      } else {
        l.homogeneous = false;
      }
      out = std::move(l);
      break;
    }
    case LevelKind::regular: {
      RegularLevel l;
      l.ptr = ptr;
      l.stride = spec.stride;
      l.len = spec.len;
      l.rclose = spec.rclose;
      for (const auto& f : fibers) {
        for (const auto& iv : f) {
          double xf = iv.start.val / spec.stride;
          auto x = static_cast<std::int64_t>(std::llround(xf));
          l.xs.push_back(x);
          Pos p = static_cast<Pos>(l.xs.size()) - 1;
          if (!(l.left_at(p) == iv.start && l.right_at(p) == iv.stop)) {
            throw SchemaError("interval " + to_string(iv) + " is not a regular piece");
          }
        }
      }
      out = std::move(l);
      break;
    }
  }
  for (std::size_t f = 0; f < fibers.size(); ++f) {
    check_fiber(out, static_cast<Pos>(f), ptr[f], ptr[f + 1]);
  }
  return out;
}

std::vector<Pos> ContTensor::positions() const {
  std::vector<Pos> out;
  Pos n = 1;
  for (const auto& lv : levels) {
    n = level_positions(lv, n);
    out.push_back(n);
  }
  return out;
}

void validate_tensor(const ContTensor& t) {
  Pos parent = 1;
  for (int k = 0; k < t.rank(); ++k) {
    const Level& lv = t.levels[k];
    if (auto* d = std::get_if<DenseLevel>(&lv)) {
      if (d->size < 0) throw SchemaError("negative dense size at level " + std::to_string(k));
      parent *= d->size;
      continue;
    }
    const auto& ptr = ptr_of(lv);
    if (static_cast<Pos>(ptr.size()) != parent + 1) {
      throw SchemaError("level " + std::to_string(k) + ": ptr has " + std::to_string(ptr.size()) +
                        " entries, expected " + std::to_string(parent + 1));
    }
    if (ptr.front() != 0) throw SchemaError("level " + std::to_string(k) + ": ptr[0] != 0");
    for (std::size_t i = 1; i < ptr.size(); ++i) {
      if (ptr[i] < ptr[i - 1]) {
        throw SchemaError("level " + std::to_string(k) + ": ptr not monotone");
      }
    }
    Pos n = ptr.back();
    std::size_t have = std::visit(
        [](const auto& l) -> std::size_t {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, PinpointLevel>) return l.crd.size();
          if constexpr (std::is_same_v<L, IntervalLevel>) {
            if (l.left.size() != l.right.size()) return static_cast<std::size_t>(-1);
            if (!l.homogeneous &&
                (l.lclose_v.size() != l.left.size() || l.rclose_v.size() != l.left.size())) {
              return static_cast<std::size_t>(-1);
            }
            return l.left.size();
          }
          if constexpr (std::is_same_v<L, RegularLevel>) return l.xs.size();
          return 0;
        },
        lv);
    if (have != static_cast<std::size_t>(n)) {
      throw SchemaError("level " + std::to_string(k) + ": coordinate arrays do not match ptr");
    }
    if (auto* r = std::get_if<RegularLevel>(&lv); r && r->len < 0) {
      throw SchemaError("level " + std::to_string(k) + ": regular len < 0");
    }
    for (Pos f = 0; f < parent; ++f) check_fiber(lv, f, ptr[f], ptr[f + 1]);
    parent = n;
  }
  if (static_cast<Pos>(t.values.size()) != parent) {
    throw SchemaError("values has " + std::to_string(t.values.size()) + " entries, expected " +
                      std::to_string(parent));
  }
}

bool is_pinpoint_tensor(const ContTensor& t) {
  bool any_cont = false;
  for (const auto& lv : t.levels) {
    if (level_kind(lv) == LevelKind::dense) continue;
    any_cont = true;
    if (!is_pinpoint_level(lv)) return false;
  }
  return any_cont;
}

bool coord_less(const Coord& a, const Coord& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (auto* ia = std::get_if<std::int64_t>(&a)) return *ia < std::get<std::int64_t>(b);
  const Iv& x = std::get<Iv>(a);
  const Iv& y = std::get<Iv>(b);
  if (x.start != y.start) return x.start < y.start;
  return x.stop < y.stop;
}

ContTensor build_tensor(std::string name, const std::vector<LevelSpec>& specs,
                        std::vector<Entry> entries, double fill) {
  ContTensor t;
  t.name = std::move(name);
  t.fill = fill;
  const int rank = static_cast<int>(specs.size());
  for (const auto& e : entries) {
    if (static_cast<int>(e.coords.size()) != rank) {
      throw ArityError("entry has " + std::to_string(e.coords.size()) + " coordinates, tensor " +
                       t.name + " has rank " + std::to_string(rank));
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::lexicographical_compare(a.coords.begin(), a.coords.end(), b.coords.begin(),
                                        b.coords.end(), coord_less);
  });

  // groups[pos] = entries under that position of the previous level
  std::vector<std::vector<std::size_t>> groups(1);
  groups[0].resize(entries.size());
  std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});

  for (int k = 0; k < rank; ++k) {
    const LevelSpec& spec = specs[k];
    std::vector<std::vector<std::size_t>> next;
    if (spec.kind == LevelKind::dense) {
      next.resize(groups.size() * spec.size);
      for (std::size_t p = 0; p < groups.size(); ++p) {
        for (std::size_t e : groups[p]) {
          const auto* i = std::get_if<std::int64_t>(&entries[e].coords[k]);
          if (!i) throw SchemaError("dense rank " + std::to_string(k) + " needs integer coords");
          if (*i < 0 || *i >= spec.size) {
            throw std::out_of_range("coordinate " + std::to_string(*i) + " outside dense rank " +
                                    std::to_string(k) + " of size " + std::to_string(spec.size));
          }
          next[p * spec.size + *i].push_back(e);
        }
      }
      t.levels.emplace_back(DenseLevel{spec.size});
    } else {
      std::vector<std::vector<Iv>> fibers(groups.size());
      for (std::size_t p = 0; p < groups.size(); ++p) {
        const Iv* prev = nullptr;
        for (std::size_t e : groups[p]) {
          Iv iv;
          if (auto* i = std::get_if<std::int64_t>(&entries[e].coords[k])) {
            iv = Iv::point(static_cast<double>(*i));
          } else {
            iv = std::get<Iv>(entries[e].coords[k]);
          }
          if (prev && *prev == iv) {
            next.back().push_back(e);
            continue;
          }
          fibers[p].push_back(iv);
          next.emplace_back(1, e);
          prev = &fibers[p].back();
        }
      }
      t.levels.push_back(build_level(spec, fibers));
    }
    groups = std::move(next);
  }

  t.values.assign(groups.size(), fill);
  for (std::size_t p = 0; p < groups.size(); ++p) {
    if (groups[p].size() > 1) {
      throw OverlapError("duplicate coordinate in tensor " + t.name + " at leaf position " +
                         std::to_string(p));
    }
    if (!groups[p].empty()) t.values[p] = entries[groups[p][0]].value;
  }
  return t;
}

double tensor_eval(const ContTensor& t, const std::vector<double>& coords) {
  if (static_cast<int>(coords.size()) != t.rank()) {
    throw ArityError("tensor " + t.name + " has rank " + std::to_string(t.rank()) + ", got " +
                     std::to_string(coords.size()) + " coordinates");
  }
  Pos pos = 0;
  for (int k = 0; k < t.rank(); ++k) {
    const Level& lv = t.levels[k];
    if (auto* d = std::get_if<DenseLevel>(&lv)) {
      double c = coords[k];
      if (c != std::floor(c) || c < 0 || c >= static_cast<double>(d->size)) {
        throw std::out_of_range("dense coordinate " + std::to_string(c) + " outside [0," +
                                std::to_string(d->size) + ")");
      }
      pos = pos * d->size + static_cast<Pos>(c);
    } else {
      pos = find_piece(lv, pos, Lim(coords[k]));
      if (pos < 0) return t.fill;
    }
  }
  return t.values[pos];
}

std::vector<FiberPiece> fiber_pieces(const ContTensor& t, int level, Pos pos, bool include_fill) {
  const Level& lv = t.levels.at(level);
  if (level_kind(lv) == LevelKind::dense) {
    throw std::invalid_argument("fiber_pieces on a dense level");
  }
  std::vector<FiberPiece> out;
  auto [lo, hi] = fiber_range(lv, pos);
  Lim cursor = Lim::neg_inf();
  bool first = true;
  for (Pos p = lo; p < hi; ++p) {
    Lim l = piece_left(lv, p), r = piece_right(lv, p);
    if (include_fill) {
      Iv gap{first ? cursor : add_eps(cursor), sub_eps(l)};
      if (!gap.empty()) out.push_back({gap, -1});
    }
    out.push_back({{l, r}, p});
    cursor = r;
    first = false;
  }
  if (include_fill) {
    Iv tail{first ? cursor : add_eps(cursor), Lim::pos_inf()};
    if (!tail.empty()) out.push_back({tail, -1});
  }
  return out;
}

namespace {

void collect(const ContTensor& t, int level, Pos pos, std::vector<Coord>& path, bool include_fill,
             std::vector<TensorPiece>& out) {
  if (level == t.rank()) {
    out.push_back({path, t.values[pos]});
    return;
  }
  const Level& lv = t.levels[level];
  if (auto* d = std::get_if<DenseLevel>(&lv)) {
    for (std::int64_t i = 0; i < d->size; ++i) {
      path.emplace_back(i);
      collect(t, level + 1, pos * d->size + i, path, include_fill, out);
      path.pop_back();
    }
    return;
  }
  for (const auto& fp : fiber_pieces(t, level, pos, include_fill)) {
    path.emplace_back(fp.iv);
    if (fp.child < 0) {
      out.push_back({path, t.fill});
    } else {
      collect(t, level + 1, fp.child, path, include_fill, out);
    }
    path.pop_back();
  }
}

}  // namespace

std::vector<TensorPiece> tensor_pieces(const ContTensor& t, bool include_fill) {
  std::vector<TensorPiece> out;
  std::vector<Coord> path;
  collect(t, 0, 0, path, include_fill, out);
  return out;
}

}  // namespace ct
