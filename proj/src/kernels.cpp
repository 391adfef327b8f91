#include "ctensor/kernels.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "ctensor/errors.hpp"

#ifndef CTENSOR_KERNEL_DIR
#define CTENSOR_KERNEL_DIR "kernels"
#endif

namespace ct::kernels {

namespace {

using Rng = std::mt19937_64;
constexpr double kGrid = 0.05;

int uni(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(Rng& rng) { return std::bernoulli_distribution(0.5)(rng); }

Iv pt(double a) { return Iv{Lim(a), Lim(a)}; }
Iv closed(double a, double b) { return Iv{Lim(a), Lim(b)}; }

// Sorted disjoint pieces starting near grid step `from`. Neighbours may
// touch when the left one is right-open.
std::vector<Iv> rand_ivs(Rng& rng, int max_n, int from, bool pin = false) {
  std::vector<Iv> out;
  int at = from;
  bool prev_rc = true;
  for (int n = uni(rng, 0, max_n); n > 0; --n) {
    int s = at + uni(rng, 0, 4);
    if (!out.empty() && s == at && prev_rc) ++s;
    int e = pin ? s : s + uni(rng, 0, 6);
    bool lc = coin(rng), rc = coin(rng);
    if (s == e) lc = rc = true;
    if (!out.empty() && s == at && !lc && s == e) ++s, ++e;
    out.push_back(Iv{Lim(s * kGrid, lc ? 0 : 1), Lim(e * kGrid, rc ? 0 : -1)});
    at = e;
    prev_rc = rc;
  }
  return out;
}

std::vector<double> rand_points(Rng& rng, int max_n, int lo, int hi) {
  std::set<int> ks;
  for (int n = uni(rng, 0, max_n); n > 0; --n) ks.insert(uni(rng, lo, hi));
  std::vector<double> out;
  for (int k : ks) out.push_back(k * kGrid);
  return out;
}

double val(Rng& rng) { return uni(rng, 1, 9); }

ContTensor vec(const std::string& name, const std::vector<Iv>& ivs, Rng& rng, bool pin) {
  std::vector<Entry> es;
  for (auto& iv : ivs) es.push_back({{iv}, val(rng)});
  return build_tensor(name, {pin ? LevelSpec::pinpoint() : LevelSpec::interval()}, es);
}

// Points[x, y, id] with N ids; coordinates drawn from grid steps [lo, hi].
ContTensor point_cloud(Rng& rng, int n_ids, int lo, int hi) {
  std::set<std::tuple<int, int, int>> seen;
  std::vector<Entry> es;
  for (int n = uni(rng, 0, 8); n > 0; --n) {
    int x = uni(rng, lo, hi), y = uni(rng, lo, hi), id = uni(rng, 0, n_ids - 1);
    if (!seen.insert({x, y, id}).second) continue;
    es.push_back({{pt(x * kGrid), pt(y * kGrid), std::int64_t{id}}, 1.0});
  }
  return build_tensor("Points", {LevelSpec::pinpoint(), LevelSpec::pinpoint(), LevelSpec::dense(n_ids)}, es);
}

ContTensor trilinear_grid(const std::vector<std::tuple<int, int, int>>& cells, int channels,
                          const std::vector<double>& values) {
  std::vector<Entry> es;
  std::size_t v = 0;
  for (auto [gx, gy, gz] : cells)
    for (int c = 0; c < channels; ++c)
      es.push_back({{iv_from_kind<double>(gx, gx + 1, Closure::right_open),
                     iv_from_kind<double>(gy, gy + 1, Closure::right_open),
                     iv_from_kind<double>(gz, gz + 1, Closure::right_open), std::int64_t{c}},
                    values.empty() ? 1.0 : values[v++ % values.size()]});
  auto reg = LevelSpec::regular(1.0, 1.0);
  return build_tensor("Grid", {reg, reg, reg, LevelSpec::dense(channels)}, es);
}

ContTensor samples(const std::vector<std::array<double, 3>>& pts) {
  std::vector<Entry> es;
  for (std::size_t t = 0; t < pts.size(); ++t)
    es.push_back({{static_cast<std::int64_t>(t), pt(pts[t][0]), pt(pts[t][1]), pt(pts[t][2])}, 1.0});
  auto p = LevelSpec::pinpoint();
  return build_tensor("S", {LevelSpec::dense(static_cast<std::int64_t>(pts.size())), p, p, p}, es);
}

Genome small_genome(Rng& rng) {
  Genome g;
  g.chromosomes = uni(rng, 1, 2);
  g.data.resize(g.chromosomes);
  g.queries.resize(g.chromosomes);
  auto draw = [&](std::vector<Iv>& out, int n) {
    for (; n > 0; --n) {
      int s = uni(rng, 0, 60), w = uni(rng, 0, 12);
      out.push_back(closed(s * kGrid, (s + w) * kGrid));
    }
  };
  for (int c = 0; c < g.chromosomes; ++c) {
    draw(g.data[c], uni(rng, 0, 4));
    draw(g.queries[c], uni(rng, 0, 3));
  }
  return g;
}

std::pair<double, double> data_extent(const Genome& g) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto& chr : g.data)
    for (auto& iv : chr) {
      lo = std::min(lo, iv.start.val);
      hi = std::max(hi, iv.stop.val);
    }
  if (lo > hi) return {0.0, 1.0};
  return {lo, std::nextafter(hi, std::numeric_limits<double>::infinity())};
}

}  // namespace

const std::vector<std::string>& corpus() {
  static const std::vector<std::string> names{"dot-sum",     "dot-integral", "masked-conv",     "box-search",
                                              "radius-search", "radius-count", "trilinear", "genomic-overlap"};
  return names;
}

std::string kernel_dir() {
  if (const char* env = std::getenv("CTENSOR_KERNEL_DIR"); env && *env) return env;
  return CTENSOR_KERNEL_DIR;
}

std::string source(const std::string& name) {
  std::string path = kernel_dir() + "/" + name + ".ct";
  std::ifstream in(path);
  if (!in) throw Error("cannot read kernel " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_integral(const std::string& name) {
  return name == "dot-integral" || name == "masked-conv" || name == "trilinear";
}

Instance random_instance(const std::string& name, std::mt19937_64& rng) {
  Instance in;
  auto& b = in.inputs;
  if (name == "dot-sum") {
    auto pool = [&](const char* n) {
      std::vector<Iv> ivs;
      for (double x : rand_points(rng, 8, 0, 15)) ivs.push_back(pt(x));
      return vec(n, ivs, rng, true);
    };
    b.emplace("x", pool("x"));
    b.emplace("y", pool("y"));
  } else if (name == "dot-integral") {
    b.emplace("x", vec("x", rand_ivs(rng, 8, -20), rng, false));
    b.emplace("y", vec("y", rand_ivs(rng, 8, -20), rng, false));
  } else if (name == "masked-conv") {
    std::vector<Iv> mask;
    for (double x : rand_points(rng, 4, -10, 10)) mask.push_back(pt(x));
    b.emplace("Mask", vec("Mask", mask, rng, true));
    b.emplace("A", vec("A", rand_ivs(rng, 5, -20), rng, false));
    b.emplace("B", vec("B", rand_ivs(rng, 4, -10), rng, false));
  } else if (name == "box-search") {
    std::vector<Entry> es;
    for (auto& x : rand_ivs(rng, 4, -20))
      for (auto& y : rand_ivs(rng, 4, -20)) es.push_back({{x, y}, 1.0});
    b.emplace("Box", build_tensor("Box", {LevelSpec::interval(), LevelSpec::interval()}, es));
    b.emplace("Points", point_cloud(rng, 4, -20, 0));
    in.params = {{"N", 4}};
  } else if (name == "radius-search") {
    b.emplace("Points", point_cloud(rng, 4, -20, 20));
    static const double radii[] = {0.3, 0.5, 0.75};
    in.params = {{"N", 4}, {"R", radii[uni(rng, 0, 2)]}, {"Ox", uni(rng, -5, 5) * kGrid},
                 {"Oy", uni(rng, -5, 5) * kGrid}};
  } else if (name == "radius-count") {
    std::set<std::pair<int, int>> seen;
    std::vector<Entry> es;
    for (int n = uni(rng, 0, 8); n > 0; --n) {
      int x = uni(rng, 10, 80), y = uni(rng, 44, 112);
      if (seen.insert({x, y}).second) es.push_back({{pt(x * kGrid), pt(y * kGrid)}, val(rng)});
    }
    b.emplace("A", build_tensor("A", {LevelSpec::pinpoint(), LevelSpec::pinpoint()}, es));
  } else if (name == "trilinear") {
    std::set<std::tuple<int, int, int>> cells;
    for (int n = uni(rng, 0, 8); n > 0; --n) cells.insert({uni(rng, 0, 2), uni(rng, 0, 2), uni(rng, 0, 2)});
    std::vector<double> vals;
    for (std::size_t k = 0; k < cells.size() * 2; ++k) vals.push_back(val(rng));
    b.emplace("Grid", trilinear_grid({cells.begin(), cells.end()}, 2, vals));
    std::vector<std::array<double, 3>> pts;
    for (int t = uni(rng, 1, 3); t > 0; --t)
      pts.push_back({uni(rng, 0, 40) * kGrid, uni(rng, 0, 40) * kGrid, uni(rng, 0, 40) * kGrid});
    b.emplace("S", samples(pts));
    in.params = {{"T", static_cast<double>(pts.size())}, {"C", 2}};
  } else if (name == "genomic-overlap" || name == "genomic-overlap-grid") {
    auto g = small_genome(rng);
    return genome_instance(g, name == "genomic-overlap-grid" ? -1 : 0);
  } else {
    throw Error("no generator for kernel " + name);
  }
  return in;
}

Instance dot_sum_fixture() {
  auto pin = [](const char* n, std::vector<std::pair<double, double>> ps) {
    std::vector<Entry> es;
    for (auto [x, v] : ps) es.push_back({{pt(x)}, v});
    return build_tensor(n, {LevelSpec::pinpoint()}, es);
  };
  Instance in;
  in.inputs.emplace("x", pin("x", {{1, 7}, {3, 2}, {5.1, 8}}));
  in.inputs.emplace("y", pin("y", {{3, 2}, {4, 9}, {5.1, 5}}));
  return in;
}

Instance dot_integral_fixture() {
  Instance in;
  in.inputs.emplace("x", build_tensor("x", {LevelSpec::interval()},
                                      {{{closed(1, 3)}, 1.0}, {{closed(4.1, 5.1)}, 2.0}}));
  in.inputs.emplace("y", build_tensor("y", {LevelSpec::interval()}, {{{closed(2, 5)}, 1.0}}));
  return in;
}

Instance radius_count_fixture() {
  std::vector<Entry> es;
  for (auto [x, y] : std::vector<std::pair<double, double>>{{2.2, 3.9}, {3.0, 4.5}, {1.5, 3.0}, {4.5, 3.9}, {0, 0}})
    es.push_back({{pt(x), pt(y)}, 1.0});
  Instance in;
  in.inputs.emplace("A", build_tensor("A", {LevelSpec::pinpoint(), LevelSpec::pinpoint()}, es));
  return in;
}

Instance trilinear_ones_fixture() {
  std::vector<std::tuple<int, int, int>> cells;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      for (int z = 0; z < 3; ++z) cells.push_back({x, y, z});
  Instance in;
  in.inputs.emplace("Grid", trilinear_grid(cells, 2, {}));
  in.inputs.emplace("S", samples({{0.3, 0.7, 1.1}, {1.25, 0.5, 1.7}, {1.0, 1.0, 1.0}}));
  in.params = {{"T", 3}, {"C", 2}};
  return in;
}

int Genome::query_count() const {
  int n = 0;
  for (auto& q : queries) n += static_cast<int>(q.size());
  return n;
}

int Genome::max_data() const {
  std::size_t m = 0;
  for (auto& d : data) m = std::max(m, d.size());
  return static_cast<int>(m);
}

Genome random_genome(int chromosomes, int data, int queries, std::uint64_t seed, double length, double min_w,
                     double max_w) {
  Rng rng(seed);
  std::uniform_int_distribution<int> chr(0, chromosomes - 1);
  std::uniform_real_distribution<double> start(0, length), width(min_w, max_w);
  Genome g;
  g.chromosomes = chromosomes;
  g.data.resize(chromosomes);
  g.queries.resize(chromosomes);
  auto draw = [&](std::vector<std::vector<Iv>>& out, int n) {
    for (; n > 0; --n) {
      double s = start(rng);
      out[chr(rng)].push_back(closed(s, s + width(rng)));
    }
  };
  draw(g.data, data);
  draw(g.queries, queries);
  return g;
}

ContTensor build_grid(const Genome& g, int cells, double lo, double hi) {
  auto [dlo, dhi] = data_extent(g);
  if (std::isnan(lo)) lo = dlo;
  if (std::isnan(hi)) hi = dhi;
  std::vector<Entry> es;
  for (int c = 0; c < g.chromosomes; ++c) {
    auto& chr = g.data[c];
    int p = cells > 0 ? cells : std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(chr.size())))));
    double w = (hi - lo) / p;
    std::vector<Iv> cell(p);
    for (int k = 0; k < p; ++k)
      cell[k] = iv_from_kind(lo + k * w, k + 1 == p ? hi : lo + (k + 1) * w, Closure::right_open);
    for (std::size_t jd = 0; jd < chr.size(); ++jd) {
      int k0 = static_cast<int>(std::floor((chr[jd].start.val - lo) / w)) - 1;
      int k1 = static_cast<int>(std::floor((chr[jd].stop.val - lo) / w)) + 1;
      for (int k = std::max(0, k0); k <= std::min(p - 1, k1); ++k)
        if (!iv_intersect(cell[k], chr[jd]).empty())
          es.push_back({{std::int64_t{c}, cell[k], pt(static_cast<double>(jd))}, 1.0});
    }
  }
  return build_tensor("Grid", {LevelSpec::dense(g.chromosomes), LevelSpec::interval(), LevelSpec::pinpoint()}, es);
}

Instance genome_instance(const Genome& g, int cells, double lo, double hi) {
  int m = std::max(1, g.max_data());
  std::vector<Entry> qs, ds;
  std::int64_t id = 0;
  for (int c = 0; c < g.chromosomes; ++c) {
    for (auto& q : g.queries[c]) qs.push_back({{std::int64_t{c}, pt(static_cast<double>(id++)), q}, 1.0});
    for (std::size_t jd = 0; jd < g.data[c].size(); ++jd)
      ds.push_back({{std::int64_t{c}, static_cast<std::int64_t>(jd), g.data[c][jd]}, 1.0});
  }
  Instance in;
  in.inputs.emplace("Query", build_tensor("Query", {LevelSpec::dense(g.chromosomes), LevelSpec::pinpoint(),
                                                    LevelSpec::interval()},
                                          qs));
  in.inputs.emplace("Data", build_tensor("Data", {LevelSpec::dense(g.chromosomes), LevelSpec::dense(m),
                                                  LevelSpec::interval()},
                                         ds));
  if (cells != 0) in.inputs.emplace("Grid", build_grid(g, cells, lo, hi));
  in.params = {{"C", static_cast<double>(g.chromosomes)},
               {"N", static_cast<double>(std::max<std::int64_t>(1, id))},
               {"M", static_cast<double>(m)}};
  return in;
}

Genome worked_genome() {
  Genome g;
  g.chromosomes = 2;
  g.data = {{closed(0.2, 0.4)},
            {closed(0, 1), closed(1.5, 2.5), closed(2, 3.5), closed(4.5, 6), closed(6.5, 7.5)}};
  g.queries = {{closed(0.1, 0.3), closed(5, 6)}, {closed(4, 7)}};
  return g;
}

}  // namespace ct::kernels
