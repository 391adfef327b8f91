#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ctensor/exec.hpp"

namespace ct::kernels {

/// The eight shipped kernels checked against the oracle.
const std::vector<std::string>& corpus();

/// Directory holding `<name>.ct`; CTENSOR_KERNEL_DIR overrides the
/// build-time default.
std::string kernel_dir();
std::string source(const std::string& name);

/// Integral kernels are compared with a relative tolerance, the rest exactly.
bool is_integral(const std::string& name);

struct Instance {
  Bindings inputs;
  std::map<std::string, double> params;
};

/// Small random instance: at most 8 pieces per level, endpoints on a 0.05
/// grid.
Instance random_instance(const std::string& name, std::mt19937_64& rng);

Instance dot_sum_fixture();
Instance dot_integral_fixture();
/// Three points within 1.7 of (2.2, 3.9) and two outside.
Instance radius_count_fixture();
Instance trilinear_ones_fixture();

/// Interval datasets for the genomic kernels, per chromosome.
struct Genome {
  int chromosomes = 0;
  std::vector<std::vector<Iv>> data;     // [chr][jd]
  std::vector<std::vector<Iv>> queries;  // [chr][local query]; ids are global, in chromosome order
  int query_count() const;
  int max_data() const;
};

/// Uniform starts on [0, length), widths uniform on [min_w, max_w].
Genome random_genome(int chromosomes, int data, int queries, std::uint64_t seed, double length = 1e6,
                     double min_w = 100, double max_w = 1000);

/// Query, Data and (with `cells` > 0) Grid tensors plus C, N, M params.
/// Grid cells are right-open and split [lo, hi) uniformly; hi defaults to
/// just past the largest endpoint. cells = -1 picks ceil(sqrt(M_chr)).
Instance genome_instance(const Genome& g, int cells = 0, double lo = NAN, double hi = NAN);
ContTensor build_grid(const Genome& g, int cells, double lo = NAN, double hi = NAN);

/// The worked example: chromosome 1 with data ids 0..4, query 2 = [4, 7],
/// grid halves [0, 4) and [4, 8).
Genome worked_genome();

}  // namespace ct::kernels
