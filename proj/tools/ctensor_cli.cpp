#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctensor/compiler.hpp"
#include "ctensor/io.hpp"
#include "ctensor/kernels.hpp"
#include "ctensor/lang.hpp"
#include "ctensor/oracle.hpp"

using namespace ct;
namespace k = ct::kernels;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUser = 1, kMismatch = 2, kInternal = 3 };

struct UserError : Error {
  using Error::Error;
};

struct ProgramArgs {
  std::string program;
  std::vector<std::string> binds;
  std::vector<std::string> params;
  bool opt_bounds = false;
  bool sum_skip = false;
};

void add_program_args(CLI::App* sub, ProgramArgs& a) {
  sub->add_option("--program", a.program, "kernel file (.ct)")->required();
  sub->add_option("--bind", a.binds, "NAME=tensor.json");
  sub->add_option("--param", a.params, "NAME=value");
  sub->add_flag("--opt-bounds", a.opt_bounds, "delete guards the bound analysis proves");
  sub->add_flag("--sum-skip-intervals", a.sum_skip, "skip sums over positive-length regions");
}

std::pair<std::string, std::string> split_kv(const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw UserError("expected NAME=VALUE, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

struct Loaded {
  NodePtr program;
  Bindings inputs;
};

// Parses, binds params and tensors, and validates.
Loaded load(const ProgramArgs& a) {
  Loaded l;
  std::map<std::string, double> params;
  for (const auto& p : a.params) {
    auto [name, text] = split_kv(p);
    try {
      std::size_t used = 0;
      params[name] = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw UserError("param " + name + ": not a number: " + text);
    }
  }
  for (const auto& b : a.binds) {
    auto [name, path] = split_kv(b);
    auto t = load_tensor(path, name);
    t.name = name;
    l.inputs.insert_or_assign(name, std::move(t));
  }
  l.program = bind_params(parse_program(read_file(a.program)), params);
  auto out = find_assign(l.program)->arg(0)->name;
  ir::visit(l.program, [&](const NodePtr& n) {
    if (n->kind == NodeKind::access && n->name != out && !l.inputs.count(n->name)) {
      throw BindingError("missing binding for tensor " + n->name);
    }
    return true;
  });
  Signatures sigs;
  for (const auto& [n, t] : l.inputs) sigs.emplace(n, signature_of(t));
  auto ds = validate(l.program, sigs, a.sum_skip);
  if (!ds.empty()) {
    std::string msg = "program rejected:";
    for (const auto& d : ds) msg += "\n  " + d.rule + ": " + d.message;
    throw ValidationError(msg);
  }
  return l;
}

json stats_json(const ExecStats& s) {
  return json{{"multiplies", s.multiplies}, {"segments_visited", s.segments_visited},
              {"pieces_emitted", s.pieces_emitted}};
}

int cmd_run(const ProgramArgs& a, const std::string& out, bool stats) {
  auto l = load(a);
  auto c = compile_program(l.program, l.inputs, {a.sum_skip, a.opt_bounds});
  auto r = run_plan(c.post, l.inputs, c.outputs);
  const auto& t = r.outputs.begin()->second;
  if (out.empty() || out == "-") {
    std::cout << tensor_to_json(t);
  } else {
    save_tensor(t, out);
  }
  for (const auto& d : r.diagnostics) std::cerr << "note: " << d << "\n";
  if (stats) (out.empty() || out == "-" ? std::cerr : std::cout) << stats_json(r.stats).dump(2) << "\n";
  return kOk;
}

// Runs the plan and the oracle on one instance; returns the first mismatch.
std::string diff_against_oracle(const NodePtr& prog, const Bindings& in, const CompileOptions& opt, double tol) {
  auto c = compile_program(prog, in, opt);
  auto got = run_plan(c.post, in, c.outputs);
  auto want = oracle_eval(prog, in, opt.sum_skip_intervals);
  for (const auto& [name, t] : want.outputs) {
    std::string why;
    if (!tensors_match(got.outputs.at(name), t, tol, &why)) return name + ": " + why;
  }
  return "";
}

int cmd_check(const ProgramArgs& a, bool corpus, int trials, std::uint64_t seed, double tol) {
  if (!corpus) {
    if (a.program.empty()) throw UserError("check needs --program or --corpus");
    auto l = load(a);
    auto why = diff_against_oracle(l.program, l.inputs, {a.sum_skip, a.opt_bounds}, tol);
    if (!why.empty()) {
      std::cout << "MISMATCH " << why << "\n";
      return kMismatch;
    }
    std::cout << "ok\n";
    return kOk;
  }
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (const auto& name : k::corpus()) {
    auto src = parse_program(k::source(name));
    int fails = 0;
    std::string first;
    for (int t = 0; t < trials; ++t) {
      auto in = k::random_instance(name, rng);
      auto prog = bind_params(src, in.params);
      auto why = diff_against_oracle(prog, in.inputs, {a.sum_skip, a.opt_bounds}, k::is_integral(name) ? tol : 0);
      if (!why.empty() && fails++ == 0) first = why;
    }
    std::cout << name << ": " << (fails ? "MISMATCH " + std::to_string(fails) + "/" : "ok ")
              << (fails ? std::to_string(trials) + " " + first : std::to_string(trials)) << "\n";
    bad += fails > 0;
  }
  return bad ? kMismatch : kOk;
}

int cmd_bench(const std::string& kernel, bool grid, int n, int m, int chromosomes, std::uint64_t seed, int reps) {
  if (kernel != "genomic-overlap") throw UserError("bench supports --kernel genomic-overlap only");
  auto g = k::random_genome(chromosomes, m, n, seed);
  auto in = k::genome_instance(g, grid ? -1 : 0);
  std::string name = grid ? "genomic-overlap-grid" : "genomic-overlap";
  auto c = compile_program(bind_params(parse_program(k::source(name)), in.params), in.inputs);
  std::vector<double> ms;
  RunResult last;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    last = run_plan(c.post, in.inputs, c.outputs);
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  auto sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  std::int64_t hits = 0;
  for (double v : last.outputs.at("Overlap").values) hits += v != 0;
  json j{{"kernel", kernel},         {"variant", grid ? "grid" : "naive"}, {"n", n},
         {"m", m},                   {"chromosomes", chromosomes},         {"seed", seed},
         {"median_ms", sorted[sorted.size() / 2]}, {"runs_ms", ms},        {"overlapping_queries", hits},
         {"stats", stats_json(last.stats)}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_dump(const ProgramArgs& a, const std::string& what) {
  auto l = load(a);
  auto c = compile_program(l.program, l.inputs, {a.sum_skip, a.opt_bounds});
  if (what == "looplets") {
    std::cout << c.looplets;
  } else if (what == "plan") {
    std::cout << ir::print_stmt(c.plan);
  } else {
    std::cout << ir::print_stmt(c.post);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous tensor compiler"};
  app.require_subcommand(1);

  ProgramArgs run_a, check_a, dump_a;
  std::string out;
  bool stats = false;
  auto* run = app.add_subcommand("run", "compile and execute a kernel");
  add_program_args(run, run_a);
  run->add_option("--out", out, "output tensor JSON (default stdout)");
  run->add_flag("--stats", stats, "print execution counters as JSON");

  bool corpus = false;
  int trials = 200;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  auto* check = app.add_subcommand("check", "compare the compiled plan with the reference evaluator");
  check->add_option("--program", check_a.program, "kernel file (.ct)");
  check->add_option("--bind", check_a.binds, "NAME=tensor.json");
  check->add_option("--param", check_a.params, "NAME=value");
  check->add_flag("--opt-bounds", check_a.opt_bounds);
  check->add_flag("--sum-skip-intervals", check_a.sum_skip);
  check->add_flag("--corpus", corpus, "random instances of every shipped kernel");
  check->add_option("--trials", trials, "instances per kernel with --corpus")->check(CLI::PositiveNumber);
  check->add_option("--seed", seed);
  check->add_option("--tol", tol, "relative tolerance for integral kernels");

  std::string kernel = "genomic-overlap";
  bool naive = false, grid = false;
  int n = 1000, m = 50000, chromosomes = 23, reps = 5;
  std::uint64_t bench_seed = 1;
  auto* bench = app.add_subcommand("bench", "time the genomic overlap kernel");
  bench->add_option("--kernel", kernel);
  auto* f_naive = bench->add_flag("--naive", naive);
  bench->add_flag("--grid", grid)->excludes(f_naive);
  bench->add_option("--n", n, "query intervals")->check(CLI::PositiveNumber);
  bench->add_option("--m", m, "data intervals")->check(CLI::PositiveNumber);
  bench->add_option("--chromosomes", chromosomes)->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed);
  bench->add_option("--reps", reps, "timed runs; the median is reported")->check(CLI::PositiveNumber);

  std::string ir = "post-simplify";
  auto* dump = app.add_subcommand("dump", "print an intermediate form");
  add_program_args(dump, dump_a);
  dump->add_option("--ir", ir)->check(CLI::IsMember({"looplets", "plan", "post-simplify"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUser;
  }

  try {
    if (*run) return cmd_run(run_a, out, stats);
    if (*check) return cmd_check(check_a, corpus, trials, seed, tol);
    if (*bench) return cmd_bench(kernel, grid, n, m, chromosomes, bench_seed, reps);
    if (*dump) return cmd_dump(dump_a, ir);
  } catch (const ct::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
