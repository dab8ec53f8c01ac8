// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
//
// Command-line front end: one binary, subcommand style. Every command prints
// its resolved configuration before doing any work so runs are
// self-describing, and every randomized step flows from --seed, so a rerun
// with the same flags reproduces output files byte for byte (single-threaded
// mode). Exit codes: 0 success, 1 usage error, 2 data or validation error.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "seismic/eval.hpp"
#include "seismic/inverted_index.hpp"
#include "seismic/ivf.hpp"
#include "seismic/validation.hpp"

namespace fs = std::filesystem;
using namespace seismic;

namespace {

// Bad invocation (missing file, inconsistent flags): exit 1, as opposed to
// malformed data encountered mid-run (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stream tags so one --seed drives independent generators.
constexpr std::uint64_t kDocStream = 0x0d0cf00dULL;
constexpr std::uint64_t kQueryStream = 0x0975e77eULL;
constexpr std::uint64_t kTransformStream = 0x7e5c0123ULL;
constexpr std::uint64_t kClusterStream = 0xc1b5a9e1ULL;

std::uint32_t resolve_threads(std::uint32_t flag_value) {
  if (flag_value != 0) return flag_value;
  if (const char* env = std::getenv("SEISMIC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::uint32_t>(v);
  }
  return 1;
}

// --ell values at or below 1.0 are fractions of the collection; larger
// values are absolute document counts.
std::size_t resolve_ell(double ell, std::size_t count) {
  if (!(ell > 0.0)) throw UsageError("--ell must be positive");
  double abs = ell <= 1.0 ? std::ceil(ell * static_cast<double>(count)) : ell;
  abs = std::min(abs, static_cast<double>(count));
  return std::max<std::size_t>(1, static_cast<std::size_t>(abs));
}

VectorDataset load_dataset(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path);
  return read_dataset(fs::path(path));
}

void check_same_schema(const VectorDataset& docs, const VectorDataset& queries) {
  if (docs.dense_dim != queries.dense_dim || docs.sparse_dim != queries.sparse_dim)
    throw FormatError("query file schema does not match the dataset");
}

// Weighted-query convention used by every command: hybrid data applies
// w_dense at query time, sparse-only data takes the query as-is.
HybridVector make_query(const VectorDataset& ds, const HybridVector& raw, double w_dense) {
  if (ds.dense_dim == 0) return raw;
  return weighted_query(raw, static_cast<float>(w_dense));
}

struct TransformFlags {
  std::string kind = "jl";
  std::int64_t width = -1;  // n for jl, half-width m otherwise; -1 = default
  std::uint32_t mappings = 2;
  bool non_negative = false;
};

TransformParams make_transform(const TransformFlags& f, std::uint32_t sparse_dim,
                               std::uint64_t seed) {
  if (f.width == 0 || f.width < -1 || f.width > (std::int64_t{1} << 30))
    throw UsageError("--width out of range");
  TransformParams t;
  t.input_dim = sparse_dim;
  t.seed = seed;
  if (f.kind == "jl") {
    t.kind = TransformKind::Jl;
    t.width = f.width < 0 ? 1024 : static_cast<std::uint32_t>(f.width);
  } else if (f.kind == "ws") {
    t.kind = TransformKind::WeakSinnamon;
    t.width = f.width < 0 ? 64 : static_cast<std::uint32_t>(f.width);
    t.non_negative = f.non_negative;
  } else {  // sinnamon
    t.kind = TransformKind::Sinnamon;
    t.width = f.width < 0 ? 64 : static_cast<std::uint32_t>(f.width);
    t.mappings = f.mappings;
  }
  if (t.kind == TransformKind::Sinnamon && t.mappings == 0)
    throw UsageError("--mappings must be positive");
  return t;
}

const char* transform_name(TransformKind k) {
  switch (k) {
    case TransformKind::Jl: return "jl";
    case TransformKind::WeakSinnamon: return "ws";
    case TransformKind::Sinnamon: return "sinnamon";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// gen-synthetic

struct GenArgs {
  std::size_t docs = 10000, queries = 1000;
  std::uint32_t dense_dim = 64, sparse_dim = 1000, support = 16;
  double scale = 0.5;
  std::uint64_t seed = 42;
  std::string out_docs = "docs.svec", out_queries = "queries.svec";
};

int cmd_gen_synthetic(const GenArgs& a) {
  std::printf("config: docs=%zu queries=%zu dense_dim=%u sparse_dim=%u support=%u scale=%g "
              "seed=%llu out_docs=%s out_queries=%s\n",
              a.docs, a.queries, a.dense_dim, a.sparse_dim, a.support, a.scale,
              static_cast<unsigned long long>(a.seed), a.out_docs.c_str(),
              a.out_queries.c_str());
  SyntheticSpec spec;
  spec.docs = a.docs;
  spec.queries = a.queries;
  spec.dense_dim = a.dense_dim;
  spec.sparse_dim = a.sparse_dim;
  spec.support = a.support;
  spec.scale = a.scale;
  spec.doc_seed = mix64(a.seed ^ kDocStream);
  spec.query_seed = mix64(a.seed ^ kQueryStream);
  const SyntheticWorkload w = gen_synthetic_hybrid(spec);
  write_dataset(w.docs, fs::path(a.out_docs));
  write_dataset(w.queries, fs::path(a.out_queries));
  std::printf("wrote %zu documents to %s and %zu queries to %s\n", w.docs.count(),
              a.out_docs.c_str(), w.queries.count(), a.out_queries.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// exact-topk

struct ExactArgs {
  std::string dataset, queries, out = "truth.txt";
  std::size_t k = 10;
  double w_dense = 0.5;
};

int cmd_exact_topk(const ExactArgs& a) {
  const VectorDataset ds = load_dataset(a.dataset);
  const VectorDataset qs = load_dataset(a.queries);
  check_same_schema(ds, qs);
  std::printf("config: dataset=%s(%zu) queries=%s(%zu) k=%zu w_dense=%g out=%s\n",
              a.dataset.c_str(), ds.count(), a.queries.c_str(), qs.count(), a.k, a.w_dense,
              a.out.c_str());
  std::vector<TopKResult> results;
  results.reserve(qs.count());
  for (const HybridVector& raw : qs.vectors)
    results.push_back(exact_topk(ds, make_query(ds, raw, a.w_dense), a.k));
  write_results(fs::path(a.out), results);
  std::printf("wrote exact top-%zu for %zu queries to %s\n", a.k, results.size(),
              a.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// build-index

struct BuildArgs {
  std::string dataset, out = "index.sivf";
  TransformFlags tf;
  bool signed_values = false;  // veto the automatic non-negative detection
  std::string clustering = "spherical";
  std::uint32_t partitions = 0;  // 0 = ceil(4 sqrt(count))
  std::uint32_t max_iters = 20;
  double churn_tol = 0.001;
  std::uint64_t seed = 42;
  std::uint32_t threads = 0;  // 0 = SEISMIC_THREADS or 1
  bool uniform_init = false, subsample = false, no_embed = false;
  std::string dataset_ref;
};

int cmd_build_index(const BuildArgs& a) {
  auto ds = std::make_shared<const VectorDataset>(load_dataset(a.dataset));
  const std::size_t count = ds->count();
  if (count == 0) throw FormatError("dataset is empty");

  if (a.tf.non_negative && a.signed_values)
    throw UsageError("--non-negative and --signed conflict");
  TransformFlags tf = a.tf;
  bool auto_nn = false;
  if (tf.kind == "ws" && !tf.non_negative && !a.signed_values) {
    // Give the whole budget to the upper sketch when no value could ever
    // land in the lower half.
    auto_nn = std::none_of(ds->vectors.begin(), ds->vectors.end(), [](const HybridVector& v) {
      return std::any_of(v.sparse.values.begin(), v.sparse.values.end(),
                         [](float x) { return x < 0.0f; });
    });
    tf.non_negative = auto_nn;
  }
  const TransformParams transform =
      make_transform(tf, ds->sparse_dim, mix64(a.seed ^ kTransformStream));
  const KMeansVariant variant =
      a.clustering == "spherical" ? KMeansVariant::Spherical : KMeansVariant::Standard;
  const std::uint32_t p =
      a.partitions != 0 ? a.partitions : IvfIndex::default_partitions(count);
  if (p > count) throw UsageError("--partitions exceeds the document count");

  KMeansOptions opt;
  opt.max_iters = a.max_iters;
  opt.churn_tol = a.churn_tol;
  opt.seed = mix64(a.seed ^ kClusterStream);
  opt.kmeanspp_init = !a.uniform_init;
  opt.threads = resolve_threads(a.threads);
  opt.subsample_training = a.subsample;

  std::printf("config: dataset=%s(%zu, dense=%u, sparse=%u) transform=%s width=%u",
              a.dataset.c_str(), count, ds->dense_dim, ds->sparse_dim,
              transform_name(transform.kind), transform.width);
  if (transform.kind == TransformKind::Sinnamon)
    std::printf(" mappings=%u", transform.mappings);
  if (transform.kind == TransformKind::WeakSinnamon && transform.non_negative)
    std::printf(" non_negative%s", auto_nn ? "(auto)" : "");
  std::printf(" clustering=%s partitions=%u%s max_iters=%u churn_tol=%g seed=%llu threads=%u "
              "out=%s\n",
              a.clustering.c_str(), p, a.partitions == 0 ? "(auto)" : "", a.max_iters,
              a.churn_tol, static_cast<unsigned long long>(a.seed), opt.threads,
              a.out.c_str());

  const IvfIndex index = IvfIndex::build(ds, transform, variant, p, opt);

  std::string ref = a.dataset_ref;
  if (a.no_embed && ref.empty()) ref = fs::absolute(a.dataset).string();
  index.save(fs::path(a.out), !a.no_embed, ref);

  std::size_t smallest = count, largest = 0, empties = 0;
  for (const auto& m : index.members()) {
    smallest = std::min(smallest, m.size());
    largest = std::max(largest, m.size());
    empties += m.empty() ? 1 : 0;
  }
  std::printf("built %u partitions in %u iterations (inertia %.6g); sizes min=%zu max=%zu "
              "empty=%zu; wrote %s\n",
              index.clusters().partitions, index.clusters().iterations_run,
              index.clusters().inertia, smallest, largest, empties, a.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// search

struct SearchArgs {
  std::string index, queries, out = "results.txt";
  std::size_t k = 10;
  double ell = 1.0;
  std::string sub = "exhaustive";
  double w_dense = 0.5;
};

int cmd_search(const SearchArgs& a) {
  if (!fs::exists(a.index)) throw UsageError("no such file: " + a.index);
  const IvfIndex index = IvfIndex::load(fs::path(a.index));
  const VectorDataset& ds = index.data();
  const VectorDataset qs = load_dataset(a.queries);
  check_same_schema(ds, qs);
  const std::size_t ell_abs = resolve_ell(a.ell, index.count());
  std::printf("config: index=%s(%zu docs, %u partitions) queries=%s(%zu) k=%zu ell=%g "
              "ell_docs=%zu sub=%s w_dense=%g out=%s\n",
              a.index.c_str(), index.count(), index.clusters().partitions, a.queries.c_str(),
              qs.count(), a.k, a.ell, ell_abs, a.sub.c_str(), a.w_dense, a.out.c_str());

  std::unique_ptr<PartitionedInvertedIndex> postings;
  std::unique_ptr<SubAlgorithm> sub;
  if (a.sub == "inverted") {
    if (!ds.sparse_only())
      throw FormatError("--sub inverted requires a sparse-only dataset");
    postings = std::make_unique<PartitionedInvertedIndex>(
        PartitionedInvertedIndex::build(ds, index.members()));
    sub = std::make_unique<PartitionedIndexScan>(*postings);
  } else {
    sub = std::make_unique<ExhaustiveScan>(index);
  }

  std::vector<TopKResult> results;
  results.reserve(qs.count());
  for (const HybridVector& raw : qs.vectors)
    results.push_back(index.retrieve(make_query(ds, raw, a.w_dense), a.k, ell_abs, *sub));
  write_results(fs::path(a.out), results);
  std::printf("wrote top-%zu for %zu queries to %s\n", a.k, results.size(), a.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string index, queries, truth, out = "bench.csv";
  std::size_t k = 10;
  std::vector<double> ells{0.01, 0.02, 0.05, 0.1};
  std::vector<std::string> systems{"ivf-exhaustive", "ivf-inverted"};
  std::size_t repeats = 10;
  std::uint32_t threads = 0;
  double w_dense = 0.5;
};

int cmd_bench(const BenchArgs& a) {
  if (!fs::exists(a.index)) throw UsageError("no such file: " + a.index);
  if (a.repeats == 0) throw UsageError("--repeats must be positive");
  if (a.ells.empty()) throw UsageError("--ell needs at least one value");
  const IvfIndex index = IvfIndex::load(fs::path(a.index));
  const VectorDataset& ds = index.data();
  const VectorDataset qfile = load_dataset(a.queries);
  check_same_schema(ds, qfile);
  const std::uint32_t threads = resolve_threads(a.threads);

  std::printf("config: index=%s(%zu docs) queries=%s(%zu) k=%zu repeats=%zu threads=%u "
              "w_dense=%g truth=%s out=%s\n",
              a.index.c_str(), index.count(), a.queries.c_str(), qfile.count(), a.k,
              a.repeats, threads, a.w_dense, a.truth.empty() ? "(computed)" : a.truth.c_str(),
              a.out.c_str());

  std::vector<HybridVector> queries;
  queries.reserve(qfile.count());
  for (const HybridVector& raw : qfile.vectors) queries.push_back(make_query(ds, raw, a.w_dense));

  std::vector<TopKResult> truth;
  if (!a.truth.empty()) {
    if (!fs::exists(a.truth)) throw UsageError("no such file: " + a.truth);
    truth = read_results(fs::path(a.truth));
    if (truth.size() != queries.size())
      throw FormatError("ground truth has " + std::to_string(truth.size()) +
                        " lines for " + std::to_string(queries.size()) + " queries");
  } else {
    truth.reserve(queries.size());
    for (const HybridVector& q : queries) truth.push_back(exact_topk(ds, q, a.k));
  }

  const bool wants_linscan = std::any_of(a.systems.begin(), a.systems.end(),
                                         [](const std::string& s) {
                                           return s.rfind("linscan", 0) == 0;
                                         });
  const bool wants_inverted =
      std::count(a.systems.begin(), a.systems.end(), std::string("ivf-inverted")) != 0;
  if ((wants_linscan || wants_inverted) && !ds.sparse_only())
    throw FormatError("linscan and inverted systems need a sparse-only dataset");

  std::unique_ptr<LinScanIndex> lin;
  if (wants_linscan || ds.sparse_only())
    lin = std::make_unique<LinScanIndex>(LinScanIndex::build(ds));
  std::unique_ptr<PartitionedInvertedIndex> postings;
  std::unique_ptr<PartitionedIndexScan> postings_scan;
  if (wants_inverted) {
    postings = std::make_unique<PartitionedInvertedIndex>(
        PartitionedInvertedIndex::build(ds, index.members()));
    postings_scan = std::make_unique<PartitionedIndexScan>(*postings);
  }
  const ExhaustiveScan exhaustive{index};

  const QualifiedFn qualified = [&](const HybridVector& q) -> std::uint64_t {
    if (!ds.sparse_only()) return ds.count();  // dense part touches every doc
    return lin->count_qualified(q.sparse);
  };

  // Budgeted scans express ell as a fraction of the measured full-scan cost.
  double mean_exact_seconds = 0.0;
  if (std::count(a.systems.begin(), a.systems.end(), std::string("linscan-budgeted")) != 0) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const HybridVector& q : queries) lin->query_exact(q.sparse, a.k);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    mean_exact_seconds = queries.empty() ? 0.0 : dt.count() / static_cast<double>(queries.size());
    std::printf("calibration: mean exact scan %.3g ms/query\n", mean_exact_seconds * 1e3);
  }

  std::vector<BenchRow> rows;
  for (const std::string& system : a.systems) {
    for (double frac : a.ells) {
      if (!(frac > 0.0)) throw UsageError("--ell values must be positive");
      QueryFn fn;
      if (system == "ivf-exhaustive" || system == "ivf-inverted") {
        const std::size_t ell_abs = resolve_ell(frac, index.count());
        const SubAlgorithm* sub =
            system == "ivf-exhaustive" ? static_cast<const SubAlgorithm*>(&exhaustive)
                                       : postings_scan.get();
        fn = [&index, sub, k = a.k, ell_abs](const HybridVector& q, RetrievalStats& st) {
          return index.retrieve(q, k, ell_abs, *sub, &st);
        };
      } else if (system == "linscan-exact") {
        fn = [&lin, k = a.k](const HybridVector& q, RetrievalStats& st) {
          return lin->query_exact(q.sparse, k, &st);
        };
      } else if (system == "linscan-budgeted") {
        const auto budget = std::chrono::nanoseconds(
            static_cast<std::int64_t>(frac * mean_exact_seconds * 1e9));
        fn = [&lin, k = a.k, budget](const HybridVector& q, RetrievalStats& st) {
          return lin->query_budgeted(q.sparse, k, budget, &st);
        };
      } else {
        throw UsageError("unknown system: " + system);
      }
      const BenchOutcome r = run_bench(queries, truth, a.k, fn, qualified, a.repeats, threads);
      rows.push_back({system, a.k, frac, r.accuracy, r.qps, r.frac_evaluated, a.repeats});
      std::printf("%-16s ell=%-6g accuracy=%.4f qps=%.1f frac_evaluated=%.4f\n",
                  system.c_str(), frac, r.accuracy, r.qps, r.frac_evaluated);
    }
  }

  if (a.out == "-") {
    write_bench_csv(std::cout, rows);
  } else {
    std::ofstream out(a.out);
    if (!out) throw FormatError("cannot open " + a.out + " for writing");
    write_bench_csv(out, rows);
    std::printf("wrote %zu rows to %s\n", rows.size(), a.out.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// validate-theorems

struct ValidateArgs {
  std::size_t trials = 10000;
  std::uint64_t seed = 7;
};

SparseVector sparse_of(std::uint32_t dim,
                       std::vector<std::pair<std::uint32_t, float>> entries) {
  return SparseVector::from_entries(dim, std::move(entries));
}

int cmd_validate_theorems(const ValidateArgs& a) {
  std::printf("config: trials=%zu seed=%llu\n", a.trials,
              static_cast<unsigned long long>(a.seed));
  bool all_ok = true;
  const auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::printf("[validate] %-34s %s  (%s)\n", name, ok ? "PASS" : "FAIL", detail.c_str());
    all_ok = all_ok && ok;
  };
  char detail[160];

  // Moments of the sign-projection estimator over five fixed pairs.
  const std::uint32_t dim = 256, n = 1024;
  Rng pair_rng(mix64(a.seed ^ 0x9a125ULL));
  const auto random_sparse = [&](std::uint32_t nnz, bool mixed_sign) {
    std::vector<std::pair<std::uint32_t, float>> e;
    std::vector<std::uint8_t> used(dim, 0);
    while (e.size() < nnz) {
      const auto c = static_cast<std::uint32_t>(pair_rng.next_below(dim));
      if (used[c]) continue;
      used[c] = 1;
      double v = pair_rng.next_exp(0.5) + 0.05;
      if (mixed_sign && pair_rng.next_unit() < 0.5) v = -v;
      e.emplace_back(c, static_cast<float>(v));
    }
    return sparse_of(dim, std::move(e));
  };
  const SparseVector unit = l2_normalized(random_sparse(16, false));
  const std::pair<SparseVector, SparseVector> pairs[] = {
      {sparse_of(dim, {{0, 1.f}, {2, .5f}, {4, 2.f}}),
       sparse_of(dim, {{1, 1.f}, {3, -.5f}, {5, 1.5f}})},  // disjoint supports
      {unit, unit},                                        // identical unit vector
      {random_sparse(16, true), random_sparse(16, true)},
      {random_sparse(64, false), random_sparse(64, false)},
      {random_sparse(24, true), random_sparse(8, false)},
  };
  int idx = 0;
  for (const auto& [u, v] : pairs) {
    ++idx;
    const MomentCheck c =
        validate_sign_sketch_moments(u, v, n, a.trials, mix64(a.seed ^ (0xA0 + idx)));
    std::snprintf(detail, sizeof detail, "mean %.4f vs %.4f (z=%.2f), var %.3g vs %.3g",
                  c.empirical_mean, c.expected_mean, c.mean_z, c.empirical_var,
                  c.expected_var);
    std::string name = "sign sketch moments, pair " + std::to_string(idx);
    report(name.c_str(), c.ok(), detail);
  }

  // Random-document model: coordinates active with probability psi/N.
  {
    const std::uint32_t model_dim = 1000, psi = 16;
    std::vector<std::pair<std::uint32_t, float>> qe;
    Rng vrng(mix64(a.seed ^ 0x71ULL));
    std::vector<std::uint8_t> used(model_dim, 0);
    while (qe.size() < psi) {
      const auto c = static_cast<std::uint32_t>(vrng.next_below(model_dim));
      if (used[c]) continue;
      used[c] = 1;
      qe.emplace_back(c, static_cast<float>(vrng.next_exp(0.5) + 0.05));
    }
    const SparseVector q = l2_normalized(sparse_of(model_dim, std::move(qe)));
    const double p = static_cast<double>(psi) / model_dim;
    const MomentCheck c = validate_sign_sketch_random_docs(q, p, 0.5, n, a.trials,
                                                           mix64(a.seed ^ 0xB1ULL));
    std::snprintf(detail, sizeof detail, "mean %.4f vs %.4f (z=%.2f), var %.3g vs %.3g",
                  c.empirical_mean, c.expected_mean, c.mean_z, c.empirical_var,
                  c.expected_var);
    report("sign sketch, random-doc model", c.ok(), detail);

    const MomentCheck bad = validate_sign_sketch_random_docs(q, p, 0.5, n, a.trials,
                                                             mix64(a.seed ^ 0xB1ULL), 2.0);
    std::snprintf(detail, sizeof detail, "corrupted var rel err %.3f", bad.var_rel_err);
    report("corrupted variance must fail", !bad.var_ok(), detail);
  }

  // Never-underestimate property of the extrema sketch.
  {
    const BoundCheck c = validate_ws_upper_bound(dim, 64, a.trials, mix64(a.seed ^ 0xC2ULL));
    std::snprintf(detail, sizeof detail, "%zu violations in %zu trials, worst gap %.3g",
                  c.violations, c.trials, c.worst_gap);
    report("extrema sketch upper bound", c.ok(), detail);
  }

  // Overestimation error distribution vs the integrated approximation.
  {
    std::vector<double> grid(50);
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid[i] = 3.0 * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    const std::size_t trials = std::max<std::size_t>(a.trials, 10000);
    const CdfComparison c = validate_extrema_error_cdf(1000, 16.0 / 1000.0, 0.5, 64, trials,
                                                       grid, mix64(a.seed ^ 0xD3ULL));
    std::snprintf(detail, sizeof detail, "max CDF gap %.4f over %zu deltas", c.max_gap,
                  c.grid.size());
    report("extrema error distribution", c.ok(), detail);

    const CdfComparison bad = validate_extrema_error_cdf(1000, 16.0 / 1000.0, 0.5, 64, trials,
                                                         grid, mix64(a.seed ^ 0xD3ULL), 2.0);
    std::snprintf(detail, sizeof detail, "corrupted max gap %.4f", bad.max_gap);
    report("corrupted error scale must fail", !bad.ok(), detail);
  }

  if (!all_ok) {
    std::fprintf(stderr, "validation failed\n");
    return 2;
  }
  std::printf("all checks passed\n");
  return 0;
}

// ---------------------------------------------------------------------------
// index-stats

struct StatsArgs {
  std::string index;
};

int cmd_index_stats(const StatsArgs& a) {
  if (!fs::exists(a.index)) throw UsageError("no such file: " + a.index);
  const IvfIndex index = IvfIndex::load(fs::path(a.index));
  const VectorDataset& ds = index.data();
  std::printf("config: index=%s\n", a.index.c_str());
  std::printf("documents:      %zu (dense_dim=%u, sparse_dim=%u)\n", index.count(),
              ds.dense_dim, ds.sparse_dim);
  const TransformParams& t = index.transform();
  std::printf("transform:      %s width=%u seed=%llu", transform_name(t.kind), t.width,
              static_cast<unsigned long long>(t.seed));
  if (t.kind == TransformKind::Sinnamon) std::printf(" mappings=%u", t.mappings);
  if (t.kind == TransformKind::WeakSinnamon && t.non_negative) std::printf(" non_negative");
  std::printf("\n");
  const ClusterModel& cm = index.clusters();
  std::printf("clustering:     %s, %u partitions, %u iterations, inertia %.6g\n",
              cm.variant == KMeansVariant::Spherical ? "spherical" : "standard",
              cm.partitions, cm.iterations_run, cm.inertia);
  std::size_t smallest = index.count(), largest = 0, empties = 0;
  for (const auto& m : index.members()) {
    smallest = std::min(smallest, m.size());
    largest = std::max(largest, m.size());
    empties += m.empty() ? 1 : 0;
  }
  std::printf("partition size: min=%zu mean=%.1f max=%zu empty=%zu\n", smallest,
              static_cast<double>(index.count()) / cm.partitions, largest, empties);
  std::printf("file size:      %ju bytes\n",
              static_cast<std::uintmax_t>(fs::file_size(a.index)));

  if (ds.sparse_only()) {
    const auto postings = PartitionedInvertedIndex::build(ds, index.members());
    const IndexOverhead o = postings.overhead();
    const std::uint64_t bound =
        2ull * static_cast<std::uint64_t>(ds.sparse_dim) * cm.partitions;
    std::printf("inverted index: %llu postings, %llu skip integers (bound 2NP=%llu)\n",
                static_cast<unsigned long long>(o.posting_entries),
                static_cast<unsigned long long>(o.skip_integers),
                static_cast<unsigned long long>(bound));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maximum-inner-product search over sparse and hybrid vectors"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from an INI file (flags win)");

  GenArgs gen;
  CLI::App* cgen = app.add_subcommand("gen-synthetic", "generate the synthetic workload");
  cgen->add_option("--docs", gen.docs, "document count");
  cgen->add_option("--queries", gen.queries, "query count");
  cgen->add_option("--dense-dim", gen.dense_dim, "dense width (0 for sparse-only)");
  cgen->add_option("--sparse-dim", gen.sparse_dim, "sparse width");
  cgen->add_option("--support", gen.support, "nonzeros per sparse part");
  cgen->add_option("--scale", gen.scale, "exponential value scale");
  cgen->add_option("--seed", gen.seed, "master seed");
  cgen->add_option("--out-docs", gen.out_docs, "output path for documents");
  cgen->add_option("--out-queries", gen.out_queries, "output path for queries");

  ExactArgs exact;
  CLI::App* cexact = app.add_subcommand("exact-topk", "exhaustive ground truth");
  cexact->add_option("--dataset", exact.dataset, "SVEC document file")->required();
  cexact->add_option("--queries", exact.queries, "SVEC query file")->required();
  cexact->add_option("--k", exact.k, "results per query");
  cexact->add_option("--w-dense", exact.w_dense, "query-time dense weight (hybrid only)");
  cexact->add_option("--out", exact.out, "output results file");

  BuildArgs build;
  CLI::App* cbuild = app.add_subcommand("build-index", "sketch, cluster and save an index");
  cbuild->add_option("--dataset", build.dataset, "SVEC document file")->required();
  cbuild->add_option("--out", build.out, "output index path");
  cbuild->add_option("--transform", build.tf.kind, "sketch family")
      ->check(CLI::IsMember({"jl", "ws", "sinnamon"}));
  cbuild->add_option("--width", build.tf.width,
                     "sketch dimension for jl (default 1024), half-width otherwise (default 64)");
  cbuild->add_option("--mappings", build.tf.mappings, "mappings for sinnamon");
  cbuild->add_flag("--non-negative", build.tf.non_negative,
                   "ws only: widen the upper half, negative query mass scores 0 "
                   "(auto-enabled when the dataset has no negative values)");
  cbuild->add_flag("--signed", build.signed_values, "keep the lower half even if no value needs it");
  cbuild->add_option("--clustering", build.clustering, "kmeans variant")
      ->check(CLI::IsMember({"standard", "spherical"}));
  cbuild->add_option("--partitions", build.partitions, "partition count (0 = 4 sqrt(count))");
  cbuild->add_option("--max-iters", build.max_iters, "kmeans iteration cap");
  cbuild->add_option("--churn-tol", build.churn_tol, "kmeans stop threshold");
  cbuild->add_option("--seed", build.seed, "master seed");
  cbuild->add_option("--threads", build.threads, "worker count (0 = SEISMIC_THREADS or 1)");
  cbuild->add_flag("--uniform-init", build.uniform_init, "plain sampling instead of kmeans++");
  cbuild->add_flag("--subsample", build.subsample, "train on at most 256 P points");
  cbuild->add_flag("--no-embed", build.no_embed, "reference the dataset file instead of embedding");
  cbuild->add_option("--dataset-ref", build.dataset_ref, "path stored with --no-embed");

  SearchArgs search;
  CLI::App* csearch = app.add_subcommand("search", "probe an index");
  csearch->add_option("--index", search.index, "index file")->required();
  csearch->add_option("--queries", search.queries, "SVEC query file")->required();
  csearch->add_option("--k", search.k, "results per query");
  csearch->add_option("--ell", search.ell,
                      "documents to commit to: fraction if <= 1.0, else absolute");
  csearch->add_option("--sub", search.sub, "scoring over the probed partitions")
      ->check(CLI::IsMember({"exhaustive", "inverted"}));
  csearch->add_option("--w-dense", search.w_dense, "query-time dense weight (hybrid only)");
  csearch->add_option("--out", search.out, "output results file");

  BenchArgs bench;
  CLI::App* cbench = app.add_subcommand("bench", "accuracy/throughput sweep");
  cbench->add_option("--index", bench.index, "index file")->required();
  cbench->add_option("--queries", bench.queries, "SVEC query file")->required();
  cbench->add_option("--truth", bench.truth, "results file from exact-topk (default: compute)");
  cbench->add_option("--k", bench.k, "results per query");
  cbench->add_option("--ell", bench.ells, "sweep points (fractions; budget fractions for linscan)")
      ->delimiter(',');
  cbench->add_option("--systems", bench.systems, "systems to measure")
      ->delimiter(',')
      ->check(CLI::IsMember(
          {"ivf-exhaustive", "ivf-inverted", "linscan-exact", "linscan-budgeted"}));
  cbench->add_option("--repeats", bench.repeats, "timing repeats per point");
  cbench->add_option("--threads", bench.threads, "query workers (0 = SEISMIC_THREADS or 1)");
  cbench->add_option("--w-dense", bench.w_dense, "query-time dense weight (hybrid only)");
  cbench->add_option("--out", bench.out, "output CSV path, or - for stdout");

  ValidateArgs val;
  CLI::App* cval = app.add_subcommand("validate-theorems", "Monte-Carlo estimator checks");
  cval->add_option("--trials", val.trials, "trials per check");
  cval->add_option("--seed", val.seed, "master seed");

  StatsArgs stats;
  CLI::App* cstats = app.add_subcommand("index-stats", "describe a saved index");
  cstats->add_option("--index", stats.index, "index file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (cgen->parsed()) return cmd_gen_synthetic(gen);
    if (cexact->parsed()) return cmd_exact_topk(exact);
    if (cbuild->parsed()) return cmd_build_index(build);
    if (csearch->parsed()) return cmd_search(search);
    if (cbench->parsed()) return cmd_bench(bench);
    if (cval->parsed()) return cmd_validate_theorems(val);
    if (cstats->parsed()) return cmd_index_stats(stats);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
