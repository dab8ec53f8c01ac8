// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
//
// Ground truth, accuracy, the synthetic hybrid workload, baseline retrievers
// and the measurement harness. Everything here is deterministic for a fixed
// seed; exact_topk is the single source of truth every accuracy number in the
// project traces back to.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seismic/dataset.hpp"
#include "seismic/sketch.hpp"

namespace seismic {

// Brute-force top-k by the full hybrid inner product over every document.
TopKResult exact_topk(const VectorDataset& ds, const HybridVector& q, std::size_t k);

// |ids(approx@k) ∩ ids(truth@k)| / min(k, |truth|). Set-based: order within
// the top-k does not matter. Empty truth counts as a perfect (vacuous) match.
double accuracy_at_k(const TopKResult& approx, const TopKResult& truth, std::size_t k);

// -------------------------------------------------------------------------
// Synthetic hybrid workload: dense coordinates and sparse values drawn from
// Exp(scale), sparse support chosen uniformly, dense and sparse parts
// L2-normalized separately. Queries come from an independent stream.

struct SyntheticSpec {
  std::size_t docs = 10000;
  std::size_t queries = 1000;
  std::uint32_t dense_dim = 64;
  std::uint32_t sparse_dim = 1000;
  std::uint32_t support = 16;  // nonzeros per sparse part
  double scale = 0.5;
  std::uint64_t doc_seed = 1;
  std::uint64_t query_seed = 2;
};

struct SyntheticWorkload {
  VectorDataset docs;
  VectorDataset queries;
};

// One vector stream. Reproducible: identical arguments give a byte-identical
// dataset on every platform.
VectorDataset gen_synthetic(std::size_t count, std::uint32_t dense_dim, std::uint32_t sparse_dim,
                            std::uint32_t support, double scale, std::uint64_t seed);

SyntheticWorkload gen_synthetic_hybrid(const SyntheticSpec& spec);

// -------------------------------------------------------------------------
// Baselines.

// Separate exact dense-only and sparse-only top-k' lists, union, exact hybrid
// rerank. With cap_union the union is built by interleaving one id from each
// list (dense first) and stops as soon as it holds k documents, so the rerank
// pool is roughly k rather than up to 2k'. Requires a hybrid dataset and
// k' >= k.
TopKResult two_stage_retrieve(const VectorDataset& ds, const HybridVector& q, std::size_t k,
                              std::size_t k_prime, bool cap_union = false);

// Exhaustive scan over sketches: every document is scored from its
// [dense ‖ sketch] row, the best k' are re-scored exactly, and the exact
// top-k of that pool is returned. Isolates sketch quality from clustering.
class SketchScan {
 public:
  static SketchScan build(std::shared_ptr<const VectorDataset> dataset,
                          const TransformParams& transform);

  TopKResult retrieve(const HybridVector& q, std::size_t k, std::size_t k_prime,
                      RetrievalStats* stats = nullptr) const;

  std::uint32_t row_width() const { return width_; }

 private:
  TransformParams transform_;
  std::uint32_t width_ = 0;
  std::vector<float> rows_;
  std::shared_ptr<const VectorDataset> dataset_;
};

// -------------------------------------------------------------------------
// Result files and measurement.

// One line per query: the top-k doc ids, then the matching scores, all
// tab-separated. Scores print with enough digits to round-trip exactly.
void write_results(std::ostream& out, std::span<const TopKResult> results);
void write_results(const std::filesystem::path& path, std::span<const TopKResult> results);
std::vector<TopKResult> read_results(std::istream& in);
std::vector<TopKResult> read_results(const std::filesystem::path& path);

struct BenchOutcome {
  double accuracy = 0.0;        // mean accuracy@k over queries, first repeat
  double qps = 0.0;             // repeats * |queries| / wall seconds
  double frac_evaluated = 0.0;  // mean docs_evaluated / qualified, where qualified > 0
  std::vector<TopKResult> results;
};

using QueryFn = std::function<TopKResult(const HybridVector&, RetrievalStats&)>;
using QualifiedFn = std::function<std::uint64_t(const HybridVector&)>;

// Times `run` over every query, `repeats` times, one query at a time (no
// batching). Accuracy and per-query counters come from the first repeat;
// later repeats only feed the clock. `threads` > 1 splits the query set
// across workers per repeat; results stay deterministic either way.
BenchOutcome run_bench(std::span<const HybridVector> queries, std::span<const TopKResult> truth,
                       std::size_t k, const QueryFn& run, const QualifiedFn& qualified,
                       std::size_t repeats = 10, std::size_t threads = 1);

struct BenchRow {
  std::string system;
  std::size_t k = 0;
  double ell_fraction = 0.0;  // fraction of the collection committed to (or budget fraction)
  double accuracy = 0.0;
  double qps = 0.0;
  double frac_evaluated = 0.0;
  std::size_t repeats = 0;
};

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

}  // namespace seismic
