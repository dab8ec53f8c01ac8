// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
//
// Coordinate-at-a-time retrieval. The partitioned layout stores one posting
// list per coordinate, segmented by partition: postings are ordered by
// (partition rank, doc id) and a per-coordinate skip list records where each
// partition's segment starts, so a query that probes a subset of partitions
// walks only those segments. LinScan is the unpartitioned exact baseline,
// with a time-budgeted variant that processes coordinates in decreasing
// query-weight order until the clock runs out.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "seismic/dataset.hpp"
#include "seismic/ivf.hpp"

namespace seismic {

struct Posting {
  std::uint32_t doc;
  float value;
  friend bool operator==(const Posting&, const Posting&) = default;
};

struct SkipEntry {
  std::uint32_t partition;
  std::uint32_t offset;
  friend bool operator==(const SkipEntry&, const SkipEntry&) = default;
};

// Bijective relabeling that makes each partition's members contiguous:
// new ids run through partition 0's members in ascending old order, then
// partition 1's, and so on.
struct DocIdRemap {
  std::vector<std::uint32_t> forward;  // old -> new
  std::vector<std::uint32_t> inverse;  // new -> old
};
DocIdRemap remap_doc_ids(std::span<const std::vector<std::uint32_t>> partitions,
                         std::size_t doc_count);

// f64 score accumulator over a fixed doc-id space, tracking which documents
// were touched. One instance serves one in-flight query.
class ScoreAccumulator {
 public:
  explicit ScoreAccumulator(std::size_t doc_count)
      : scores_(doc_count, 0.0), touched_flag_(doc_count, 0) {}

  void add(std::uint32_t doc, double term) {
    if (!touched_flag_[doc]) {
      touched_flag_[doc] = 1;
      touched_.push_back(doc);
    }
    scores_[doc] += term;
  }

  std::span<const std::uint32_t> touched() const { return touched_; }
  double score(std::uint32_t doc) const { return scores_[doc]; }

  void reset() {
    for (std::uint32_t doc : touched_) {
      scores_[doc] = 0.0;
      touched_flag_[doc] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<double> scores_;
  std::vector<std::uint8_t> touched_flag_;
  std::vector<std::uint32_t> touched_;
};

struct IndexOverhead {
  std::uint64_t skip_integers = 0;    // total u32s across all skip lists
  std::uint64_t posting_entries = 0;  // total (doc, value) pairs
};

class PartitionedInvertedIndex {
 public:
  // Builds the segmented lists from a sparse-only dataset and a disjoint
  // partitioning of its ids. With remap_ids the stored doc ids are the
  // contiguous relabeling; results always come back in original ids.
  static PartitionedInvertedIndex build(const VectorDataset& ds,
                                        std::span<const std::vector<std::uint32_t>> partitions,
                                        bool remap_ids = true);

  // Disjunctive scoring over the selected partitions (any order; internally
  // re-sorted ascending). Only documents sharing at least one coordinate
  // with the query are scored or returned. Query coordinates at or beyond
  // dim() are counted in stats->coords_skipped and otherwise ignored.
  TopKResult query(const SparseVector& q, std::span<const std::uint32_t> partitions,
                   std::size_t k, RetrievalStats* stats = nullptr) const;

  // Documents sharing at least one nonzero coordinate with q, over the whole
  // collection (the denominator of fraction-evaluated reports).
  std::uint64_t count_qualified(const SparseVector& q) const;

  IndexOverhead overhead() const;

  std::uint32_t dim() const { return dim_; }
  std::size_t doc_count() const { return doc_count_; }
  std::uint32_t partition_count() const { return partition_count_; }
  bool remapped() const { return !forward_.empty(); }
  const std::vector<Posting>& postings(std::uint32_t coord) const { return postings_[coord]; }
  const std::vector<SkipEntry>& skips(std::uint32_t coord) const { return skips_[coord]; }

  void save(const std::filesystem::path& path) const;
  static PartitionedInvertedIndex load(const std::filesystem::path& path);

 private:
  std::uint32_t dim_ = 0;
  std::size_t doc_count_ = 0;
  std::uint32_t partition_count_ = 0;
  std::vector<std::vector<Posting>> postings_;
  std::vector<std::vector<SkipEntry>> skips_;
  std::vector<std::uint32_t> forward_, inverse_;  // empty when remap disabled
};

// SubAlgorithm adapter so an IvfIndex can delegate scoring to the
// partitioned lists. Sparse-only queries.
class PartitionedIndexScan final : public SubAlgorithm {
 public:
  explicit PartitionedIndexScan(const PartitionedInvertedIndex& index) : index_(index) {}
  TopKResult run(const HybridVector& q, std::span<const std::uint32_t> partitions, std::size_t k,
                 RetrievalStats* stats) const override;

 private:
  const PartitionedInvertedIndex& index_;
};

class LinScanIndex {
 public:
  static LinScanIndex build(const VectorDataset& ds);

  // Full disjunctive scan: every posting of every query coordinate.
  TopKResult query_exact(const SparseVector& q, std::size_t k,
                         RetrievalStats* stats = nullptr) const;

  // Processes coordinates in descending |q_t| order, checking the clock
  // between coordinates; at least one coordinate is always completed. An
  // infinite budget runs the exact path.
  TopKResult query_budgeted(const SparseVector& q, std::size_t k,
                            std::chrono::nanoseconds budget,
                            RetrievalStats* stats = nullptr) const;

  std::uint64_t count_qualified(const SparseVector& q) const;

  std::uint32_t dim() const { return dim_; }
  std::size_t doc_count() const { return doc_count_; }

 private:
  std::uint32_t dim_ = 0;
  std::size_t doc_count_ = 0;
  std::vector<std::vector<Posting>> postings_;
};

}  // namespace seismic
