// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
//
// Inverted-file retrieval over sketches. Documents are sketched, the
// sketches are clustered into P partitions, and a query probes only the
// partitions whose centroids score highest against its own sketch; a
// sub-algorithm then ranks the original vectors inside the probed partitions
// with exact inner products. With the full partition set selected the result
// is exactly the brute-force ranking.
//
// Hybrid collections use the same machinery: each clustering row is the raw
// dense part concatenated with the sketch of the sparse part, and exact
// scoring uses the full hybrid inner product.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "seismic/dataset.hpp"
#include "seismic/kmeans.hpp"
#include "seismic/sketch.hpp"

namespace seismic {

// Ranks documents from the selected partitions. Implementations score
// exactly every member of those partitions (or, for index-backed scans, every
// member sharing a coordinate with the query).
class SubAlgorithm {
 public:
  virtual ~SubAlgorithm() = default;
  virtual TopKResult run(const HybridVector& q, std::span<const std::uint32_t> partitions,
                         std::size_t k, RetrievalStats* stats) const = 0;
};

class IvfIndex {
 public:
  // ceil(4 * sqrt(count)), the default partition count.
  static std::uint32_t default_partitions(std::size_t count);

  // Sketch + cluster the dataset. `partitions` = 0 picks the default. The
  // transform's input_dim must equal the dataset's sparse_dim; a sparse_dim
  // of 0 (dense-only data) skips sketching entirely.
  static IvfIndex build(std::shared_ptr<const VectorDataset> dataset,
                        const TransformParams& transform, KMeansVariant variant,
                        std::uint32_t partitions, const KMeansOptions& options = {});

  // Centroid scores for the query sketch, one per partition.
  std::vector<double> score_partitions(const HybridVector& q) const;

  // Partitions in descending centroid-score order (ties toward the lower
  // id), cut at the shortest prefix whose member count reaches ell. ell is
  // clamped to [1, count].
  std::vector<std::uint32_t> select_partitions(const HybridVector& q, std::size_t ell) const;

  TopKResult retrieve(const HybridVector& q, std::size_t k, std::size_t ell,
                      const SubAlgorithm& sub, RetrievalStats* stats = nullptr) const;

  void save(const std::filesystem::path& path, bool embed_dataset = true,
            const std::string& dataset_ref = "") const;
  static IvfIndex load(const std::filesystem::path& path);

  const VectorDataset& data() const { return *dataset_; }
  std::shared_ptr<const VectorDataset> dataset() const { return dataset_; }
  const ClusterModel& clusters() const { return clusters_; }
  const TransformParams& transform() const { return transform_; }
  const std::vector<std::vector<std::uint32_t>>& members() const { return members_; }
  std::size_t count() const { return dataset_->count(); }

 private:
  TransformParams transform_;
  ClusterModel clusters_;
  std::vector<std::vector<std::uint32_t>> members_;  // per partition, ascending
  std::shared_ptr<const VectorDataset> dataset_;
};

// Exact scan of every member of the selected partitions against the original
// vectors (hybrid inner product; reduces to the sparse dot on sparse-only
// data).
class ExhaustiveScan final : public SubAlgorithm {
 public:
  explicit ExhaustiveScan(const IvfIndex& index) : index_(index) {}
  TopKResult run(const HybridVector& q, std::span<const std::uint32_t> partitions, std::size_t k,
                 RetrievalStats* stats) const override;

 private:
  const IvfIndex& index_;
};

}  // namespace seismic
