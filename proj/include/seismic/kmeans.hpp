// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seismic/common.hpp"

namespace seismic {

enum class KMeansVariant : std::uint8_t {
  Standard = 0,   // Euclidean assignment, mean centroids
  Spherical = 1,  // max-inner-product assignment, centroids renormalized to
                  // unit length after every update
};

struct KMeansOptions {
  std::uint32_t max_iters = 20;
  double churn_tol = 0.001;  // stop once the fraction of points that changed
                             // assignment in an iteration drops to this
  std::uint64_t seed = 0;
  bool kmeanspp_init = true;  // D^2 seeding; plain uniform sampling otherwise
  std::uint32_t threads = 1;
  bool subsample_training = false;  // train on at most 256*P points, then
                                    // assign the full set once
};

struct ClusterModel {
  std::uint32_t partitions = 0;  // P
  KMeansVariant variant = KMeansVariant::Standard;
  std::uint32_t width = 0;
  std::vector<float> centroids;            // P x width, row-major
  std::vector<std::uint32_t> assignments;  // one per point
  std::uint32_t iterations_run = 0;
  double inertia = 0.0;                  // final sum of squared distances
  std::vector<double> inertia_history;   // objective after each iteration

  std::span<const float> centroid(std::uint32_t p) const {
    return {centroids.data() + static_cast<std::size_t>(p) * width, width};
  }
};

// Lloyd iterations over `count` points of `width` floats each (row-major).
// Ties in assignment go to the lowest centroid id; empty clusters steal the
// point farthest from its current centroid. Deterministic for a fixed
// (points, p, variant, options.seed) in single-threaded mode.
ClusterModel kmeans(std::span<const float> points, std::size_t count, std::uint32_t width,
                    std::uint32_t p, KMeansVariant variant, const KMeansOptions& options = {});

// Nearest centroid for one point under the model's variant.
std::uint32_t assign(std::span<const float> point, const ClusterModel& model);

}  // namespace seismic
