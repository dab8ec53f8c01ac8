// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seismic/common.hpp"

namespace seismic {

// Sparse vector over [0, dim). Invariants: indices strictly increasing, all
// below dim, no stored value is exactly 0. Values are f32; every inner
// product accumulates in f64.
struct SparseVector {
  std::uint32_t dim = 0;
  std::vector<std::uint32_t> indices;
  std::vector<float> values;

  // Canonical constructor: sorts entries, strips exact zeros, rejects
  // duplicate or out-of-range coordinates.
  static SparseVector from_entries(std::uint32_t dim,
                                   std::vector<std::pair<std::uint32_t, float>> entries);

  std::size_t nnz() const { return indices.size(); }
  double l2_norm() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

struct DenseVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  double l2_norm() const;

  friend bool operator==(const DenseVector&, const DenseVector&) = default;
};

// Dense head plus sparse tail. Either part may have length 0; a dataset keeps
// the two widths fixed across all vectors.
struct HybridVector {
  DenseVector dense;
  SparseVector sparse;

  friend bool operator==(const HybridVector&, const HybridVector&) = default;
};

double dot(const SparseVector& u, const SparseVector& v);
double dot(const DenseVector& u, const DenseVector& v);
double dot(const HybridVector& u, const HybridVector& v);

// Unit-normalized copy; rejects zero-norm input.
SparseVector l2_normalized(const SparseVector& u);
DenseVector l2_normalized(const DenseVector& u);

// Query-time weighting: dense part scaled by w, sparse part by (1 - w).
// Scaled-to-zero entries are stripped so the sparse invariant holds.
HybridVector weighted_query(const HybridVector& q, float w_dense);

}  // namespace seismic
