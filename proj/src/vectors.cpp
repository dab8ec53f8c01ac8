// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#include "seismic/vectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seismic {

TopKResult select_top_k(std::vector<ScoredDoc> candidates, std::size_t k) {
  const std::size_t n = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n),
                    candidates.end(), score_before);
  candidates.resize(n);
  return candidates;
}

SparseVector SparseVector::from_entries(std::uint32_t dim,
                                        std::vector<std::pair<std::uint32_t, float>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector out;
  out.dim = dim;
  out.indices.reserve(entries.size());
  out.values.reserve(entries.size());
  for (const auto& [idx, val] : entries) {
    if (idx >= dim) throw std::invalid_argument("sparse entry coordinate out of range");
    if (!out.indices.empty() && out.indices.back() == idx)
      throw std::invalid_argument("duplicate sparse coordinate");
    if (val == 0.0f) continue;
    out.indices.push_back(idx);
    out.values.push_back(val);
  }
  return out;
}

double SparseVector::l2_norm() const {
  double acc = 0.0;
  for (float v : values) acc += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(acc);
}

double DenseVector::l2_norm() const {
  double acc = 0.0;
  for (float v : values) acc += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(acc);
}

double dot(const SparseVector& u, const SparseVector& v) {
  if (u.dim != v.dim) throw std::invalid_argument("sparse dot: dimension mismatch");
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < u.indices.size() && j < v.indices.size()) {
    const std::uint32_t a = u.indices[i], b = v.indices[j];
    if (a == b) {
      acc += static_cast<double>(u.values[i]) * static_cast<double>(v.values[j]);
      ++i;
      ++j;
    } else if (a < b) {
      ++i;
    } else {
      ++j;
    }
  }
  return acc;
}

double dot(const DenseVector& u, const DenseVector& v) {
  if (u.dim() != v.dim()) throw std::invalid_argument("dense dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i)
    acc += static_cast<double>(u.values[i]) * static_cast<double>(v.values[i]);
  return acc;
}

double dot(const HybridVector& u, const HybridVector& v) {
  return dot(u.dense, v.dense) + dot(u.sparse, v.sparse);
}

SparseVector l2_normalized(const SparseVector& u) {
  const double norm = u.l2_norm();
  if (norm == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
  SparseVector out = u;
  for (float& v : out.values) v = static_cast<float>(static_cast<double>(v) / norm);
  return out;
}

DenseVector l2_normalized(const DenseVector& u) {
  const double norm = u.l2_norm();
  if (norm == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
  DenseVector out = u;
  for (float& v : out.values) v = static_cast<float>(static_cast<double>(v) / norm);
  return out;
}

HybridVector weighted_query(const HybridVector& q, float w_dense) {
  HybridVector out;
  out.dense.values.reserve(q.dense.values.size());
  for (float v : q.dense.values) out.dense.values.push_back(v * w_dense);
  const float w_sparse = 1.0f - w_dense;
  out.sparse.dim = q.sparse.dim;
  for (std::size_t i = 0; i < q.sparse.nnz(); ++i) {
    const float v = q.sparse.values[i] * w_sparse;
    if (v == 0.0f) continue;
    out.sparse.indices.push_back(q.sparse.indices[i]);
    out.sparse.values.push_back(v);
  }
  return out;
}

}  // namespace seismic
