// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#include "seismic/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "seismic/binary_io.hpp"

namespace seismic {

namespace {

// Domain tags keep the sign matrix and the cell mappings on unrelated hash
// chains even when they share a seed.
constexpr std::uint64_t kSignTag = 0x6a09e667f3bcc908ULL;
constexpr std::uint64_t kCellTag = 0xbb67ae8584caa73bULL;

inline std::uint64_t column_key(std::uint64_t seed, std::uint32_t col) noexcept {
  return mix64(mix64(seed ^ kSignTag) ^ col);
}

// Folds the sparse entries of q into per-cell mass sums, split by sign.
void fold_query(const SparseVector& q, const WeakSinnamonTransform& t,
                std::vector<std::pair<std::uint32_t, float>>& upper,
                std::vector<std::pair<std::uint32_t, float>>& lower) {
  std::vector<std::pair<std::uint32_t, float>> pos, neg;
  pos.reserve(q.nnz());
  for (std::size_t i = 0; i < q.nnz(); ++i) {
    const std::uint32_t c = t.cell(q.indices[i]);
    const float v = q.values[i];
    (v > 0.0f ? pos : neg).emplace_back(c, v);
  }
  auto merge = [](std::vector<std::pair<std::uint32_t, float>>& in,
                  std::vector<std::pair<std::uint32_t, float>>& out) {
    std::sort(in.begin(), in.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [c, v] : in) {
      if (!out.empty() && out.back().first == c)
        out.back().second += v;
      else
        out.emplace_back(c, v);
    }
  };
  merge(pos, upper);
  merge(neg, lower);
}

}  // namespace

namespace detail {

std::uint32_t sketch_cell(std::uint64_t seed, std::uint32_t mapping, std::uint32_t coord,
                          std::uint32_t m) noexcept {
  const std::uint64_t h =
      mix64(mix64(mix64(seed ^ kCellTag) ^ mapping) ^ coord);
  // Lemire reduction: floor(h * m / 2^64), uniform without modulo bias.
  return static_cast<std::uint32_t>((static_cast<unsigned __int128>(h) * m) >> 64);
}

}  // namespace detail

int JlTransform::sign(std::uint64_t seed, std::uint32_t row, std::uint32_t col) noexcept {
  const std::uint64_t h = mix64(column_key(seed, col) ^ row);
  return (h >> 63) ? 1 : -1;
}

DenseSketch JlTransform::sketch(const SparseVector& u) const {
  if (u.dim != input_dim) throw std::invalid_argument("jl sketch: dimension mismatch");
  if (sketch_dim == 0) throw std::invalid_argument("jl sketch: sketch_dim is 0");
  std::vector<double> acc(sketch_dim, 0.0);
  for (std::size_t e = 0; e < u.nnz(); ++e) {
    const std::uint64_t ck = column_key(seed, u.indices[e]);
    const double v = static_cast<double>(u.values[e]);
    for (std::uint32_t k = 0; k < sketch_dim; ++k) {
      const std::uint64_t h = mix64(ck ^ k);
      // +-1 from the top hash bit, branch-free
      acc[k] += v * (2.0 * static_cast<double>(h >> 63) - 1.0);
    }
  }
  const double inv_root = 1.0 / std::sqrt(static_cast<double>(sketch_dim));
  DenseSketch out(sketch_dim);
  for (std::uint32_t k = 0; k < sketch_dim; ++k)
    out[k] = static_cast<float>(acc[k] * inv_root);
  return out;
}

DenseSketch BoundPairSketch::to_dense() const {
  // The dense row is the scoring representation: positive query mass meets
  // the upper half, negative mass the lower half. Flooring the halves at 0
  // bakes in the same clamps ws_inner applies, so a plain dot product against
  // the row can never underestimate the exact inner product. Empty cells
  // already hold 0.
  DenseSketch out;
  out.reserve(upper.size() + lower.size());
  for (const float v : upper) out.push_back(std::max(v, 0.0f));
  for (const float v : lower) out.push_back(std::min(v, 0.0f));
  return out;
}

BoundPairSketch WeakSinnamonTransform::sketch_doc(const SparseVector& u) const {
  if (u.dim != input_dim) throw std::invalid_argument("ws sketch: dimension mismatch");
  if (half_width == 0) throw std::invalid_argument("ws sketch: half_width is 0");
  BoundPairSketch s;
  s.half_width = half_width;
  s.non_negative = non_negative;
  const std::uint32_t uw = upper_width();
  s.upper.assign(uw, 0.0f);
  s.upper_set.assign(uw, 0);
  if (!non_negative) {
    s.lower.assign(half_width, 0.0f);
    s.lower_set.assign(half_width, 0);
  }
  for (std::size_t e = 0; e < u.nnz(); ++e) {
    const std::uint32_t c = cell(u.indices[e]);
    const float v = u.values[e];
    if (non_negative && v < 0.0f)
      throw std::invalid_argument("ws sketch: negative value in non-negative layout");
    if (!s.upper_set[c] || v > s.upper[c]) s.upper[c] = v;
    s.upper_set[c] = 1;
    if (!non_negative) {
      if (!s.lower_set[c] || v < s.lower[c]) s.lower[c] = v;
      s.lower_set[c] = 1;
    }
  }
  return s;
}

QuerySketch WeakSinnamonTransform::sketch_query(const SparseVector& q) const {
  if (q.dim != input_dim) throw std::invalid_argument("ws query sketch: dimension mismatch");
  QuerySketch s;
  s.upper_width = upper_width();
  s.lower_width = non_negative ? 0 : half_width;
  fold_query(q, *this, s.upper, s.lower);
  // Against a non-negative layout there is no lower half to meet: every
  // document coordinate is >= 0, so negative query mass is bounded above by 0
  // and is shed here rather than kept as pairs no row has room for.
  if (non_negative) s.lower.clear();
  return s;
}

double ws_inner(const QuerySketch& q, const BoundPairSketch& d) {
  if (q.upper_width != d.upper_width())
    throw std::invalid_argument("ws inner: sketch widths differ");
  double acc = 0.0;
  for (const auto& [c, mass] : q.upper) {
    if (!d.upper_set[c]) continue;
    const float bound = d.upper[c];
    if (bound > 0.0f) acc += static_cast<double>(mass) * static_cast<double>(bound);
  }
  if (d.non_negative) return acc;  // no lower half; negative mass contributes 0
  for (const auto& [c, mass] : q.lower) {
    if (!d.lower_set[c]) continue;
    const float bound = d.lower[c];
    if (bound < 0.0f) acc += static_cast<double>(mass) * static_cast<double>(bound);
  }
  return acc;
}

BoundPairSketch SinnamonTransform::sketch_doc(const SparseVector& u) const {
  if (u.dim != input_dim) throw std::invalid_argument("sinnamon sketch: dimension mismatch");
  if (half_width == 0 || mappings == 0)
    throw std::invalid_argument("sinnamon sketch: bad parameters");
  BoundPairSketch s;
  s.half_width = half_width;
  s.upper.assign(half_width, 0.0f);
  s.lower.assign(half_width, 0.0f);
  s.upper_set.assign(half_width, 0);
  s.lower_set.assign(half_width, 0);
  for (std::size_t e = 0; e < u.nnz(); ++e) {
    const float v = u.values[e];
    for (std::uint32_t o = 0; o < mappings; ++o) {
      const std::uint32_t c = cell(o, u.indices[e]);
      if (!s.upper_set[c] || v > s.upper[c]) s.upper[c] = v;
      s.upper_set[c] = 1;
      if (!s.lower_set[c] || v < s.lower[c]) s.lower[c] = v;
      s.lower_set[c] = 1;
    }
  }
  s.nz = u.indices;
  return s;
}

std::uint32_t TransformParams::sketch_width() const {
  if (input_dim == 0) return 0;
  return kind == TransformKind::Jl ? width : 2 * width;
}

void TransformParams::serialize(BinaryWriter& w) const {
  w.put_u8(static_cast<std::uint8_t>(kind));
  w.put_u32(input_dim);
  w.put_u32(width);
  w.put_u64(seed);
  w.put_u32(mappings);
  w.put_u8(non_negative ? 1 : 0);
}

TransformParams TransformParams::deserialize(BinaryReader& r) {
  TransformParams p;
  const std::uint8_t kind = r.get_u8();
  if (kind > 2) r.fail("unknown transform kind " + std::to_string(kind));
  p.kind = static_cast<TransformKind>(kind);
  p.input_dim = r.get_u32();
  p.width = r.get_u32();
  p.seed = r.get_u64();
  p.mappings = r.get_u32();
  p.non_negative = r.get_u8() != 0;
  if (p.input_dim != 0 && p.width == 0) r.fail("transform width is 0");
  if (p.kind == TransformKind::Sinnamon && p.mappings == 0) r.fail("transform has 0 mappings");
  return p;
}

DenseSketch doc_sketch_vector(const TransformParams& params, const SparseVector& u) {
  if (params.input_dim == 0) return {};
  switch (params.kind) {
    case TransformKind::Jl:
      return params.jl().sketch(u);
    case TransformKind::WeakSinnamon:
      return params.ws().sketch_doc(u).to_dense();
    case TransformKind::Sinnamon:
      return params.sinnamon().sketch_doc(u).to_dense();
  }
  throw std::invalid_argument("doc_sketch_vector: bad transform kind");
}

QuerySketchVector query_sketch_vector(const TransformParams& params, const SparseVector& q) {
  QuerySketchVector out;
  if (params.input_dim == 0) return out;
  switch (params.kind) {
    case TransformKind::Jl:
      out.is_dense = true;
      out.dense = params.jl().sketch(q);
      return out;
    case TransformKind::WeakSinnamon: {
      const QuerySketch qs = params.ws().sketch_query(q);
      for (const auto& [c, v] : qs.upper) out.sparse.emplace_back(c, v);
      for (const auto& [c, v] : qs.lower) out.sparse.emplace_back(qs.upper_width + c, v);
      return out;
    }
    case TransformKind::Sinnamon: {
      // Average of the per-mapping foldings, so scores from different h stay
      // on one scale. Offsets: positive mass in [0, m), negative in [m, 2m).
      const SinnamonTransform t = params.sinnamon();
      std::vector<std::pair<std::uint32_t, float>> raw;
      raw.reserve(q.nnz() * t.mappings);
      const float inv_h = 1.0f / static_cast<float>(t.mappings);
      for (std::size_t e = 0; e < q.nnz(); ++e) {
        const float v = q.values[e] * inv_h;
        for (std::uint32_t o = 0; o < t.mappings; ++o) {
          const std::uint32_t c = t.cell(o, q.indices[e]);
          raw.emplace_back(v > 0.0f ? c : t.half_width + c, v);
        }
      }
      std::sort(raw.begin(), raw.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [c, v] : raw) {
        if (!out.sparse.empty() && out.sparse.back().first == c)
          out.sparse.back().second += v;
        else
          out.sparse.emplace_back(c, v);
      }
      return out;
    }
  }
  throw std::invalid_argument("query_sketch_vector: bad transform kind");
}

double SinnamonTransform::inner(const SparseVector& q, const BoundPairSketch& d,
                                bool use_indicator) const {
  if (q.dim != input_dim) throw std::invalid_argument("sinnamon inner: dimension mismatch");
  if (d.half_width != half_width) throw std::invalid_argument("sinnamon inner: width mismatch");
  double acc = 0.0;
  for (std::size_t e = 0; e < q.nnz(); ++e) {
    const std::uint32_t i = q.indices[e];
    const float qv = q.values[e];
    if (use_indicator) {
      if (!std::binary_search(d.nz.begin(), d.nz.end(), i)) continue;
      // Active coordinate: every one of its cells holds at least u_i, so the
      // raw extrema are valid bounds and the tightest wins.
      if (qv > 0.0f) {
        float bound = d.upper[cell(0, i)];
        for (std::uint32_t o = 1; o < mappings; ++o)
          bound = std::min(bound, d.upper[cell(o, i)]);
        acc += static_cast<double>(qv) * static_cast<double>(bound);
      } else {
        float bound = d.lower[cell(0, i)];
        for (std::uint32_t o = 1; o < mappings; ++o)
          bound = std::max(bound, d.lower[cell(o, i)]);
        acc += static_cast<double>(qv) * static_cast<double>(bound);
      }
    } else {
      // No membership information: clamp each cell toward 0 so coordinates
      // the document does not carry cannot push the estimate below the truth.
      if (qv > 0.0f) {
        float bound = std::numeric_limits<float>::infinity();
        for (std::uint32_t o = 0; o < mappings; ++o) {
          const std::uint32_t c = cell(o, i);
          const float b = d.upper_set[c] ? std::max(d.upper[c], 0.0f) : 0.0f;
          bound = std::min(bound, b);
        }
        acc += static_cast<double>(qv) * static_cast<double>(bound);
      } else {
        float bound = -std::numeric_limits<float>::infinity();
        for (std::uint32_t o = 0; o < mappings; ++o) {
          const std::uint32_t c = cell(o, i);
          const float b = d.lower_set[c] ? std::min(d.lower[c], 0.0f) : 0.0f;
          bound = std::max(bound, b);
        }
        acc += static_cast<double>(qv) * static_cast<double>(bound);
      }
    }
  }
  return acc;
}

double hybrid_row_score(const DenseVector& q_dense, const QuerySketchVector& qs, const float* row,
                        std::uint32_t dense_dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q_dense.values.size(); ++i)
    acc += static_cast<double>(q_dense.values[i]) * static_cast<double>(row[i]);
  const float* tail = row + dense_dim;
  if (qs.is_dense) {
    for (std::size_t i = 0; i < qs.dense.size(); ++i)
      acc += static_cast<double>(qs.dense[i]) * static_cast<double>(tail[i]);
  } else {
    for (const auto& [off, v] : qs.sparse)
      acc += static_cast<double>(v) * static_cast<double>(tail[off]);
  }
  return acc;
}

}  // namespace seismic
