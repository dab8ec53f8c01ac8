// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
//
// Sketches compress a sparse vector over a huge coordinate space into a small
// fixed-width summary. Two families are implemented:
//
//  - JlTransform: random sign projection. The n x N matrix with entries
//    +-1/sqrt(n) is never materialized; each entry is a pure function of
//    (seed, row, col). The sketch inner product is an unbiased estimate of
//    the exact inner product.
//
//  - WeakSinnamonTransform / SinnamonTransform: coordinate-extrema sketches.
//    A document keeps, per cell of a hashed mapping, the max (upper) and min
//    (lower) of the coordinates landing there; a query folds its positive and
//    negative masses per cell. The resulting score never underestimates the
//    true inner product, which makes it safe for candidate pruning.
//    WeakSinnamon is the asymmetric single-mapping variant whose query side
//    stays sparse; Sinnamon is the multi-mapping original kept here as a
//    reference point, with an optional membership indicator.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "seismic/vectors.hpp"

namespace seismic {

using DenseSketch = std::vector<float>;

namespace detail {

// Cell of coordinate `coord` under mapping `o`. Uniform over [0, m) via a
// 128-bit multiply so no modulo bias sneaks into small widths.
std::uint32_t sketch_cell(std::uint64_t seed, std::uint32_t mapping, std::uint32_t coord,
                          std::uint32_t m) noexcept;

}  // namespace detail

// ---------------------------------------------------------------------------
// Random sign projection

struct JlTransform {
  std::uint32_t input_dim = 0;  // N
  std::uint32_t sketch_dim = 0; // n
  std::uint64_t seed = 0;

  // Matrix entry sign at (row, col), in {-1, +1}. Marginally unbiased and
  // decorrelated across seeds.
  static int sign(std::uint64_t seed, std::uint32_t row, std::uint32_t col) noexcept;

  // phi(u) = R u with R in {-1/sqrt(n), +1/sqrt(n)}^{n x N}. Cost is
  // O(sketch_dim * nnz(u)); accumulation in f64, cells stored f32.
  DenseSketch sketch(const SparseVector& u) const;
};

// ---------------------------------------------------------------------------
// Coordinate-extrema sketches

// Document-side sketch. `upper`/`lower` hold the raw extrema of the values
// colliding in each cell; a cell nobody maps to stores 0 with its occupancy
// bit clear. In the non-negative layout the lower half is reallocated to the
// upper sketch (width 2m) and `lower` stays empty.
struct BoundPairSketch {
  std::uint32_t half_width = 0;  // m
  bool non_negative = false;
  std::vector<float> upper;
  std::vector<float> lower;
  std::vector<std::uint8_t> upper_set;
  std::vector<std::uint8_t> lower_set;
  std::vector<std::uint32_t> nz;  // sorted support, Sinnamon indicator only

  std::uint32_t upper_width() const { return static_cast<std::uint32_t>(upper.size()); }

  // Halves concatenated with the scoring clamps applied (upper floored at 0,
  // lower capped at 0); this is the vector clustering sees, and a dot product
  // against it reproduces ws_inner.
  DenseSketch to_dense() const;
};

// Query-side sketch: per-cell sums of the positive entries (upper) and of the
// negative entries (lower), kept as sparse (cell, mass) lists in ascending
// cell order. Its size tracks nnz(q), not the sketch width.
struct QuerySketch {
  std::uint32_t upper_width = 0;
  std::uint32_t lower_width = 0;
  std::vector<std::pair<std::uint32_t, float>> upper;
  std::vector<std::pair<std::uint32_t, float>> lower;
};

struct WeakSinnamonTransform {
  std::uint32_t input_dim = 0;  // N
  std::uint32_t half_width = 0; // m
  std::uint64_t seed = 0;
  bool non_negative = false;    // fold the lower half into a width-2m upper

  std::uint32_t upper_width() const { return non_negative ? 2 * half_width : half_width; }

  std::uint32_t cell(std::uint32_t coord) const noexcept {
    return detail::sketch_cell(seed, 0, coord, upper_width());
  }

  BoundPairSketch sketch_doc(const SparseVector& u) const;
  QuerySketch sketch_query(const SparseVector& q) const;
};

// Score of a query sketch against a document sketch. Positive query mass
// multiplies the cell's upper bound clamped below at 0, negative mass the
// lower bound clamped above at 0; empty cells contribute nothing. The clamps
// make the estimate an upper bound on the exact inner product for arbitrary
// signed inputs, not only for inputs whose support is fully occupied.
double ws_inner(const QuerySketch& q, const BoundPairSketch& d);

struct SinnamonTransform {
  std::uint32_t input_dim = 0;
  std::uint32_t half_width = 0;
  std::uint64_t seed = 0;
  std::uint32_t mappings = 1;  // h

  std::uint32_t cell(std::uint32_t mapping, std::uint32_t coord) const noexcept {
    return detail::sketch_cell(seed, mapping, coord, half_width);
  }

  // Extrema taken over all h mappings; fills the nz indicator.
  BoundPairSketch sketch_doc(const SparseVector& u) const;

  // With the indicator, query coordinates absent from the document are
  // dropped and active ones use the tightest of their h cells. Without it the
  // per-cell clamps stand in for the missing membership information; at h = 1
  // that reduces exactly to the WeakSinnamon score.
  double inner(const SparseVector& q, const BoundPairSketch& d, bool use_indicator = true) const;
};

// ---------------------------------------------------------------------------
// Uniform handle over the transform family, as stored in index headers.

enum class TransformKind : std::uint8_t { Jl = 0, WeakSinnamon = 1, Sinnamon = 2 };

class BinaryWriter;
class BinaryReader;

struct TransformParams {
  TransformKind kind = TransformKind::Jl;
  std::uint32_t input_dim = 0;  // N; 0 disables the sketch entirely
  std::uint32_t width = 0;      // n for Jl, half-width m otherwise
  std::uint64_t seed = 0;
  std::uint32_t mappings = 1;   // h, Sinnamon only
  bool non_negative = false;    // WeakSinnamon only

  // Length of the dense vector a document sketch occupies (what clustering
  // sees): n for Jl, 2m for the extrema sketches, 0 when input_dim is 0.
  std::uint32_t sketch_width() const;

  JlTransform jl() const { return {input_dim, width, seed}; }
  WeakSinnamonTransform ws() const { return {input_dim, width, seed, non_negative}; }
  SinnamonTransform sinnamon() const { return {input_dim, width, seed, mappings}; }

  void serialize(BinaryWriter& w) const;
  static TransformParams deserialize(BinaryReader& r);

  friend bool operator==(const TransformParams&, const TransformParams&) = default;
};

// Document sketch as a dense vector of sketch_width() floats (extrema
// sketches: clamped upper half then clamped lower half, empty cells 0).
DenseSketch doc_sketch_vector(const TransformParams& params, const SparseVector& u);

// Query sketch as sparse (offset, value) pairs into the same layout, for
// scoring against centroids without densifying. Offsets strictly increasing.
// For Jl this falls back to the dense symmetric sketch (empty result +
// `dense` output); for Sinnamon the h mappings are averaged so rankings stay
// comparable across h.
struct QuerySketchVector {
  bool is_dense = false;
  DenseSketch dense;
  std::vector<std::pair<std::uint32_t, float>> sparse;
};
QuerySketchVector query_sketch_vector(const TransformParams& params, const SparseVector& q);

// Inner product of a [dense query ‖ query sketch] pair against a stored row
// laid out as [dense part ‖ document sketch]. Rows with this layout back both
// the cluster centroids and the exhaustive sketch scan.
double hybrid_row_score(const DenseVector& q_dense, const QuerySketchVector& qs, const float* row,
                        std::uint32_t dense_dim);

}  // namespace seismic
