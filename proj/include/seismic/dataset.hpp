// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

#include "seismic/vectors.hpp"

namespace seismic {

// Fixed-schema collection of hybrid vectors. Document ids are the positions
// in `vectors`. At least one of the two widths must be nonzero.
struct VectorDataset {
  std::uint32_t dense_dim = 0;
  std::uint32_t sparse_dim = 0;
  std::vector<HybridVector> vectors;

  std::size_t count() const { return vectors.size(); }
  bool sparse_only() const { return dense_dim == 0; }

  // Checks per-vector invariants against the schema; throws on violation.
  void validate() const;
};

// SVEC container, little-endian:
//   magic "SVEC" | version u32 = 1 | count u64 | dense_dim u32 | sparse_dim u32
//   per vector: dense_dim f32 | nnz u32 | nnz u32 indices (strictly
//   increasing) | nnz f32 values
// Reading strips entries whose value is exactly 0; any other violation names
// the offending vector.
void write_dataset(const VectorDataset& ds, std::ostream& out);
void write_dataset(const VectorDataset& ds, const std::filesystem::path& path);
VectorDataset read_dataset(std::istream& in, const std::string& context);
VectorDataset read_dataset(const std::filesystem::path& path);

}  // namespace seismic
