// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#include "seismic/dataset.hpp"

#include <fstream>

#include "seismic/binary_io.hpp"

namespace seismic {

namespace {
constexpr char kMagic[4] = {'S', 'V', 'E', 'C'};
constexpr std::uint32_t kVersion = 1;

std::string ordinal(std::size_t i) { return "vector " + std::to_string(i); }
}  // namespace

void VectorDataset::validate() const {
  if (dense_dim == 0 && sparse_dim == 0)
    throw FormatError("dataset: both dense_dim and sparse_dim are 0");
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const HybridVector& v = vectors[i];
    if (v.dense.values.size() != dense_dim)
      throw FormatError("dataset: " + ordinal(i) + " has wrong dense width");
    if (v.sparse.dim != sparse_dim)
      throw FormatError("dataset: " + ordinal(i) + " has wrong sparse dim");
    const auto& idx = v.sparse.indices;
    if (idx.size() != v.sparse.values.size())
      throw FormatError("dataset: " + ordinal(i) + " has mismatched sparse arrays");
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (idx[j] >= sparse_dim)
        throw FormatError("dataset: " + ordinal(i) + " has coordinate out of range");
      if (j > 0 && idx[j] <= idx[j - 1])
        throw FormatError("dataset: " + ordinal(i) + " has non-increasing coordinates");
      if (v.sparse.values[j] == 0.0f)
        throw FormatError("dataset: " + ordinal(i) + " stores an explicit zero");
    }
  }
}

void write_dataset(const VectorDataset& ds, std::ostream& out) {
  BinaryWriter w(out);
  w.put_bytes(kMagic, 4);
  w.put_u32(kVersion);
  w.put_u64(ds.vectors.size());
  w.put_u32(ds.dense_dim);
  w.put_u32(ds.sparse_dim);
  for (const HybridVector& v : ds.vectors) {
    for (float x : v.dense.values) w.put_f32(x);
    w.put_u32(static_cast<std::uint32_t>(v.sparse.nnz()));
    for (std::uint32_t idx : v.sparse.indices) w.put_u32(idx);
    for (float x : v.sparse.values) w.put_f32(x);
  }
  if (!w.good()) throw FormatError("dataset: write failed");
}

void write_dataset(const VectorDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("dataset: cannot open " + path.string() + " for writing");
  write_dataset(ds, out);
}

VectorDataset read_dataset(std::istream& in, const std::string& context) {
  BinaryReader r(in, context);
  char magic[4];
  r.get_bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) r.fail("bad magic, not an SVEC file");
  const std::uint32_t version = r.get_u32();
  if (version != kVersion) r.fail("unsupported version " + std::to_string(version));
  const std::uint64_t count = r.get_u64();
  VectorDataset ds;
  ds.dense_dim = r.get_u32();
  ds.sparse_dim = r.get_u32();
  if (ds.dense_dim == 0 && ds.sparse_dim == 0) r.fail("both widths are 0");
  ds.vectors.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    HybridVector v;
    v.dense.values.resize(ds.dense_dim);
    for (float& x : v.dense.values) x = r.get_f32();
    const std::uint32_t nnz = r.get_u32();
    if (nnz > ds.sparse_dim) r.fail(ordinal(i) + ": nnz exceeds sparse dim");
    std::vector<std::uint32_t> idx(nnz);
    for (auto& x : idx) x = r.get_u32();
    std::vector<float> val(nnz);
    for (auto& x : val) x = r.get_f32();
    for (std::uint32_t j = 0; j < nnz; ++j) {
      if (idx[j] >= ds.sparse_dim) r.fail(ordinal(i) + ": coordinate out of range");
      if (j > 0 && idx[j] <= idx[j - 1]) r.fail(ordinal(i) + ": indices not strictly increasing");
    }
    v.sparse.dim = ds.sparse_dim;
    for (std::uint32_t j = 0; j < nnz; ++j) {
      if (val[j] == 0.0f) continue;  // stripped, not rejected
      v.sparse.indices.push_back(idx[j]);
      v.sparse.values.push_back(val[j]);
    }
    ds.vectors.push_back(std::move(v));
  }
  return ds;
}

VectorDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("dataset: cannot open " + path.string());
  return read_dataset(in, path.filename().string());
}

}  // namespace seismic
