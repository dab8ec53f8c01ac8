// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#include "seismic/ivf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "seismic/binary_io.hpp"

namespace seismic {

namespace {
constexpr char kMagic[4] = {'S', 'I', 'V', 'F'};
constexpr std::uint32_t kVersion = 1;

void serialize_cluster_model(BinaryWriter& w, const ClusterModel& m) {
  w.put_u32(m.partitions);
  w.put_u8(static_cast<std::uint8_t>(m.variant));
  w.put_u32(m.width);
  for (float c : m.centroids) w.put_f32(c);
  w.put_u64(m.assignments.size());
  for (std::uint32_t a : m.assignments) w.put_u32(a);
  w.put_u32(m.iterations_run);
  w.put_u64(std::bit_cast<std::uint64_t>(m.inertia));
}

ClusterModel deserialize_cluster_model(BinaryReader& r) {
  ClusterModel m;
  m.partitions = r.get_u32();
  const std::uint8_t variant = r.get_u8();
  if (variant > 1) r.fail("unknown clustering variant");
  m.variant = static_cast<KMeansVariant>(variant);
  m.width = r.get_u32();
  if (m.partitions == 0 || m.width == 0) r.fail("degenerate cluster model");
  m.centroids.resize(std::size_t(m.partitions) * m.width);
  for (float& c : m.centroids) c = r.get_f32();
  const std::uint64_t count = r.get_u64();
  m.assignments.resize(count);
  for (auto& a : m.assignments) {
    a = r.get_u32();
    if (a >= m.partitions) r.fail("assignment out of range");
  }
  m.iterations_run = r.get_u32();
  m.inertia = std::bit_cast<double>(r.get_u64());
  return m;
}
}  // namespace

std::uint32_t IvfIndex::default_partitions(std::size_t count) {
  return static_cast<std::uint32_t>(std::ceil(4.0 * std::sqrt(static_cast<double>(count))));
}

IvfIndex IvfIndex::build(std::shared_ptr<const VectorDataset> dataset,
                         const TransformParams& transform, KMeansVariant variant,
                         std::uint32_t partitions, const KMeansOptions& options) {
  if (!dataset || dataset->count() == 0) throw std::invalid_argument("ivf build: empty dataset");
  const VectorDataset& ds = *dataset;
  if (transform.input_dim != ds.sparse_dim)
    throw std::invalid_argument("ivf build: transform input_dim != dataset sparse_dim");
  const std::uint32_t sw = transform.sketch_width();
  const std::uint32_t width = ds.dense_dim + sw;
  if (width == 0) throw std::invalid_argument("ivf build: nothing to cluster");
  const std::size_t count = ds.count();
  const std::uint32_t p =
      partitions != 0 ? partitions : default_partitions(count);
  if (p > count) throw std::invalid_argument("ivf build: more partitions than documents");

  std::vector<float> rows(count * std::size_t(width));
  for (std::size_t i = 0; i < count; ++i) {
    float* row = rows.data() + i * width;
    const HybridVector& v = ds.vectors[i];
    std::copy(v.dense.values.begin(), v.dense.values.end(), row);
    if (sw != 0) {
      const DenseSketch s = doc_sketch_vector(transform, v.sparse);
      std::copy(s.begin(), s.end(), row + ds.dense_dim);
    }
  }

  IvfIndex index;
  index.transform_ = transform;
  index.clusters_ = kmeans(rows, count, width, p, variant, options);
  index.dataset_ = std::move(dataset);
  index.members_.assign(p, {});
  for (std::size_t i = 0; i < count; ++i)
    index.members_[index.clusters_.assignments[i]].push_back(static_cast<std::uint32_t>(i));
  return index;
}

std::vector<double> IvfIndex::score_partitions(const HybridVector& q) const {
  const VectorDataset& ds = *dataset_;
  if (q.dense.values.size() != ds.dense_dim || q.sparse.dim != ds.sparse_dim)
    throw std::invalid_argument("ivf query: shape mismatch with dataset");
  const std::uint32_t p = clusters_.partitions;
  std::vector<double> scores(p, 0.0);
  const QuerySketchVector qs =
      ds.sparse_dim != 0 ? query_sketch_vector(transform_, q.sparse) : QuerySketchVector{};
  for (std::uint32_t c = 0; c < p; ++c)
    scores[c] = hybrid_row_score(q.dense, qs, clusters_.centroid(c).data(), ds.dense_dim);
  return scores;
}

std::vector<std::uint32_t> IvfIndex::select_partitions(const HybridVector& q,
                                                       std::size_t ell) const {
  const std::size_t count = dataset_->count();
  ell = std::max<std::size_t>(1, std::min(ell, count));
  const std::vector<double> scores = score_partitions(q);
  std::vector<std::uint32_t> order(clusters_.partitions);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<std::uint32_t> selected;
  std::size_t cumulative = 0;
  for (std::uint32_t c : order) {
    selected.push_back(c);
    cumulative += members_[c].size();
    if (cumulative >= ell) break;
  }
  return selected;
}

TopKResult IvfIndex::retrieve(const HybridVector& q, std::size_t k, std::size_t ell,
                              const SubAlgorithm& sub, RetrievalStats* stats) const {
  if (k == 0) throw std::invalid_argument("ivf retrieve: k is 0");
  const std::vector<std::uint32_t> selected = select_partitions(q, ell);
  return sub.run(q, selected, k, stats);
}

TopKResult ExhaustiveScan::run(const HybridVector& q, std::span<const std::uint32_t> partitions,
                               std::size_t k, RetrievalStats* stats) const {
  const VectorDataset& ds = index_.data();
  std::vector<ScoredDoc> scored;
  for (std::uint32_t p : partitions) {
    for (std::uint32_t id : index_.members()[p]) {
      scored.push_back({id, dot(q, ds.vectors[id])});
    }
  }
  if (stats) {
    stats->docs_evaluated += scored.size();
    stats->postings_visited += scored.size();
  }
  return select_top_k(std::move(scored), k);
}

void IvfIndex::save(const std::filesystem::path& path, bool embed_dataset,
                    const std::string& dataset_ref) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("ivf save: cannot open " + path.string());
  BinaryWriter w(out);
  w.put_bytes(kMagic, 4);
  w.put_u32(kVersion);
  transform_.serialize(w);
  w.put_u32(dataset_->dense_dim);
  serialize_cluster_model(w, clusters_);
  w.put_u32(static_cast<std::uint32_t>(members_.size()));
  for (const auto& m : members_) {
    w.put_u32(static_cast<std::uint32_t>(m.size()));
    for (std::uint32_t id : m) w.put_u32(id);
  }
  if (embed_dataset) {
    w.put_u8(1);
    write_dataset(*dataset_, out);
  } else {
    w.put_u8(0);
    if (dataset_ref.empty())
      throw std::invalid_argument("ivf save: dataset_ref required when not embedding");
    w.put_u32(static_cast<std::uint32_t>(dataset_ref.size()));
    w.put_bytes(dataset_ref.data(), dataset_ref.size());
  }
  if (!w.good()) throw FormatError("ivf save: write failed");
}

IvfIndex IvfIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("ivf load: cannot open " + path.string());
  BinaryReader r(in, path.filename().string());
  char magic[4];
  r.get_bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) r.fail("bad magic, not an SIVF file");
  if (r.get_u32() != kVersion) r.fail("unsupported version");
  IvfIndex index;
  index.transform_ = TransformParams::deserialize(r);
  const std::uint32_t dense_dim = r.get_u32();
  index.clusters_ = deserialize_cluster_model(r);
  const std::uint32_t p = r.get_u32();
  if (p != index.clusters_.partitions) r.fail("partition list count mismatch");
  index.members_.assign(p, {});
  const std::size_t count = index.clusters_.assignments.size();
  std::vector<std::uint8_t> seen(count, 0);
  for (std::uint32_t c = 0; c < p; ++c) {
    const std::uint32_t size = r.get_u32();
    auto& m = index.members_[c];
    m.resize(size);
    std::uint32_t prev = 0;
    for (std::uint32_t j = 0; j < size; ++j) {
      m[j] = r.get_u32();
      if (m[j] >= count) r.fail("member id out of range");
      if (j > 0 && m[j] <= prev) r.fail("member list not strictly increasing");
      if (seen[m[j]]) r.fail("document in two partitions");
      seen[m[j]] = 1;
      prev = m[j];
    }
  }
  for (std::size_t i = 0; i < count; ++i)
    if (!seen[i]) r.fail("document " + std::to_string(i) + " missing from partitions");
  const std::uint8_t embedded = r.get_u8();
  std::shared_ptr<VectorDataset> ds;
  if (embedded) {
    ds = std::make_shared<VectorDataset>(read_dataset(in, r.context() + " (embedded dataset)"));
  } else {
    const std::uint32_t len = r.get_u32();
    std::string ref(len, '\0');
    r.get_bytes(ref.data(), len);
    std::filesystem::path ref_path(ref);
    if (ref_path.is_relative()) ref_path = path.parent_path() / ref_path;
    ds = std::make_shared<VectorDataset>(read_dataset(ref_path));
  }
  if (ds->count() != count) r.fail("dataset size does not match assignments");
  if (ds->dense_dim != dense_dim) r.fail("dataset dense_dim mismatch");
  if (index.transform_.input_dim != ds->sparse_dim) r.fail("transform input_dim mismatch");
  ds->validate();
  index.dataset_ = std::move(ds);
  return index;
}

}  // namespace seismic
