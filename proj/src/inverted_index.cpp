// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#include "seismic/inverted_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "seismic/binary_io.hpp"

namespace seismic {

namespace {
constexpr char kMagic[4] = {'S', 'P', 'I', 'I'};
constexpr std::uint32_t kVersion = 1;

void check_partitions_cover(std::span<const std::vector<std::uint32_t>> partitions,
                            std::size_t doc_count) {
  std::vector<std::uint8_t> seen(doc_count, 0);
  for (const auto& members : partitions) {
    for (std::size_t j = 0; j < members.size(); ++j) {
      const std::uint32_t id = members[j];
      if (id >= doc_count) throw std::invalid_argument("partition member out of range");
      if (j > 0 && members[j] <= members[j - 1])
        throw std::invalid_argument("partition members not strictly increasing");
      if (seen[id]) throw std::invalid_argument("document assigned to two partitions");
      seen[id] = 1;
    }
  }
  for (std::size_t i = 0; i < doc_count; ++i)
    if (!seen[i]) throw std::invalid_argument("document missing from partitioning");
}
}  // namespace

DocIdRemap remap_doc_ids(std::span<const std::vector<std::uint32_t>> partitions,
                         std::size_t doc_count) {
  check_partitions_cover(partitions, doc_count);
  DocIdRemap remap;
  remap.forward.resize(doc_count);
  remap.inverse.resize(doc_count);
  std::uint32_t next = 0;
  for (const auto& members : partitions) {
    for (std::uint32_t id : members) {
      remap.forward[id] = next;
      remap.inverse[next] = id;
      ++next;
    }
  }
  return remap;
}

PartitionedInvertedIndex PartitionedInvertedIndex::build(
    const VectorDataset& ds, std::span<const std::vector<std::uint32_t>> partitions,
    bool remap_ids) {
  if (ds.sparse_dim == 0)
    throw std::invalid_argument("inverted index: dataset has no sparse part");
  if (ds.dense_dim != 0)
    throw std::invalid_argument("inverted index: dataset must be sparse-only");
  PartitionedInvertedIndex index;
  index.dim_ = ds.sparse_dim;
  index.doc_count_ = ds.count();
  index.partition_count_ = static_cast<std::uint32_t>(partitions.size());
  index.postings_.resize(index.dim_);
  index.skips_.resize(index.dim_);
  if (remap_ids) {
    DocIdRemap remap = remap_doc_ids(partitions, index.doc_count_);
    index.forward_ = std::move(remap.forward);
    index.inverse_ = std::move(remap.inverse);
  } else {
    check_partitions_cover(partitions, index.doc_count_);
  }
  for (std::uint32_t p = 0; p < partitions.size(); ++p) {
    for (std::uint32_t doc : partitions[p]) {
      const std::uint32_t sid = remap_ids ? index.forward_[doc] : doc;
      const SparseVector& v = ds.vectors[doc].sparse;
      for (std::size_t e = 0; e < v.nnz(); ++e) {
        const std::uint32_t t = v.indices[e];
        auto& skips = index.skips_[t];
        if (skips.empty() || skips.back().partition != p) {
          // first touch of (t, p) opens the partition's segment
          skips.push_back({p, static_cast<std::uint32_t>(index.postings_[t].size())});
        }
        index.postings_[t].push_back({sid, v.values[e]});
      }
    }
  }
  return index;
}

TopKResult PartitionedInvertedIndex::query(const SparseVector& q,
                                           std::span<const std::uint32_t> partitions,
                                           std::size_t k, RetrievalStats* stats) const {
  // Queries from a drifted vocabulary are tolerated: coordinates beyond dim()
  // are skipped and tallied in stats->coords_skipped rather than rejected.
  std::vector<std::uint32_t> selected(partitions.begin(), partitions.end());
  std::sort(selected.begin(), selected.end());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i] >= partition_count_)
      throw std::invalid_argument("inverted query: partition id out of range");
    if (i > 0 && selected[i] == selected[i - 1])
      throw std::invalid_argument("inverted query: duplicate partition id");
  }

  ScoreAccumulator acc(doc_count_);
  for (std::size_t e = 0; e < q.nnz(); ++e) {
    const std::uint32_t t = q.indices[e];
    if (t >= dim_) {
      if (stats) ++stats->coords_skipped;
      continue;
    }
    const double qv = static_cast<double>(q.values[e]);
    const auto& skips = skips_[t];
    const auto& list = postings_[t];
    std::size_t spos = 0;
    for (std::uint32_t p : selected) {
      while (spos < skips.size() && skips[spos].partition < p) ++spos;
      if (spos == skips.size()) break;
      if (skips[spos].partition != p) continue;  // coordinate absent from p
      const std::size_t begin = skips[spos].offset;
      const std::size_t end = spos + 1 < skips.size() ? skips[spos + 1].offset : list.size();
      for (std::size_t j = begin; j < end; ++j)
        acc.add(list[j].doc, qv * static_cast<double>(list[j].value));
      if (stats) stats->postings_visited += end - begin;
    }
  }

  if (stats) stats->docs_evaluated += acc.touched().size();
  std::vector<ScoredDoc> scored;
  scored.reserve(acc.touched().size());
  for (std::uint32_t doc : acc.touched()) {
    const std::uint32_t original = inverse_.empty() ? doc : inverse_[doc];
    scored.push_back({original, acc.score(doc)});
  }
  return select_top_k(std::move(scored), k);
}

std::uint64_t PartitionedInvertedIndex::count_qualified(const SparseVector& q) const {
  std::vector<std::uint8_t> seen(doc_count_, 0);
  std::uint64_t count = 0;
  for (std::size_t e = 0; e < q.nnz(); ++e) {
    const std::uint32_t t = q.indices[e];
    if (t >= dim_) continue;
    for (const Posting& p : postings_[t]) {
      if (!seen[p.doc]) {
        seen[p.doc] = 1;
        ++count;
      }
    }
  }
  return count;
}

IndexOverhead PartitionedInvertedIndex::overhead() const {
  IndexOverhead o;
  for (const auto& s : skips_) o.skip_integers += 2 * s.size();
  for (const auto& p : postings_) o.posting_entries += p.size();
  return o;
}

void PartitionedInvertedIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("inverted save: cannot open " + path.string());
  BinaryWriter w(out);
  w.put_bytes(kMagic, 4);
  w.put_u32(kVersion);
  w.put_u32(dim_);
  w.put_u64(doc_count_);
  w.put_u32(partition_count_);
  w.put_u8(forward_.empty() ? 0 : 1);
  if (!forward_.empty()) {
    for (std::uint32_t x : forward_) w.put_u32(x);
    for (std::uint32_t x : inverse_) w.put_u32(x);
  }
  for (std::uint32_t t = 0; t < dim_; ++t) {
    w.put_u32(static_cast<std::uint32_t>(postings_[t].size()));
    for (const Posting& p : postings_[t]) {
      w.put_u32(p.doc);
      w.put_f32(p.value);
    }
    w.put_u32(static_cast<std::uint32_t>(skips_[t].size()));
    for (const SkipEntry& s : skips_[t]) {
      w.put_u32(s.partition);
      w.put_u32(s.offset);
    }
  }
  if (!w.good()) throw FormatError("inverted save: write failed");
}

PartitionedInvertedIndex PartitionedInvertedIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("inverted load: cannot open " + path.string());
  BinaryReader r(in, path.filename().string());
  char magic[4];
  r.get_bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) r.fail("bad magic, not an SPII file");
  if (r.get_u32() != kVersion) r.fail("unsupported version");
  PartitionedInvertedIndex index;
  index.dim_ = r.get_u32();
  index.doc_count_ = r.get_u64();
  index.partition_count_ = r.get_u32();
  if (r.get_u8()) {
    index.forward_.resize(index.doc_count_);
    index.inverse_.resize(index.doc_count_);
    for (auto& x : index.forward_) x = r.get_u32();
    for (auto& x : index.inverse_) x = r.get_u32();
    for (std::size_t i = 0; i < index.doc_count_; ++i) {
      if (index.forward_[i] >= index.doc_count_ ||
          index.inverse_[index.forward_[i]] != i)
        r.fail("remap tables are not inverse of each other");
    }
  }
  index.postings_.resize(index.dim_);
  index.skips_.resize(index.dim_);
  for (std::uint32_t t = 0; t < index.dim_; ++t) {
    const std::uint32_t plen = r.get_u32();
    auto& list = index.postings_[t];
    list.resize(plen);
    for (auto& p : list) {
      p.doc = r.get_u32();
      p.value = r.get_f32();
      if (p.doc >= index.doc_count_) r.fail("posting doc id out of range");
    }
    const std::uint32_t slen = r.get_u32();
    auto& skips = index.skips_[t];
    skips.resize(slen);
    for (std::uint32_t j = 0; j < slen; ++j) {
      skips[j].partition = r.get_u32();
      skips[j].offset = r.get_u32();
      if (skips[j].partition >= index.partition_count_) r.fail("skip partition out of range");
      if (skips[j].offset > plen) r.fail("skip offset out of range");
      if (j > 0 && (skips[j].partition <= skips[j - 1].partition ||
                    skips[j].offset <= skips[j - 1].offset))
        r.fail("skip list not ascending");
    }
    if (slen > 0 && skips[0].offset != 0) r.fail("first segment does not start at 0");
    if (plen > 0 && slen == 0) r.fail("postings without skip entries");
  }
  return index;
}

TopKResult PartitionedIndexScan::run(const HybridVector& q,
                                     std::span<const std::uint32_t> partitions, std::size_t k,
                                     RetrievalStats* stats) const {
  if (!q.dense.values.empty())
    throw std::invalid_argument("inverted scan requires sparse-only queries");
  return index_.query(q.sparse, partitions, k, stats);
}

LinScanIndex LinScanIndex::build(const VectorDataset& ds) {
  if (ds.sparse_dim == 0) throw std::invalid_argument("linscan: dataset has no sparse part");
  if (ds.dense_dim != 0) throw std::invalid_argument("linscan: dataset must be sparse-only");
  LinScanIndex index;
  index.dim_ = ds.sparse_dim;
  index.doc_count_ = ds.count();
  index.postings_.resize(index.dim_);
  for (std::size_t i = 0; i < ds.count(); ++i) {
    const SparseVector& v = ds.vectors[i].sparse;
    for (std::size_t e = 0; e < v.nnz(); ++e)
      index.postings_[v.indices[e]].push_back(
          {static_cast<std::uint32_t>(i), v.values[e]});
  }
  return index;
}

TopKResult LinScanIndex::query_exact(const SparseVector& q, std::size_t k,
                                     RetrievalStats* stats) const {
  ScoreAccumulator acc(doc_count_);
  for (std::size_t e = 0; e < q.nnz(); ++e) {
    const std::uint32_t t = q.indices[e];
    if (t >= dim_) {
      if (stats) ++stats->coords_skipped;
      continue;
    }
    const double qv = static_cast<double>(q.values[e]);
    for (const Posting& p : postings_[t]) acc.add(p.doc, qv * static_cast<double>(p.value));
    if (stats) stats->postings_visited += postings_[t].size();
  }
  if (stats) stats->docs_evaluated += acc.touched().size();
  std::vector<ScoredDoc> scored;
  scored.reserve(acc.touched().size());
  for (std::uint32_t doc : acc.touched()) scored.push_back({doc, acc.score(doc)});
  return select_top_k(std::move(scored), k);
}

TopKResult LinScanIndex::query_budgeted(const SparseVector& q, std::size_t k,
                                        std::chrono::nanoseconds budget,
                                        RetrievalStats* stats) const {
  if (budget == std::chrono::nanoseconds::max()) return query_exact(q, k, stats);

  // Heaviest query coordinates first; ties toward the lower coordinate.
  std::vector<std::uint32_t> order(q.nnz());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const float wa = std::abs(q.values[a]), wb = std::abs(q.values[b]);
    if (wa != wb) return wa > wb;
    return q.indices[a] < q.indices[b];
  });

  const auto start = std::chrono::steady_clock::now();
  ScoreAccumulator acc(doc_count_);
  for (std::uint32_t e : order) {
    const std::uint32_t t = q.indices[e];
    if (t >= dim_) {
      if (stats) ++stats->coords_skipped;
      continue;
    }
    const double qv = static_cast<double>(q.values[e]);
    for (const Posting& p : postings_[t]) acc.add(p.doc, qv * static_cast<double>(p.value));
    if (stats) stats->postings_visited += postings_[t].size();
    if (std::chrono::steady_clock::now() - start >= budget) break;
  }
  if (stats) stats->docs_evaluated += acc.touched().size();
  std::vector<ScoredDoc> scored;
  scored.reserve(acc.touched().size());
  for (std::uint32_t doc : acc.touched()) scored.push_back({doc, acc.score(doc)});
  return select_top_k(std::move(scored), k);
}

std::uint64_t LinScanIndex::count_qualified(const SparseVector& q) const {
  std::vector<std::uint8_t> seen(doc_count_, 0);
  std::uint64_t count = 0;
  for (std::size_t e = 0; e < q.nnz(); ++e) {
    const std::uint32_t t = q.indices[e];
    if (t >= dim_) continue;
    for (const Posting& p : postings_[t]) {
      if (!seen[p.doc]) {
        seen[p.doc] = 1;
        ++count;
      }
    }
  }
  return count;
}

}  // namespace seismic
