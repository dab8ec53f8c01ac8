// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <vector>

#include "seismic/dataset.hpp"
#include "seismic/eval.hpp"
#include "seismic/inverted_index.hpp"

using namespace seismic;
namespace fs = std::filesystem;

namespace {

SparseVector sv(std::uint32_t dim, std::vector<std::pair<std::uint32_t, float>> entries) {
  return SparseVector::from_entries(dim, std::move(entries));
}

SparseVector random_sparse(Rng& rng, std::uint32_t dim, std::uint32_t nnz, bool mixed) {
  std::vector<std::pair<std::uint32_t, float>> entries;
  while (entries.size() < nnz) {
    const std::uint32_t i = rng.next_below(dim);
    bool dup = false;
    for (const auto& [j, v] : entries)
      if (j == i) dup = true;
    if (dup) continue;
    float v = static_cast<float>(rng.next_unit()) + 0.25f;
    if (mixed && rng.next_below(2) == 0) v = -v;
    entries.emplace_back(i, v);
  }
  return SparseVector::from_entries(dim, std::move(entries));
}

VectorDataset sparse_ds(std::uint32_t dim, std::vector<SparseVector> docs) {
  VectorDataset ds;
  ds.dense_dim = 0;
  ds.sparse_dim = dim;
  for (auto& d : docs) ds.vectors.push_back({DenseVector{}, std::move(d)});
  return ds;
}

VectorDataset random_ds(Rng& rng, std::uint32_t dim, std::size_t count, std::uint32_t nnz,
                        bool mixed) {
  std::vector<SparseVector> docs;
  docs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) docs.push_back(random_sparse(rng, dim, nnz, mixed));
  return sparse_ds(dim, std::move(docs));
}

// Every partition nonempty; members ascend because doc ids are assigned in
// increasing order.
std::vector<std::vector<std::uint32_t>> random_partition(Rng& rng, std::size_t count,
                                                         std::uint32_t parts) {
  std::vector<std::vector<std::uint32_t>> members(parts);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t p =
        i < parts ? static_cast<std::uint32_t>(i) : static_cast<std::uint32_t>(rng.next_below(parts));
    members[p].push_back(static_cast<std::uint32_t>(i));
  }
  return members;
}

bool intersects(const SparseVector& q, const SparseVector& v) {
  std::size_t i = 0, j = 0;
  while (i < q.indices.size() && j < v.indices.size()) {
    if (q.indices[i] == v.indices[j]) return true;
    if (q.indices[i] < v.indices[j])
      ++i;
    else
      ++j;
  }
  return false;
}

// What a pruned query must return: every doc of the selected partitions that
// shares a coordinate with q, scored by the plain sparse dot. Term order per
// doc matches the index walk (ascending coordinate), so scores compare with
// operator== rather than a tolerance.
TopKResult restricted_oracle(const VectorDataset& ds,
                             const std::vector<std::vector<std::uint32_t>>& members,
                             const SparseVector& q, std::span<const std::uint32_t> selected,
                             std::size_t k) {
  std::vector<ScoredDoc> scored;
  for (std::uint32_t p : selected)
    for (std::uint32_t doc : members[p]) {
      const SparseVector& v = ds.vectors[doc].sparse;
      if (intersects(q, v)) scored.push_back({doc, dot(q, v)});
    }
  return select_top_k(std::move(scored), k);
}

bool same_result(const TopKResult& a, const TopKResult& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].id != b[i].id || a[i].score != b[i].score) return false;
  return true;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path tmp_dir() {
  const fs::path dir = fs::temp_directory_path() / "seismic_pii_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("inverted index: two-doc hand trace") {
  const VectorDataset ds = sparse_ds(2, {sv(2, {{0, 1.0f}}), sv(2, {{0, 2.0f}, {1, 3.0f}})});
  const std::vector<std::vector<std::uint32_t>> parts = {{0}, {1}};
  const auto index = PartitionedInvertedIndex::build(ds, parts);

  CHECK(index.dim() == 2);
  CHECK(index.doc_count() == 2);
  CHECK(index.partition_count() == 2);

  CHECK(index.postings(0) == std::vector<Posting>{{0, 1.0f}, {1, 2.0f}});
  CHECK(index.skips(0) == std::vector<SkipEntry>{{0, 0}, {1, 1}});
  CHECK(index.postings(1) == std::vector<Posting>{{1, 3.0f}});
  CHECK(index.skips(1) == std::vector<SkipEntry>{{1, 0}});

  const IndexOverhead o = index.overhead();
  CHECK(o.skip_integers == 6);
  CHECK(o.posting_entries == 3);

  const SparseVector q = sv(2, {{0, 1.0f}});
  SUBCASE("one selected partition scores only its segment") {
    const std::vector<std::uint32_t> selected = {1};
    const TopKResult r = index.query(q, selected, 1);
    REQUIRE(r.size() == 1);
    CHECK(r[0].id == 1);
    CHECK(r[0].score == 2.0);
  }
  SUBCASE("no selected partitions, no results") {
    CHECK(index.query(q, std::vector<std::uint32_t>{}, 5).empty());
  }
  SUBCASE("coordinate absent from the selected partition") {
    const std::vector<std::uint32_t> selected = {0};
    CHECK(index.query(sv(2, {{1, 5.0f}}), selected, 5).empty());
  }
  SUBCASE("all partitions match linscan and the exact scan") {
    const std::vector<std::uint32_t> all = {0, 1};
    const TopKResult pruned = index.query(q, all, 2);
    const auto lin = LinScanIndex::build(ds);
    CHECK(same_result(pruned, lin.query_exact(q, 2)));
    CHECK(same_result(pruned, exact_topk(ds, HybridVector{DenseVector{}, q}, 2)));
    REQUIRE(pruned.size() == 2);
    CHECK(pruned[0].id == 1);
    CHECK(pruned[0].score == 2.0);
    CHECK(pruned[1].id == 0);
    CHECK(pruned[1].score == 1.0);
  }
}

TEST_CASE("inverted index: single partition degenerates to plain lists") {
  Rng rng(4401);
  const VectorDataset ds = random_ds(rng, 8, 5, 3, false);
  std::vector<std::vector<std::uint32_t>> parts(1);
  for (std::uint32_t i = 0; i < 5; ++i) parts[0].push_back(i);
  const auto index = PartitionedInvertedIndex::build(ds, parts);
  const auto lin = LinScanIndex::build(ds);

  std::uint64_t nonempty = 0;
  for (std::uint32_t t = 0; t < 8; ++t) {
    if (index.postings(t).empty()) {
      CHECK(index.skips(t).empty());
      continue;
    }
    ++nonempty;
    CHECK(index.skips(t) == std::vector<SkipEntry>{{0, 0}});
    for (std::size_t j = 1; j < index.postings(t).size(); ++j)
      CHECK(index.postings(t)[j - 1].doc < index.postings(t)[j].doc);
  }
  CHECK(index.overhead().skip_integers == 2 * nonempty);

  const std::vector<std::uint32_t> all = {0};
  for (int i = 0; i < 10; ++i) {
    const SparseVector q = random_sparse(rng, 8, 4, true);
    CHECK(same_result(index.query(q, all, 3), lin.query_exact(q, 3)));
  }
}

TEST_CASE("inverted index: pruned query equals the restricted oracle") {
  Rng rng(90210);
  const VectorDataset ds = random_ds(rng, 64, 500, 8, true);
  const auto members = random_partition(rng, 500, 16);
  const auto index = PartitionedInvertedIndex::build(ds, members);
  const auto plain = PartitionedInvertedIndex::build(ds, members, false);
  CHECK(index.remapped());
  CHECK(!plain.remapped());

  for (int trial = 0; trial < 25; ++trial) {
    const SparseVector q = random_sparse(rng, 64, 6, true);
    std::vector<std::uint32_t> selected;
    for (std::uint32_t p = 0; p < 16; ++p)
      if (rng.next_below(2) == 0) selected.push_back(p);

    const TopKResult want = restricted_oracle(ds, members, q, selected, 10);
    CHECK(same_result(index.query(q, selected, 10), want));
    CHECK(same_result(plain.query(q, selected, 10), want));

    // Selection order is immaterial: reversed input, same output.
    std::vector<std::uint32_t> reversed(selected.rbegin(), selected.rend());
    CHECK(same_result(index.query(q, reversed, 10), want));
  }
}

TEST_CASE("inverted index: full selection equals linscan and the exact baseline") {
  Rng rng(515);
  // Coordinate 0 in every doc and in the query keeps every document
  // qualified, so the disjunctive paths see the whole collection.
  std::vector<SparseVector> docs;
  for (std::size_t i = 0; i < 300; ++i) {
    SparseVector v = random_sparse(rng, 32, 5, false);
    if (!std::binary_search(v.indices.begin(), v.indices.end(), 0u)) {
      std::vector<std::pair<std::uint32_t, float>> entries = {{0, 0.5f}};
      for (std::size_t e = 0; e < v.nnz(); ++e) entries.emplace_back(v.indices[e], v.values[e]);
      v = SparseVector::from_entries(32, std::move(entries));
    }
    docs.push_back(std::move(v));
  }
  const VectorDataset ds = sparse_ds(32, std::move(docs));
  const auto members = random_partition(rng, 300, 7);
  const auto index = PartitionedInvertedIndex::build(ds, members);
  const auto lin = LinScanIndex::build(ds);

  std::vector<std::uint32_t> all(7);
  std::iota(all.begin(), all.end(), 0u);

  for (int trial = 0; trial < 20; ++trial) {
    SparseVector q = random_sparse(rng, 32, 6, false);
    if (!std::binary_search(q.indices.begin(), q.indices.end(), 0u)) {
      std::vector<std::pair<std::uint32_t, float>> entries = {{0, 1.0f}};
      for (std::size_t e = 0; e < q.nnz(); ++e) entries.emplace_back(q.indices[e], q.values[e]);
      q = SparseVector::from_entries(32, std::move(entries));
    }
    const TopKResult pruned = index.query(q, all, 20);
    const TopKResult scan = lin.query_exact(q, 20);
    CHECK(same_result(pruned, scan));
    CHECK(same_result(pruned, exact_topk(ds, HybridVector{DenseVector{}, q}, 20)));
    CHECK(index.count_qualified(q) == 300);
    CHECK(lin.count_qualified(q) == 300);
  }
}

TEST_CASE("doc id remapping") {
  SUBCASE("partition order then member order") {
    const std::vector<std::vector<std::uint32_t>> parts = {{5}, {0}, {1, 2, 3, 4}};
    const DocIdRemap remap = remap_doc_ids(parts, 6);
    CHECK(remap.forward == std::vector<std::uint32_t>{1, 2, 3, 4, 5, 0});
    CHECK(remap.inverse == std::vector<std::uint32_t>{5, 0, 1, 2, 3, 4});
    for (std::uint32_t i = 0; i < 6; ++i) CHECK(remap.inverse[remap.forward[i]] == i);
  }
  SUBCASE("already contiguous partitions map to themselves") {
    const std::vector<std::vector<std::uint32_t>> parts = {{0, 1}, {2, 3, 4}};
    const DocIdRemap remap = remap_doc_ids(parts, 5);
    for (std::uint32_t i = 0; i < 5; ++i) {
      CHECK(remap.forward[i] == i);
      CHECK(remap.inverse[i] == i);
    }
  }
  SUBCASE("stored ids become contiguous per partition, results stay original") {
    Rng rng(77);
    const VectorDataset ds = random_ds(rng, 24, 120, 4, true);
    // Interleave docs across partitions so the relabeling is nontrivial.
    std::vector<std::vector<std::uint32_t>> members(6);
    for (std::uint32_t i = 0; i < 120; ++i) members[i % 6].push_back(i);
    const auto remapped = PartitionedInvertedIndex::build(ds, members, true);
    const auto plain = PartitionedInvertedIndex::build(ds, members, false);

    // Partition p's new ids occupy [sum of earlier sizes, +size).
    std::vector<std::uint32_t> start(7, 0);
    for (std::size_t p = 0; p < 6; ++p)
      start[p + 1] = start[p] + static_cast<std::uint32_t>(members[p].size());
    for (std::uint32_t t = 0; t < 24; ++t) {
      const auto& skips = remapped.skips(t);
      const auto& list = remapped.postings(t);
      for (std::size_t s = 0; s < skips.size(); ++s) {
        const std::size_t end = s + 1 < skips.size() ? skips[s + 1].offset : list.size();
        for (std::size_t j = skips[s].offset; j < end; ++j) {
          CHECK(list[j].doc >= start[skips[s].partition]);
          CHECK(list[j].doc < start[skips[s].partition + 1]);
        }
      }
    }

    for (int trial = 0; trial < 15; ++trial) {
      const SparseVector q = random_sparse(rng, 24, 5, true);
      std::vector<std::uint32_t> selected;
      for (std::uint32_t p = 0; p < 6; ++p)
        if (rng.next_below(3) != 0) selected.push_back(p);
      CHECK(same_result(remapped.query(q, selected, 8), plain.query(q, selected, 8)));
    }
  }
}

TEST_CASE("inverted index: skip lists tile the postings") {
  Rng rng(31337);
  const VectorDataset ds = random_ds(rng, 48, 260, 6, true);
  const auto members = random_partition(rng, 260, 11);

  for (const bool remap : {true, false}) {
    const auto index = PartitionedInvertedIndex::build(ds, members, remap);

    // Where each doc id landed, in the index's own id space.
    std::vector<std::uint32_t> part_of(260);
    const DocIdRemap ids = remap_doc_ids(members, 260);
    for (std::uint32_t p = 0; p < 11; ++p)
      for (std::uint32_t doc : members[p]) part_of[remap ? ids.forward[doc] : doc] = p;

    std::uint64_t pairs = 0;
    for (std::uint32_t t = 0; t < 48; ++t) {
      const auto& skips = index.skips(t);
      const auto& list = index.postings(t);
      if (list.empty()) {
        CHECK(skips.empty());
        continue;
      }
      REQUIRE(!skips.empty());
      CHECK(skips.front().offset == 0);
      pairs += skips.size();
      for (std::size_t s = 0; s < skips.size(); ++s) {
        if (s > 0) {
          CHECK(skips[s].partition > skips[s - 1].partition);
          CHECK(skips[s].offset > skips[s - 1].offset);
        }
        const std::size_t end = s + 1 < skips.size() ? skips[s + 1].offset : list.size();
        REQUIRE(end > skips[s].offset);  // segments are nonempty by construction
        for (std::size_t j = skips[s].offset; j < end; ++j) {
          CHECK(part_of[list[j].doc] == skips[s].partition);
          if (j > skips[s].offset) CHECK(list[j - 1].doc < list[j].doc);
        }
      }
    }

    // Skip storage is two integers per touched (coordinate, partition) pair,
    // and the pair count can never exceed dim * partitions.
    const IndexOverhead o = index.overhead();
    CHECK(o.skip_integers == 2 * pairs);
    CHECK(o.skip_integers <= 2ull * 48 * 11);
    std::uint64_t entries = 0;
    for (const auto& v : ds.vectors) entries += v.sparse.nnz();
    CHECK(o.posting_entries == entries);
  }
}

TEST_CASE("inverted index: save and load") {
  Rng rng(2024);
  const VectorDataset ds = random_ds(rng, 40, 150, 5, true);
  const auto members = random_partition(rng, 150, 9);
  const fs::path path = tmp_dir() / "index.spii";

  for (const bool remap : {true, false}) {
    CAPTURE(remap);
    const auto index = PartitionedInvertedIndex::build(ds, members, remap);
    index.save(path);
    const auto loaded = PartitionedInvertedIndex::load(path);

    CHECK(loaded.dim() == index.dim());
    CHECK(loaded.doc_count() == index.doc_count());
    CHECK(loaded.partition_count() == index.partition_count());
    CHECK(loaded.remapped() == index.remapped());
    for (std::uint32_t t = 0; t < 40; ++t) {
      CHECK(loaded.postings(t) == index.postings(t));
      CHECK(loaded.skips(t) == index.skips(t));
    }

    const fs::path again = tmp_dir() / "index2.spii";
    loaded.save(again);
    CHECK(file_bytes(path) == file_bytes(again));

    for (int trial = 0; trial < 10; ++trial) {
      const SparseVector q = random_sparse(rng, 40, 6, true);
      std::vector<std::uint32_t> selected;
      for (std::uint32_t p = 0; p < 9; ++p)
        if (rng.next_below(2) == 0) selected.push_back(p);
      CHECK(same_result(loaded.query(q, selected, 10), index.query(q, selected, 10)));
    }
  }

  SUBCASE("corrupt files are rejected") {
    const auto index = PartitionedInvertedIndex::build(ds, members);
    index.save(path);
    std::string bytes = file_bytes(path);

    auto write_bytes = [&](const std::string& data) {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out.write(data.data(), static_cast<std::streamsize>(data.size()));
    };

    std::string bad = bytes;
    bad[0] = 'X';
    write_bytes(bad);
    CHECK_THROWS_AS(PartitionedInvertedIndex::load(path), FormatError);

    bad = bytes;
    bad[4] = 9;
    write_bytes(bad);
    CHECK_THROWS_AS(PartitionedInvertedIndex::load(path), FormatError);

    write_bytes(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(PartitionedInvertedIndex::load(path), FormatError);

    CHECK_THROWS_AS(PartitionedInvertedIndex::load(tmp_dir() / "no_such.spii"), FormatError);
  }
}

TEST_CASE("count_qualified counts documents sharing a coordinate") {
  const VectorDataset ds =
      sparse_ds(3, {sv(3, {{0, 1.0f}}), sv(3, {{0, 2.0f}, {1, 1.0f}}), sv(3, {{2, 4.0f}})});
  const std::vector<std::vector<std::uint32_t>> parts = {{0, 1, 2}};
  const auto index = PartitionedInvertedIndex::build(ds, parts);
  const auto lin = LinScanIndex::build(ds);

  CHECK(index.count_qualified(sv(3, {{0, 1.0f}, {1, 1.0f}})) == 2);
  CHECK(lin.count_qualified(sv(3, {{0, 1.0f}, {1, 1.0f}})) == 2);
  CHECK(index.count_qualified(sv(3, {{2, 9.0f}})) == 1);
  CHECK(index.count_qualified(sv(3, {})) == 0);

  SUBCASE("agrees with a direct support scan on random data") {
    Rng rng(88);
    const VectorDataset big = random_ds(rng, 32, 200, 5, true);
    const auto bidx = PartitionedInvertedIndex::build(big, random_partition(rng, 200, 5));
    const auto blin = LinScanIndex::build(big);
    for (int trial = 0; trial < 30; ++trial) {
      const SparseVector q = random_sparse(rng, 32, 4, true);
      std::uint64_t want = 0;
      for (const auto& v : big.vectors)
        if (intersects(q, v.sparse)) ++want;
      CHECK(bidx.count_qualified(q) == want);
      CHECK(blin.count_qualified(q) == want);
    }
  }
}

TEST_CASE("queries from a drifted vocabulary skip unknown coordinates") {
  Rng rng(616);
  const VectorDataset ds = random_ds(rng, 8, 60, 3, false);
  const auto members = random_partition(rng, 60, 4);
  const auto index = PartitionedInvertedIndex::build(ds, members);
  const auto lin = LinScanIndex::build(ds);
  const std::vector<std::uint32_t> all = {0, 1, 2, 3};

  // Same in-range mass, one coordinate the index has never seen.
  const SparseVector drifted = sv(16, {{3, 1.0f}, {12, 2.0f}});
  const SparseVector trimmed = sv(8, {{3, 1.0f}});

  RetrievalStats stats;
  const TopKResult got = index.query(drifted, all, 10, &stats);
  CHECK(stats.coords_skipped == 1);
  CHECK(same_result(got, index.query(trimmed, all, 10)));

  stats = {};
  CHECK(same_result(lin.query_exact(drifted, 10, &stats), lin.query_exact(trimmed, 10)));
  CHECK(stats.coords_skipped == 1);

  stats = {};
  const auto budgeted = lin.query_budgeted(drifted, 10, std::chrono::milliseconds(50), &stats);
  CHECK(same_result(budgeted, lin.query_exact(trimmed, 10)));
  CHECK(stats.coords_skipped == 1);

  // A narrower vocabulary needs no trimming at all.
  RetrievalStats narrow;
  CHECK(same_result(index.query(sv(4, {{3, 1.0f}}), all, 10, &narrow),
                    index.query(trimmed, all, 10)));
  CHECK(narrow.coords_skipped == 0);
}

TEST_CASE("linscan budgeted queries") {
  Rng rng(9090);
  const VectorDataset ds = random_ds(rng, 64, 400, 8, false);
  const auto lin = LinScanIndex::build(ds);

  SUBCASE("an infinite budget is the exact path") {
    for (int trial = 0; trial < 50; ++trial) {
      const SparseVector q = random_sparse(rng, 64, 6, false);
      CHECK(same_result(lin.query_budgeted(q, 10, std::chrono::nanoseconds::max()),
                        lin.query_exact(q, 10)));
    }
  }

  SUBCASE("a tiny budget still completes at least one coordinate") {
    for (int trial = 0; trial < 20; ++trial) {
      const SparseVector q = random_sparse(rng, 64, 6, false);
      RetrievalStats partial_stats, exact_stats;
      const TopKResult partial =
          lin.query_budgeted(q, 10, std::chrono::nanoseconds(1), &partial_stats);
      const TopKResult full = lin.query_exact(q, 400, &exact_stats);
      CHECK(partial.size() <= 10);
      CHECK(partial_stats.postings_visited <= exact_stats.postings_visited);

      // Values are nonnegative, so a partial accumulation can only trail the
      // full score of the same document.
      for (const ScoredDoc& d : partial) {
        CHECK(intersects(q, ds.vectors[d.id].sparse));
        const auto it = std::find_if(full.begin(), full.end(),
                                     [&](const ScoredDoc& f) { return f.id == d.id; });
        REQUIRE(it != full.end());
        CHECK(d.score <= it->score + 1e-12);
      }

      // The heaviest coordinate always runs; if it posts anything, the
      // result cannot come back empty.
      std::uint32_t heaviest = q.indices[0];
      float best = std::abs(q.values[0]);
      for (std::size_t e = 1; e < q.nnz(); ++e)
        if (std::abs(q.values[e]) > best) {
          best = std::abs(q.values[e]);
          heaviest = q.indices[e];
        }
      std::uint64_t heaviest_postings = 0;
      for (const auto& v : ds.vectors)
        if (std::binary_search(v.sparse.indices.begin(), v.sparse.indices.end(), heaviest))
          ++heaviest_postings;
      if (heaviest_postings > 0) CHECK(!partial.empty());
    }
  }
}

TEST_CASE("inverted index: malformed inputs") {
  Rng rng(13);
  const VectorDataset ds = random_ds(rng, 16, 6, 3, false);

  SUBCASE("dataset must be sparse-only") {
    VectorDataset hybrid = ds;
    hybrid.dense_dim = 2;
    for (auto& v : hybrid.vectors) v.dense.values = {0.0f, 0.0f};
    const std::vector<std::vector<std::uint32_t>> parts = {{0, 1, 2, 3, 4, 5}};
    CHECK_THROWS_AS(PartitionedInvertedIndex::build(hybrid, parts), std::invalid_argument);
    CHECK_THROWS_AS(LinScanIndex::build(hybrid), std::invalid_argument);

    VectorDataset dense_only;
    dense_only.dense_dim = 4;
    dense_only.sparse_dim = 0;
    CHECK_THROWS_AS(LinScanIndex::build(dense_only), std::invalid_argument);
  }

  SUBCASE("partitions must cover every doc exactly once, sorted") {
    using P = std::vector<std::vector<std::uint32_t>>;
    CHECK_THROWS_AS(PartitionedInvertedIndex::build(ds, P{{0, 1, 2}, {2, 3, 4, 5}}),
                    std::invalid_argument);  // overlap
    CHECK_THROWS_AS(PartitionedInvertedIndex::build(ds, P{{0, 1, 2}, {4, 5}}),
                    std::invalid_argument);  // doc 3 missing
    CHECK_THROWS_AS(PartitionedInvertedIndex::build(ds, P{{0, 1, 2, 3, 4, 5, 6}}),
                    std::invalid_argument);  // member out of range
    CHECK_THROWS_AS(PartitionedInvertedIndex::build(ds, P{{1, 0, 2, 3, 4, 5}}),
                    std::invalid_argument);  // members not ascending
  }

  SUBCASE("selected partition ids are validated") {
    const std::vector<std::vector<std::uint32_t>> parts = {{0, 1, 2}, {3, 4, 5}};
    const auto index = PartitionedInvertedIndex::build(ds, parts);
    const SparseVector q = sv(16, {{0, 1.0f}});
    CHECK_THROWS_AS(index.query(q, std::vector<std::uint32_t>{2}, 5), std::invalid_argument);
    CHECK_THROWS_AS(index.query(q, std::vector<std::uint32_t>{1, 1}, 5), std::invalid_argument);
  }

  SUBCASE("an empty partition is legal and never selected into results") {
    const std::vector<std::vector<std::uint32_t>> parts = {{0, 1, 2, 3, 4, 5}, {}};
    const auto index = PartitionedInvertedIndex::build(ds, parts);
    CHECK(index.partition_count() == 2);
    const SparseVector q = random_sparse(rng, 16, 4, false);
    CHECK(index.query(q, std::vector<std::uint32_t>{1}, 5).empty());
  }
}

TEST_CASE("partitioned scan plugs into ivf retrieval") {
  Rng rng(321);
  // Coordinate 0 everywhere keeps every member of the probed partitions in
  // the accumulator, so the index-backed scan sees exactly the docs the
  // exhaustive scan scores.
  std::vector<SparseVector> docs;
  for (std::size_t i = 0; i < 300; ++i) {
    SparseVector v = random_sparse(rng, 100, 6, false);
    if (!std::binary_search(v.indices.begin(), v.indices.end(), 0u)) {
      std::vector<std::pair<std::uint32_t, float>> entries = {{0, 0.3f}};
      for (std::size_t e = 0; e < v.nnz(); ++e) entries.emplace_back(v.indices[e], v.values[e]);
      v = SparseVector::from_entries(100, std::move(entries));
    }
    docs.push_back(std::move(v));
  }
  auto ds = std::make_shared<const VectorDataset>(sparse_ds(100, std::move(docs)));

  TransformParams tp;
  tp.kind = TransformKind::Jl;
  tp.input_dim = 100;
  tp.width = 32;
  tp.seed = 5;
  const IvfIndex ivf = IvfIndex::build(ds, tp, KMeansVariant::Standard, 12);
  const auto inverted = PartitionedInvertedIndex::build(*ds, ivf.members());

  const ExhaustiveScan exhaustive(ivf);
  const PartitionedIndexScan pruned(inverted);

  for (const std::size_t ell : {std::size_t{30}, std::size_t{120}, std::size_t{300}}) {
    for (int trial = 0; trial < 10; ++trial) {
      SparseVector qs = random_sparse(rng, 100, 8, false);
      if (!std::binary_search(qs.indices.begin(), qs.indices.end(), 0u)) {
        std::vector<std::pair<std::uint32_t, float>> entries = {{0, 1.0f}};
        for (std::size_t e = 0; e < qs.nnz(); ++e) entries.emplace_back(qs.indices[e], qs.values[e]);
        qs = SparseVector::from_entries(100, std::move(entries));
      }
      const HybridVector q{DenseVector{}, qs};
      CHECK(same_result(ivf.retrieve(q, 10, ell, pruned), ivf.retrieve(q, 10, ell, exhaustive)));
    }
  }

  SUBCASE("the adapter rejects dense query parts") {
    HybridVector q;
    q.dense.values = {1.0f};
    q.sparse = sv(100, {{0, 1.0f}});
    const std::vector<std::uint32_t> selected = {0};
    CHECK_THROWS_AS(pruned.run(q, selected, 5, nullptr), std::invalid_argument);
  }
}
