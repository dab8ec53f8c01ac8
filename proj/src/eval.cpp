// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#include "seismic/eval.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace seismic {

namespace {

void check_query_shape(const VectorDataset& ds, const HybridVector& q, const char* who) {
  if (q.dense.values.size() != ds.dense_dim || q.sparse.dim != ds.sparse_dim)
    throw std::invalid_argument(std::string(who) + ": query shape mismatch with dataset");
}

}  // namespace

TopKResult exact_topk(const VectorDataset& ds, const HybridVector& q, std::size_t k) {
  if (k == 0) throw std::invalid_argument("exact_topk: k is 0");
  check_query_shape(ds, q, "exact_topk");
  std::vector<ScoredDoc> scored;
  scored.reserve(ds.count());
  for (std::size_t id = 0; id < ds.count(); ++id)
    scored.push_back({static_cast<std::uint32_t>(id), dot(q, ds.vectors[id])});
  return select_top_k(std::move(scored), k);
}

double accuracy_at_k(const TopKResult& approx, const TopKResult& truth, std::size_t k) {
  const std::size_t denom = std::min(k, truth.size());
  if (denom == 0) return 1.0;
  std::vector<std::uint32_t> wanted;
  wanted.reserve(denom);
  for (std::size_t i = 0; i < denom; ++i) wanted.push_back(truth[i].id);
  std::sort(wanted.begin(), wanted.end());
  std::size_t hits = 0;
  const std::size_t limit = std::min(k, approx.size());
  for (std::size_t i = 0; i < limit; ++i)
    hits += std::binary_search(wanted.begin(), wanted.end(), approx[i].id) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(denom);
}

VectorDataset gen_synthetic(std::size_t count, std::uint32_t dense_dim, std::uint32_t sparse_dim,
                            std::uint32_t support, double scale, std::uint64_t seed) {
  if (scale <= 0.0) throw std::invalid_argument("synthetic: scale must be positive");
  if (support > sparse_dim) throw std::invalid_argument("synthetic: support exceeds sparse_dim");
  if (dense_dim == 0 && sparse_dim == 0)
    throw std::invalid_argument("synthetic: both widths are zero");

  VectorDataset ds;
  ds.dense_dim = dense_dim;
  ds.sparse_dim = sparse_dim;
  ds.vectors.reserve(count);

  Rng rng(seed);
  std::vector<std::uint32_t> pool(sparse_dim);
  std::iota(pool.begin(), pool.end(), 0u);
  std::vector<double> draws;

  for (std::size_t i = 0; i < count; ++i) {
    HybridVector v;
    v.sparse.dim = sparse_dim;
    if (dense_dim != 0) {
      draws.resize(dense_dim);
      double norm2 = 0.0;
      for (std::uint32_t j = 0; j < dense_dim; ++j) {
        draws[j] = rng.next_exp(scale);
        norm2 += draws[j] * draws[j];
      }
      const double norm = std::sqrt(norm2);
      v.dense.values.resize(dense_dim);
      for (std::uint32_t j = 0; j < dense_dim; ++j)
        v.dense.values[j] = static_cast<float>(norm > 0.0 ? draws[j] / norm : 0.0);
    }
    if (support != 0) {
      // Partial Fisher-Yates over the coordinate pool; any starting
      // permutation works, so the pool carries over between vectors.
      for (std::uint32_t j = 0; j < support; ++j) {
        const auto pick = j + static_cast<std::uint32_t>(rng.next_below(sparse_dim - j));
        std::swap(pool[j], pool[pick]);
      }
      std::vector<std::uint32_t> coords(pool.begin(), pool.begin() + support);
      std::sort(coords.begin(), coords.end());
      draws.resize(support);
      double norm2 = 0.0;
      for (std::uint32_t j = 0; j < support; ++j) {
        draws[j] = rng.next_exp(scale);
        norm2 += draws[j] * draws[j];
      }
      const double norm = std::sqrt(norm2);
      std::vector<std::pair<std::uint32_t, float>> entries;
      entries.reserve(support);
      for (std::uint32_t j = 0; j < support; ++j)
        entries.emplace_back(coords[j],
                             static_cast<float>(norm > 0.0 ? draws[j] / norm : 0.0));
      v.sparse = SparseVector::from_entries(sparse_dim, std::move(entries));
    }
    ds.vectors.push_back(std::move(v));
  }
  return ds;
}

SyntheticWorkload gen_synthetic_hybrid(const SyntheticSpec& spec) {
  SyntheticWorkload w;
  w.docs = gen_synthetic(spec.docs, spec.dense_dim, spec.sparse_dim, spec.support, spec.scale,
                         spec.doc_seed);
  w.queries = gen_synthetic(spec.queries, spec.dense_dim, spec.sparse_dim, spec.support,
                            spec.scale, spec.query_seed);
  return w;
}

TopKResult two_stage_retrieve(const VectorDataset& ds, const HybridVector& q, std::size_t k,
                              std::size_t k_prime, bool cap_union) {
  if (k == 0) throw std::invalid_argument("two-stage: k is 0");
  if (k_prime < k) throw std::invalid_argument("two-stage: k' must be at least k");
  if (ds.dense_dim == 0 || ds.sparse_dim == 0)
    throw std::invalid_argument("two-stage: dataset is not hybrid");
  check_query_shape(ds, q, "two-stage");

  const std::size_t count = ds.count();
  std::vector<ScoredDoc> by_dense, by_sparse;
  by_dense.reserve(count);
  by_sparse.reserve(count);
  for (std::size_t id = 0; id < count; ++id) {
    const auto u = static_cast<std::uint32_t>(id);
    by_dense.push_back({u, dot(q.dense, ds.vectors[id].dense)});
    by_sparse.push_back({u, dot(q.sparse, ds.vectors[id].sparse)});
  }
  const TopKResult sd = select_top_k(std::move(by_dense), k_prime);
  const TopKResult ss = select_top_k(std::move(by_sparse), k_prime);

  std::vector<std::uint32_t> union_ids;
  std::vector<std::uint8_t> seen(count, 0);
  auto add = [&](std::uint32_t id) {
    if (!seen[id]) {
      seen[id] = 1;
      union_ids.push_back(id);
    }
  };
  if (cap_union) {
    // One id from each list per round, dense first, until k distinct docs.
    const std::size_t rounds = std::max(sd.size(), ss.size());
    for (std::size_t i = 0; i < rounds && union_ids.size() < k; ++i) {
      if (i < sd.size()) add(sd[i].id);
      if (union_ids.size() >= k) break;
      if (i < ss.size()) add(ss[i].id);
    }
  } else {
    for (const ScoredDoc& d : sd) add(d.id);
    for (const ScoredDoc& d : ss) add(d.id);
  }

  std::vector<ScoredDoc> rerank;
  rerank.reserve(union_ids.size());
  for (std::uint32_t id : union_ids) rerank.push_back({id, dot(q, ds.vectors[id])});
  return select_top_k(std::move(rerank), k);
}

SketchScan SketchScan::build(std::shared_ptr<const VectorDataset> dataset,
                             const TransformParams& transform) {
  if (!dataset) throw std::invalid_argument("sketch scan: null dataset");
  const VectorDataset& ds = *dataset;
  if (transform.input_dim != ds.sparse_dim)
    throw std::invalid_argument("sketch scan: transform input_dim != dataset sparse_dim");
  SketchScan scan;
  scan.transform_ = transform;
  const std::uint32_t sw = transform.sketch_width();
  scan.width_ = ds.dense_dim + sw;
  if (scan.width_ == 0) throw std::invalid_argument("sketch scan: nothing to score");
  scan.rows_.resize(ds.count() * std::size_t(scan.width_));
  for (std::size_t id = 0; id < ds.count(); ++id) {
    float* row = scan.rows_.data() + id * scan.width_;
    const HybridVector& v = ds.vectors[id];
    std::copy(v.dense.values.begin(), v.dense.values.end(), row);
    if (sw != 0) {
      const DenseSketch s = doc_sketch_vector(transform, v.sparse);
      std::copy(s.begin(), s.end(), row + ds.dense_dim);
    }
  }
  scan.dataset_ = std::move(dataset);
  return scan;
}

TopKResult SketchScan::retrieve(const HybridVector& q, std::size_t k, std::size_t k_prime,
                                RetrievalStats* stats) const {
  if (k == 0) throw std::invalid_argument("sketch scan: k is 0");
  if (k_prime < k) throw std::invalid_argument("sketch scan: k' must be at least k");
  const VectorDataset& ds = *dataset_;
  check_query_shape(ds, q, "sketch scan");

  const QuerySketchVector qs =
      ds.sparse_dim != 0 ? query_sketch_vector(transform_, q.sparse) : QuerySketchVector{};
  std::vector<ScoredDoc> estimates;
  estimates.reserve(ds.count());
  for (std::size_t id = 0; id < ds.count(); ++id)
    estimates.push_back({static_cast<std::uint32_t>(id),
                         hybrid_row_score(q.dense, qs, rows_.data() + id * width_,
                                          ds.dense_dim)});
  const TopKResult candidates = select_top_k(std::move(estimates), k_prime);

  std::vector<ScoredDoc> rerank;
  rerank.reserve(candidates.size());
  for (const ScoredDoc& c : candidates) rerank.push_back({c.id, dot(q, ds.vectors[c.id])});
  if (stats != nullptr) stats->docs_evaluated += rerank.size();
  return select_top_k(std::move(rerank), k);
}

void write_results(std::ostream& out, std::span<const TopKResult> results) {
  char buf[64];
  for (const TopKResult& r : results) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i != 0) out << '\t';
      out << r[i].id;
    }
    for (const ScoredDoc& d : r) {
      std::snprintf(buf, sizeof buf, "%.17g", d.score);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

void write_results(const std::filesystem::path& path, std::span<const TopKResult> results) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_results(out, results);
  if (!out.good()) throw FormatError("short write to " + path.string());
}

std::vector<TopKResult> read_results(std::istream& in) {
  std::vector<TopKResult> all;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    TopKResult r;
    if (!line.empty()) {
      std::vector<std::string_view> fields;
      const std::string_view view = line;
      std::size_t pos = 0;
      while (true) {
        const std::size_t tab = view.find('\t', pos);
        fields.push_back(view.substr(pos, tab == std::string_view::npos ? tab : tab - pos));
        if (tab == std::string_view::npos) break;
        pos = tab + 1;
      }
      const std::string where = "results line " + std::to_string(lineno);
      if (fields.size() % 2 != 0) throw FormatError(where + ": odd field count");
      const std::size_t n = fields.size() / 2;
      r.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t id = 0;
        double score = 0.0;
        const std::string_view fid = fields[i], fscore = fields[n + i];
        auto [ip, iec] = std::from_chars(fid.data(), fid.data() + fid.size(), id);
        if (iec != std::errc{} || ip != fid.data() + fid.size())
          throw FormatError(where + ": bad doc id");
        auto [sp, sec] = std::from_chars(fscore.data(), fscore.data() + fscore.size(), score);
        if (sec != std::errc{} || sp != fscore.data() + fscore.size())
          throw FormatError(where + ": bad score");
        r.push_back({id, score});
      }
    }
    all.push_back(std::move(r));
  }
  return all;
}

std::vector<TopKResult> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_results(in);
}

BenchOutcome run_bench(std::span<const HybridVector> queries, std::span<const TopKResult> truth,
                       std::size_t k, const QueryFn& run, const QualifiedFn& qualified,
                       std::size_t repeats, std::size_t threads) {
  if (repeats == 0) throw std::invalid_argument("bench: repeats must be positive");
  if (!run) throw std::invalid_argument("bench: no query function");
  if (!truth.empty() && truth.size() != queries.size())
    throw std::invalid_argument("bench: ground truth count != query count");

  const std::size_t nq = queries.size();
  BenchOutcome out;
  out.results.resize(nq);
  std::vector<std::uint64_t> evaluated(nq, 0);

  auto run_range = [&](std::size_t lo, std::size_t hi, bool record) {
    for (std::size_t i = lo; i < hi; ++i) {
      RetrievalStats st;
      TopKResult r = run(queries[i], st);
      if (record) {
        evaluated[i] = st.docs_evaluated;
        out.results[i] = std::move(r);
      }
    }
  };

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    const bool record = rep == 0;
    const std::size_t workers = std::min(threads, nq);
    if (workers <= 1) {
      run_range(0, nq, record);
    } else {
      std::vector<std::thread> crew;
      crew.reserve(workers);
      const std::size_t chunk = (nq + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(nq, lo + chunk);
        if (lo < hi) crew.emplace_back(run_range, lo, hi, record);
      }
      for (std::thread& t : crew) t.join();
    }
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  out.qps = elapsed.count() > 0.0
                ? static_cast<double>(repeats * nq) / elapsed.count()
                : 0.0;

  if (!truth.empty() && nq != 0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < nq; ++i) sum += accuracy_at_k(out.results[i], truth[i], k);
    out.accuracy = sum / static_cast<double>(nq);
  }
  if (qualified) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < nq; ++i) {
      const std::uint64_t denom = qualified(queries[i]);
      if (denom == 0) continue;
      sum += static_cast<double>(evaluated[i]) / static_cast<double>(denom);
      ++counted;
    }
    if (counted != 0) out.frac_evaluated = sum / static_cast<double>(counted);
  }
  return out;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << "system,k,ell_fraction,accuracy,qps,frac_evaluated,repeats\n";
  char buf[192];
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof buf, ",%zu,%g,%g,%g,%g,%zu", r.k, r.ell_fraction, r.accuracy,
                  r.qps, r.frac_evaluated, r.repeats);
    out << r.system << buf << '\n';
  }
}

}  // namespace seismic
