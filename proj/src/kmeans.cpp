// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#include "seismic/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace seismic {

namespace {

double squared_l2(const float* a, const float* b, std::uint32_t width) {
  double acc = 0.0;
  for (std::uint32_t i = 0; i < width; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

double dot_f(const float* a, const float* b, std::uint32_t width) {
  double acc = 0.0;
  for (std::uint32_t i = 0; i < width; ++i)
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

std::uint32_t nearest(const float* point, const std::vector<float>& centroids, std::uint32_t p,
                      std::uint32_t width, KMeansVariant variant) {
  std::uint32_t best = 0;
  if (variant == KMeansVariant::Standard) {
    double best_d = squared_l2(point, centroids.data(), width);
    for (std::uint32_t c = 1; c < p; ++c) {
      const double d = squared_l2(point, centroids.data() + std::size_t(c) * width, width);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
  } else {
    double best_d = dot_f(point, centroids.data(), width);
    for (std::uint32_t c = 1; c < p; ++c) {
      const double d = dot_f(point, centroids.data() + std::size_t(c) * width, width);
      if (d > best_d) {
        best_d = d;
        best = c;
      }
    }
  }
  return best;
}

void normalize_rows(std::vector<float>& centroids, std::uint32_t p, std::uint32_t width,
                    const std::vector<float>& fallback) {
  for (std::uint32_t c = 0; c < p; ++c) {
    float* row = centroids.data() + std::size_t(c) * width;
    double norm = 0.0;
    for (std::uint32_t i = 0; i < width; ++i)
      norm += static_cast<double>(row[i]) * static_cast<double>(row[i]);
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      // A cancelled-out mean cannot be normalized; keep the previous centroid.
      if (!fallback.empty())
        std::copy(fallback.begin() + std::size_t(c) * width,
                  fallback.begin() + std::size_t(c + 1) * width, row);
      continue;
    }
    for (std::uint32_t i = 0; i < width; ++i)
      row[i] = static_cast<float>(static_cast<double>(row[i]) / norm);
  }
}

// kmeans++ D^2 seeding (Euclidean for both variants).
std::vector<float> seed_centroids(std::span<const float> points,
                                  const std::vector<std::uint32_t>& train, std::uint32_t width,
                                  std::uint32_t p, const KMeansOptions& options, Rng& rng) {
  const std::size_t tcount = train.size();
  std::vector<float> centroids(std::size_t(p) * width);
  auto point = [&](std::size_t t) { return points.data() + std::size_t(train[t]) * width; };
  auto set_centroid = [&](std::uint32_t c, std::size_t t) {
    std::copy(point(t), point(t) + width, centroids.data() + std::size_t(c) * width);
  };

  if (!options.kmeanspp_init) {
    // Uniform sample without replacement (partial Fisher-Yates).
    std::vector<std::uint32_t> pick(tcount);
    std::iota(pick.begin(), pick.end(), 0u);
    for (std::uint32_t j = 0; j < p; ++j) {
      const std::size_t r = j + rng.next_below(tcount - j);
      std::swap(pick[j], pick[r]);
      set_centroid(j, pick[j]);
    }
    return centroids;
  }

  set_centroid(0, rng.next_below(tcount));
  std::vector<double> d2(tcount);
  for (std::size_t t = 0; t < tcount; ++t)
    d2[t] = squared_l2(point(t), centroids.data(), width);
  for (std::uint32_t c = 1; c < p; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t chosen;
    if (total == 0.0) {
      chosen = rng.next_below(tcount);  // all remaining mass identical
    } else {
      const double r = rng.next_unit() * total;
      double cum = 0.0;
      chosen = tcount - 1;
      for (std::size_t t = 0; t < tcount; ++t) {
        cum += d2[t];
        if (cum > r) {
          chosen = t;
          break;
        }
      }
    }
    set_centroid(c, chosen);
    const float* cc = centroids.data() + std::size_t(c) * width;
    for (std::size_t t = 0; t < tcount; ++t)
      d2[t] = std::min(d2[t], squared_l2(point(t), cc, width));
  }
  return centroids;
}

void parallel_assign(std::span<const float> points, const std::vector<std::uint32_t>& train,
                     std::uint32_t width, const std::vector<float>& centroids, std::uint32_t p,
                     KMeansVariant variant, std::uint32_t threads,
                     std::vector<std::uint32_t>& out) {
  const std::size_t tcount = train.size();
  auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t)
      out[t] = nearest(points.data() + std::size_t(train[t]) * width, centroids, p, width, variant);
  };
  if (threads <= 1 || tcount < 2 * threads) {
    worker(0, tcount);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (tcount + threads - 1) / threads;
  for (std::uint32_t w = 0; w < threads; ++w) {
    const std::size_t lo = std::min(tcount, std::size_t(w) * chunk);
    const std::size_t hi = std::min(tcount, lo + chunk);
    if (lo < hi) pool.emplace_back(worker, lo, hi);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

ClusterModel kmeans(std::span<const float> points, std::size_t count, std::uint32_t width,
                    std::uint32_t p, KMeansVariant variant, const KMeansOptions& options) {
  if (width == 0) throw std::invalid_argument("kmeans: width is 0");
  if (points.size() != count * std::size_t(width))
    throw std::invalid_argument("kmeans: matrix shape mismatch");
  if (p == 0 || p > count) throw std::invalid_argument("kmeans: need 1 <= p <= count");

  Rng rng(options.seed);

  std::vector<std::uint32_t> train(count);
  std::iota(train.begin(), train.end(), 0u);
  const std::size_t cap = std::size_t(256) * p;
  if (options.subsample_training && count > cap) {
    for (std::size_t j = 0; j < cap; ++j) {
      const std::size_t r = j + rng.next_below(count - j);
      std::swap(train[j], train[r]);
    }
    train.resize(cap);
    std::sort(train.begin(), train.end());
  }
  const std::size_t tcount = train.size();

  ClusterModel model;
  model.partitions = p;
  model.variant = variant;
  model.width = width;
  model.centroids = seed_centroids(points, train, width, p, options, rng);
  if (variant == KMeansVariant::Spherical) normalize_rows(model.centroids, p, width, {});

  std::vector<std::uint32_t> assign_now(tcount, 0);
  std::vector<std::uint32_t> assign_prev(tcount, p);  // p = "unassigned"
  std::vector<std::size_t> sizes(p);
  auto point = [&](std::size_t t) { return points.data() + std::size_t(train[t]) * width; };

  for (std::uint32_t iter = 0; iter < options.max_iters; ++iter) {
    parallel_assign(points, train, width, model.centroids, p, variant, options.threads,
                    assign_now);

    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t t = 0; t < tcount; ++t) ++sizes[assign_now[t]];

    // Empty clusters steal the point farthest from its current centroid.
    for (std::uint32_t c = 0; c < p; ++c) {
      if (sizes[c] != 0) continue;
      double worst = -1.0;
      std::size_t worst_t = tcount;
      for (std::size_t t = 0; t < tcount; ++t) {
        if (sizes[assign_now[t]] < 2) continue;  // do not empty another cluster
        const float* x = point(t);
        const float* cc = model.centroids.data() + std::size_t(assign_now[t]) * width;
        const double badness = variant == KMeansVariant::Standard ? squared_l2(x, cc, width)
                                                                  : -dot_f(x, cc, width);
        if (badness > worst) {
          worst = badness;
          worst_t = t;
        }
      }
      if (worst_t == tcount) break;  // count == p degenerate case
      --sizes[assign_now[worst_t]];
      assign_now[worst_t] = c;
      ++sizes[c];
    }

    std::size_t changed = 0;
    for (std::size_t t = 0; t < tcount; ++t)
      if (assign_now[t] != assign_prev[t]) ++changed;
    const double churn = static_cast<double>(changed) / static_cast<double>(tcount);

    // Mean update, accumulated in f64 in point order.
    std::vector<double> sums(std::size_t(p) * width, 0.0);
    for (std::size_t t = 0; t < tcount; ++t) {
      const float* x = point(t);
      double* row = sums.data() + std::size_t(assign_now[t]) * width;
      for (std::uint32_t i = 0; i < width; ++i) row[i] += static_cast<double>(x[i]);
    }
    const std::vector<float> previous = std::move(model.centroids);
    model.centroids.assign(std::size_t(p) * width, 0.0f);
    for (std::uint32_t c = 0; c < p; ++c) {
      if (sizes[c] == 0) continue;  // unreachable after repair unless count == p
      const double inv = 1.0 / static_cast<double>(sizes[c]);
      float* row = model.centroids.data() + std::size_t(c) * width;
      const double* s = sums.data() + std::size_t(c) * width;
      for (std::uint32_t i = 0; i < width; ++i) row[i] = static_cast<float>(s[i] * inv);
    }
    if (variant == KMeansVariant::Spherical) normalize_rows(model.centroids, p, width, previous);

    double objective = 0.0;
    for (std::size_t t = 0; t < tcount; ++t)
      objective += squared_l2(point(t), model.centroids.data() + std::size_t(assign_now[t]) * width,
                              width);
    model.inertia_history.push_back(objective);

    assign_prev = assign_now;
    model.iterations_run = iter + 1;
    if (churn <= options.churn_tol) break;
  }

  // Final assignment over the full point set (a no-op rescan when training
  // was not subsampled, but it keeps the reported inertia consistent).
  model.assignments.resize(count);
  std::vector<std::uint32_t> all(count);
  std::iota(all.begin(), all.end(), 0u);
  parallel_assign(points, all, width, model.centroids, p, variant, options.threads,
                  model.assignments);
  double inertia = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    inertia += squared_l2(points.data() + i * std::size_t(width),
                          model.centroids.data() + std::size_t(model.assignments[i]) * width,
                          width);
  model.inertia = inertia;
  return model;
}

std::uint32_t assign(std::span<const float> point, const ClusterModel& model) {
  if (point.size() != model.width) throw std::invalid_argument("assign: width mismatch");
  return nearest(point.data(), model.centroids, model.partitions, model.width, model.variant);
}

}  // namespace seismic
