// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#include "seismic/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "seismic/sketch.hpp"

namespace seismic {

namespace {

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double var_about(const std::vector<double>& xs, double center) {
  double acc = 0.0;
  for (double x : xs) acc += (x - center) * (x - center);
  return acc / static_cast<double>(xs.size());
}

// Rescales samples about their mean so their variance multiplies by `scale`.
void corrupt_variance(std::vector<double>& xs, double scale) {
  if (scale == 1.0) return;
  const double m = mean_of(xs);
  const double f = std::sqrt(scale);
  for (double& x : xs) x = m + (x - m) * f;
}

// Bernoulli(p_active) support with Exp(exp_scale) values over [0, dim).
SparseVector random_model_doc(std::uint32_t dim, double p_active, double exp_scale, Rng& rng) {
  std::vector<std::pair<std::uint32_t, float>> entries;
  for (std::uint32_t j = 0; j < dim; ++j) {
    if (rng.next_unit() >= p_active) continue;
    entries.emplace_back(j, static_cast<float>(rng.next_exp(exp_scale)));
  }
  return SparseVector::from_entries(dim, std::move(entries));
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double integrate_rec(double (*f)(double, const void*), const void* ctx, double a, double m,
                     double b, double fa, double fm, double fb, double whole, double tol,
                     int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm, ctx), frm = f(rm, ctx);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return integrate_rec(f, ctx, a, lm, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         integrate_rec(f, ctx, m, rm, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

}  // namespace

double integrate(double (*f)(double, const void*), const void* ctx, double a, double b,
                 double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a, ctx), fm = f(m, ctx), fb = f(b, ctx);
  const double whole = simpson(a, b, fa, fm, fb);
  return integrate_rec(f, ctx, a, m, b, fa, fm, fb, whole, tol, 48);
}

MomentCheck validate_sign_sketch_moments(const SparseVector& u, const SparseVector& v,
                                         std::uint32_t sketch_dim, std::size_t trials,
                                         std::uint64_t seed, double variance_scale) {
  if (u.dim != v.dim) throw std::invalid_argument("moment check: dimension mismatch");
  if (trials < 2) throw std::invalid_argument("moment check: need at least 2 trials");

  std::vector<double> samples;
  samples.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const JlTransform jl{u.dim, sketch_dim, mix64(seed ^ (t + 1))};
    const DenseSketch su = jl.sketch(u), sv = jl.sketch(v);
    double acc = 0.0;
    for (std::uint32_t i = 0; i < sketch_dim; ++i)
      acc += static_cast<double>(su[i]) * static_cast<double>(sv[i]);
    samples.push_back(acc);
  }
  corrupt_variance(samples, variance_scale);

  const double exact = dot(u, v);
  double nu = 0.0, nv = 0.0, cross = 0.0;
  for (float x : u.values) nu += static_cast<double>(x) * static_cast<double>(x);
  for (float x : v.values) nv += static_cast<double>(x) * static_cast<double>(x);
  {
    std::size_t i = 0, j = 0;
    while (i < u.indices.size() && j < v.indices.size()) {
      if (u.indices[i] == v.indices[j]) {
        const double a = u.values[i], b = v.values[j];
        cross += a * a * b * b;
        ++i, ++j;
      } else if (u.indices[i] < v.indices[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  MomentCheck check;
  check.expected_mean = exact;
  check.expected_var = (nu * nv + exact * exact - 2.0 * cross) / static_cast<double>(sketch_dim);
  check.empirical_mean = mean_of(samples);
  check.empirical_var = var_about(samples, check.empirical_mean);
  const double se = std::sqrt(check.empirical_var / static_cast<double>(trials));
  check.mean_z = se > 0.0 ? std::abs(check.empirical_mean - check.expected_mean) / se : 0.0;
  check.var_rel_err = check.expected_var > 0.0
                          ? std::abs(check.empirical_var - check.expected_var) / check.expected_var
                          : std::abs(check.empirical_var);
  return check;
}

MomentCheck validate_sign_sketch_random_docs(const SparseVector& q, double p_active,
                                             double exp_scale, std::uint32_t sketch_dim,
                                             std::size_t trials, std::uint64_t seed,
                                             double variance_scale) {
  if (trials < 2) throw std::invalid_argument("moment check: need at least 2 trials");
  Rng doc_rng(mix64(seed ^ 0x5eed0d0cULL));

  std::vector<double> estimates, residuals, exacts;
  estimates.reserve(trials);
  residuals.reserve(trials);
  exacts.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const SparseVector x = random_model_doc(q.dim, p_active, exp_scale, doc_rng);
    const JlTransform jl{q.dim, sketch_dim, mix64(seed ^ (t + 1))};
    const DenseSketch sq = jl.sketch(q), sx = jl.sketch(x);
    double est = 0.0;
    for (std::uint32_t i = 0; i < sketch_dim; ++i)
      est += static_cast<double>(sq[i]) * static_cast<double>(sx[i]);
    const double exact = dot(q, x);
    estimates.push_back(est);
    residuals.push_back(est - exact);
    exacts.push_back(exact);
  }
  corrupt_variance(residuals, variance_scale);
  if (variance_scale != 1.0) {
    // Keep the estimate samples consistent with the corrupted residuals.
    for (std::size_t t = 0; t < trials; ++t) estimates[t] = exacts[t] + residuals[t];
  }

  const double mu = exp_scale;
  const double sigma2 = exp_scale * exp_scale;  // Exp: variance = mean^2
  double sum_q = 0.0, norm_q = 0.0;
  for (float x : q.values) {
    sum_q += static_cast<double>(x);
    norm_q += static_cast<double>(x) * static_cast<double>(x);
  }
  const double sum_p = p_active * static_cast<double>(q.dim);
  const double sum_p_q2 = p_active * norm_q;
  const double sum_qp = p_active * sum_q;
  double sum_qp2 = 0.0;
  for (float x : q.values) {
    const double qp = static_cast<double>(x) * p_active;
    sum_qp2 += qp * qp;
  }

  MomentCheck check;
  check.expected_mean = mu * p_active * sum_q;
  check.expected_var = ((mu * mu + sigma2) * (norm_q * sum_p - sum_p_q2) +
                        mu * mu * (sum_qp * sum_qp - sum_qp2)) /
                       static_cast<double>(sketch_dim);
  check.empirical_mean = mean_of(estimates);
  // E[(Z - <q,X>)^2] is exactly the expected conditional variance.
  check.empirical_var = var_about(residuals, 0.0);
  const double sd = std::sqrt(var_about(estimates, check.empirical_mean));
  const double se = sd / std::sqrt(static_cast<double>(trials));
  check.mean_z = se > 0.0 ? std::abs(check.empirical_mean - check.expected_mean) / se : 0.0;
  check.var_rel_err = check.expected_var > 0.0
                          ? std::abs(check.empirical_var - check.expected_var) / check.expected_var
                          : std::abs(check.empirical_var);
  return check;
}

BoundCheck validate_ws_upper_bound(std::uint32_t dim, std::uint32_t half_width,
                                   std::size_t trials, std::uint64_t seed, double tolerance) {
  Rng rng(seed);
  BoundCheck check;
  check.trials = trials;
  auto random_vector = [&](std::size_t max_nnz) {
    const std::size_t nnz = 1 + rng.next_below(max_nnz);
    std::vector<std::pair<std::uint32_t, float>> entries;
    std::vector<std::uint8_t> used(dim, 0);
    while (entries.size() < nnz) {
      const auto c = static_cast<std::uint32_t>(rng.next_below(dim));
      if (used[c]) continue;
      used[c] = 1;
      float v = static_cast<float>(2.0 * rng.next_unit() - 1.0);
      if (v == 0.0f) v = 0.5f;
      entries.emplace_back(c, v);
    }
    return SparseVector::from_entries(dim, std::move(entries));
  };
  const std::size_t max_nnz = std::min<std::size_t>(dim, 32);
  for (std::size_t t = 0; t < trials; ++t) {
    const SparseVector q = random_vector(max_nnz);
    const SparseVector u = random_vector(max_nnz);
    const WeakSinnamonTransform ws{dim, half_width, mix64(seed ^ (t + 1)), false};
    const double estimate = ws_inner(ws.sketch_query(q), ws.sketch_doc(u));
    const double exact = dot(q, u);
    check.worst_gap = std::max(check.worst_gap, exact - estimate);
    if (estimate < exact - tolerance) ++check.violations;
  }
  return check;
}

namespace {

struct ErrorCdfCtx {
  double rate;       // S/m
  double exp_scale;  // value distribution scale
  double delta;
};

// exp(-(S/m) (1 - F(a + d))) f(a) for Exp(scale) values.
double error_cdf_integrand(double alpha, const void* opaque) {
  const auto* ctx = static_cast<const ErrorCdfCtx*>(opaque);
  const double shifted = alpha + ctx->delta;
  const double survival = shifted > 0.0 ? std::exp(-shifted / ctx->exp_scale) : 1.0;
  const double pdf = std::exp(-alpha / ctx->exp_scale) / ctx->exp_scale;
  return std::exp(-ctx->rate * survival) * pdf;
}

}  // namespace

CdfComparison validate_extrema_error_cdf(std::uint32_t dim, double p_active, double exp_scale,
                                         std::uint32_t half_width, std::size_t trials,
                                         std::span<const double> grid, std::uint64_t seed,
                                         double error_scale) {
  if (dim < 2) throw std::invalid_argument("cdf check: need dim >= 2");
  Rng doc_rng(mix64(seed ^ 0xcdfcdfULL));
  constexpr double kEmpty = -std::numeric_limits<double>::infinity();

  std::vector<double> errors;
  errors.reserve(trials);
  const std::uint32_t target = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const SparseVector x = random_model_doc(dim, p_active, exp_scale, doc_rng);
    const WeakSinnamonTransform ws{dim, half_width, mix64(seed ^ (t + 1)), false};
    const BoundPairSketch sk = ws.sketch_doc(x);
    const std::uint32_t c = ws.cell(target);
    double xi = 0.0;
    const auto it = std::lower_bound(x.indices.begin(), x.indices.end(), target);
    if (it != x.indices.end() && *it == target)
      xi = static_cast<double>(x.values[it - x.indices.begin()]);
    if (!sk.upper_set[c]) {
      errors.push_back(kEmpty);  // vacuous maximum: below every threshold
    } else {
      errors.push_back((static_cast<double>(sk.upper[c]) - xi) * error_scale);
    }
  }
  std::sort(errors.begin(), errors.end());

  CdfComparison cmp;
  cmp.grid.assign(grid.begin(), grid.end());
  const double s_rate = (static_cast<double>(dim) - 1.0) * p_active / half_width;
  for (double delta : grid) {
    const auto upto = std::upper_bound(errors.begin(), errors.end(), delta);
    const double empirical =
        static_cast<double>(upto - errors.begin()) / static_cast<double>(trials);
    // Inactive target: every colliding value must stay at or below delta.
    const double survival_d = delta >= 0.0 ? std::exp(-delta / exp_scale) : 1.0;
    const double inactive = std::exp(-s_rate * survival_d);
    // Active target: condition on its own value alpha.
    ErrorCdfCtx ctx{s_rate, exp_scale, delta};
    const double alpha_max = exp_scale * std::log(1e9);
    const double active = integrate(error_cdf_integrand, &ctx, 0.0, alpha_max, 1e-6);
    const double expected = (1.0 - p_active) * inactive + p_active * active;
    cmp.empirical.push_back(empirical);
    cmp.expected.push_back(expected);
    cmp.max_gap = std::max(cmp.max_gap, std::abs(empirical - expected));
  }
  return cmp;
}

}  // namespace seismic
