// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
//
// Monte-Carlo validation of the estimator guarantees the sketches are built
// on. Each check is two-sided by construction: the `variance_scale` /
// `error_scale` knobs exist so tests can verify that a deliberately
// corrupted estimator fails the same check that the honest one passes.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seismic/vectors.hpp"

namespace seismic {

struct MomentCheck {
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double expected_mean = 0.0;
  double expected_var = 0.0;
  double mean_z = 0.0;       // |mean error| in empirical standard errors
  double var_rel_err = 0.0;  // |var error| relative to the expected variance

  bool mean_ok(double z_limit = 4.0) const { return mean_z <= z_limit; }
  bool var_ok(double rel_tol = 0.10) const { return var_rel_err <= rel_tol; }
  bool ok() const { return mean_ok() && var_ok(); }
};

// Fixed-pair moments of the sign-projection estimate <phi(u), phi(v)> over
// fresh projection seeds. Expected mean is <u, v>; expected variance is
//   (1/n) (|u|^2 |v|^2 + <u,v>^2 - 2 sum_i u_i^2 v_i^2).
MomentCheck validate_sign_sketch_moments(const SparseVector& u, const SparseVector& v,
                                         std::uint32_t sketch_dim, std::size_t trials,
                                         std::uint64_t seed, double variance_scale = 1.0);

// Fixed query against random documents whose coordinates are independently
// active with probability p_active and take Exp(exp_scale) values. The mean
// of the estimate is checked against mu * sum_i p_i q_i. The variance formula
// describes the sketching error alone (the expectation over documents of the
// conditional variance), so the empirical side measures the residual
// Z - <q, X>, which is mean-zero with exactly that variance.
MomentCheck validate_sign_sketch_random_docs(const SparseVector& q, double p_active,
                                             double exp_scale, std::uint32_t sketch_dim,
                                             std::size_t trials, std::uint64_t seed,
                                             double variance_scale = 1.0);

struct BoundCheck {
  std::size_t trials = 0;
  std::size_t violations = 0;  // exact dot exceeded the sketch estimate
  double worst_gap = 0.0;      // max over trials of (exact - estimate)
  bool ok() const { return violations == 0; }
};

// Never-underestimate property of the extrema-sketch score: for random
// mixed-sign pairs with independent supports, ws_inner(q, u) >= <q, u> up to
// the stated float-reassociation tolerance.
BoundCheck validate_ws_upper_bound(std::uint32_t dim, std::uint32_t half_width,
                                   std::size_t trials, std::uint64_t seed,
                                   double tolerance = 1e-9);

struct CdfComparison {
  std::vector<double> grid;
  std::vector<double> empirical;
  std::vector<double> expected;
  double max_gap = 0.0;  // max |empirical - expected| over the grid

  bool ok(double gap_limit = 0.03) const { return max_gap <= gap_limit; }
};

// Distribution of the per-coordinate overestimation error Xbar_{pi(i)} - X_i
// of the extrema sketch under the random-document model (activation
// probability p_active, Exp(exp_scale) values). The empirical CDF over
// `trials` fresh documents and mappings is compared on `grid` against
//   (1-p) exp(-(S/m)(1-F(d))) + p Int_0^inf exp(-(S/m)(1-F(a+d))) f(a) da,
// S = (N-1) p_active, F/f the value CDF/pdf; the integral is evaluated with
// adaptive Simpson quadrature to 1e-6 absolute. A cell left empty counts as
// error -infinity (below every grid point), matching the vacuous maximum the
// formula assigns it. `error_scale` multiplies the finite empirical errors.
CdfComparison validate_extrema_error_cdf(std::uint32_t dim, double p_active, double exp_scale,
                                         std::uint32_t half_width, std::size_t trials,
                                         std::span<const double> grid, std::uint64_t seed,
                                         double error_scale = 1.0);

// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
double integrate(double (*f)(double, const void*), const void* ctx, double a, double b,
                 double tol);

}  // namespace seismic
