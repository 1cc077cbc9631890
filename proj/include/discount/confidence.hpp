#pragma once

#include "discount/types.hpp"

#include <utility>

namespace discount {

/// Uniform quantile confidence band derived from the DKW inequality.
/// beta = sqrt(log(4 / per_test_alpha) / (2 n)); the band
/// [F_n^{-1}(u - beta), F_n^{-1}(u + beta)] covers F^{-1}(u) uniformly with
/// probability at least 1 - per_test_alpha / 2. Bonferroni division across
/// several simultaneous bands is expressed through per_test_alpha = alpha / m.
struct BandSpec {
  double alpha = 0.1;
  Index n = 0;
  double per_test_alpha = 0.1;
  double beta = 0.0;

  BandSpec(double alpha, Index n, Index bonferroni = 1);
};

/// Trimming and quadrature settings for the upper confidence limits.
/// squared_integrand selects D(u)^2 (consistent with squared-distance units)
/// over the plain D(u) integrand.
struct UclConfig {
  double delta = 0.05;
  int grid_size = 1000;
  bool squared_integrand = true;

  void validate() const;
};

/// Band edges at level u, clamped so that empirical quantiles stay defined:
/// (max(u - beta, 1/n), min(u + beta, 1)).
std::pair<double, double> band_edges(const BandSpec& spec, double u);

/// Cross-band quantile gap
/// D(u) = max{ F_y^{-1}(q_hi) - F_y*^{-1}(q_lo), F_y*^{-1}(q_hi) - F_y^{-1}(q_lo) },
/// a deterministic upper bound on |F_y^{-1}(u) - F_y*^{-1}(u)|.
double d_u(const QuantileView& y, const QuantileView& y_star,
           const BandSpec& spec, double u);

/// Upper confidence limit for the squared 1-D Wasserstein distance between
/// the samples underlying y and y_star: the trimmed midpoint-rule integral
/// of D(u)^2 over (delta, 1 - delta), scaled by 1/(1 - 2 delta).
double ucl_w2(const Vector& y, const Vector& y_star, const BandSpec& spec,
              const UclConfig& cfg);

/// Upper confidence limit for the sliced squared Wasserstein distance:
/// per-projection trimmed integrals with Bonferroni-corrected bands
/// (per-test level alpha / N), averaged over the projection set.
double ucl_sw2(const EmpiricalSample& x, const EmpiricalSample& x_prime,
               const ProjectionSet& theta, const BandSpec& spec,
               const UclConfig& cfg);

}  // namespace discount
