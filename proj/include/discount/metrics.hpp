#pragma once

#include "discount/types.hpp"

#include <map>
#include <optional>
#include <vector>

namespace discount {

/// Fraction of predictions at or above the decision threshold. Entries must
/// lie in [0, 1].
double coverage(const Vector& y, double threshold = 0.5);

/// Squared maximum mean discrepancy between two samples under the Gaussian
/// kernel k(a,b) = exp(-|a-b|^2 / (2 h^2)): the three-term V-statistic.
/// With no explicit bandwidth the median pairwise distance over the pooled
/// sample is used; if that median is zero the discrepancy is 0.
double mmd_sq(const Matrix& x, const Matrix& x_prime,
              std::optional<double> bandwidth = std::nullopt);

/// Mean Euclidean distance over all unordered point pairs; 0 for n == 1.
double diversity(const Matrix& x);

/// Diversity normalized by transport proximity and weighted by coverage.
/// Throws UndefinedScore when ot_proximity is not positive.
double dpc(double diversity_score, double ot_proximity, double coverage_score);

/// Mean (over features) relative quantile change at each requested level:
/// |F_cf^{-1}(p) - F_fact^{-1}(p)| / max(|F_fact^{-1}(p)|, eps_floor).
std::map<double, double> percentile_diffs(const Matrix& factual,
                                          const Matrix& counterfactual,
                                          const std::vector<double>& levels,
                                          double eps_floor = 1e-6);

struct MetricReport {
  double coverage = 0.0;
  double ot_proximity = 0.0;
  double mmd = 0.0;
  double diversity = 0.0;
  std::optional<double> dpc;
  std::map<double, double> percentile_diffs;
};

}  // namespace discount
