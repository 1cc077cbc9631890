#include "discount/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace discount {

double coverage(const Vector& y, double threshold) {
  if (y.size() < 1) throw std::invalid_argument("coverage of an empty sample");
  Index hits = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if (!(y[i] >= 0.0 && y[i] <= 1.0)) {
      throw std::invalid_argument("coverage expects predictions in [0, 1]");
    }
    if (y[i] >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

namespace {

double median_pooled_distance(const Matrix& x, const Matrix& x_prime) {
  const Index n = x.rows();
  const Index m = x_prime.rows();
  Matrix pooled(n + m, x.cols());
  pooled.topRows(n) = x;
  pooled.bottomRows(m) = x_prime;

  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>((n + m) * (n + m - 1) / 2));
  for (Index i = 0; i < pooled.rows(); ++i) {
    for (Index j = i + 1; j < pooled.rows(); ++j) {
      dists.push_back((pooled.row(i) - pooled.row(j)).norm());
    }
  }
  if (dists.empty()) return 0.0;
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2,
                   dists.end());
  return dists[dists.size() / 2];
}

double kernel_mean(const Matrix& a, const Matrix& b, double inv_two_h_sq) {
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) {
      total += std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv_two_h_sq);
    }
  }
  return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

}  // namespace

double mmd_sq(const Matrix& x, const Matrix& x_prime,
              std::optional<double> bandwidth) {
  if (x.rows() < 1 || x_prime.rows() < 1) {
    throw std::invalid_argument("mmd_sq requires nonempty samples");
  }
  if (x.cols() != x_prime.cols()) {
    throw std::invalid_argument("mmd_sq dimension mismatch");
  }
  double h = 0.0;
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) {
      throw std::invalid_argument("mmd bandwidth must be positive");
    }
    h = *bandwidth;
  } else {
    h = median_pooled_distance(x, x_prime);
    if (h <= 0.0) return 0.0;  // all points identical across both samples
  }
  const double inv_two_h_sq = 1.0 / (2.0 * h * h);
  return kernel_mean(x, x, inv_two_h_sq) +
         kernel_mean(x_prime, x_prime, inv_two_h_sq) -
         2.0 * kernel_mean(x, x_prime, inv_two_h_sq);
}

double diversity(const Matrix& x) {
  const Index n = x.rows();
  if (n < 1) throw std::invalid_argument("diversity of an empty sample");
  if (n == 1) return 0.0;
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      total += (x.row(i) - x.row(j)).norm();
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double dpc(double diversity_score, double ot_proximity, double coverage_score) {
  if (!(ot_proximity > 0.0)) {
    throw UndefinedScore("dpc undefined for nonpositive transport proximity");
  }
  return diversity_score / ot_proximity * coverage_score;
}

std::map<double, double> percentile_diffs(const Matrix& factual,
                                          const Matrix& counterfactual,
                                          const std::vector<double>& levels,
                                          double eps_floor) {
  if (factual.cols() != counterfactual.cols()) {
    throw std::invalid_argument("percentile_diffs feature mismatch");
  }
  if (factual.rows() < 1 || counterfactual.rows() < 1) {
    throw std::invalid_argument("percentile_diffs requires nonempty samples");
  }
  const Index d = factual.cols();
  std::vector<QuantileView> fact_views;
  std::vector<QuantileView> cf_views;
  fact_views.reserve(static_cast<std::size_t>(d));
  cf_views.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    fact_views.emplace_back(Vector(factual.col(j)));
    cf_views.emplace_back(Vector(counterfactual.col(j)));
  }

  std::map<double, double> result;
  for (double level : levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw std::invalid_argument("percentile levels must lie in (0, 1)");
    }
    double acc = 0.0;
    for (Index j = 0; j < d; ++j) {
      const double base = fact_views[static_cast<std::size_t>(j)](level);
      const double moved = cf_views[static_cast<std::size_t>(j)](level);
      acc += std::abs(moved - base) / std::max(std::abs(base), eps_floor);
    }
    result[level] = acc / static_cast<double>(d);
  }
  return result;
}

}  // namespace discount
