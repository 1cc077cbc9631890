#include "discount/types.hpp"

#include <algorithm>
#include <cmath>

namespace discount {

namespace {

std::vector<std::string> default_names(Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

}  // namespace

EmpiricalSample::EmpiricalSample(Matrix pts)
    : points(std::move(pts)),
      feature_names(default_names(points.cols())),
      one_hot_group(static_cast<std::size_t>(points.cols()), -1) {}

EmpiricalSample::EmpiricalSample(Matrix pts, std::vector<std::string> names,
                                 std::vector<int> groups)
    : points(std::move(pts)),
      feature_names(std::move(names)),
      one_hot_group(std::move(groups)) {}

void EmpiricalSample::validate() const {
  if (points.rows() < 1 || points.cols() < 1) {
    throw std::invalid_argument("empirical sample must be at least 1x1");
  }
  if (!points.allFinite()) {
    throw std::invalid_argument("empirical sample contains non-finite values");
  }
  const auto d = static_cast<std::size_t>(points.cols());
  if (feature_names.size() != d || one_hot_group.size() != d) {
    throw std::invalid_argument("feature metadata size does not match dimension");
  }
}

void ProjectionSet::validate() const {
  if (directions.rows() < 1 || directions.cols() < 1) {
    throw std::invalid_argument("projection set must be at least 1x1");
  }
  for (Index k = 0; k < directions.rows(); ++k) {
    if (std::abs(directions.row(k).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("projection direction is not unit norm");
    }
  }
}

bool TransportPlan::is_valid(double tol) const {
  const Index n = weights.rows();
  const Index m = weights.cols();
  if (n < 1 || m < 1) return false;
  if ((weights.array() < -tol).any()) return false;
  const Vector row_sums = weights.rowwise().sum();
  const Vector col_sums = weights.colwise().sum();
  return (row_sums.array() - 1.0 / static_cast<double>(n)).abs().maxCoeff() <=
             tol &&
         (col_sums.array() - 1.0 / static_cast<double>(m)).abs().maxCoeff() <=
             tol;
}

void TransportPlan::validate(double tol) const {
  if (!is_valid(tol)) {
    throw std::invalid_argument("transport plan violates uniform marginals");
  }
}

QuantileView::QuantileView(const Vector& sample) {
  if (sample.size() < 1) {
    throw std::invalid_argument("quantile view over an empty sample");
  }
  sorted_values.assign(sample.data(), sample.data() + sample.size());
  std::sort(sorted_values.begin(), sorted_values.end());
}

double QuantileView::operator()(double u) const {
  const auto n = static_cast<Index>(sorted_values.size());
  auto idx = static_cast<Index>(std::ceil(u * static_cast<double>(n)));
  idx = std::clamp<Index>(idx, 1, n);
  return sorted_values[static_cast<std::size_t>(idx - 1)];
}

Vector resample_quantiles(const Vector& sample, Index n) {
  if (sample.size() < 1 || n < 1) {
    throw std::invalid_argument("resample_quantiles needs nonempty input");
  }
  std::vector<double> sorted(sample.data(), sample.data() + sample.size());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());

  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    // Position within the plotting grid (j - 0.5) / m, linear in between.
    const double pos = u * m - 0.5;
    if (pos <= 0.0) {
      out[i] = sorted.front();
    } else if (pos >= m - 1.0) {
      out[i] = sorted.back();
    } else {
      const auto j = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(j);
      out[i] = sorted[j] * (1.0 - frac) + sorted[j + 1] * frac;
    }
  }
  return out;
}

}  // namespace discount
