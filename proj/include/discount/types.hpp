#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace discount {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for errors raised by this library.
struct DiscountError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingDiverged : DiscountError {
  using DiscountError::DiscountError;
};

/// Failure while talking to an out-of-process model. Carries the index of
/// the batch that was in flight when the failure happened.
struct ExternalModelError : DiscountError {
  ExternalModelError(const std::string& msg, Index batch)
      : DiscountError(msg + " (batch " + std::to_string(batch) + ")"),
        batch_index(batch) {}
  Index batch_index = -1;
};

struct UndefinedScore : DiscountError {
  using DiscountError::DiscountError;
};

/// An empirical distribution: n points in d feature dimensions.
///
/// Feature columns carry a name and a one-hot group id (-1 for plain numeric
/// columns; columns sharing a nonnegative id encode one categorical feature).
/// One-hot entries are treated as continuous in [0,1] while optimizing and
/// are only hard-decoded on export.
struct EmpiricalSample {
  Matrix points;                            // n x d
  std::vector<std::string> feature_names;   // size d
  std::vector<int> one_hot_group;           // size d, -1 = numeric

  EmpiricalSample() = default;
  explicit EmpiricalSample(Matrix pts);
  EmpiricalSample(Matrix pts, std::vector<std::string> names,
                  std::vector<int> groups);

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }

  /// Throws std::invalid_argument on empty data or non-finite entries.
  void validate() const;
};

/// A set of unit directions on the (d-1)-sphere together with the seed that
/// produced them; regeneration from the seed is bit-identical.
struct ProjectionSet {
  Matrix directions;  // N x d, rows unit-norm
  std::uint64_t seed = 0;

  Index count() const { return directions.rows(); }
  Index dim() const { return directions.cols(); }
  void validate() const;
};

/// A coupling between two uniform discrete distributions: entries are
/// nonnegative, rows sum to 1/n and columns to 1/m.
struct TransportPlan {
  Matrix weights;  // n x m

  Index rows() const { return weights.rows(); }
  Index cols() const { return weights.cols(); }

  bool is_valid(double tol = 1e-9) const;
  void validate(double tol = 1e-9) const;
};

/// Empirical quantile function over a sorted sample:
/// F^{-1}(u) = value of order statistic ceil(u*n), clamped to [1, n].
struct QuantileView {
  std::vector<double> sorted_values;

  QuantileView() = default;
  explicit QuantileView(const Vector& sample);

  Index size() const { return static_cast<Index>(sorted_values.size()); }
  double operator()(double u) const;
};

/// Linear-interpolation resampling of a 1-D sample to a new size. The
/// quantile function is interpolated between order statistics placed at the
/// plotting positions (j-0.5)/m and evaluated at (i-0.5)/n.
Vector resample_quantiles(const Vector& sample, Index n);

}  // namespace discount
