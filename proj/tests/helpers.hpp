#pragma once

#include "discount/model.hpp"
#include "discount/ot.hpp"
#include "discount/rng.hpp"
#include "discount/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace discount::testing {

inline Vector random_sample(Rng& rng, Index n, double shift = 0.0,
                            double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = shift + scale * rng.normal();
  return v;
}

inline EmpiricalSample random_points(Rng& rng, Index n, Index d,
                                     double shift = 0.0, double scale = 1.0) {
  Matrix pts(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) pts(i, j) = shift + scale * rng.normal();
  }
  return EmpiricalSample(std::move(pts));
}

/// Convex objective evaluated with frozen plans, used by gradient checks.
inline double q_eta(const EmpiricalSample& x, const EmpiricalSample& x_prime,
                    const ProjectionSet& theta,
                    const std::vector<TransportPlan>& mu, const Vector& target,
                    const TransportPlan& nu, const Model& model, double eta) {
  double value = 0.0;
  if (eta < 1.0) value += (1.0 - eta) * q_x(x, x_prime, theta, mu);
  if (eta > 0.0) value += eta * q_y(x, target, model, nu);
  return value;
}

/// Central finite differences of q_eta over all coordinates of x.
inline Matrix fd_grad_q(const EmpiricalSample& x, const EmpiricalSample& x_prime,
                        const ProjectionSet& theta,
                        const std::vector<TransportPlan>& mu,
                        const Vector& target, const TransportPlan& nu,
                        const Model& model, double eta, double h = 1e-5) {
  Matrix grad(x.size(), x.dim());
  EmpiricalSample probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    for (Index j = 0; j < x.dim(); ++j) {
      probe.points(i, j) = x.points(i, j) + h;
      const double up = q_eta(probe, x_prime, theta, mu, target, nu, model, eta);
      probe.points(i, j) = x.points(i, j) - h;
      const double down =
          q_eta(probe, x_prime, theta, mu, target, nu, model, eta);
      probe.points(i, j) = x.points(i, j);
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
  const double denom = std::max(a.norm(), 1e-12);
  return (a - b).norm() / denom;
}

/// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("discount_test_" + tag + "_" + std::to_string(::getpid()) +
                    "_" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace discount::testing
