#include "discount/ot.hpp"

#include "discount/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace discount {

namespace {

std::vector<Index> sorted_order(const Vector& v) {
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return v[a] < v[b]; });
  return order;
}

/// Min-cost assignment on a square matrix (Kuhn-Munkres with potentials).
std::vector<int> hungarian(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> min_reduced(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_reduced[j]) {
          min_reduced[j] = cur;
          way[j] = j0;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

ProjectionSet sample_projections(Index d, Index count, std::uint64_t seed) {
  if (d < 1 || count < 1) {
    throw std::invalid_argument("sample_projections requires d >= 1, N >= 1");
  }
  Rng rng(seed);
  Matrix dirs(count, d);
  for (Index k = 0; k < count; ++k) {
    double norm = 0.0;
    do {
      for (Index j = 0; j < d; ++j) dirs(k, j) = rng.normal();
      norm = dirs.row(k).norm();
    } while (norm < 1e-12);
    dirs.row(k) /= norm;
  }
  return ProjectionSet{std::move(dirs), seed};
}

double wasserstein1d_sq(const Vector& a, const Vector& b) {
  const Index n = a.size();
  const Index m = b.size();
  if (n < 1 || m < 1) {
    throw std::invalid_argument("wasserstein1d_sq requires nonempty samples");
  }
  std::vector<double> as(a.data(), a.data() + n);
  std::vector<double> bs(b.data(), b.data() + m);
  std::sort(as.begin(), as.end());
  std::sort(bs.begin(), bs.end());

  // Walk the merged quantile breakpoints; mass is tracked in units of
  // 1/(n*m) so segment boundaries compare exactly.
  const auto total = static_cast<long long>(n) * static_cast<long long>(m);
  long long bottom = 0;
  Index i = 0;
  Index j = 0;
  double cost = 0.0;
  while (i < n && j < m) {
    const long long top_a = static_cast<long long>(i + 1) * m;
    const long long top_b = static_cast<long long>(j + 1) * n;
    const long long top = std::min(top_a, top_b);
    const double diff = as[static_cast<std::size_t>(i)] -
                        bs[static_cast<std::size_t>(j)];
    cost += diff * diff * static_cast<double>(top - bottom) /
            static_cast<double>(total);
    bottom = top;
    if (top_a == top) ++i;
    if (top_b == top) ++j;
  }
  return cost;
}

double sliced_wasserstein_sq(const EmpiricalSample& x,
                             const EmpiricalSample& x_prime,
                             const ProjectionSet& theta) {
  if (x.dim() != x_prime.dim() || x.dim() != theta.dim()) {
    throw std::invalid_argument("sliced_wasserstein_sq dimension mismatch");
  }
  const Index count = theta.count();
  double total = 0.0;
  for (Index k = 0; k < count; ++k) {
    const Vector p = x.points * theta.directions.row(k).transpose();
    const Vector q = x_prime.points * theta.directions.row(k).transpose();
    total += wasserstein1d_sq(p, q);
  }
  return total / static_cast<double>(count);
}

TransportPlan monotone_plan(const Vector& a, const Vector& b) {
  const Index n = a.size();
  const Index m = b.size();
  if (n < 1 || m < 1) {
    throw std::invalid_argument("monotone_plan requires nonempty samples");
  }
  const auto order_a = sorted_order(a);
  const auto order_b = sorted_order(b);

  Matrix weights = Matrix::Zero(n, m);
  const auto total = static_cast<long long>(n) * static_cast<long long>(m);
  long long bottom = 0;
  Index i = 0;
  Index j = 0;
  while (i < n && j < m) {
    const long long top_a = static_cast<long long>(i + 1) * m;
    const long long top_b = static_cast<long long>(j + 1) * n;
    const long long top = std::min(top_a, top_b);
    weights(order_a[static_cast<std::size_t>(i)],
            order_b[static_cast<std::size_t>(j)]) +=
        static_cast<double>(top - bottom) / static_cast<double>(total);
    bottom = top;
    if (top_a == top) ++i;
    if (top_b == top) ++j;
  }
  return TransportPlan{std::move(weights)};
}

double q_x(const EmpiricalSample& x, const EmpiricalSample& x_prime,
           const ProjectionSet& theta,
           const std::vector<TransportPlan>& plans) {
  if (x.dim() != x_prime.dim() || x.dim() != theta.dim()) {
    throw std::invalid_argument("q_x dimension mismatch");
  }
  if (static_cast<Index>(plans.size()) != theta.count()) {
    throw std::invalid_argument("q_x needs one plan per projection");
  }
  const Index n = x.size();
  const Index m = x_prime.size();
  double total = 0.0;
  for (Index k = 0; k < theta.count(); ++k) {
    const TransportPlan& plan = plans[static_cast<std::size_t>(k)];
    if (plan.rows() != n || plan.cols() != m) {
      throw std::invalid_argument("q_x plan shape mismatch");
    }
    plan.validate();
    const Vector p = x.points * theta.directions.row(k).transpose();
    const Vector q = x_prime.points * theta.directions.row(k).transpose();
    double cost = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) {
        const double diff = p[i] - q[j];
        cost += diff * diff * plan.weights(i, j);
      }
    }
    total += cost;
  }
  return total / static_cast<double>(theta.count());
}

double q_y_outputs(const Vector& outputs, const Vector& y_target,
                   const TransportPlan& nu) {
  if (nu.rows() != outputs.size() || nu.cols() != y_target.size()) {
    throw std::invalid_argument("q_y plan shape mismatch");
  }
  nu.validate();
  double cost = 0.0;
  for (Index i = 0; i < outputs.size(); ++i) {
    for (Index j = 0; j < y_target.size(); ++j) {
      const double diff = outputs[i] - y_target[j];
      cost += diff * diff * nu.weights(i, j);
    }
  }
  return cost;
}

double q_y(const EmpiricalSample& x, const Vector& y_target, const Model& model,
           const TransportPlan& nu) {
  return q_y_outputs(model.predict(x.points), y_target, nu);
}

std::pair<double, TransportPlan> lp_ot_min_cost(const Matrix& cost) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  if (n < 1 || m < 1) {
    throw std::invalid_argument("lp_ot_min_cost requires nonempty cost");
  }
  if (n > 8 || m > 8) {
    throw std::invalid_argument("lp_ot_min_cost limited to 8x8 instances");
  }
  const Index expanded = std::lcm(n, m);
  const Index rep_a = expanded / n;
  const Index rep_b = expanded / m;

  Matrix big(expanded, expanded);
  for (Index bi = 0; bi < expanded; ++bi) {
    for (Index bj = 0; bj < expanded; ++bj) {
      big(bi, bj) = cost(bi / rep_a, bj / rep_b);
    }
  }
  const auto assignment = hungarian(big);

  Matrix weights = Matrix::Zero(n, m);
  double total = 0.0;
  for (Index bi = 0; bi < expanded; ++bi) {
    const Index bj = assignment[static_cast<std::size_t>(bi)];
    weights(bi / rep_a, bj / rep_b) += 1.0 / static_cast<double>(expanded);
    total += big(bi, bj) / static_cast<double>(expanded);
  }
  return {total, TransportPlan{std::move(weights)}};
}

std::pair<double, TransportPlan> lp_ot_oracle(const Vector& a,
                                              const Vector& b) {
  if (a.size() < 1 || b.size() < 1) {
    throw std::invalid_argument("lp_ot_oracle requires nonempty samples");
  }
  if (a.size() > 8 || b.size() > 8) {
    throw std::invalid_argument("lp_ot_oracle limited to 8-point samples");
  }
  Matrix cost(a.size(), b.size());
  for (Index i = 0; i < a.size(); ++i) {
    for (Index j = 0; j < b.size(); ++j) {
      const double diff = a[i] - b[j];
      cost(i, j) = diff * diff;
    }
  }
  return lp_ot_min_cost(cost);
}

}  // namespace discount
