#include "discount/confidence.hpp"

#include <algorithm>
#include <cmath>

namespace discount {

BandSpec::BandSpec(double alpha, Index n, Index bonferroni) : alpha(alpha), n(n) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (n < 1) throw std::invalid_argument("band needs a positive sample size");
  if (bonferroni < 1) throw std::invalid_argument("bonferroni count must be >= 1");
  per_test_alpha = alpha / static_cast<double>(bonferroni);
  beta = std::sqrt(std::log(4.0 / per_test_alpha) /
                   (2.0 * static_cast<double>(n)));
}

void UclConfig::validate() const {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::invalid_argument("trimming constant must lie in (0, 0.5)");
  }
  if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
}

std::pair<double, double> band_edges(const BandSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("quantile level must lie in (0, 1)");
  }
  const double lo = std::max(u - spec.beta, 1.0 / static_cast<double>(spec.n));
  const double hi = std::min(u + spec.beta, 1.0);
  return {lo, hi};
}

double d_u(const QuantileView& y, const QuantileView& y_star,
           const BandSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("quantile level must lie in (0, 1)");
  }
  // The lower edge floors at each view's own 1/n: evaluating the ceil-rule
  // quantile at any level <= 1/n already returns the first order statistic.
  const double hi = std::min(u + spec.beta, 1.0);
  const double lo = u - spec.beta;
  const double first = y(hi) - y_star(lo);
  const double second = y_star(hi) - y(lo);
  return std::max(first, second);
}

namespace {

double trimmed_integral(const QuantileView& y, const QuantileView& y_star,
                        const BandSpec& spec, const UclConfig& cfg) {
  const auto grid = static_cast<double>(cfg.grid_size);
  double acc = 0.0;
  for (int i = 0; i < cfg.grid_size; ++i) {
    const double u =
        cfg.delta + (static_cast<double>(i) + 0.5) * (1.0 - 2.0 * cfg.delta) / grid;
    const double gap = d_u(y, y_star, spec, u);
    acc += cfg.squared_integrand ? gap * gap : gap;
  }
  // Midpoint rule times 1/(1-2*delta): the trim width cancels.
  return acc / grid;
}

}  // namespace

double ucl_w2(const Vector& y, const Vector& y_star, const BandSpec& spec,
              const UclConfig& cfg) {
  cfg.validate();
  const QuantileView view_y(y);
  const QuantileView view_star(y_star);
  return trimmed_integral(view_y, view_star, spec, cfg);
}

double ucl_sw2(const EmpiricalSample& x, const EmpiricalSample& x_prime,
               const ProjectionSet& theta, const BandSpec& spec,
               const UclConfig& cfg) {
  cfg.validate();
  if (x.dim() != x_prime.dim() || x.dim() != theta.dim()) {
    throw std::invalid_argument("ucl_sw2 dimension mismatch");
  }
  const Index count = theta.count();
  const BandSpec per_projection(spec.alpha, spec.n, count);
  double total = 0.0;
  for (Index k = 0; k < count; ++k) {
    const QuantileView proj_x(x.points * theta.directions.row(k).transpose());
    const QuantileView proj_xp(
        x_prime.points * theta.directions.row(k).transpose());
    total += trimmed_integral(proj_x, proj_xp, per_projection, cfg);
  }
  return total / static_cast<double>(count);
}

}  // namespace discount
