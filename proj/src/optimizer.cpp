#include "discount/optimizer.hpp"

#include "discount/rng.hpp"

#include <algorithm>
#include <cmath>

namespace discount {

void EtaIntervalSchedule::validate() const {
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) {
    throw std::invalid_argument("eta interval must satisfy 0 <= l <= r <= 1");
  }
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw std::invalid_argument("kappa must lie in (0, 1)");
  }
}

void EtaDiscreteSchedule::validate() const {
  if (candidates.empty()) {
    throw std::invalid_argument("eta candidate set must be nonempty");
  }
  for (double v : candidates) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("eta candidates must lie in [0, 1]");
    }
  }
}

double eta_balance(double gap_x, double gap_y) {
  const bool x_violated = gap_x < 0.0;
  const bool y_violated = gap_y < 0.0;
  if (x_violated != y_violated) {
    return y_violated ? 1.0 : 0.0;
  }
  if (x_violated && y_violated) {
    return gap_y / (gap_x + gap_y);
  }
  if (gap_x == 0.0 && gap_y == 0.0) return 0.5;
  return gap_x / (gap_x + gap_y);
}

std::pair<double, EtaIntervalSchedule> interval_narrowing_step(
    const EtaIntervalSchedule& state, double sw2_ucl, double w2_ucl,
    double u_x, double u_y) {
  state.validate();
  const double raw = eta_balance(u_x - sw2_ucl, u_y - w2_ucl);
  EtaIntervalSchedule next = state;
  if (raw > (state.lo + state.hi) / 2.0) {
    next.lo = state.lo + state.kappa * (state.hi - state.lo);
  } else {
    next.hi = state.hi - state.kappa * (state.hi - state.lo);
  }
  const double eta = std::clamp(raw, next.lo, next.hi);
  return {eta, next};
}

std::pair<double, EtaDiscreteSchedule> set_shrinking_step(
    const EtaDiscreteSchedule& state, double sw2_ucl, double w2_ucl,
    double u_x, double u_y) {
  state.validate();
  const double raw = eta_balance(u_x - sw2_ucl, u_y - w2_ucl);

  std::size_t best = 0;
  for (std::size_t i = 1; i < state.candidates.size(); ++i) {
    const double cur = std::abs(state.candidates[i] - raw);
    const double best_dist = std::abs(state.candidates[best] - raw);
    if (cur < best_dist ||
        (cur == best_dist && state.candidates[i] < state.candidates[best])) {
      best = i;
    }
  }
  const double eta = state.candidates[best];
  EtaDiscreteSchedule next = state;
  if (next.candidates.size() > 1) {
    next.candidates.erase(next.candidates.begin() +
                          static_cast<std::ptrdiff_t>(best));
  }
  return {eta, next};
}

Box Box::around(const Matrix& pts, double inflate) {
  Box box;
  box.lo = pts.colwise().minCoeff();
  box.hi = pts.colwise().maxCoeff();
  const Vector range = box.hi - box.lo;
  box.lo -= inflate * range;
  box.hi += inflate * range;
  return box;
}

void Box::validate(Index dim) const {
  if (lo.size() != dim || hi.size() != dim) {
    throw std::invalid_argument("box bounds must match the feature dimension");
  }
  if ((lo.array() > hi.array()).any()) {
    throw std::invalid_argument("box lower bounds exceed upper bounds");
  }
}

Matrix grad_q(const EmpiricalSample& x, const EmpiricalSample& x_prime,
              const ProjectionSet& theta, const std::vector<TransportPlan>& mu,
              const Vector& y_target, const TransportPlan& nu,
              const Model& model, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("eta must lie in [0, 1]");
  }
  const Index n = x.size();
  const Index d = x.dim();
  Matrix grad = Matrix::Zero(n, d);

  if (eta < 1.0) {
    if (static_cast<Index>(mu.size()) != theta.count()) {
      throw std::invalid_argument("grad_q needs one plan per projection");
    }
    for (Index k = 0; k < theta.count(); ++k) {
      const TransportPlan& plan = mu[static_cast<std::size_t>(k)];
      const Vector p = x.points * theta.directions.row(k).transpose();
      const Vector q = x_prime.points * theta.directions.row(k).transpose();
      // s_i = sum_j (p_i - q_j) mu_ij, accumulated as rank-one updates.
      const Vector row_mass = plan.weights.rowwise().sum();
      const Vector s = p.cwiseProduct(row_mass) - plan.weights * q;
      grad.noalias() += s * theta.directions.row(k);
    }
    grad *= (1.0 - eta) * 2.0 / static_cast<double>(theta.count());
  }

  if (eta > 0.0) {
    const Vector outputs = model.predict(x.points);
    const Matrix model_grad = model.input_gradient(x.points);
    const Vector row_mass = nu.weights.rowwise().sum();
    const Vector s =
        outputs.cwiseProduct(row_mass) - nu.weights * y_target;
    grad.noalias() +=
        (2.0 * eta) * (model_grad.array().colwise() * s.array()).matrix();
  }
  return grad;
}

Matrix retract(const Matrix& x, const Matrix& step, const Box& box) {
  box.validate(x.cols());
  Matrix next = x + step;
  for (Index j = 0; j < next.cols(); ++j) {
    next.col(j) = next.col(j).cwiseMax(box.lo[j]).cwiseMin(box.hi[j]);
  }
  return next;
}

void DiscountConfig::validate() const {
  if (!(u_x >= 0.0 && u_y >= 0.0)) {
    throw std::invalid_argument("distance bounds must be nonnegative");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(init_noise_std >= 0.0)) {
    throw std::invalid_argument("init noise std must be nonnegative");
  }
  std::visit([](const auto& schedule) { schedule.validate(); }, eta_schedule);
  ucl.validate();
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Feasible:
      return "feasible";
    case RunStatus::Infeasible:
      return "infeasible";
    case RunStatus::Aborted:
      return "aborted";
  }
  return "unknown";
}

namespace {

std::vector<TransportPlan> solve_mu(const EmpiricalSample& x,
                                    const EmpiricalSample& factual,
                                    const ProjectionSet& theta) {
  std::vector<TransportPlan> plans;
  plans.reserve(static_cast<std::size_t>(theta.count()));
  for (Index k = 0; k < theta.count(); ++k) {
    const Vector p = x.points * theta.directions.row(k).transpose();
    const Vector q = factual.points * theta.directions.row(k).transpose();
    plans.push_back(monotone_plan(p, q));
  }
  return plans;
}

}  // namespace

DiscountResult discount_run(const EmpiricalSample& factual,
                            const Vector& y_target, const Model& model,
                            const ProjectionSet& theta,
                            const DiscountConfig& cfg) {
  factual.validate();
  theta.validate();
  cfg.validate();
  if (factual.dim() != theta.dim()) {
    throw std::invalid_argument("projection set does not match feature count");
  }
  if (factual.dim() != model.input_dim()) {
    throw std::invalid_argument("model does not match feature count");
  }
  if (y_target.size() < 1) {
    throw std::invalid_argument("target sample must be nonempty");
  }

  const Index n = factual.size();
  const Vector target =
      (y_target.size() == n) ? y_target : resample_quantiles(y_target, n);

  const Box box = cfg.box ? *cfg.box : Box::around(factual.points);
  box.validate(factual.dim());

  Rng rng(cfg.seed);
  EmpiricalSample current = factual;
  if (cfg.init_noise_std > 0.0) {
    current.points += cfg.init_noise_std * rng.normal_matrix(n, factual.dim());
  }
  current.points = retract(current.points, Matrix::Zero(n, factual.dim()), box);

  const BandSpec band(cfg.alpha, n);
  EtaSchedule schedule = cfg.eta_schedule;

  DiscountResult result;
  result.trace.reserve(static_cast<std::size_t>(cfg.max_iters));

  std::vector<TransportPlan> mu;
  TransportPlan nu;
  auto evaluate_ucls = [&](const EmpiricalSample& x, const Vector& outputs) {
    return std::pair<double, double>{
        ucl_sw2(x, factual, theta, band, cfg.ucl),
        ucl_w2(outputs, target, band, cfg.ucl)};
  };

  try {
    for (int t = 0; t < cfg.max_iters; ++t) {
      mu = solve_mu(current, factual, theta);
      const Vector outputs = model.predict(current.points);
      nu = monotone_plan(outputs, target);

      const auto [sw2_bar, w2_bar] = evaluate_ucls(current, outputs);

      double eta = 0.0;
      if (auto* interval = std::get_if<EtaIntervalSchedule>(&schedule)) {
        auto [value, next] =
            interval_narrowing_step(*interval, sw2_bar, w2_bar, cfg.u_x, cfg.u_y);
        eta = value;
        *interval = next;
      } else {
        auto& discrete = std::get<EtaDiscreteSchedule>(schedule);
        auto [value, next] =
            set_shrinking_step(discrete, sw2_bar, w2_bar, cfg.u_x, cfg.u_y);
        eta = value;
        discrete = next;
      }

      const Matrix gradient =
          grad_q(current, factual, theta, mu, target, nu, model, eta);
      if (!gradient.allFinite()) {
        result.status = RunStatus::Aborted;
        result.abort_reason = "non-finite gradient at iteration " +
                              std::to_string(t);
        result.counterfactual = current;
        return result;
      }

      const double q_value =
          (1.0 - eta) * q_x(current, factual, theta, mu) +
          eta * q_y_outputs(outputs, target, nu);

      const Matrix next_points =
          retract(current.points, -cfg.tau * gradient, box);
      const double step_norm = (next_points - current.points).norm();

      result.trace.push_back(IterationRecord{t, sw2_bar, w2_bar, eta,
                                             gradient.norm(), q_value,
                                             step_norm});
      current.points = next_points;
      if (step_norm <= cfg.epsilon) break;
    }

    // Final feasibility check on the returned iterate.
    mu = solve_mu(current, factual, theta);
    const Vector outputs = model.predict(current.points);
    nu = monotone_plan(outputs, target);
    const auto [sw2_bar, w2_bar] = evaluate_ucls(current, outputs);
    result.final_ucl_sw2 = sw2_bar;
    result.final_ucl_w2 = w2_bar;
    result.final_mu = std::move(mu);
    result.final_nu = std::move(nu);
    result.counterfactual = current;
    result.status = (sw2_bar <= cfg.u_x && w2_bar <= cfg.u_y)
                        ? RunStatus::Feasible
                        : RunStatus::Infeasible;
  } catch (const DiscountError& e) {
    result.status = RunStatus::Aborted;
    result.abort_reason = e.what();
    result.counterfactual = current;
  }
  return result;
}

}  // namespace discount
