#include "discount/optimizer.hpp"

#include "discount/data.hpp"
#include "discount/rng.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace discount;
using discount::testing::fd_grad_q;
using discount::testing::random_points;
using discount::testing::random_sample;
using discount::testing::relative_error;

TEST_CASE("eta_balance: pinned branch values") {
  CHECK(eta_balance(-2.0, -1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(eta_balance(0.0, 0.0) == doctest::Approx(0.5));
  CHECK(eta_balance(0.4, -0.1) == doctest::Approx(1.0));
  CHECK(eta_balance(-0.4, 0.1) == doctest::Approx(0.0));
  CHECK(eta_balance(0.4, 0.1) == doctest::Approx(0.8));
  CHECK(eta_balance(0.0, -1.0) == doctest::Approx(1.0));
  CHECK(eta_balance(-1.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("eta_balance: always lands in [0, 1]") {
  Rng rng(61);
  for (int rep = 0; rep < 500; ++rep) {
    const double a = 4.0 * rng.normal();
    const double b = 4.0 * rng.normal();
    const double eta = eta_balance(a, b);
    CHECK(eta >= 0.0);
    CHECK(eta <= 1.0);
  }
}

TEST_CASE("interval narrowing: pinned traces") {
  // eta_raw = 0.8 via gaps (a, b) = (0.2, 0.05) -> a/(a+b) = 0.8.
  {
    const EtaIntervalSchedule state{0.0, 1.0, 0.1};
    const auto [eta, next] = interval_narrowing_step(state, 0.8, 0.95, 1.0, 1.0);
    CHECK(eta == doctest::Approx(0.8));
    CHECK(next.lo == doctest::Approx(0.1));
    CHECK(next.hi == doctest::Approx(1.0));
  }
  // eta_raw = 0.3 via gaps (0.3, 0.7).
  {
    const EtaIntervalSchedule state{0.0, 1.0, 0.1};
    const auto [eta, next] = interval_narrowing_step(state, 0.7, 0.3, 1.0, 1.0);
    CHECK(eta == doctest::Approx(0.3));
    CHECK(next.lo == doctest::Approx(0.0));
    CHECK(next.hi == doctest::Approx(0.9));
  }
  // eta_raw = 0.2 clamps to the interval floor 0.9.
  {
    const EtaIntervalSchedule state{0.9, 1.0, 0.1};
    const auto [eta, next] = interval_narrowing_step(state, 0.8, 0.2, 1.0, 1.0);
    CHECK(eta == doctest::Approx(0.9));
    CHECK(next.hi == doctest::Approx(0.99));
  }
}

TEST_CASE("interval narrowing: length contracts by exactly 1-kappa per step") {
  Rng rng(62);
  EtaIntervalSchedule state{0.0, 1.0, 0.07};
  double expected = 1.0;
  for (int t = 1; t <= 60; ++t) {
    const auto [eta, next] =
        interval_narrowing_step(state, rng.uniform(), rng.uniform(), 1.0, 1.0);
    state = next;
    expected *= (1.0 - state.kappa);
    CHECK(std::abs((state.hi - state.lo) - expected) < 1e-12);
    CHECK(eta >= state.lo - 1e-15);
    CHECK(eta <= state.hi + 1e-15);
  }
}

TEST_CASE("set shrinking: pinned traces") {
  // eta_raw = 0.55 via gaps (0.9, 1.1).
  {
    const EtaDiscreteSchedule state{{0.1, 0.5, 0.9}};
    const auto [eta, next] = set_shrinking_step(state, 0.1, -0.1, 1.0, 1.0);
    CHECK(eta == doctest::Approx(0.5));
    CHECK(next.candidates == std::vector<double>{0.1, 0.9});
  }
  // Singleton persists.
  {
    const EtaDiscreteSchedule state{{0.7}};
    const auto [eta, next] = set_shrinking_step(state, 0.5, 0.5, 1.0, 1.0);
    CHECK(eta == doctest::Approx(0.7));
    CHECK(next.candidates == std::vector<double>{0.7});
  }
  // eta_raw = 0.5 (equal gaps) ties between 0.25 and 0.75; lower value wins.
  {
    const EtaDiscreteSchedule state{{0.25, 0.75}};
    const auto [eta, next] = set_shrinking_step(state, 0.5, 0.5, 1.0, 1.0);
    CHECK(eta == doctest::Approx(0.25));
    CHECK(next.candidates == std::vector<double>{0.75});
  }
}

TEST_CASE("retract: identity, interior step, and clamping") {
  Matrix x(2, 2);
  x << 0.0, 0.5, -0.5, 0.2;
  const Box box{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)};

  CHECK(retract(x, Matrix::Zero(2, 2), box) == x);

  Matrix small_step = Matrix::Constant(2, 2, 0.1);
  CHECK(retract(x, small_step, box) == x + small_step);

  Matrix push = Matrix::Constant(2, 2, 5.0);
  const Matrix clamped = retract(x, push, box);
  CHECK(clamped.maxCoeff() == doctest::Approx(1.0));
  // Idempotent once inside the box.
  CHECK(retract(clamped, Matrix::Zero(2, 2), box) == clamped);
}

TEST_CASE("grad_q: endpoints skip the other objective") {
  Rng rng(63);
  const auto x = random_points(rng, 5, 3);
  const auto factual = random_points(rng, 5, 3, 0.4);
  const auto theta = sample_projections(3, 6, 17);
  std::vector<TransportPlan> mu;
  for (Index k = 0; k < theta.count(); ++k) {
    mu.push_back(monotone_plan(x.points * theta.directions.row(k).transpose(),
                               factual.points * theta.directions.row(k).transpose()));
  }
  const auto fitted = train(ModelSpec{"mlp", {6}, "tanh"},
                            factual.points, Vector::Constant(5, 0.5), 0, 0.1, 2);
  const Vector target = random_sample(rng, 5, 0.8, 0.1);
  const auto nu = monotone_plan(fitted.model->predict(x.points), target);

  const Matrix at_zero = grad_q(x, factual, theta, mu, target, nu, *fitted.model, 0.0);
  const Matrix at_one = grad_q(x, factual, theta, mu, target, nu, *fitted.model, 1.0);
  const Matrix mixed = grad_q(x, factual, theta, mu, target, nu, *fitted.model, 0.5);
  CHECK(relative_error(mixed, Matrix(0.5 * at_zero + 0.5 * at_one)) < 1e-12);
}

TEST_CASE("grad_q: matches finite differences of the frozen objective") {
  Rng rng(64);
  for (double eta : {0.0, 0.37, 1.0}) {
    const auto x = random_points(rng, 5, 3);
    const auto factual = random_points(rng, 5, 3, 0.5);
    const auto theta = sample_projections(3, 6, 700 + static_cast<int>(eta * 100));
    std::vector<TransportPlan> mu;
    for (Index k = 0; k < theta.count(); ++k) {
      mu.push_back(monotone_plan(
          x.points * theta.directions.row(k).transpose(),
          factual.points * theta.directions.row(k).transpose()));
    }
    const auto fitted = train(ModelSpec{"mlp", {5}, "tanh"},
                              factual.points, Vector::Constant(5, 0.5), 0, 0.1, 3);
    const Vector target = random_sample(rng, 5, 0.6, 0.2);
    const auto nu = monotone_plan(fitted.model->predict(x.points), target);

    const Matrix analytic =
        grad_q(x, factual, theta, mu, target, nu, *fitted.model, eta);
    const Matrix numeric =
        fd_grad_q(x, factual, theta, mu, target, nu, *fitted.model, eta);
    CHECK(relative_error(numeric, analytic) < 1e-5);
  }
}

namespace {

struct Task {
  EmpiricalSample factual;
  Vector target;
  ModelPtr model;
  ProjectionSet theta;
  Box box;
};

/// Class-0 cluster of a standardized separable blobs problem plus a trained
/// logistic; the box spans the full training domain.
Task make_task(Index n, std::uint64_t seed) {
  auto [sample, labels] = make_synthetic_blobs(2 * n + 40, 2, 4.0, seed);
  for (Index j = 0; j < sample.dim(); ++j) {
    const double mean = sample.points.col(j).mean();
    const double sd = std::sqrt(
        (sample.points.col(j).array() - mean).square().mean());
    sample.points.col(j) = (sample.points.col(j).array() - mean) / sd;
  }
  const auto fitted = train(ModelSpec{"logistic"}, sample.points, labels,
                            150, 0.5, seed + 1);
  Matrix factual_pts(n, 2);
  Index row = 0;
  for (Index i = 0; i < sample.size() && row < n; ++i) {
    if (labels[i] < 0.5) factual_pts.row(row++) = sample.points.row(i);
  }
  Task task{EmpiricalSample(factual_pts), Vector::Constant(n, 1.0),
            fitted.model, sample_projections(2, 10, seed + 2),
            Box::around(sample.points, 0.1)};
  return task;
}

}  // namespace

TEST_CASE("discount_run: impossible bounds are infeasible") {
  const Task task = make_task(30, 71);
  DiscountConfig cfg;
  cfg.u_x = 0.0;
  cfg.u_y = 0.0;
  cfg.max_iters = 40;
  cfg.seed = 5;
  const auto result =
      discount_run(task.factual, task.target, *task.model, task.theta, cfg);
  CHECK(result.status == RunStatus::Infeasible);
  CHECK(result.final_ucl_sw2 > 0.0);
  CHECK(result.final_ucl_w2 > 0.0);
  CHECK(!result.trace.empty());
}

TEST_CASE("discount_run: near-fixed-point with generous bounds stays close") {
  const Task task = make_task(40, 72);
  // Target equal to the current outputs: the factual is already optimal.
  const Vector outputs = task.model->predict(task.factual.points);
  DiscountConfig cfg;
  cfg.u_x = 5.0;
  cfg.u_y = 5.0;
  cfg.max_iters = 300;
  cfg.seed = 6;
  const auto result =
      discount_run(task.factual, outputs, *task.model, task.theta, cfg);
  CHECK(result.status == RunStatus::Feasible);
  const double drift = (result.counterfactual.points - task.factual.points)
                           .rowwise()
                           .norm()
                           .mean();
  CHECK(drift < 0.5);
}

TEST_CASE("discount_run: feasibility soundness against recomputed limits") {
  const Task task = make_task(100, 73);
  DiscountConfig cfg;
  cfg.u_x = 2.0;
  cfg.u_y = 0.5;
  cfg.max_iters = 4000;
  cfg.tau = 10.0;
  cfg.seed = 7;
  cfg.eta_schedule = EtaDiscreteSchedule{{0.95}};
  cfg.box = task.box;
  cfg.ucl.squared_integrand = false;
  const auto result =
      discount_run(task.factual, task.target, *task.model, task.theta, cfg);
  REQUIRE(result.status == RunStatus::Feasible);

  const BandSpec band(cfg.alpha, task.factual.size());
  const double sw2 = ucl_sw2(result.counterfactual, task.factual, task.theta,
                             band, cfg.ucl);
  const double w2 = ucl_w2(task.model->predict(result.counterfactual.points),
                           task.target, band, cfg.ucl);
  CHECK(std::abs(sw2 - result.final_ucl_sw2) < 1e-9);
  CHECK(std::abs(w2 - result.final_ucl_w2) < 1e-9);
  CHECK(sw2 <= cfg.u_x);
  CHECK(w2 <= cfg.u_y);
  for (const auto& plan : result.final_mu) plan.validate();
  result.final_nu.validate();
}

TEST_CASE("discount_run: identical seeds give bit-identical traces") {
  const Task task = make_task(25, 74);
  DiscountConfig cfg;
  cfg.u_x = 2.0;
  cfg.u_y = 0.5;
  cfg.max_iters = 60;
  cfg.seed = 11;
  const auto a =
      discount_run(task.factual, task.target, *task.model, task.theta, cfg);
  const auto b =
      discount_run(task.factual, task.target, *task.model, task.theta, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].ucl_sw2 == b.trace[i].ucl_sw2);
    CHECK(a.trace[i].ucl_w2 == b.trace[i].ucl_w2);
    CHECK(a.trace[i].eta == b.trace[i].eta);
    CHECK(a.trace[i].grad_norm == b.trace[i].grad_norm);
    CHECK(a.trace[i].q_value == b.trace[i].q_value);
    CHECK(a.trace[i].step_norm == b.trace[i].step_norm);
  }
  CHECK(a.counterfactual.points == b.counterfactual.points);
}

TEST_CASE("discount_run: fixed eta keeps the objective non-increasing") {
  const Task task = make_task(30, 75);
  DiscountConfig cfg;
  cfg.u_x = 2.0;
  cfg.u_y = 0.5;
  cfg.max_iters = 120;
  cfg.epsilon = 1e-12;
  cfg.seed = 12;
  cfg.eta_schedule = EtaDiscreteSchedule{{0.5}};

  double tau = cfg.tau;
  bool monotone = false;
  for (int attempt = 0; attempt < 8 && !monotone; ++attempt) {
    cfg.tau = tau;
    const auto result =
        discount_run(task.factual, task.target, *task.model, task.theta, cfg);
    monotone = true;
    for (std::size_t i = 1; i < result.trace.size(); ++i) {
      if (result.trace[i].q_value >
          result.trace[i - 1].q_value + 1e-9) {
        monotone = false;
        break;
      }
    }
    tau /= 2.0;
  }
  CHECK(monotone);
}

TEST_CASE("discount_run: discrete schedule draws eta from the candidate set") {
  const Task task = make_task(20, 76);
  DiscountConfig cfg;
  cfg.u_x = 2.0;
  cfg.u_y = 0.5;
  cfg.max_iters = 30;
  cfg.seed = 13;
  const std::vector<double> candidates{0.0, 0.25, 0.5, 0.75, 1.0};
  cfg.eta_schedule = EtaDiscreteSchedule{candidates};
  const auto result =
      discount_run(task.factual, task.target, *task.model, task.theta, cfg);
  for (const auto& rec : result.trace) {
    CHECK(std::find(candidates.begin(), candidates.end(), rec.eta) !=
          candidates.end());
  }
}

TEST_CASE("discount_run: validates its configuration") {
  const Task task = make_task(10, 77);
  DiscountConfig cfg;
  cfg.tau = 0.0;
  CHECK_THROWS_AS(
      discount_run(task.factual, task.target, *task.model, task.theta, cfg),
      std::invalid_argument);

  DiscountConfig bad_eta;
  bad_eta.eta_schedule = EtaIntervalSchedule{0.8, 0.2, 0.1};
  CHECK_THROWS_AS(
      discount_run(task.factual, task.target, *task.model, task.theta, bad_eta),
      std::invalid_argument);
}

TEST_CASE("discount_run: resamples targets of mismatched size") {
  const Task task = make_task(20, 78);
  DiscountConfig cfg;
  cfg.u_x = 5.0;
  cfg.u_y = 5.0;
  cfg.max_iters = 10;
  const Vector wide_target = Vector::Constant(7, 1.0);
  const auto result =
      discount_run(task.factual, wide_target, *task.model, task.theta, cfg);
  CHECK(result.final_nu.cols() == task.factual.size());
}
