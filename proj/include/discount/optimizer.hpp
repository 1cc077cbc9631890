#pragma once

#include "discount/confidence.hpp"
#include "discount/model.hpp"
#include "discount/ot.hpp"
#include "discount/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace discount {

/// Continuous eta search state: candidate interval [lo, hi] narrowed by a
/// fraction kappa per step.
struct EtaIntervalSchedule {
  double lo = 0.0;
  double hi = 1.0;
  double kappa = 0.1;

  void validate() const;
};

/// Discrete eta search state: a candidate multiset that shrinks by one
/// element per step until a single value remains.
struct EtaDiscreteSchedule {
  std::vector<double> candidates = {0.0, 0.25, 0.5, 0.75, 1.0};

  void validate() const;
};

using EtaSchedule = std::variant<EtaIntervalSchedule, EtaDiscreteSchedule>;

/// Balance weight from the constraint gaps a = U_x - ucl_sw2 and
/// b = U_y - ucl_w2. A violated constraint takes full priority; when both
/// are violated the weights follow b/(a+b); when both hold, a/(a+b); when
/// both gaps are exactly zero, 0.5.
double eta_balance(double gap_x, double gap_y);

/// One Interval Narrowing update: balance the gaps, shrink the interval on
/// the side away from the balanced value, and return the value clamped into
/// the narrowed interval together with the saved state.
std::pair<double, EtaIntervalSchedule> interval_narrowing_step(
    const EtaIntervalSchedule& state, double sw2_ucl, double w2_ucl,
    double u_x, double u_y);

/// One Set Shrinking update: pick the candidate nearest to the balanced
/// value (ties break to the lower value), remove it unless it is the last
/// one, and return it with the saved state.
std::pair<double, EtaDiscreteSchedule> set_shrinking_step(
    const EtaDiscreteSchedule& state, double sw2_ucl, double w2_ucl,
    double u_x, double u_y);

/// Per-feature clamp bounds for the retraction.
struct Box {
  Vector lo;
  Vector hi;

  /// Bounds spanning the per-feature range of pts, inflated on each side by
  /// `inflate` times the range.
  static Box around(const Matrix& pts, double inflate = 0.1);
  void validate(Index dim) const;
};

/// Gradient of (1-eta) Q_x + eta Q_y with the plans held fixed.
Matrix grad_q(const EmpiricalSample& x, const EmpiricalSample& x_prime,
              const ProjectionSet& theta, const std::vector<TransportPlan>& mu,
              const Vector& y_target, const TransportPlan& nu,
              const Model& model, double eta);

/// Euclidean step followed by a per-coordinate clamp into the box.
Matrix retract(const Matrix& x, const Matrix& step, const Box& box);

struct DiscountConfig {
  double u_x = 1.0;
  double u_y = 1.0;
  double alpha = 0.1;
  double tau = 0.05;
  double epsilon = 1e-4;
  int max_iters = 2000;
  double init_noise_std = 0.1;
  EtaSchedule eta_schedule = EtaIntervalSchedule{};
  std::optional<Box> box;  // default: factual range inflated by 10%
  std::uint64_t seed = 0;
  UclConfig ucl;

  void validate() const;
};

struct IterationRecord {
  int t = 0;
  double ucl_sw2 = 0.0;
  double ucl_w2 = 0.0;
  double eta = 0.0;
  double grad_norm = 0.0;
  double q_value = 0.0;
  double step_norm = 0.0;
};

enum class RunStatus { Feasible, Infeasible, Aborted };

std::string to_string(RunStatus status);

struct DiscountResult {
  RunStatus status = RunStatus::Infeasible;
  EmpiricalSample counterfactual;  // final iterate (exported only if feasible)
  std::vector<IterationRecord> trace;
  double final_ucl_sw2 = 0.0;
  double final_ucl_w2 = 0.0;
  std::vector<TransportPlan> final_mu;
  TransportPlan final_nu;
  std::string abort_reason;
};

/// Block-coordinate descent for the distributional counterfactual: per
/// projection the transport plan is re-solved exactly, both upper confidence
/// limits are recomputed, eta is scheduled, and the sample takes a clamped
/// gradient step. Stops when the step norm falls below epsilon or after
/// max_iters; the result is feasible iff both final limits meet their bounds.
DiscountResult discount_run(const EmpiricalSample& factual,
                            const Vector& y_target, const Model& model,
                            const ProjectionSet& theta,
                            const DiscountConfig& cfg);

}  // namespace discount
