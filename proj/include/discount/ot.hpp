#pragma once

#include "discount/model.hpp"
#include "discount/types.hpp"

#include <utility>
#include <vector>

namespace discount {

/// Draw `count` i.i.d. uniform directions on the (d-1)-sphere
/// (standard-normal vectors, normalized). Deterministic given the seed.
ProjectionSet sample_projections(Index d, Index count, std::uint64_t seed);

/// Exact squared 2-Wasserstein distance between two 1-D empirical samples:
/// the L2 distance between their (piecewise-constant) quantile functions,
/// integrated over the merged breakpoint grid.
double wasserstein1d_sq(const Vector& a, const Vector& b);

/// Monte Carlo sliced squared Wasserstein distance: the average over the
/// projection set of the exact 1-D distance between projected samples.
double sliced_wasserstein_sq(const EmpiricalSample& x,
                             const EmpiricalSample& x_prime,
                             const ProjectionSet& theta);

/// Optimal coupling for the 1-D quadratic cost: north-west-corner mass
/// sweep over the two sorted samples. Cost equals wasserstein1d_sq; for
/// n == m the plan is 1/n times the sorted-rank permutation.
TransportPlan monotone_plan(const Vector& a, const Vector& b);

/// Input-proximity objective: per-projection quadratic transport cost under
/// the given (fixed) plans, averaged over the projection set so that optimal
/// plans reproduce sliced_wasserstein_sq. Plans must have valid marginals.
double q_x(const EmpiricalSample& x, const EmpiricalSample& x_prime,
           const ProjectionSet& theta, const std::vector<TransportPlan>& plans);

/// Output-target objective: quadratic transport cost between the model
/// outputs and the target sample under the (fixed) plan nu.
double q_y(const EmpiricalSample& x, const Vector& y_target, const Model& model,
           const TransportPlan& nu);

/// Same objective evaluated on precomputed model outputs.
double q_y_outputs(const Vector& outputs, const Vector& y_target,
                   const TransportPlan& nu);

/// Exact solution of the discrete transport problem with uniform marginals
/// and arbitrary cost matrix, for instances up to 8 x 8. Solves the
/// equivalent assignment problem on the lcm-expanded instance.
std::pair<double, TransportPlan> lp_ot_min_cost(const Matrix& cost);

/// 1-D convenience wrapper around lp_ot_min_cost with squared distance cost.
std::pair<double, TransportPlan> lp_ot_oracle(const Vector& a,
                                              const Vector& b);

}  // namespace discount
