#pragma once

#include "discount/config.hpp"

namespace discount {

/// Execute one full run: load or synthesize data, fit or attach the model,
/// select the factual subset (test points predicted as class 0), build the
/// target, optimize, and write artifacts. Returns the process exit status:
/// 0 feasible, 2 infeasible, 1 error.
int run_command(const RunConfig& config);

}  // namespace discount
