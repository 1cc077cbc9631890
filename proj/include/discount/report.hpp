#pragma once

#include "discount/data.hpp"
#include "discount/metrics.hpp"
#include "discount/optimizer.hpp"
#include "discount/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace discount {

struct ReportInputs {
  nlohmann::json config_echo;
  EmpiricalSample factual;   // model-space (encoded, standardized) sample
  Vector factual_outputs;
  Vector target;
  ProjectionSet theta;
  DiscountResult result;
  MetricReport metrics;
  std::optional<Vector> counterfactual_outputs;
  const Preprocessor* preprocessor = nullptr;  // null: emit model-space values
  double u_x = 0.0;
  double u_y = 0.0;
};

/// Write the run artifacts into out_dir: report.json, trace.csv,
/// quantiles.csv (99 levels per feature plus pooled projections and model
/// outputs), plan_mu.csv (projection-averaged coupling normalized to total
/// mass 1), plan_nu.csv, and counterfactual.csv for feasible runs.
void emit_report(const ReportInputs& inputs, const std::string& out_dir);

}  // namespace discount
