#include "discount/report.hpp"

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace discount {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DiscountError("cannot write file: " + path.string());
  return out;
}

void write_quantile_rows(std::ofstream& out, const std::string& series,
                         const std::string& component, const Vector& sample) {
  const QuantileView view(sample);
  for (int p = 1; p <= 99; ++p) {
    const double level = static_cast<double>(p) / 100.0;
    out << csv_field(series) << ',' << csv_field(component) << ','
        << fmt(level) << ',' << fmt(view(level)) << "\n";
  }
}

void write_plan(const std::filesystem::path& path, const Matrix& weights) {
  auto out = open_out(path);
  out << "i,j,weight\n";
  for (Index i = 0; i < weights.rows(); ++i) {
    for (Index j = 0; j < weights.cols(); ++j) {
      out << i << ',' << j << ',' << fmt(weights(i, j)) << "\n";
    }
  }
  if (!out) throw DiscountError("write failed: " + path.string());
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

void emit_report(const ReportInputs& inputs, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DiscountError("cannot create output directory: " + out_dir);

  const DiscountResult& result = inputs.result;
  const bool feasible = result.status == RunStatus::Feasible;

  // report.json
  {
    nlohmann::json report;
    report["status"] = to_string(result.status);
    report["feasible"] = feasible;
    if (!result.abort_reason.empty()) report["abort_reason"] = result.abort_reason;
    report["bounds"] = {{"ux", inputs.u_x}, {"uy", inputs.u_y}};
    report["final_ucls"] = {{"sw2", result.final_ucl_sw2},
                            {"w2", result.final_ucl_w2}};
    report["iterations"] = result.trace.size();
    nlohmann::json metrics;
    metrics["coverage"] = inputs.metrics.coverage;
    metrics["ot_proximity"] = inputs.metrics.ot_proximity;
    metrics["mmd"] = inputs.metrics.mmd;
    metrics["diversity"] = inputs.metrics.diversity;
    metrics["dpc"] = inputs.metrics.dpc ? nlohmann::json(*inputs.metrics.dpc)
                                        : nlohmann::json(nullptr);
    nlohmann::json diffs = nlohmann::json::object();
    for (const auto& [level, value] : inputs.metrics.percentile_diffs) {
      diffs[fmt(level)] = value;
    }
    metrics["percentile_diffs"] = diffs;
    report["metrics"] = metrics;
    report["config"] = inputs.config_echo;
    report["timestamp"] = iso_timestamp();

    auto out = open_out(dir / "report.json");
    out << report.dump(2) << "\n";
    if (!out) throw DiscountError("write failed: " + (dir / "report.json").string());
  }

  // trace.csv
  {
    auto out = open_out(dir / "trace.csv");
    out << "iter,sw2_ucl,w2_ucl,eta,grad_norm,q_value,step_norm\n";
    for (const auto& rec : result.trace) {
      out << rec.t << ',' << fmt(rec.ucl_sw2) << ',' << fmt(rec.ucl_w2) << ','
          << fmt(rec.eta) << ',' << fmt(rec.grad_norm) << ','
          << fmt(rec.q_value) << ',' << fmt(rec.step_norm) << "\n";
    }
    if (!out) throw DiscountError("write failed: " + (dir / "trace.csv").string());
  }

  // quantiles.csv: per-feature curves, pooled projections, and outputs.
  {
    auto out = open_out(dir / "quantiles.csv");
    out << "series,component,level,value\n";
    const EmpiricalSample& factual = inputs.factual;
    const EmpiricalSample& moved = result.counterfactual;
    for (Index j = 0; j < factual.dim(); ++j) {
      const std::string& name = factual.feature_names[static_cast<std::size_t>(j)];
      write_quantile_rows(out, "factual", name, factual.points.col(j));
      write_quantile_rows(out, "counterfactual", name, moved.points.col(j));
    }
    // All projections pooled into one 1-D sample per series.
    {
      const Index n = factual.size();
      const Index count = inputs.theta.count();
      Vector pooled_factual(n * count);
      Vector pooled_moved(moved.size() * count);
      for (Index k = 0; k < count; ++k) {
        pooled_factual.segment(k * n, n) =
            factual.points * inputs.theta.directions.row(k).transpose();
        pooled_moved.segment(k * moved.size(), moved.size()) =
            moved.points * inputs.theta.directions.row(k).transpose();
      }
      write_quantile_rows(out, "factual", "projected", pooled_factual);
      write_quantile_rows(out, "counterfactual", "projected", pooled_moved);
    }
    write_quantile_rows(out, "factual", "output", inputs.factual_outputs);
    if (inputs.counterfactual_outputs) {
      write_quantile_rows(out, "counterfactual", "output",
                          *inputs.counterfactual_outputs);
    }
    write_quantile_rows(out, "target", "output", inputs.target);
    if (!out) throw DiscountError("write failed: " + (dir / "quantiles.csv").string());
  }

  // plan_mu.csv: projection-averaged coupling, normalized to total mass 1.
  if (!result.final_mu.empty()) {
    Matrix mean = Matrix::Zero(result.final_mu.front().rows(),
                               result.final_mu.front().cols());
    for (const auto& plan : result.final_mu) mean += plan.weights;
    mean /= static_cast<double>(result.final_mu.size());
    const double total = mean.sum();
    if (total > 0.0) mean /= total;
    write_plan(dir / "plan_mu.csv", mean);
  }
  if (result.final_nu.weights.size() > 0) {
    write_plan(dir / "plan_nu.csv", result.final_nu.weights);
  }

  // counterfactual.csv only exists for feasible runs; one-hot groups are
  // decoded and units restored when a preprocessor is available.
  if (feasible) {
    auto out = open_out(dir / "counterfactual.csv");
    if (inputs.preprocessor != nullptr) {
      const Table decoded =
          inputs.preprocessor->inverse_transform(result.counterfactual.points);
      for (std::size_t c = 0; c < decoded.columns.size(); ++c) {
        out << (c ? "," : "") << csv_field(decoded.columns[c].name);
      }
      out << "\n";
      for (std::size_t r = 0; r < decoded.rows; ++r) {
        for (std::size_t c = 0; c < decoded.columns.size(); ++c) {
          const Column& col = decoded.columns[c];
          out << (c ? "," : "")
              << (col.numeric ? fmt(col.values[r]) : csv_field(col.labels[r]));
        }
        out << "\n";
      }
    } else {
      const EmpiricalSample& moved = result.counterfactual;
      for (std::size_t c = 0; c < moved.feature_names.size(); ++c) {
        out << (c ? "," : "") << csv_field(moved.feature_names[c]);
      }
      out << "\n";
      for (Index r = 0; r < moved.size(); ++r) {
        for (Index c = 0; c < moved.dim(); ++c) {
          out << (c ? "," : "") << fmt(moved.points(r, c));
        }
        out << "\n";
      }
    }
    if (!out) {
      throw DiscountError("write failed: " + (dir / "counterfactual.csv").string());
    }
  }
}

}  // namespace discount
