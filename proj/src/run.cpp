#include "discount/run.hpp"

#include "discount/data.hpp"
#include "discount/metrics.hpp"
#include "discount/ot.hpp"
#include "discount/report.hpp"
#include "discount/rng.hpp"

#include <algorithm>
#include <iostream>

namespace discount {

namespace {

Table blobs_table(const SyntheticSpec& spec, std::uint64_t seed) {
  auto [sample, labels] = make_synthetic_blobs(spec.n, spec.d, spec.separation, seed);
  Table table;
  table.rows = static_cast<std::size_t>(sample.size());
  for (Index j = 0; j < sample.dim(); ++j) {
    Column col;
    col.name = sample.feature_names[static_cast<std::size_t>(j)];
    col.numeric = true;
    col.values.assign(sample.points.col(j).data(),
                      sample.points.col(j).data() + sample.size());
    table.columns.push_back(std::move(col));
  }
  Column label_col;
  label_col.name = "label";
  label_col.numeric = true;
  label_col.values.assign(labels.data(), labels.data() + labels.size());
  table.columns.push_back(std::move(label_col));
  return table;
}

Vector clamp01(const Vector& v) {
  return v.unaryExpr([](double x) { return std::clamp(x, 0.0, 1.0); });
}

Vector build_target(const TargetSpec& spec, Index n, std::uint64_t seed) {
  if (const auto* constant = std::get_if<TargetConstant>(&spec)) {
    return Vector::Constant(n, constant->value);
  }
  if (const auto* file = std::get_if<TargetFile>(&spec)) {
    const Table table = load_csv(file->path);
    for (const auto& col : table.columns) {
      if (col.numeric) {
        Vector y(static_cast<Index>(col.values.size()));
        for (std::size_t i = 0; i < col.values.size(); ++i) {
          y[static_cast<Index>(i)] = col.values[i];
        }
        return y;
      }
    }
    throw InvalidDataset("target file has no numeric column: " + file->path);
  }
  const auto& beta = std::get<TargetBeta>(spec);
  const Index size = beta.size.value_or(n);
  Rng rng(seed);
  Vector y(size);
  for (Index i = 0; i < size; ++i) y[i] = rng.beta(beta.a, beta.b);
  return y;
}

Matrix numeric_columns(const Table& table) {
  std::size_t count = 0;
  for (const auto& col : table.columns) count += col.numeric ? 1 : 0;
  Matrix out(static_cast<Index>(table.rows), static_cast<Index>(count));
  Index j = 0;
  for (const auto& col : table.columns) {
    if (!col.numeric) continue;
    for (std::size_t r = 0; r < table.rows; ++r) {
      out(static_cast<Index>(r), j) = col.values[r];
    }
    ++j;
  }
  return out;
}

}  // namespace

int run_command(const RunConfig& config) {
  try {
    config.validate();
    const std::uint64_t seed = config.discount.seed;

    // Data
    Table table;
    std::string label_column = "label";
    if (const auto* synth = std::get_if<SyntheticSpec>(&config.data)) {
      table = blobs_table(*synth, seed);
    } else {
      const auto& csv = std::get<CsvSpec>(config.data);
      CsvHints hints;
      hints.categorical = csv.categorical_hints;
      table = load_csv(csv.path, hints);
      label_column = csv.label;
    }
    SplitResult split = preprocess(table, label_column, seed);

    // Model
    ModelPtr model;
    if (config.model_path) {
      model = load_model(*config.model_path);
    } else if (config.model_command) {
      model = std::make_shared<ExternalModel>(*config.model_command,
                                              config.model_timeout_ms);
    } else {
      const TrainSpec& spec = *config.model_train;
      model = train(spec.model, split.train.x.points, split.train.labels,
                    spec.epochs, spec.lr, seed + 1)
                  .model;
    }
    if (model->input_dim() != split.preprocessor.encoded_dim()) {
      throw DiscountError("model input dimension does not match the data");
    }

    const Vector test_pred = clamp01(model->predict(split.test.x.points));
    double accuracy = 0.0;
    for (Index i = 0; i < test_pred.size(); ++i) {
      const bool predicted_one = test_pred[i] >= 0.5;
      if (predicted_one == (split.test.labels[i] >= 0.5)) accuracy += 1.0;
    }
    accuracy /= static_cast<double>(test_pred.size());

    // Factual subset: test points the model assigns to class 0.
    std::vector<Index> factual_rows;
    for (Index i = 0; i < test_pred.size(); ++i) {
      if (test_pred[i] < 0.5) factual_rows.push_back(i);
      if (static_cast<Index>(factual_rows.size()) >= config.factual_size) break;
    }
    if (factual_rows.empty()) {
      throw DiscountError("no test points are predicted as class 0");
    }
    EmpiricalSample factual(
        Matrix(factual_rows.size(), split.test.x.dim()),
        split.test.x.feature_names, split.test.x.one_hot_group);
    for (std::size_t i = 0; i < factual_rows.size(); ++i) {
      factual.points.row(static_cast<Index>(i)) =
          split.test.x.points.row(factual_rows[i]);
    }

    const Vector target = build_target(config.target, factual.size(), seed + 2);
    const ProjectionSet theta =
        sample_projections(factual.dim(), config.projections, seed + 3);

    // Search inside the model's fitted domain: a box around the factual
    // subset alone would wall off the other class.
    DiscountConfig discount_cfg = config.discount;
    if (!discount_cfg.box) {
      discount_cfg.box = Box::around(split.train.x.points, 0.1);
    }

    DiscountResult result =
        discount_run(factual, target, *model, theta, discount_cfg);
    if (result.status == RunStatus::Aborted) {
      std::cerr << "run aborted: " << result.abort_reason << "\n";
      return 1;
    }

    // Metrics on the final iterate, in original units where possible.
    MetricReport metrics;
    const Vector moved_outputs =
        clamp01(model->predict(result.counterfactual.points));
    metrics.coverage = coverage(moved_outputs);
    metrics.ot_proximity =
        sliced_wasserstein_sq(result.counterfactual, factual, theta);
    metrics.mmd = mmd_sq(result.counterfactual.points, factual.points);
    metrics.diversity = diversity(result.counterfactual.points);
    if (metrics.ot_proximity > 0.0) {
      metrics.dpc = dpc(metrics.diversity, metrics.ot_proximity, metrics.coverage);
    }
    {
      const Matrix factual_raw = numeric_columns(
          split.preprocessor.inverse_transform(factual.points));
      const Matrix moved_raw = numeric_columns(
          split.preprocessor.inverse_transform(result.counterfactual.points));
      if (factual_raw.cols() > 0) {
        metrics.percentile_diffs = percentile_diffs(
            factual_raw, moved_raw, {0.1, 0.25, 0.5, 0.75, 0.9});
      }
    }

    ReportInputs inputs;
    inputs.config_echo = config.echo.is_null()
                             ? nlohmann::json::object()
                             : config.echo;
    inputs.config_echo["resolved"] = {
        {"factual_size", factual.size()},
        {"projections", theta.count()},
        {"model_kind", model->kind()},
        {"test_accuracy", accuracy},
        {"seed", seed}};
    inputs.factual = factual;
    inputs.factual_outputs = clamp01(model->predict(factual.points));
    inputs.target = target;
    inputs.theta = theta;
    inputs.result = std::move(result);
    inputs.metrics = metrics;
    inputs.counterfactual_outputs = moved_outputs;
    inputs.preprocessor = &split.preprocessor;
    inputs.u_x = config.discount.u_x;
    inputs.u_y = config.discount.u_y;
    emit_report(inputs, config.out_dir);

    return inputs.result.status == RunStatus::Feasible ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace discount
