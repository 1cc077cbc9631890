#pragma once

#include "discount/model.hpp"
#include "discount/optimizer.hpp"
#include "discount/types.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace discount {

struct ConfigError : DiscountError {
  using DiscountError::DiscountError;
};

struct CsvSpec {
  std::string path;
  std::string label = "label";
  std::vector<std::string> categorical_hints;
};

struct SyntheticSpec {
  Index n = 400;
  Index d = 2;
  double separation = 4.0;
};

struct TrainSpec {
  ModelSpec model;
  int epochs = 500;
  double lr = 0.1;
};

struct TargetConstant {
  double value = 1.0;
};
struct TargetFile {
  std::string path;
};
struct TargetBeta {
  double a = 2.0;
  double b = 5.0;
  std::optional<Index> size;  // default: factual size
};
using TargetSpec = std::variant<TargetConstant, TargetFile, TargetBeta>;

/// Everything one `discount run` needs: one data source, one model source,
/// one target spec, optimizer settings, and the output directory.
struct RunConfig {
  std::variant<SyntheticSpec, CsvSpec> data;

  std::optional<std::string> model_path;
  std::optional<TrainSpec> model_train;
  std::optional<std::string> model_command;
  int model_timeout_ms = 30000;

  TargetSpec target = TargetConstant{};

  DiscountConfig discount;
  Index projections = 20;
  Index factual_size = 100;
  std::string out_dir = "out";

  nlohmann::json echo;  // parsed config document, echoed into the report

  void validate() const;
};

/// Parse a config document from JSON or TOML (dispatch on the .toml
/// extension, falling back to JSON).
nlohmann::json read_config_file(const std::string& path);

/// Minimal TOML reader covering the config surface: [table] headers, dotted
/// keys, strings, numbers, booleans, and flat arrays.
nlohmann::json parse_toml(std::istream& in, const std::string& origin);

RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

/// Parse "interval:l,r,kappa" or "discrete:v1,v2,..." flag syntax.
EtaSchedule parse_eta_schedule(const std::string& text);

}  // namespace discount
