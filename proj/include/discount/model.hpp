#pragma once

#include "discount/types.hpp"

#include <json.hpp>

#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace discount {

/// Black-box scalar-output predictor b: R^d -> R with batch value and
/// per-point input-gradient evaluation.
class Model {
 public:
  virtual ~Model() = default;

  virtual Index input_dim() const = 0;
  virtual std::string kind() const = 0;

  /// Batch map (n x d) -> n outputs.
  virtual Vector predict(const Matrix& x) const = 0;

  /// Per-point gradient of the output w.r.t. the input, (n x d). The default
  /// falls back to central finite differences of predict.
  virtual Matrix input_gradient(const Matrix& x) const {
    return finite_difference_gradient(x);
  }

  /// Serializable built-ins override this; external handles throw.
  virtual nlohmann::json to_json() const;

  Matrix finite_difference_gradient(const Matrix& x, double step = 1e-5) const;

 protected:
  void check_input(const Matrix& x) const;
};

using ModelPtr = std::shared_ptr<Model>;

/// b(x) = sigmoid(w'x + c).
class LogisticModel final : public Model {
 public:
  LogisticModel(Vector weights, double bias);

  Index input_dim() const override { return weights_.size(); }
  std::string kind() const override { return "logistic"; }
  Vector predict(const Matrix& x) const override;
  Matrix input_gradient(const Matrix& x) const override;
  nlohmann::json to_json() const override;

  const Vector& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  Vector weights_;
  double bias_;
};

/// Fully connected network with smooth hidden activation (tanh or sigmoid)
/// and sigmoid output, so predictions live in (0, 1).
class MlpModel final : public Model {
 public:
  MlpModel(std::vector<Matrix> weights, std::vector<Vector> biases,
           std::string activation);

  Index input_dim() const override { return weights_.front().cols(); }
  std::string kind() const override { return "mlp"; }
  Vector predict(const Matrix& x) const override;
  Matrix input_gradient(const Matrix& x) const override;
  nlohmann::json to_json() const override;

  const std::vector<Matrix>& layer_weights() const { return weights_; }
  const std::vector<Vector>& layer_biases() const { return biases_; }
  const std::string& activation() const { return activation_; }

 private:
  friend struct MlpTrainer;
  std::vector<Matrix> weights_;  // layer l: out x in
  std::vector<Vector> biases_;
  std::string activation_;
};

/// Gaussian radial basis expansion b(x) = bias + sum_k c_k exp(-|x-m_k|^2 / 2 s_k^2).
/// The output is a raw kernel mix, not squashed.
class RbfModel final : public Model {
 public:
  RbfModel(Matrix centers, Vector widths, Vector coeffs, double bias);

  Index input_dim() const override { return centers_.cols(); }
  std::string kind() const override { return "rbf"; }
  Vector predict(const Matrix& x) const override;
  Matrix input_gradient(const Matrix& x) const override;
  nlohmann::json to_json() const override;

  const Matrix& centers() const { return centers_; }
  const Vector& widths() const { return widths_; }
  const Vector& coeffs() const { return coeffs_; }
  double bias() const { return bias_; }

 private:
  Matrix features(const Matrix& x) const;  // n x centers
  friend struct RbfTrainer;
  Matrix centers_;  // k x d
  Vector widths_;   // k
  Vector coeffs_;   // k
  double bias_;
};

struct ModelSpec {
  std::string kind = "logistic";          // logistic | mlp | rbf
  std::vector<Index> hidden = {16};       // mlp hidden layer sizes
  std::string activation = "tanh";        // mlp hidden activation
  Index rbf_centers = 8;
};

struct TrainResult {
  ModelPtr model;
  double final_loss = 0.0;
};

/// Fit a built-in model by full-batch gradient descent on binary
/// cross-entropy. labels must lie in [0, 1]. Deterministic given the seed;
/// epochs == 0 returns the freshly initialized model.
TrainResult train(const ModelSpec& spec, const Matrix& x, const Vector& labels,
                  int epochs, double lr, std::uint64_t seed);

ModelPtr model_from_json(const nlohmann::json& doc);
ModelPtr load_model(const std::string& path);
void save_model(const Model& model, const std::string& path,
                const std::vector<std::string>& feature_names = {});

/// Adapter for a model served by a child process over newline-delimited
/// JSON on stdin/stdout. Handshake: {"op":"hello"} ->
/// {"protocol":1,"input_dim":d}; batches: {"op":"predict","x":[[...]]} ->
/// {"y":[...]}. Gradients use central finite differences. Access to the
/// child is serialized; one request is in flight at a time.
class ExternalModel final : public Model {
 public:
  explicit ExternalModel(const std::string& command, int timeout_ms = 30000);
  ~ExternalModel() override;

  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;

  Index input_dim() const override { return dim_; }
  std::string kind() const override { return "external"; }
  Vector predict(const Matrix& x) const override;

 private:
  std::string request_line(const std::string& line, Index batch) const;
  void shutdown();

  mutable std::mutex mutex_;
  mutable Index batch_counter_ = 0;
  int child_stdin_ = -1;
  int child_stdout_ = -1;
  long pid_ = -1;
  int timeout_ms_;
  Index dim_ = 0;
  mutable std::string read_buffer_;
};

}  // namespace discount
