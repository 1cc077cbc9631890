#include "discount/model.hpp"

#include "discount/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace discount {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Vector sigmoid_vec(const Vector& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

double bce_loss(const Vector& probs, const Vector& labels) {
  double loss = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], 1e-12, 1.0 - 1e-12);
    loss -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log1p(-p);
  }
  return loss / static_cast<double>(probs.size());
}

void check_labels(const Vector& labels) {
  for (Index i = 0; i < labels.size(); ++i) {
    if (!(labels[i] >= 0.0 && labels[i] <= 1.0)) {
      throw std::invalid_argument("labels must lie in [0, 1]");
    }
  }
}

/// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
double init_weight(Rng& rng, Index fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return (2.0 * rng.uniform() - 1.0) * bound;
}

}  // namespace

nlohmann::json Model::to_json() const {
  throw DiscountError("model kind '" + kind() + "' is not serializable");
}

void Model::check_input(const Matrix& x) const {
  if (x.cols() != input_dim()) {
    throw std::invalid_argument("model input dimension mismatch: expected " +
                                std::to_string(input_dim()) + ", got " +
                                std::to_string(x.cols()));
  }
}

Matrix Model::finite_difference_gradient(const Matrix& x, double step) const {
  check_input(x);
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (Index j = 0; j < x.cols(); ++j) {
    probe.col(j).array() += step;
    const Vector up = predict(probe);
    probe.col(j) = x.col(j);
    probe.col(j).array() -= step;
    const Vector down = predict(probe);
    probe.col(j) = x.col(j);
    grad.col(j) = (up - down) / (2.0 * step);
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Logistic

LogisticModel::LogisticModel(Vector weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {
  if (weights_.size() < 1) {
    throw std::invalid_argument("logistic model needs at least one weight");
  }
}

Vector LogisticModel::predict(const Matrix& x) const {
  check_input(x);
  return sigmoid_vec((x * weights_).array() + bias_);
}

Matrix LogisticModel::input_gradient(const Matrix& x) const {
  check_input(x);
  const Vector p = predict(x);
  const Vector scale = p.array() * (1.0 - p.array());
  return scale * weights_.transpose();
}

nlohmann::json LogisticModel::to_json() const {
  std::vector<double> w(weights_.data(), weights_.data() + weights_.size());
  w.push_back(bias_);
  return {{"kind", "logistic"},
          {"dims", {weights_.size(), 1}},
          {"weights", w}};
}

// ---------------------------------------------------------------------------
// MLP

MlpModel::MlpModel(std::vector<Matrix> weights, std::vector<Vector> biases,
                   std::string activation)
    : weights_(std::move(weights)),
      biases_(std::move(biases)),
      activation_(std::move(activation)) {
  if (weights_.empty() || weights_.size() != biases_.size()) {
    throw std::invalid_argument("mlp needs matched weight/bias layers");
  }
  if (weights_.back().rows() != 1) {
    throw std::invalid_argument("mlp output layer must be scalar");
  }
  if (activation_ != "tanh" && activation_ != "sigmoid") {
    throw std::invalid_argument("unsupported mlp activation: " + activation_);
  }
  for (std::size_t l = 0; l + 1 < weights_.size(); ++l) {
    if (weights_[l + 1].cols() != weights_[l].rows()) {
      throw std::invalid_argument("mlp layer shapes do not chain");
    }
  }
}

namespace {

Matrix activate(const Matrix& z, const std::string& kind) {
  if (kind == "tanh") return z.array().tanh();
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

Matrix activate_derivative(const Matrix& a, const std::string& kind) {
  if (kind == "tanh") return 1.0 - a.array().square();
  return a.array() * (1.0 - a.array());
}

}  // namespace

Vector MlpModel::predict(const Matrix& x) const {
  check_input(x);
  Matrix a = x.transpose();  // in x n
  for (std::size_t l = 0; l + 1 < weights_.size(); ++l) {
    a = activate((weights_[l] * a).colwise() + biases_[l], activation_);
  }
  const Matrix z = (weights_.back() * a).colwise() + biases_.back();
  return sigmoid_vec(z.row(0).transpose());
}

Matrix MlpModel::input_gradient(const Matrix& x) const {
  check_input(x);
  const std::size_t layers = weights_.size();
  std::vector<Matrix> activations(layers);  // post-activation per hidden layer
  Matrix a = x.transpose();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    a = activate((weights_[l] * a).colwise() + biases_[l], activation_);
    activations[l] = a;
  }
  const Matrix z = (weights_.back() * a).colwise() + biases_.back();
  const Vector p = sigmoid_vec(z.row(0).transpose());

  Matrix delta = (p.array() * (1.0 - p.array())).matrix().transpose();  // 1 x n
  for (std::size_t l = layers - 1; l > 0; --l) {
    delta = (weights_[l].transpose() * delta).array() *
            activate_derivative(activations[l - 1], activation_).array();
  }
  return (weights_.front().transpose() * delta).transpose();  // n x d
}

nlohmann::json MlpModel::to_json() const {
  std::vector<Index> dims{weights_.front().cols()};
  for (const auto& w : weights_) dims.push_back(w.rows());
  std::vector<double> flat;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Matrix& w = weights_[l];
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    for (Index r = 0; r < biases_[l].size(); ++r) {
      flat.push_back(biases_[l][r]);
    }
  }
  return {{"kind", "mlp"},
          {"dims", dims},
          {"activation", activation_},
          {"weights", flat}};
}

// ---------------------------------------------------------------------------
// RBF

RbfModel::RbfModel(Matrix centers, Vector widths, Vector coeffs, double bias)
    : centers_(std::move(centers)),
      widths_(std::move(widths)),
      coeffs_(std::move(coeffs)),
      bias_(bias) {
  if (centers_.rows() < 1 || centers_.cols() < 1) {
    throw std::invalid_argument("rbf model needs at least one center");
  }
  if (widths_.size() != centers_.rows() || coeffs_.size() != centers_.rows()) {
    throw std::invalid_argument("rbf widths/coeffs must match center count");
  }
  if ((widths_.array() <= 0.0).any()) {
    throw std::invalid_argument("rbf widths must be positive");
  }
}

Matrix RbfModel::features(const Matrix& x) const {
  Matrix phi(x.rows(), centers_.rows());
  for (Index k = 0; k < centers_.rows(); ++k) {
    const Vector dist_sq =
        (x.rowwise() - centers_.row(k)).rowwise().squaredNorm();
    phi.col(k) =
        (-dist_sq.array() / (2.0 * widths_[k] * widths_[k])).exp();
  }
  return phi;
}

Vector RbfModel::predict(const Matrix& x) const {
  check_input(x);
  return (features(x) * coeffs_).array() + bias_;
}

Matrix RbfModel::input_gradient(const Matrix& x) const {
  check_input(x);
  const Matrix phi = features(x);
  Matrix grad = Matrix::Zero(x.rows(), x.cols());
  for (Index k = 0; k < centers_.rows(); ++k) {
    const double inv_var = 1.0 / (widths_[k] * widths_[k]);
    const Matrix diff = x.rowwise() - centers_.row(k);
    grad -= (coeffs_[k] * inv_var) *
            (diff.array().colwise() * phi.col(k).array()).matrix();
  }
  return grad;
}

nlohmann::json RbfModel::to_json() const {
  std::vector<double> flat;
  for (Index r = 0; r < centers_.rows(); ++r) {
    for (Index c = 0; c < centers_.cols(); ++c) flat.push_back(centers_(r, c));
  }
  for (Index k = 0; k < widths_.size(); ++k) flat.push_back(widths_[k]);
  for (Index k = 0; k < coeffs_.size(); ++k) flat.push_back(coeffs_[k]);
  flat.push_back(bias_);
  return {{"kind", "rbf"},
          {"dims", {centers_.cols(), centers_.rows()}},
          {"weights", flat}};
}

// ---------------------------------------------------------------------------
// Training

struct MlpTrainer {
  static TrainResult fit(const ModelSpec& spec, const Matrix& x,
                         const Vector& labels, int epochs, double lr,
                         std::uint64_t seed) {
    Rng rng(seed);
    const Index d = x.cols();
    std::vector<Index> sizes{d};
    for (Index h : spec.hidden) sizes.push_back(h);
    sizes.push_back(1);

    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      Matrix w(sizes[l + 1], sizes[l]);
      for (Index r = 0; r < w.rows(); ++r) {
        for (Index c = 0; c < w.cols(); ++c) w(r, c) = init_weight(rng, sizes[l]);
      }
      Vector b(sizes[l + 1]);
      for (Index r = 0; r < b.size(); ++r) b[r] = init_weight(rng, sizes[l]);
      weights.push_back(std::move(w));
      biases.push_back(std::move(b));
    }

    const auto n = static_cast<double>(x.rows());
    const std::size_t layers = weights.size();
    double loss = 0.0;
    for (int epoch = 0; epoch <= epochs; ++epoch) {
      // Forward pass with cached activations.
      std::vector<Matrix> acts(layers);
      Matrix a = x.transpose();
      for (std::size_t l = 0; l + 1 < layers; ++l) {
        a = activate((weights[l] * a).colwise() + biases[l], spec.activation);
        acts[l] = a;
      }
      const Matrix z = (weights.back() * a).colwise() + biases.back();
      const Vector probs = sigmoid_vec(z.row(0).transpose());
      loss = bce_loss(probs, labels);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("mlp training produced a non-finite loss");
      }
      if (epoch == epochs) break;

      Matrix delta = ((probs - labels) / n).transpose();  // 1 x n
      for (std::size_t l = layers; l-- > 0;) {
        const Matrix grad_w =
            (l == 0) ? Matrix(delta * x) : Matrix(delta * acts[l - 1].transpose());
        const Vector grad_b = delta.rowwise().sum();
        if (l > 0) {
          delta = (weights[l].transpose() * delta).array() *
                  activate_derivative(acts[l - 1], spec.activation).array();
        }
        weights[l] -= lr * grad_w;
        biases[l] -= lr * grad_b;
      }
    }
    return {std::make_shared<MlpModel>(std::move(weights), std::move(biases),
                                       spec.activation),
            loss};
  }
};

struct RbfTrainer {
  static TrainResult fit(const ModelSpec& spec, const Matrix& x,
                         const Vector& labels, int epochs, double lr,
                         std::uint64_t seed) {
    Rng rng(seed);
    const Index k = std::min<Index>(spec.rbf_centers, x.rows());

    // Centers: random sample of training points; shared width from the
    // median pairwise distance among them.
    std::vector<Index> order(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    rng.shuffle(order);
    Matrix centers(k, x.cols());
    for (Index c = 0; c < k; ++c) centers.row(c) = x.row(order[static_cast<std::size_t>(c)]);

    std::vector<double> dists;
    for (Index i = 0; i < k; ++i) {
      for (Index j = i + 1; j < k; ++j) {
        dists.push_back((centers.row(i) - centers.row(j)).norm());
      }
    }
    double width = 1.0;
    if (!dists.empty()) {
      std::nth_element(dists.begin(), dists.begin() + dists.size() / 2,
                       dists.end());
      width = std::max(dists[dists.size() / 2], 1e-6);
    }

    Vector widths = Vector::Constant(k, width);
    Vector coeffs = Vector::Zero(k);
    double bias = 0.5;

    RbfModel model(centers, widths, coeffs, bias);
    const auto n = static_cast<double>(x.rows());
    const Matrix phi = model.features(x);
    double loss = 0.0;
    for (int epoch = 0; epoch <= epochs; ++epoch) {
      const Vector raw = (phi * coeffs).array() + bias;
      const Vector probs =
          raw.unaryExpr([](double v) { return std::clamp(v, 1e-6, 1.0 - 1e-6); });
      loss = bce_loss(probs, labels);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("rbf training produced a non-finite loss");
      }
      if (epoch == epochs) break;

      // d(BCE)/d(raw output), per-point multiplier clipped to [-10, 10].
      Vector mult(probs.size());
      for (Index i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        mult[i] = std::clamp((p - labels[i]) / (p * (1.0 - p)), -10.0, 10.0) / n;
      }
      coeffs -= lr * (phi.transpose() * mult);
      bias -= lr * mult.sum();
    }
    return {std::make_shared<RbfModel>(std::move(centers), std::move(widths),
                                       std::move(coeffs), bias),
            loss};
  }
};

namespace {

TrainResult fit_logistic(const Matrix& x, const Vector& labels, int epochs,
                         double lr, std::uint64_t seed) {
  Rng rng(seed);
  const Index d = x.cols();
  Vector w(d);
  for (Index j = 0; j < d; ++j) w[j] = init_weight(rng, d);
  double bias = init_weight(rng, d);

  const auto n = static_cast<double>(x.rows());
  double loss = 0.0;
  for (int epoch = 0; epoch <= epochs; ++epoch) {
    const Vector probs = sigmoid_vec((x * w).array() + bias);
    loss = bce_loss(probs, labels);
    if (!std::isfinite(loss)) {
      throw TrainingDiverged("logistic training produced a non-finite loss");
    }
    if (epoch == epochs) break;
    const Vector err = (probs - labels) / n;
    w -= lr * (x.transpose() * err);
    bias -= lr * err.sum();
  }
  return {std::make_shared<LogisticModel>(std::move(w), bias), loss};
}

}  // namespace

TrainResult train(const ModelSpec& spec, const Matrix& x, const Vector& labels,
                  int epochs, double lr, std::uint64_t seed) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw std::invalid_argument("training data must be nonempty");
  }
  if (labels.size() != x.rows()) {
    throw std::invalid_argument("label count must match data rows");
  }
  check_labels(labels);
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be nonnegative");

  if (spec.kind == "logistic") return fit_logistic(x, labels, epochs, lr, seed);
  if (spec.kind == "mlp") return MlpTrainer::fit(spec, x, labels, epochs, lr, seed);
  if (spec.kind == "rbf") return RbfTrainer::fit(spec, x, labels, epochs, lr, seed);
  throw std::invalid_argument("unknown model kind: " + spec.kind);
}

// ---------------------------------------------------------------------------
// Serialization

ModelPtr model_from_json(const nlohmann::json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  const auto dims = doc.at("dims").get<std::vector<Index>>();
  const auto flat = doc.at("weights").get<std::vector<double>>();

  if (kind == "logistic") {
    if (dims.size() != 2 || dims[1] != 1) {
      throw DiscountError("logistic model expects dims [d, 1]");
    }
    const Index d = dims[0];
    if (static_cast<Index>(flat.size()) != d + 1) {
      throw DiscountError("logistic weight count inconsistent with dims");
    }
    Vector w(d);
    for (Index j = 0; j < d; ++j) w[j] = flat[static_cast<std::size_t>(j)];
    return std::make_shared<LogisticModel>(std::move(w), flat.back());
  }

  if (kind == "mlp") {
    if (dims.size() < 2) throw DiscountError("mlp expects at least two dims");
    std::size_t expected = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      expected += static_cast<std::size_t>(dims[l + 1]) *
                      static_cast<std::size_t>(dims[l]) +
                  static_cast<std::size_t>(dims[l + 1]);
    }
    if (flat.size() != expected) {
      throw DiscountError("mlp weight count inconsistent with dims");
    }
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Matrix w(dims[l + 1], dims[l]);
      for (Index r = 0; r < w.rows(); ++r) {
        for (Index c = 0; c < w.cols(); ++c) w(r, c) = flat[pos++];
      }
      Vector b(dims[l + 1]);
      for (Index r = 0; r < b.size(); ++r) b[r] = flat[pos++];
      weights.push_back(std::move(w));
      biases.push_back(std::move(b));
    }
    return std::make_shared<MlpModel>(std::move(weights), std::move(biases),
                                      doc.value("activation", "tanh"));
  }

  if (kind == "rbf") {
    if (dims.size() != 2) throw DiscountError("rbf expects dims [d, centers]");
    const Index d = dims[0];
    const Index k = dims[1];
    const auto expected = static_cast<std::size_t>(k * d + k + k + 1);
    if (flat.size() != expected) {
      throw DiscountError("rbf weight count inconsistent with dims");
    }
    std::size_t pos = 0;
    Matrix centers(k, d);
    for (Index r = 0; r < k; ++r) {
      for (Index c = 0; c < d; ++c) centers(r, c) = flat[pos++];
    }
    Vector widths(k);
    for (Index r = 0; r < k; ++r) widths[r] = flat[pos++];
    Vector coeffs(k);
    for (Index r = 0; r < k; ++r) coeffs[r] = flat[pos++];
    return std::make_shared<RbfModel>(std::move(centers), std::move(widths),
                                      std::move(coeffs), flat.back());
  }

  throw DiscountError("unknown model kind in file: " + kind);
}

ModelPtr load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DiscountError("cannot open model file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DiscountError("cannot parse model file " + path + ": " + e.what());
  }
  return model_from_json(doc);
}

void save_model(const Model& model, const std::string& path,
                const std::vector<std::string>& feature_names) {
  nlohmann::json doc = model.to_json();
  if (!feature_names.empty()) doc["feature_names"] = feature_names;
  std::ofstream out(path);
  if (!out) throw DiscountError("cannot write model file: " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace discount
