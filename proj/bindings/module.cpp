#include "discount/confidence.hpp"
#include "discount/data.hpp"
#include "discount/metrics.hpp"
#include "discount/model.hpp"
#include "discount/optimizer.hpp"
#include "discount/ot.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace discount;

namespace {

ProjectionSet as_projection_set(const Matrix& directions) {
  ProjectionSet theta{directions, 0};
  theta.validate();
  return theta;
}

UclConfig make_ucl_config(double delta, int grid, bool squared) {
  UclConfig cfg;
  cfg.delta = delta;
  cfg.grid_size = grid;
  cfg.squared_integrand = squared;
  return cfg;
}

DiscountResult run_discount(
    const Matrix& factual, const Vector& target, const ModelPtr& model,
    const Matrix& directions, double u_x, double u_y, double alpha, double tau,
    double epsilon, int max_iters, double init_noise_std, std::uint64_t seed,
    std::optional<std::tuple<double, double, double>> eta_interval,
    std::optional<std::vector<double>> eta_discrete,
    std::optional<Vector> box_lo, std::optional<Vector> box_hi, double delta,
    int grid, bool squared_integrand) {
  DiscountConfig cfg;
  cfg.u_x = u_x;
  cfg.u_y = u_y;
  cfg.alpha = alpha;
  cfg.tau = tau;
  cfg.epsilon = epsilon;
  cfg.max_iters = max_iters;
  cfg.init_noise_std = init_noise_std;
  cfg.seed = seed;
  cfg.ucl = make_ucl_config(delta, grid, squared_integrand);
  if (eta_interval && eta_discrete) {
    throw std::invalid_argument("pass either eta_interval or eta_discrete");
  }
  if (eta_interval) {
    const auto& [lo, hi, kappa] = *eta_interval;
    cfg.eta_schedule = EtaIntervalSchedule{lo, hi, kappa};
  } else if (eta_discrete) {
    cfg.eta_schedule = EtaDiscreteSchedule{*eta_discrete};
  }
  if (box_lo.has_value() != box_hi.has_value()) {
    throw std::invalid_argument("pass both box_lo and box_hi or neither");
  }
  if (box_lo) cfg.box = Box{*box_lo, *box_hi};
  return discount_run(EmpiricalSample(factual), target, *model,
                      as_projection_set(directions), cfg);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributional counterfactual explanations: sliced-Wasserstein "
            "distances, quantile confidence limits, and the block-coordinate "
            "counterfactual optimizer.";

  // ---- transport primitives -------------------------------------------
  m.def(
      "sample_projections",
      [](Index d, Index count, std::uint64_t seed) {
        return sample_projections(d, count, seed).directions;
      },
      py::arg("d"), py::arg("count"), py::arg("seed") = 0,
      "Uniform unit directions on the (d-1)-sphere, one per row.");

  m.def("wasserstein1d_sq", &wasserstein1d_sq, py::arg("a"), py::arg("b"),
        "Exact squared 2-Wasserstein distance between 1-D samples.");

  m.def(
      "sliced_wasserstein_sq",
      [](const Matrix& x, const Matrix& x_prime, const Matrix& directions) {
        return sliced_wasserstein_sq(EmpiricalSample(x),
                                     EmpiricalSample(x_prime),
                                     as_projection_set(directions));
      },
      py::arg("x"), py::arg("x_prime"), py::arg("directions"),
      "Monte Carlo sliced squared Wasserstein distance.");

  m.def(
      "monotone_plan",
      [](const Vector& a, const Vector& b) {
        return monotone_plan(a, b).weights;
      },
      py::arg("a"), py::arg("b"),
      "Optimal 1-D coupling with uniform marginals.");

  m.def(
      "lp_ot_oracle",
      [](const Vector& a, const Vector& b) {
        auto [cost, plan] = lp_ot_oracle(a, b);
        return py::make_tuple(cost, plan.weights);
      },
      py::arg("a"), py::arg("b"),
      "Exact assignment-based transport cost for samples of at most 8 points.");

  // ---- confidence limits ----------------------------------------------
  m.def(
      "band_beta",
      [](double alpha, Index n, Index bonferroni) {
        return BandSpec(alpha, n, bonferroni).beta;
      },
      py::arg("alpha"), py::arg("n"), py::arg("bonferroni") = 1,
      "DKW quantile band half-width.");

  m.def(
      "ucl_w2",
      [](const Vector& y, const Vector& y_star, double alpha, double delta,
         int grid, bool squared) {
        return ucl_w2(y, y_star, BandSpec(alpha, y.size()),
                      make_ucl_config(delta, grid, squared));
      },
      py::arg("y"), py::arg("y_star"), py::arg("alpha") = 0.1,
      py::arg("delta") = 0.05, py::arg("grid") = 1000,
      py::arg("squared") = true,
      "Upper confidence limit for the squared 1-D Wasserstein distance.");

  m.def(
      "ucl_sw2",
      [](const Matrix& x, const Matrix& x_prime, const Matrix& directions,
         double alpha, double delta, int grid, bool squared) {
        return ucl_sw2(EmpiricalSample(x), EmpiricalSample(x_prime),
                       as_projection_set(directions),
                       BandSpec(alpha, x.rows()),
                       make_ucl_config(delta, grid, squared));
      },
      py::arg("x"), py::arg("x_prime"), py::arg("directions"),
      py::arg("alpha") = 0.1, py::arg("delta") = 0.05, py::arg("grid") = 1000,
      py::arg("squared") = true,
      "Upper confidence limit for the sliced squared Wasserstein distance.");

  m.def("eta_balance", &eta_balance, py::arg("gap_x"), py::arg("gap_y"),
        "Objective weight balancing the two constraint gaps.");

  // ---- models -----------------------------------------------------------
  py::class_<Model, ModelPtr>(m, "Model")
      .def_property_readonly("input_dim", &Model::input_dim)
      .def_property_readonly("kind", &Model::kind)
      .def("predict", &Model::predict, py::arg("x"))
      .def("input_gradient", &Model::input_gradient, py::arg("x"))
      .def(
          "save",
          [](const Model& model, const std::string& path) {
            save_model(model, path);
          },
          py::arg("path"));

  m.def(
      "train_model",
      [](const std::string& kind, const Matrix& x, const Vector& labels,
         int epochs, double lr, std::uint64_t seed, std::vector<Index> hidden,
         const std::string& activation, Index centers) {
        ModelSpec spec;
        spec.kind = kind;
        spec.hidden = std::move(hidden);
        spec.activation = activation;
        spec.rbf_centers = centers;
        auto result = train(spec, x, labels, epochs, lr, seed);
        return py::make_tuple(result.model, result.final_loss);
      },
      py::arg("kind"), py::arg("x"), py::arg("labels"), py::arg("epochs") = 500,
      py::arg("lr") = 0.1, py::arg("seed") = 0,
      py::arg("hidden") = std::vector<Index>{16},
      py::arg("activation") = "tanh", py::arg("centers") = 8,
      "Fit a built-in model by full-batch gradient descent; returns "
      "(model, final_loss).");

  m.def("load_model", &load_model, py::arg("path"));

  m.def(
      "external_model",
      [](const std::string& command, int timeout_ms) -> ModelPtr {
        return std::make_shared<ExternalModel>(command, timeout_ms);
      },
      py::arg("command"), py::arg("timeout_ms") = 30000,
      "Attach a model served by a child process over stdio JSON.");

  // ---- optimizer ---------------------------------------------------------
  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("t", &IterationRecord::t)
      .def_readonly("ucl_sw2", &IterationRecord::ucl_sw2)
      .def_readonly("ucl_w2", &IterationRecord::ucl_w2)
      .def_readonly("eta", &IterationRecord::eta)
      .def_readonly("grad_norm", &IterationRecord::grad_norm)
      .def_readonly("q_value", &IterationRecord::q_value)
      .def_readonly("step_norm", &IterationRecord::step_norm);

  py::class_<DiscountResult>(m, "DiscountResult")
      .def_property_readonly(
          "status",
          [](const DiscountResult& r) { return to_string(r.status); })
      .def_property_readonly(
          "feasible",
          [](const DiscountResult& r) { return r.status == RunStatus::Feasible; })
      .def_property_readonly(
          "counterfactual",
          [](const DiscountResult& r) { return r.counterfactual.points; })
      .def_readonly("trace", &DiscountResult::trace)
      .def_readonly("final_ucl_sw2", &DiscountResult::final_ucl_sw2)
      .def_readonly("final_ucl_w2", &DiscountResult::final_ucl_w2)
      .def_readonly("abort_reason", &DiscountResult::abort_reason);

  m.def("discount_run", &run_discount, py::arg("factual"), py::arg("target"),
        py::arg("model"), py::arg("directions"), py::arg("ux"), py::arg("uy"),
        py::arg("alpha") = 0.1, py::arg("tau") = 0.05,
        py::arg("epsilon") = 1e-4, py::arg("max_iters") = 2000,
        py::arg("init_noise_std") = 0.1, py::arg("seed") = 0,
        py::arg("eta_interval") = std::nullopt,
        py::arg("eta_discrete") = std::nullopt,
        py::arg("box_lo") = std::nullopt, py::arg("box_hi") = std::nullopt,
        py::arg("delta") = 0.05, py::arg("grid") = 1000,
        py::arg("squared_integrand") = true,
        "Optimize a counterfactual sample under both confidence-limit "
        "constraints.");

  // ---- metrics ------------------------------------------------------------
  m.def("coverage", &coverage, py::arg("y"), py::arg("threshold") = 0.5);
  m.def(
      "mmd_sq",
      [](const Matrix& x, const Matrix& x_prime,
         std::optional<double> bandwidth) {
        return mmd_sq(x, x_prime, bandwidth);
      },
      py::arg("x"), py::arg("x_prime"), py::arg("bandwidth") = std::nullopt);
  m.def("diversity", &diversity, py::arg("x"));
  m.def("dpc", &dpc, py::arg("diversity"), py::arg("ot_proximity"),
        py::arg("coverage"));
  m.def("percentile_diffs", &percentile_diffs, py::arg("factual"),
        py::arg("counterfactual"), py::arg("levels"),
        py::arg("eps_floor") = 1e-6);

  // ---- data -----------------------------------------------------------------
  m.def(
      "make_synthetic_blobs",
      [](Index n, Index d, double separation, std::uint64_t seed) {
        auto [sample, labels] = make_synthetic_blobs(n, d, separation, seed);
        return py::make_tuple(sample.points, labels);
      },
      py::arg("n"), py::arg("d"), py::arg("separation") = 4.0,
      py::arg("seed") = 0,
      "Two Gaussian clusters with balanced labels; returns (points, labels).");

  py::register_exception<DiscountError>(m, "DiscountError");
}
