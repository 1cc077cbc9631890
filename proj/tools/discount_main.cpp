#include "discount/config.hpp"
#include "discount/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Distributional counterfactual explanations"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Optimize a counterfactual distribution");
  std::string config_path;
  run->add_option("--config", config_path, "Config file (JSON or TOML)")
      ->required();

  std::optional<double> alpha, ux, uy, tau;
  std::optional<long long> projections, seed, max_iters;
  std::optional<std::string> eta_schedule, out_dir;
  run->add_option("--alpha", alpha, "Significance level");
  run->add_option("--ux", ux, "Input-proximity bound U_x");
  run->add_option("--uy", uy, "Output-target bound U_y");
  run->add_option("--projections", projections, "Number of projections");
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--tau", tau, "Gradient step size");
  run->add_option("--max-iters", max_iters, "Iteration cap");
  run->add_option("--eta-schedule", eta_schedule,
                  "interval:l,r,kappa | discrete:v1,v2,...");
  run->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    discount::RunConfig config = discount::load_run_config(config_path);
    if (alpha) config.discount.alpha = *alpha;
    if (ux) config.discount.u_x = *ux;
    if (uy) config.discount.u_y = *uy;
    if (tau) config.discount.tau = *tau;
    if (projections) config.projections = *projections;
    if (seed) config.discount.seed = static_cast<std::uint64_t>(*seed);
    if (max_iters) config.discount.max_iters = static_cast<int>(*max_iters);
    if (eta_schedule) {
      config.discount.eta_schedule = discount::parse_eta_schedule(*eta_schedule);
    }
    if (out_dir) config.out_dir = *out_dir;
    config.validate();
    return discount::run_command(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
