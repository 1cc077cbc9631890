#include "discount/run.hpp"

#include "discount/data.hpp"
#include "helpers.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace discount;
using discount::testing::scratch_dir;

namespace {

RunConfig blobs_config(const std::string& out_dir) {
  nlohmann::json doc{
      {"data", {{"synthetic", {{"n", 1000}, {"d", 2}, {"separation", 4.0}}}}},
      {"model", {{"train", {{"kind", "logistic"}, {"epochs", 150}, {"lr", 0.5}}}}},
      {"target", {{"constant", 1.0}}},
      {"bounds", {{"ux", 2.0}, {"uy", 0.5}}},
      {"seed", 21},
      {"projections", 10},
      {"factual_size", 100},
      {"max_iters", 4000},
      {"tau", 10.0},
      {"eta", {{"discrete", {0.95}}}},
      {"ucl", {{"squared", false}}},
      {"out", out_dir}};
  return run_config_from_json(doc);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("run_command: feasible blobs run emits the full artifact set") {
  const auto dir = scratch_dir("run_ok");
  const auto out = (dir / "out").string();
  const int status = run_command(blobs_config(out));
  CHECK(status == 0);

  for (const char* name : {"report.json", "trace.csv", "quantiles.csv",
                           "plan_mu.csv", "plan_nu.csv", "counterfactual.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(std::filesystem::path(out) / name),
                  name);
  }

  const auto report = nlohmann::json::parse(slurp(
      std::filesystem::path(out) / "report.json"));
  CHECK(report["status"] == "feasible");
  CHECK(report["final_ucls"]["sw2"].get<double>() <= 2.0);
  CHECK(report["final_ucls"]["w2"].get<double>() <= 0.5);
  CHECK(report["metrics"]["coverage"].get<double>() >= 0.8);
  CHECK(report["config"]["resolved"]["test_accuracy"].get<double>() >= 0.9);

  // plan_mu entries are a normalized distribution.
  {
    std::ifstream plan(std::filesystem::path(out) / "plan_mu.csv");
    std::string line;
    std::getline(plan, line);
    CHECK(line == "i,j,weight");
    double total = 0.0;
    while (std::getline(plan, line)) {
      const auto last = line.rfind(',');
      total += std::stod(line.substr(last + 1));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }

  // Emitted quantile curves are nondecreasing within each series.
  {
    std::ifstream quantiles(std::filesystem::path(out) / "quantiles.csv");
    std::string line;
    std::getline(quantiles, line);
    std::string previous_key;
    double previous_value = 0.0;
    while (std::getline(quantiles, line)) {
      std::istringstream row(line);
      std::string series, component, level, value;
      std::getline(row, series, ',');
      std::getline(row, component, ',');
      std::getline(row, level, ',');
      std::getline(row, value, ',');
      const std::string key = series + "/" + component;
      const double v = std::stod(value);
      if (key == previous_key) CHECK(v >= previous_value - 1e-12);
      previous_key = key;
      previous_value = v;
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_command: impossible bounds exit with the infeasible code") {
  const auto dir = scratch_dir("run_infeasible");
  const auto out = (dir / "out").string();
  RunConfig config = blobs_config(out);
  config.discount.u_x = 0.0;
  config.discount.u_y = 0.0;
  config.discount.max_iters = 30;
  const int status = run_command(config);
  CHECK(status == 2);
  CHECK(std::filesystem::exists(std::filesystem::path(out) / "report.json"));
  CHECK(!std::filesystem::exists(std::filesystem::path(out) /
                                 "counterfactual.csv"));
  const auto report =
      nlohmann::json::parse(slurp(std::filesystem::path(out) / "report.json"));
  CHECK(report["status"] == "infeasible");
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_command: identical config and seed give identical bytes") {
  const auto dir = scratch_dir("run_det");
  const auto out_a = (dir / "a").string();
  const auto out_b = (dir / "b").string();
  RunConfig config = blobs_config(out_a);
  const int status_a = run_command(config);
  config.out_dir = out_b;
  const int status_b = run_command(config);
  CHECK(status_a == status_b);
  CHECK(status_a == 0);

  for (const char* name : {"trace.csv", "counterfactual.csv"}) {
    CHECK_MESSAGE(slurp(std::filesystem::path(out_a) / name) ==
                      slurp(std::filesystem::path(out_b) / name),
                  name);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_command: csv data source with a trained mlp") {
  const auto dir = scratch_dir("run_csv");
  const auto csv_path = (dir / "data.csv").string();
  {
    auto [sample, labels] = make_synthetic_blobs(300, 2, 4.0, 33);
    std::ofstream out(csv_path);
    out << "x0,x1,group,label\n";
    for (Index i = 0; i < sample.size(); ++i) {
      out << sample.points(i, 0) << ',' << sample.points(i, 1) << ','
          << (i % 2 == 0 ? "even" : "odd") << ',' << labels[i] << "\n";
    }
  }
  nlohmann::json doc{
      {"data", {{"csv", {{"path", csv_path}, {"label", "label"}}}}},
      {"model",
       {{"train", {{"kind", "mlp"}, {"hidden", {8}}, {"epochs", 600}, {"lr", 0.5}}}}},
      {"target", {{"beta", {{"a", 8.0}, {"b", 2.0}}}}},
      {"bounds", {{"ux", 3.0}, {"uy", 1.0}}},
      {"seed", 5},
      {"projections", 8},
      {"factual_size", 40},
      {"max_iters", 300},
      {"out", (dir / "out").string()}};
  const int status = run_command(run_config_from_json(doc));
  CHECK((status == 0 || status == 2));  // optimization outcome may vary
  CHECK(std::filesystem::exists(dir / "out" / "report.json"));

  // One-hot group decoded back to category labels on export.
  if (status == 0) {
    std::ifstream cf(dir / "out" / "counterfactual.csv");
    std::string header;
    std::getline(cf, header);
    CHECK(header.find("group") != std::string::npos);
    std::string row;
    std::getline(cf, row);
    const bool has_label = row.find("even") != std::string::npos ||
                           row.find("odd") != std::string::npos;
    CHECK(has_label);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_command: malformed config surfaces as an error exit") {
  nlohmann::json doc{{"data", {{"synthetic", {{"n", 100}}}}},
                     {"model", {{"train", nlohmann::json::object()}}},
                     {"target", {{"constant", 1.0}}}};
  RunConfig config = run_config_from_json(doc);
  const auto dir = scratch_dir("blocked");
  {
    std::ofstream file(dir / "occupied");
    file << "x";
  }
  config.out_dir = (dir / "occupied" / "out").string();  // path through a file
  const int status = run_command(config);
  CHECK(status == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli binary: full command line round trip") {
  const auto dir = scratch_dir("cli");
  const auto config_path = (dir / "run.toml").string();
  const auto out = (dir / "out").string();
  {
    std::ofstream cfg(config_path);
    cfg << "seed = 3\n"
           "projections = 10\n"
           "factual_size = 100\n"
           "max_iters = 4000\n"
           "tau = 10.0\n"
           "[data.synthetic]\n"
           "n = 1000\n"
           "d = 2\n"
           "separation = 4.0\n"
           "[model.train]\n"
           "kind = \"logistic\"\n"
           "epochs = 150\n"
           "lr = 0.5\n"
           "[target]\n"
           "constant = 1.0\n"
           "[bounds]\n"
           "ux = 2.0\n"
           "uy = 0.5\n"
           "[ucl]\n"
           "squared = false\n";
  }
  const std::string command = std::string(DISCOUNT_CLI_PATH) +
                              " run --config " + config_path + " --out " + out +
                              " --eta-schedule discrete:0.95 --seed 3";
  const int status = std::system(command.c_str());
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(std::filesystem::exists(std::filesystem::path(out) / "report.json"));

  const int bad = std::system(
      (std::string(DISCOUNT_CLI_PATH) + " run --config /missing.json 2>/dev/null")
          .c_str());
  CHECK(WIFEXITED(bad));
  CHECK(WEXITSTATUS(bad) == 1);
  std::filesystem::remove_all(dir);
}
