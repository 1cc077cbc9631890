#include "discount/model.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <string>

// Serves a model over the stdio protocol used by the external-model
// adapter: one JSON request per line, one JSON response per line.
int main(int argc, char** argv) {
  CLI::App app{"Stdio model server"};
  std::string model_path;
  double constant = 0.5;
  long long dim = 1;
  long long die_after = -1;
  app.add_option("--model", model_path, "Serve a saved model file");
  app.add_option("--constant", constant, "Serve a constant prediction");
  app.add_option("--dim", dim, "Input dimension for the constant server");
  app.add_option("--die-after", die_after,
                 "Exit abruptly after this many predict requests");
  CLI11_PARSE(app, argc, argv);

  discount::ModelPtr model;
  if (!model_path.empty()) {
    try {
      model = discount::load_model(model_path);
    } catch (const std::exception& e) {
      std::cerr << "model server: " << e.what() << "\n";
      return 1;
    }
    dim = model->input_dim();
  }

  long long served = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    nlohmann::json request;
    try {
      request = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      std::cout << R"({"error":"bad request"})" << "\n" << std::flush;
      continue;
    }
    const std::string op = request.value("op", "");
    if (op == "hello") {
      std::cout << nlohmann::json{{"protocol", 1}, {"input_dim", dim}}.dump()
                << "\n"
                << std::flush;
      continue;
    }
    if (op == "predict") {
      if (die_after >= 0 && served >= die_after) return 3;
      ++served;
      const auto& rows = request["x"];
      nlohmann::json y = nlohmann::json::array();
      if (model) {
        discount::Matrix x(rows.size(), dim);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          for (long long j = 0; j < dim; ++j) {
            x(static_cast<discount::Index>(i), j) =
                rows[i][static_cast<std::size_t>(j)].get<double>();
          }
        }
        const discount::Vector out = model->predict(x);
        for (discount::Index i = 0; i < out.size(); ++i) y.push_back(out[i]);
      } else {
        for (std::size_t i = 0; i < rows.size(); ++i) y.push_back(constant);
      }
      std::cout << nlohmann::json{{"y", std::move(y)}}.dump() << "\n"
                << std::flush;
      continue;
    }
    std::cout << R"({"error":"unknown op"})" << "\n" << std::flush;
  }
  return 0;
}
