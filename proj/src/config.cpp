#include "discount/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace discount {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

[[noreturn]] void toml_fail(const std::string& origin, std::size_t line,
                            const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::vector<std::string> split_keys(const std::string& path,
                                    const std::string& origin,
                                    std::size_t line) {
  std::vector<std::string> keys;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      if (trim(cur).empty()) toml_fail(origin, line, "empty key segment");
      keys.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (trim(cur).empty()) toml_fail(origin, line, "empty key segment");
  keys.push_back(trim(cur));
  return keys;
}

nlohmann::json* ensure_path(nlohmann::json& root,
                            const std::vector<std::string>& keys) {
  nlohmann::json* node = &root;
  for (const auto& key : keys) {
    if (!node->is_object()) return nullptr;
    node = &(*node)[key];
    if (node->is_null()) *node = nlohmann::json::object();
  }
  return node;
}

std::string parse_basic_string(const std::string& text,
                               const std::string& origin, std::size_t line) {
  if (text.size() < 2 || text.back() != '"') {
    toml_fail(origin, line, "unterminated string");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < text.size(); ++i) {
    char c = text[i];
    if (c == '\\' && i + 2 < text.size()) {
      const char esc = text[++i];
      switch (esc) {
        case 'n': c = '\n'; break;
        case 't': c = '\t'; break;
        case 'r': c = '\r'; break;
        case '"': c = '"'; break;
        case '\\': c = '\\'; break;
        default:
          toml_fail(origin, line, std::string("unsupported escape \\") + esc);
      }
    }
    out.push_back(c);
  }
  return out;
}

nlohmann::json parse_scalar(const std::string& raw, const std::string& origin,
                            std::size_t line) {
  const std::string text = trim(raw);
  if (text.empty()) toml_fail(origin, line, "missing value");
  if (text.front() == '"') return parse_basic_string(text, origin, line);
  if (text == "true") return true;
  if (text == "false") return false;

  long long integer = 0;
  auto int_result =
      std::from_chars(text.data(), text.data() + text.size(), integer);
  if (int_result.ec == std::errc{} &&
      int_result.ptr == text.data() + text.size()) {
    return integer;
  }
  double real = 0.0;
  auto real_result =
      std::from_chars(text.data(), text.data() + text.size(), real);
  if (real_result.ec == std::errc{} &&
      real_result.ptr == text.data() + text.size()) {
    return real;
  }
  toml_fail(origin, line, "cannot parse value: " + text);
}

nlohmann::json parse_value(const std::string& raw, const std::string& origin,
                           std::size_t line) {
  const std::string text = trim(raw);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') toml_fail(origin, line, "unterminated array");
    nlohmann::json arr = nlohmann::json::array();
    std::string body = text.substr(1, text.size() - 2);
    std::string item;
    bool in_string = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
      const char c = body[i];
      if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
      if (c == ',' && !in_string) {
        if (!trim(item).empty()) arr.push_back(parse_scalar(item, origin, line));
        item.clear();
      } else {
        item.push_back(c);
      }
    }
    if (!trim(item).empty()) arr.push_back(parse_scalar(item, origin, line));
    return arr;
  }
  return parse_scalar(text, origin, line);
}

}  // namespace

nlohmann::json parse_toml(std::istream& in, const std::string& origin) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* current = &root;

  std::string line;
  std::size_t lineno = 0;
  std::string pending;  // continuation buffer for multiline arrays
  std::size_t pending_line = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string text = trim(strip_comment(line));
    if (!pending.empty()) {
      pending += " " + text;
      const auto opens = std::count(pending.begin(), pending.end(), '[');
      const auto closes = std::count(pending.begin(), pending.end(), ']');
      if (closes < opens) continue;
      text = pending;
      pending.clear();
    } else if (text.empty()) {
      continue;
    }

    if (text.front() == '[') {
      if (text.back() != ']') toml_fail(origin, lineno, "malformed table header");
      const auto keys = split_keys(text.substr(1, text.size() - 2), origin, lineno);
      current = ensure_path(root, keys);
      if (current == nullptr) {
        toml_fail(origin, lineno, "table path conflicts with existing value");
      }
      continue;
    }

    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      toml_fail(origin, lineno, "expected key = value");
    }
    const std::string value_text = trim(text.substr(eq + 1));
    if (!value_text.empty() && value_text.front() == '[' &&
        std::count(value_text.begin(), value_text.end(), ']') <
            std::count(value_text.begin(), value_text.end(), '[')) {
      pending = text;
      pending_line = lineno;
      continue;
    }

    const auto keys = split_keys(text.substr(0, eq), origin, lineno);
    nlohmann::json* slot = current;
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
      slot = ensure_path(*slot, {keys[i]});
      if (slot == nullptr) {
        toml_fail(origin, lineno, "key path conflicts with existing value");
      }
    }
    (*slot)[keys.back()] = parse_value(value_text, origin,
                                       pending_line ? pending_line : lineno);
    pending_line = 0;
  }
  if (!pending.empty()) toml_fail(origin, pending_line, "unterminated array");
  return root;
}

nlohmann::json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  const bool is_toml =
      path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
  if (is_toml) return parse_toml(in, path);
  try {
    nlohmann::json doc;
    in >> doc;
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config file " + path + ": " + e.what());
  }
}

namespace {

template <typename T>
T value_or(const nlohmann::json& doc, const std::string& key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

}  // namespace

EtaSchedule parse_eta_schedule(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string args =
      colon == std::string::npos ? std::string{} : text.substr(colon + 1);

  std::vector<double> numbers;
  std::stringstream stream(args);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (trim(item).empty()) continue;
    numbers.push_back(std::stod(trim(item)));
  }

  if (kind == "interval") {
    EtaIntervalSchedule interval;
    if (numbers.size() != 3) {
      throw ConfigError("interval schedule expects interval:l,r,kappa");
    }
    interval.lo = numbers[0];
    interval.hi = numbers[1];
    interval.kappa = numbers[2];
    interval.validate();
    return interval;
  }
  if (kind == "discrete") {
    EtaDiscreteSchedule discrete;
    if (numbers.empty()) {
      throw ConfigError("discrete schedule expects discrete:v1,v2,...");
    }
    discrete.candidates = std::move(numbers);
    discrete.validate();
    return discrete;
  }
  throw ConfigError("unknown eta schedule kind: " + kind);
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  cfg.echo = doc;

  if (!doc.contains("data") || !doc["data"].is_object()) {
    throw ConfigError("config needs a data section");
  }
  const auto& data = doc["data"];
  const bool has_csv = data.contains("csv");
  const bool has_synth = data.contains("synthetic");
  if (has_csv == has_synth) {
    throw ConfigError("data section must name exactly one of csv | synthetic");
  }
  if (has_csv) {
    const auto& csv = data["csv"];
    CsvSpec spec;
    spec.path = csv.at("path").get<std::string>();
    spec.label = value_or<std::string>(csv, "label", "label");
    spec.categorical_hints =
        value_or<std::vector<std::string>>(csv, "categorical", {});
    cfg.data = std::move(spec);
  } else {
    const auto& synth = data["synthetic"];
    SyntheticSpec spec;
    spec.n = value_or<Index>(synth, "n", spec.n);
    spec.d = value_or<Index>(synth, "d", spec.d);
    spec.separation = value_or<double>(synth, "separation", spec.separation);
    cfg.data = spec;
  }

  if (!doc.contains("model") || !doc["model"].is_object()) {
    throw ConfigError("config needs a model section");
  }
  const auto& model = doc["model"];
  const int sources = static_cast<int>(model.contains("path")) +
                      static_cast<int>(model.contains("train")) +
                      static_cast<int>(model.contains("command"));
  if (sources != 1) {
    throw ConfigError("model section must name exactly one of path | train | command");
  }
  if (model.contains("path")) {
    cfg.model_path = model["path"].get<std::string>();
  } else if (model.contains("command")) {
    cfg.model_command = model["command"].get<std::string>();
    cfg.model_timeout_ms = value_or<int>(model, "timeout_ms", 30000);
  } else {
    const auto& train = model["train"];
    TrainSpec spec;
    spec.model.kind = value_or<std::string>(train, "kind", "logistic");
    spec.model.hidden = value_or<std::vector<Index>>(train, "hidden", {16});
    spec.model.activation = value_or<std::string>(train, "activation", "tanh");
    spec.model.rbf_centers = value_or<Index>(train, "centers", 8);
    spec.epochs = value_or<int>(train, "epochs", 500);
    spec.lr = value_or<double>(train, "lr", 0.1);
    cfg.model_train = std::move(spec);
  }

  if (!doc.contains("target") || !doc["target"].is_object()) {
    throw ConfigError("config needs a target section");
  }
  const auto& target = doc["target"];
  const int targets = static_cast<int>(target.contains("constant")) +
                      static_cast<int>(target.contains("file")) +
                      static_cast<int>(target.contains("beta"));
  if (targets != 1) {
    throw ConfigError("target section must name exactly one of constant | file | beta");
  }
  if (target.contains("constant")) {
    cfg.target = TargetConstant{target["constant"].get<double>()};
  } else if (target.contains("file")) {
    cfg.target = TargetFile{target["file"].get<std::string>()};
  } else {
    const auto& beta = target["beta"];
    TargetBeta spec;
    spec.a = value_or<double>(beta, "a", spec.a);
    spec.b = value_or<double>(beta, "b", spec.b);
    if (beta.contains("size")) spec.size = beta["size"].get<Index>();
    cfg.target = spec;
  }

  if (doc.contains("bounds")) {
    cfg.discount.u_x = value_or<double>(doc["bounds"], "ux", cfg.discount.u_x);
    cfg.discount.u_y = value_or<double>(doc["bounds"], "uy", cfg.discount.u_y);
  }
  cfg.discount.alpha = value_or<double>(doc, "alpha", cfg.discount.alpha);
  cfg.discount.tau = value_or<double>(doc, "tau", cfg.discount.tau);
  cfg.discount.epsilon = value_or<double>(doc, "epsilon", cfg.discount.epsilon);
  cfg.discount.max_iters = value_or<int>(doc, "max_iters", cfg.discount.max_iters);
  cfg.discount.init_noise_std =
      value_or<double>(doc, "init_noise_std", cfg.discount.init_noise_std);
  cfg.discount.seed = value_or<std::uint64_t>(doc, "seed", 0);

  if (doc.contains("eta")) {
    const auto& eta = doc["eta"];
    if (eta.contains("interval")) {
      EtaIntervalSchedule interval;
      interval.lo = value_or<double>(eta["interval"], "l", 0.0);
      interval.hi = value_or<double>(eta["interval"], "r", 1.0);
      interval.kappa = value_or<double>(eta["interval"], "kappa", 0.1);
      cfg.discount.eta_schedule = interval;
    } else if (eta.contains("discrete")) {
      EtaDiscreteSchedule discrete;
      discrete.candidates = eta["discrete"].get<std::vector<double>>();
      cfg.discount.eta_schedule = discrete;
    } else {
      throw ConfigError("eta section must name interval | discrete");
    }
  }

  if (doc.contains("ucl")) {
    cfg.discount.ucl.delta = value_or<double>(doc["ucl"], "delta", 0.05);
    cfg.discount.ucl.grid_size = value_or<int>(doc["ucl"], "grid", 1000);
    cfg.discount.ucl.squared_integrand =
        value_or<bool>(doc["ucl"], "squared", true);
  }

  cfg.projections = value_or<Index>(doc, "projections", cfg.projections);
  cfg.factual_size = value_or<Index>(doc, "factual_size", cfg.factual_size);
  cfg.out_dir = value_or<std::string>(doc, "out", cfg.out_dir);

  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  if (projections < 1) throw ConfigError("projections must be >= 1");
  if (factual_size < 1) throw ConfigError("factual_size must be >= 1");
  if (out_dir.empty()) throw ConfigError("output directory must be set");
  discount.validate();
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(read_config_file(path));
}

}  // namespace discount
