#include "slrbm/train_config.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace slrbm {

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

const char* delta_source_name(DeltaSource source) {
  return source == DeltaSource::MeanField ? "meanfield" : "sample";
}

DeltaSource delta_source_from_name(const std::string& name) {
  if (name == "meanfield") return DeltaSource::MeanField;
  if (name == "sample") return DeltaSource::Sample;
  throw std::invalid_argument("unknown delta source: " + name);
}

}  // namespace

std::string model_name(GraphMode mode) {
  switch (mode) {
    case GraphMode::None: return "rbm";
    case GraphMode::SignedLabel: return "slrbm";
    case GraphMode::Knn: return "graphrbm";
  }
  throw std::invalid_argument("unknown graph mode");
}

GraphMode graph_mode_from_name(const std::string& name) {
  if (name == "rbm") return GraphMode::None;
  if (name == "slrbm") return GraphMode::SignedLabel;
  if (name == "graphrbm") return GraphMode::Knn;
  throw std::invalid_argument("unknown model: " + name);
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const TrainConfig& c) {
  return {
      {"model", model_name(c.graph)},
      {"lambda", format_double(c.lambda)},
      {"eta", format_double(c.eta)},
      {"batch-size", std::to_string(c.batch_size)},
      {"epochs", std::to_string(c.epochs)},
      {"cd-k", std::to_string(c.cd_k)},
      {"weight-decay", format_double(c.weight_decay)},
      {"seed", std::to_string(c.seed)},
      {"n-hidden", std::to_string(c.n_hidden)},
      {"delta-source", delta_source_name(c.delta_source)},
      {"delta-negative", c.delta_in_negative_phase ? "true" : "false"},
      {"knn-p", std::to_string(c.knn_neighbors)},
      {"knn-rho", format_double(c.knn_kernel_width)},
  };
}

TrainConfig config_from_key_values(
    const std::vector<std::pair<std::string, std::string>>& items) {
  TrainConfig c;
  for (const auto& [key, value] : items) {
    if (key == "model") {
      c.graph = graph_mode_from_name(value);
    } else if (key == "lambda") {
      c.lambda = std::stod(value);
    } else if (key == "eta") {
      c.eta = std::stod(value);
    } else if (key == "batch-size") {
      c.batch_size = static_cast<Index>(std::stoll(value));
    } else if (key == "epochs") {
      c.epochs = static_cast<Index>(std::stoll(value));
    } else if (key == "cd-k") {
      c.cd_k = std::stoi(value);
    } else if (key == "weight-decay") {
      c.weight_decay = std::stod(value);
    } else if (key == "seed") {
      c.seed = std::stoull(value);
    } else if (key == "n-hidden") {
      c.n_hidden = static_cast<Index>(std::stoll(value));
    } else if (key == "delta-source") {
      c.delta_source = delta_source_from_name(value);
    } else if (key == "delta-negative") {
      if (value != "true" && value != "false")
        throw std::invalid_argument("delta-negative must be true or false");
      c.delta_in_negative_phase = value == "true";
    } else if (key == "knn-p") {
      c.knn_neighbors = std::stoi(value);
    } else if (key == "knn-rho") {
      c.knn_kernel_width = std::stod(value);
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  return c;
}

std::string encode_config(const TrainConfig& config) {
  std::string text;
  for (const auto& [key, value] : to_key_values(config)) {
    text += key;
    text += " = ";
    text += value;
    text += '\n';
  }
  return text;
}

TrainConfig decode_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> items;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed config line: " + line);
    items.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config_from_key_values(items);
}

}  // namespace slrbm
