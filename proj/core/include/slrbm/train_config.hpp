#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "slrbm/matrix.hpp"
#include "slrbm/rbm_model.hpp"

namespace slrbm {

// How the per-batch adjacency is built during training.
enum class GraphMode {
  None,        // plain RBM
  SignedLabel, // +/-1 from labels
  Knn,         // kNN over the batch visibles, labels unused
};

struct TrainConfig {
  GraphMode graph = GraphMode::SignedLabel;
  double lambda = 1e-2;
  double eta = 1e-2;
  Index batch_size = 100;
  Index epochs = 100;
  int cd_k = 1;
  double weight_decay = 1e-4;
  std::uint64_t seed = 42;
  Index n_hidden = 128;
  DeltaSource delta_source = DeltaSource::MeanField;
  bool delta_in_negative_phase = true;
  int knn_neighbors = 5;
  double knn_kernel_width = 0.0; // 0 selects binary weights
};

// "rbm", "slrbm" or "graphrbm".
std::string model_name(GraphMode mode);
GraphMode graph_mode_from_name(const std::string& name);

// Text round trip used by the checkpoint config echo and the run manifest.
// Doubles are printed with 17 significant digits so parsing them back
// recovers the exact bits.
std::string format_double(double value);
std::vector<std::pair<std::string, std::string>> to_key_values(const TrainConfig& config);
TrainConfig config_from_key_values(
    const std::vector<std::pair<std::string, std::string>>& items);
std::string encode_config(const TrainConfig& config);
TrainConfig decode_config(const std::string& text);

}  // namespace slrbm
