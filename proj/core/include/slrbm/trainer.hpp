#pragma once

#include <string>
#include <utility>
#include <vector>

#include "slrbm/dataset_io.hpp"
#include "slrbm/matrix.hpp"
#include "slrbm/rbm_model.hpp"
#include "slrbm/rng.hpp"
#include "slrbm/train_config.hpp"

namespace slrbm {

struct EpochRecord {
  Index epoch = 0;
  double reconstruction_error = 0.0; // mean per-pixel |v - v_recon|
  double smoothness = 0.0;           // mean batch J of the data-phase codes
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::string checkpoint_path; // filled in once the params are persisted
};

struct CdStats {
  Gradient gradient;
  double reconstruction_error = 0.0;
  double smoothness = 0.0;
};

// One CD-k gradient estimate on a batch. The data phase writes hidden_prob /
// hidden_sample back into the batch; the chain applies the coupling offsets
// in the negative phase too unless configured otherwise.
CdStats cd_gradient(const RbmParams& params, BatchState& batch,
                    const TrainConfig& config, Rng& rng);

// Ascent step with L2 decay on the weights only:
// W += eta * (dW - weight_decay * W), biases += eta * d.
RbmParams apply_update(const RbmParams& params, const Gradient& gradient,
                       const TrainConfig& config);

// Full minibatch training loop. Deterministic for a fixed config and dataset:
// epoch shuffles and per-batch Gibbs noise use seeds derived from config.seed.
std::pair<RbmParams, TrainReport> train(const Dataset& data, const TrainConfig& config);

// CSV with header epoch,reconstruction_error,smoothness,seconds.
void write_report_csv(const TrainReport& report, const std::string& path);

}  // namespace slrbm
