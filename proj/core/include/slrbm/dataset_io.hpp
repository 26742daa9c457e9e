#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slrbm/matrix.hpp"
#include "slrbm/rbm_model.hpp"
#include "slrbm/train_config.hpp"

namespace slrbm {

// Decoded IDX image payload, pixels in row-major [image][row][col] order.
struct RawImages {
  Index count = 0;
  Index rows = 0;
  Index cols = 0;
  std::vector<std::uint8_t> pixels;
};

// IDX readers; gzip-compressed files are accepted transparently.
RawImages load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);

struct Dataset {
  Matrix images; // N x (rows*cols), entries 0.0 or 1.0
  std::vector<int> labels;
  std::string image_source;
  std::string label_source;
  int threshold = 127;
  std::optional<std::uint64_t> subset_seed;
  Index size() const { return images.rows(); }
  Index dim() const { return images.cols(); }
};

// pixel > threshold -> 1.
Matrix binarize(const RawImages& raw, int threshold);

Dataset load_dataset(const std::string& images_path, const std::string& labels_path,
                     int threshold = 127);

// Stratified subset: per_class examples of every distinct label, drawn
// without replacement, then shuffled. Same seed, same subset.
Dataset subset_per_class(const Dataset& dataset, Index per_class, std::uint64_t seed);

struct Checkpoint {
  RbmParams params;
  TrainConfig config;
};

// Fixed binary layout: magic "SLRBMCK1", little-endian u32 dims, W row-major
// then b then c as little-endian doubles, then a length-prefixed text echo of
// the training config. Round trips bit-exactly.
void save_checkpoint(const RbmParams& params, const TrainConfig& config,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace slrbm
