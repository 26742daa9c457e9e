#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slrbm/dataset_io.hpp"
#include "slrbm/matrix.hpp"
#include "slrbm/rbm_model.hpp"

namespace slrbm {

// Hidden codes for a dataset, one column per example.
struct Representations {
  Matrix codes; // n_hidden x N
  std::vector<int> labels;
  std::string source;
  Index size() const { return codes.cols(); }
};

enum class EncodeMode { Probability, Sample };

Representations encode(const RbmParams& params, const Dataset& data,
                       EncodeMode mode = EncodeMode::Probability,
                       std::uint64_t seed = 0);

struct KnnResult {
  std::vector<int> predictions;
  double error_rate = 0.0;
};

// k-NN in code space, squared Euclidean metric, majority vote with ties
// (vote ties and distance ties) broken toward the lowest training index.
KnnResult knn_classify(const Representations& train, const Representations& test,
                       int k = 1);

// Leave-one-out variant over a single set.
KnnResult knn_classify_loo(const Representations& data, int k = 1);

// CSV with header label,h0,...,h{n-1}; codes printed with 17 significant
// digits so a reader recovers the exact values.
void export_representations(const Representations& reprs, const std::string& path);

void write_error_summary_csv(const std::string& path, const std::string& model,
                             double lambda, double eta, std::uint64_t seed,
                             double error_rate);

}  // namespace slrbm
