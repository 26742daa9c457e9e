#include "slrbm/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "slrbm/train_config.hpp"

namespace slrbm {

namespace {

// Nearest training indices for one query, ordered by (distance, index).
std::vector<Index> nearest_k(const Vector& dists, int k, Index skip) {
  std::vector<Index> order(static_cast<std::size_t>(dists.size()));
  std::iota(order.begin(), order.end(), Index{0});
  if (skip >= 0) order.erase(order.begin() + skip);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](Index a, Index b) {
                      if (dists(a) != dists(b)) return dists(a) < dists(b);
                      return a < b;
                    });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

int vote(const std::vector<Index>& neighbors, const std::vector<int>& labels) {
  std::map<int, int> counts;
  for (Index t : neighbors) ++counts[labels[static_cast<std::size_t>(t)]];
  int best = 0;
  for (const auto& [label, count] : counts) best = std::max(best, count);
  // Among tied labels, the first voter in (distance, index) order wins.
  for (Index t : neighbors)
    if (counts[labels[static_cast<std::size_t>(t)]] == best)
      return labels[static_cast<std::size_t>(t)];
  throw std::logic_error("unreachable");
}

KnnResult classify(const Representations& train, const Representations& test,
                   int k, bool leave_one_out) {
  if (train.size() == 0 || test.size() == 0) throw std::runtime_error("empty dataset");
  if (train.codes.rows() != test.codes.rows())
    throw std::invalid_argument("dimension mismatch");
  if (train.labels.size() != static_cast<std::size_t>(train.size()))
    throw std::invalid_argument("labels missing");
  if (k < 1) throw std::invalid_argument("k must be positive");
  const Index limit = leave_one_out ? train.size() - 1 : train.size();
  if (k > limit) throw std::invalid_argument("too many neighbors");

  // Squared distances through the Gram matrix; one gemm instead of a loop.
  const Vector train_sq = train.codes.colwise().squaredNorm();
  const Vector test_sq = test.codes.colwise().squaredNorm();
  Matrix cross = train.codes.transpose() * test.codes; // train x test

  KnnResult result;
  result.predictions.resize(static_cast<std::size_t>(test.size()));
  Index errors = 0;
  for (Index q = 0; q < test.size(); ++q) {
    Vector dists = train_sq - 2.0 * cross.col(q);
    dists.array() += test_sq(q);
    const std::vector<Index> neighbors =
        nearest_k(dists, k, leave_one_out ? q : Index{-1});
    const int predicted = vote(neighbors, train.labels);
    result.predictions[static_cast<std::size_t>(q)] = predicted;
    if (predicted != test.labels[static_cast<std::size_t>(q)]) ++errors;
  }
  result.error_rate = static_cast<double>(errors) / static_cast<double>(test.size());
  return result;
}

}  // namespace

Representations encode(const RbmParams& params, const Dataset& data,
                       EncodeMode mode, std::uint64_t seed) {
  if (data.size() == 0) throw std::runtime_error("empty dataset");
  if (data.dim() != params.n_visible())
    throw std::invalid_argument("dimension mismatch");
  Matrix probs = hidden_conditional_batch(params, data.images, Matrix());
  Representations reprs;
  if (mode == EncodeMode::Sample) {
    Rng rng(seed);
    reprs.codes = sample_bernoulli(probs, rng).transpose();
  } else {
    reprs.codes = probs.transpose();
  }
  reprs.labels = data.labels;
  reprs.source = data.image_source;
  return reprs;
}

KnnResult knn_classify(const Representations& train, const Representations& test,
                       int k) {
  return classify(train, test, k, false);
}

KnnResult knn_classify_loo(const Representations& data, int k) {
  return classify(data, data, k, true);
}

void export_representations(const Representations& reprs, const std::string& path) {
  if (reprs.labels.size() != static_cast<std::size_t>(reprs.size()))
    throw std::invalid_argument("labels missing");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file: " + path);
  out << "label";
  for (Index l = 0; l < reprs.codes.rows(); ++l) out << ",h" << l;
  out << '\n';
  for (Index i = 0; i < reprs.size(); ++i) {
    out << reprs.labels[static_cast<std::size_t>(i)];
    for (Index l = 0; l < reprs.codes.rows(); ++l)
      out << ',' << format_double(reprs.codes(l, i));
    out << '\n';
  }
  if (!out) throw std::runtime_error("cannot write file: " + path);
}

void write_error_summary_csv(const std::string& path, const std::string& model,
                             double lambda, double eta, std::uint64_t seed,
                             double error_rate) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file: " + path);
  out << "model,lambda,eta,seed,error_rate\n";
  out << model << ',' << format_double(lambda) << ',' << format_double(eta) << ','
      << seed << ',' << format_double(error_rate) << '\n';
  if (!out) throw std::runtime_error("cannot write file: " + path);
}

}  // namespace slrbm
