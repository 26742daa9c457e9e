#include "slrbm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "slrbm/signed_graph.hpp"

namespace slrbm {

namespace {

// Stream tags for derive_seed, so shuffling, initialization and Gibbs noise
// never share a stream.
constexpr std::uint64_t kInitTag = 0x11;
constexpr std::uint64_t kShuffleTag = 0x22;
constexpr std::uint64_t kGibbsTag = 0x33;

Matrix batch_adjacency(const Matrix& visible, const std::vector<int>& labels,
                       const TrainConfig& config) {
  switch (config.graph) {
    case GraphMode::None:
      return Matrix();
    case GraphMode::SignedLabel:
      return build_signed_adjacency(labels).phi;
    case GraphMode::Knn: {
      // A short final batch may have fewer rows than neighbors requested.
      const int neighbors = static_cast<int>(
          std::min<Index>(config.knn_neighbors, visible.rows() - 1));
      if (neighbors < 1) return Matrix::Zero(visible.rows(), visible.rows());
      const KnnWeighting weighting =
          config.knn_kernel_width > 0.0 ? KnnWeighting::heat(config.knn_kernel_width)
                                        : KnnWeighting::binary();
      return build_knn_adjacency(visible, neighbors, weighting).phi;
    }
  }
  throw std::invalid_argument("unknown graph mode");
}

void check_finite(const Gradient& gradient) {
  if (!gradient.d_weights.allFinite() || !gradient.d_visible_bias.allFinite() ||
      !gradient.d_hidden_bias.allFinite())
    throw std::runtime_error("diverged");
}

}  // namespace

CdStats cd_gradient(const RbmParams& params, BatchState& batch,
                    const TrainConfig& config, Rng& rng) {
  const Index b = batch.size();
  if (b == 0) throw std::runtime_error("empty dataset");
  if (batch.visible.cols() != params.n_visible())
    throw std::invalid_argument("dimension mismatch");
  if (config.cd_k < 1) throw std::invalid_argument("cd_k must be positive");
  const bool coupled = config.lambda != 0.0;
  if (coupled && !batch.has_graph())
    throw std::runtime_error("signed graph requires labels");

  // Data phase. The coupling offsets need a hidden state, so the plain
  // activations serve as a first mean-field pass that the offsets then
  // correct once.
  Matrix act0 = batch.visible * params.weights.transpose();
  act0.rowwise() += params.hidden_bias.transpose();
  Matrix h0 = act0.unaryExpr([](double x) { return logistic(x); });
  Matrix delta0;
  if (coupled) {
    batch.hidden_prob = h0;
    if (config.delta_source == DeltaSource::Sample)
      batch.hidden_sample = sample_bernoulli(h0, rng);
    delta0 = delta_term_all(batch, config.lambda, config.delta_source);
    h0 = (act0 - delta0).unaryExpr([](double x) { return logistic(x); });
  }
  batch.hidden_prob = h0;
  batch.hidden_sample = sample_bernoulli(h0, rng);

  // Gibbs chain.
  Matrix h_prob = batch.hidden_prob;
  Matrix h_sample = batch.hidden_sample;
  Matrix v_sample = batch.visible;
  Matrix v_prob;
  for (int step = 0; step < config.cd_k; ++step) {
    v_prob = visible_conditional_batch(params, h_sample);
    v_sample = sample_bernoulli(v_prob, rng);
    Matrix act = v_sample * params.weights.transpose();
    act.rowwise() += params.hidden_bias.transpose();
    if (coupled && config.delta_in_negative_phase) {
      BatchState chain;
      chain.visible = v_sample;
      chain.hidden_prob = h_prob;
      chain.hidden_sample = h_sample;
      chain.phi = batch.phi;
      act -= delta_term_all(chain, config.lambda, config.delta_source);
    }
    h_prob = act.unaryExpr([](double x) { return logistic(x); });
    if (step + 1 < config.cd_k) h_sample = sample_bernoulli(h_prob, rng);
  }

  CdStats stats;
  const double scale = 1.0 / static_cast<double>(b);
  stats.gradient.d_weights =
      scale * (batch.hidden_prob.transpose() * batch.visible -
               h_prob.transpose() * v_sample);
  stats.gradient.d_visible_bias =
      scale * (batch.visible - v_sample).colwise().sum().transpose();
  stats.gradient.d_hidden_bias =
      scale * (batch.hidden_prob - h_prob).colwise().sum().transpose();
  stats.reconstruction_error =
      (batch.visible - v_prob).cwiseAbs().sum() /
      static_cast<double>(b * batch.visible.cols());
  if (batch.has_graph()) {
    Adjacency adj;
    adj.phi = batch.phi;
    stats.smoothness = smoothness(batch.hidden_prob.transpose(), adj);
  }
  check_finite(stats.gradient);
  return stats;
}

RbmParams apply_update(const RbmParams& params, const Gradient& gradient,
                       const TrainConfig& config) {
  RbmParams next = params;
  next.weights += config.eta * (gradient.d_weights - config.weight_decay * params.weights);
  next.visible_bias += config.eta * gradient.d_visible_bias;
  next.hidden_bias += config.eta * gradient.d_hidden_bias;
  if (!next.weights.allFinite() || !next.visible_bias.allFinite() ||
      !next.hidden_bias.allFinite())
    throw std::runtime_error("diverged");
  return next;
}

std::pair<RbmParams, TrainReport> train(const Dataset& data, const TrainConfig& config) {
  const Index n_examples = data.size();
  if (n_examples == 0) throw std::runtime_error("empty dataset");
  if (config.batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (config.batch_size > n_examples)
    throw std::invalid_argument("batch size exceeds dataset size");
  if (config.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (config.graph == GraphMode::SignedLabel &&
      data.labels.size() != static_cast<std::size_t>(n_examples))
    throw std::runtime_error("signed graph requires labels");

  RbmParams params =
      init_params(config.n_hidden, data.dim(), derive_seed(config.seed, kInitTag));
  TrainReport report;

  std::vector<Index> order(static_cast<std::size_t>(n_examples));
  std::iota(order.begin(), order.end(), Index{0});

  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Rng shuffle_rng(derive_seed(config.seed, kShuffleTag, static_cast<std::uint64_t>(epoch)));
    shuffle(order, shuffle_rng);

    double recon_sum = 0.0;
    double smooth_sum = 0.0;
    Index batch_count = 0;
    for (Index begin = 0; begin < n_examples; begin += config.batch_size) {
      const Index size = std::min(config.batch_size, n_examples - begin);
      BatchState batch;
      batch.visible.resize(size, data.dim());
      batch.labels.resize(static_cast<std::size_t>(size));
      for (Index row = 0; row < size; ++row) {
        const Index src = order[static_cast<std::size_t>(begin + row)];
        batch.visible.row(row) = data.images.row(src);
        if (!data.labels.empty())
          batch.labels[static_cast<std::size_t>(row)] =
              data.labels[static_cast<std::size_t>(src)];
      }
      batch.phi = batch_adjacency(batch.visible, batch.labels, config);

      Rng gibbs_rng(derive_seed(config.seed, kGibbsTag,
                                static_cast<std::uint64_t>(epoch),
                                static_cast<std::uint64_t>(batch_count)));
      const CdStats stats = cd_gradient(params, batch, config, gibbs_rng);
      params = apply_update(params, stats.gradient, config);

      recon_sum += stats.reconstruction_error * static_cast<double>(size);
      smooth_sum += stats.smoothness;
      ++batch_count;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.reconstruction_error = recon_sum / static_cast<double>(n_examples);
    record.smoothness = smooth_sum / static_cast<double>(batch_count);
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(record);
  }
  return {std::move(params), std::move(report)};
}

void write_report_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file: " + path);
  out << "epoch,reconstruction_error,smoothness,seconds\n";
  for (const EpochRecord& record : report.epochs)
    out << record.epoch << ',' << format_double(record.reconstruction_error) << ','
        << format_double(record.smoothness) << ',' << format_double(record.seconds)
        << '\n';
  if (!out) throw std::runtime_error("cannot write file: " + path);
}

}  // namespace slrbm
