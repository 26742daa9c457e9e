#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "slrbm/dataset_io.hpp"
#include "slrbm/rbm_model.hpp"
#include "slrbm/rng.hpp"
#include "slrbm/train_config.hpp"
#include "slrbm/trainer.hpp"

using namespace slrbm;

namespace {

RbmParams zero_params(Index n_hidden, Index n_visible) {
  RbmParams params;
  params.weights = Matrix::Zero(n_hidden, n_visible);
  params.visible_bias = Vector::Zero(n_visible);
  params.hidden_bias = Vector::Zero(n_hidden);
  return params;
}

Gradient zero_gradient(const RbmParams& params) {
  Gradient grad;
  grad.d_weights = Matrix::Zero(params.n_hidden(), params.n_visible());
  grad.d_visible_bias = Vector::Zero(params.n_visible());
  grad.d_hidden_bias = Vector::Zero(params.n_hidden());
  return grad;
}

BatchState binary_batch(Index b, Index m, Index n, Rng& rng, bool with_graph) {
  BatchState batch;
  batch.visible = Matrix(b, m);
  for (Index i = 0; i < b; ++i)
    for (Index r = 0; r < m; ++r) batch.visible(i, r) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  batch.hidden_prob = Matrix::Zero(b, n);
  batch.hidden_sample = Matrix::Zero(b, n);
  if (with_graph) {
    batch.phi = Matrix::Zero(b, b);
    for (Index i = 0; i < b; ++i)
      for (Index j = i + 1; j < b; ++j)
        batch.phi(i, j) = batch.phi(j, i) = rng.bernoulli(0.5) ? 1.0 : -1.0;
  }
  return batch;
}

Dataset fixture_subset(Index per_class, std::uint64_t seed) {
  const std::string dir = SLRBM_DATA_DIR;
  const Dataset full = load_dataset(dir + "/train-images-idx3-ubyte.gz",
                                    dir + "/train-labels-idx1-ubyte.gz");
  return subset_per_class(full, per_class, seed);
}

bool same_params(const RbmParams& a, const RbmParams& b) {
  return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
         (a.weights - b.weights).cwiseAbs().maxCoeff() == 0.0 &&
         (a.visible_bias - b.visible_bias).cwiseAbs().maxCoeff() == 0.0 &&
         (a.hidden_bias - b.hidden_bias).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

TEST_CASE("update rule decays weights only") {
  RbmParams params = zero_params(1, 1);
  params.weights(0, 0) = 1.0;
  params.visible_bias(0) = 2.0;
  params.hidden_bias(0) = -2.0;

  TrainConfig config;
  config.eta = 1e-2;
  config.weight_decay = 1e-4;

  const RbmParams still = apply_update(params, zero_gradient(params), config);
  CHECK(still.weights(0, 0) == doctest::Approx(0.999999).epsilon(1e-12));
  CHECK(still.visible_bias(0) == 2.0);
  CHECK(still.hidden_bias(0) == -2.0);

  Gradient grad = zero_gradient(params);
  grad.d_weights(0, 0) = 0.5;
  grad.d_visible_bias(0) = -1.0;
  grad.d_hidden_bias(0) = 0.25;
  const RbmParams moved = apply_update(params, grad, config);
  CHECK(moved.weights(0, 0) == doctest::Approx(1.0 + 1e-2 * (0.5 - 1e-4)).epsilon(1e-14));
  CHECK(moved.visible_bias(0) == doctest::Approx(2.0 - 1e-2).epsilon(1e-14));
  CHECK(moved.hidden_bias(0) == doctest::Approx(-2.0 + 2.5e-3).epsilon(1e-14));

  grad.d_weights(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(apply_update(params, grad, config), "diverged",
                       std::runtime_error);
}

TEST_CASE("cd gradient shapes and determinism") {
  Rng data_rng(11);
  const RbmParams params = init_params(4, 6, 77);
  TrainConfig config;
  config.lambda = 0.05;
  config.cd_k = 2;

  BatchState batch = binary_batch(5, 6, 4, data_rng, true);
  BatchState copy = batch;
  Rng rng_a(900), rng_b(900);
  const CdStats first = cd_gradient(params, batch, config, rng_a);
  const CdStats second = cd_gradient(params, copy, config, rng_b);

  CHECK(first.gradient.d_weights.rows() == 4);
  CHECK(first.gradient.d_weights.cols() == 6);
  CHECK(first.gradient.d_visible_bias.size() == 6);
  CHECK(first.gradient.d_hidden_bias.size() == 4);
  CHECK((first.gradient.d_weights - second.gradient.d_weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK(first.reconstruction_error == second.reconstruction_error);
  CHECK(first.smoothness == second.smoothness);
  CHECK(first.reconstruction_error >= 0.0);
  CHECK(first.reconstruction_error <= 1.0);

  // The data phase must leave its hidden state in the batch.
  CHECK(batch.hidden_prob.rows() == 5);
  CHECK(((batch.hidden_sample.array() == 0.0) || (batch.hidden_sample.array() == 1.0)).all());
}

TEST_CASE("saturated model is a fixed point of CD") {
  RbmParams params = zero_params(3, 4);
  params.visible_bias.setConstant(30.0);
  params.hidden_bias.setConstant(30.0);

  BatchState batch;
  batch.visible = Matrix::Ones(6, 4);
  TrainConfig config;
  config.lambda = 0.0;
  config.graph = GraphMode::None;

  Rng rng(3);
  const CdStats stats = cd_gradient(params, batch, config, rng);
  CHECK(stats.gradient.d_weights.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(stats.gradient.d_visible_bias.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(stats.gradient.d_hidden_bias.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(stats.reconstruction_error <= 1e-9);
}

TEST_CASE("visible bias gradient points at the data on average") {
  // Zero parameters, all-ones data: the chain resamples visibles fairly, so
  // E[d_visible_bias] = 1 - 0.5 per pixel.
  const RbmParams params = zero_params(2, 3);
  TrainConfig config;
  config.lambda = 0.0;
  config.graph = GraphMode::None;

  Vector mean_db = Vector::Zero(3);
  const int seeds = 200;
  for (int seed = 0; seed < seeds; ++seed) {
    BatchState batch;
    batch.visible = Matrix::Ones(4, 3);
    Rng rng(derive_seed(500, static_cast<std::uint64_t>(seed)));
    mean_db += cd_gradient(params, batch, config, rng).gradient.d_visible_bias;
  }
  mean_db /= static_cast<double>(seeds);
  for (Index r = 0; r < 3; ++r) CHECK(mean_db(r) == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("training is deterministic and honours the coupling switch") {
  const Dataset data = fixture_subset(20, 9); // 200 examples, 10 classes
  TrainConfig config;
  config.n_hidden = 12;
  config.epochs = 2;
  config.batch_size = 50;
  config.seed = 31;
  config.lambda = 1e-2;
  config.graph = GraphMode::SignedLabel;

  const auto [params_a, report_a] = train(data, config);
  const auto [params_b, report_b] = train(data, config);
  CHECK(same_params(params_a, params_b));
  REQUIRE(report_a.epochs.size() == 2);
  CHECK(report_a.epochs[0].reconstruction_error == report_b.epochs[0].reconstruction_error);
  CHECK(report_a.epochs[1].smoothness == report_b.epochs[1].smoothness);

  // lambda = 0 makes the graph inert: same parameters as the plain RBM.
  TrainConfig off = config;
  off.lambda = 0.0;
  TrainConfig plain = off;
  plain.graph = GraphMode::None;
  const auto [params_off, report_off] = train(data, off);
  const auto [params_plain, report_plain] = train(data, plain);
  CHECK(same_params(params_off, params_plain));
  CHECK_FALSE(same_params(params_off, params_a));
}

TEST_CASE("reconstruction improves and codes cluster by class") {
  const Dataset data = fixture_subset(50, 4); // 500 examples
  TrainConfig config;
  config.n_hidden = 32;
  config.epochs = 5;
  config.batch_size = 100;
  config.seed = 7;
  config.lambda = 1e-2;
  config.graph = GraphMode::SignedLabel;

  const auto [params, report] = train(data, config);
  REQUIRE(report.epochs.size() == 5);
  CHECK(report.epochs.back().reconstruction_error <
        report.epochs.front().reconstruction_error);
  // The regularizer drives the batch smoothness down.
  CHECK(report.epochs.back().smoothness < report.epochs.front().smoothness);
  for (const EpochRecord& record : report.epochs) CHECK(record.seconds >= 0.0);
}

TEST_CASE("training without epochs returns the initialization") {
  const Dataset data = fixture_subset(5, 2);
  TrainConfig config;
  config.n_hidden = 8;
  config.epochs = 0;
  config.batch_size = 10;
  config.graph = GraphMode::None;
  config.lambda = 0.0;

  const auto [params, report] = train(data, config);
  CHECK(report.epochs.empty());
  CHECK(params.n_hidden() == 8);
  CHECK(params.n_visible() == data.dim());
  CHECK(params.visible_bias.cwiseAbs().maxCoeff() == 0.0);
  CHECK(params.weights.cwiseAbs().maxCoeff() > 0.0);
  CHECK(params.weights.cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("trainer input validation") {
  const Dataset data = fixture_subset(2, 1); // 20 examples
  {
    TrainConfig config;
    config.batch_size = 100;
    CHECK_THROWS_WITH_AS(train(data, config), "batch size exceeds dataset size",
                         std::invalid_argument);
  }
  {
    Dataset unlabeled = data;
    unlabeled.labels.clear();
    TrainConfig config;
    config.batch_size = 10;
    config.epochs = 1;
    CHECK_THROWS_WITH_AS(train(unlabeled, config), "signed graph requires labels",
                         std::runtime_error);
  }
  {
    TrainConfig config;
    CHECK_THROWS_WITH_AS(train(Dataset{}, config), "empty dataset", std::runtime_error);
  }
  {
    // lambda > 0 but no graph anywhere in the batch.
    const RbmParams params = zero_params(2, 3);
    BatchState batch;
    batch.visible = Matrix::Ones(2, 3);
    TrainConfig config;
    config.lambda = 0.5;
    Rng rng(1);
    CHECK_THROWS_WITH_AS(cd_gradient(params, batch, config, rng),
                         "signed graph requires labels", std::runtime_error);
  }
}

TEST_CASE("epoch report serializes to CSV") {
  TrainReport report;
  EpochRecord record;
  record.epoch = 0;
  record.reconstruction_error = 0.25;
  record.smoothness = -12.5;
  record.seconds = 0.5;
  report.epochs.push_back(record);
  record.epoch = 1;
  record.reconstruction_error = 0.125;
  record.smoothness = -14.0;
  record.seconds = 0.25;
  report.epochs.push_back(record);

  const std::string path = "trainer_report_test.csv";
  write_report_csv(report, path);
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  CHECK(buffer.str() ==
        "epoch,reconstruction_error,smoothness,seconds\n"
        "0,0.25,-12.5,0.5\n"
        "1,0.125,-14,0.25\n");
  std::remove(path.c_str());
}
