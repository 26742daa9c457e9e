// Microbenchmarks for the hot paths: the CD gradient step at working scale,
// graph construction, the two smoothness routes, and the enumeration oracle.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "slrbm/exact_oracle.hpp"
#include "slrbm/rbm_model.hpp"
#include "slrbm/rng.hpp"
#include "slrbm/signed_graph.hpp"
#include "slrbm/train_config.hpp"
#include "slrbm/trainer.hpp"

namespace {

using namespace slrbm;

Matrix random_bits(Rng& rng, Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return out;
}

Matrix random_reals(Rng& rng, Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = rng.uniform(-1.0, 1.0);
  return out;
}

std::vector<int> cyclic_labels(Index n, int classes) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    labels[static_cast<std::size_t>(i)] = static_cast<int>(i) % classes;
  return labels;
}

// One CD-1 update on a 100 x 784 batch with 128 hidden units, the shape a
// digits run spends nearly all of its time in.
void BM_CdGradient(benchmark::State& state) {
  const bool coupled = state.range(0) != 0;
  const Index batch_size = 100, n_visible = 784, n_hidden = 128;
  const RbmParams params = init_params(n_hidden, n_visible, 7);
  Rng data_rng(11);
  const Matrix visible = random_bits(data_rng, batch_size, n_visible);
  const Matrix phi = build_signed_adjacency(cyclic_labels(batch_size, 10)).phi;

  TrainConfig config;
  config.lambda = coupled ? 1e-2 : 0.0;
  Rng chain_rng(123);
  for (auto _ : state) {
    BatchState batch;
    batch.visible = visible;
    if (coupled) batch.phi = phi;
    const CdStats stats = cd_gradient(params, batch, config, chain_rng);
    benchmark::DoNotOptimize(stats.gradient.d_weights.sum());
  }
}
BENCHMARK(BM_CdGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SignedAdjacency(benchmark::State& state) {
  const Index nodes = state.range(0);
  const std::vector<int> labels = cyclic_labels(nodes, 10);
  for (auto _ : state) {
    Adjacency adj = build_signed_adjacency(labels);
    benchmark::DoNotOptimize(adj.phi.sum());
  }
}
BENCHMARK(BM_SignedAdjacency)->Arg(100)->Arg(500)->Unit(benchmark::kMicrosecond);

void BM_KnnAdjacency(benchmark::State& state) {
  const Index nodes = state.range(0);
  Rng rng(5);
  const Matrix data = random_reals(rng, nodes, 64);
  for (auto _ : state) {
    Adjacency adj = build_knn_adjacency(data, 5, KnnWeighting::binary());
    benchmark::DoNotOptimize(adj.phi.sum());
  }
}
BENCHMARK(BM_KnnAdjacency)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Laplacian(benchmark::State& state) {
  const Index nodes = state.range(0);
  const Adjacency adj = build_signed_adjacency(cyclic_labels(nodes, 10));
  for (auto _ : state) {
    SignedGraph graph = build_laplacian(adj, DegreeConvention::Signed);
    benchmark::DoNotOptimize(graph.laplacian.sum());
  }
}
BENCHMARK(BM_Laplacian)->Arg(100)->Arg(500)->Unit(benchmark::kMicrosecond);

void BM_SmoothnessPairwise(benchmark::State& state) {
  const Index nodes = state.range(0);
  Rng rng(9);
  const Matrix codes = random_reals(rng, 128, nodes);
  const Adjacency adj = build_signed_adjacency(cyclic_labels(nodes, 10));
  for (auto _ : state) {
    benchmark::DoNotOptimize(smoothness(codes, adj));
  }
}
BENCHMARK(BM_SmoothnessPairwise)->Arg(100)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_SmoothnessTrace(benchmark::State& state) {
  const Index nodes = state.range(0);
  Rng rng(9);
  const Matrix codes = random_reals(rng, 128, nodes);
  const Adjacency adj = build_signed_adjacency(cyclic_labels(nodes, 10));
  const SignedGraph graph = build_laplacian(adj, DegreeConvention::Signed);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smoothness_via_trace(codes, graph));
  }
}
BENCHMARK(BM_SmoothnessTrace)->Arg(100)->Arg(256)->Unit(benchmark::kMicrosecond);

// Joint enumeration over a two-sample batch; the argument is the total bit
// count 2 * (m + n), capped at 20. Cost doubles per added bit.
void BM_EnumerateJoint(benchmark::State& state) {
  const Index per_sample = state.range(0) / 2;
  const Index n_visible = per_sample / 2;
  const Index n_hidden = per_sample - n_visible;
  RbmParams params = init_params(n_hidden, n_visible, 17);
  const Matrix phi = build_signed_adjacency({0, 1}).phi;
  for (auto _ : state) {
    EnumeratedDistribution dist = enumerate_joint(params, 0.1, 2, phi);
    benchmark::DoNotOptimize(dist.log_partition);
  }
}
BENCHMARK(BM_EnumerateJoint)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
