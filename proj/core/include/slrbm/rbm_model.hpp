#pragma once

#include <cstdint>
#include <vector>

#include "slrbm/matrix.hpp"
#include "slrbm/rng.hpp"

namespace slrbm {

// Binary RBM parameters. weights is n_hidden x n_visible, so row l holds the
// fan-in of hidden unit l.
struct RbmParams {
  Matrix weights;
  Vector visible_bias; // b, per pixel
  Vector hidden_bias;  // c, per hidden unit
  Index n_visible() const { return weights.cols(); }
  Index n_hidden() const { return weights.rows(); }
};

// W ~ uniform(-0.1, 0.1), biases zero. Draw order is row-major over W, so a
// given seed pins every entry.
RbmParams init_params(Index n_hidden, Index n_visible, std::uint64_t seed);

struct Gradient {
  Matrix d_weights;
  Vector d_visible_bias;
  Vector d_hidden_bias;
};

// One mini-batch mid-update: visibles, current hidden probabilities and
// samples (one example per row), plus the batch-local signed adjacency.
// phi is empty (0x0) when no graph term is in play.
struct BatchState {
  Matrix visible;
  Matrix hidden_prob;
  Matrix hidden_sample;
  std::vector<int> labels;
  Matrix phi;
  Index size() const { return visible.rows(); }
  bool has_graph() const { return phi.size() > 0; }
};

// Which hidden state feeds the coupling term: mean-field probabilities or
// binary samples.
enum class DeltaSource { MeanField, Sample };

double logistic(double x);

// E(v,h) = -h^T W v - b^T v - c^T h.
double energy_rbm(const RbmParams& params, const Vector& v, const Vector& h);

// Per-sample regularized energy: E(v_i, h_i) + lambda * sum_j phi_ij
// ||h_i - h_j||^2, with the h's taken from hidden_sample by default.
double energy_slrbm(const RbmParams& params, const BatchState& batch,
                    double lambda, Index sample,
                    DeltaSource source = DeltaSource::Sample);

// Coupling offsets for one sample: delta_l = lambda * sum_j phi_ij
// (1 - 2 h_l^j). Zero vector when lambda == 0 or the batch has no graph.
Vector delta_term(const BatchState& batch, double lambda, Index sample,
                  DeltaSource source);

// All samples at once, one row per sample.
Matrix delta_term_all(const BatchState& batch, double lambda, DeltaSource source);

// p(h_l = 1 | v) = logistic(W v + c - delta), elementwise.
Vector hidden_conditional(const RbmParams& params, const Vector& v,
                          const Vector& delta);

// p(v_r = 1 | h) = logistic(W^T h + b); the coupling term does not touch
// visible units, so there is no offset here.
Vector visible_conditional(const RbmParams& params, const Vector& h);

// Batch variants; rows are samples. delta may be empty for the plain RBM.
Matrix hidden_conditional_batch(const RbmParams& params, const Matrix& visible,
                                const Matrix& delta);
Matrix visible_conditional_batch(const RbmParams& params, const Matrix& hidden);

// Elementwise Bernoulli draws as 0/1 doubles, consuming one uniform per
// entry in row-major order.
Vector sample_bernoulli(const Vector& probs, Rng& rng);
Matrix sample_bernoulli(const Matrix& probs, Rng& rng);

}  // namespace slrbm
