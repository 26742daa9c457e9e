#include "slrbm/rbm_model.hpp"

#include <cmath>
#include <stdexcept>

namespace slrbm {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

const Matrix& delta_source_matrix(const BatchState& batch, DeltaSource source) {
  return source == DeltaSource::MeanField ? batch.hidden_prob : batch.hidden_sample;
}

}  // namespace

RbmParams init_params(Index n_hidden, Index n_visible, std::uint64_t seed) {
  require(n_hidden > 0 && n_visible > 0, "model dimensions must be positive");
  RbmParams params;
  params.weights.resize(n_hidden, n_visible);
  Rng rng(seed);
  for (Index l = 0; l < n_hidden; ++l)
    for (Index r = 0; r < n_visible; ++r)
      params.weights(l, r) = rng.uniform(-0.1, 0.1);
  params.visible_bias = Vector::Zero(n_visible);
  params.hidden_bias = Vector::Zero(n_hidden);
  return params;
}

double logistic(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double energy_rbm(const RbmParams& params, const Vector& v, const Vector& h) {
  require(v.size() == params.n_visible() && h.size() == params.n_hidden(),
          "dimension mismatch");
  require(v.allFinite() && h.allFinite(), "non-finite input");
  return -h.dot(params.weights * v) - params.visible_bias.dot(v) -
         params.hidden_bias.dot(h);
}

double energy_slrbm(const RbmParams& params, const BatchState& batch,
                    double lambda, Index sample, DeltaSource source) {
  require(sample >= 0 && sample < batch.size(), "sample index out of range");
  const Matrix& hidden = delta_source_matrix(batch, source);
  require(hidden.rows() == batch.size(), "hidden state not populated");
  const Vector v = batch.visible.row(sample);
  const Vector h = hidden.row(sample);
  double energy = energy_rbm(params, v, h);
  if (lambda != 0.0 && batch.has_graph()) {
    for (Index j = 0; j < batch.size(); ++j) {
      if (j == sample) continue;
      const double d2 = (h.transpose() - hidden.row(j)).squaredNorm();
      energy += lambda * batch.phi(sample, j) * d2;
    }
  }
  return energy;
}

Vector delta_term(const BatchState& batch, double lambda, Index sample,
                  DeltaSource source) {
  require(sample >= 0 && sample < batch.size(), "sample index out of range");
  const Index n = batch.hidden_prob.cols() > 0 ? batch.hidden_prob.cols()
                                               : batch.hidden_sample.cols();
  if (lambda == 0.0 || !batch.has_graph()) return Vector::Zero(n);
  const Matrix& hidden = delta_source_matrix(batch, source);
  require(hidden.rows() == batch.size(), "hidden state not populated");
  require(hidden.allFinite(), "non-finite input");
  // delta_l = lambda * sum_j phi_ij (1 - 2 h_l^j); phi_ii = 0 drops the
  // self term.
  const Vector weights = batch.phi.row(sample);
  const double total = weights.sum();
  return lambda * (Vector::Constant(hidden.cols(), total) -
                   2.0 * hidden.transpose() * weights);
}

Matrix delta_term_all(const BatchState& batch, double lambda, DeltaSource source) {
  const Index b = batch.size();
  const Index n = batch.hidden_prob.cols() > 0 ? batch.hidden_prob.cols()
                                               : batch.hidden_sample.cols();
  if (lambda == 0.0 || !batch.has_graph()) return Matrix::Zero(b, n);
  const Matrix& hidden = delta_source_matrix(batch, source);
  require(hidden.rows() == b, "hidden state not populated");
  require(hidden.allFinite(), "non-finite input");
  const Vector row_sums = batch.phi.rowwise().sum();
  Matrix delta = lambda * (row_sums.replicate(1, hidden.cols()) -
                           2.0 * (batch.phi * hidden));
  return delta;
}

Vector hidden_conditional(const RbmParams& params, const Vector& v,
                          const Vector& delta) {
  require(v.size() == params.n_visible(), "dimension mismatch");
  require(delta.size() == params.n_hidden(), "dimension mismatch");
  require(v.allFinite() && delta.allFinite(), "non-finite input");
  Vector act = params.weights * v + params.hidden_bias - delta;
  return act.unaryExpr([](double x) { return logistic(x); });
}

Vector visible_conditional(const RbmParams& params, const Vector& h) {
  require(h.size() == params.n_hidden(), "dimension mismatch");
  require(h.allFinite(), "non-finite input");
  Vector act = params.weights.transpose() * h + params.visible_bias;
  return act.unaryExpr([](double x) { return logistic(x); });
}

Matrix hidden_conditional_batch(const RbmParams& params, const Matrix& visible,
                                const Matrix& delta) {
  require(visible.cols() == params.n_visible(), "dimension mismatch");
  require(visible.allFinite(), "non-finite input");
  Matrix act = visible * params.weights.transpose();
  act.rowwise() += params.hidden_bias.transpose();
  if (delta.size() > 0) {
    require(delta.rows() == visible.rows() && delta.cols() == params.n_hidden(),
            "dimension mismatch");
    require(delta.allFinite(), "non-finite input");
    act -= delta;
  }
  return act.unaryExpr([](double x) { return logistic(x); });
}

Matrix visible_conditional_batch(const RbmParams& params, const Matrix& hidden) {
  require(hidden.cols() == params.n_hidden(), "dimension mismatch");
  require(hidden.allFinite(), "non-finite input");
  Matrix act = hidden * params.weights;
  act.rowwise() += params.visible_bias.transpose();
  return act.unaryExpr([](double x) { return logistic(x); });
}

Vector sample_bernoulli(const Vector& probs, Rng& rng) {
  Vector out(probs.size());
  for (Index i = 0; i < probs.size(); ++i) {
    const double p = probs(i);
    require(p >= 0.0 && p <= 1.0, "probability out of range");
    out(i) = rng.bernoulli(p) ? 1.0 : 0.0;
  }
  return out;
}

Matrix sample_bernoulli(const Matrix& probs, Rng& rng) {
  Matrix out(probs.rows(), probs.cols());
  for (Index i = 0; i < probs.rows(); ++i)
    for (Index j = 0; j < probs.cols(); ++j) {
      const double p = probs(i, j);
      require(p >= 0.0 && p <= 1.0, "probability out of range");
      out(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
    }
  return out;
}

}  // namespace slrbm
