#include "slrbm/exact_oracle.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace slrbm {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

void check_binary(const Matrix& state) {
  for (Index i = 0; i < state.rows(); ++i)
    for (Index j = 0; j < state.cols(); ++j)
      require(state(i, j) == 0.0 || state(i, j) == 1.0, "state must be binary");
}

void decode_bits(std::uint64_t state, int offset, Matrix& out) {
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) {
      out(i, j) = static_cast<double>((state >> offset) & 1ull);
      ++offset;
    }
}

std::uint64_t encode_bits(const Matrix& state) {
  std::uint64_t bits = 0;
  int offset = 0;
  for (Index i = 0; i < state.rows(); ++i)
    for (Index j = 0; j < state.cols(); ++j) {
      if (state(i, j) != 0.0) bits |= 1ull << offset;
      ++offset;
    }
  return bits;
}

// Pairwise summation keeps the partition function reproducible and accurate
// for the ~1e6-term sums the 20-bit cap allows.
double pairwise_sum(const double* values, std::size_t count) {
  if (count <= 8) {
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) total += values[i];
    return total;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

void finalize(EnumeratedDistribution& dist) {
  const Index count = dist.energies.size();
  const double max_neg = (-dist.energies).maxCoeff();
  std::vector<double> scaled(static_cast<std::size_t>(count));
  for (Index s = 0; s < count; ++s)
    scaled[static_cast<std::size_t>(s)] = std::exp(-dist.energies(s) - max_neg);
  const double total = pairwise_sum(scaled.data(), scaled.size());
  dist.log_partition = max_neg + std::log(total);
  dist.probabilities.resize(count);
  for (Index s = 0; s < count; ++s)
    dist.probabilities(s) = std::exp(-dist.energies(s) - dist.log_partition);
}

void check_phi(const Matrix& phi, Index batch, double lambda) {
  if (lambda == 0.0) return;
  require(phi.rows() == batch && phi.cols() == batch,
          "signed graph requires labels");
}

}  // namespace

int EnumeratedDistribution::bits() const {
  const Index per_sample = clamped ? n_hidden : n_visible + n_hidden;
  return static_cast<int>(batch * per_sample);
}

double total_energy(const RbmParams& params, double lambda, const Matrix& V,
                    const Matrix& H, const Matrix& phi) {
  require(V.rows() == H.rows(), "dimension mismatch");
  double energy = 0.0;
  for (Index i = 0; i < V.rows(); ++i)
    energy += energy_rbm(params, V.row(i), H.row(i));
  if (lambda != 0.0 && phi.size() > 0) {
    for (Index i = 0; i < V.rows(); ++i)
      for (Index j = i + 1; j < V.rows(); ++j) {
        if (phi(i, j) == 0.0) continue;
        energy += lambda * phi(i, j) * (H.row(i) - H.row(j)).squaredNorm();
      }
  }
  return energy;
}

EnumeratedDistribution enumerate_hidden(const RbmParams& params, double lambda,
                                        const Matrix& batch_v, const Matrix& phi) {
  const Index b = batch_v.rows();
  require(b > 0, "empty dataset");
  require(batch_v.cols() == params.n_visible(), "dimension mismatch");
  check_phi(phi, b, lambda);
  const Index bits = b * params.n_hidden();
  if (bits > kMaxEnumerationBits)
    throw std::domain_error("too large for enumeration");

  EnumeratedDistribution dist;
  dist.batch = b;
  dist.n_visible = params.n_visible();
  dist.n_hidden = params.n_hidden();
  dist.clamped = true;
  dist.batch_v = batch_v;
  dist.phi = phi;
  dist.lambda = lambda;

  const std::uint64_t count = 1ull << bits;
  dist.energies.resize(static_cast<Index>(count));
  Matrix h(b, params.n_hidden());
  for (std::uint64_t s = 0; s < count; ++s) {
    decode_bits(s, 0, h);
    dist.energies(static_cast<Index>(s)) = total_energy(params, lambda, batch_v, h, phi);
  }
  finalize(dist);
  return dist;
}

EnumeratedDistribution enumerate_joint(const RbmParams& params, double lambda,
                                       Index batch, const Matrix& phi) {
  require(batch > 0, "empty dataset");
  check_phi(phi, batch, lambda);
  const Index bits = batch * (params.n_visible() + params.n_hidden());
  if (bits > kMaxEnumerationBits)
    throw std::domain_error("too large for enumeration");

  EnumeratedDistribution dist;
  dist.batch = batch;
  dist.n_visible = params.n_visible();
  dist.n_hidden = params.n_hidden();
  dist.clamped = false;
  dist.phi = phi;
  dist.lambda = lambda;

  const std::uint64_t count = 1ull << bits;
  dist.energies.resize(static_cast<Index>(count));
  Matrix v(batch, params.n_visible());
  Matrix h(batch, params.n_hidden());
  const int hidden_offset = static_cast<int>(batch * params.n_visible());
  for (std::uint64_t s = 0; s < count; ++s) {
    decode_bits(s, 0, v);
    decode_bits(s, hidden_offset, h);
    dist.energies(static_cast<Index>(s)) = total_energy(params, lambda, v, h, phi);
  }
  finalize(dist);
  return dist;
}

double exact_hidden_conditional(const EnumeratedDistribution& dist, Index sample,
                                Index unit, const Matrix& hidden_state) {
  require(dist.clamped, "conditional requires a clamped distribution");
  require(sample >= 0 && sample < dist.batch, "sample index out of range");
  require(unit >= 0 && unit < dist.n_hidden, "unit index out of range");
  require(hidden_state.rows() == dist.batch && hidden_state.cols() == dist.n_hidden,
          "dimension mismatch");
  check_binary(hidden_state);
  const std::uint64_t flip = 1ull << (sample * dist.n_hidden + unit);
  const std::uint64_t s1 = encode_bits(hidden_state) | flip;
  const std::uint64_t s0 = s1 & ~flip;
  const double p0 = dist.probabilities(static_cast<Index>(s0));
  const double p1 = dist.probabilities(static_cast<Index>(s1));
  return p1 / (p0 + p1);
}

double flip_hidden_conditional(const RbmParams& params, double lambda,
                               const Matrix& V, const Matrix& H,
                               const Matrix& phi, Index sample, Index unit) {
  Matrix h = H;
  h(sample, unit) = 0.0;
  const double e0 = total_energy(params, lambda, V, h, phi);
  h(sample, unit) = 1.0;
  const double e1 = total_energy(params, lambda, V, h, phi);
  return logistic(e0 - e1);
}

double flip_visible_conditional(const RbmParams& params, double lambda,
                                const Matrix& V, const Matrix& H,
                                const Matrix& phi, Index sample, Index unit) {
  Matrix v = V;
  v(sample, unit) = 0.0;
  const double e0 = total_energy(params, lambda, v, H, phi);
  v(sample, unit) = 1.0;
  const double e1 = total_energy(params, lambda, v, H, phi);
  return logistic(e0 - e1);
}

double exact_log_likelihood(const RbmParams& params, double lambda,
                            const Matrix& batch_v, const Matrix& phi) {
  const EnumeratedDistribution clamped = enumerate_hidden(params, lambda, batch_v, phi);
  const EnumeratedDistribution joint =
      enumerate_joint(params, lambda, batch_v.rows(), phi);
  return (clamped.log_partition - joint.log_partition) /
         static_cast<double>(batch_v.rows());
}

Gradient exact_gradient(const RbmParams& params, double lambda,
                        const Matrix& batch_v, const Matrix& phi) {
  const Index b = batch_v.rows();
  const Index m = params.n_visible();
  const Index n = params.n_hidden();

  Gradient grad;
  grad.d_weights = Matrix::Zero(n, m);
  grad.d_visible_bias = Vector::Zero(m);
  grad.d_hidden_bias = Vector::Zero(n);

  // Clamped expectations.
  {
    const EnumeratedDistribution dist = enumerate_hidden(params, lambda, batch_v, phi);
    Matrix h(b, n);
    for (Index s = 0; s < dist.energies.size(); ++s) {
      decode_bits(static_cast<std::uint64_t>(s), 0, h);
      const double p = dist.probabilities(s);
      grad.d_weights.noalias() += p * (h.transpose() * batch_v);
      grad.d_hidden_bias += p * h.colwise().sum().transpose();
    }
    grad.d_visible_bias = batch_v.colwise().sum().transpose();
  }

  // Free expectations.
  {
    const EnumeratedDistribution dist = enumerate_joint(params, lambda, b, phi);
    Matrix v(b, m);
    Matrix h(b, n);
    const int hidden_offset = static_cast<int>(b * m);
    for (Index s = 0; s < dist.energies.size(); ++s) {
      decode_bits(static_cast<std::uint64_t>(s), 0, v);
      decode_bits(static_cast<std::uint64_t>(s), hidden_offset, h);
      const double p = dist.probabilities(s);
      grad.d_weights.noalias() -= p * (h.transpose() * v);
      grad.d_visible_bias -= p * v.colwise().sum().transpose();
      grad.d_hidden_bias -= p * h.colwise().sum().transpose();
    }
  }

  const double scale = 1.0 / static_cast<double>(b);
  grad.d_weights *= scale;
  grad.d_visible_bias *= scale;
  grad.d_hidden_bias *= scale;
  return grad;
}

}  // namespace slrbm
