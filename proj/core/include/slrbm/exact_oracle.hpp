#pragma once

#include <cstdint>

#include "slrbm/matrix.hpp"
#include "slrbm/rbm_model.hpp"

namespace slrbm {

// Enumeration is capped at this many binary units per distribution.
inline constexpr int kMaxEnumerationBits = 20;

// Exhaustive distribution over a small SLRBM. State s encodes unit
// assignments bitwise: clamped distributions enumerate hidden units only,
// bit (i*n_hidden + l) for sample i, unit l; joint distributions put the
// B*n_visible visible bits first (bit i*n_visible + r), hidden bits after.
struct EnumeratedDistribution {
  Index batch = 0;
  Index n_visible = 0;
  Index n_hidden = 0;
  bool clamped = false;
  Matrix batch_v;        // clamped only: the fixed visibles, B x m
  Matrix phi;            // B x B (empty when lambda == 0)
  double lambda = 0.0;
  Vector energies;       // indexed by state
  Vector probabilities;  // exp(-E - log Z)
  double log_partition = 0.0;
  int bits() const;
};

// Joint energy of a full configuration: sum_i E(v_i, h_i) + lambda *
// sum_{i<j} phi_ij ||h_i - h_j||^2. Each unordered pair enters once; this is
// the base measure that makes the per-unit conditionals come out as
// logistic(activation - delta) exactly.
double total_energy(const RbmParams& params, double lambda, const Matrix& V,
                    const Matrix& H, const Matrix& phi);

// All hidden configurations with visibles clamped to batch_v.
EnumeratedDistribution enumerate_hidden(const RbmParams& params, double lambda,
                                        const Matrix& batch_v, const Matrix& phi);

// All (V, H) configurations for a batch of the given size.
EnumeratedDistribution enumerate_joint(const RbmParams& params, double lambda,
                                       Index batch, const Matrix& phi);

// p(h_l^i = 1 | everything else) read off the enumerated table by summing
// the two states that differ only in that unit.
double exact_hidden_conditional(const EnumeratedDistribution& dist, Index sample,
                                Index unit, const Matrix& hidden_state);

// Same conditionals from the two-point energy ratio 1/(1 + exp(E_on - E_off)).
// No table required, so these work beyond the enumeration cap.
double flip_hidden_conditional(const RbmParams& params, double lambda,
                               const Matrix& V, const Matrix& H,
                               const Matrix& phi, Index sample, Index unit);
double flip_visible_conditional(const RbmParams& params, double lambda,
                                const Matrix& V, const Matrix& H,
                                const Matrix& phi, Index sample, Index unit);

// Mean regularized log-likelihood of the batch: (log Z_clamped - log Z) / B.
double exact_log_likelihood(const RbmParams& params, double lambda,
                            const Matrix& batch_v, const Matrix& phi);

// Exact gradient of the mean regularized log-likelihood: clamped minus free
// expectations of the sufficient statistics, averaged over the batch.
Gradient exact_gradient(const RbmParams& params, double lambda,
                        const Matrix& batch_v, const Matrix& phi);

}  // namespace slrbm
