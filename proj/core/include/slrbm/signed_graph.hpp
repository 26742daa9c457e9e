#pragma once

#include <vector>

#include "slrbm/matrix.hpp"

namespace slrbm {

enum class AdjacencyMode { SignedLabel, HeatKernel, BinaryKnn };

// Symmetric adjacency with zero diagonal. SignedLabel entries are +1 for
// same-class pairs and -1 for different-class pairs; kNN modes carry
// non-negative weights.
struct Adjacency {
  Matrix phi;
  AdjacencyMode mode = AdjacencyMode::SignedLabel;
  int neighbor_count = 0;    // kNN modes only
  double kernel_width = 0.0; // HeatKernel only
  Index size() const { return phi.rows(); }
};

enum class DegreeConvention {
  Signed,   // D_ii = sum_j phi_ij, Laplacian may be indefinite
  Absolute, // D_ii = sum_j |phi_ij|, Laplacian is PSD
};

struct SignedGraph {
  Adjacency adjacency;
  Vector degree;
  Matrix laplacian; // D - phi
  DegreeConvention convention = DegreeConvention::Signed;
  Index size() const { return adjacency.size(); }
};

struct KnnWeighting {
  enum class Kind { Binary, HeatKernel };
  Kind kind = Kind::Binary;
  double kernel_width = 0.0;
  static KnnWeighting binary() { return {Kind::Binary, 0.0}; }
  static KnnWeighting heat(double width) { return {Kind::HeatKernel, width}; }
};

// phi_ij = +1 if labels agree, -1 otherwise, 0 on the diagonal.
Adjacency build_signed_adjacency(const std::vector<int>& labels);

// Mutual-or kNN graph over rows of data: i~j if either is among the other's
// neighbor_count nearest by squared Euclidean distance. Ties at the cutoff
// are broken by ascending index.
Adjacency build_knn_adjacency(const Matrix& data, int neighbor_count,
                              const KnnWeighting& weighting);

SignedGraph build_laplacian(const Adjacency& adjacency, DegreeConvention convention);

// J(H) = sum_ij phi_ij ||h_i - h_j||^2 over all ordered pairs; columns of
// codes are the per-node vectors.
double smoothness(const Matrix& codes, const Adjacency& adjacency);

// Same quantity via 2*tr(H L H^T); requires the Signed convention.
double smoothness_via_trace(const Matrix& codes, const SignedGraph& graph);

// Local patch for one node: the node itself followed by its neighbors, with
// the degree in the top-left corner, negated incident weights on the first
// row/column, and |weights| on the remaining diagonal.
struct Patch {
  Matrix matrix;
  std::vector<Index> node_order;
};

Patch build_patch(const SignedGraph& graph, Index node);

// Sum of all patches scattered back to full size. Equals the sum of the
// signed-degree and absolute-degree Laplacians; exercised as a consistency
// check on build_patch.
Matrix align_patches(const SignedGraph& graph);

}  // namespace slrbm
