#include "slrbm/signed_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace slrbm {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

void check_adjacency(const Matrix& phi) {
  require(phi.rows() == phi.cols(), "adjacency must be square");
  for (Index i = 0; i < phi.rows(); ++i) {
    require(phi(i, i) == 0.0, "adjacency diagonal must be zero");
    for (Index j = i + 1; j < phi.cols(); ++j)
      if (phi(i, j) != phi(j, i)) throw std::invalid_argument("adjacency not symmetric");
  }
}

}  // namespace

Adjacency build_signed_adjacency(const std::vector<int>& labels) {
  require(!labels.empty(), "empty dataset");
  const Index n = static_cast<Index>(labels.size());
  Adjacency adj;
  adj.mode = AdjacencyMode::SignedLabel;
  adj.phi = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      adj.phi(i, j) = labels[static_cast<std::size_t>(i)] ==
                              labels[static_cast<std::size_t>(j)]
                          ? 1.0
                          : -1.0;
    }
  return adj;
}

Adjacency build_knn_adjacency(const Matrix& data, int neighbor_count,
                              const KnnWeighting& weighting) {
  const Index n = data.rows();
  require(n > 0, "empty dataset");
  require(neighbor_count > 0, "neighbor count must be positive");
  if (neighbor_count >= n) throw std::invalid_argument("too many neighbors");
  if (weighting.kind == KnnWeighting::Kind::HeatKernel)
    require(weighting.kernel_width > 0.0, "kernel width must be positive");

  // Pairwise squared distances via the Gram matrix.
  const Vector sq = data.rowwise().squaredNorm();
  Matrix d2 = (-2.0 * (data * data.transpose())).eval();
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  d2 = d2.cwiseMax(0.0);

  // Nearest neighbor_count per node, ties at the cutoff by ascending index.
  std::vector<std::vector<Index>> nearest(static_cast<std::size_t>(n));
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    order.erase(order.begin() + i);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      if (d2(i, a) != d2(i, b)) return d2(i, a) < d2(i, b);
      return a < b;
    });
    order.resize(static_cast<std::size_t>(neighbor_count));
    nearest[static_cast<std::size_t>(i)] = order;
    order.resize(static_cast<std::size_t>(n));
  }

  Adjacency adj;
  adj.mode = weighting.kind == KnnWeighting::Kind::Binary ? AdjacencyMode::BinaryKnn
                                                          : AdjacencyMode::HeatKernel;
  adj.neighbor_count = neighbor_count;
  adj.kernel_width = weighting.kernel_width;
  adj.phi = Matrix::Zero(n, n);
  auto weight = [&](Index i, Index j) {
    return weighting.kind == KnnWeighting::Kind::Binary
               ? 1.0
               : std::exp(-d2(i, j) / weighting.kernel_width);
  };
  for (Index i = 0; i < n; ++i)
    for (Index j : nearest[static_cast<std::size_t>(i)]) {
      // i~j if either lists the other; computing the weight from d2(i,j)
      // keeps the matrix exactly symmetric.
      adj.phi(i, j) = weight(std::min(i, j), std::max(i, j));
      adj.phi(j, i) = adj.phi(i, j);
    }
  return adj;
}

SignedGraph build_laplacian(const Adjacency& adjacency, DegreeConvention convention) {
  require(adjacency.size() > 0, "empty dataset");
  check_adjacency(adjacency.phi);
  SignedGraph graph;
  graph.adjacency = adjacency;
  graph.convention = convention;
  graph.degree = convention == DegreeConvention::Signed
                     ? Vector(adjacency.phi.rowwise().sum())
                     : Vector(adjacency.phi.cwiseAbs().rowwise().sum());
  graph.laplacian = Matrix(graph.degree.asDiagonal());
  graph.laplacian -= adjacency.phi;
  return graph;
}

double smoothness(const Matrix& codes, const Adjacency& adjacency) {
  const Index n = adjacency.size();
  require(codes.cols() == n, "dimension mismatch");
  require(codes.allFinite(), "non-finite input");
  // Both orders of each pair contribute, hence the factor 2.
  double total = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      if (adjacency.phi(i, j) == 0.0) continue;
      total += adjacency.phi(i, j) * (codes.col(i) - codes.col(j)).squaredNorm();
    }
  return 2.0 * total;
}

double smoothness_via_trace(const Matrix& codes, const SignedGraph& graph) {
  if (graph.convention != DegreeConvention::Signed)
    throw std::invalid_argument("identity holds for signed degrees only");
  require(codes.cols() == graph.size(), "dimension mismatch");
  require(codes.allFinite(), "non-finite input");
  // 2 * tr(H L H^T) without forming the full product.
  const Matrix hl = codes * graph.laplacian;
  return 2.0 * hl.cwiseProduct(codes).sum();
}

Patch build_patch(const SignedGraph& graph, Index node) {
  const Index n = graph.size();
  require(node >= 0 && node < n, "node index out of range");
  Patch patch;
  patch.node_order.push_back(node);
  for (Index j = 0; j < n; ++j)
    if (j != node) patch.node_order.push_back(j);
  patch.matrix = Matrix::Zero(n, n);
  patch.matrix(0, 0) = graph.degree(node);
  for (Index t = 1; t < n; ++t) {
    const double w = graph.adjacency.phi(node, patch.node_order[static_cast<std::size_t>(t)]);
    patch.matrix(0, t) = -w;
    patch.matrix(t, 0) = -w;
    patch.matrix(t, t) = std::abs(w);
  }
  return patch;
}

Matrix align_patches(const SignedGraph& graph) {
  if (graph.convention != DegreeConvention::Signed)
    throw std::invalid_argument("patch alignment requires signed degrees");
  const Index n = graph.size();
  Matrix total = Matrix::Zero(n, n);
  for (Index node = 0; node < n; ++node) {
    const Patch patch = build_patch(graph, node);
    const Index size = patch.matrix.rows();
    for (Index a = 0; a < size; ++a)
      for (Index b = 0; b < size; ++b)
        total(patch.node_order[static_cast<std::size_t>(a)],
              patch.node_order[static_cast<std::size_t>(b)]) += patch.matrix(a, b);
  }
  return total;
}

}  // namespace slrbm
