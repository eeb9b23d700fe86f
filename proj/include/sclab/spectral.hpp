#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "sclab/funclass.hpp"
#include "sclab/posgraph.hpp"

namespace sclab {

/// Real-valued function on the vertices of one graph.
struct GraphFunction {
  Vector values;
  std::uint64_t graph_id = 0;
};

GraphFunction make_function(const PositivePairGraph& graph, Vector values);
void require_same_graph(const PositivePairGraph& graph, const GraphFunction& g);

/// A double or +infinity, kept distinct from overflow.
class ExtendedReal {
 public:
  static ExtendedReal infinity() { return ExtendedReal(true, 0.0); }
  static ExtendedReal finite(double v) { return ExtendedReal(false, v); }

  bool is_infinite() const noexcept { return infinite_; }
  double value() const;  // throws on infinity
  double or_infinity() const noexcept { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

 private:
  ExtendedReal(bool inf, double v) : infinite_(inf), value_(v) {}
  bool infinite_;
  double value_;
};

/// E_{p_data}[a b] with weights the marginal.
double weighted_inner(const PositivePairGraph& graph, const Vector& a, const Vector& b);

/// (L g)(x) = g(x) - E_{x' ~ p_pos(.|x)} g(x').
GraphFunction laplacian_apply(const PositivePairGraph& graph, const GraphFunction& g);
Matrix laplacian_apply(const PositivePairGraph& graph, const Matrix& values);

struct SpectralDecomposition {
  std::vector<double> eigenvalues;  // ascending
  std::vector<GraphFunction> eigenfunctions;

  /// n x count matrix of eigenfunction values.
  Matrix as_matrix() const;
};

/// Smallest `count` eigenpairs, orthonormal under p_data. Computed per
/// connected component; ties are ordered by the first vertex an eigenfunction
/// touches, and each eigenfunction is positive at its first nonzero vertex.
SpectralDecomposition eigendecompose(const PositivePairGraph& graph, Index count);

/// sum_{x,x'} p_pos(x,x') ||f(x) - f(x')||^2 for the n x k block `values`.
double pair_discrepancy(const PositivePairGraph& graph, const Matrix& values);
double pair_discrepancy(const PositivePairGraph& graph, const std::vector<GraphFunction>& fs);

/// Q_S(g): positive pairs conditioned inside S over twice the variance of g
/// under p_data restricted to S. +infinity when that variance vanishes.
ExtendedReal expansion_Q(const PositivePairGraph& graph, const std::vector<Index>& subset, const GraphFunction& g);

struct MinExpansion {
  ExtendedReal beta = ExtendedReal::infinity();
  GraphFunction argmin;
  bool certified = false;  // exact for tabular/linear; heuristic upper estimate otherwise
};

/// min over g in the scalar version of `cls` of Q_S(g).
MinExpansion min_expansion_over_class(const PositivePairGraph& graph, const std::vector<Index>& subset,
                                      const FunctionClassSpec& cls, std::uint64_t seed = 0);

/// Whether L g = psi g in p_data-weighted L2, relative to E[g^2].
bool is_eigenfunction(const PositivePairGraph& graph, const GraphFunction& g, double psi, double tol = 1e-10);

}  // namespace sclab
