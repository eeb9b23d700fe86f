#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "sclab/error.hpp"

namespace sclab {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Datapoint = std::vector<double>;

/// Joint positive-pair mass p_pos(i, j). Stored densely up to `kDenseLimit`
/// vertices and as a row-major sparse matrix above; every accessor works on
/// both layouts.
class JointMatrix {
 public:
  enum class Storage { Dense, Sparse };
  static constexpr Index kDenseLimit = 4096;

  JointMatrix() = default;
  static JointMatrix from_dense(Matrix dense, Index dense_limit = kDenseLimit);
  static JointMatrix from_triplets(Index n, const std::vector<Eigen::Triplet<double>>& triplets,
                                   Index dense_limit = kDenseLimit);

  Index size() const noexcept { return n_; }
  Storage storage() const noexcept { return storage_; }
  double coeff(Index i, Index j) const;
  double sum() const;
  Vector row_sums() const;
  std::size_t nonzeros() const;
  Matrix to_dense() const;

  /// Returns W * f for an n x k block of per-vertex values.
  Matrix multiply(const Matrix& values) const;

  /// Visits every strictly positive entry as fn(i, j, mass).
  template <class Fn>
  void for_each_nonzero(Fn&& fn) const {
    if (storage_ == Storage::Dense) {
      for (Index j = 0; j < n_; ++j)
        for (Index i = 0; i < n_; ++i) {
          const double w = dense_(i, j);
          if (w != 0.0) fn(i, j, w);
        }
    } else {
      for (Index i = 0; i < sparse_.outerSize(); ++i)
        for (SparseRow::InnerIterator it(sparse_, i); it; ++it)
          if (it.value() != 0.0) fn(it.row(), it.col(), it.value());
    }
  }

 private:
  using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  Index n_ = 0;
  Storage storage_ = Storage::Dense;
  Matrix dense_;
  SparseRow sparse_;
};

/// Finite positive-pair graph: vertices (rows of coords), joint mass and the
/// data marginal. Immutable after construction.
class PositivePairGraph {
 public:
  Index size() const noexcept { return coords_.rows(); }
  Index dim() const noexcept { return coords_.cols(); }
  const Matrix& coords() const noexcept { return coords_; }
  Datapoint vertex(Index i) const;
  const JointMatrix& joint() const noexcept { return joint_; }
  const Vector& marginal() const noexcept { return marginal_; }
  std::uint64_t id() const noexcept { return id_; }

  /// Structural equality (coordinates, joint entries, marginal); ids ignored.
  bool same_as(const PositivePairGraph& other) const;

 private:
  friend PositivePairGraph build_graph(const Matrix& coords, JointMatrix joint);
  Matrix coords_;
  JointMatrix joint_;
  Vector marginal_;
  std::uint64_t id_ = 0;
};

struct Partition {
  std::vector<int> assignment;
  int m = 0;

  std::vector<Index> members(int cluster) const;
};

/// Validates `assignment` (ids in [0, m), each used) and wraps it.
Partition make_partition(std::vector<int> assignment);

struct WeightedPoint {
  Datapoint point;
  double prob = 0.0;
};

PositivePairGraph build_graph(const std::vector<Datapoint>& vertices, const Matrix& joint,
                              Index dense_limit = JointMatrix::kDenseLimit);
PositivePairGraph build_graph(const Matrix& coords, JointMatrix joint);

/// p_pos(x, x') = sum over naturals of p(nat) A(x | nat) A(x' | nat).
/// kernel[i] lists the augmentations of naturals[i]. Vertices are ordered by
/// first appearance (naturals in order, augmentations in order).
PositivePairGraph from_augmentation_process(const std::vector<WeightedPoint>& naturals,
                                            const std::vector<std::vector<WeightedPoint>>& kernel,
                                            Index dense_limit = JointMatrix::kDenseLimit);

/// Edges are entries with joint mass strictly greater than zero. Cluster ids
/// follow the smallest vertex index in each component.
Partition connected_components(const PositivePairGraph& graph);

double cross_cluster_mass(const PositivePairGraph& graph, const Partition& partition);

/// Conditions p_pos on both endpoints lying in `subset`. Vertices keep their
/// ascending original order.
PositivePairGraph restrict_to(const PositivePairGraph& graph, std::vector<Index> subset);

/// Probability mass of each cluster under the marginal.
std::vector<double> cluster_masses(const PositivePairGraph& graph, const Partition& partition);

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);
  std::size_t find(std::size_t x) noexcept;
  void unite(std::size_t a, std::size_t b) noexcept;

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace sclab
