#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "sclab/error.hpp"
#include "sclab/posgraph.hpp"

namespace testutil {

using sclab::Index;
using sclab::Matrix;
using sclab::Vector;

// Code of the sclab::Error thrown by fn, or nullopt when nothing is thrown.
inline std::optional<sclab::ErrorCode> error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const sclab::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline Matrix normal_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) m(i, c) = normal(rng);
  return m;
}

// Symmetric joint with random positive weights. Vertices are split into
// `blocks` contiguous groups and edges never cross groups; each group gets a
// spanning path so it is exactly one component.
inline Matrix random_block_joint(std::mt19937_64& rng, Index n, Index blocks, double density) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix w = Matrix::Zero(n, n);
  auto block_of = [&](Index i) { return i * blocks / n; };
  for (Index i = 0; i < n; ++i) {
    w(i, i) = 0.1 * unit(rng);
    if (i + 1 < n && block_of(i) == block_of(i + 1)) {
      const double v = 0.2 + unit(rng);
      w(i, i + 1) = w(i + 1, i) = v;
    }
    for (Index j = i + 2; j < n; ++j)
      if (block_of(i) == block_of(j) && unit(rng) < density) {
        const double v = unit(rng);
        w(i, j) = w(j, i) = v;
      }
  }
  return w / w.sum();
}

inline sclab::PositivePairGraph random_graph(std::mt19937_64& rng, Index n, Index blocks, Index dim = 3,
                                             double density = 0.3) {
  return sclab::build_graph(normal_matrix(rng, n, dim),
                            sclab::JointMatrix::from_dense(random_block_joint(rng, n, blocks, density)));
}

inline sclab::PositivePairGraph dense_graph(const Matrix& coords, const Matrix& joint) {
  return sclab::build_graph(coords, sclab::JointMatrix::from_dense(joint));
}

// Independent BFS component count on W > 0.
inline int bfs_components(const Matrix& w) {
  const Index n = w.rows();
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  int count = 0;
  for (Index s = 0; s < n; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    ++count;
    std::vector<Index> stack{s};
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index u = 0; u < n; ++u)
        if (w(v, u) > 0.0 && !seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          stack.push_back(u);
        }
    }
  }
  return count;
}

}  // namespace testutil
