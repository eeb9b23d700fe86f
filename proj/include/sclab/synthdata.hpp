#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sclab/posgraph.hpp"

namespace sclab {

/// A graph together with downstream labels and the generator-level cluster
/// of each vertex (sign pattern, manifold index, patch location/content).
struct LabeledGraph {
  PositivePairGraph graph;
  std::vector<int> labels;  // in [0, num_classes)
  int num_classes = 0;
  std::vector<int> groups;  // generator cluster id, in [0, num_groups)
  int num_groups = 0;

  /// n x num_classes matrix of one-hot targets e_{y(x)}.
  Matrix label_onehots() const;
};

inline constexpr std::size_t kDefaultSizeGuard = 20000;

/// Hypercube with augmentation scaling the spurious dimensions s+1..d by
/// values drawn from tau_grid. label_dim is 1-based and must lie in [1, s].
struct Example1Spec {
  int d = 4;
  int s = 1;
  std::vector<double> tau_grid{0.5, 1.0};
  int label_dim = 1;
  std::size_t size_guard = kDefaultSizeGuard;

  void validate() const;
  std::size_t vertex_bound() const;
};

/// Index of a +-1 sign vector read as binary of (h + 1) / 2, first entry most
/// significant. Nonpositive entries count as -1.
int bin_code(std::span<const double> signs);
std::vector<double> bin_inverse(int code, int s);

LabeledGraph example1_graph(const Example1Spec& spec);

/// Label map indexed by bin_code of the first s coordinates.
using LabelMap = std::vector<int>;
LabelMap sign_label_map(int s, int dim);  // dim 1-based
LabelMap xor_label_map(int s, int dim_a, int dim_b);
LabelMap enumeration_label_map(int s);

LabeledGraph example2_labels(const Example1Spec& spec, const LabelMap& label_map, int m);

/// Finite manifolds S_1..S_r. subclusters[i][j] assigns point j of set i to a
/// sub-cluster; positive pairs only join points of one sub-cluster. An empty
/// subclusters list makes every same-set pair positive.
struct Example3Spec {
  int r = 2;
  std::vector<std::vector<Datapoint>> point_sets;
  std::vector<std::vector<int>> subclusters;
  double rho = 0.1;
  double gamma = 1.0;
  int m = 2;
  std::vector<int> labels;  // set index -> class
};

/// Deterministic lattice layout in the plane satisfying (rho, gamma).
Example3Spec example3_lattice(int r, int subclusters_per_set, int points_per_subcluster, double rho, double gamma,
                              int m, std::vector<int> labels);

LabeledGraph example3_graph(const Example3Spec& spec);

/// Informative patch of length s with entries +-gamma at a circular location
/// t; the remaining coordinates are +-1 and scaled by tau_grid values.
struct Example4Spec {
  int d = 3;
  int s = 1;
  double gamma = 2.0;
  std::vector<double> tau_grid{0.0, 0.5, 1.0};
  int m = 2;
  LabelMap label_map;  // indexed by bin_code of the patch; empty -> sign of first patch entry
  std::size_t size_guard = kDefaultSizeGuard;

  void validate() const;
  std::size_t vertex_bound() const;
  LabelMap effective_label_map() const;
};

struct PatchInfo {
  int location = 0;  // 0-based start of the patch
  int code = 0;      // bin_code of the patch signs
};

std::optional<PatchInfo> locate_patch(const Example4Spec& spec, std::span<const double> x);

LabeledGraph example4_graph(const Example4Spec& spec);

/// Outer clusters that a linear map can indicate exactly (first m coordinates
/// one-hot) whose inside splits into two disconnected arms along orthogonal
/// axes of a 2-D spurious block, with sparse positive-pair mass across clusters.
struct TwoLevelSpec {
  int m = 2;
  int points_per_arm = 3;
  double cross_mass = 0.02;
  int cross_edges = 4;
};

LabeledGraph two_level_graph(const TwoLevelSpec& spec, std::uint64_t seed);

/// Random graph made of disconnected components with the given sizes. Inside a
/// component, edges form a spanning path plus random extras; coordinates are
/// i.i.d. normal in R^dim. groups = component ids.
LabeledGraph random_component_graph(const std::vector<int>& component_sizes, int dim, double extra_edge_prob,
                                    std::uint64_t seed);

}  // namespace sclab
