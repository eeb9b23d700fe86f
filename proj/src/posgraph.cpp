#include "sclab/posgraph.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace sclab {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kNormalizationTol = 1e-9;

std::atomic<std::uint64_t> next_graph_id{1};

// -0.0 and +0.0 must be the same vertex.
double canonical(double v) { return v == 0.0 ? 0.0 : v; }

Datapoint canonical(Datapoint p) {
  for (double& v : p) v = canonical(v);
  return p;
}

std::string describe(const Datapoint& p) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ']';
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- JointMatrix

JointMatrix JointMatrix::from_dense(Matrix dense, Index dense_limit) {
  require(dense.rows() == dense.cols(), ErrorCode::DimensionMismatch, "joint must be square");
  JointMatrix j;
  j.n_ = dense.rows();
  if (j.n_ <= dense_limit) {
    j.storage_ = Storage::Dense;
    j.dense_ = std::move(dense);
  } else {
    j.storage_ = Storage::Sparse;
    j.sparse_ = dense.sparseView(0.0, 0.0);
    j.sparse_.makeCompressed();
  }
  return j;
}

JointMatrix JointMatrix::from_triplets(Index n, const std::vector<Eigen::Triplet<double>>& triplets,
                                       Index dense_limit) {
  JointMatrix j;
  j.n_ = n;
  if (n <= dense_limit) {
    j.storage_ = Storage::Dense;
    j.dense_ = Matrix::Zero(n, n);
    for (const auto& t : triplets) j.dense_(t.row(), t.col()) += t.value();
  } else {
    j.storage_ = Storage::Sparse;
    j.sparse_.resize(n, n);
    j.sparse_.setFromTriplets(triplets.begin(), triplets.end());
    j.sparse_.makeCompressed();
  }
  return j;
}

double JointMatrix::coeff(Index i, Index j) const {
  return storage_ == Storage::Dense ? dense_(i, j) : sparse_.coeff(i, j);
}

double JointMatrix::sum() const {
  return storage_ == Storage::Dense ? dense_.sum() : sparse_.sum();
}

Vector JointMatrix::row_sums() const {
  if (storage_ == Storage::Dense) return dense_.rowwise().sum();
  Vector sums = Vector::Zero(n_);
  for_each_nonzero([&](Index i, Index, double w) { sums(i) += w; });
  return sums;
}

std::size_t JointMatrix::nonzeros() const {
  if (storage_ == Storage::Sparse) return static_cast<std::size_t>(sparse_.nonZeros());
  return static_cast<std::size_t>((dense_.array() != 0.0).count());
}

Matrix JointMatrix::to_dense() const {
  return storage_ == Storage::Dense ? dense_ : Matrix(sparse_);
}

Matrix JointMatrix::multiply(const Matrix& values) const {
  require(values.rows() == n_, ErrorCode::DimensionMismatch, "row count differs from vertex count");
  if (storage_ == Storage::Dense) return dense_ * values;
  return sparse_ * values;
}

// ------------------------------------------------------------ PositivePairGraph

Datapoint PositivePairGraph::vertex(Index i) const {
  Datapoint p(static_cast<std::size_t>(dim()));
  for (Index c = 0; c < dim(); ++c) p[static_cast<std::size_t>(c)] = coords_(i, c);
  return p;
}

bool PositivePairGraph::same_as(const PositivePairGraph& other) const {
  if (size() != other.size() || dim() != other.dim()) return false;
  if (coords_ != other.coords_ || marginal_ != other.marginal_) return false;
  return joint_.to_dense() == other.joint_.to_dense();
}

std::vector<Index> Partition::members(int cluster) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == cluster) out.push_back(static_cast<Index>(i));
  return out;
}

Partition make_partition(std::vector<int> assignment) {
  require(!assignment.empty(), ErrorCode::InvalidArgument, "empty partition");
  const int m = *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<char> used(static_cast<std::size_t>(std::max(m, 0)), 0);
  for (int id : assignment) {
    require(id >= 0, ErrorCode::InvalidArgument, "negative cluster id");
    used[static_cast<std::size_t>(id)] = 1;
  }
  for (int c = 0; c < m; ++c)
    require(used[static_cast<std::size_t>(c)] != 0, ErrorCode::InvalidArgument,
            "cluster id " + std::to_string(c) + " has no members");
  return Partition{std::move(assignment), m};
}

PositivePairGraph build_graph(const Matrix& coords_in, JointMatrix joint) {
  const Index n = joint.size();
  require(n > 0, ErrorCode::EmptySupport, "graph has no vertices");
  require(coords_in.rows() == n, ErrorCode::DimensionMismatch,
          "vertex count " + std::to_string(coords_in.rows()) + " != joint size " + std::to_string(n));
  require(coords_in.allFinite(), ErrorCode::InvalidArgument, "vertex coordinates must be finite");

  Matrix coords = coords_in.unaryExpr([](double v) { return canonical(v); });

  bool finite_nonneg = true;
  bool symmetric = true;
  Index bad_i = 0, bad_j = 0;
  joint.for_each_nonzero([&](Index i, Index j, double w) {
    if (!std::isfinite(w) || w < 0.0) finite_nonneg = false;
    if (symmetric && std::abs(w - joint.coeff(j, i)) > kSymmetryTol) {
      symmetric = false;
      bad_i = i;
      bad_j = j;
    }
  });
  require(finite_nonneg, ErrorCode::InvalidArgument, "joint entries must be finite and nonnegative");
  require(symmetric, ErrorCode::AsymmetricJoint,
          "joint(" + std::to_string(bad_i) + "," + std::to_string(bad_j) + ") != joint(" +
              std::to_string(bad_j) + "," + std::to_string(bad_i) + ")");

  const double total = joint.sum();
  require(std::abs(total - 1.0) <= kNormalizationTol, ErrorCode::NotNormalized,
          "joint sums to " + std::to_string(total));

  Vector marginal = joint.row_sums();
  for (Index i = 0; i < n; ++i)
    require(marginal(i) > 0.0, ErrorCode::ZeroMassVertex, "vertex " + std::to_string(i) + " has zero mass");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto row_less = [&](Index a, Index b) {
    for (Index c = 0; c < coords.cols(); ++c) {
      if (coords(a, c) < coords(b, c)) return true;
      if (coords(b, c) < coords(a, c)) return false;
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Index a = order[k - 1], b = order[k];
    require(coords.row(a) != coords.row(b), ErrorCode::DuplicateVertex,
            "vertices " + std::to_string(std::min(a, b)) + " and " + std::to_string(std::max(a, b)) +
                " share coordinates");
  }

  PositivePairGraph g;
  g.coords_ = std::move(coords);
  g.joint_ = std::move(joint);
  g.marginal_ = std::move(marginal);
  g.id_ = next_graph_id.fetch_add(1);
  return g;
}

PositivePairGraph build_graph(const std::vector<Datapoint>& vertices, const Matrix& joint, Index dense_limit) {
  require(joint.rows() == joint.cols(), ErrorCode::DimensionMismatch, "joint must be square");
  require(static_cast<Index>(vertices.size()) == joint.rows(), ErrorCode::DimensionMismatch,
          "vertex count differs from joint size");
  require(!vertices.empty(), ErrorCode::EmptySupport, "graph has no vertices");
  const std::size_t d = vertices.front().size();
  Matrix coords(static_cast<Index>(vertices.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    require(vertices[i].size() == d, ErrorCode::DimensionMismatch,
            "vertex " + std::to_string(i) + " has dimension " + std::to_string(vertices[i].size()));
    for (std::size_t c = 0; c < d; ++c) coords(static_cast<Index>(i), static_cast<Index>(c)) = vertices[i][c];
  }
  return build_graph(coords, JointMatrix::from_dense(joint, dense_limit));
}

PositivePairGraph from_augmentation_process(const std::vector<WeightedPoint>& naturals,
                                            const std::vector<std::vector<WeightedPoint>>& kernel,
                                            Index dense_limit) {
  require(!naturals.empty(), ErrorCode::EmptySupport, "no natural data");
  require(kernel.size() == naturals.size(), ErrorCode::InvalidArgument,
          "kernel must list augmentations for every natural datum");

  double natural_total = 0.0;
  for (const auto& nat : naturals) {
    require(std::isfinite(nat.prob) && nat.prob >= 0.0, ErrorCode::InvalidArgument, "natural probability invalid");
    natural_total += nat.prob;
  }
  require(std::abs(natural_total - 1.0) <= kNormalizationTol, ErrorCode::NotNormalized,
          "natural probabilities sum to " + std::to_string(natural_total));

  std::map<Datapoint, Index> index_of;
  std::vector<Datapoint> vertices;
  std::unordered_map<std::uint64_t, double> mass;  // key = lo * n_max + hi, filled below
  std::vector<std::vector<std::pair<Index, double>>> supports(naturals.size());

  for (std::size_t a = 0; a < naturals.size(); ++a) {
    const auto& row = kernel[a];
    require(!row.empty(), ErrorCode::EmptySupport, "natural " + std::to_string(a) + " has no augmentations");
    double row_total = 0.0;
    for (const auto& aug : row) {
      require(std::isfinite(aug.prob) && aug.prob >= 0.0, ErrorCode::InvalidArgument,
              "augmentation probability invalid");
      row_total += aug.prob;
    }
    require(std::abs(row_total - 1.0) <= kNormalizationTol, ErrorCode::KernelNotNormalized,
            "augmentations of natural " + std::to_string(a) + " sum to " + std::to_string(row_total));
    if (naturals[a].prob == 0.0) continue;

    auto& support = supports[a];
    for (const auto& aug : row) {
      if (aug.prob == 0.0) continue;
      Datapoint p = canonical(aug.point);
      if (!vertices.empty())
        require(p.size() == vertices.front().size(), ErrorCode::DimensionMismatch,
                "augmentation " + describe(p) + " has inconsistent dimension");
      auto [it, inserted] = index_of.emplace(p, static_cast<Index>(vertices.size()));
      if (inserted) vertices.push_back(std::move(p));
      auto hit = std::find_if(support.begin(), support.end(), [&](const auto& e) { return e.first == it->second; });
      if (hit == support.end())
        support.emplace_back(it->second, aug.prob);
      else
        hit->second += aug.prob;
    }
  }
  require(!vertices.empty(), ErrorCode::EmptySupport, "augmentation supports are empty");

  const auto n = static_cast<std::uint64_t>(vertices.size());
  for (std::size_t a = 0; a < naturals.size(); ++a) {
    const double p = naturals[a].prob;
    for (const auto& [u, pu] : supports[a])
      for (const auto& [v, pv] : supports[a]) {
        if (u > v) continue;
        // One product per unordered pair keeps the joint exactly symmetric.
        const double w = (u == v) ? p * pu * pu : p * std::min(pu, pv) * std::max(pu, pv);
        mass[static_cast<std::uint64_t>(u) * n + static_cast<std::uint64_t>(v)] += w;
      }
  }

  std::vector<std::pair<std::uint64_t, double>> entries(mass.begin(), mass.end());
  std::sort(entries.begin(), entries.end());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size() * 2);
  for (const auto& [key, w] : entries) {
    const auto u = static_cast<Index>(key / n), v = static_cast<Index>(key % n);
    triplets.emplace_back(u, v, w);
    if (u != v) triplets.emplace_back(v, u, w);
  }

  Matrix coords(static_cast<Index>(n), static_cast<Index>(vertices.front().size()));
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t c = 0; c < vertices[i].size(); ++c)
      coords(static_cast<Index>(i), static_cast<Index>(c)) = vertices[i][c];
  return build_graph(coords, JointMatrix::from_triplets(static_cast<Index>(n), triplets, dense_limit));
}

// ------------------------------------------------------------- components

DisjointSets::DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t x) noexcept {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const std::size_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

void DisjointSets::unite(std::size_t a, std::size_t b) noexcept {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
}

Partition connected_components(const PositivePairGraph& graph) {
  const auto n = static_cast<std::size_t>(graph.size());
  DisjointSets sets(n);
  graph.joint().for_each_nonzero([&](Index i, Index j, double w) {
    if (w > 0.0) sets.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  });
  std::vector<int> id_of_root(n, -1);
  std::vector<int> assignment(n);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (id_of_root[root] < 0) id_of_root[root] = next++;
    assignment[i] = id_of_root[root];
  }
  return Partition{std::move(assignment), next};
}

double cross_cluster_mass(const PositivePairGraph& graph, const Partition& partition) {
  require(static_cast<Index>(partition.assignment.size()) == graph.size(), ErrorCode::DimensionMismatch,
          "partition does not cover the graph");
  double alpha = 0.0;
  graph.joint().for_each_nonzero([&](Index i, Index j, double w) {
    if (partition.assignment[static_cast<std::size_t>(i)] != partition.assignment[static_cast<std::size_t>(j)])
      alpha += w;
  });
  return std::clamp(alpha, 0.0, 1.0);
}

std::vector<double> cluster_masses(const PositivePairGraph& graph, const Partition& partition) {
  require(static_cast<Index>(partition.assignment.size()) == graph.size(), ErrorCode::DimensionMismatch,
          "partition does not cover the graph");
  std::vector<double> masses(static_cast<std::size_t>(partition.m), 0.0);
  for (Index i = 0; i < graph.size(); ++i)
    masses[static_cast<std::size_t>(partition.assignment[static_cast<std::size_t>(i)])] += graph.marginal()(i);
  return masses;
}

PositivePairGraph restrict_to(const PositivePairGraph& graph, std::vector<Index> subset) {
  require(!subset.empty(), ErrorCode::EmptySubset, "subset is empty");
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  require(subset.front() >= 0 && subset.back() < graph.size(), ErrorCode::InvalidArgument,
          "subset index out of range");

  std::vector<Index> local(static_cast<std::size_t>(graph.size()), -1);
  for (std::size_t k = 0; k < subset.size(); ++k) local[static_cast<std::size_t>(subset[k])] = static_cast<Index>(k);

  std::vector<Eigen::Triplet<double>> triplets;
  double conditional = 0.0;
  graph.joint().for_each_nonzero([&](Index i, Index j, double w) {
    const Index a = local[static_cast<std::size_t>(i)], b = local[static_cast<std::size_t>(j)];
    if (a < 0 || b < 0) return;
    triplets.emplace_back(a, b, w);
    conditional += w;
  });
  require(conditional > 0.0, ErrorCode::ZeroConditionalMass, "no positive-pair mass inside subset");
  for (auto& t : triplets) t = Eigen::Triplet<double>(t.row(), t.col(), t.value() / conditional);

  Matrix coords(static_cast<Index>(subset.size()), graph.dim());
  for (std::size_t k = 0; k < subset.size(); ++k) coords.row(static_cast<Index>(k)) = graph.coords().row(subset[k]);
  return build_graph(coords, JointMatrix::from_triplets(static_cast<Index>(subset.size()), triplets,
                                                        graph.joint().storage() == JointMatrix::Storage::Dense
                                                            ? JointMatrix::kDenseLimit
                                                            : Index{0}));
}

}  // namespace sclab
