#include "sclab/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace sclab {

namespace {

double power(double base, int exp) { return std::pow(base, static_cast<double>(exp)); }

void check_guard(double bound, std::size_t guard) {
  require(bound <= static_cast<double>(guard), ErrorCode::SizeGuardExceeded,
          "generator would enumerate up to " + std::to_string(static_cast<long double>(bound)) +
              " vertices (guard " + std::to_string(guard) + ")");
}

void check_tau_grid(const std::vector<double>& grid) {
  require(!grid.empty(), ErrorCode::InvalidArgument, "tau grid is empty");
  for (double t : grid) require(std::isfinite(t), ErrorCode::InvalidArgument, "tau grid values must be finite");
}

// Calls fn(tuple) for every tuple over `grid` of length `len`, first entry
// varying slowest.
template <class Fn>
void for_each_tuple(const std::vector<double>& grid, int len, Fn&& fn) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(len), 0);
  std::vector<double> tuple(static_cast<std::size_t>(len));
  while (true) {
    for (int j = 0; j < len; ++j) tuple[static_cast<std::size_t>(j)] = grid[idx[static_cast<std::size_t>(j)]];
    fn(tuple);
    int pos = len - 1;
    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == grid.size()) idx[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) return;
  }
}

void check_label_map(const LabelMap& map, int s, int m) {
  require(map.size() == (std::size_t{1} << s), ErrorCode::IncompleteLabelMap,
          "label map has " + std::to_string(map.size()) + " entries, expected " + std::to_string(1 << s));
  for (int y : map)
    require(y >= 0 && y < m, ErrorCode::IncompleteLabelMap, "label " + std::to_string(y) + " outside [0, m)");
}

}  // namespace

Matrix LabeledGraph::label_onehots() const {
  Matrix y = Matrix::Zero(graph.size(), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Index>(i), labels[i]) = 1.0;
  return y;
}

int bin_code(std::span<const double> signs) {
  int code = 0;
  for (double v : signs) code = (code << 1) | (v > 0.0 ? 1 : 0);
  return code;
}

std::vector<double> bin_inverse(int code, int s) {
  std::vector<double> h(static_cast<std::size_t>(s));
  for (int j = 0; j < s; ++j) h[static_cast<std::size_t>(j)] = ((code >> (s - 1 - j)) & 1) ? 1.0 : -1.0;
  return h;
}

// ------------------------------------------------------------------ Example 1

void Example1Spec::validate() const {
  require(d >= 1 && d <= 30, ErrorCode::InvalidArgument, "d must lie in [1, 30]");
  require(s >= 1 && s <= d, ErrorCode::InvalidArgument, "s must lie in [1, d]");
  require(label_dim >= 1 && label_dim <= s, ErrorCode::InvalidArgument, "label_dim must lie in [1, s]");
  check_tau_grid(tau_grid);
}

std::size_t Example1Spec::vertex_bound() const {
  const double b = power(2.0, d) * power(static_cast<double>(tau_grid.size()), d - s);
  return b > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(b);
}

LabeledGraph example1_graph(const Example1Spec& spec) {
  spec.validate();
  check_guard(power(2.0, spec.d) * power(static_cast<double>(spec.tau_grid.size()), spec.d - spec.s),
              spec.size_guard);

  const int num_naturals = 1 << spec.d;
  const double aug_prob = 1.0 / power(static_cast<double>(spec.tau_grid.size()), spec.d - spec.s);
  std::vector<WeightedPoint> naturals;
  std::vector<std::vector<WeightedPoint>> kernel;
  for (int a = 0; a < num_naturals; ++a) {
    Datapoint x = bin_inverse(a, spec.d);
    naturals.push_back({x, 1.0 / num_naturals});
    auto& augs = kernel.emplace_back();
    for_each_tuple(spec.tau_grid, spec.d - spec.s, [&](const std::vector<double>& tau) {
      Datapoint y = x;
      for (int j = spec.s; j < spec.d; ++j) y[static_cast<std::size_t>(j)] *= tau[static_cast<std::size_t>(j - spec.s)];
      augs.push_back({std::move(y), aug_prob});
    });
  }

  LabeledGraph out{from_augmentation_process(naturals, kernel), {}, 2, {}, 1 << spec.s};
  for (Index i = 0; i < out.graph.size(); ++i) {
    Datapoint x = out.graph.vertex(i);
    out.labels.push_back(x[static_cast<std::size_t>(spec.label_dim - 1)] > 0.0 ? 1 : 0);
    out.groups.push_back(bin_code(std::span<const double>(x.data(), static_cast<std::size_t>(spec.s))));
  }
  return out;
}

LabelMap sign_label_map(int s, int dim) {
  require(dim >= 1 && dim <= s, ErrorCode::InvalidArgument, "label dimension must lie in [1, s]");
  LabelMap map(std::size_t{1} << s);
  for (int c = 0; c < (1 << s); ++c) map[static_cast<std::size_t>(c)] = (c >> (s - dim)) & 1;
  return map;
}

LabelMap xor_label_map(int s, int dim_a, int dim_b) {
  require(dim_a >= 1 && dim_a <= s && dim_b >= 1 && dim_b <= s && dim_a != dim_b, ErrorCode::InvalidArgument,
          "xor dimensions must be distinct and lie in [1, s]");
  LabelMap map(std::size_t{1} << s);
  for (int c = 0; c < (1 << s); ++c)
    map[static_cast<std::size_t>(c)] = ((c >> (s - dim_a)) & 1) ^ ((c >> (s - dim_b)) & 1);
  return map;
}

LabelMap enumeration_label_map(int s) {
  LabelMap map(std::size_t{1} << s);
  for (int c = 0; c < (1 << s); ++c) map[static_cast<std::size_t>(c)] = c;
  return map;
}

LabeledGraph example2_labels(const Example1Spec& spec, const LabelMap& label_map, int m) {
  spec.validate();
  require(m >= 1, ErrorCode::InvalidArgument, "m must be positive");
  check_label_map(label_map, spec.s, m);
  LabeledGraph out = example1_graph(spec);
  out.num_classes = m;
  for (std::size_t i = 0; i < out.labels.size(); ++i)
    out.labels[i] = label_map[static_cast<std::size_t>(out.groups[i])];
  return out;
}

// ------------------------------------------------------------------ Example 3

Example3Spec example3_lattice(int r, int subclusters_per_set, int points_per_subcluster, double rho, double gamma,
                              int m, std::vector<int> labels) {
  require(r >= 1 && subclusters_per_set >= 1 && points_per_subcluster >= 1, ErrorCode::InvalidArgument,
          "lattice sizes must be positive");
  require(rho > 0.0 && gamma > 0.0, ErrorCode::InvalidArgument, "rho and gamma must be positive");
  Example3Spec spec;
  spec.r = r;
  spec.rho = rho;
  spec.gamma = gamma;
  spec.m = m;
  spec.labels = std::move(labels);
  const int q = subclusters_per_set * points_per_subcluster;
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(q))));
  // 0.99 keeps the grid diagonal strictly below rho after rounding.
  const double h = 0.99 * rho / std::sqrt(2.0);
  for (int i = 0; i < r; ++i) {
    const double cx = i * (gamma + rho);
    auto& pts = spec.point_sets.emplace_back();
    auto& sub = spec.subclusters.emplace_back();
    for (int j = 0; j < q; ++j) {
      const int a = j % side, b = j / side;
      const double ox = side > 1 ? (static_cast<double>(a) / (side - 1) - 0.5) * h : 0.0;
      const double oy = side > 1 ? (static_cast<double>(b) / (side - 1) - 0.5) * h : 0.0;
      pts.push_back({cx + ox, oy});
      sub.push_back(j / points_per_subcluster);
    }
  }
  return spec;
}

LabeledGraph example3_graph(const Example3Spec& spec) {
  require(spec.r >= 1 && static_cast<int>(spec.point_sets.size()) == spec.r, ErrorCode::InvalidArgument,
          "point_sets must hold r sets");
  require(static_cast<int>(spec.labels.size()) == spec.r, ErrorCode::InvalidArgument, "labels must hold r entries");
  require(spec.m >= 1, ErrorCode::InvalidArgument, "m must be positive");
  for (int y : spec.labels) require(y >= 0 && y < spec.m, ErrorCode::InvalidArgument, "set label outside [0, m)");
  require(spec.subclusters.empty() || spec.subclusters.size() == spec.point_sets.size(), ErrorCode::InvalidArgument,
          "subclusters must be empty or list one assignment per set");
  const std::size_t d = spec.point_sets.front().empty() ? 0 : spec.point_sets.front().front().size();
  for (std::size_t i = 0; i < spec.point_sets.size(); ++i) {
    require(!spec.point_sets[i].empty(), ErrorCode::EmptySupport, "set " + std::to_string(i) + " is empty");
    for (const auto& p : spec.point_sets[i])
      require(p.size() == d, ErrorCode::DimensionMismatch, "points must share one dimension");
    if (!spec.subclusters.empty())
      require(spec.subclusters[i].size() == spec.point_sets[i].size(), ErrorCode::InvalidArgument,
              "subcluster assignment length differs from set size");
  }

  auto dist = [](const Datapoint& a, const Datapoint& b) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) acc += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(acc);
  };
  constexpr double kGeomTol = 1e-12;
  for (std::size_t i = 0; i < spec.point_sets.size(); ++i)
    for (std::size_t j = i; j < spec.point_sets.size(); ++j)
      for (const auto& a : spec.point_sets[i])
        for (const auto& b : spec.point_sets[j]) {
          const double dd = dist(a, b);
          if (i == j)
            require(dd <= spec.rho + kGeomTol, ErrorCode::GeometryViolation,
                    "set " + std::to_string(i) + " has diameter above rho (" + std::to_string(dd) + ")");
          else
            require(dd >= spec.gamma - kGeomTol, ErrorCode::GeometryViolation,
                    "sets " + std::to_string(i) + " and " + std::to_string(j) + " closer than gamma (" +
                        std::to_string(dd) + ")");
        }

  std::vector<WeightedPoint> naturals;
  std::vector<std::vector<WeightedPoint>> kernel;
  for (std::size_t i = 0; i < spec.point_sets.size(); ++i) {
    const auto& pts = spec.point_sets[i];
    const double p_nat = 1.0 / (spec.r * static_cast<double>(pts.size()));
    for (std::size_t a = 0; a < pts.size(); ++a) {
      naturals.push_back({pts[a], p_nat});
      auto& augs = kernel.emplace_back();
      std::vector<std::size_t> same;
      for (std::size_t b = 0; b < pts.size(); ++b)
        if (spec.subclusters.empty() || spec.subclusters[i][b] == spec.subclusters[i][a]) same.push_back(b);
      for (std::size_t b : same) augs.push_back({pts[b], 1.0 / static_cast<double>(same.size())});
    }
  }
  LabeledGraph out{from_augmentation_process(naturals, kernel), {}, spec.m, {}, spec.r};
  std::map<Datapoint, int> set_of;
  for (std::size_t i = 0; i < spec.point_sets.size(); ++i)
    for (const auto& p : spec.point_sets[i]) {
      Datapoint q = p;
      for (double& v : q) v = (v == 0.0) ? 0.0 : v;
      set_of[q] = static_cast<int>(i);
    }
  for (Index v = 0; v < out.graph.size(); ++v) {
    const int set = set_of.at(out.graph.vertex(v));
    out.groups.push_back(set);
    out.labels.push_back(spec.labels[static_cast<std::size_t>(set)]);
  }
  return out;
}

// ------------------------------------------------------------------ Example 4

void Example4Spec::validate() const {
  require(d >= 2 && d <= 30, ErrorCode::InvalidArgument, "d must lie in [2, 30]");
  require(s >= 1 && s < d, ErrorCode::InvalidArgument, "patch length s must satisfy 1 <= s < d");
  require(std::isfinite(gamma) && gamma > 1.0, ErrorCode::InvalidArgument, "gamma must exceed 1");
  check_tau_grid(tau_grid);
  for (double t : tau_grid)
    require(std::abs(t) <= 1.0, ErrorCode::InvalidArgument, "tau values must lie in [-1, 1]");
  require(m >= 1, ErrorCode::InvalidArgument, "m must be positive");
  if (label_map.empty())
    require(m == 2, ErrorCode::IncompleteLabelMap, "default patch-sign labels need m = 2");
  else
    check_label_map(label_map, s, m);
}

std::size_t Example4Spec::vertex_bound() const {
  const double b = d * power(2.0, d) * power(static_cast<double>(tau_grid.size()), d - s);
  return b > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(b);
}

LabelMap Example4Spec::effective_label_map() const {
  return label_map.empty() ? sign_label_map(s, 1) : label_map;
}

std::optional<PatchInfo> locate_patch(const Example4Spec& spec, std::span<const double> x) {
  const int d = spec.d;
  if (static_cast<int>(x.size()) != d) return std::nullopt;
  for (int t = 0; t < d; ++t) {
    bool hit = true;
    std::vector<double> patch(static_cast<std::size_t>(spec.s));
    for (int j = 0; j < spec.s && hit; ++j) {
      const double v = x[static_cast<std::size_t>((t + j) % d)];
      hit = std::abs(std::abs(v) - spec.gamma) <= 1e-12 * spec.gamma;
      patch[static_cast<std::size_t>(j)] = v;
    }
    if (hit) return PatchInfo{t, bin_code(patch)};
  }
  return std::nullopt;
}

LabeledGraph example4_graph(const Example4Spec& spec) {
  spec.validate();
  check_guard(spec.d * power(2.0, spec.d) * power(static_cast<double>(spec.tau_grid.size()), spec.d - spec.s),
              spec.size_guard);
  const int d = spec.d, s = spec.s;
  const double p_nat = 1.0 / (d * power(2.0, d));
  const double aug_prob = 1.0 / power(static_cast<double>(spec.tau_grid.size()), d - s);

  std::vector<WeightedPoint> naturals;
  std::vector<std::vector<WeightedPoint>> kernel;
  for (int t = 0; t < d; ++t)
    for (int code = 0; code < (1 << s); ++code)
      for (int sp = 0; sp < (1 << (d - s)); ++sp) {
        Datapoint x(static_cast<std::size_t>(d), 0.0);
        const auto h = bin_inverse(code, s);
        const auto z = bin_inverse(sp, d - s);
        for (int j = 0; j < s; ++j) x[static_cast<std::size_t>((t + j) % d)] = spec.gamma * h[static_cast<std::size_t>(j)];
        for (int j = 0; j < d - s; ++j) x[static_cast<std::size_t>((t + s + j) % d)] = z[static_cast<std::size_t>(j)];
        naturals.push_back({x, p_nat});
        auto& augs = kernel.emplace_back();
        for_each_tuple(spec.tau_grid, d - s, [&](const std::vector<double>& tau) {
          Datapoint y = x;
          for (int j = 0; j < d - s; ++j) y[static_cast<std::size_t>((t + s + j) % d)] *= tau[static_cast<std::size_t>(j)];
          augs.push_back({std::move(y), aug_prob});
        });
      }

  const LabelMap map = spec.effective_label_map();
  LabeledGraph out{from_augmentation_process(naturals, kernel), {}, spec.m, {}, d << s};
  for (Index v = 0; v < out.graph.size(); ++v) {
    const Datapoint x = out.graph.vertex(v);
    const auto info = locate_patch(spec, x);
    require(info.has_value(), ErrorCode::GeometryViolation, "generated vertex without a patch");
    out.groups.push_back(info->location * (1 << s) + info->code);
    out.labels.push_back(map[static_cast<std::size_t>(info->code)]);
  }
  return out;
}

// ----------------------------------------------------------- random graphs

LabeledGraph two_level_graph(const TwoLevelSpec& spec, std::uint64_t seed) {
  require(spec.m >= 1, ErrorCode::InvalidArgument, "m must be positive");
  require(spec.points_per_arm >= 2, ErrorCode::InvalidArgument, "each arm needs at least two points");
  require(spec.cross_mass >= 0.0 && spec.cross_mass < 1.0, ErrorCode::InvalidArgument, "cross_mass must be in [0, 1)");
  require(spec.cross_mass == 0.0 || (spec.m >= 2 && spec.cross_edges >= 1), ErrorCode::InvalidArgument,
          "cross mass needs m >= 2 and at least one cross edge");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int m = spec.m, q = spec.points_per_arm;
  const Index n = static_cast<Index>(m) * 2 * q;
  Matrix coords = Matrix::Zero(n, m + 2);
  Matrix joint = Matrix::Zero(n, n);
  std::vector<int> cluster(static_cast<std::size_t>(n));

  std::vector<double> share(static_cast<std::size_t>(m));
  for (auto& w : share) w = 0.5 + unit(rng);
  const double share_total = std::accumulate(share.begin(), share.end(), 0.0);

  for (int c = 0; c < m; ++c) {
    const double cluster_mass = (1.0 - spec.cross_mass) * share[static_cast<std::size_t>(c)] / share_total;
    const double split = 0.3 + 0.4 * unit(rng);
    for (int arm = 0; arm < 2; ++arm) {
      const Index base = (static_cast<Index>(c) * 2 + arm) * q;
      std::set<double> used;
      for (int a = 0; a < q; ++a) {
        double t;
        do {
          t = (0.2 + 0.8 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
        } while (!used.insert(t).second);
        coords(base + a, c) = 1.0;
        coords(base + a, m + arm) = t;
        cluster[static_cast<std::size_t>(base + a)] = c;
      }
      Matrix block(q, q);
      for (int a = 0; a < q; ++a)
        for (int b = a; b < q; ++b) block(a, b) = block(b, a) = 0.5 + 0.5 * unit(rng);
      block *= (arm == 0 ? split : 1.0 - split) * cluster_mass / block.sum();
      joint.block(base, base, q, q) = block;
    }
  }

  if (spec.cross_mass > 0.0) {
    Matrix cross = Matrix::Zero(n, n);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    int placed = 0;
    while (placed < spec.cross_edges) {
      const Index u = pick(rng), v = pick(rng);
      if (cluster[static_cast<std::size_t>(u)] == cluster[static_cast<std::size_t>(v)]) continue;
      const double w = 0.5 + 0.5 * unit(rng);
      cross(u, v) += w;
      cross(v, u) += w;
      ++placed;
    }
    joint += cross * (spec.cross_mass / cross.sum());
  }
  joint /= joint.sum();
  joint = 0.5 * (joint + joint.transpose()).eval();

  LabeledGraph out{build_graph(coords, JointMatrix::from_dense(joint)), cluster, m, cluster, m};
  return out;
}

LabeledGraph random_component_graph(const std::vector<int>& component_sizes, int dim, double extra_edge_prob,
                                    std::uint64_t seed) {
  require(!component_sizes.empty(), ErrorCode::EmptySupport, "no components requested");
  require(dim >= 1, ErrorCode::InvalidArgument, "dim must be positive");
  for (int q : component_sizes) require(q >= 1, ErrorCode::InvalidArgument, "component sizes must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const Index n = std::accumulate(component_sizes.begin(), component_sizes.end(), Index{0});
  Matrix joint = Matrix::Zero(n, n);
  Matrix coords(n, dim);
  for (Index i = 0; i < n; ++i)
    for (int c = 0; c < dim; ++c) coords(i, c) = normal(rng);
  std::vector<int> component(static_cast<std::size_t>(n));

  Index base = 0;
  for (std::size_t c = 0; c < component_sizes.size(); ++c) {
    const int q = component_sizes[c];
    const double scale = 0.5 + unit(rng);
    for (int a = 0; a < q; ++a) {
      component[static_cast<std::size_t>(base + a)] = static_cast<int>(c);
      joint(base + a, base + a) = 0.05 * scale * unit(rng);
      for (int b = a + 1; b < q; ++b) {
        if (b == a + 1 || unit(rng) < extra_edge_prob) {
          const double w = scale * (0.1 + 0.9 * unit(rng));
          joint(base + a, base + b) = joint(base + b, base + a) = w;
        }
      }
    }
    if (q == 1) joint(base, base) = scale;
    base += q;
  }
  joint /= joint.sum();
  const int k = static_cast<int>(component_sizes.size());
  return LabeledGraph{build_graph(coords, JointMatrix::from_dense(joint)), component, k, component, k};
}

}  // namespace sclab
