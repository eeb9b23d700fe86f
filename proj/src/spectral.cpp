#include "sclab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace sclab {

namespace {

constexpr double kTieTol = 1e-10;
constexpr double kSignTol = 1e-12;

struct SubsetView {
  std::vector<Index> vertices;  // sorted, unique
  std::vector<Index> local;     // graph index -> position in S, or -1
  Vector p;                     // p_data^S
  Matrix w;                     // joint restricted to S x S, conditioned to sum 1
};

SubsetView view_subset(const PositivePairGraph& graph, std::vector<Index> subset) {
  require(!subset.empty(), ErrorCode::EmptySubset, "subset is empty");
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  require(subset.front() >= 0 && subset.back() < graph.size(), ErrorCode::InvalidArgument,
          "subset index out of range");
  SubsetView view;
  view.vertices = std::move(subset);
  const auto m = static_cast<Index>(view.vertices.size());
  view.local.assign(static_cast<std::size_t>(graph.size()), -1);
  for (Index a = 0; a < m; ++a) view.local[static_cast<std::size_t>(view.vertices[static_cast<std::size_t>(a)])] = a;
  view.p.resize(m);
  for (Index a = 0; a < m; ++a) view.p(a) = graph.marginal()(view.vertices[static_cast<std::size_t>(a)]);
  view.p /= view.p.sum();
  view.w = Matrix::Zero(m, m);
  graph.joint().for_each_nonzero([&](Index i, Index j, double w) {
    const Index a = view.local[static_cast<std::size_t>(i)], b = view.local[static_cast<std::size_t>(j)];
    if (a >= 0 && b >= 0) view.w(a, b) = w;
  });
  const double mass = view.w.sum();
  if (m == 1 && mass == 0.0) return view;
  require(mass > 0.0, ErrorCode::ZeroConditionalMass, "no positive-pair mass inside subset");
  view.w /= mass;
  return view;
}

// Orthonormal basis of the complement of unit vector q (m x (m-1)).
Matrix complement_basis(const Vector& q) {
  Eigen::HouseholderQR<Matrix> qr(q);
  const Matrix full = qr.householderQ() * Matrix::Identity(q.size(), q.size());
  return full.rightCols(q.size() - 1);
}

GraphFunction zero_function(const PositivePairGraph& graph) { return make_function(graph, Vector::Zero(graph.size())); }

MinExpansion tabular_min_expansion(const PositivePairGraph& graph, const SubsetView& view) {
  const auto m = static_cast<Index>(view.vertices.size());
  if (m == 1) return {ExtendedReal::infinity(), zero_function(graph), true};
  // numerator(g) = 2 g^T (D' - W') g, denominator(g) = 2 g^T (P - p p^T) g.
  // With h = P^{1/2} g and h orthogonal to sqrt(p), the ratio is a Rayleigh
  // quotient of B = P^{-1/2} (D' - W') P^{-1/2} on that complement.
  const Vector sqrt_p = view.p.cwiseSqrt();
  const Vector inv_sqrt_p = sqrt_p.cwiseInverse();
  Matrix lap = -view.w;
  lap.diagonal() += view.w.rowwise().sum();
  const Matrix b = inv_sqrt_p.asDiagonal() * lap * inv_sqrt_p.asDiagonal();
  const Matrix basis = complement_basis(sqrt_p);
  Matrix reduced = basis.transpose() * b * basis;
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(reduced);
  require(solver.info() == Eigen::Success, ErrorCode::EigSolverFailure, "restricted tabular eigenproblem failed");
  const Vector h = basis * solver.eigenvectors().col(0);
  Vector values = Vector::Zero(graph.size());
  for (Index a = 0; a < m; ++a) values(view.vertices[static_cast<std::size_t>(a)]) = h(a) * inv_sqrt_p(a);
  return {ExtendedReal::finite(std::max(0.0, solver.eigenvalues()(0))), make_function(graph, std::move(values)), true};
}

MinExpansion linear_min_expansion(const PositivePairGraph& graph, const SubsetView& view) {
  const auto m = static_cast<Index>(view.vertices.size());
  const Index d = graph.dim();
  if (m == 1) return {ExtendedReal::infinity(), zero_function(graph), true};
  Matrix x(m, d);
  for (Index a = 0; a < m; ++a) x.row(a) = graph.coords().row(view.vertices[static_cast<std::size_t>(a)]);
  const Eigen::RowVectorXd mean = view.p.transpose() * x;
  const Matrix centered = x.rowwise() - mean;
  Matrix c = 2.0 * centered.transpose() * view.p.asDiagonal() * centered;
  Matrix a_form = Matrix::Zero(d, d);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      if (view.w(i, j) != 0.0) {
        const Vector diff = (x.row(i) - x.row(j)).transpose();
        a_form.noalias() += view.w(i, j) * diff * diff.transpose();
      }
  require(c.allFinite() && a_form.allFinite(), ErrorCode::DegenerateCovariance, "covariance is not finite");

  Eigen::SelfAdjointEigenSolver<Matrix> cs(0.5 * (c + c.transpose()));
  require(cs.info() == Eigen::Success, ErrorCode::EigSolverFailure, "covariance eigenproblem failed");
  const double top = cs.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < d; ++i)
    if (cs.eigenvalues()(i) > 1e-12 * std::max(top, 1e-300)) keep.push_back(i);
  if (keep.empty() || top == 0.0) return {ExtendedReal::infinity(), zero_function(graph), true};

  Matrix t(d, static_cast<Index>(keep.size()));  // V Lambda^{-1/2} on the range of C_S
  for (std::size_t c_i = 0; c_i < keep.size(); ++c_i)
    t.col(static_cast<Index>(c_i)) = cs.eigenvectors().col(keep[c_i]) / std::sqrt(cs.eigenvalues()(keep[c_i]));
  Matrix reduced = t.transpose() * a_form * t;
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(reduced);
  require(solver.info() == Eigen::Success, ErrorCode::EigSolverFailure, "linear expansion eigenproblem failed");
  const Vector w = t * solver.eigenvectors().col(0);
  return {ExtendedReal::finite(std::max(0.0, solver.eigenvalues()(0))),
          make_function(graph, graph.coords() * w), true};
}

// Q_S for the scalar head w^T f over a nonlinear class, minimized by
// multi-start gradient descent on (theta, w). An upper estimate of the infimum.
MinExpansion heuristic_min_expansion(const PositivePairGraph& graph, const SubsetView& view,
                                     const FunctionClassSpec& cls, std::uint64_t seed) {
  const auto m = static_cast<Index>(view.vertices.size());
  if (m == 1) return {ExtendedReal::infinity(), zero_function(graph), false};
  constexpr int kStarts = 5;
  constexpr int kIters = 1500;

  auto evaluate = [&](const Vector& g, Vector* grad) -> double {
    Vector gs(m);
    for (Index a = 0; a < m; ++a) gs(a) = g(view.vertices[static_cast<std::size_t>(a)]);
    const double mean = view.p.dot(gs);
    const Vector cen = gs.array() - mean;
    const double den = 2.0 * view.p.dot(cen.cwiseProduct(cen));
    double num = 0.0;
    Vector dnum = Vector::Zero(m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) {
        const double w = view.w(i, j);
        if (w == 0.0) continue;
        num += w * (gs(i) - gs(j)) * (gs(i) - gs(j));
        dnum(i) += 4.0 * w * (gs(i) - gs(j));  // symmetric joint: both orders
      }
    if (den <= 1e-14 * std::max(1.0, gs.squaredNorm())) return std::numeric_limits<double>::infinity();
    if (grad) {
      const Vector dden = 4.0 * view.p.cwiseProduct(cen);
      const Vector local = (dnum * den - num * dden) / (den * den);
      grad->setZero(graph.size());
      for (Index a = 0; a < m; ++a) (*grad)(view.vertices[static_cast<std::size_t>(a)]) = local(a);
    }
    return num / den;
  };

  double best = std::numeric_limits<double>::infinity();
  Vector best_values = Vector::Zero(graph.size());
  for (int start = 0; start < kStarts; ++start) {
    RepresentationModel model = RepresentationModel::random(cls, 1.0, seed + 7919ULL * static_cast<std::uint64_t>(start));
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(start)));
    std::normal_distribution<double> normal;
    Vector head(cls.k);
    for (Index i = 0; i < head.size(); ++i) head(i) = normal(rng);
    double step = 0.1;
    Vector grad_g;
    Matrix f = forward(model, graph);
    double value = evaluate(f * head, &grad_g);
    for (int it = 0; it < kIters && std::isfinite(value) && step > 1e-12; ++it) {
      const Matrix cot = grad_g * head.transpose();
      const Vector gp = grad_params(model, graph, cot);
      const Vector gh = f.transpose() * grad_g;
      const Vector p0 = model.params();
      const Vector h0 = head;
      model.set_params(p0 - step * gp);
      head = h0 - step * gh;
      Vector trial_grad;
      const Matrix trial_f = forward(model, graph);
      const double trial = evaluate(trial_f * head, &trial_grad);
      if (trial <= value) {
        value = trial;
        f = trial_f;
        grad_g = std::move(trial_grad);
        step *= 1.1;
      } else {
        model.set_params(p0);
        head = h0;
        step *= 0.5;
      }
    }
    if (value < best) {
      best = value;
      best_values = f * head;
    }
  }
  if (!std::isfinite(best)) return {ExtendedReal::infinity(), zero_function(graph), false};
  return {ExtendedReal::finite(best), make_function(graph, std::move(best_values)), false};
}

struct EigenPiece {
  double value;
  Index first_touch;
  Vector g;  // full-length eigenfunction
};

}  // namespace

GraphFunction make_function(const PositivePairGraph& graph, Vector values) {
  require(values.size() == graph.size(), ErrorCode::DimensionMismatch,
          "function has " + std::to_string(values.size()) + " values, graph has " + std::to_string(graph.size()));
  return GraphFunction{std::move(values), graph.id()};
}

void require_same_graph(const PositivePairGraph& graph, const GraphFunction& g) {
  require(g.graph_id == graph.id() && g.values.size() == graph.size(), ErrorCode::GraphMismatch,
          "function belongs to a different graph");
}

double ExtendedReal::value() const {
  require(!infinite_, ErrorCode::InvalidArgument, "value is +infinity");
  return value_;
}

double weighted_inner(const PositivePairGraph& graph, const Vector& a, const Vector& b) {
  require(a.size() == graph.size() && b.size() == graph.size(), ErrorCode::DimensionMismatch,
          "vector length differs from vertex count");
  return (graph.marginal().array() * a.array() * b.array()).sum();
}

Matrix laplacian_apply(const PositivePairGraph& graph, const Matrix& values) {
  const Matrix avg = graph.joint().multiply(values);
  return values - graph.marginal().cwiseInverse().asDiagonal() * avg;
}

GraphFunction laplacian_apply(const PositivePairGraph& graph, const GraphFunction& g) {
  require_same_graph(graph, g);
  return GraphFunction{laplacian_apply(graph, Matrix(g.values)).col(0), graph.id()};
}

Matrix SpectralDecomposition::as_matrix() const {
  if (eigenfunctions.empty()) return {};
  Matrix out(eigenfunctions.front().values.size(), static_cast<Index>(eigenfunctions.size()));
  for (std::size_t i = 0; i < eigenfunctions.size(); ++i) out.col(static_cast<Index>(i)) = eigenfunctions[i].values;
  return out;
}

SpectralDecomposition eigendecompose(const PositivePairGraph& graph, Index count) {
  const Index n = graph.size();
  require(count >= 0 && count <= n, ErrorCode::InvalidArgument,
          "count " + std::to_string(count) + " outside [0, " + std::to_string(n) + "]");
  const Partition comps = connected_components(graph);
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(comps.m));
  std::vector<Index> local(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    auto& mem = members[static_cast<std::size_t>(comps.assignment[static_cast<std::size_t>(i)])];
    local[static_cast<std::size_t>(i)] = static_cast<Index>(mem.size());
    mem.push_back(i);
  }
  std::vector<Matrix> blocks(members.size());
  for (std::size_t c = 0; c < members.size(); ++c)
    blocks[c] = Matrix::Zero(static_cast<Index>(members[c].size()), static_cast<Index>(members[c].size()));
  graph.joint().for_each_nonzero([&](Index i, Index j, double w) {
    const auto c = static_cast<std::size_t>(comps.assignment[static_cast<std::size_t>(i)]);
    blocks[c](local[static_cast<std::size_t>(i)], local[static_cast<std::size_t>(j)]) = w;
  });

  std::vector<EigenPiece> pieces;
  pieces.reserve(static_cast<std::size_t>(n));
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& mem = members[c];
    const auto q = static_cast<Index>(mem.size());
    Vector inv_sqrt_d(q);
    for (Index a = 0; a < q; ++a) inv_sqrt_d(a) = 1.0 / std::sqrt(graph.marginal()(mem[static_cast<std::size_t>(a)]));
    Matrix sym = -(inv_sqrt_d.asDiagonal() * blocks[c] * inv_sqrt_d.asDiagonal());
    sym.diagonal().array() += 1.0;
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    require(solver.info() == Eigen::Success, ErrorCode::EigSolverFailure,
            "eigensolver failed on component " + std::to_string(c));
    for (Index e = 0; e < q; ++e) {
      Vector g = Vector::Zero(n);
      for (Index a = 0; a < q; ++a) g(mem[static_cast<std::size_t>(a)]) = solver.eigenvectors()(a, e) * inv_sqrt_d(a);
      pieces.push_back({solver.eigenvalues()(e), mem.front(), std::move(g)});
    }
  }

  std::stable_sort(pieces.begin(), pieces.end(), [](const EigenPiece& a, const EigenPiece& b) { return a.value < b.value; });
  // Within a run of tied eigenvalues, order by the first vertex touched.
  for (std::size_t lo = 0; lo < pieces.size();) {
    std::size_t hi = lo + 1;
    while (hi < pieces.size() && pieces[hi].value - pieces[hi - 1].value <= kTieTol) ++hi;
    for (std::size_t k = lo; k < hi; ++k) {
      Index first = n;
      for (Index i = 0; i < n; ++i)
        if (std::abs(pieces[k].g(i)) > kSignTol) {
          first = i;
          break;
        }
      pieces[k].first_touch = first;
    }
    std::stable_sort(pieces.begin() + static_cast<std::ptrdiff_t>(lo), pieces.begin() + static_cast<std::ptrdiff_t>(hi),
                     [](const EigenPiece& a, const EigenPiece& b) { return a.first_touch < b.first_touch; });
    lo = hi;
  }

  SpectralDecomposition out;
  for (Index e = 0; e < count; ++e) {
    EigenPiece& piece = pieces[static_cast<std::size_t>(e)];
    for (Index i = 0; i < n; ++i)
      if (std::abs(piece.g(i)) > kSignTol) {
        if (piece.g(i) < 0.0) piece.g = -piece.g;
        break;
      }
    out.eigenvalues.push_back(piece.value);
    out.eigenfunctions.push_back(GraphFunction{std::move(piece.g), graph.id()});
  }
  return out;
}

double pair_discrepancy(const PositivePairGraph& graph, const Matrix& values) {
  require(values.rows() == graph.size(), ErrorCode::GraphMismatch, "values do not cover the graph");
  double total = 0.0;
  graph.joint().for_each_nonzero(
      [&](Index i, Index j, double w) { total += w * (values.row(i) - values.row(j)).squaredNorm(); });
  return total;
}

double pair_discrepancy(const PositivePairGraph& graph, const std::vector<GraphFunction>& fs) {
  Matrix values(graph.size(), static_cast<Index>(fs.size()));
  for (std::size_t c = 0; c < fs.size(); ++c) {
    require_same_graph(graph, fs[c]);
    values.col(static_cast<Index>(c)) = fs[c].values;
  }
  return pair_discrepancy(graph, values);
}

ExtendedReal expansion_Q(const PositivePairGraph& graph, const std::vector<Index>& subset, const GraphFunction& g) {
  require_same_graph(graph, g);
  const SubsetView view = view_subset(graph, subset);
  const auto m = static_cast<Index>(view.vertices.size());
  Vector gs(m);
  for (Index a = 0; a < m; ++a) gs(a) = g.values(view.vertices[static_cast<std::size_t>(a)]);
  const double mean = view.p.dot(gs);
  const Vector cen = gs.array() - mean;
  const double den = 2.0 * view.p.dot(cen.cwiseProduct(cen));
  const double scale = view.p.dot(gs.cwiseProduct(gs));
  if (den <= 1e-20 * scale || den == 0.0) return ExtendedReal::infinity();
  double num = 0.0;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      if (view.w(i, j) != 0.0) num += view.w(i, j) * (gs(i) - gs(j)) * (gs(i) - gs(j));
  return ExtendedReal::finite(num / den);
}

MinExpansion min_expansion_over_class(const PositivePairGraph& graph, const std::vector<Index>& subset,
                                      const FunctionClassSpec& cls, std::uint64_t seed) {
  const SubsetView view = view_subset(graph, subset);
  switch (cls.tag) {
    case ClassTag::Tabular: return tabular_min_expansion(graph, view);
    case ClassTag::Linear: return linear_min_expansion(graph, view);
    case ClassTag::Relu:
    case ClassTag::Conv: {
      FunctionClassSpec spec = cls;
      spec.d = graph.dim();
      spec.n = graph.size();
      spec.validate();
      return heuristic_min_expansion(graph, view, spec, seed);
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown class");
}

bool is_eigenfunction(const PositivePairGraph& graph, const GraphFunction& g, double psi, double tol) {
  require_same_graph(graph, g);
  const double norm = weighted_inner(graph, g.values, g.values);
  require(norm > 0.0, ErrorCode::ZeroFunction, "E[g^2] = 0");
  const Vector residual = psi * g.values - laplacian_apply(graph, g).values;
  return weighted_inner(graph, residual, residual) <= tol * norm;
}

}  // namespace sclab
