#include "sclab/funclass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace sclab {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Vector flatten(const Matrix& m) {
  RowMajor rm = m;
  return Eigen::Map<const Vector>(rm.data(), rm.size());
}

Matrix unflatten(const Vector& v, Index offset, Index rows, Index cols) {
  return Eigen::Map<const RowMajor>(v.data() + offset, rows, cols);
}

void require_graph_dim(const FunctionClassSpec& spec, const PositivePairGraph& graph) {
  if (spec.tag == ClassTag::Tabular)
    require(graph.size() == spec.n, ErrorCode::GraphMismatch,
            "tabular model has " + std::to_string(spec.n) + " rows, graph has " + std::to_string(graph.size()));
  else
    require(graph.dim() == spec.d, ErrorCode::DimensionMismatch,
            "model input dimension " + std::to_string(spec.d) + " != graph dimension " + std::to_string(graph.dim()));
}

// Window w of vertex x for the conv class: x[(w + j) mod d], j < s.
Vector window(const Matrix& coords, Index v, Index w, Index s) {
  const Index d = coords.cols();
  Vector out(s);
  for (Index j = 0; j < s; ++j) out(j) = coords(v, (w + j) % d);
  return out;
}

double verification_gap(const Matrix& actual, const Matrix& target) {
  return (actual - target).cwiseAbs().maxCoeff();
}

double verification_tol(const Matrix& target) { return 1e-9 * std::max(1.0, target.cwiseAbs().maxCoeff()); }

// Unit-indicator networks (relu/conv): unit i must output target(v, i) > 0 on
// its active vertices through exactly one window `active_window(v)`, and 0
// elsewhere. Keeps the direction of each row of U and solves for the scale
// and bias: c * a_active + b = target, c * a_other + b <= 0.
void rederive_indicator_units(RepresentationModel& model, const PositivePairGraph& graph, const Matrix& target,
                              const std::vector<Index>& active_window) {
  const bool conv = model.tag() == ClassTag::Conv;
  const Index s = conv ? model.spec().s : graph.dim();
  const Index windows = conv ? graph.dim() : 1;
  Matrix u = model.weights();
  Vector b = model.bias();
  for (Index i = 0; i < u.rows(); ++i) {
    double a_active = 0.0, value = 0.0, max_other = -std::numeric_limits<double>::infinity();
    bool seen = false;
    for (Index v = 0; v < graph.size(); ++v)
      for (Index w = 0; w < windows; ++w) {
        const double a = conv ? u.row(i).dot(window(graph.coords(), v, w, s).transpose())
                              : u.row(i).dot(graph.coords().row(v));
        const bool active = target(v, i) > 0.0 && w == active_window[static_cast<std::size_t>(v)];
        if (!active) {
          max_other = std::max(max_other, a);
          continue;
        }
        if (!seen) {
          a_active = a;
          value = target(v, i);
          seen = true;
        }
        require(std::abs(a - a_active) <= 1e-12 * std::max(1.0, std::abs(a_active)) &&
                    std::abs(target(v, i) - value) <= 1e-12 * value,
                ErrorCode::ConstructionVerificationFailed,
                "unit " + std::to_string(i) + " cannot match its target at vertex " + std::to_string(v));
      }
    require(seen, ErrorCode::ConstructionVerificationFailed, "unit " + std::to_string(i) + " has no active vertex");
    require(a_active > max_other + 1e-12, ErrorCode::ConstructionVerificationFailed,
            "unit " + std::to_string(i) + " cannot separate its active vertices");
    const double c = value / (a_active - max_other);
    u.row(i) *= c;
    b(i) = -c * max_other;
  }
  Vector params(u.size() + b.size());
  params << flatten(u), b;
  model.set_params(std::move(params));
}

// Verifies `model` against `target`; falls back to the re-derived weights.
void verify_or_rederive(RepresentationModel& model, const PositivePairGraph& graph, const Matrix& target,
                        const std::vector<Index>& active_window) {
  const double tol = verification_tol(target);
  if (verification_gap(forward(model, graph), target) <= tol) {
    model.construction_path = "displayed";
    return;
  }
  rederive_indicator_units(model, graph, target, active_window);
  const Matrix out = forward(model, graph);
  for (Index v = 0; v < graph.size(); ++v)
    require((out.row(v) - target.row(v)).cwiseAbs().maxCoeff() <= tol, ErrorCode::ConstructionVerificationFailed,
            "constructed model misses its target at vertex " + std::to_string(v));
  model.construction_path = "re-derived";
}

}  // namespace

std::string_view to_string(ClassTag tag) {
  switch (tag) {
    case ClassTag::Tabular: return "tabular";
    case ClassTag::Linear: return "linear";
    case ClassTag::Relu: return "relu";
    case ClassTag::Conv: return "conv";
  }
  return "unknown";
}

ClassTag parse_class_tag(std::string_view name) {
  if (name == "tabular") return ClassTag::Tabular;
  if (name == "linear") return ClassTag::Linear;
  if (name == "relu") return ClassTag::Relu;
  if (name == "conv") return ClassTag::Conv;
  fail(ErrorCode::InvalidArgument, "unknown function class '" + std::string(name) + "'");
}

void FunctionClassSpec::validate() const {
  require(k >= 1, ErrorCode::InvalidArgument, "output dimension k must be positive");
  switch (tag) {
    case ClassTag::Tabular:
      require(n >= 1, ErrorCode::InvalidArgument, "tabular class needs n >= 1");
      break;
    case ClassTag::Linear:
    case ClassTag::Relu:
      require(d >= 1, ErrorCode::InvalidArgument, "input dimension d must be positive");
      break;
    case ClassTag::Conv:
      require(d >= 1 && s >= 1 && s <= d, ErrorCode::InvalidArgument, "conv class needs 1 <= s <= d");
      break;
  }
  if (lipschitz_kappa)
    require(*lipschitz_kappa > 0.0, ErrorCode::InvalidArgument, "Lipschitz bound must be positive");
}

Index FunctionClassSpec::param_count() const {
  switch (tag) {
    case ClassTag::Tabular: return n * k;
    case ClassTag::Linear: return k * d;
    case ClassTag::Relu: return k * d + k;
    case ClassTag::Conv: return k * s + k;
  }
  return 0;
}

Index FunctionClassSpec::in_dim() const { return tag == ClassTag::Tabular ? n : d; }

FunctionClassSpec class_for_graph(ClassTag tag, const PositivePairGraph& graph, Index k, Index s) {
  FunctionClassSpec spec;
  spec.tag = tag;
  spec.d = graph.dim();
  spec.n = graph.size();
  spec.k = k;
  spec.s = s;
  spec.validate();
  return spec;
}

// -------------------------------------------------------- RepresentationModel

RepresentationModel::RepresentationModel(FunctionClassSpec spec, Vector params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  require(params_.size() == spec_.param_count(), ErrorCode::DimensionMismatch,
          "expected " + std::to_string(spec_.param_count()) + " parameters, got " + std::to_string(params_.size()));
}

RepresentationModel RepresentationModel::zeros(const FunctionClassSpec& spec) {
  spec.validate();
  return RepresentationModel(spec, Vector::Zero(spec.param_count()));
}

RepresentationModel RepresentationModel::random(const FunctionClassSpec& spec, double scale, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-scale, scale);
  Vector p(spec.param_count());
  for (Index i = 0; i < p.size(); ++i) p(i) = unit(rng);
  return RepresentationModel(spec, std::move(p));
}

RepresentationModel RepresentationModel::tabular(const Matrix& values) {
  FunctionClassSpec spec;
  spec.tag = ClassTag::Tabular;
  spec.n = values.rows();
  spec.k = values.cols();
  return RepresentationModel(spec, flatten(values));
}

RepresentationModel RepresentationModel::linear(const Matrix& u) {
  FunctionClassSpec spec;
  spec.tag = ClassTag::Linear;
  spec.k = u.rows();
  spec.d = u.cols();
  return RepresentationModel(spec, flatten(u));
}

RepresentationModel RepresentationModel::relu(const Matrix& u, const Vector& b) {
  require(b.size() == u.rows(), ErrorCode::DimensionMismatch, "bias length differs from unit count");
  FunctionClassSpec spec;
  spec.tag = ClassTag::Relu;
  spec.k = u.rows();
  spec.d = u.cols();
  Vector p(u.size() + b.size());
  p << flatten(u), b;
  return RepresentationModel(spec, std::move(p));
}

RepresentationModel RepresentationModel::conv(Index d, const Matrix& u, const Vector& b) {
  require(b.size() == u.rows(), ErrorCode::DimensionMismatch, "bias length differs from unit count");
  FunctionClassSpec spec;
  spec.tag = ClassTag::Conv;
  spec.k = u.rows();
  spec.s = u.cols();
  spec.d = d;
  Vector p(u.size() + b.size());
  p << flatten(u), b;
  return RepresentationModel(spec, std::move(p));
}

void RepresentationModel::set_params(Vector params) {
  require(params.size() == spec_.param_count(), ErrorCode::DimensionMismatch, "parameter count changed");
  params_ = std::move(params);
}

Matrix RepresentationModel::weights() const {
  switch (spec_.tag) {
    case ClassTag::Tabular: return unflatten(params_, 0, spec_.n, spec_.k);
    case ClassTag::Linear:
    case ClassTag::Relu: return unflatten(params_, 0, spec_.k, spec_.d);
    case ClassTag::Conv: return unflatten(params_, 0, spec_.k, spec_.s);
  }
  return {};
}

Vector RepresentationModel::bias() const {
  if (spec_.tag == ClassTag::Relu || spec_.tag == ClassTag::Conv) return params_.tail(spec_.k);
  return {};
}

// -------------------------------------------------------------------- forward

Matrix forward(const RepresentationModel& model, const PositivePairGraph& graph) {
  const auto& spec = model.spec();
  require_graph_dim(spec, graph);
  const Matrix& x = graph.coords();
  switch (spec.tag) {
    case ClassTag::Tabular: return model.weights();
    case ClassTag::Linear: return x * model.weights().transpose();
    case ClassTag::Relu: {
      Matrix z = x * model.weights().transpose();
      z.rowwise() += model.bias().transpose();
      return z.cwiseMax(0.0);
    }
    case ClassTag::Conv: {
      const Matrix u = model.weights();
      const Vector b = model.bias();
      Matrix out = Matrix::Zero(graph.size(), spec.k);
      for (Index w = 0; w < spec.d; ++w) {
        Matrix win(graph.size(), spec.s);
        for (Index j = 0; j < spec.s; ++j) win.col(j) = x.col((w + j) % spec.d);
        Matrix z = win * u.transpose();
        z.rowwise() += b.transpose();
        out += z.cwiseMax(0.0);
      }
      return out;
    }
  }
  return {};
}

Vector grad_params(const RepresentationModel& model, const PositivePairGraph& graph, const Matrix& cotangent) {
  const auto& spec = model.spec();
  require_graph_dim(spec, graph);
  require(cotangent.rows() == graph.size() && cotangent.cols() == spec.k, ErrorCode::DimensionMismatch,
          "cotangent must be n x k");
  const Matrix& x = graph.coords();
  switch (spec.tag) {
    case ClassTag::Tabular: return flatten(cotangent);
    case ClassTag::Linear: return flatten(cotangent.transpose() * x);
    case ClassTag::Relu: {
      Matrix z = x * model.weights().transpose();
      z.rowwise() += model.bias().transpose();
      const Matrix h = cotangent.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
      Vector g(spec.param_count());
      g << flatten(h.transpose() * x), h.colwise().sum().transpose();
      return g;
    }
    case ClassTag::Conv: {
      const Matrix u = model.weights();
      const Vector b = model.bias();
      Matrix du = Matrix::Zero(spec.k, spec.s);
      Vector db = Vector::Zero(spec.k);
      for (Index w = 0; w < spec.d; ++w) {
        Matrix win(graph.size(), spec.s);
        for (Index j = 0; j < spec.s; ++j) win.col(j) = x.col((w + j) % spec.d);
        Matrix z = win * u.transpose();
        z.rowwise() += b.transpose();
        const Matrix h = cotangent.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
        du += h.transpose() * win;
        db += h.colwise().sum().transpose();
      }
      Vector g(spec.param_count());
      g << flatten(du), db;
      return g;
    }
  }
  return {};
}

double lipschitz_constant(const RepresentationModel& model, const PositivePairGraph& graph) {
  require(graph.size() >= 2, ErrorCode::InvalidArgument, "Lipschitz constant needs at least two vertices");
  const Matrix f = forward(model, graph);
  const Matrix& x = graph.coords();
  double best = 0.0;
  for (Index i = 0; i < graph.size(); ++i)
    for (Index j = i + 1; j < graph.size(); ++j)
      best = std::max(best, (f.row(i) - f.row(j)).norm() / (x.row(i) - x.row(j)).norm());
  return best;
}

// ------------------------------------------------------------- constructions

RepresentationModel construct_example1_optimal(const Example1Spec& spec, const LabeledGraph& data, Index k) {
  spec.validate();
  require(k == spec.s, ErrorCode::SpecMismatch,
          "optimal linear representation needs k = s = " + std::to_string(spec.s) + ", got " + std::to_string(k));
  require(data.graph.dim() == spec.d, ErrorCode::DimensionMismatch, "graph dimension differs from spec");
  Matrix u = Matrix::Zero(k, spec.d);
  u.leftCols(k).setIdentity();
  RepresentationModel model = RepresentationModel::linear(u);
  const Matrix target = data.graph.coords().leftCols(k);
  require(verification_gap(forward(model, data.graph), target) == 0.0, ErrorCode::ConstructionVerificationFailed,
          "linear projection does not reproduce the invariant coordinates");
  model.construction_path = "displayed";
  return model;
}

RepresentationModel construct_example2_optimal(const Example1Spec& spec, const LabeledGraph& data) {
  spec.validate();
  require(data.graph.dim() == spec.d, ErrorCode::DimensionMismatch, "graph dimension differs from spec");
  const Index k = Index{1} << spec.s;
  const double scale = std::sqrt(static_cast<double>(k));
  Matrix u = Matrix::Zero(k, spec.d);
  Vector b = Vector::Constant(k, -scale * (spec.s - 1));
  for (Index i = 0; i < k; ++i) {
    const auto h = bin_inverse(static_cast<int>(i), spec.s);
    for (int j = 0; j < spec.s; ++j) u(i, j) = scale * h[static_cast<std::size_t>(j)];
  }
  RepresentationModel model = RepresentationModel::relu(u, b);

  Matrix target = Matrix::Zero(data.graph.size(), k);
  for (Index v = 0; v < data.graph.size(); ++v) {
    const Datapoint x = data.graph.vertex(v);
    target(v, bin_code(std::span<const double>(x.data(), static_cast<std::size_t>(spec.s)))) = scale;
  }
  verify_or_rederive(model, data.graph, target, std::vector<Index>(static_cast<std::size_t>(data.graph.size()), 0));
  return model;
}

RepresentationModel construct_example4_optimal(const Example4Spec& spec, const LabeledGraph& data) {
  spec.validate();
  require(data.graph.dim() == spec.d, ErrorCode::DimensionMismatch, "graph dimension differs from spec");
  const Index k = Index{1} << spec.s;
  const double c = std::sqrt(static_cast<double>(k)) / (spec.gamma - 1.0);
  Matrix u(k, spec.s);
  for (Index i = 0; i < k; ++i) {
    const auto h = bin_inverse(static_cast<int>(i), spec.s);
    for (int j = 0; j < spec.s; ++j) u(i, j) = c * h[static_cast<std::size_t>(j)];
  }
  const Vector b = Vector::Constant(k, c * (-spec.s - (spec.gamma - 1.0) * (spec.s - 1)));
  RepresentationModel model = RepresentationModel::conv(spec.d, u, b);

  Matrix target = Matrix::Zero(data.graph.size(), k);
  std::vector<Index> active(static_cast<std::size_t>(data.graph.size()));
  for (Index v = 0; v < data.graph.size(); ++v) {
    const Datapoint x = data.graph.vertex(v);
    const auto info = locate_patch(spec, x);
    require(info.has_value(), ErrorCode::SpecMismatch, "vertex " + std::to_string(v) + " has no patch");
    target(v, info->code) = std::sqrt(static_cast<double>(k));
    active[static_cast<std::size_t>(v)] = info->location;
  }
  verify_or_rederive(model, data.graph, target, active);
  return model;
}

RepresentationModel construct_adversarial_universal(const PositivePairGraph& graph, Index k,
                                                    const std::vector<Index>& key_dims) {
  require(k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  require(!key_dims.empty() && key_dims.size() < 31, ErrorCode::InvalidArgument, "need 1..30 key dimensions");
  for (Index c : key_dims)
    require(c >= 0 && c < graph.dim(), ErrorCode::InvalidArgument, "key dimension out of range");

  std::vector<int> key(static_cast<std::size_t>(graph.size()));
  for (Index v = 0; v < graph.size(); ++v) {
    std::vector<double> signs;
    for (Index c : key_dims) signs.push_back(graph.coords()(v, c));
    key[static_cast<std::size_t>(v)] = bin_code(signs);
  }
  graph.joint().for_each_nonzero([&](Index i, Index j, double) {
    require(key[static_cast<std::size_t>(i)] == key[static_cast<std::size_t>(j)], ErrorCode::SpecMismatch,
            "key pattern changes along the positive pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  });

  std::map<int, Index> rank_of;
  for (int kv : key) rank_of.emplace(kv, 0);
  const auto patterns = static_cast<Index>(rank_of.size());
  require(k <= patterns, ErrorCode::TooManyOutputs,
          "k = " + std::to_string(k) + " exceeds the " + std::to_string(patterns) + " distinct key patterns");
  Index r = 0;
  for (auto& [kv, rank] : rank_of) rank = r++;

  std::vector<Index> group(static_cast<std::size_t>(graph.size()));
  Vector mass = Vector::Zero(k);
  for (Index v = 0; v < graph.size(); ++v) {
    const Index g = rank_of[key[static_cast<std::size_t>(v)]] * k / patterns;
    group[static_cast<std::size_t>(v)] = g;
    mass(g) += graph.marginal()(v);
  }
  Matrix f = Matrix::Zero(graph.size(), k);
  for (Index v = 0; v < graph.size(); ++v) {
    const Index g = group[static_cast<std::size_t>(v)];
    f(v, g) = 1.0 / std::sqrt(mass(g));
  }
  RepresentationModel model = RepresentationModel::tabular(f);
  model.construction_path = "derived";
  return model;
}

RepresentationModel construct_example4_adversarial_relu(const Example4Spec& spec, const LabeledGraph& data, Index k) {
  spec.validate();
  require(data.graph.dim() == spec.d, ErrorCode::DimensionMismatch, "graph dimension differs from spec");
  const Index clusters = static_cast<Index>(spec.d) << spec.s;
  require(k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  require(k <= clusters, ErrorCode::TooManyOutputs,
          "k = " + std::to_string(k) + " exceeds the " + std::to_string(clusters) + " (location, patch) clusters");

  // Unit g = location * 2^s + code reads the patch at its location only.
  Matrix u = Matrix::Zero(k, spec.d);
  for (Index g = 0; g < k; ++g) {
    const int t = static_cast<int>(g >> spec.s), code = static_cast<int>(g & ((1 << spec.s) - 1));
    const auto h = bin_inverse(code, spec.s);
    for (int j = 0; j < spec.s; ++j) u(g, (t + j) % spec.d) = h[static_cast<std::size_t>(j)];
  }
  RepresentationModel model = RepresentationModel::relu(u, Vector::Zero(k));

  Vector mass = Vector::Zero(k);
  for (Index v = 0; v < data.graph.size(); ++v) {
    const Index g = data.groups[static_cast<std::size_t>(v)];
    if (g < k) mass(g) += data.graph.marginal()(v);
  }
  Matrix target = Matrix::Zero(data.graph.size(), k);
  for (Index v = 0; v < data.graph.size(); ++v) {
    const Index g = data.groups[static_cast<std::size_t>(v)];
    if (g < k) target(v, g) = 1.0 / std::sqrt(mass(g));
  }
  rederive_indicator_units(model, data.graph, target,
                           std::vector<Index>(static_cast<std::size_t>(data.graph.size()), 0));
  const Matrix out = forward(model, data.graph);
  for (Index v = 0; v < data.graph.size(); ++v)
    require((out.row(v) - target.row(v)).cwiseAbs().maxCoeff() <= verification_tol(target),
            ErrorCode::ConstructionVerificationFailed,
            "adversarial unit misses its target at vertex " + std::to_string(v));
  model.construction_path = "derived";
  return model;
}

RepresentationModel construct_example3_feig(const LabeledGraph& data) {
  require(data.num_groups >= 1, ErrorCode::InvalidArgument, "graph carries no set ids");
  const double scale = std::sqrt(static_cast<double>(data.num_groups));
  Matrix f = Matrix::Zero(data.graph.size(), data.num_groups);
  for (Index v = 0; v < data.graph.size(); ++v) f(v, data.groups[static_cast<std::size_t>(v)]) = scale;
  RepresentationModel model = RepresentationModel::tabular(f);
  model.construction_path = "displayed";
  return model;
}

}  // namespace sclab
