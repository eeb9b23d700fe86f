#include "sclab/objective.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <random>

#include <Eigen/Eigenvalues>

#include "sclab/spectral.hpp"

namespace sclab {

namespace {

constexpr double kDivergenceLimit = 1e12;

// Positive pairs as weighted edges plus per-vertex weights for the covariance.
struct LossGeometry {
  std::vector<Eigen::Triplet<double>> edges;
  Vector diag;
  const PositivePairGraph* population = nullptr;  // set when edges mirror the joint
};

LossGeometry population_geometry(const PositivePairGraph& graph) {
  LossGeometry geo;
  geo.diag = graph.marginal();
  geo.population = &graph;
  return geo;
}

LossGeometry sample_geometry(const PairSample& sample, const PositivePairGraph& graph, RegNormalization norm) {
  require(!sample.pairs.empty(), ErrorCode::EmptySample, "pair sample is empty");
  const double inv = 1.0 / static_cast<double>(sample.pairs.size());
  LossGeometry geo;
  geo.diag = Vector::Zero(graph.size());
  for (const auto& [i, j] : sample.pairs) {
    require(i >= 0 && i < graph.size() && j >= 0 && j < graph.size(), ErrorCode::InvalidArgument,
            "sample index out of range");
    geo.edges.emplace_back(i, j, inv);
    geo.diag(i) += norm == RegNormalization::Mean ? inv : 1.0;
  }
  return geo;
}

LossReport evaluate(const LossGeometry& geo, const Matrix& f, double lambda) {
  LossReport r;
  r.lambda = lambda;
  if (geo.population) {
    r.pair_term = pair_discrepancy(*geo.population, f);
  } else {
    for (const auto& e : geo.edges) r.pair_term += e.value() * (f.row(e.row()) - f.row(e.col())).squaredNorm();
  }
  const Matrix cov = f.transpose() * geo.diag.asDiagonal() * f;
  r.reg_term = (cov - Matrix::Identity(f.cols(), f.cols())).squaredNorm();
  r.total = r.pair_term + lambda * r.reg_term;
  return r;
}

Matrix cotangent(const LossGeometry& geo, const Matrix& f, double lambda) {
  Matrix g;
  if (geo.population) {
    g = 4.0 * (geo.population->marginal().asDiagonal() * f - geo.population->joint().multiply(f));
  } else {
    g = Matrix::Zero(f.rows(), f.cols());
    for (const auto& e : geo.edges) {
      const Eigen::RowVectorXd diff = 2.0 * e.value() * (f.row(e.row()) - f.row(e.col()));
      g.row(e.row()) += diff;
      g.row(e.col()) -= diff;
    }
  }
  const Matrix cov = f.transpose() * geo.diag.asDiagonal() * f;
  g += 4.0 * lambda * geo.diag.asDiagonal() * f * (cov - Matrix::Identity(f.cols(), f.cols()));
  return g;
}

struct Evaluation {
  LossReport loss;
  Vector grad;
};

Evaluation evaluate_model(const LossGeometry& geo, const PositivePairGraph& graph, const RepresentationModel& model,
                          double lambda) {
  const Matrix f = forward(model, graph);
  Evaluation ev{evaluate(geo, f, lambda), grad_params(model, graph, cotangent(geo, f, lambda))};
  return ev;
}

// Per-parameter scaling for tabular models: row i divided by its vertex weight.
Vector preconditioner(const LossGeometry& geo, const RepresentationModel& model, bool enabled) {
  Vector p = Vector::Ones(model.params().size());
  if (!enabled || model.tag() != ClassTag::Tabular) return p;
  Vector weight = geo.diag;
  for (const auto& e : geo.edges) {
    weight(e.row()) += 0.5 * e.value();
    weight(e.col()) += 0.5 * e.value();
  }
  const Index k = model.out_dim();
  for (Index i = 0; i < weight.size(); ++i)
    if (weight(i) > 0.0) p.segment(i * k, k).setConstant(1.0 / weight(i));
  return p;
}

TrainResult run_single(const LossGeometry& geo, const PositivePairGraph& graph, RepresentationModel model,
                       double lambda, const TrainConfig& cfg, std::uint64_t seed) {
  const Vector precond = preconditioner(geo, model, cfg.precondition);
  Evaluation cur = evaluate_model(geo, graph, model, lambda);
  require(cur.grad.allFinite(), ErrorCode::NonFiniteGradient, "gradient at initialization is not finite");
  require(std::isfinite(cur.loss.total) && cur.loss.total <= kDivergenceLimit, ErrorCode::Divergence,
          "initial loss " + std::to_string(cur.loss.total) + " exceeds the divergence limit");

  TrainResult out{model, cur.loss, {cur.loss}, seed, 0};
  Vector velocity = Vector::Zero(model.params().size());
  double step = cfg.step_size;
  const double max_step = 1e3 * cfg.step_size;
  int stalls = 0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    out.iterations = it;
    const Vector next_velocity = cfg.momentum * velocity - step * precond.cwiseProduct(cur.grad);
    RepresentationModel trial = model;
    trial.set_params(model.params() + next_velocity);
    Evaluation ev = evaluate_model(geo, graph, trial, lambda);
    if (!ev.grad.allFinite()) {
      require(cfg.adaptive, ErrorCode::NonFiniteGradient, "gradient became non-finite at iteration " + std::to_string(it));
      velocity.setZero();
      step *= 0.5;
      continue;
    }
    if (!cfg.adaptive) {
      require(std::isfinite(ev.loss.total) && ev.loss.total <= kDivergenceLimit, ErrorCode::Divergence,
              "loss " + std::to_string(ev.loss.total) + " at iteration " + std::to_string(it));
    } else if (!(ev.loss.total <= cur.loss.total)) {
      velocity.setZero();
      step *= 0.5;
      if (step < 1e-30) break;
      continue;
    }
    const double decrease = cur.loss.total - ev.loss.total;
    velocity = next_velocity;
    model = std::move(trial);
    cur = std::move(ev);
    out.trace.push_back(cur.loss);
    if (cur.loss.total <= out.loss.total) {
      out.loss = cur.loss;
      out.model = model;
    }
    if (cfg.adaptive) step = std::min(step * cfg.step_growth, max_step);
    stalls = (std::abs(decrease) <= cfg.tol * std::max(1.0, cur.loss.total)) ? stalls + 1 : 0;
    if (stalls >= cfg.patience || cur.loss.total == 0.0) break;
  }
  return out;
}

TrainResult train_multistart(const LossGeometry& geo, const PositivePairGraph& graph, const FunctionClassSpec& cls,
                             double lambda, const TrainConfig& cfg) {
  cfg.validate();
  FunctionClassSpec spec = cls;
  spec.validate();
  const int restarts =
      cfg.restarts > 0 ? cfg.restarts : ((spec.tag == ClassTag::Relu || spec.tag == ClassTag::Conv) ? 5 : 1);
  auto run = [&](int r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    return run_single(geo, graph, RepresentationModel::random(spec, cfg.init_scale, seed), lambda, cfg, seed);
  };
  std::vector<TrainResult> results;
  if (cfg.jobs > 1 && restarts > 1) {
    std::vector<std::future<TrainResult>> futures;
    for (int r = 0; r < restarts; ++r) futures.push_back(std::async(std::launch::async, run, r));
    for (auto& f : futures) results.push_back(f.get());
  } else {
    for (int r = 0; r < restarts; ++r) results.push_back(run(r));
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].loss.total < results[best].loss.total) best = r;
  return std::move(results[best]);
}

Matrix inverse_sqrt(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (cov + cov.transpose()));
  require(solver.info() == Eigen::Success, ErrorCode::EigSolverFailure, "covariance eigenproblem failed");
  const Vector ev = solver.eigenvalues().cwiseMax(1e-12);
  return solver.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

void TrainConfig::validate() const {
  require(step_size > 0.0 && std::isfinite(step_size), ErrorCode::InvalidArgument, "step size must be positive");
  require(step_growth >= 1.0, ErrorCode::InvalidArgument, "step growth must be at least 1");
  require(max_iters >= 1, ErrorCode::InvalidArgument, "max_iters must be at least 1");
  require(init_scale > 0.0, ErrorCode::InvalidArgument, "init_scale must be positive");
  require(momentum >= 0.0 && momentum < 1.0, ErrorCode::InvalidArgument, "momentum must lie in [0, 1)");
  require(restarts >= 0 && jobs >= 1 && patience >= 1, ErrorCode::InvalidArgument, "invalid restart/job counts");
}

LossReport loss_from_values(const PositivePairGraph& graph, const Matrix& values, double lambda) {
  require(values.rows() == graph.size(), ErrorCode::DimensionMismatch, "values do not cover the graph");
  return evaluate(population_geometry(graph), values, lambda);
}

Matrix loss_cotangent(const PositivePairGraph& graph, const Matrix& values, double lambda) {
  require(values.rows() == graph.size(), ErrorCode::DimensionMismatch, "values do not cover the graph");
  return cotangent(population_geometry(graph), values, lambda);
}

LossReport population_loss(const PositivePairGraph& graph, const RepresentationModel& model, double lambda) {
  return loss_from_values(graph, forward(model, graph), lambda);
}

Vector population_loss_gradient(const PositivePairGraph& graph, const RepresentationModel& model, double lambda) {
  return evaluate_model(population_geometry(graph), graph, model, lambda).grad;
}

PairSample sample_pairs(const PositivePairGraph& graph, std::size_t n_pre, std::uint64_t seed) {
  require(n_pre > 0, ErrorCode::EmptySample, "n_pre must be positive");
  std::vector<std::pair<Index, Index>> support;
  std::vector<double> weights;
  graph.joint().for_each_nonzero([&](Index i, Index j, double w) {
    support.emplace_back(i, j);
    weights.push_back(w);
  });
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  PairSample sample;
  sample.pairs.reserve(n_pre);
  for (std::size_t t = 0; t < n_pre; ++t) sample.pairs.push_back(support[pick(rng)]);
  return sample;
}

LossReport empirical_loss(const PairSample& sample, const PositivePairGraph& graph, const RepresentationModel& model,
                          double lambda, RegNormalization norm) {
  return evaluate(sample_geometry(sample, graph, norm), forward(model, graph), lambda);
}

Vector empirical_loss_gradient(const PairSample& sample, const PositivePairGraph& graph,
                               const RepresentationModel& model, double lambda, RegNormalization norm) {
  return evaluate_model(sample_geometry(sample, graph, norm), graph, model, lambda).grad;
}

TrainResult train(const PositivePairGraph& graph, const FunctionClassSpec& cls, double lambda,
                  const TrainConfig& config) {
  return train_multistart(population_geometry(graph), graph, cls, lambda, config);
}

TrainResult train(const PairSample& sample, const PositivePairGraph& graph, const FunctionClassSpec& cls,
                  double lambda, const TrainConfig& config) {
  return train_multistart(sample_geometry(sample, graph, config.empirical_reg), graph, cls, lambda, config);
}

TrainResult train_from(const PositivePairGraph& graph, RepresentationModel init, double lambda,
                       const TrainConfig& config) {
  config.validate();
  return run_single(population_geometry(graph), graph, std::move(init), lambda, config, config.seed);
}

double direction_min_loss(double mu, double lambda) {
  const double sigma = std::max(0.0, 1.0 - mu / (2.0 * lambda));
  return mu * sigma + lambda * (sigma - 1.0) * (sigma - 1.0);
}

OracleResult tabular_min_oracle(const PositivePairGraph& graph, Index k, double lambda) {
  require(k >= 1 && k <= graph.size(), ErrorCode::InvalidArgument, "k must lie in [1, n]");
  require(lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
  const SpectralDecomposition spec = eigendecompose(graph, k);
  Matrix f(graph.size(), k);
  OracleResult out{0.0, RepresentationModel::zeros(class_for_graph(ClassTag::Tabular, graph, k)), {}, {}};
  for (Index i = 0; i < k; ++i) {
    const double mu = 2.0 * std::max(0.0, spec.eigenvalues[static_cast<std::size_t>(i)]);
    const double c = std::sqrt(std::max(0.0, 1.0 - mu / (2.0 * lambda)));
    f.col(i) = c * spec.eigenfunctions[static_cast<std::size_t>(i)].values;
    out.mu.push_back(mu);
    out.scale.push_back(c);
    out.min_loss += direction_min_loss(mu, lambda);
  }
  out.model = RepresentationModel::tabular(f);
  out.model.construction_path = "spectral";
  return out;
}

OracleResult linear_min_oracle(const PositivePairGraph& graph, Index k, double lambda) {
  require(k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  require(lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
  const Matrix& x = graph.coords();
  const Index d = graph.dim();
  const Matrix c = x.transpose() * graph.marginal().asDiagonal() * x;
  Matrix a = Matrix::Zero(d, d);
  graph.joint().for_each_nonzero([&](Index i, Index j, double w) {
    const Vector diff = (x.row(i) - x.row(j)).transpose();
    a.noalias() += w * diff * diff.transpose();
  });

  Eigen::SelfAdjointEigenSolver<Matrix> cs(0.5 * (c + c.transpose()));
  require(cs.info() == Eigen::Success, ErrorCode::EigSolverFailure, "second-moment eigenproblem failed");
  const double top = std::max(cs.eigenvalues().maxCoeff(), 0.0);
  std::vector<Index> keep;
  for (Index i = 0; i < d; ++i)
    if (top > 0.0 && cs.eigenvalues()(i) > 1e-12 * top) keep.push_back(i);
  const auto rank = static_cast<Index>(keep.size());

  OracleResult out{0.0, RepresentationModel::zeros(class_for_graph(ClassTag::Linear, graph, k)), {}, {}};
  Matrix u = Matrix::Zero(k, d);
  if (rank > 0) {
    Matrix t(d, rank);
    for (Index c_i = 0; c_i < rank; ++c_i)
      t.col(c_i) = cs.eigenvectors().col(keep[static_cast<std::size_t>(c_i)]) /
                   std::sqrt(cs.eigenvalues()(keep[static_cast<std::size_t>(c_i)]));
    Matrix reduced = t.transpose() * a * t;
    reduced = 0.5 * (reduced + reduced.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(reduced);
    require(solver.info() == Eigen::Success, ErrorCode::EigSolverFailure, "linear oracle eigenproblem failed");
    for (Index i = 0; i < std::min(k, rank); ++i) {
      const double mu = std::max(0.0, solver.eigenvalues()(i));
      const double s = std::sqrt(std::max(0.0, 1.0 - mu / (2.0 * lambda)));
      u.row(i) = s * (t * solver.eigenvectors().col(i)).transpose();
      out.mu.push_back(mu);
      out.scale.push_back(s);
      out.min_loss += direction_min_loss(mu, lambda);
    }
  }
  for (Index i = rank; i < k; ++i) {
    out.mu.push_back(std::numeric_limits<double>::infinity());
    out.scale.push_back(0.0);
    out.min_loss += lambda;
  }
  out.model = RepresentationModel::linear(u);
  out.model.construction_path = "spectral";
  return out;
}

Matrix covariance(const PositivePairGraph& graph, const Matrix& values) {
  require(values.rows() == graph.size(), ErrorCode::DimensionMismatch, "values do not cover the graph");
  return values.transpose() * graph.marginal().asDiagonal() * values;
}

Matrix whiten(const PositivePairGraph& graph, const Matrix& values, Index r) {
  require(r >= 1, ErrorCode::InvalidArgument, "r must be positive");
  const Matrix cov = covariance(graph, values);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (cov + cov.transpose()), Eigen::EigenvaluesOnly);
  const double smallest = values.cols() == 0 ? 0.0 : solver.eigenvalues().minCoeff();
  require(smallest > 1e-10, ErrorCode::SingularCovariance,
          "covariance minimum eigenvalue " + std::to_string(smallest) + " <= 1e-10");
  return values * inverse_sqrt(cov) / std::sqrt(static_cast<double>(r));
}

Matrix whiten(const PositivePairGraph& graph, const RepresentationModel& model, Index r) {
  return whiten(graph, forward(model, graph), r);
}

}  // namespace sclab
