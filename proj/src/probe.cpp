#include "sclab/probe.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/QR>

#include "sclab/objective.hpp"

namespace sclab {

namespace {

// Multi-start full-batch descent on E_{p_data} ||f(x) - t(x)||^2.
double descend_fit(const PositivePairGraph& graph, const FunctionClassSpec& cls, const Matrix& targets,
                   std::uint64_t seed) {
  constexpr int kStarts = 5;
  constexpr int kIters = 4000;
  const Vector& p = graph.marginal();
  auto objective = [&](const RepresentationModel& model, Vector* grad) {
    const Matrix resid = forward(model, graph) - targets;
    if (grad) *grad = grad_params(model, graph, 2.0 * p.asDiagonal() * resid);
    return (p.asDiagonal() * resid.cwiseProduct(resid)).sum();
  };
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < kStarts; ++s) {
    RepresentationModel model = RepresentationModel::random(cls, 0.5, seed + static_cast<std::uint64_t>(s));
    Vector grad;
    double value = objective(model, &grad);
    double step = 0.1;
    for (int it = 0; it < kIters && step > 1e-14 && value > 1e-14; ++it) {
      RepresentationModel trial = model;
      trial.set_params(model.params() - step * grad);
      Vector trial_grad;
      const double tv = objective(trial, &trial_grad);
      if (tv <= value) {
        model = std::move(trial);
        value = tv;
        grad = std::move(trial_grad);
        step *= 1.2;
      } else {
        step *= 0.5;
      }
    }
    best = std::min(best, value);
  }
  return best;
}

}  // namespace

double probe_error(const PositivePairGraph& graph, const Matrix& reps, const Matrix& targets, const Matrix& head) {
  require(reps.rows() == graph.size() && targets.rows() == graph.size(), ErrorCode::DimensionMismatch,
          "representations and targets must have one row per vertex");
  require(head.rows() == targets.cols() && head.cols() == reps.cols(), ErrorCode::DimensionMismatch,
          "head must be r x k");
  const Matrix resid = reps * head.transpose() - targets;
  return std::max(0.0, (graph.marginal().asDiagonal() * resid.cwiseProduct(resid)).sum());
}

ProbeResult fit_linear_head(const PositivePairGraph& graph, const Matrix& reps, const Matrix& targets,
                            std::optional<double> norm_bound, double ridge) {
  require(reps.rows() == graph.size() && targets.rows() == graph.size(), ErrorCode::DimensionMismatch,
          "representations and targets must have one row per vertex");
  if (norm_bound) require(*norm_bound >= 0.0, ErrorCode::InvalidArgument, "norm bound must be nonnegative");
  const Vector& p = graph.marginal();
  Matrix gram = reps.transpose() * p.asDiagonal() * reps;
  gram.diagonal().array() += ridge;
  const Matrix cross = reps.transpose() * p.asDiagonal() * targets;  // k x r
  Matrix head = gram.ldlt().solve(cross).transpose();

  ProbeResult out;
  out.head = head;
  if (norm_bound && head.norm() > *norm_bound) {
    out.head *= *norm_bound / head.norm();
    out.projected = true;
  }
  out.error = probe_error(graph, reps, targets, out.head);
  const Matrix zero = Matrix::Zero(targets.cols(), reps.cols());
  const double zero_error = probe_error(graph, reps, targets, zero);
  if (!(out.error <= zero_error)) {
    out.head = zero;
    out.error = zero_error;
  }
  out.head_norm = out.head.norm();
  return out;
}

double class_fit_residual(const PositivePairGraph& graph, const FunctionClassSpec& cls, const Matrix& targets,
                          std::uint64_t seed) {
  require(targets.rows() == graph.size(), ErrorCode::DimensionMismatch, "targets must have one row per vertex");
  switch (cls.tag) {
    case ClassTag::Tabular: return 0.0;
    case ClassTag::Linear: {
      const Vector sp = graph.marginal().cwiseSqrt();
      const Matrix a = sp.asDiagonal() * graph.coords();
      const Matrix b = sp.asDiagonal() * targets;
      const Matrix u = a.completeOrthogonalDecomposition().solve(b);
      return (a * u - b).squaredNorm();
    }
    case ClassTag::Relu:
    case ClassTag::Conv: {
      FunctionClassSpec spec = cls;
      spec.k = targets.cols();
      spec.d = graph.dim();
      spec.n = graph.size();
      return descend_fit(graph, spec, targets, seed);
    }
  }
  return 0.0;
}

AssumptionReport measure_assumptions(const PositivePairGraph& graph, const Partition& partition,
                                     const FunctionClassSpec& cls, std::uint64_t seed) {
  require(static_cast<Index>(partition.assignment.size()) == graph.size(), ErrorCode::DimensionMismatch,
          "partition does not cover the graph");
  AssumptionReport rep;
  rep.m = partition.m;
  rep.alpha = cross_cluster_mass(graph, partition);
  const auto masses = cluster_masses(graph, partition);
  rep.p_min = *std::min_element(masses.begin(), masses.end());
  rep.p_max = *std::max_element(masses.begin(), masses.end());

  const bool certified = cls.tag == ClassTag::Tabular || cls.tag == ClassTag::Linear;
  FunctionClassSpec beta_cls = cls;
  if (!certified) beta_cls.tag = ClassTag::Tabular;
  rep.beta_certified = true;
  rep.beta_source = std::string(to_string(beta_cls.tag));
  double heuristic = std::numeric_limits<double>::infinity();
  for (int c = 0; c < partition.m; ++c) {
    const auto members = partition.members(c);
    const MinExpansion me = min_expansion_over_class(graph, members, beta_cls, seed);
    if (!me.beta.is_infinite() && (rep.beta.is_infinite() || me.beta.value() < rep.beta.value())) rep.beta = me.beta;
    if (!certified) {
      const MinExpansion h = min_expansion_over_class(graph, members, cls, seed);
      heuristic = std::min(heuristic, h.beta.or_infinity());
    }
  }
  if (!certified) {
    rep.beta_source += " (stand-in for " + std::string(to_string(cls.tag)) + ")";
    if (std::isfinite(heuristic)) rep.beta_heuristic = heuristic;
  }

  Matrix onehot = Matrix::Zero(graph.size(), partition.m);
  for (Index i = 0; i < graph.size(); ++i) onehot(i, partition.assignment[static_cast<std::size_t>(i)]) = 1.0;
  rep.implement_residual = class_fit_residual(graph, cls, onehot, seed);
  rep.implement_certified = certified;
  rep.implementable = rep.implement_residual <= 1e-8;
  return rep;
}

EigenspaceReport measure_eigenspace_quantities(const PositivePairGraph& graph, const Matrix& f_eig,
                                               const std::vector<GraphFunction>& candidates, const Matrix& targets) {
  require(f_eig.rows() == graph.size(), ErrorCode::DimensionMismatch, "f_eig must have one row per vertex");
  const Matrix cov = covariance(graph, f_eig);
  const double dev = (cov - Matrix::Identity(f_eig.cols(), f_eig.cols())).cwiseAbs().maxCoeff();
  require(dev <= 1e-6, ErrorCode::NotOrthonormal,
          "f_eig deviates from orthonormal by " + std::to_string(dev));
  EigenspaceReport rep;
  rep.m = static_cast<int>(f_eig.cols());
  rep.phi = pair_discrepancy(graph, f_eig);
  const Vector& p = graph.marginal();
  for (const auto& g : candidates) {
    require_same_graph(graph, g);
    const double norm = weighted_inner(graph, g.values, g.values);
    if (norm > 0.0) rep.phi_tilde = std::max(rep.phi_tilde, pair_discrepancy(graph, Matrix(g.values)) / norm);
    const Vector w = cov.ldlt().solve(f_eig.transpose() * p.asDiagonal() * g.values);
    const Vector resid = f_eig * w - g.values;
    rep.epsilon = std::max(rep.epsilon, weighted_inner(graph, resid, resid));
  }
  const ProbeResult fit = fit_linear_head(graph, f_eig, targets);
  rep.zeta = fit.error;
  rep.B = fit.head_norm;
  return rep;
}

double theorem31_bound(const AssumptionReport& report) {
  if (report.alpha == 0.0) return 0.0;
  require(report.p_min > report.alpha, ErrorCode::AlphaExceedsPmin,
          "alpha " + std::to_string(report.alpha) + " >= P_min " + std::to_string(report.p_min));
  if (report.beta.is_infinite()) return 0.0;
  require(report.beta.value() > 0.0, ErrorCode::BetaZero, "beta is zero");
  return report.alpha / report.beta.value() * (report.p_max / (report.p_min - report.alpha));
}

double theorem42_bound(const EigenspaceReport& report, Index k, double lambda) {
  require(lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
  const double b2k = report.B * report.B * static_cast<double>(k);
  return 2.0 * report.zeta + 4.0 * b2k * report.epsilon + 16.0 * report.phi / lambda * b2k;
}

double theorem56_bound(double r, double m, double kappa, double rho) {
  require(r >= 0.0 && m >= 0.0 && kappa >= 0.0 && rho >= 0.0, ErrorCode::InvalidArgument,
          "arguments must be nonnegative");
  return 2.0 * r * m * kappa * kappa * rho * rho;
}

}  // namespace sclab
