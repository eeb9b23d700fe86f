#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sclab/funclass.hpp"
#include "sclab/posgraph.hpp"
#include "sclab/spectral.hpp"

namespace sclab {

struct ProbeResult {
  Matrix head;  // r x k
  double error = 0.0;
  double head_norm = 0.0;
  bool projected = false;  // rescaled onto the norm bound
};

inline constexpr double kProbeRidge = 1e-10;

/// E_{p_data} ||W f(x) - t(x)||^2 for a given head.
double probe_error(const PositivePairGraph& graph, const Matrix& reps, const Matrix& targets, const Matrix& head);

/// Weighted ridge least squares for W; never worse than W = 0.
ProbeResult fit_linear_head(const PositivePairGraph& graph, const Matrix& reps, const Matrix& targets,
                            std::optional<double> norm_bound = std::nullopt, double ridge = kProbeRidge);

struct AssumptionReport {
  double alpha = 0.0;
  ExtendedReal beta = ExtendedReal::infinity();
  bool beta_certified = true;
  std::string beta_source;               // class whose beta is reported
  std::optional<double> beta_heuristic;  // relu/conv multi-start estimate
  double p_min = 0.0;
  double p_max = 0.0;
  int m = 0;
  bool implementable = false;
  double implement_residual = 0.0;
  bool implement_certified = true;
};

/// For relu/conv classes beta falls back to the certified tabular value.
AssumptionReport measure_assumptions(const PositivePairGraph& graph, const Partition& partition,
                                     const FunctionClassSpec& cls, std::uint64_t seed = 0);

/// Smallest weighted squared residual of fitting `targets` with a member of
/// `cls` (output width = targets.cols()). Exact for tabular/linear; multi-start
/// gradient descent otherwise.
double class_fit_residual(const PositivePairGraph& graph, const FunctionClassSpec& cls, const Matrix& targets,
                          std::uint64_t seed = 0);

struct EigenspaceReport {
  double phi = 0.0;
  double phi_tilde = 0.0;
  double epsilon = 0.0;
  double zeta = 0.0;
  double B = 0.0;
  int m = 0;
};

/// f_eig must be orthonormal under p_data within 1e-6.
EigenspaceReport measure_eigenspace_quantities(const PositivePairGraph& graph, const Matrix& f_eig,
                                               const std::vector<GraphFunction>& candidates, const Matrix& targets);

double theorem31_bound(const AssumptionReport& report);
double theorem42_bound(const EigenspaceReport& report, Index k, double lambda);
double theorem56_bound(double r, double m, double kappa, double rho);

}  // namespace sclab
