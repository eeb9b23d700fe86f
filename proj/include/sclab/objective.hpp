#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sclab/funclass.hpp"
#include "sclab/posgraph.hpp"

namespace sclab {

struct LossReport {
  double total = 0.0;
  double pair_term = 0.0;
  double reg_term = 0.0;  // before multiplying by lambda
  double lambda = 0.0;
};

/// Loss of an explicit n x k block of representations under the population
/// distributions: E_pos ||f(x) - f(x+)||^2 + lambda ||E f f^T - I||_F^2.
LossReport loss_from_values(const PositivePairGraph& graph, const Matrix& values, double lambda);

/// d loss / d values for the population loss.
Matrix loss_cotangent(const PositivePairGraph& graph, const Matrix& values, double lambda);

LossReport population_loss(const PositivePairGraph& graph, const RepresentationModel& model, double lambda);
Vector population_loss_gradient(const PositivePairGraph& graph, const RepresentationModel& model, double lambda);

/// n_pre positive pairs as vertex indices (x_i, x_i+).
struct PairSample {
  std::vector<std::pair<Index, Index>> pairs;
};

/// i.i.d. draws from the joint.
PairSample sample_pairs(const PositivePairGraph& graph, std::size_t n_pre, std::uint64_t seed);

/// Mean is the default; Sum keeps the un-normalized sum of outer products.
enum class RegNormalization { Mean, Sum };

LossReport empirical_loss(const PairSample& sample, const PositivePairGraph& graph, const RepresentationModel& model,
                          double lambda, RegNormalization norm = RegNormalization::Mean);
Vector empirical_loss_gradient(const PairSample& sample, const PositivePairGraph& graph,
                               const RepresentationModel& model, double lambda,
                               RegNormalization norm = RegNormalization::Mean);

struct TrainConfig {
  double step_size = 0.05;
  double step_growth = 1.05;   // applied after every accepted step
  bool adaptive = true;        // halve the step and retry when the loss rises
  int max_iters = 5000;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  double tol = 1e-14;          // relative loss decrease counted as a stall
  int patience = 50;           // consecutive stalls before stopping
  double momentum = 0.0;
  int restarts = 0;            // 0 -> 5 for relu/conv, 1 otherwise
  bool precondition = true;    // tabular rows scaled by inverse vertex mass
  int jobs = 1;
  RegNormalization empirical_reg = RegNormalization::Mean;

  void validate() const;
};

struct TrainResult {
  RepresentationModel model;
  LossReport loss;                 // of the returned (best) iterate
  std::vector<LossReport> trace;   // accepted iterates of the winning start
  std::uint64_t seed = 0;          // seed of the winning start
  int iterations = 0;
};

TrainResult train(const PositivePairGraph& graph, const FunctionClassSpec& cls, double lambda,
                  const TrainConfig& config);
TrainResult train(const PairSample& sample, const PositivePairGraph& graph, const FunctionClassSpec& cls,
                  double lambda, const TrainConfig& config);

/// Continue training from `init` (single start).
TrainResult train_from(const PositivePairGraph& graph, RepresentationModel init, double lambda,
                       const TrainConfig& config);

struct OracleResult {
  double min_loss = 0.0;
  RepresentationModel model;
  std::vector<double> mu;     // per-direction pair cost of a unit-covariance direction
  std::vector<double> scale;  // chosen c_i >= 0
};

/// Global minimum over tabular models: the k smallest eigenfunctions, each
/// scaled by c = sqrt(max(0, 1 - psi / lambda)).
OracleResult tabular_min_oracle(const PositivePairGraph& graph, Index k, double lambda);

/// Global minimum over linear models via the generalized eigenproblem of
/// E_pos[(x - x+)(x - x+)^T] against E[x x^T].
OracleResult linear_min_oracle(const PositivePairGraph& graph, Index k, double lambda);

/// Smallest loss contributed by one direction with pair cost mu at the
/// optimal scale: mu - mu^2 / (4 lambda) if mu < 2 lambda, else lambda.
double direction_min_loss(double mu, double lambda);

/// E[f f^T]^{-1/2} f / sqrt(r); covariance of the output is I / r.
Matrix whiten(const PositivePairGraph& graph, const Matrix& values, Index r);
Matrix whiten(const PositivePairGraph& graph, const RepresentationModel& model, Index r);

/// E_{p_data}[f f^T].
Matrix covariance(const PositivePairGraph& graph, const Matrix& values);

}  // namespace sclab
