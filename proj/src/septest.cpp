#include "sclab/septest.hpp"

#include <algorithm>
#include <future>

#include "sclab/spectral.hpp"

namespace sclab {

namespace {

BrCell run_cell(const PositivePairGraph& graph, const FunctionClassSpec& cls, Index r, double lambda,
                std::uint64_t seed, const TrainConfig& base) {
  BrCell cell{r, lambda, seed, 0.0, false, {}};
  TrainConfig cfg = base;
  cfg.seed = seed;
  cfg.restarts = 1;
  cfg.jobs = 1;
  try {
    const TrainResult trained = train(graph, cls, lambda, cfg);
    const Matrix white = whiten(graph, trained.model, r);
    cell.b_value = pair_discrepancy(graph, white);
    cell.whiten_ok = true;
  } catch (const Error& e) {
    cell.note = e.what();
  }
  return cell;
}

}  // namespace

BrRow estimate_br(const PositivePairGraph& graph, const FunctionClassSpec& cls, Index r, const BrOptions& options) {
  require(r >= 1 && r <= graph.size(), ErrorCode::InvalidArgument, "r must lie in [1, n]");
  require(!options.lambda_grid.empty(), ErrorCode::InvalidArgument, "lambda grid is empty");
  require(options.seeds_per_cell >= 1, ErrorCode::InvalidArgument, "need at least one seed per cell");
  options.train.validate();
  FunctionClassSpec spec = cls;
  spec.k = r;
  spec.n = graph.size();
  spec.d = graph.dim();
  spec.validate();

  struct Job {
    double lambda;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double lambda : options.lambda_grid) {
    require(lambda > 0.0, ErrorCode::InvalidArgument, "lambda values must be positive");
    for (int s = 0; s < options.seeds_per_cell; ++s)
      jobs.push_back({lambda, options.train.seed + static_cast<std::uint64_t>(s)});
  }

  BrRow row;
  row.class_name = std::string(to_string(spec.tag));
  row.r = r;
  row.cells.resize(jobs.size());
  const auto workers = static_cast<std::size_t>(std::max(1, options.train.jobs));
  for (std::size_t lo = 0; lo < jobs.size(); lo += workers) {
    const std::size_t hi = std::min(jobs.size(), lo + workers);
    if (workers == 1) {
      row.cells[lo] = run_cell(graph, spec, r, jobs[lo].lambda, jobs[lo].seed, options.train);
      continue;
    }
    std::vector<std::future<BrCell>> futures;
    for (std::size_t j = lo; j < hi; ++j)
      futures.push_back(std::async(std::launch::async, run_cell, std::cref(graph), std::cref(spec), r, jobs[j].lambda,
                                   jobs[j].seed, std::cref(options.train)));
    for (std::size_t j = lo; j < hi; ++j) row.cells[j] = futures[j - lo].get();
  }

  for (const auto& c : row.cells)
    if (c.whiten_ok && (!row.b_r || c.b_value < *row.b_r)) row.b_r = c.b_value;
  if (!row.b_r)
    fail(ErrorCode::AllGridPointsFailed, "every grid point failed for " + row.class_name + " at r = " +
                                             std::to_string(r) + (row.cells.empty() ? "" : ": " + row.cells.front().note));
  if (spec.tag == ClassTag::Tabular) row.oracle = br_oracle_tabular(graph, r);
  return row;
}

double br_oracle_tabular(const PositivePairGraph& graph, Index r) {
  require(r >= 1 && r <= graph.size(), ErrorCode::InvalidArgument, "r must lie in [1, n]");
  const SpectralDecomposition spec = eigendecompose(graph, r);
  double total = 0.0;
  for (double psi : spec.eigenvalues) total += std::max(0.0, psi);
  return 2.0 * total / static_cast<double>(r);
}

SeparabilityReport br_table(const PositivePairGraph& graph, const std::vector<FunctionClassSpec>& classes,
                            const std::vector<Index>& r_list, const BrOptions& options) {
  require(!classes.empty(), ErrorCode::InvalidArgument, "no function classes given");
  require(!r_list.empty(), ErrorCode::InvalidArgument, "r list is empty");
  SeparabilityReport report;
  for (const auto& cls : classes)
    for (Index r_req : r_list) {
      require(r_req >= 1, ErrorCode::InvalidArgument, "r values must be positive");
      const Index r = std::min(r_req, graph.size());
      try {
        report.rows.push_back(estimate_br(graph, cls, r, options));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AllGridPointsFailed && e.code() != ErrorCode::InvalidArgument) throw;
        BrRow row;
        row.class_name = std::string(to_string(cls.tag));
        row.r = r;
        row.failure = e.what();
        if (cls.tag == ClassTag::Tabular) row.oracle = br_oracle_tabular(graph, r);
        report.rows.push_back(std::move(row));
      }
    }
  return report;
}

}  // namespace sclab
