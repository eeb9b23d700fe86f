#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sclab/funclass.hpp"
#include "sclab/objective.hpp"
#include "sclab/posgraph.hpp"

namespace sclab {

inline const std::vector<double> kDefaultLambdaGrid{0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0};

/// One training run of the protocol: train with k = r, whiten to I / r,
/// measure the pair discrepancy of the whitened representation.
struct BrCell {
  Index r = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double b_value = 0.0;
  bool whiten_ok = false;
  std::string note;  // failure reason when !whiten_ok
};

struct BrRow {
  std::string class_name;
  Index r = 0;
  std::vector<BrCell> cells;
  std::optional<double> b_r;  // min over successful cells
  std::optional<double> oracle;
  std::string failure;        // set when every cell failed
};

struct SeparabilityReport {
  std::vector<BrRow> rows;
};

struct BrOptions {
  std::vector<double> lambda_grid = kDefaultLambdaGrid;
  int seeds_per_cell = 5;
  TrainConfig train;
};

/// Throws AllGridPointsFailed when no cell whitens successfully.
BrRow estimate_br(const PositivePairGraph& graph, const FunctionClassSpec& cls, Index r, const BrOptions& options);

/// (2 / r) * sum of the r smallest Laplacian eigenvalues.
double br_oracle_tabular(const PositivePairGraph& graph, Index r);

/// r values above n are capped at n; rows whose grid fails entirely are kept
/// with `failure` set. Tabular rows carry the oracle.
SeparabilityReport br_table(const PositivePairGraph& graph, const std::vector<FunctionClassSpec>& classes,
                            const std::vector<Index>& r_list, const BrOptions& options);

}  // namespace sclab
