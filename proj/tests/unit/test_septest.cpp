#include <doctest.h>

#include "helpers.hpp"
#include "sclab/septest.hpp"
#include "sclab/synthdata.hpp"
#include "stiefel.hpp"

using namespace sclab;
using testutil::error_code;

namespace {

BrOptions quick_options() {
  BrOptions o;
  o.lambda_grid = {1.0, 10.0};
  o.seeds_per_cell = 1;
  o.train.momentum = 0.9;
  o.train.max_iters = 20000;
  return o;
}

}  // namespace

TEST_CASE("br_oracle_tabular: examples") {
  std::mt19937_64 rng(1);
  const auto blocks = testutil::random_graph(rng, 12, 4);
  CHECK(br_oracle_tabular(blocks, 3) <= 1e-12);
  CHECK(br_oracle_tabular(blocks, 4) <= 1e-12);
  const auto uni = build_graph(std::vector<Datapoint>{{0.0}, {1.0}}, Matrix::Constant(2, 2, 0.25));
  CHECK(br_oracle_tabular(uni, 2) == doctest::Approx(1.0));
}

TEST_CASE("property: oracle non-decreasing in r") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto graph = testutil::random_graph(rng, 15, 2);
    for (Index r = 2; r <= 15; ++r) CHECK(br_oracle_tabular(graph, r) >= br_oracle_tabular(graph, r - 1) - 1e-12);
  }
}

TEST_CASE("oracle formula agrees with brute-force constrained minimization on small graphs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    const Index n = std::uniform_int_distribution<Index>(2, 6)(rng);
    const Index blocks = std::uniform_int_distribution<Index>(1, 2)(rng);
    const auto graph = testutil::random_graph(rng, n, std::min(blocks, n), 2, 0.5);
    for (Index r = 1; r <= n; ++r) {
      const double brute = stiefel::min_discrepancy(graph, r, 100 + trial, 4, 5000);
      CHECK(std::abs(brute - br_oracle_tabular(graph, r)) <= 1e-6);
    }
  }
}

TEST_CASE("estimate_br: tabular training matches the oracle") {
  std::mt19937_64 rng(4);
  const auto graph = testutil::random_graph(rng, 20, 2);
  for (Index r : {2, 4}) {
    const BrRow row = estimate_br(graph, class_for_graph(ClassTag::Tabular, graph, 1), r, quick_options());
    REQUIRE(row.b_r.has_value());
    REQUIRE(row.oracle.has_value());
    CHECK(std::abs(*row.b_r - *row.oracle) <= 1e-3);
    for (const auto& c : row.cells)
      if (c.whiten_ok) CHECK(*row.b_r <= c.b_value);
  }
}

TEST_CASE("estimate_br: enough components give zero") {
  std::mt19937_64 rng(5);
  const auto graph = testutil::random_graph(rng, 15, 5);
  const BrRow row = estimate_br(graph, class_for_graph(ClassTag::Tabular, graph, 1), 3, quick_options());
  CHECK(*row.b_r <= 1e-6);
}

TEST_CASE("br_table: Example 1 linear class separates r = s from r = s + 1") {
  Example1Spec spec;
  spec.d = 4;
  spec.s = 2;
  const auto data = example1_graph(spec);
  const auto lin = class_for_graph(ClassTag::Linear, data.graph, 1);
  const auto report = br_table(data.graph, {lin}, {2, 3}, quick_options());
  REQUIRE(report.rows.size() == 2);
  CHECK(*report.rows[0].b_r <= 1e-6);
  CHECK(*report.rows[1].b_r > 1e-3);
}

TEST_CASE("br_table: class containment and failures") {
  std::mt19937_64 rng(6);
  const auto graph = testutil::random_graph(rng, 16, 3, 4);
  const auto tab = class_for_graph(ClassTag::Tabular, graph, 1);
  const auto lin = class_for_graph(ClassTag::Linear, graph, 1);
  const auto report = br_table(graph, {tab, lin}, {2, 3, 6, 40}, quick_options());
  REQUIRE(report.rows.size() == 8);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(report.rows[i].b_r.has_value());
    REQUIRE(report.rows[i + 4].b_r.has_value());
    CHECK(*report.rows[i].b_r <= *report.rows[i + 4].b_r + 1e-6);
  }
  CHECK(report.rows[3].r == 16);           // capped at n
  CHECK(!report.rows[6].failure.empty());  // linear with r > d cannot whiten
  CHECK(!report.rows[7].failure.empty());
  CHECK(error_code([&] { br_table(graph, {tab}, {}, quick_options()); }) == ErrorCode::InvalidArgument);
}
