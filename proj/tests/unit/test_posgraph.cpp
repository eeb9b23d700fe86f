#include <doctest.h>

#include "helpers.hpp"
#include "sclab/posgraph.hpp"
#include "sclab/synthdata.hpp"

using namespace sclab;
using testutil::error_code;

TEST_CASE("build_graph: single self-loop") {
  const auto g = build_graph(std::vector<Datapoint>{{0.0}}, Matrix::Constant(1, 1, 1.0));
  CHECK(g.size() == 1);
  CHECK(g.marginal()(0) == 1.0);
  CHECK(connected_components(g).m == 1);
}

TEST_CASE("build_graph: marginals and components of two-vertex graphs") {
  Matrix split(2, 2);
  split << 0.5, 0.0, 0.0, 0.5;
  const auto a = build_graph(std::vector<Datapoint>{{0.0}, {1.0}}, split);
  CHECK(a.marginal().isApprox(Vector::Constant(2, 0.5)));
  CHECK(connected_components(a).m == 2);

  const auto b = build_graph(std::vector<Datapoint>{{0.0}, {1.0}}, Matrix::Constant(2, 2, 0.25));
  CHECK(b.marginal().isApprox(Vector::Constant(2, 0.5)));
  CHECK(connected_components(b).m == 1);
}

TEST_CASE("build_graph: validation errors") {
  const std::vector<Datapoint> two{{0.0}, {1.0}};
  Matrix asym(2, 2);
  asym << 0.25, 0.3, 0.2, 0.25;
  CHECK(error_code([&] { build_graph(two, asym); }) == ErrorCode::AsymmetricJoint);
  CHECK(error_code([&] { build_graph(two, Matrix::Constant(2, 2, 0.3)); }) == ErrorCode::NotNormalized);
  Matrix zero_row(2, 2);
  zero_row << 1.0, 0.0, 0.0, 0.0;
  CHECK(error_code([&] { build_graph(two, zero_row); }) == ErrorCode::ZeroMassVertex);
  CHECK(error_code([&] { build_graph(std::vector<Datapoint>{{1.0}, {1.0}}, Matrix::Constant(2, 2, 0.25)); }) ==
        ErrorCode::DuplicateVertex);
  CHECK(error_code([&] { build_graph(std::vector<Datapoint>{{0.0}, {1.0, 2.0}}, Matrix::Constant(2, 2, 0.25)); }) ==
        ErrorCode::DimensionMismatch);
  Matrix negative(2, 2);
  negative << 0.6, -0.1, -0.1, 0.6;
  CHECK(error_code([&] { build_graph(two, negative); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("from_augmentation_process: hand-expanded examples") {
  const auto single = from_augmentation_process({{{0.0}, 1.0}}, {{{{0.0}, 1.0}}});
  CHECK(single.size() == 1);
  CHECK(single.joint().coeff(0, 0) == doctest::Approx(1.0));

  const std::vector<WeightedPoint> naturals{{{0.0, 0.0}, 0.5}, {{5.0, 5.0}, 0.5}};
  const std::vector<std::vector<WeightedPoint>> kernel{{{{0.0, 1.0}, 0.5}, {{1.0, 0.0}, 0.5}},
                                                       {{{5.0, 6.0}, 0.5}, {{6.0, 5.0}, 0.5}}};
  const auto g = from_augmentation_process(naturals, kernel);
  CHECK(g.size() == 4);
  CHECK(connected_components(g).m == 2);
  const Matrix w = g.joint().to_dense();
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      CHECK(w(i, j) == doctest::Approx(0.125));
      CHECK(w(i + 2, j + 2) == doctest::Approx(0.125));
      CHECK(w(i, j + 2) == 0.0);
    }
}

TEST_CASE("from_augmentation_process: shared augmentations merge vertices") {
  const std::vector<WeightedPoint> naturals{{{0.0}, 0.5}, {{2.0}, 0.5}};
  const std::vector<std::vector<WeightedPoint>> kernel{{{{1.0}, 1.0}}, {{{1.0}, 0.5}, {{3.0}, 0.5}}};
  const auto g = from_augmentation_process(naturals, kernel);
  CHECK(g.size() == 2);
  CHECK(g.joint().coeff(0, 0) == doctest::Approx(0.5 + 0.125));
  CHECK(g.joint().coeff(0, 1) == doctest::Approx(0.125));
  CHECK(connected_components(g).m == 1);
}

TEST_CASE("from_augmentation_process: kernel rows must be distributions") {
  CHECK(error_code([] { from_augmentation_process({{{0.0}, 1.0}}, {{{{0.0}, 0.7}}}); }) ==
        ErrorCode::KernelNotNormalized);
  CHECK(error_code([] { from_augmentation_process({{{0.0}, 0.4}}, {{{{0.0}, 1.0}}}); }) == ErrorCode::NotNormalized);
}

TEST_CASE("connected_components: block examples") {
  std::mt19937_64 rng(7);
  const auto three = testutil::random_graph(rng, 12, 3);
  CHECK(connected_components(three).m == 3);
  const auto full = testutil::dense_graph(testutil::normal_matrix(rng, 5, 2), Matrix::Constant(5, 5, 1.0 / 25.0));
  CHECK(connected_components(full).m == 1);
}

TEST_CASE("property: union-find components agree with BFS and have zero cross mass") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(2, 40);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = size(rng);
    const Index blocks = std::uniform_int_distribution<Index>(1, n)(rng);
    const Matrix w = testutil::random_block_joint(rng, n, blocks, 0.2);
    const auto g = testutil::dense_graph(testutil::normal_matrix(rng, n, 2), w);
    const Partition comps = connected_components(g);
    CHECK(comps.m == testutil::bfs_components(w));
    CHECK(cross_cluster_mass(g, comps) == 0.0);
    // ids follow the smallest member
    int next = 0;
    for (int c : comps.assignment) {
      CHECK(c <= next);
      if (c == next) ++next;
    }
  }
}

TEST_CASE("cross_cluster_mass: one symmetric cross edge") {
  Matrix w = Matrix::Zero(4, 4);
  w.block(0, 0, 2, 2).setConstant(0.49 / 4.0);
  w.block(2, 2, 2, 2).setConstant(0.49 / 4.0);
  w(1, 2) = w(2, 1) = 0.01;
  std::mt19937_64 rng(3);
  const auto g = testutil::dense_graph(testutil::normal_matrix(rng, 4, 2), w);
  CHECK(cross_cluster_mass(g, make_partition({0, 0, 1, 1})) == doctest::Approx(0.02));
  CHECK(cross_cluster_mass(g, make_partition({0, 0, 0, 0})) == 0.0);
}

TEST_CASE("restrict_to: examples and idempotence") {
  Matrix w = Matrix::Zero(4, 4);
  w.block(0, 0, 2, 2).setConstant(0.6 / 4.0);
  w.block(2, 2, 2, 2).setConstant(0.4 / 4.0);
  std::mt19937_64 rng(5);
  const auto g = testutil::dense_graph(testutil::normal_matrix(rng, 4, 2), w);

  const auto all = restrict_to(g, {0, 1, 2, 3});
  CHECK(all.joint().to_dense().isApprox(w));

  const auto first = restrict_to(g, {0, 1});
  CHECK(first.joint().to_dense().isApprox(w.block(0, 0, 2, 2) / 0.6));
  const auto again = restrict_to(first, {0, 1});
  CHECK(again.joint().to_dense().isApprox(first.joint().to_dense()));

  Matrix loop = Matrix::Zero(2, 2);
  loop << 0.5, 0.0, 0.0, 0.5;
  const auto single = restrict_to(testutil::dense_graph(testutil::normal_matrix(rng, 2, 1), loop), {1});
  CHECK(single.size() == 1);
  CHECK(single.joint().coeff(0, 0) == doctest::Approx(1.0));

  CHECK(error_code([&] { restrict_to(g, {}); }) == ErrorCode::EmptySubset);
  Matrix edge = Matrix::Zero(2, 2);
  edge << 0.0, 0.5, 0.5, 0.0;
  const auto bare = testutil::dense_graph(testutil::normal_matrix(rng, 2, 1), edge);
  CHECK(error_code([&] { restrict_to(bare, {0}); }) == ErrorCode::ZeroConditionalMass);
}

TEST_CASE("JointMatrix: dense and sparse layouts agree") {
  std::mt19937_64 rng(19);
  const Matrix w = testutil::random_block_joint(rng, 30, 4, 0.3);
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < 30; ++i)
    for (Index j = 0; j < 30; ++j)
      if (w(i, j) != 0.0) triplets.emplace_back(i, j, w(i, j));
  const JointMatrix dense = JointMatrix::from_dense(w);
  const JointMatrix sparse = JointMatrix::from_triplets(30, triplets, 0);
  CHECK(dense.storage() == JointMatrix::Storage::Dense);
  CHECK(sparse.storage() == JointMatrix::Storage::Sparse);
  const Matrix f = testutil::normal_matrix(rng, 30, 3);
  CHECK((dense.multiply(f) - sparse.multiply(f)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((dense.row_sums() - sparse.row_sums()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(dense.nonzeros() == sparse.nonzeros());
  const auto coords = testutil::normal_matrix(rng, 30, 2);
  CHECK(connected_components(build_graph(coords, dense)).m == connected_components(build_graph(coords, sparse)).m);
}

TEST_CASE("make_partition rejects unused and negative ids") {
  CHECK(error_code([] { make_partition({0, 2}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { make_partition({-1, 0}); }) == ErrorCode::InvalidArgument);
  CHECK(make_partition({1, 0, 1}).m == 2);
}
