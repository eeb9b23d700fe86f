#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "sclab/probe.hpp"
#include "sclab/synthdata.hpp"

using namespace sclab;
using testutil::error_code;

namespace {

void check_labels_constant_on_components(const LabeledGraph& data) {
  const Partition comps = connected_components(data.graph);
  std::vector<int> seen(static_cast<std::size_t>(comps.m), -1);
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    int& s = seen[static_cast<std::size_t>(comps.assignment[i])];
    if (s < 0) s = data.labels[i];
    CHECK(s == data.labels[i]);
  }
}

}  // namespace

TEST_CASE("bin_code and bin_inverse") {
  CHECK(bin_code(std::vector<double>{-1.0, 1.0, 1.0}) == 3);
  CHECK(bin_code(std::vector<double>{1.0, -1.0}) == 2);
  CHECK(bin_code(std::vector<double>{0.0, 1.0}) == 1);
  for (int s = 1; s <= 5; ++s)
    for (int code = 0; code < (1 << s); ++code) CHECK(bin_code(bin_inverse(code, s)) == code);
}

TEST_CASE("example1: cube corners with identity augmentation") {
  Example1Spec spec;
  spec.d = 2;
  spec.tau_grid = {1.0};
  const auto data = example1_graph(spec);
  CHECK(data.graph.size() == 4);
  CHECK(connected_components(data.graph).m == 4);
  for (Index i = 0; i < 4; ++i) CHECK(data.labels[static_cast<std::size_t>(i)] == (data.graph.coords()(i, 0) > 0 ? 1 : 0));
}

TEST_CASE("example1: d=4 s=1 counts") {
  const auto data = example1_graph(Example1Spec{});
  CHECK(data.graph.size() == 128);
  CHECK(connected_components(data.graph).m == 16);
  CHECK(cross_cluster_mass(data.graph, connected_components(data.graph)) == 0.0);
  check_labels_constant_on_components(data);
}

TEST_CASE("property: example1 component count is 2^d") {
  for (int d = 1; d <= 6; ++d)
    for (int s = 1; s <= d; ++s)
      for (const auto& grid : {std::vector<double>{1.0}, std::vector<double>{0.5, 1.0},
                               std::vector<double>{0.25, 0.5, 1.0}}) {
        Example1Spec spec;
        spec.d = d;
        spec.s = s;
        spec.tau_grid = grid;
        const auto data = example1_graph(spec);
        CHECK(connected_components(data.graph).m == (1 << d));
        check_labels_constant_on_components(data);
      }
}

TEST_CASE("example1: size guard and validation") {
  Example1Spec spec;
  spec.d = 12;
  spec.s = 1;
  spec.tau_grid = {0.25, 0.5, 1.0};
  CHECK(error_code([&] { example1_graph(spec); }) == ErrorCode::SizeGuardExceeded);
  Example1Spec bad;
  bad.label_dim = 2;
  CHECK(error_code([&] { example1_graph(bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("example1 is deterministic") {
  const auto a = example1_graph(Example1Spec{});
  const auto b = example1_graph(Example1Spec{});
  CHECK(a.graph.coords() == b.graph.coords());
  CHECK(a.graph.joint().to_dense() == b.graph.joint().to_dense());
}

TEST_CASE("example2: label maps") {
  Example1Spec spec;
  spec.d = 4;
  spec.s = 2;
  const auto plain = example1_graph(spec);
  const auto sign = example2_labels(spec, sign_label_map(2, 1), 2);
  CHECK(sign.labels == plain.labels);

  const auto xr = example2_labels(spec, xor_label_map(2, 1, 2), 2);
  check_labels_constant_on_components(xr);
  const double residual =
      class_fit_residual(xr.graph, class_for_graph(ClassTag::Linear, xr.graph, 2), xr.label_onehots());
  CHECK(residual > 1e-3);

  const auto all = example2_labels(spec, enumeration_label_map(2), 4);
  std::vector<double> mass(4, 0.0);
  for (Index i = 0; i < all.graph.size(); ++i) mass[static_cast<std::size_t>(all.labels[static_cast<std::size_t>(i)])] += all.graph.marginal()(i);
  for (double m : mass) CHECK(m == doctest::Approx(0.25));

  CHECK(error_code([&] { example2_labels(spec, LabelMap{0, 1}, 2); }) == ErrorCode::IncompleteLabelMap);
}

TEST_CASE("example3: components, labels and geometry") {
  Example3Spec single;
  single.r = 2;
  single.point_sets = {{{0.0, 0.0}}, {{1.0, 0.0}}};
  single.rho = 0.1;
  single.gamma = 1.0;
  single.labels = {0, 1};
  CHECK(connected_components(example3_graph(single).graph).m == 2);

  const auto spec = example3_lattice(2, 2, 3, 0.1, 1.0, 2, {0, 1});
  const auto data = example3_graph(spec);
  CHECK(connected_components(data.graph).m == 4);
  CHECK(std::set<int>(data.labels.begin(), data.labels.end()).size() == 2);

  const auto four = example3_graph(example3_lattice(4, 1, 4, 0.2, 0.5, 2, {0, 1, 0, 1}));
  CHECK(connected_components(four.graph).m >= 4);

  Example3Spec wide = single;
  wide.point_sets = {{{0.0, 0.0}, {0.5, 0.0}}, {{3.0, 0.0}}};
  CHECK(error_code([&] { example3_graph(wide); }) == ErrorCode::GeometryViolation);
  Example3Spec close = single;
  close.point_sets = {{{0.0, 0.0}}, {{0.5, 0.0}}};
  CHECK(error_code([&] { example3_graph(close); }) == ErrorCode::GeometryViolation);
}

TEST_CASE("example4: naturals only with identity augmentation") {
  Example4Spec spec;
  spec.tau_grid = {1.0};
  const auto data = example4_graph(spec);
  CHECK(data.graph.size() == spec.d * 2 * 4);
  // patch +2 at location 0 and at location 1 share the label
  int label0 = -1, label1 = -1;
  for (Index i = 0; i < data.graph.size(); ++i) {
    const auto p = locate_patch(spec, std::vector<double>(data.graph.coords().row(i).begin(), data.graph.coords().row(i).end()));
    REQUIRE(p.has_value());
    if (p->code == 1 && p->location == 0) label0 = data.labels[static_cast<std::size_t>(i)];
    if (p->code == 1 && p->location == 1) label1 = data.labels[static_cast<std::size_t>(i)];
  }
  CHECK(label0 >= 0);
  CHECK(label0 == label1);
  CHECK(connected_components(data.graph).m == data.graph.size());
}

TEST_CASE("example4: zeroed spurious dims are vertices") {
  Example4Spec spec;
  spec.tau_grid = {0.0, 1.0};
  const auto data = example4_graph(spec);
  bool found = false;
  for (Index i = 0; i < data.graph.size(); ++i) {
    const auto row = data.graph.coords().row(i);
    if (row(0) == 2.0 && row(1) == 0.0 && row(2) == 0.0) found = true;
  }
  CHECK(found);
  check_labels_constant_on_components(data);
}

TEST_CASE("example4: components equal distinct naturals when 0 is not in the grid") {
  Example4Spec spec;
  spec.d = 4;
  spec.tau_grid = {0.5, 1.0};
  const auto data = example4_graph(spec);
  CHECK(connected_components(data.graph).m == spec.d * (1 << spec.s) * (1 << (spec.d - spec.s)));
  check_labels_constant_on_components(data);
}

TEST_CASE("two_level and random_component graphs") {
  const auto tl = two_level_graph(TwoLevelSpec{}, 3);
  CHECK(cross_cluster_mass(tl.graph, make_partition(tl.groups)) == doctest::Approx(0.02));
  CHECK(connected_components(restrict_to(tl.graph, make_partition(tl.groups).members(0))).m == 2);

  const auto rc = random_component_graph({3, 5, 2}, 2, 0.5, 9);
  CHECK(connected_components(rc.graph).m == 3);
  CHECK(rc.graph.size() == 10);
}
