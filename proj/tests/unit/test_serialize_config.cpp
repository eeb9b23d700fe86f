#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "sclab/config.hpp"
#include "sclab/serialize.hpp"

using namespace sclab;
using testutil::error_code;

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, std::uniform_int_distribution<int>(-300, 290)(rng));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("graph JSON round-trip is lossless, dense and sparse") {
  std::mt19937_64 rng(2);
  const auto dense = testutil::random_graph(rng, 9, 2);
  const auto back = graph_from_json(Json::parse(graph_to_json(dense).dump()));
  CHECK(back.coords() == dense.coords());
  CHECK(back.joint().to_dense() == dense.joint().to_dense());
  CHECK(back.marginal() == dense.marginal());

  const Matrix w = testutil::random_block_joint(rng, 12, 3, 0.3);
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j)
      if (w(i, j) != 0.0) t.emplace_back(i, j, w(i, j));
  const auto sparse = build_graph(testutil::normal_matrix(rng, 12, 2), JointMatrix::from_triplets(12, t, 0));
  const Json j = graph_to_json(sparse);
  CHECK(j.at("joint").is_object());
  const auto sback = graph_from_json(Json::parse(j.dump()));
  CHECK(sback.joint().to_dense() == sparse.joint().to_dense());
}

TEST_CASE("graph JSON: validation is enforced on load") {
  Json j = {{"d", 1}, {"vertices", {{0.0}, {1.0}}}, {"joint", {{0.25, 0.3}, {0.2, 0.25}}}};
  CHECK(error_code([&] { graph_from_json(j); }) == ErrorCode::AsymmetricJoint);
  j["joint"] = {{0.25, 0.25}, {0.25, 0.25}};
  j["marginal"] = {0.4, 0.6};
  CHECK(error_code([&] { graph_from_json(j); }) == ErrorCode::NotNormalized);
  j.erase("marginal");
  CHECK(graph_from_json(j).size() == 2);
  CHECK(error_code([&] { graph_from_json(Json{{"vertices", {{0.0}}}}); }) == ErrorCode::ConfigError);
}

TEST_CASE("labeled graph and model round-trips") {
  const auto data = example1_graph(Example1Spec{});
  const auto back = labeled_graph_from_json(Json::parse(labeled_graph_to_json(data).dump()));
  CHECK(back.labels == data.labels);
  CHECK(back.groups == data.groups);
  CHECK(back.num_classes == 2);

  for (ClassTag tag : {ClassTag::Tabular, ClassTag::Linear, ClassTag::Relu, ClassTag::Conv}) {
    const auto m = RepresentationModel::random(class_for_graph(tag, data.graph, 3, 2), 1.0, 4);
    const auto mb = model_from_json(Json::parse(model_to_json(m).dump()));
    CHECK(mb.params() == m.params());
    CHECK(mb.tag() == tag);
    CHECK(forward(mb, data.graph) == forward(m, data.graph));
  }
}

TEST_CASE("CSV writers") {
  SpectralDecomposition spec;
  spec.eigenvalues = {0.0, 0.5};
  CHECK(spectrum_csv(spec) == "index,eigenvalue\n0,0\n1,0.5\n");
  std::vector<LossReport> trace{{3.0, 1.0, 1.0, 2.0}};
  CHECK(loss_trace_csv(trace) == "iter,pair_term,reg_term,total\n0,1,1,3\n");
}

TEST_CASE("parse_json reports line and column") {
  try {
    parse_json("{\n  \"a\": 1,\n  \"b\": ]\n}", "cfg.json");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(e.detail().find("cfg.json:3:") == 0);
  }
}

TEST_CASE("config: parsing, defaults and unknown keys") {
  const Json j = Json::parse(R"({
    "version": 1,
    "example": {"type": "example1", "d": 5, "s": 2, "tau_grid": [0.5, 1.0]},
    "class": {"type": "relu", "k": 3},
    "lambda": 2.5,
    "r_list": [2, 4],
    "train": {"seed": 9, "momentum": 0.9}
  })");
  const ExperimentConfig cfg = parse_config(j);
  REQUIRE(cfg.example.has_value());
  CHECK(cfg.example->ex1.d == 5);
  CHECK(cfg.cls.tag == ClassTag::Relu);
  CHECK(cfg.cls.k.value() == 3);
  CHECK(cfg.lambda == 2.5);
  CHECK(cfg.r_list == std::vector<Index>{2, 4});
  CHECK(cfg.train.seed == 9);
  CHECK(build_example(*cfg.example).data.graph.size() == 32 * 8);

  Json typo = j;
  typo["lamda"] = 1.0;
  try {
    parse_config(typo);
    FAIL("expected unknown key");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(e.detail().find("config.lamda") != std::string::npos);
  }
  Json nested = j;
  nested["train"]["stepsize"] = 0.1;
  CHECK(error_code([&] { parse_config(nested); }) == ErrorCode::ConfigError);
  Json version = j;
  version["version"] = 7;
  CHECK(error_code([&] { parse_config(version); }) == ErrorCode::ConfigError);
  Json missing = Json::parse(R"({"version": 1, "example": {"type": "graph_file", "path": "/no/such/file.json"}})");
  CHECK(error_code([&] { parse_config(missing); }) == ErrorCode::ConfigError);
}

TEST_CASE("fnv1a_hex: reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
