#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sclab/funclass.hpp"
#include "sclab/objective.hpp"
#include "sclab/serialize.hpp"
#include "sclab/synthdata.hpp"

namespace sclab {

inline constexpr int kConfigVersion = 1;

enum class ExampleKind { Example1, Example2, Example3, Example4, GraphFile, TwoLevel, Components };

std::string_view to_string(ExampleKind kind);

/// Parsed "example" block. Only the fields of `kind` are meaningful.
struct ExampleConfig {
  ExampleKind kind = ExampleKind::Example1;
  Example1Spec ex1;
  LabelMap label_map;  // example2
  int m = 2;           // example2 class count
  int ex3_r = 3;
  int ex3_subclusters = 2;
  int ex3_points = 4;
  double ex3_rho = 0.1;
  double ex3_gamma = 1.0;
  int ex3_m = 2;
  std::vector<int> ex3_labels;
  Example4Spec ex4;
  std::filesystem::path graph_file;
  TwoLevelSpec two_level;
  std::vector<int> component_sizes{4, 4, 4};
  int component_dim = 3;
  double extra_edge_prob = 0.3;
  std::uint64_t seed = 0;
};

struct ClassConfig {
  ClassTag tag = ClassTag::Linear;
  std::optional<Index> k;  // unset: command-specific default
  Index s = 1;             // conv window
  std::optional<double> kappa;
};

struct ExperimentConfig {
  int version = kConfigVersion;
  std::optional<ExampleConfig> example;
  ClassConfig cls;
  bool class_given = false;
  double lambda = 1.0;
  std::vector<double> lambda_grid;
  std::vector<Index> r_list;
  std::vector<ClassTag> br_classes;
  int seeds_per_cell = 5;
  TrainConfig train;
  std::size_t n_pre = 0;  // 0: train on the population loss
  Index count = 10;       // eigenpairs for `spectrum`
  std::filesystem::path output_dir;
  std::string source_text;  // raw config text, hashed into manifests
};

/// Unknown keys anywhere fail with ConfigError naming the JSON path.
ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct BuiltExample {
  LabeledGraph data;
  ExampleConfig config;
  std::optional<Example3Spec> ex3;  // set for example3
};

BuiltExample build_example(const ExampleConfig& config);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace sclab
