#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sclab/posgraph.hpp"
#include "sclab/synthdata.hpp"

namespace sclab {

enum class ClassTag { Tabular, Linear, Relu, Conv };

std::string_view to_string(ClassTag tag);
ClassTag parse_class_tag(std::string_view name);

/// A representation family. `d` is the input dimension (linear, relu, conv),
/// `n` the vertex count (tabular), `s` the conv window length.
struct FunctionClassSpec {
  ClassTag tag = ClassTag::Linear;
  Index d = 0;
  Index k = 1;
  Index s = 0;
  Index n = 0;
  std::optional<double> lipschitz_kappa;

  void validate() const;
  /// Number of entries of a flat parameter vector for this class.
  Index param_count() const;
  /// Width of the per-example input: n for tabular, d otherwise.
  Index in_dim() const;
};

/// Spec matching `graph` for the given class and output dimension.
FunctionClassSpec class_for_graph(ClassTag tag, const PositivePairGraph& graph, Index k, Index s = 0);

/// Flat parameters, row-major:
///   tabular: F (n x k)      linear: U (k x d)
///   relu:    U (k x d), b   conv:   U (k x s), b
class RepresentationModel {
 public:
  RepresentationModel(FunctionClassSpec spec, Vector params);

  static RepresentationModel zeros(const FunctionClassSpec& spec);
  /// Entries i.i.d. uniform in [-scale, scale].
  static RepresentationModel random(const FunctionClassSpec& spec, double scale, std::uint64_t seed);
  static RepresentationModel tabular(const Matrix& values);
  static RepresentationModel linear(const Matrix& u);
  static RepresentationModel relu(const Matrix& u, const Vector& b);
  static RepresentationModel conv(Index d, const Matrix& u, const Vector& b);

  const FunctionClassSpec& spec() const noexcept { return spec_; }
  ClassTag tag() const noexcept { return spec_.tag; }
  Index out_dim() const noexcept { return spec_.k; }
  const Vector& params() const noexcept { return params_; }
  void set_params(Vector params);

  /// Weight matrix (tabular values, or U) and bias (relu/conv only).
  Matrix weights() const;
  Vector bias() const;

  /// "displayed" when the textbook weights verified, "re-derived" when the
  /// fallback solve produced them; empty for non-constructed models.
  std::string construction_path;

 private:
  FunctionClassSpec spec_;
  Vector params_;
};

/// n x k representations of every vertex.
Matrix forward(const RepresentationModel& model, const PositivePairGraph& graph);

/// Gradient of sum_i <cotangent_i, f(x_i)> with respect to the flat
/// parameters. ReLU uses subgradient 0 at 0.
Vector grad_params(const RepresentationModel& model, const PositivePairGraph& graph, const Matrix& cotangent);

/// max over vertex pairs of ||f(x) - f(x')|| / ||x - x'||.
double lipschitz_constant(const RepresentationModel& model, const PositivePairGraph& graph);

/// Linear map onto the first s coordinates (k must equal s).
RepresentationModel construct_example1_optimal(const Example1Spec& spec, const LabeledGraph& data, Index k);

/// 2^s ReLU units emitting sqrt(k) e_{bin(x_{1:s})}.
RepresentationModel construct_example2_optimal(const Example1Spec& spec, const LabeledGraph& data);

/// 2^s conv units emitting sqrt(k) e_{bin(patch)} regardless of location.
RepresentationModel construct_example4_optimal(const Example4Spec& spec, const LabeledGraph& data);

/// Tabular minimizer with zero loss that carries only key-coordinate
/// information: the distinct sign patterns on `key_dims` (0-based) are split
/// into k contiguous groups and each output is 1/sqrt(P(group)) on its group.
RepresentationModel construct_adversarial_universal(const PositivePairGraph& graph, Index k,
                                                    const std::vector<Index>& key_dims);

/// ReLU minimizer with k <= d 2^s units, each the scaled indicator of one
/// (location, patch) cluster in enumeration order.
RepresentationModel construct_example4_adversarial_relu(const Example4Spec& spec, const LabeledGraph& data, Index k);

/// Tabular sqrt(r) e_{set(x)} on an Example 3 graph.
RepresentationModel construct_example3_feig(const LabeledGraph& data);

}  // namespace sclab
