#include "sclab/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sclab {

namespace {

Json matrix_rows(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix rows_to_matrix(const Json& rows, Index cols_hint, const char* what) {
  require(rows.is_array(), ErrorCode::ConfigError, std::string(what) + " must be an array of rows");
  const auto n = static_cast<Index>(rows.size());
  Index cols = cols_hint;
  if (n > 0) {
    require(rows[0].is_array(), ErrorCode::ConfigError, std::string(what) + " rows must be arrays");
    cols = static_cast<Index>(rows[0].size());
  }
  Matrix m(n, cols);
  for (Index i = 0; i < n; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    require(row.is_array() && static_cast<Index>(row.size()) == cols, ErrorCode::DimensionMismatch,
            std::string(what) + " row " + std::to_string(i) + " has the wrong length");
    for (Index c = 0; c < cols; ++c) {
      require(row[static_cast<std::size_t>(c)].is_number(), ErrorCode::ConfigError,
              std::string(what) + " entries must be numbers");
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

std::vector<int> int_list(const Json& j, const char* what) {
  require(j.is_array(), ErrorCode::ConfigError, std::string(what) + " must be an array");
  std::vector<int> out;
  for (const auto& v : j) {
    require(v.is_number_integer(), ErrorCode::ConfigError, std::string(what) + " entries must be integers");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, end) : std::to_string(v);
}

Json graph_to_json(const PositivePairGraph& graph) {
  Json j;
  j["d"] = graph.dim();
  j["vertices"] = matrix_rows(graph.coords());
  if (graph.joint().storage() == JointMatrix::Storage::Dense) {
    j["joint"] = matrix_rows(graph.joint().to_dense());
  } else {
    Json triplets = Json::array();
    graph.joint().for_each_nonzero([&](Index a, Index b, double w) { triplets.push_back(Json::array({a, b, w})); });
    j["joint"] = {{"n", graph.size()}, {"triplets", std::move(triplets)}};
  }
  j["marginal"] = std::vector<double>(graph.marginal().data(), graph.marginal().data() + graph.size());
  return j;
}

PositivePairGraph graph_from_json(const Json& j) {
  require(j.is_object(), ErrorCode::ConfigError, "graph must be a JSON object");
  for (const char* key : {"vertices", "joint"})
    require(j.contains(key), ErrorCode::ConfigError, std::string("graph is missing \"") + key + "\"");
  const Index d = j.contains("d") ? j.at("d").get<Index>() : -1;
  const Matrix coords = rows_to_matrix(j.at("vertices"), std::max<Index>(d, 0), "vertices");
  if (d >= 0 && coords.rows() > 0)
    require(coords.cols() == d, ErrorCode::DimensionMismatch, "vertex dimension differs from \"d\"");

  const Json& joint = j.at("joint");
  JointMatrix jm;
  if (joint.is_array()) {
    jm = JointMatrix::from_dense(rows_to_matrix(joint, coords.rows(), "joint"));
  } else {
    require(joint.is_object() && joint.contains("triplets"), ErrorCode::ConfigError,
            "joint must be a dense array or {\"triplets\": [...]}");
    const Index n = joint.contains("n") ? joint.at("n").get<Index>() : coords.rows();
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& t : joint.at("triplets")) {
      require(t.is_array() && t.size() == 3, ErrorCode::ConfigError, "triplets must be [i, j, w]");
      const auto a = t[0].get<Index>(), b = t[1].get<Index>();
      require(a >= 0 && a < n && b >= 0 && b < n, ErrorCode::ConfigError, "triplet index out of range");
      triplets.emplace_back(a, b, t[2].get<double>());
    }
    jm = JointMatrix::from_triplets(n, triplets, n > JointMatrix::kDenseLimit ? JointMatrix::kDenseLimit : Index{0});
  }
  PositivePairGraph graph = build_graph(coords, std::move(jm));
  if (j.contains("marginal")) {
    const auto stored = j.at("marginal").get<std::vector<double>>();
    require(static_cast<Index>(stored.size()) == graph.size(), ErrorCode::DimensionMismatch,
            "marginal length differs from vertex count");
    for (Index i = 0; i < graph.size(); ++i)
      require(std::abs(stored[static_cast<std::size_t>(i)] - graph.marginal()(i)) <= 1e-9, ErrorCode::NotNormalized,
              "stored marginal of vertex " + std::to_string(i) + " differs from the joint row sum");
  }
  return graph;
}

Json labeled_graph_to_json(const LabeledGraph& data) {
  Json j = graph_to_json(data.graph);
  j["labels"] = data.labels;
  j["num_classes"] = data.num_classes;
  j["groups"] = data.groups;
  j["num_groups"] = data.num_groups;
  return j;
}

LabeledGraph labeled_graph_from_json(const Json& j) {
  LabeledGraph out{graph_from_json(j), {}, 0, {}, 0};
  const auto n = static_cast<std::size_t>(out.graph.size());
  if (j.contains("labels")) {
    out.labels = int_list(j.at("labels"), "labels");
    require(out.labels.size() == n, ErrorCode::DimensionMismatch, "labels length differs from vertex count");
    int top = -1;
    for (int y : out.labels) {
      require(y >= 0, ErrorCode::ConfigError, "labels must be nonnegative");
      top = std::max(top, y);
    }
    out.num_classes = j.contains("num_classes") ? j.at("num_classes").get<int>() : top + 1;
    require(out.num_classes > top, ErrorCode::ConfigError, "num_classes too small for labels");
  }
  if (j.contains("groups")) {
    out.groups = int_list(j.at("groups"), "groups");
    require(out.groups.size() == n, ErrorCode::DimensionMismatch, "groups length differs from vertex count");
    int top = -1;
    for (int g : out.groups) {
      require(g >= 0, ErrorCode::ConfigError, "groups must be nonnegative");
      top = std::max(top, g);
    }
    out.num_groups = j.contains("num_groups") ? j.at("num_groups").get<int>() : top + 1;
  }
  return out;
}

Json model_to_json(const RepresentationModel& model) {
  const auto& spec = model.spec();
  Json shape = {{"k", spec.k}};
  switch (spec.tag) {
    case ClassTag::Tabular: shape["n"] = spec.n; break;
    case ClassTag::Linear:
    case ClassTag::Relu: shape["d"] = spec.d; break;
    case ClassTag::Conv:
      shape["d"] = spec.d;
      shape["s"] = spec.s;
      break;
  }
  Json j;
  j["class"] = std::string(to_string(spec.tag));
  j["shape"] = shape;
  j["params"] = std::vector<double>(model.params().data(), model.params().data() + model.params().size());
  if (!model.construction_path.empty()) j["construction_path"] = model.construction_path;
  return j;
}

RepresentationModel model_from_json(const Json& j) {
  require(j.is_object() && j.contains("class") && j.contains("shape") && j.contains("params"), ErrorCode::ConfigError,
          "model needs \"class\", \"shape\" and \"params\"");
  FunctionClassSpec spec;
  spec.tag = parse_class_tag(j.at("class").get<std::string>());
  const Json& shape = j.at("shape");
  spec.k = shape.value("k", Index{1});
  spec.n = shape.value("n", Index{0});
  spec.d = shape.value("d", Index{0});
  spec.s = shape.value("s", Index{0});
  const auto params = j.at("params").get<std::vector<double>>();
  RepresentationModel model(spec, Eigen::Map<const Vector>(params.data(), static_cast<Index>(params.size())));
  model.construction_path = j.value("construction_path", std::string());
  return model;
}

std::string spectrum_csv(const SpectralDecomposition& spec) {
  std::ostringstream os;
  os << "index,eigenvalue\n";
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) os << i << ',' << format_double(spec.eigenvalues[i]) << '\n';
  return os.str();
}

std::string eigenfunctions_csv(const SpectralDecomposition& spec) {
  std::ostringstream os;
  os << "vertex";
  for (std::size_t i = 0; i < spec.eigenfunctions.size(); ++i) os << ",g" << i;
  os << '\n';
  const Matrix m = spec.as_matrix();
  for (Index v = 0; v < m.rows(); ++v) {
    os << v;
    for (Index c = 0; c < m.cols(); ++c) os << ',' << format_double(m(v, c));
    os << '\n';
  }
  return os.str();
}

std::string loss_trace_csv(const std::vector<LossReport>& trace) {
  std::ostringstream os;
  os << "iter,pair_term,reg_term,total\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    os << i << ',' << format_double(trace[i].pair_term) << ',' << format_double(trace[i].reg_term) << ','
       << format_double(trace[i].total) << '\n';
  return os.str();
}

std::string br_report_csv(const SeparabilityReport& report) {
  std::ostringstream os;
  os << "class,r,lambda,b_value,whiten_ok,seed\n";
  for (const auto& row : report.rows)
    for (const auto& c : row.cells)
      os << row.class_name << ',' << c.r << ',' << format_double(c.lambda) << ','
         << (c.whiten_ok ? format_double(c.b_value) : "") << ',' << (c.whiten_ok ? 1 : 0) << ',' << c.seed << '\n';
  return os.str();
}

std::string br_summary_csv(const SeparabilityReport& report) {
  std::ostringstream os;
  os << "class,r,b_r,oracle\n";
  for (const auto& row : report.rows)
    os << row.class_name << ',' << row.r << ',' << (row.b_r ? format_double(*row.b_r) : "") << ','
       << (row.oracle ? format_double(*row.oracle) : "") << '\n';
  return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + path.string());
}

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::ConfigError,
         origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

}  // namespace sclab
