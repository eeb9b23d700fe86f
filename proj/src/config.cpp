#include "sclab/config.hpp"

#include <cstdio>
#include <set>

namespace sclab {

namespace {

// Reads fields of one JSON object; check_done() rejects keys nobody asked for.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j.is_object(), ErrorCode::ConfigError, path_ + " must be an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const Json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const Json::exception&) {
        fail(ErrorCode::ConfigError, where(key) + " has the wrong type");
      }
    }
  }

  void check_done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(ErrorCode::ConfigError, "unknown key " + where(it.key()));
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ExampleKind parse_kind(const std::string& name) {
  for (ExampleKind k : {ExampleKind::Example1, ExampleKind::Example2, ExampleKind::Example3, ExampleKind::Example4,
                        ExampleKind::GraphFile, ExampleKind::TwoLevel, ExampleKind::Components})
    if (to_string(k) == name) return k;
  fail(ErrorCode::ConfigError, "unknown example type \"" + name + "\"");
}

LabelMap parse_label_map(const Json& v, const std::string& where, int s, int label_dim) {
  if (v.is_array()) {
    LabelMap map;
    for (const auto& e : v) {
      require(e.is_number_integer(), ErrorCode::ConfigError, where + " entries must be integers");
      map.push_back(e.get<int>());
    }
    return map;
  }
  require(v.is_string(), ErrorCode::ConfigError, where + " must be a string or an integer array");
  const auto name = v.get<std::string>();
  if (name == "sign") return sign_label_map(s, label_dim);
  if (name == "xor") return xor_label_map(s, 1, 2);
  if (name == "enumeration") return enumeration_label_map(s);
  fail(ErrorCode::ConfigError, where + ": unknown label map \"" + name + "\"");
}

ExampleConfig parse_example(const Json& j, const std::filesystem::path& base_dir) {
  Fields f(j, "example");
  ExampleConfig ex;
  std::string type = "example1";
  f.read("type", type);
  ex.kind = parse_kind(type);
  switch (ex.kind) {
    case ExampleKind::Example1:
    case ExampleKind::Example2: {
      f.read("d", ex.ex1.d);
      f.read("s", ex.ex1.s);
      f.read("tau_grid", ex.ex1.tau_grid);
      f.read("label_dim", ex.ex1.label_dim);
      f.read("size_guard", ex.ex1.size_guard);
      if (ex.kind == ExampleKind::Example2) {
        f.read("m", ex.m);
        const Json* map = f.find("label_map");
        ex.label_map = map ? parse_label_map(*map, f.where("label_map"), ex.ex1.s, ex.ex1.label_dim)
                           : xor_label_map(ex.ex1.s, 1, std::min(2, ex.ex1.s));
      }
      break;
    }
    case ExampleKind::Example3:
      f.read("r", ex.ex3_r);
      f.read("subclusters_per_set", ex.ex3_subclusters);
      f.read("points_per_subcluster", ex.ex3_points);
      f.read("rho", ex.ex3_rho);
      f.read("gamma", ex.ex3_gamma);
      f.read("m", ex.ex3_m);
      f.read("labels", ex.ex3_labels);
      break;
    case ExampleKind::Example4: {
      f.read("d", ex.ex4.d);
      f.read("s", ex.ex4.s);
      f.read("gamma", ex.ex4.gamma);
      f.read("tau_grid", ex.ex4.tau_grid);
      f.read("m", ex.ex4.m);
      f.read("size_guard", ex.ex4.size_guard);
      if (const Json* map = f.find("label_map"))
        ex.ex4.label_map = parse_label_map(*map, f.where("label_map"), ex.ex4.s, 1);
      break;
    }
    case ExampleKind::GraphFile: {
      std::string path;
      f.read("path", path);
      require(!path.empty(), ErrorCode::ConfigError, "example.path is required for graph_file");
      ex.graph_file = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base_dir / path;
      require(std::filesystem::exists(ex.graph_file), ErrorCode::ConfigError,
              "example.path: no such file " + ex.graph_file.string());
      break;
    }
    case ExampleKind::TwoLevel:
      f.read("m", ex.two_level.m);
      f.read("points_per_arm", ex.two_level.points_per_arm);
      f.read("cross_mass", ex.two_level.cross_mass);
      f.read("cross_edges", ex.two_level.cross_edges);
      f.read("seed", ex.seed);
      break;
    case ExampleKind::Components:
      f.read("sizes", ex.component_sizes);
      f.read("dim", ex.component_dim);
      f.read("extra_edge_prob", ex.extra_edge_prob);
      f.read("seed", ex.seed);
      break;
  }
  f.check_done();
  return ex;
}

TrainConfig parse_train(const Json& j, std::size_t& n_pre) {
  Fields f(j, "train");
  TrainConfig t;
  f.read("step_size", t.step_size);
  f.read("step_growth", t.step_growth);
  f.read("adaptive", t.adaptive);
  f.read("max_iters", t.max_iters);
  f.read("seed", t.seed);
  f.read("init_scale", t.init_scale);
  f.read("tol", t.tol);
  f.read("patience", t.patience);
  f.read("momentum", t.momentum);
  f.read("restarts", t.restarts);
  f.read("precondition", t.precondition);
  f.read("jobs", t.jobs);
  f.read("n_pre", n_pre);
  std::string reg = "mean";
  f.read("empirical_reg", reg);
  require(reg == "mean" || reg == "sum", ErrorCode::ConfigError, "train.empirical_reg must be \"mean\" or \"sum\"");
  t.empirical_reg = reg == "sum" ? RegNormalization::Sum : RegNormalization::Mean;
  f.check_done();
  try {
    t.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, "train: " + e.detail());
  }
  return t;
}

ClassTag parse_tag_at(const std::string& name, const std::string& where) {
  try {
    return parse_class_tag(name);
  } catch (const Error&) {
    fail(ErrorCode::ConfigError, where + ": unknown class \"" + name + "\"");
  }
}

}  // namespace

std::string_view to_string(ExampleKind kind) {
  switch (kind) {
    case ExampleKind::Example1: return "example1";
    case ExampleKind::Example2: return "example2";
    case ExampleKind::Example3: return "example3";
    case ExampleKind::Example4: return "example4";
    case ExampleKind::GraphFile: return "graph_file";
    case ExampleKind::TwoLevel: return "two_level";
    case ExampleKind::Components: return "components";
  }
  return "?";
}

ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir) {
  Fields f(j, "config");
  ExperimentConfig cfg;
  f.read("version", cfg.version);
  require(cfg.version == kConfigVersion, ErrorCode::ConfigError,
          "config.version " + std::to_string(cfg.version) + " is not supported");
  if (const Json* ex = f.find("example")) cfg.example = parse_example(*ex, base_dir);
  if (const Json* c = f.find("class")) {
    Fields cf(*c, "class");
    std::string type = "linear";
    cf.read("type", type);
    cfg.cls.tag = parse_tag_at(type, "class.type");
    if (const Json* k = cf.find("k")) {
      require(k->is_number_integer() && k->get<Index>() >= 1, ErrorCode::ConfigError,
              "class.k must be a positive integer");
      cfg.cls.k = k->get<Index>();
    }
    cf.read("s", cfg.cls.s);
    if (const Json* kappa = cf.find("kappa")) cfg.cls.kappa = kappa->get<double>();
    cf.check_done();
    cfg.class_given = true;
  }
  f.read("lambda", cfg.lambda);
  require(cfg.lambda > 0.0, ErrorCode::ConfigError, "config.lambda must be positive");
  f.read("lambda_grid", cfg.lambda_grid);
  f.read("r_list", cfg.r_list);
  if (const Json* bc = f.find("br_classes")) {
    require(bc->is_array(), ErrorCode::ConfigError, "config.br_classes must be an array");
    for (const auto& name : *bc) cfg.br_classes.push_back(parse_tag_at(name.get<std::string>(), "config.br_classes"));
  }
  f.read("seeds_per_cell", cfg.seeds_per_cell);
  require(cfg.seeds_per_cell >= 1, ErrorCode::ConfigError, "config.seeds_per_cell must be positive");
  if (const Json* t = f.find("train")) cfg.train = parse_train(*t, cfg.n_pre);
  f.read("count", cfg.count);
  require(cfg.count >= 1, ErrorCode::ConfigError, "config.count must be positive");
  std::string out;
  f.read("output_dir", out);
  cfg.output_dir = out;
  f.check_done();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  ExperimentConfig cfg = parse_config(parse_json(text, path.string()), path.parent_path());
  cfg.source_text = text;
  return cfg;
}

BuiltExample build_example(const ExampleConfig& config) {
  BuiltExample out{LabeledGraph{}, config, std::nullopt};
  switch (config.kind) {
    case ExampleKind::Example1: out.data = example1_graph(config.ex1); break;
    case ExampleKind::Example2: out.data = example2_labels(config.ex1, config.label_map, config.m); break;
    case ExampleKind::Example3: {
      std::vector<int> labels = config.ex3_labels;
      if (labels.empty())
        for (int i = 0; i < config.ex3_r; ++i) labels.push_back(i % config.ex3_m);
      out.ex3 = example3_lattice(config.ex3_r, config.ex3_subclusters, config.ex3_points, config.ex3_rho,
                                 config.ex3_gamma, config.ex3_m, labels);
      out.data = example3_graph(*out.ex3);
      break;
    }
    case ExampleKind::Example4: out.data = example4_graph(config.ex4); break;
    case ExampleKind::GraphFile:
      out.data = labeled_graph_from_json(parse_json(read_text_file(config.graph_file), config.graph_file.string()));
      break;
    case ExampleKind::TwoLevel: out.data = two_level_graph(config.two_level, config.seed); break;
    case ExampleKind::Components:
      out.data = random_component_graph(config.component_sizes, config.component_dim, config.extra_edge_prob,
                                        config.seed);
      break;
  }
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sclab
