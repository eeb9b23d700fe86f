#include "sclab/cli.hpp"

#include <algorithm>
#include <filesystem>

#include <CLI11.hpp>

#include "sclab/config.hpp"
#include "sclab/objective.hpp"
#include "sclab/probe.hpp"
#include "sclab/septest.hpp"
#include "sclab/serialize.hpp"
#include "sclab/spectral.hpp"
#include "sclab/verify.hpp"

#ifndef SCLAB_VERSION
#define SCLAB_VERSION "dev"
#endif

namespace sclab {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string theorem;
};

struct Context {
  ExperimentConfig config;
  fs::path out_dir;
  std::string command;
};

Context make_context(const Options& opt, const std::string& command) {
  Context ctx;
  ctx.command = command;
  if (!opt.config_path.empty()) ctx.config = load_config(opt.config_path);
  if (opt.seed) ctx.config.train.seed = *opt.seed;
  if (opt.jobs) {
    require(*opt.jobs >= 1, ErrorCode::ConfigError, "--jobs must be positive");
    ctx.config.train.jobs = *opt.jobs;
  }
  if (!opt.out_dir.empty())
    ctx.out_dir = opt.out_dir;
  else if (!ctx.config.output_dir.empty())
    ctx.out_dir = ctx.config.output_dir;
  return ctx;
}

BuiltExample build_or_default(const ExperimentConfig& cfg) {
  return build_example(cfg.example.value_or(ExampleConfig{}));
}

void write_output(const Context& ctx, const std::string& name, const std::string& content) {
  if (!ctx.out_dir.empty()) write_text_file(ctx.out_dir / name, content);
}

void write_manifest(const Context& ctx) {
  if (ctx.out_dir.empty()) return;
  Json m;
  m["command"] = ctx.command;
  m["version"] = SCLAB_VERSION;
  m["config_hash"] = fnv1a_hex(ctx.config.source_text);
  m["seeds"] = {{"train", ctx.config.train.seed}};
  m["jobs"] = ctx.config.train.jobs;
  if (ctx.config.example) m["example"] = std::string(to_string(ctx.config.example->kind));
  write_text_file(ctx.out_dir / "manifest.json", m.dump(2) + "\n");
}

Json spectrum_head(const PositivePairGraph& graph, Index count) {
  const SpectralDecomposition spec = eigendecompose(graph, std::min(count, graph.size()));
  return spec.eigenvalues;
}

FunctionClassSpec class_from(const ExperimentConfig& cfg, const LabeledGraph& data) {
  const Index default_k = data.num_classes > 0 ? data.num_classes : 2;
  return class_for_graph(cfg.cls.tag, data.graph, cfg.cls.k.value_or(default_k), cfg.cls.s);
}

TrainResult run_training(const ExperimentConfig& cfg, const LabeledGraph& data, const FunctionClassSpec& cls) {
  if (cfg.n_pre > 0) {
    const PairSample sample = sample_pairs(data.graph, cfg.n_pre, cfg.train.seed);
    return train(sample, data.graph, cls, cfg.lambda, cfg.train);
  }
  return train(data.graph, cls, cfg.lambda, cfg.train);
}

int cmd_graph_info(const Context& ctx, std::ostream& out) {
  const BuiltExample ex = build_or_default(ctx.config);
  const auto& graph = ex.data.graph;
  const Partition comps = connected_components(graph);
  Json j;
  j["n"] = graph.size();
  j["d"] = graph.dim();
  j["components"] = comps.m;
  j["alpha"] = cross_cluster_mass(graph, comps);
  if (ex.data.num_groups > 0) j["alpha_groups"] = cross_cluster_mass(graph, make_partition(ex.data.groups));
  j["spectrum_head"] = spectrum_head(graph, 10);
  out << j.dump(2) << '\n';
  write_output(ctx, "graph_info.json", j.dump(2) + "\n");
  write_output(ctx, "graph.json", labeled_graph_to_json(ex.data).dump() + "\n");
  write_manifest(ctx);
  return kExitOk;
}

int cmd_spectrum(const Context& ctx, std::ostream& out) {
  const BuiltExample ex = build_or_default(ctx.config);
  const SpectralDecomposition spec = eigendecompose(ex.data.graph, std::min(ctx.config.count, ex.data.graph.size()));
  out << spectrum_csv(spec);
  write_output(ctx, "spectrum.csv", spectrum_csv(spec));
  write_output(ctx, "eigenfunctions.csv", eigenfunctions_csv(spec));
  write_manifest(ctx);
  return kExitOk;
}

int cmd_train(const Context& ctx, std::ostream& out) {
  const BuiltExample ex = build_or_default(ctx.config);
  const FunctionClassSpec cls = class_from(ctx.config, ex.data);
  const TrainResult result = run_training(ctx.config, ex.data, cls);
  Json j;
  j["class"] = std::string(to_string(cls.tag));
  j["k"] = cls.k;
  j["lambda"] = ctx.config.lambda;
  j["loss"] = {{"total", result.loss.total}, {"pair_term", result.loss.pair_term}, {"reg_term", result.loss.reg_term}};
  j["iterations"] = result.iterations;
  j["seed"] = result.seed;
  out << j.dump(2) << '\n';
  write_output(ctx, "train_summary.json", j.dump(2) + "\n");
  write_output(ctx, "model.json", model_to_json(result.model).dump() + "\n");
  write_output(ctx, "loss_trace.csv", loss_trace_csv(result.trace));
  write_manifest(ctx);
  return kExitOk;
}

int cmd_probe(const Context& ctx, std::ostream& out) {
  const BuiltExample ex = build_or_default(ctx.config);
  const auto& data = ex.data;
  require(data.num_classes > 0, ErrorCode::ConfigError, "probe needs a labeled example");
  const FunctionClassSpec cls = class_from(ctx.config, data);
  const TrainResult result = run_training(ctx.config, data, cls);
  const ProbeResult probe = fit_linear_head(data.graph, forward(result.model, data.graph), data.label_onehots());

  Json row;
  row["example"] = std::string(to_string(ex.config.kind));
  row["class"] = std::string(to_string(cls.tag));
  row["k"] = cls.k;
  row["lambda"] = ctx.config.lambda;
  row["error"] = probe.error;
  row["bound"] = nullptr;
  const Partition partition = data.num_groups > 0 ? make_partition(data.groups) : connected_components(data.graph);
  const AssumptionReport rep = measure_assumptions(data.graph, partition, cls, ctx.config.train.seed);
  Json a;
  a["alpha"] = rep.alpha;
  a["beta"] = rep.beta.or_infinity();
  a["beta_certified"] = rep.beta_certified;
  a["beta_source"] = rep.beta_source;
  if (rep.beta_heuristic) a["beta_heuristic"] = *rep.beta_heuristic;
  a["p_min"] = rep.p_min;
  a["p_max"] = rep.p_max;
  a["m"] = rep.m;
  a["implementable"] = rep.implementable;
  a["implement_residual"] = rep.implement_residual;
  row["assumptions"] = a;
  // The bound only applies when its hypotheses are met on this instance.
  if (rep.implementable && cls.k == rep.m && rep.p_min > rep.alpha &&
      (rep.alpha == 0.0 || ctx.config.lambda > rep.alpha / rep.p_min) &&
      (rep.beta.is_infinite() || rep.beta.value() > 0.0))
    row["bound"] = theorem31_bound(rep);
  const Json rows = Json::array({row});
  out << rows.dump(2) << '\n';
  write_output(ctx, "probe.json", rows.dump(2) + "\n");
  write_output(ctx, "model.json", model_to_json(result.model).dump() + "\n");
  write_manifest(ctx);
  return kExitOk;
}

int cmd_verify(const Context& ctx, const std::string& theorem, std::ostream& out) {
  std::vector<std::string> ids;
  if (theorem == "all")
    ids = verify_ids();
  else
    ids.push_back(theorem);
  bool all_pass = true;
  Json verdicts = Json::array();
  for (const auto& id : ids) {
    const Verdict v = verify_theorem(id, ctx.config);
    all_pass = all_pass && v.pass;
    verdicts.push_back(verdict_to_json(v));
  }
  const Json result = ids.size() == 1 ? verdicts[0] : verdicts;
  out << result.dump(2) << '\n';
  write_output(ctx, "verdict.json", result.dump(2) + "\n");
  write_manifest(ctx);
  return all_pass ? kExitOk : kExitVerifyFailed;
}

int cmd_br(const Context& ctx, std::ostream& out) {
  const ExperimentConfig& cfg = ctx.config;
  require(!cfg.r_list.empty(), ErrorCode::ConfigError, "br needs a nonempty r_list");
  const BuiltExample ex = build_or_default(cfg);
  std::vector<FunctionClassSpec> classes;
  std::vector<ClassTag> tags = cfg.br_classes;
  if (tags.empty()) tags.push_back(cfg.cls.tag);
  for (ClassTag tag : tags) classes.push_back(class_for_graph(tag, ex.data.graph, 1, cfg.cls.s));
  BrOptions options;
  if (!cfg.lambda_grid.empty()) options.lambda_grid = cfg.lambda_grid;
  options.seeds_per_cell = cfg.seeds_per_cell;
  options.train = cfg.train;
  const SeparabilityReport report = br_table(ex.data.graph, classes, cfg.r_list, options);
  out << br_summary_csv(report);
  write_output(ctx, "br_report.csv", br_report_csv(report));
  write_output(ctx, "br_summary.csv", br_summary_csv(report));
  write_manifest(ctx);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral contrastive learning laboratory", "sclab"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "experiment config (JSON)");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "training seed override");
    cmd->add_option("--jobs", opt.jobs, "parallel jobs");
  };
  CLI::App* graph_info = app.add_subcommand("graph-info", "graph size, components and spectrum head");
  CLI::App* spectrum = app.add_subcommand("spectrum", "Laplacian eigenpairs as CSV");
  CLI::App* train_cmd = app.add_subcommand("train", "minimize the contrastive loss");
  CLI::App* probe = app.add_subcommand("probe", "train, then fit a linear probe");
  CLI::App* verify = app.add_subcommand("verify", "run a scripted theorem check");
  CLI::App* br = app.add_subcommand("br", "estimate r-way separability");
  for (CLI::App* cmd : {graph_info, spectrum, train_cmd, probe, verify, br}) add_common(cmd);
  verify->add_option("theorem", opt.theorem, "theorem id or \"all\"")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*verify) {
      const auto& ids = verify_ids();
      if (opt.theorem != "all" && std::find(ids.begin(), ids.end(), opt.theorem) == ids.end()) {
        err << "error: unknown theorem id \"" << opt.theorem << "\"\n";
        return kExitUsage;
      }
      return cmd_verify(make_context(opt, "verify " + opt.theorem), opt.theorem, out);
    }
    if (*graph_info) return cmd_graph_info(make_context(opt, "graph-info"), out);
    if (*spectrum) return cmd_spectrum(make_context(opt, "spectrum"), out);
    if (*train_cmd) return cmd_train(make_context(opt, "train"), out);
    if (*probe) return cmd_probe(make_context(opt, "probe"), out);
    if (*br) return cmd_br(make_context(opt, "br"), out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sclab
