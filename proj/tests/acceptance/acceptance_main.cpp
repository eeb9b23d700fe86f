// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "sclab/config.hpp"
#include "sclab/probe.hpp"
#include "sclab/septest.hpp"
#include "sclab/spectral.hpp"
#include "sclab/synthdata.hpp"
#include "sclab/verify.hpp"
#include "stiefel.hpp"

using namespace sclab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      note << " [violated: " << what << "]";
    }
  }
};

ExperimentConfig example1_config(int d, int s, double lambda = 1.0) {
  ExperimentConfig cfg;
  ExampleConfig ex;
  ex.kind = ExampleKind::Example1;
  ex.ex1.d = d;
  ex.ex1.s = s;
  ex.ex1.tau_grid = {0.5, 1.0};
  cfg.example = ex;
  cfg.lambda = lambda;
  return cfg;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Example 1 upper bound: construction and trained model both probe exactly.
void criterion1(Outcome& o) {
  ExperimentConfig cfg = example1_config(6, 2);
  cfg.cls.tag = ClassTag::Linear;
  cfg.cls.k = 2;
  cfg.class_given = true;
  const Verdict v = verify_theorem("thm52", cfg);
  const double built = v.extra.at("construction_error").get<double>();
  const double trained = v.extra.at("trained_error").get<double>();
  o.expect(built <= 1e-6, "construction error <= 1e-6");
  o.expect(trained <= 1e-6, "trained error <= 1e-6");
  o.expect(v.extra.at("loss").get<double>() <= 1e-10, "construction loss 0");
  o.note << "construction error " << sci(built) << ", trained error " << sci(trained);
}

void criterion2(Outcome& o) {
  ExperimentConfig cfg = example1_config(6, 2);
  cfg.cls.k = Index{1} << 5;
  const Verdict v = verify_theorem("thm52-lower", cfg);
  const double loss = v.extra.at("loss").get<double>();
  o.expect(loss <= 1e-10, "L = 0");
  o.expect(v.measured >= 1.0 - 1e-8, "best-head error >= 1 - 1e-8");
  o.note << "k=32 loss " << sci(loss) << ", best-head error " << v.measured;
}

void criterion3(Outcome& o) {
  std::mt19937_64 rng(2024);
  int graphs = 0, functions = 0, failures = 0;
  for (; graphs < 250; ++graphs) {
    const Index n = std::uniform_int_distribution<Index>(2, 40)(rng);
    const Index blocks = std::uniform_int_distribution<Index>(2, std::max<Index>(2, n / 2))(rng);
    const auto graph = testutil::random_graph(rng, n, blocks, 3, 0.3);
    const Partition comps = connected_components(graph);
    for (int t = 0; t < 4; ++t, ++functions) {
      const Matrix level = testutil::normal_matrix(rng, comps.m, 1);
      Vector g(n);
      for (Index i = 0; i < n; ++i) g(i) = level(comps.assignment[static_cast<std::size_t>(i)], 0);
      if (pair_discrepancy(graph, Matrix(g)) == 0.0 && !is_eigenfunction(graph, make_function(graph, g), 0.0, 1e-10))
        ++failures;
      if (pair_discrepancy(graph, Matrix(g)) != 0.0) ++failures;
    }
  }
  o.expect(failures == 0, "zero failures");
  o.note << graphs << " graphs, " << functions << " functions, " << failures << " failures";
}

void criterion4(Outcome& o) {
  int instances = 0, violations = 0;
  double worst_ratio = 0.0;
  for (int m : {2, 3, 4})
    for (std::uint64_t seed = 0; seed < 7; ++seed, ++instances) {
      ExperimentConfig cfg;
      ExampleConfig ex;
      ex.kind = ExampleKind::TwoLevel;
      ex.two_level.m = m;
      ex.two_level.points_per_arm = 3 + static_cast<int>(seed % 2);
      ex.two_level.cross_mass = 0.005 + 0.005 * static_cast<double>(seed % 4);
      ex.two_level.cross_edges = 2 + static_cast<int>(seed);
      ex.seed = seed;
      cfg.example = ex;
      cfg.lambda = 2.0;
      const Verdict v = verify_theorem("thm31", cfg);
      if (!v.pass) ++violations;
      if (v.bound > 0.0) worst_ratio = std::max(worst_ratio, v.measured / v.bound);

      // the inner arms must not be implementable by the linear class
      const BuiltExample built = build_example(ex);
      const auto& g = built.data.graph;
      Matrix arms = Matrix::Zero(g.size(), 2 * m);
      for (Index i = 0; i < g.size(); ++i) {
        const int c = built.data.groups[static_cast<std::size_t>(i)];
        arms(i, 2 * c + (g.coords()(i, m) != 0.0 ? 0 : 1)) = 1.0;
      }
      const double residual = class_fit_residual(g, class_for_graph(ClassTag::Linear, g, 2 * m), arms);
      if (residual <= 1e-8) {
        ++violations;
        o.note << " [arms implementable at m=" << m << " seed=" << seed << "]";
      }
    }
  o.expect(violations == 0, "zero violations");
  o.note << instances << " instances, " << violations << " violations, max measured/bound " << sci(worst_ratio);
}

void criterion5(Outcome& o) {
  int instances = 0, violations = 0;
  for (int s : {1, 2, 3})
    for (double lambda : {0.5, 1.0, 10.0}) {
      ++instances;
      const Verdict v = verify_theorem("thm42", example1_config(s + 2, s, lambda));
      const auto& q = v.extra;
      const bool zero = q.at("phi").get<double>() <= 1e-12 && q.at("epsilon").get<double>() <= 1e-12 &&
                        q.at("zeta").get<double>() <= 1e-12;
      if (!v.pass || (zero && v.measured > 1e-8)) {
        ++violations;
        o.note << " [s=" << s << " lambda=" << lambda << " measured " << sci(v.measured) << " bound "
               << sci(v.bound) << (v.flagged ? " flagged" : "") << "]";
      }
    }
  o.expect(violations == 0, "zero violations");
  o.note << instances << " instances, " << violations << " violations";
}

void criterion6(Outcome& o) {
  ExperimentConfig cfg;
  ExampleConfig ex;
  ex.kind = ExampleKind::Example2;
  ex.ex1.d = 5;
  ex.ex1.s = 2;
  ex.label_map = xor_label_map(2, 1, 2);
  cfg.example = ex;
  const Verdict up = verify_theorem("thm54", cfg);
  o.expect(up.extra.at("k").get<int>() == 4, "k = 4");
  o.expect(up.extra.at("loss").get<double>() <= 1e-10, "L = 0");
  o.expect(up.measured <= 1e-8, "probe error <= 1e-8");
  cfg.cls.k = Index{1} << 3;
  const Verdict low = verify_theorem("thm54-lower", cfg);
  o.expect(low.extra.at("loss").get<double>() <= 1e-10, "adversarial L = 0");
  o.expect(low.measured >= 0.5 - 1e-6, "best-head error >= 1/2");
  o.note << "construction (" << up.extra.at("construction_path").get<std::string>() << ") error "
         << sci(up.measured) << "; k=8 adversarial error " << low.measured;
}

void criterion7(Outcome& o) {
  ExperimentConfig c3;
  ExampleConfig e3;
  e3.kind = ExampleKind::Example3;
  e3.ex3_r = 3;
  e3.ex3_m = 2;
  e3.ex3_labels = {0, 1, 0};
  e3.ex3_rho = 0.1;
  e3.ex3_gamma = 1.0;
  c3.example = e3;
  const Verdict v56 = verify_theorem("thm56", c3);
  const double lip = v56.extra.at("lipschitz").get<double>();
  const double kappa = v56.extra.at("kappa").get<double>();
  o.expect(lip <= kappa * (1.0 + 1e-12), "Lipschitz <= sqrt(2r)/gamma");
  o.expect(v56.pass, "thm56 bound");

  ExperimentConfig c4;
  ExampleConfig e4;
  e4.kind = ExampleKind::Example4;
  e4.ex4.d = 4;
  e4.ex4.s = 1;
  e4.ex4.gamma = 2.0;
  c4.example = e4;
  const Verdict v58 = verify_theorem("thm58", c4);
  o.expect(v58.extra.at("loss").get<double>() <= 1e-10, "conv construction L = 0");
  o.expect(v58.measured <= 1e-8, "conv probe error <= 1e-8");
  const Verdict low = verify_theorem("thm58-lower", c4);
  o.expect(low.extra.at("loss").get<double>() <= 1e-10, "ReLU adversarial L = 0");
  o.expect(low.measured >= 0.5 - 1e-6, "ReLU adversarial error >= 1/2");
  o.note << "Lipschitz " << sci(lip) << " <= " << sci(kappa) << ", thm56 error " << sci(v56.measured) << " <= "
         << sci(v56.bound) << "; conv error " << sci(v58.measured) << "; ReLU adversarial error " << low.measured;
}

void criterion8(Outcome& o) {
  // formula pre-validation against brute-force constrained minimization
  std::mt19937_64 rng(8);
  double worst_brute = 0.0;
  int small = 0;
  for (int t = 0; t < 12; ++t) {
    const Index n = 2 + t % 5;
    const auto graph = testutil::random_graph(rng, n, 1 + t % 2, 2, 0.5);
    for (Index r = 1; r <= n; ++r, ++small)
      worst_brute = std::max(worst_brute, std::abs(stiefel::min_discrepancy(graph, r, 500 + t, 4, 5000) -
                                                   br_oracle_tabular(graph, r)));
  }
  o.expect(worst_brute <= 1e-6, "brute force agrees within 1e-6");

  BrOptions opt;
  opt.lambda_grid = {1.0, 10.0};
  opt.seeds_per_cell = 1;
  opt.train.momentum = 0.9;
  opt.train.max_iters = 20000;
  double worst = 0.0;
  int graphs = 0;
  for (; graphs < 10; ++graphs) {
    const Index n = 20 + 8 * graphs;
    const auto graph = testutil::random_graph(rng, n, 1 + graphs % 3, 3, 0.15);
    for (Index r : {2, 5, 10}) {
      const BrRow row = estimate_br(graph, class_for_graph(ClassTag::Tabular, graph, 1), r, opt);
      const double gap = std::abs(*row.b_r - *row.oracle);
      worst = std::max(worst, gap);
      if (gap > 1e-3) o.note << " [n=" << n << " r=" << r << " gap " << sci(gap) << "]";
    }
  }
  o.expect(worst <= 1e-3, "trained b_r within 1e-3 of the oracle");
  o.note << small << " small brute-force cases (max gap " << sci(worst_brute) << "), " << graphs
         << " graphs x r in {2,5,10} (max gap " << sci(worst) << ")";
}

void criterion9(Outcome& o) {
  const auto data = random_component_graph(std::vector<int>(10, 5), 24, 0.4, 99);
  const auto& graph = data.graph;
  BrOptions opt;
  opt.lambda_grid = kDefaultLambdaGrid;
  opt.seeds_per_cell = 1;
  opt.train.momentum = 0.9;
  opt.train.max_iters = 5000;
  const auto tab = class_for_graph(ClassTag::Tabular, graph, 1);
  const auto lin = class_for_graph(ClassTag::Linear, graph, 1);
  const auto report = br_table(graph, {tab, lin}, {10, 20}, opt);
  const auto& b10 = report.rows[0];
  const auto& b20 = report.rows[1];
  o.expect(b10.b_r && b20.b_r, "tabular rows produced values");
  if (!b10.b_r || !b20.b_r) return;
  o.expect(*b10.b_r <= 0.01, "b_10 <= 0.01");
  o.expect(*b20.b_r >= 10.0 * *b10.b_r + 0.01, "b_20 >= 10 b_10 + 0.01");
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& t = report.rows[i];
    const auto& l = report.rows[i + 2];
    if (l.b_r) o.expect(*t.b_r <= *l.b_r + 1e-6, "tabular <= linear + 1e-6 at r=" + std::to_string(t.r));
    // per-lambda comparison of the best whitened cell in each class
    int compared = 0;
    for (double lambda : opt.lambda_grid) {
      auto best = [&](const BrRow& row) {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& c : row.cells)
          if (c.whiten_ok && c.lambda == lambda) v = std::min(v, c.b_value);
        return v;
      };
      const double bt = best(t), bl = best(l);
      if (!std::isfinite(bl)) continue;
      ++compared;
      o.expect(bt <= bl + 1e-6, "tabular <= linear + 1e-6 at r=" + std::to_string(t.r) + " lambda=" + sci(lambda));
    }
    o.note << "r=" << t.r << " lambda cells compared " << compared << ", ";
    o.note << "r=" << t.r << ": tabular " << sci(*t.b_r) << " (oracle " << sci(*t.oracle) << "), linear "
           << (l.b_r ? sci(*l.b_r) : "failed") << "; ";
  }
}

void criterion10(Outcome& o) {
  std::mt19937_64 rng(10);
  for (ClassTag tag : {ClassTag::Linear, ClassTag::Relu, ClassTag::Conv, ClassTag::Tabular}) {
    int checked = 0, failed = 0;
    double worst = 0.0;
    while (checked < 100) {
      const Index n = std::uniform_int_distribution<Index>(3, 10)(rng);
      const auto graph = testutil::random_graph(rng, n, 1 + checked % 3, 4);
      const Index k = std::uniform_int_distribution<Index>(1, 3)(rng);
      const auto model = RepresentationModel::random(class_for_graph(tag, graph, k, 2), 1.0, rng());
      if (gradcheck::kink_margin(model, graph) < 1e-4) continue;
      const double lambda = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
      const double err = gradcheck::relative_error(graph, model, lambda);
      worst = std::max(worst, err);
      if (!(err <= 1e-4)) ++failed;
      ++checked;
    }
    o.expect(failed == 0, std::string(to_string(tag)) + " gradient checks");
    o.note << to_string(tag) << " max rel err " << sci(worst) << "; ";
  }
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "Example 1 upper bound: construction and trained linear model probe exactly", 30, criterion1},
      {2, "Example 1 lower bound: universal zero-loss minimizer with k = 2^(d-1) fails the probe", 30, criterion2},
      {3, "zero-discrepancy functions on disconnected graphs are eigenvalue-0 eigenfunctions", 60, criterion3},
      {4, "cluster bound on two-level graphs", 300, criterion4},
      {5, "eigenspace bound with explicit constants on Example 1", 120, criterion5},
      {6, "Example 2 ReLU construction and universal lower bound", 60, criterion6},
      {7, "Lipschitz (Example 3) and convolutional (Example 4) constructions", 120, criterion7},
      {8, "trained tabular b_r equals (2/r) sum of the r smallest eigenvalues", 600, criterion8},
      {9, "b_r gap on a 10-component graph and class monotonicity", 600, criterion9},
      {10, "finite-difference gradient checks for every class", 120, criterion10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.note << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_seconds) o.expect(false, "runtime limit " + std::to_string(static_cast<int>(c.limit_seconds)) + " s");
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s -- %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.note.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
