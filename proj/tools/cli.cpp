#include "cli.hpp"

#include "gllrss/error.hpp"
#include "gllrss/experiment.hpp"
#include "gllrss/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace gllrss::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config;
  std::uint64_t seed = 1;
  int trials = 20;
  double alpha = 0.0, beta = 0.0, gamma = 0.0, rho = 0.0;
  double tau_edge = kDefaultEdgeThreshold;
  std::string transition;
  std::string out;
  int threads = 1;
  std::string graph;
  Eigen::Index n = 0, m = 0, rank = 0;
  double noise = 0.0;

  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
}

void add_solver_flags(CLI::App* app, CommonFlags& f) {
  f.opts["alpha"] = app->add_option("--alpha", f.alpha, "graph smoothness weight");
  f.opts["beta"] = app->add_option("--beta", f.beta, "Frobenius penalty on L");
  f.opts["gamma"] = app->add_option("--gamma", f.gamma, "nuclear norm weight (0 disables it)");
  f.opts["rho"] = app->add_option("--rho", f.rho, "ADMM penalty");
  f.opts["config"] = app->add_option("--config", f.config, "JSON experiment config");
  f.opts["tau-edge"] = app->add_option("--tau-edge", f.tau_edge, "edge threshold on -L(i,j)");
  f.opts["out"] = app->add_option("--out", f.out, "output directory");
}

void add_experiment_flags(CLI::App* app, CommonFlags& f) {
  add_solver_flags(app, f);
  f.opts["seed"] = app->add_option("--seed", f.seed, "base seed");
  f.opts["trials"] = app->add_option("--trials", f.trials, "Monte Carlo trials");
  f.opts["threads"] = app->add_option("--threads", f.threads, "worker threads");
  f.opts["transition"] = app->add_option(
      "--transition", f.transition,
      "identity | gaussian | acf | file:<path> (diagonal coefficients)");
  f.opts["graph"] =
      app->add_option("--graph", f.graph, "rgg | grid")->check(CLI::IsMember({"rgg", "grid"}));
  f.opts["n"] = app->add_option("--nodes", f.n, "number of vertices");
  f.opts["m"] = app->add_option("--signals", f.m, "number of time instants");
  f.opts["rank"] = app->add_option("--rank", f.rank, "low-rank dimension of the innovation");
  f.opts["noise"] = app->add_option("--noise", f.noise, "noise standard deviation");
}

void apply_solver_flags(SolverConfig& s, const CommonFlags& f) {
  if (f.given("alpha")) s.alpha = f.alpha;
  if (f.given("beta")) s.beta = f.beta;
  if (f.given("gamma")) s.gamma = f.gamma;
  if (f.given("rho")) s.rho = f.rho;
}

Vector load_coefficients(const std::string& path) {
  const Matrix m = load_matrix(path);
  if (m.rows() != 1 && m.cols() != 1) {
    throw DataError(path + ": expected a single row or column of coefficients");
  }
  return Eigen::Map<const Vector>(m.data(), m.size());
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = config_from_json(read_json_file(f.config));
  apply_solver_flags(cfg.solver, f);
  if (f.given("seed")) cfg.seed = f.seed;
  if (f.given("trials")) cfg.trials = f.trials;
  if (f.given("threads")) cfg.threads = f.threads;
  if (f.given("tau-edge")) cfg.tau_edge = f.tau_edge;
  if (f.given("out")) cfg.outputs = f.out;
  if (f.given("graph")) cfg.graph.kind = f.graph == "grid" ? GraphKind::kGrid : GraphKind::kRgg;
  if (f.given("n")) cfg.graph.n = f.n;
  if (f.given("m")) cfg.signal.m = f.m;
  if (f.given("rank")) cfg.signal.rank = f.rank;
  if (f.given("noise")) cfg.signal.sigma_n = f.noise;
  if (f.given("transition")) {
    const std::string& t = f.transition;
    if (t == "identity") {
      cfg.signal.transition = IdentityTransition{};
      cfg.signal.solver_transition = SolverTransition::kTrue;
    } else if (t == "gaussian") {
      cfg.signal.transition = GaussianTransition{};
    } else if (t == "acf") {
      cfg.signal.solver_transition = SolverTransition::kAcf;
    } else if (t.rfind("file:", 0) == 0) {
      cfg.signal.transition = ExplicitTransition{load_coefficients(t.substr(5))};
    } else {
      throw ValidationError("--transition must be identity, gaussian, acf or file:<path>");
    }
  }
  cfg.validate();
  return cfg;
}

void print_aggregate(std::ostream& out, const std::map<std::string, MetricSummary>& agg) {
  out << "metric,mean,std,count\n";
  for (const auto& [name, s] : agg) {
    out << name << ',' << format_double(s.mean) << ',' << format_double(s.stddev) << ','
        << s.count << '\n';
  }
}

// --- subcommands ------------------------------------------------------------

int cmd_synth(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = build_config(f);
  const RunReport rep = run_synthetic(cfg);
  for (const auto& t : rep.trials) {
    if (!t.ok) err << "trial " << t.index << " (seed " << t.seed << ") failed: " << t.error << '\n';
  }
  print_aggregate(out, rep.aggregate);
  if (!cfg.outputs.empty()) out << "report: " << (fs::path(cfg.outputs) / "report.json").string() << '\n';
  if (rep.failed == rep.trials.size()) {
    err << "all trials failed\n";
    return kSolver;
  }
  return kOk;
}

struct GridFlags {
  std::vector<double> alpha, beta, gamma;
  std::vector<Eigen::Index> rank, m;
  bool full_default = false;
};

int cmd_sweep(const CommonFlags& f, const GridFlags& g, std::ostream& out) {
  ExperimentConfig cfg = build_config(f);
  if (g.full_default || !cfg.sweep) cfg.sweep = default_sweep();
  if (!g.alpha.empty()) cfg.sweep->alpha = g.alpha;
  if (!g.beta.empty()) cfg.sweep->beta = g.beta;
  if (!g.gamma.empty()) cfg.sweep->gamma = g.gamma;
  if (!g.rank.empty()) cfg.sweep->rank = g.rank;
  if (!g.m.empty()) cfg.sweep->m = g.m;
  cfg.validate();

  const SweepResult res = grid_search(cfg);
  const SweepRow& b = res.best_row();
  out << "best alpha=" << format_double(b.alpha) << " beta=" << format_double(b.beta)
      << " gamma=" << format_double(b.gamma) << " rank=" << b.rank << " m=" << b.m
      << " f_measure=" << format_double(b.metrics.at("f_measure").mean)
      << " gse=" << format_double(b.metrics.at("gse").mean) << '\n';
  std::size_t excluded = 0;
  for (const auto& r : res.rows) excluded += r.excluded ? 1 : 0;
  out << res.rows.size() << " grid points, " << excluded << " excluded\n";
  if (cfg.outputs.empty()) out << sweep_table_csv(res);
  return kOk;
}

int cmd_learn(const CommonFlags& f, const std::string& y_path, const std::string& from_sweep,
              std::ostream& out) {
  if (f.out.empty()) throw ValidationError("learn requires --out");
  const auto start = std::chrono::steady_clock::now();

  SolverConfig solver;
  std::string source = "defaults";
  if (!f.config.empty()) {
    const json j = read_json_file(f.config);
    if (j.contains("solver")) {
      update_from_json(solver, j["solver"]);
      source = "config";
    }
  }
  if (!from_sweep.empty()) {
    const json j = read_json_file(from_sweep);
    try {
      const json& best = j.at("best");
      solver.alpha = best.at("alpha").get<double>();
      solver.beta = best.at("beta").get<double>();
      solver.gamma = best.at("gamma").get<double>();
    } catch (const json::exception& e) {
      throw DataError(from_sweep + ": not a sweep report: " + e.what());
    }
    source = "sweep";
  }
  if (f.given("alpha") || f.given("beta") || f.given("gamma") || f.given("rho")) source = "flags";
  apply_solver_flags(solver, f);
  solver.validate();

  const SignalMatrix y = load_matrix(y_path);
  if (y.rows() < 2 || y.cols() < 2) throw DataError(y_path + ": need at least 2 rows and 2 columns");

  const std::string mode = f.transition.empty() ? "identity" : f.transition;
  json transition;
  std::optional<TransitionMatrix> r;
  if (mode == "identity") {
    r = TransitionMatrix::identity(y.rows());
    transition = {{"mode", "identity"}};
  } else if (mode == "acf") {
    r = estimate_transition_acf(y);
    const Vector& c = r->coeffs();
    transition = {{"mode", "acf"}, {"coeffs", std::vector<double>(c.data(), c.data() + c.size())}};
  } else if (mode.rfind("file:", 0) == 0) {
    const std::string path = mode.substr(5);
    const Matrix m = load_matrix(path);
    if (m.rows() == y.rows() && m.cols() == y.rows() && y.rows() > 1) {
      r = TransitionMatrix::symmetric(m);
      transition = {{"mode", "file"}, {"path", path}, {"kind", "symmetric"}};
    } else {
      Vector c = load_coefficients(path);
      if (c.size() != y.rows()) throw DataError(path + ": coefficient count does not match rows of Y");
      r = TransitionMatrix::diagonal(c);
      transition = {{"mode", "file"},
                    {"path", path},
                    {"kind", "diagonal"},
                    {"coeffs", std::vector<double>(c.data(), c.data() + c.size())}};
    }
  } else {
    throw ValidationError("--transition must be identity, acf or file:<path>");
  }

  const SolverResult res = gl_lrss(y, *r, solver);
  const CglReport check = validate_cgl(res.l_hat.matrix());

  const fs::path dir(f.out);
  fs::create_directories(dir);
  save_laplacian(res.l_hat, dir / "L_hat.csv", f.tau_edge);
  save_matrix(res.x_hat, dir / "X_hat.csv");
  json report = {
      {"version", kVersion},
      {"input", y_path},
      {"shape", {y.rows(), y.cols()}},
      {"hyperparameters",
       {{"alpha", solver.alpha},
        {"beta", solver.beta},
        {"gamma", solver.gamma},
        {"rho", solver.rho},
        {"source", source},
        {"nuclear_norm_ablation", solver.gamma == 0.0}}},
      {"solver", to_json(solver)},
      {"transition", transition},
      {"tau_edge", f.tau_edge},
      {"edges", edges_from_laplacian(res.l_hat, f.tau_edge).count()},
      {"objective_trace", res.objective_trace},
      {"outer_iterations", res.outer_iterations_used},
      {"converged", res.converged},
      {"cgl_valid", check.ok()},
      {"cgl_check", check.describe()},
      {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  save_json(report, dir / "report.json");
  out << "wrote " << (dir / "L_hat.csv").string() << ", " << (dir / "X_hat.csv").string() << ", "
      << (dir / "report.json").string() << '\n';
  if (solver.gamma == 0.0) out << "nuclear norm disabled (gamma = 0)\n";
  return kOk;
}

CglMatrix load_laplacian(const std::string& path) {
  const Matrix m = load_matrix(path);
  try {
    return CglMatrix::from_matrix(m);
  } catch (const ValidationError& e) {
    throw DataError(path + ": " + e.what());
  }
}

struct MetricsFlags {
  std::string l_hat, l_true, x_hat, x_true, out, nmi = "mean";
  double tau_edge = kDefaultEdgeThreshold;
};

int cmd_metrics(const MetricsFlags& f, std::ostream& out) {
  const CglMatrix lh = load_laplacian(f.l_hat);
  const CglMatrix lt = load_laplacian(f.l_true);
  if (lh.size() != lt.size()) throw DataError("Laplacians have different sizes");
  std::optional<SignalMatrix> xh, xt;
  if (!f.x_hat.empty() != !f.x_true.empty()) {
    throw ValidationError("--x-hat and --x-true must be given together");
  }
  if (!f.x_hat.empty()) {
    xh = load_matrix(f.x_hat);
    xt = load_matrix(f.x_true);
    if (xh->rows() != xt->rows() || xh->cols() != xt->cols()) {
      throw DataError("signal matrices have different shapes");
    }
  }
  const NmiNormalization norm = f.nmi == "sqrt" ? NmiNormalization::kSqrtProduct : NmiNormalization::kMean;
  const MetricsReport rep = score(lh, lt, f.tau_edge, xh ? &*xh : nullptr, xt ? &*xt : nullptr, norm);
  const json j = to_json(rep);
  out << j.dump(2) << '\n';
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    save_json(j, fs::path(f.out) / "metrics.json");
  }
  return kOk;
}

int cmd_gen(const CommonFlags& f, std::ostream& out) {
  if (f.out.empty()) throw ValidationError("gen requires --out");
  const ExperimentConfig cfg = build_config(f);
  const std::uint64_t seed = trial_seed(cfg.seed, 0);
  const SyntheticInstance inst = generate_instance(cfg, seed);

  const fs::path dir(f.out);
  fs::create_directories(dir);
  save_laplacian(inst.l_true, dir / "L_true.csv", cfg.tau_edge);
  save_matrix(inst.x, dir / "X.csv");
  save_matrix(inst.y, dir / "Y.csv");
  save_matrix(inst.r_true.is_diagonal() ? Matrix(inst.r_true.coeffs()) : inst.r_true.dense(),
              dir / "R.csv");
  if (inst.graph.coords()) save_matrix(*inst.graph.coords(), dir / "coords.csv");
  save_json({{"version", kVersion}, {"trial_seed", seed}, {"config", to_json(cfg)}},
            dir / "manifest.json");
  out << "wrote dataset (" << inst.y.rows() << " x " << inst.y.cols() << ") to " << dir.string()
      << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint graph Laplacian and low-rank signal learning"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonFlags synth_f, sweep_f, learn_f, gen_f;
  GridFlags grid;
  std::string y_path, from_sweep;
  MetricsFlags metrics_f;

  CLI::App* synth = app.add_subcommand("synth", "Monte Carlo run on synthetic data");
  add_experiment_flags(synth, synth_f);

  CLI::App* sweep = app.add_subcommand("sweep", "grid search over hyperparameters");
  add_experiment_flags(sweep, sweep_f);
  sweep->add_option("--grid-alpha", grid.alpha, "alpha values");
  sweep->add_option("--grid-beta", grid.beta, "beta values");
  sweep->add_option("--grid-gamma", grid.gamma, "gamma values");
  sweep->add_option("--grid-rank", grid.rank, "rank values");
  sweep->add_option("--grid-m", grid.m, "signal counts");
  sweep->add_flag("--default-grid", grid.full_default, "start from the full default grid");

  CLI::App* learn = app.add_subcommand("learn", "learn L and X from a signal matrix");
  learn->add_option("signals", y_path, "CSV matrix Y (rows = vertices)")->required();
  add_solver_flags(learn, learn_f);
  learn_f.opts["transition"] =
      learn->add_option("--transition", learn_f.transition, "identity | acf | file:<path>");
  learn->add_option("--from-sweep", from_sweep, "take alpha, beta, gamma from a sweep.json");

  CLI::App* metrics = app.add_subcommand("metrics", "score a learned Laplacian");
  metrics->add_option("l_hat", metrics_f.l_hat, "learned Laplacian CSV")->required();
  metrics->add_option("l_true", metrics_f.l_true, "reference Laplacian CSV")->required();
  metrics->add_option("--x-hat", metrics_f.x_hat, "estimated signal CSV");
  metrics->add_option("--x-true", metrics_f.x_true, "reference signal CSV");
  metrics->add_option("--tau-edge", metrics_f.tau_edge, "edge threshold on -L(i,j)");
  metrics->add_option("--nmi", metrics_f.nmi, "mean | sqrt")->check(CLI::IsMember({"mean", "sqrt"}));
  metrics->add_option("--out", metrics_f.out, "output directory");

  CLI::App* gen = app.add_subcommand("gen", "write one synthetic dataset");
  add_experiment_flags(gen, gen_f);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_f, out, err);
    if (sweep->parsed()) return cmd_sweep(sweep_f, grid, out);
    if (learn->parsed()) return cmd_learn(learn_f, y_path, from_sweep, out);
    if (metrics->parsed()) return cmd_metrics(metrics_f, out);
    if (gen->parsed()) return cmd_gen(gen_f, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const json::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolver;
  }
  return kUsage;
}

}  // namespace gllrss::cli
