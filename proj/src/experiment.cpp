#include "gllrss/experiment.hpp"

#include "gllrss/error.hpp"
#include "gllrss/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

namespace gllrss {

using nlohmann::json;

namespace {

const std::vector<std::string> kMetricNames = {"precision", "recall", "f_measure",
                                               "nmi",       "gse",    "lce"};

std::optional<double> metric_value(const MetricsReport& m, const std::string& name) {
  if (name == "precision") return m.precision;
  if (name == "recall") return m.recall;
  if (name == "f_measure") return m.f_measure;
  if (name == "nmi") return m.nmi;
  if (name == "gse") return m.gse;
  if (name == "lce") return m.lce;
  return std::nullopt;
}

MetricSummary summarize(const std::vector<double>& v) {
  MetricSummary s;
  s.count = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::map<std::string, MetricSummary> aggregate(const std::vector<TrialResult>& trials) {
  std::map<std::string, MetricSummary> out;
  for (const auto& name : kMetricNames) {
    std::vector<double> values;
    for (const auto& t : trials) {
      if (!t.ok) continue;
      if (auto v = metric_value(t.metrics, name)) values.push_back(*v);
    }
    out[name] = summarize(values);
  }
  std::vector<double> outer;
  for (const auto& t : trials) {
    if (t.ok) outer.push_back(static_cast<double>(t.outer_iterations));
  }
  out["outer_iterations"] = summarize(outer);
  return out;
}

const char* graph_kind_name(GraphKind k) { return k == GraphKind::kRgg ? "rgg" : "grid"; }

GraphKind graph_kind_from(const std::string& s) {
  if (s == "rgg") return GraphKind::kRgg;
  if (s == "grid") return GraphKind::kGrid;
  throw ValidationError("unknown graph kind '" + s + "' (expected rgg or grid)");
}

const char* solver_transition_name(SolverTransition t) {
  switch (t) {
    case SolverTransition::kTrue: return "true";
    case SolverTransition::kIdentity: return "identity";
    case SolverTransition::kAcf: return "acf";
  }
  return "true";
}

SolverTransition solver_transition_from(const std::string& s) {
  if (s == "true") return SolverTransition::kTrue;
  if (s == "identity") return SolverTransition::kIdentity;
  if (s == "acf") return SolverTransition::kAcf;
  throw ValidationError("unknown solver transition '" + s + "'");
}

json transition_to_json(const TransitionSpec& t) {
  if (std::holds_alternative<IdentityTransition>(t)) return {{"kind", "identity"}};
  if (const auto* g = std::get_if<GaussianTransition>(&t)) {
    return {{"kind", "gaussian"}, {"mean", g->mean}, {"stddev", g->stddev}};
  }
  const auto& e = std::get<ExplicitTransition>(t);
  return {{"kind", "explicit"},
          {"coeffs", std::vector<double>(e.coeffs.data(), e.coeffs.data() + e.coeffs.size())}};
}

TransitionSpec transition_from_json(const json& j) {
  const std::string kind = j.value("kind", "identity");
  if (kind == "identity") return IdentityTransition{};
  if (kind == "gaussian") {
    return GaussianTransition{j.value("mean", 0.5), j.value("stddev", 0.25)};
  }
  if (kind == "explicit") {
    const auto v = j.at("coeffs").get<std::vector<double>>();
    return ExplicitTransition{Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()))};
  }
  throw ValidationError("unknown transition kind '" + kind + "'");
}

json summary_to_json(const std::map<std::string, MetricSummary>& m) {
  json out = json::object();
  for (const auto& [name, s] : m) {
    out[name] = {{"mean", s.mean}, {"std", s.stddev}, {"count", s.count}};
  }
  return out;
}

template <typename T>
std::vector<T> or_default(const std::vector<T>& axis, T fallback) {
  return axis.empty() ? std::vector<T>{fallback} : axis;
}

}  // namespace

// --- config -------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (graph.n < 2) throw ValidationError("graph.n must be >= 2");
  if (graph.kind == GraphKind::kGrid && !(graph.k >= 1 && graph.k < graph.n)) {
    throw ValidationError("graph.k must satisfy 1 <= k < n");
  }
  if (signal.rank < 1 || signal.rank > graph.n) throw ValidationError("signal.rank must be in [1, n]");
  if (signal.m < 2) throw ValidationError("signal.m must be >= 2");
  if (!(signal.sigma_n >= 0.0)) throw ValidationError("signal.sigma_n must be >= 0");
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  if (!(tau_edge >= 0.0)) throw ValidationError("tau_edge must be >= 0");
  solver.validate();
  if (sweep) {
    const auto& s = *sweep;
    if (s.alpha.empty() && s.beta.empty() && s.gamma.empty() && s.rank.empty() && s.m.empty()) {
      throw ValidationError("sweep grid is empty");
    }
  }
}

std::vector<double> power_range(double base, double from, double to, double step) {
  if (!(step > 0.0)) throw ValidationError("power_range step must be positive");
  std::vector<double> out;
  const double dir = to >= from ? 1.0 : -1.0;
  const int count = static_cast<int>(std::floor(std::abs(to - from) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) out.push_back(std::pow(base, from + dir * step * i));
  return out;
}

SweepSpec default_sweep() {
  SweepSpec s;
  s.alpha = power_range(10.0, 0.0, -2.0, 0.1);
  s.beta = power_range(10.0, 2.0, 0.0, 0.1);
  s.gamma = power_range(2.0, 0.0, 5.0, 0.4);
  return s;
}

double MetricSummary::standard_error() const {
  return count > 0 ? stddev / std::sqrt(static_cast<double>(count)) : 0.0;
}

const MetricSummary& RunReport::metric(const std::string& name) const {
  auto it = aggregate.find(name);
  if (it == aggregate.end()) throw ValidationError("unknown metric " + name);
  return it->second;
}

// --- trials -------------------------------------------------------------------

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  return derive_seed(base, 1000 + static_cast<std::uint64_t>(trial));
}

SyntheticInstance generate_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng graph_rng(derive_seed(seed, 0));
  Rng transition_rng(derive_seed(seed, 1));
  Rng signal_rng(derive_seed(seed, 2));

  Graph g = cfg.graph.kind == GraphKind::kRgg
                ? generate_rgg(cfg.graph.n, cfg.graph.sigma, cfg.graph.threshold, graph_rng)
                : generate_grid(cfg.graph.n, cfg.graph.k, graph_rng);
  CglMatrix l = normalize_trace(laplacian_from_graph(g), static_cast<double>(cfg.graph.n));
  TransitionMatrix r = sample_transition(cfg.signal.transition, cfg.graph.n, transition_rng);
  GeneratedSignals s =
      generate_signals(l, r, cfg.signal.rank, cfg.signal.m, cfg.signal.sigma_n, signal_rng);
  return {std::move(g), std::move(l), std::move(r), std::move(s.x), std::move(s.y)};
}

namespace {

TrialResult run_trial(const ExperimentConfig& cfg, int index) {
  TrialResult t;
  t.index = index;
  t.seed = trial_seed(cfg.seed, index);
  const auto start = std::chrono::steady_clock::now();
  try {
    const SyntheticInstance inst = generate_instance(cfg, t.seed);
    TransitionMatrix r = inst.r_true;
    if (cfg.signal.solver_transition == SolverTransition::kIdentity) {
      r = TransitionMatrix::identity(cfg.graph.n);
    } else if (cfg.signal.solver_transition == SolverTransition::kAcf) {
      r = estimate_transition_acf(inst.y);
    }
    if (r.is_diagonal()) {
      t.transition_coeffs.assign(r.coeffs().data(), r.coeffs().data() + r.coeffs().size());
    }
    const SolverResult res = gl_lrss(inst.y, r, cfg.solver);
    t.metrics = score(res.l_hat, inst.l_true, cfg.tau_edge, &res.x_hat, &inst.x, cfg.nmi);
    t.objective_trace = res.objective_trace;
    t.outer_iterations = res.outer_iterations_used;
    t.converged = res.converged;
    t.ok = true;
  } catch (const std::exception& e) {
    t.ok = false;
    t.error = e.what();
  }
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

}  // namespace

RunReport run_synthetic(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = cfg;
  rep.trials.resize(static_cast<std::size_t>(cfg.trials));

  const int workers = std::min(cfg.threads, cfg.trials);
  if (workers <= 1) {
    for (int i = 0; i < cfg.trials; ++i) rep.trials[static_cast<std::size_t>(i)] = run_trial(cfg, i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < cfg.trials; i = next++) {
          rep.trials[static_cast<std::size_t>(i)] = run_trial(cfg, i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  rep.failed = static_cast<std::size_t>(
      std::count_if(rep.trials.begin(), rep.trials.end(), [](const auto& t) { return !t.ok; }));
  rep.aggregate = aggregate(rep.trials);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!cfg.outputs.empty()) {
    std::filesystem::create_directories(cfg.outputs);
    save_report(rep, std::filesystem::path(cfg.outputs) / "report.json");
  }
  return rep;
}

SweepResult grid_search(const ExperimentConfig& cfg) {
  if (!cfg.sweep) throw ValidationError("grid_search requires a sweep");
  cfg.validate();
  const SweepSpec& s = *cfg.sweep;

  SweepResult out;
  for (double alpha : or_default(s.alpha, cfg.solver.alpha)) {
    for (double beta : or_default(s.beta, cfg.solver.beta)) {
      for (double gamma : or_default(s.gamma, cfg.solver.gamma)) {
        for (Eigen::Index rank : or_default(s.rank, cfg.signal.rank)) {
          for (Eigen::Index m : or_default(s.m, cfg.signal.m)) {
            ExperimentConfig point = cfg;
            point.sweep.reset();
            point.outputs.clear();
            point.solver.alpha = alpha;
            point.solver.beta = beta;
            point.solver.gamma = gamma;
            point.signal.rank = rank;
            point.signal.m = m;
            SweepRow row{alpha, beta, gamma, rank, m, {}, 0, false};
            try {
              const RunReport rep = run_synthetic(point);
              row.metrics = rep.aggregate;
              row.failed = rep.failed;
              row.excluded = rep.failed == rep.trials.size();
            } catch (const Error&) {
              row.failed = static_cast<std::size_t>(cfg.trials);
              row.excluded = true;
            }
            out.rows.push_back(std::move(row));
          }
        }
      }
    }
  }

  auto key = [](const SweepRow& r) {
    return std::make_tuple(-r.metrics.at("f_measure").mean, r.metrics.at("gse").mean, r.alpha,
                           r.beta, r.gamma, r.rank, r.m);
  };
  bool found = false;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    if (out.rows[i].excluded) continue;
    if (!found || key(out.rows[i]) < key(out.rows[out.best])) {
      out.best = i;
      found = true;
    }
  }
  if (!found) throw SolverError("every sweep point failed");

  if (!cfg.outputs.empty()) {
    std::filesystem::create_directories(cfg.outputs);
    const std::filesystem::path dir(cfg.outputs);
    save_json(to_json(out), dir / "sweep.json");
    std::ofstream(dir / "sweep.csv") << sweep_table_csv(out);
  }
  return out;
}

TransitionMatrix estimate_transition_acf(const SignalMatrix& y) {
  if (y.cols() < 3) throw ValidationError("ACF estimation needs at least 3 time instants");
  const Eigen::Index m = y.cols();
  Vector c(y.rows());
  const double upper = std::nextafter(1.0, 0.0);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const Vector row = y.row(i).transpose().array() - y.row(i).mean();
    const double c0 = row.squaredNorm();
    if (!(c0 > 0.0) || c0 <= 1e-300) {
      std::ostringstream os;
      os << "row " << i << " has zero variance; cannot estimate its autocorrelation";
      throw ValidationError(os.str());
    }
    const double c1 = row.head(m - 1).dot(row.tail(m - 1));
    c(i) = std::clamp(c1 / c0, 0.0, upper);
  }
  return TransitionMatrix::diagonal(std::move(c));
}

// --- serialization ----------------------------------------------------------

json to_json(const SolverConfig& c) {
  return {{"alpha", c.alpha},         {"beta", c.beta},
          {"gamma", c.gamma},         {"rho", c.rho},
          {"k_outer", c.k_outer},     {"eps_outer", c.eps_outer},
          {"k_admm", c.k_admm},       {"tol_admm", c.tol_admm},
          {"k_cg", c.k_cg},           {"delta_cg", c.delta_cg},
          {"proj_tol", c.proj_tol},   {"proj_max_iter", c.proj_max_iter},
          {"warm_start", c.warm_start}};
}

void update_from_json(SolverConfig& c, const json& j) {
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.gamma = j.value("gamma", c.gamma);
  c.rho = j.value("rho", c.rho);
  c.k_outer = j.value("k_outer", c.k_outer);
  c.eps_outer = j.value("eps_outer", c.eps_outer);
  c.k_admm = j.value("k_admm", c.k_admm);
  c.tol_admm = j.value("tol_admm", c.tol_admm);
  c.k_cg = j.value("k_cg", c.k_cg);
  c.delta_cg = j.value("delta_cg", c.delta_cg);
  c.proj_tol = j.value("proj_tol", c.proj_tol);
  c.proj_max_iter = j.value("proj_max_iter", c.proj_max_iter);
  c.warm_start = j.value("warm_start", c.warm_start);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["graph"] = {{"kind", graph_kind_name(c.graph.kind)},
                {"n", c.graph.n},
                {"sigma", c.graph.sigma},
                {"threshold", c.graph.threshold},
                {"k", c.graph.k}};
  j["signal"] = {{"rank", c.signal.rank},
                 {"m", c.signal.m},
                 {"sigma_n", c.signal.sigma_n},
                 {"transition", transition_to_json(c.signal.transition)},
                 {"solver_transition", solver_transition_name(c.signal.solver_transition)}};
  j["solver"] = to_json(c.solver);
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["outputs"] = c.outputs;
  j["tau_edge"] = c.tau_edge;
  j["nmi"] = c.nmi == NmiNormalization::kMean ? "mean" : "sqrt";
  j["threads"] = c.threads;
  if (c.sweep) {
    j["sweep"] = {{"alpha", c.sweep->alpha},
                  {"beta", c.sweep->beta},
                  {"gamma", c.sweep->gamma},
                  {"rank", c.sweep->rank},
                  {"m", c.sweep->m}};
  }
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("graph")) {
      const json& g = j["graph"];
      c.graph.kind = graph_kind_from(g.value("kind", std::string("rgg")));
      c.graph.n = g.value("n", c.graph.n);
      c.graph.sigma = g.value("sigma", c.graph.sigma);
      c.graph.threshold = g.value("threshold", c.graph.threshold);
      c.graph.k = g.value("k", c.graph.k);
    }
    if (j.contains("signal")) {
      const json& s = j["signal"];
      c.signal.rank = s.value("rank", c.signal.rank);
      c.signal.m = s.value("m", c.signal.m);
      c.signal.sigma_n = s.value("sigma_n", c.signal.sigma_n);
      if (s.contains("transition")) c.signal.transition = transition_from_json(s["transition"]);
      c.signal.solver_transition =
          solver_transition_from(s.value("solver_transition", std::string("true")));
    }
    if (j.contains("solver")) update_from_json(c.solver, j["solver"]);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.outputs = j.value("outputs", c.outputs);
    c.tau_edge = j.value("tau_edge", c.tau_edge);
    c.threads = j.value("threads", c.threads);
    const std::string nmi = j.value("nmi", std::string("mean"));
    if (nmi != "mean" && nmi != "sqrt") throw ValidationError("nmi must be 'mean' or 'sqrt'");
    c.nmi = nmi == "mean" ? NmiNormalization::kMean : NmiNormalization::kSqrtProduct;
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      if (s.is_string() && s.get<std::string>() == "default") {
        c.sweep = default_sweep();
      } else {
        SweepSpec sw;
        sw.alpha = s.value("alpha", std::vector<double>{});
        sw.beta = s.value("beta", std::vector<double>{});
        sw.gamma = s.value("gamma", std::vector<double>{});
        sw.rank = s.value("rank", std::vector<Eigen::Index>{});
        sw.m = s.value("m", std::vector<Eigen::Index>{});
        c.sweep = std::move(sw);
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid experiment config: ") + e.what());
  }
  return c;
}

json to_json(const MetricsReport& m) {
  json j = json::object();
  auto put = [&j](const char* name, const std::optional<double>& v) {
    j[name] = v ? json(*v) : json(nullptr);
  };
  put("precision", m.precision);
  put("recall", m.recall);
  put("f_measure", m.f_measure);
  put("nmi", m.nmi);
  put("gse", m.gse);
  put("lce", m.lce);
  j["flags"] = {{"learned_empty", m.learned_empty},
                {"truth_empty", m.truth_empty},
                {"nmi_degenerate", m.nmi_degenerate}};
  return j;
}

json to_json(const RunReport& r, bool include_timings) {
  json trials = json::array();
  for (const auto& t : r.trials) {
    json tj = {{"index", t.index},
               {"seed", t.seed},
               {"ok", t.ok},
               {"metrics", to_json(t.metrics)},
               {"objective_trace", t.objective_trace},
               {"outer_iterations", t.outer_iterations},
               {"converged", t.converged},
               {"transition_coeffs", t.transition_coeffs}};
    if (!t.ok) tj["error"] = t.error;
    if (include_timings) tj["seconds"] = t.seconds;
    trials.push_back(std::move(tj));
  }
  json j = {{"version", r.version},
            {"config", to_json(r.config)},
            {"hyperparameters",
             {{"alpha", r.config.solver.alpha},
              {"beta", r.config.solver.beta},
              {"gamma", r.config.solver.gamma},
              {"nuclear_norm_ablation", r.config.solver.gamma == 0.0}}},
            {"trials", std::move(trials)},
            {"aggregate", summary_to_json(r.aggregate)},
            {"failed", r.failed}};
  if (include_timings) j["seconds"] = r.seconds;
  return j;
}

json to_json(const SweepResult& s) {
  json rows = json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"alpha", r.alpha},
                    {"beta", r.beta},
                    {"gamma", r.gamma},
                    {"beta_over_alpha", r.beta / r.alpha},
                    {"rank", r.rank},
                    {"m", r.m},
                    {"metrics", summary_to_json(r.metrics)},
                    {"failed", r.failed},
                    {"excluded", r.excluded}});
  }
  const auto& b = s.best_row();
  return {{"version", kVersion},
          {"grid_interpretation",
           "exponent grids are swept linearly in the exponent (alpha, beta step 0.1; gamma step "
           "0.4)"},
          {"best", {{"alpha", b.alpha}, {"beta", b.beta}, {"gamma", b.gamma}, {"rank", b.rank}, {"m", b.m}}},
          {"rows", std::move(rows)}};
}

std::string sweep_table_csv(const SweepResult& s) {
  std::ostringstream os;
  os << "alpha,beta,gamma,beta_over_alpha,rank,m,failed";
  for (const auto& name : kMetricNames) os << ',' << name << "_mean," << name << "_std";
  os << '\n';
  for (const auto& r : s.rows) {
    os << format_double(r.alpha) << ',' << format_double(r.beta) << ',' << format_double(r.gamma)
       << ',' << format_double(r.beta / r.alpha) << ',' << r.rank << ',' << r.m << ','
       << r.failed;
    for (const auto& name : kMetricNames) {
      auto it = r.metrics.find(name);
      if (it == r.metrics.end() || it->second.count == 0) {
        os << ",,";
      } else {
        os << ',' << format_double(it->second.mean) << ',' << format_double(it->second.stddev);
      }
    }
    os << '\n';
  }
  return os.str();
}

void save_json(const json& j, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void save_report(const RunReport& report, const std::filesystem::path& path) {
  save_json(to_json(report), path);
}

}  // namespace gllrss
