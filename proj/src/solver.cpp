#include "gllrss/solver.hpp"

#include "gllrss/error.hpp"

#include <cmath>
#include <sstream>

namespace gllrss {

void SolverConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("solver config: ") + name + " must be positive");
    }
  };
  positive(alpha, "alpha");
  positive(beta, "beta");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("solver config: gamma must be >= 0");
  }
  positive(rho, "rho");
  positive(eps_outer, "eps_outer");
  positive(tol_admm, "tol_admm");
  positive(delta_cg, "delta_cg");
  positive(proj_tol, "proj_tol");
  if (k_outer < 1 || k_admm < 1 || k_cg < 1 || proj_max_iter < 1) {
    throw ValidationError("solver config: iteration limits must be >= 1");
  }
}

double nuclear_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double objective_q1(const CglMatrix& l, const SignalMatrix& x, const SignalMatrix& y,
                    const TransitionMatrix& r, double alpha, double beta, double gamma) {
  if (x.rows() != l.size() || y.rows() != l.size() || x.cols() != y.cols() ||
      r.size() != l.size()) {
    throw ValidationError("objective_q1: dimension mismatch");
  }
  const SignalMatrix dx = weighted_difference(x, r);
  const SignalMatrix de = weighted_difference(x - y, r);
  double q = de.squaredNorm() + beta * l.matrix().squaredNorm();
  if (alpha != 0.0) q += alpha * (dx.transpose() * l.matrix() * dx).trace();
  if (gamma != 0.0) q += gamma * nuclear_norm(x);
  return q;
}

GraphRefinement refine_graph(const SignalMatrix& x, const TransitionMatrix& r,
                             const SolverConfig& cfg, const std::optional<GraphAdmmState>& warm) {
  const Eigen::Index n = x.rows();
  if (r.size() != n) throw ValidationError("refine_graph: dimension mismatch");
  if (n < 2) throw ValidationError("refine_graph needs at least two vertices");
  if (!x.allFinite()) throw SolverError("refine_graph: signal is not finite");
  const auto target = static_cast<double>(n);

  const SignalMatrix d = weighted_difference(x, r);
  const Matrix smooth = cfg.alpha * (d * d.transpose());

  GraphAdmmState st;
  if (warm && warm->z.rows() == n) {
    st = *warm;
  } else {
    // Complete graph with equal weights and trace N.
    st.z = Matrix::Constant(n, n, -1.0 / (target - 1.0));
    st.z.diagonal().setOnes();
    st.xi = Matrix::Zero(n, n);
  }

  AdmmTrace trace;
  const double denom = 2.0 * cfg.beta + cfg.rho;
  for (int k = 0; k < cfg.k_admm; ++k) {
    const Matrix l = (cfg.rho * st.z + st.xi - smooth) / denom;
    Matrix z_next;
    try {
      z_next = project_cgl_star(l - st.xi / cfg.rho, target, cfg.proj_tol, cfg.proj_max_iter)
                   .matrix();
    } catch (const SolverError& e) {
      std::ostringstream os;
      os << "graph ADMM iteration " << k << ": " << e.what();
      throw SolverError(os.str());
    }
    st.xi += cfg.rho * (z_next - l);
    const double primal = (z_next - l).norm();
    const double dual = cfg.rho * (z_next - st.z).norm();
    st.z = std::move(z_next);
    if (!st.xi.allFinite()) {
      std::ostringstream os;
      os << "graph ADMM produced non-finite iterates at iteration " << k;
      throw SolverError(os.str());
    }
    trace.primal.push_back(primal);
    trace.dual.push_back(dual);
    if (std::max(primal, dual) < cfg.tol_admm * std::max(1.0, st.z.norm())) {
      trace.converged = true;
      break;
    }
  }
  return {CglMatrix::assume_valid(st.z), std::move(st), std::move(trace)};
}

SolverResult gl_lrss(const SignalMatrix& y, const TransitionMatrix& r, const SolverConfig& cfg) {
  cfg.validate();
  if (y.cols() < 2) throw ValidationError("gl_lrss needs at least two time instants");
  if (y.rows() < 2) throw ValidationError("gl_lrss needs at least two vertices");
  if (r.size() != y.rows()) throw ValidationError("transition size does not match signals");
  if (!y.allFinite()) throw ValidationError("observations contain non-finite values");

  auto q1 = [&](const CglMatrix& l, const SignalMatrix& x) {
    return objective_q1(l, x, y, r, cfg.alpha, cfg.beta, cfg.gamma);
  };

  SignalMatrix x = y;
  std::optional<CglMatrix> l;
  std::optional<GraphAdmmState> graph_state;
  std::optional<LowRankAdmmState> lowrank_state;
  std::vector<double> objective;
  std::vector<AdmmTrace> graph_traces;
  std::vector<AdmmTrace> lowrank_traces;
  bool converged = false;
  int outer = 0;

  for (outer = 1; outer <= cfg.k_outer; ++outer) {
    try {
      // Graph step. A candidate that does not decrease Q1 is rejected.
      GraphRefinement gr = refine_graph(x, r, cfg, graph_state);
      if (!l || q1(gr.l, x) <= q1(*l, x)) l = gr.l;
      graph_state = cfg.warm_start ? std::optional(std::move(gr.state)) : std::nullopt;
      graph_traces.push_back(std::move(gr.trace));

      // Low-rank step.
      LowRankEstimate lr = estimate_lowrank(y, *l, r, cfg, lowrank_state);
      const double current = q1(*l, x);
      const double candidate = q1(*l, lr.p);
      if (candidate <= current) x = lr.p;
      lowrank_state = cfg.warm_start ? std::optional(std::move(lr.state)) : std::nullopt;
      lowrank_traces.push_back(std::move(lr.trace));
      objective.push_back(std::min(candidate, current));
    } catch (const Error& e) {
      std::ostringstream os;
      os << "outer iteration " << outer << ": " << e.what();
      throw SolverError(os.str());
    }
    if (!std::isfinite(objective.back())) {
      std::ostringstream os;
      os << "outer iteration " << outer << ": objective is not finite";
      throw SolverError(os.str());
    }
    const std::size_t k = objective.size();
    if (k >= 2 && std::abs(objective[k - 2] - objective[k - 1]) < cfg.eps_outer) {
      converged = true;
      break;
    }
  }

  SolverResult res{*l, std::move(x), std::move(objective), std::move(graph_traces),
                   std::move(lowrank_traces), std::min(outer, cfg.k_outer), converged};
  return res;
}

}  // namespace gllrss
