#pragma once

// Joint graph-Laplacian and low-rank component estimation by alternating
// minimization. Each block is solved with ADMM:
//
//   Q1(L, X) = |D(X - Y)|_F^2 + alpha tr(D(X)' L D(X)) + beta |L|_F^2 + gamma |X|_*
//
// subject to L being a CGL with trace N.

#include "gllrss/graph.hpp"
#include "gllrss/synth.hpp"

#include <optional>
#include <vector>

namespace gllrss {

struct SolverConfig {
  double alpha = 0.1;
  double beta = 10.0;
  double gamma = 4.0;
  double rho = 1.0;

  int k_outer = 50;
  double eps_outer = 1e-4;

  int k_admm = 200;
  double tol_admm = 1e-6;

  int k_cg = 500;
  double delta_cg = 1e-6;

  double proj_tol = 1e-8;
  int proj_max_iter = 1000;

  /// Carry (Z, Xi) and (P, Q) across outer iterations.
  bool warm_start = true;

  /// Throws ValidationError. gamma may be zero (no nuclear norm).
  void validate() const;
};

/// One inner ADMM run: primal/dual residual per iteration.
struct AdmmTrace {
  std::vector<double> primal;
  std::vector<double> dual;
  bool converged = false;
};

struct SolverResult {
  CglMatrix l_hat;
  SignalMatrix x_hat;
  std::vector<double> objective_trace;
  std::vector<AdmmTrace> graph_traces;
  std::vector<AdmmTrace> lowrank_traces;
  int outer_iterations_used = 0;
  bool converged = false;
};

double nuclear_norm(const Matrix& m);

double objective_q1(const CglMatrix& l, const SignalMatrix& x, const SignalMatrix& y,
                    const TransitionMatrix& r, double alpha, double beta, double gamma);

// ---------------------------------------------------------------------------
// Graph refinement

/// Euclidean projection onto {L symmetric, L_ij <= 0 (i != j), L 1 = 0,
/// tr(L) = target_trace} by Dykstra's alternating projections.
CglMatrix project_cgl_star(const Matrix& m, double target_trace, double tol, int max_iter);

struct GraphAdmmState {
  Matrix z;
  Matrix xi;
};

struct GraphRefinement {
  CglMatrix l;
  GraphAdmmState state;
  AdmmTrace trace;
};

/// min_L alpha tr(D(X)' L D(X)) + beta |L|_F^2 over trace-N CGLs.
GraphRefinement refine_graph(const SignalMatrix& x, const TransitionMatrix& r,
                             const SolverConfig& cfg,
                             const std::optional<GraphAdmmState>& warm = std::nullopt);

// ---------------------------------------------------------------------------
// Low-rank estimation

/// Fixed data of the X-subproblem
///   f_X(X) = |D(X - Y)|^2 + alpha tr(D(X)' L D(X)) + rho/2 |X - P + Q/rho|^2.
struct XSubproblem {
  const SignalMatrix& y;
  const CglMatrix& l;
  const TransitionMatrix& r;
  const SignalMatrix& p;
  const SignalMatrix& q;
  double rho;
  double alpha;

  double value(const SignalMatrix& x) const;
};

SignalMatrix gradient_fx(const SignalMatrix& x, const XSubproblem& sub);

struct CgResult {
  SignalMatrix x;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Conjugate gradient with exact line search and Fletcher-Reeves updates,
/// started from `x0` (zero when absent).
CgResult cg_x_update(const XSubproblem& sub, double delta_cg, int k_cg,
                     const std::optional<SignalMatrix>& x0 = std::nullopt);

/// Dense solve of the stationarity system. Limited to N*M <= max_size.
SignalMatrix closed_form_x_update(const XSubproblem& sub, Eigen::Index max_size = 2000);

/// Singular value soft-thresholding: prox of tau |.|_*.
Matrix svt(const Matrix& m, double tau);

struct LowRankAdmmState {
  SignalMatrix x;
  SignalMatrix p;
  SignalMatrix q;
};

struct LowRankEstimate {
  SignalMatrix p;
  LowRankAdmmState state;
  AdmmTrace trace;
};

/// min_X |D(X - Y)|^2 + alpha tr(D(X)' L D(X)) + gamma |X|_*.
/// Returns the thresholded iterate P.
LowRankEstimate estimate_lowrank(const SignalMatrix& y, const CglMatrix& l,
                                 const TransitionMatrix& r, const SolverConfig& cfg,
                                 const std::optional<LowRankAdmmState>& warm = std::nullopt);

// ---------------------------------------------------------------------------

SolverResult gl_lrss(const SignalMatrix& y, const TransitionMatrix& r, const SolverConfig& cfg);

}  // namespace gllrss
