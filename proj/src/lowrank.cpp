#include "gllrss/error.hpp"
#include "gllrss/solver.hpp"

#include <cmath>
#include <sstream>

namespace gllrss {

namespace {

void check_shapes(const XSubproblem& sub, const SignalMatrix* x) {
  const Eigen::Index n = sub.y.rows();
  const Eigen::Index m = sub.y.cols();
  const bool ok = sub.l.size() == n && sub.r.size() == n && sub.p.rows() == n &&
                  sub.p.cols() == m && sub.q.rows() == n && sub.q.cols() == m &&
                  (x == nullptr || (x->rows() == n && x->cols() == m));
  if (!ok) throw ValidationError("X-subproblem: dimension mismatch");
}

// Linear part of the gradient: D*((2I + 2 alpha L) D(V)) + rho V.
SignalMatrix apply_hessian(const SignalMatrix& v, const XSubproblem& sub) {
  const SignalMatrix d = weighted_difference(v, sub.r);
  SignalMatrix inner = 2.0 * d;
  if (sub.alpha != 0.0) inner.noalias() += (2.0 * sub.alpha) * (sub.l.matrix() * d);
  SignalMatrix out = weighted_difference_adjoint(inner, sub.r);
  if (sub.rho != 0.0) out += sub.rho * v;
  return out;
}

}  // namespace

double XSubproblem::value(const SignalMatrix& x) const {
  check_shapes(*this, &x);
  const SignalMatrix dx = weighted_difference(x, r);
  const SignalMatrix de = weighted_difference(x - y, r);
  const SignalMatrix gap = x - p;
  return de.squaredNorm() + alpha * (dx.transpose() * l.matrix() * dx).trace() +
         (q.array() * gap.array()).sum() + 0.5 * rho * gap.squaredNorm();
}

SignalMatrix gradient_fx(const SignalMatrix& x, const XSubproblem& sub) {
  check_shapes(sub, &x);
  const SignalMatrix de = weighted_difference(x - sub.y, sub.r);
  SignalMatrix inner = 2.0 * de;
  if (sub.alpha != 0.0) {
    inner.noalias() += (2.0 * sub.alpha) * (sub.l.matrix() * weighted_difference(x, sub.r));
  }
  SignalMatrix g = weighted_difference_adjoint(inner, sub.r);
  g += sub.rho * (x - sub.p) + sub.q;
  return g;
}

CgResult cg_x_update(const XSubproblem& sub, double delta_cg, int k_cg,
                     const std::optional<SignalMatrix>& x0) {
  check_shapes(sub, x0 ? &*x0 : nullptr);
  if (!(delta_cg > 0.0) || k_cg < 1) throw ValidationError("invalid CG controls");

  CgResult res;
  res.x = x0 ? *x0 : SignalMatrix::Zero(sub.y.rows(), sub.y.cols());
  SignalMatrix g = gradient_fx(res.x, sub);
  double gnorm2 = g.squaredNorm();
  const double threshold = delta_cg * std::max(1.0, std::sqrt(gnorm2));
  res.gradient_norm = std::sqrt(gnorm2);
  if (res.gradient_norm <= threshold) return res;

  constexpr int kRefreshEvery = 50;
  SignalMatrix dir = -g;
  for (int it = 1; it <= k_cg; ++it) {
    const SignalMatrix hd = apply_hessian(dir, sub);
    const double curvature = (dir.array() * hd.array()).sum();
    const double mu = -(dir.array() * g.array()).sum() / curvature;
    if (!(curvature > 0.0) || !std::isfinite(mu)) {
      std::ostringstream os;
      os << "CG line search failed at iteration " << it << " (curvature " << curvature << ")";
      throw SolverError(os.str());
    }
    res.x += mu * dir;
    res.iterations = it;

    if (it % kRefreshEvery == 0) {
      g = gradient_fx(res.x, sub);
    } else {
      g += mu * hd;
    }
    double next2 = g.squaredNorm();
    if (std::sqrt(next2) <= threshold) {
      // Confirm against the exact gradient before stopping.
      g = gradient_fx(res.x, sub);
      next2 = g.squaredNorm();
      if (std::sqrt(next2) <= threshold) {
        res.gradient_norm = std::sqrt(next2);
        return res;
      }
    }
    const double theta = next2 / gnorm2;  // Fletcher-Reeves
    dir = -g + theta * dir;
    gnorm2 = next2;
    res.gradient_norm = std::sqrt(next2);
  }
  return res;
}

SignalMatrix closed_form_x_update(const XSubproblem& sub, Eigen::Index max_size) {
  check_shapes(sub, nullptr);
  const Eigen::Index n = sub.y.rows();
  const Eigen::Index m = sub.y.cols();
  const Eigen::Index nm = n * m;
  if (nm > max_size) {
    std::ostringstream os;
    os << "closed-form X update limited to N*M <= " << max_size << " (got " << nm
       << "); use cg_x_update";
    throw ValidationError(os.str());
  }

  // vec(D(X)) = T' vec(X) with T block upper bidiagonal: identity blocks on
  // the diagonal, -R' on the superdiagonal.
  const Matrix r = sub.r.dense();
  Matrix t = Matrix::Identity(nm, nm);
  for (Eigen::Index b = 0; b + 1 < m; ++b) {
    t.block(b * n, (b + 1) * n, n, n) = -r.transpose();
  }
  Matrix kron_l = Matrix::Zero(nm, nm);
  for (Eigen::Index b = 0; b < m; ++b) kron_l.block(b * n, b * n, n, n) = sub.l.matrix();

  const Matrix ttt = t * t.transpose();
  Matrix system = 2.0 * ttt + (2.0 * sub.alpha) * (t * kron_l * t.transpose());
  system.diagonal().array() += sub.rho;

  const Eigen::Map<const Vector> vec_y(sub.y.data(), nm);
  const SignalMatrix rp = sub.rho * sub.p - sub.q;
  const Eigen::Map<const Vector> vec_rp(rp.data(), nm);
  const Vector rhs = vec_rp + 2.0 * ttt * vec_y;

  Eigen::LDLT<Matrix> ldlt(system);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw SolverError("closed-form X system is singular");
  }
  const Vector v = ldlt.solve(rhs);
  if (!v.allFinite()) throw SolverError("closed-form X system is singular");
  return Eigen::Map<const SignalMatrix>(v.data(), n, m);
}

Matrix svt(const Matrix& m, double tau) {
  if (!(tau >= 0.0)) throw ValidationError("svt threshold must be >= 0");
  if (!m.allFinite()) throw SolverError("svt input is not finite");
  if (m.size() == 0) return m;
  constexpr int kOpts = Eigen::ComputeThinU | Eigen::ComputeThinV;
  Eigen::BDCSVD<Matrix> svd(m, kOpts);
  if (svd.info() == Eigen::Success && svd.matrixU().allFinite() && svd.matrixV().allFinite() &&
      svd.singularValues().allFinite()) {
    const Vector shrunk = (svd.singularValues().array() - tau).max(0.0);
    return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
  }
  // BDCSVD occasionally returns NaN vectors on nearly rank-deficient input.
  Eigen::JacobiSVD<Matrix> jac(m, kOpts);
  if (jac.info() != Eigen::Success) throw SolverError("SVD failed in svt");
  const Vector shrunk = (jac.singularValues().array() - tau).max(0.0);
  return jac.matrixU() * shrunk.asDiagonal() * jac.matrixV().transpose();
}

LowRankEstimate estimate_lowrank(const SignalMatrix& y, const CglMatrix& l,
                                 const TransitionMatrix& r, const SolverConfig& cfg,
                                 const std::optional<LowRankAdmmState>& warm) {
  if (y.rows() != l.size() || r.size() != l.size()) {
    throw ValidationError("estimate_lowrank: dimension mismatch");
  }
  LowRankAdmmState st;
  if (warm && warm->p.rows() == y.rows() && warm->p.cols() == y.cols()) {
    st = *warm;
  } else {
    st = {y, y, SignalMatrix::Zero(y.rows(), y.cols())};
  }

  LowRankEstimate out{st.p, st, {}};
  const double tau = cfg.gamma / cfg.rho;
  for (int k = 0; k < cfg.k_admm; ++k) {
    const XSubproblem sub{y, l, r, st.p, st.q, cfg.rho, cfg.alpha};
    CgResult cg;
    try {
      cg = cg_x_update(sub, cfg.delta_cg, cfg.k_cg, st.x);
    } catch (const SolverError& e) {
      std::ostringstream os;
      os << "low-rank ADMM iteration " << k << ": " << e.what();
      throw SolverError(os.str());
    }
    st.x = std::move(cg.x);

    SignalMatrix p_next = svt(st.x + st.q / cfg.rho, tau);
    st.q += cfg.rho * (st.x - p_next);
    const double primal = (st.x - p_next).norm();
    const double dual = cfg.rho * (p_next - st.p).norm();
    st.p = std::move(p_next);
    if (!st.p.allFinite() || !st.q.allFinite()) {
      std::ostringstream os;
      os << "low-rank ADMM produced non-finite iterates at iteration " << k;
      throw SolverError(os.str());
    }
    out.trace.primal.push_back(primal);
    out.trace.dual.push_back(dual);
    if (std::max(primal, dual) < cfg.tol_admm * std::max(1.0, st.p.norm())) {
      out.trace.converged = true;
      break;
    }
  }
  out.p = st.p;
  out.state = std::move(st);
  return out;
}

}  // namespace gllrss
