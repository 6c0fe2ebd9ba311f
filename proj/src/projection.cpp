#include "gllrss/error.hpp"
#include "gllrss/solver.hpp"

#include <cmath>
#include <sstream>

namespace gllrss {

namespace {

// Off-diagonal entries clipped at zero; the diagonal is free.
void project_cone(Matrix& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j && a(i, j) > 0.0) a(i, j) = 0.0;
    }
  }
}

// Closed-form projection of a symmetric matrix onto
// {S symmetric : S 1 = 0, tr(S) = t}. The normal space is spanned by
// a 1' + 1 a' and I, so S = A - a 1' - 1 a' - nu I.
void project_affine(Matrix& a, double target_trace) {
  const auto n = static_cast<double>(a.rows());
  const Vector row = a.rowwise().sum();
  const double total = row.sum();
  const double nu = (a.trace() - total / n - target_trace) / (n - 1.0);
  const double s = (total - n * nu) / (2.0 * n);
  const Vector shift = (row.array() - s - nu) / n;
  a.colwise() -= shift;
  a.rowwise() -= shift.transpose();
  a.diagonal().array() -= nu;
}

}  // namespace

CglMatrix project_cgl_star(const Matrix& m, double target_trace, double tol, int max_iter) {
  if (m.rows() != m.cols()) throw ValidationError("projection input must be square");
  const Eigen::Index n = m.rows();
  if (n < 2) throw ValidationError("projection onto trace-normalized CGLs needs N >= 2");
  if (!m.allFinite()) throw SolverError("projection input is not finite");
  if (!(target_trace > 0.0)) throw ValidationError("target trace must be positive");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw ValidationError("projection input is not symmetric");
  }

  // Dykstra: x is the affine iterate, y the cone iterate, p/q the
  // correction terms for the cone and the affine set.
  Matrix x = 0.5 * (m + m.transpose());
  Matrix y(n, n);
  Matrix p = Matrix::Zero(n, n);
  Matrix q = Matrix::Zero(n, n);
  Matrix buf(n, n);
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    y = x + p;
    project_cone(y);
    p += x - y;

    buf = y + q;
    project_affine(buf, target_trace);
    q += y - buf;

    const double step = (buf - x).norm();
    const double gap = (buf - y).norm();
    x.swap(buf);
    residual = std::max(step, gap);
    if (residual < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "CGL projection did not converge in " << max_iter << " iterations (residual "
       << residual << ")";
    throw SolverError(os.str());
  }

  // Rebuild the diagonal from the symmetrized cone iterate, then rescale.
  // The correction is O(tol).
  Matrix l = 0.5 * (y + y.transpose());
  l.diagonal().setZero();
  l.diagonal() = -l.rowwise().sum();
  const double tr = l.trace();
  if (!(tr > 0.0)) throw SolverError("CGL projection collapsed to the empty graph");
  l /= tr / target_trace;
  return CglMatrix::assume_valid(std::move(l));
}

}  // namespace gllrss
