#include "gllrss/graph.hpp"

#include "gllrss/error.hpp"
#include "gllrss/synth.hpp"

#include <cmath>
#include <sstream>

namespace gllrss {

namespace {

std::string entry_name(Eigen::Index i, Eigen::Index j) {
  std::ostringstream os;
  os << "(" << i << ", " << j << ")";
  return os.str();
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

}  // namespace

Graph::Graph(Matrix weights, std::optional<Matrix> coords)
    : weights_(std::move(weights)), coords_(std::move(coords)) {
  require_square(weights_, "graph weight matrix");
  if (weights_.rows() == 0) throw ValidationError("graph must have at least one vertex");
  const Eigen::Index n = weights_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = weights_(i, j);
      if (!std::isfinite(w)) {
        throw ValidationError("graph weight " + entry_name(i, j) + " is not finite");
      }
      if (i == j && w != 0.0) {
        throw ValidationError("graph weight " + entry_name(i, j) + " on the diagonal must be 0");
      }
      if (w < 0.0) {
        throw ValidationError("graph weight " + entry_name(i, j) + " is negative");
      }
      if (w != weights_(j, i)) {
        throw ValidationError("graph weights are asymmetric at " + entry_name(i, j));
      }
    }
  }
  if (coords_ && coords_->rows() != n) {
    throw ValidationError("coordinate rows do not match vertex count");
  }
}

CglMatrix CglMatrix::from_matrix(Matrix m, double tol) {
  const CglReport report = validate_cgl(m, tol);
  if (!report.ok()) throw ValidationError("not a valid CGL: " + report.describe());
  Matrix sym = 0.5 * (m + m.transpose());
  return CglMatrix(std::move(sym));
}

CglMatrix CglMatrix::assume_valid(Matrix m) {
  require_square(m, "Laplacian");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw ValidationError("Laplacian is not symmetric");
  }
  Matrix sym = 0.5 * (m + m.transpose());
  return CglMatrix(std::move(sym));
}

std::string CglReport::describe() const {
  std::ostringstream os;
  auto one = [&os](const char* name, const ConstraintCheck& c) {
    os << name << (c.passed ? " ok" : " FAIL") << " (worst " << c.worst;
    if (!c.passed && c.row >= 0) os << " at " << entry_name(c.row, c.col);
    os << ")";
  };
  one("symmetry", symmetry);
  os << "; ";
  one("off-diagonal sign", off_diagonal_sign);
  os << "; ";
  one("row sums", row_sums);
  os << "; ";
  one("psd", psd);
  return os.str();
}

CglReport validate_cgl(const Matrix& m, double tol) {
  require_square(m, "matrix");
  const Eigen::Index n = m.rows();
  CglReport rep;

  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double asym = std::abs(m(i, j) - m(j, i));
      if (asym > rep.symmetry.worst) rep.symmetry = {asym <= tol, asym, i, j};
      if (i != j && m(i, j) > rep.off_diagonal_sign.worst) {
        rep.off_diagonal_sign = {m(i, j) <= tol, m(i, j), i, j};
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = std::abs(m.row(i).sum());
    if (s > rep.row_sums.worst) rep.row_sums = {s <= tol, s, i, -1};
  }

  if (n > 0 && m.allFinite()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    rep.psd = {lmin >= -tol, std::max(0.0, -lmin), -1, -1};
  } else if (n > 0) {
    rep.psd = {false, std::numeric_limits<double>::infinity(), -1, -1};
  }
  return rep;
}

CglMatrix laplacian_from_graph(const Graph& g) {
  const Matrix& w = g.weights();
  Matrix l = -w;
  l.diagonal() = w.rowwise().sum();
  return CglMatrix::assume_valid(std::move(l));
}

CglMatrix normalize_trace(const CglMatrix& l, double target) {
  if (!(target > 0.0)) throw ValidationError("target trace must be positive");
  const double tr = l.trace();
  if (!(tr > 0.0)) throw ValidationError("cannot normalize a Laplacian with zero trace");
  return CglMatrix::assume_valid(l.matrix() * (target / tr));
}

double smoothness(const Vector& x, const CglMatrix& l) {
  if (x.size() != l.size()) {
    throw ValidationError("signal length does not match Laplacian size");
  }
  return x.dot(l.matrix() * x);
}

double spatiotemporal_smoothness(const SignalMatrix& x, const TransitionMatrix& r,
                                 const CglMatrix& l) {
  if (x.rows() != l.size() || r.size() != l.size()) {
    throw ValidationError("spatiotemporal_smoothness: dimension mismatch");
  }
  const SignalMatrix d = weighted_difference(x, r);
  return (d.transpose() * l.matrix() * d).trace();
}

Spectrum eigendecompose(const CglMatrix& l) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(l.matrix());
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigendecomposition failed (n = " << l.size()
       << ", max |L_ij| = " << l.matrix().cwiseAbs().maxCoeff() << ")";
    throw SolverError(os.str());
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace gllrss
