#pragma once

// Graphs, combinatorial Laplacians and the graph smoothness functionals.

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace gllrss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Columns are graph signals at successive time instants (rows = vertices).
using SignalMatrix = Eigen::MatrixXd;

class TransitionMatrix;

/// Undirected weighted graph: symmetric nonnegative weights, zero diagonal.
class Graph {
 public:
  /// Validates the weight matrix; throws ValidationError naming the first
  /// offending entry.
  explicit Graph(Matrix weights, std::optional<Matrix> coords = std::nullopt);

  Eigen::Index size() const { return weights_.rows(); }
  const Matrix& weights() const { return weights_; }
  const std::optional<Matrix>& coords() const { return coords_; }

 private:
  Matrix weights_;
  std::optional<Matrix> coords_;
};

/// A valid combinatorial graph Laplacian (symmetric, nonpositive
/// off-diagonals, zero row sums, PSD).
class CglMatrix {
 public:
  static constexpr double kSymmetryTol = 1e-10;
  static constexpr double kDefaultTol = 1e-8;

  /// Checks every CGL constraint at `tol` and throws ValidationError on
  /// the first failure. The stored matrix is exactly symmetrized.
  static CglMatrix from_matrix(Matrix m, double tol = kDefaultTol);

  /// Trusted construction for matrices that are valid by construction.
  /// Only symmetry and shape are checked.
  static CglMatrix assume_valid(Matrix m);

  Eigen::Index size() const { return l_.rows(); }
  const Matrix& matrix() const { return l_; }
  double trace() const { return l_.trace(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return l_(i, j); }

 private:
  explicit CglMatrix(Matrix m) : l_(std::move(m)) {}
  Matrix l_;
};

/// Eigenvalues ascending, eigenvectors column-paired and orthonormal.
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;
};

struct ConstraintCheck {
  bool passed = true;
  double worst = 0.0;  // magnitude of the worst violation
  Eigen::Index row = -1;
  Eigen::Index col = -1;
};

struct CglReport {
  ConstraintCheck symmetry;
  ConstraintCheck off_diagonal_sign;
  ConstraintCheck row_sums;
  ConstraintCheck psd;

  bool ok() const {
    return symmetry.passed && off_diagonal_sign.passed && row_sums.passed && psd.passed;
  }
  std::string describe() const;
};

CglMatrix laplacian_from_graph(const Graph& g);

/// Rescales so that trace(result) == target.
CglMatrix normalize_trace(const CglMatrix& l, double target);

/// x' L x.
double smoothness(const Vector& x, const CglMatrix& l);

/// tr(D(X)' L D(X)) with D the weighted difference operator.
double spatiotemporal_smoothness(const SignalMatrix& x, const TransitionMatrix& r,
                                 const CglMatrix& l);

Spectrum eigendecompose(const CglMatrix& l);

/// Reports each constraint separately, all checked at `tol`.
CglReport validate_cgl(const Matrix& m, double tol = CglMatrix::kDefaultTol);

}  // namespace gllrss
