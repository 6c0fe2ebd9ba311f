#pragma once

// Ground-truth graph generators, the autoregressive graph-signal model and
// the weighted difference operator.

#include "gllrss/graph.hpp"

#include <cstdint>
#include <random>
#include <tuple>
#include <variant>

namespace gllrss {

/// Seedable generator used by every sampling routine. One stream per
/// generated object.
using Rng = std::mt19937_64;

/// Derives an independent seed from a base seed and a stream index
/// (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// State transition matrix R: either diagonal with coefficients in [0, 1]
/// or a general symmetric matrix.
class TransitionMatrix {
 public:
  enum class Kind { kDiagonal, kSymmetric };

  static TransitionMatrix identity(Eigen::Index n);
  static TransitionMatrix diagonal(Vector coeffs);
  static TransitionMatrix symmetric(Matrix sym);
  /// Diagonal matrix without the [0, 1] range check (eigenvalues of a
  /// symmetric transition may fall outside it).
  static TransitionMatrix diagonal_unchecked(Vector coeffs);

  Kind kind() const { return kind_; }
  bool is_diagonal() const { return kind_ == Kind::kDiagonal; }
  Eigen::Index size() const { return kind_ == Kind::kDiagonal ? coeffs_.size() : sym_.rows(); }
  const Vector& coeffs() const { return coeffs_; }
  const Matrix& sym() const { return sym_; }
  Matrix dense() const;

  /// R * X.
  Matrix apply(const Matrix& x) const;
  /// R' * X.
  Matrix apply_transpose(const Matrix& x) const;

 private:
  TransitionMatrix(Kind kind, Vector coeffs, Matrix sym)
      : kind_(kind), coeffs_(std::move(coeffs)), sym_(std::move(sym)) {}

  Kind kind_;
  Vector coeffs_;
  Matrix sym_;
};

struct IdentityTransition {};
struct GaussianTransition {
  double mean = 0.5;
  double stddev = 0.25;
};
struct ExplicitTransition {
  Vector coeffs;
};
using TransitionSpec = std::variant<IdentityTransition, GaussianTransition, ExplicitTransition>;

/// Gaussian-kernel graph on fixed coordinates.
Graph rgg_from_coords(const Matrix& coords, double sigma, double threshold);

/// Symmetric k-nearest-neighbour graph on fixed coordinates, weight 1/d.
/// Coincident points are rejected.
Graph knn_graph_from_coords(const Matrix& coords, Eigen::Index k);

/// Random geometric graph on the unit square with Gaussian-kernel weights
/// exp(-d^2 / (2 sigma^2)) kept only above `threshold`. Coordinates are
/// redrawn until the graph is connected.
Graph generate_rgg(Eigen::Index n, double sigma, double threshold, Rng& rng);

/// Random points on the unit square joined to their k nearest neighbours
/// (symmetric union), weight 1/d.
Graph generate_grid(Eigen::Index n, Eigen::Index k, Rng& rng);

TransitionMatrix sample_transition(const TransitionSpec& spec, Eigen::Index n, Rng& rng);

struct GeneratedSignals {
  SignalMatrix x;  // clean
  SignalMatrix y;  // noisy observations
};

/// x_0 = v_0, x_t = R x_{t-1} + v_t, y_t = x_t + n_t, t = 1..m, where
/// v_t = U_(rank) z_t and z_t has variance 1/lambda_i on the nonzero
/// eigenvalues among the `rank` smallest (zero on the null space).
///
/// Draw order: z_0, z_1, ..., z_m (rank components each, skipped for null
/// components), then the noise column by column.
GeneratedSignals generate_signals(const CglMatrix& l, const TransitionMatrix& r,
                                  Eigen::Index rank, Eigen::Index m, double sigma_n, Rng& rng);

/// D(X) = [x_1, x_2 - R x_1, ..., x_m - R x_{m-1}].
SignalMatrix weighted_difference(const SignalMatrix& x, const TransitionMatrix& r);

/// D*(G): adjoint of weighted_difference, column t = g_t - R' g_{t+1}.
SignalMatrix weighted_difference_adjoint(const SignalMatrix& g, const TransitionMatrix& r);

struct SymmetricTransform {
  SignalMatrix y_tilde;     // Q' Y
  TransitionMatrix lambda;  // diagonal eigenvalues of R
  Matrix q;                 // orthonormal eigenvectors of R
};

/// Diagonalizes a symmetric transition R = Q Lambda Q' and rotates the
/// observations into its eigenbasis.
SymmetricTransform symmetric_transition_transform(const SignalMatrix& y,
                                                  const TransitionMatrix& r_sym);

}  // namespace gllrss
