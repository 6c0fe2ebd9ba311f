#include "gllrss/synth.hpp"

#include "gllrss/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace gllrss {

namespace {

constexpr int kConnectivityAttempts = 100;
constexpr int kTransitionRetries = 1000;
constexpr double kConnectedLambda2 = 1e-8;

Matrix uniform_coords(Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix c(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, 0) = unit(rng);
    c(i, 1) = unit(rng);
  }
  return c;
}

bool connected(const Graph& g) {
  if (g.size() == 1) return true;
  const Spectrum s = eigendecompose(laplacian_from_graph(g));
  return s.eigenvalues(1) > kConnectedLambda2;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// --- TransitionMatrix -------------------------------------------------------

TransitionMatrix TransitionMatrix::identity(Eigen::Index n) {
  return TransitionMatrix(Kind::kDiagonal, Vector::Ones(n), Matrix());
}

TransitionMatrix TransitionMatrix::diagonal(Vector coeffs) {
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    if (!(coeffs(i) >= 0.0 && coeffs(i) <= 1.0)) {
      std::ostringstream os;
      os << "transition coefficient " << i << " = " << coeffs(i) << " is outside [0, 1]";
      throw ValidationError(os.str());
    }
  }
  return TransitionMatrix(Kind::kDiagonal, std::move(coeffs), Matrix());
}

TransitionMatrix TransitionMatrix::diagonal_unchecked(Vector coeffs) {
  if (!coeffs.allFinite()) throw ValidationError("transition coefficients must be finite");
  return TransitionMatrix(Kind::kDiagonal, std::move(coeffs), Matrix());
}

TransitionMatrix TransitionMatrix::symmetric(Matrix sym) {
  if (sym.rows() != sym.cols()) throw ValidationError("transition matrix must be square");
  if (!sym.allFinite()) throw ValidationError("transition matrix must be finite");
  if (sym.size() > 0 && (sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("transition matrix is not symmetric");
  }
  Matrix s = 0.5 * (sym + sym.transpose());
  return TransitionMatrix(Kind::kSymmetric, Vector(), std::move(s));
}

Matrix TransitionMatrix::dense() const {
  if (is_diagonal()) return coeffs_.asDiagonal();
  return sym_;
}

Matrix TransitionMatrix::apply(const Matrix& x) const {
  if (x.rows() != size()) throw ValidationError("transition size does not match signal rows");
  if (is_diagonal()) return coeffs_.asDiagonal() * x;
  return sym_ * x;
}

Matrix TransitionMatrix::apply_transpose(const Matrix& x) const {
  // Both representations are symmetric.
  return apply(x);
}

// --- Generators -------------------------------------------------------------

Graph rgg_from_coords(const Matrix& coords, double sigma, double threshold) {
  const Eigen::Index n = coords.rows();
  Matrix w = Matrix::Zero(n, n);
  const double two_sigma2 = 2.0 * sigma * sigma;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (coords.row(i) - coords.row(j)).squaredNorm();
      const double v = std::exp(-d2 / two_sigma2);
      if (v > threshold) w(i, j) = w(j, i) = v;
    }
  }
  return Graph(std::move(w), coords);
}

Graph knn_graph_from_coords(const Matrix& coords, Eigen::Index k) {
  const Eigen::Index n = coords.rows();
  if (!(k >= 1 && k < n)) throw ValidationError("knn graph requires 1 <= k < n");
  Matrix w = Matrix::Zero(n, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      dist[static_cast<std::size_t>(j)] = (coords.row(i) - coords.row(j)).norm();
    }
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::erase(order, i);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        const double da = dist[static_cast<std::size_t>(a)];
                        const double db = dist[static_cast<std::size_t>(b)];
                        return da < db || (da == db && a < b);
                      });
    for (Eigen::Index t = 0; t < k; ++t) {
      const Eigen::Index j = order[static_cast<std::size_t>(t)];
      const double d = dist[static_cast<std::size_t>(j)];
      if (!(d > 0.0)) throw ValidationError("duplicate coordinates give an infinite weight");
      w(i, j) = w(j, i) = 1.0 / d;
    }
  }
  return Graph(std::move(w), coords);
}

Graph generate_rgg(Eigen::Index n, double sigma, double threshold, Rng& rng) {
  if (n < 2) throw ValidationError("generate_rgg requires n >= 2");
  if (!(sigma > 0.0)) throw ValidationError("generate_rgg requires sigma > 0");
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw ValidationError("generate_rgg requires 0 <= threshold < 1");
  }
  for (int attempt = 0; attempt < kConnectivityAttempts; ++attempt) {
    Graph g = rgg_from_coords(uniform_coords(n, rng), sigma, threshold);
    if (connected(g)) return g;
  }
  throw SolverError("random geometric graph stayed disconnected after 100 attempts; "
                    "increase sigma or lower the threshold");
}

Graph generate_grid(Eigen::Index n, Eigen::Index k, Rng& rng) {
  if (!(k >= 1 && n > k)) throw ValidationError("generate_grid requires n > k >= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < kConnectivityAttempts; ++attempt) {
    Matrix c = uniform_coords(n, rng);
    // Resample any vertex that coincides with an earlier one.
    for (Eigen::Index i = 1; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        if (c.row(i) == c.row(j)) {
          c(i, 0) = unit(rng);
          c(i, 1) = unit(rng);
          j = -1;
        }
      }
    }
    Graph g = knn_graph_from_coords(c, k);
    if (connected(g)) return g;
  }
  throw SolverError("nearest-neighbour graph stayed disconnected after 100 attempts; "
                    "increase k");
}

TransitionMatrix sample_transition(const TransitionSpec& spec, Eigen::Index n, Rng& rng) {
  if (n < 1) throw ValidationError("sample_transition requires n >= 1");
  if (std::holds_alternative<IdentityTransition>(spec)) return TransitionMatrix::identity(n);
  if (const auto* e = std::get_if<ExplicitTransition>(&spec)) {
    if (e->coeffs.size() != n) throw ValidationError("explicit transition has wrong length");
    return TransitionMatrix::diagonal(e->coeffs);
  }
  const auto& g = std::get<GaussianTransition>(spec);
  if (!(g.stddev >= 0.0)) throw ValidationError("transition stddev must be >= 0");
  std::normal_distribution<double> normal(g.mean, g.stddev);
  Vector c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    int tries = 0;
    double v;
    do {
      if (++tries > kTransitionRetries) {
        throw ValidationError("transition sampling exceeded its retry budget; "
                              "the mean/stddev put too little mass in [0, 1)");
      }
      v = g.stddev == 0.0 ? g.mean : normal(rng);
    } while (!(v >= 0.0 && v < 1.0));
    c(i) = v;
  }
  return TransitionMatrix::diagonal(std::move(c));
}

GeneratedSignals generate_signals(const CglMatrix& l, const TransitionMatrix& r,
                                  Eigen::Index rank, Eigen::Index m, double sigma_n, Rng& rng) {
  const Eigen::Index n = l.size();
  if (r.size() != n) throw ValidationError("transition size does not match the graph");
  if (rank < 1 || rank > n) throw ValidationError("rank must lie in [1, N]");
  if (m < 1) throw ValidationError("need at least one time instant");
  if (!(sigma_n >= 0.0)) throw ValidationError("noise stddev must be >= 0");

  const Spectrum spec = eigendecompose(l);
  if (n > 1 && !(spec.eigenvalues(1) > kConnectedLambda2)) {
    throw ValidationError("signal generation requires a connected graph");
  }

  // Standard deviations of z along the leading `rank` eigenvectors.
  Vector scale = Vector::Zero(rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    const double lam = spec.eigenvalues(i);
    if (lam > kConnectedLambda2) scale(i) = 1.0 / std::sqrt(lam);
  }
  const Matrix basis = spec.eigenvectors.leftCols(rank);

  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw_v = [&]() {
    Vector z = Vector::Zero(rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
      if (scale(i) > 0.0) z(i) = scale(i) * normal(rng);
    }
    return Vector(basis * z);
  };

  GeneratedSignals out;
  out.x.resize(n, m);
  Vector prev = draw_v();
  for (Eigen::Index t = 0; t < m; ++t) {
    Vector next = r.apply(prev) + draw_v();
    out.x.col(t) = next;
    prev = std::move(next);
  }
  out.y = out.x;
  if (sigma_n > 0.0) {
    for (Eigen::Index t = 0; t < m; ++t) {
      for (Eigen::Index i = 0; i < n; ++i) out.y(i, t) += sigma_n * normal(rng);
    }
  }
  return out;
}

// --- Difference operator ----------------------------------------------------

SignalMatrix weighted_difference(const SignalMatrix& x, const TransitionMatrix& r) {
  if (x.rows() != r.size()) throw ValidationError("weighted_difference: dimension mismatch");
  SignalMatrix d = x;
  const Eigen::Index m = x.cols();
  if (m > 1) {
    if (r.is_diagonal()) {
      d.rightCols(m - 1).noalias() -= r.coeffs().asDiagonal() * x.leftCols(m - 1);
    } else {
      d.rightCols(m - 1).noalias() -= r.sym() * x.leftCols(m - 1);
    }
  }
  return d;
}

SignalMatrix weighted_difference_adjoint(const SignalMatrix& g, const TransitionMatrix& r) {
  if (g.rows() != r.size()) {
    throw ValidationError("weighted_difference_adjoint: dimension mismatch");
  }
  SignalMatrix a = g;
  const Eigen::Index m = g.cols();
  if (m > 1) {
    if (r.is_diagonal()) {
      a.leftCols(m - 1).noalias() -= r.coeffs().asDiagonal() * g.rightCols(m - 1);
    } else {
      a.leftCols(m - 1).noalias() -= r.sym().transpose() * g.rightCols(m - 1);
    }
  }
  return a;
}

SymmetricTransform symmetric_transition_transform(const SignalMatrix& y,
                                                  const TransitionMatrix& r_sym) {
  if (y.rows() != r_sym.size()) {
    throw ValidationError("symmetric_transition_transform: dimension mismatch");
  }
  const Matrix r = r_sym.dense();
  Eigen::SelfAdjointEigenSolver<Matrix> es(r);
  if (es.info() != Eigen::Success) throw SolverError("eigendecomposition of R failed");
  SymmetricTransform out{es.eigenvectors().transpose() * y,
                         TransitionMatrix::diagonal_unchecked(es.eigenvalues()),
                         es.eigenvectors()};
  return out;
}

}  // namespace gllrss
