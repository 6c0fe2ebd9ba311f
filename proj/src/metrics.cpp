#include "gllrss/metrics.hpp"

#include "gllrss/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace gllrss {

EdgeSet::EdgeSet(Eigen::Index n)
    : n_(n), present_(n > 1 ? static_cast<std::size_t>(n * (n - 1) / 2) : 0, false) {
  if (n < 1) throw ValidationError("edge set needs at least one vertex");
}

EdgeSet::EdgeSet(Eigen::Index n, std::vector<bool> present) : EdgeSet(n) {
  if (present.size() != present_.size()) {
    throw ValidationError("edge indicator length must be n(n-1)/2");
  }
  present_ = std::move(present);
}

std::size_t EdgeSet::index(Eigen::Index i, Eigen::Index j) const {
  if (i == j || i < 0 || j < 0 || i >= n_ || j >= n_) {
    throw ValidationError("edge index out of range");
  }
  if (i > j) std::swap(i, j);
  // Pairs before row i: sum_{a<i} (n-1-a).
  return static_cast<std::size_t>(i * (2 * n_ - i - 1) / 2 + (j - i - 1));
}

std::size_t EdgeSet::count() const {
  return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), true));
}

bool EdgeSet::contains(Eigen::Index i, Eigen::Index j) const { return present_[index(i, j)]; }

void EdgeSet::set(Eigen::Index i, Eigen::Index j, bool value) { present_[index(i, j)] = value; }

EdgeSet edges_from_laplacian(const CglMatrix& l, double tau_edge) {
  EdgeSet e(l.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    for (Eigen::Index j = i + 1; j < l.size(); ++j) {
      if (-l(i, j) > tau_edge) e.set(i, j);
    }
  }
  return e;
}

PrfScores edge_prf(const EdgeSet& learned, const EdgeSet& truth) {
  if (learned.vertices() != truth.vertices()) {
    throw ValidationError("edge sets have different vertex counts");
  }
  PrfScores s;
  const auto& a = learned.indicator();
  const auto& b = truth.indicator();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] && b[k]) ++s.true_positives;
    if (a[k] && !b[k]) ++s.false_positives;
    if (!a[k] && b[k]) ++s.false_negatives;
  }
  const auto tp = static_cast<double>(s.true_positives);
  s.learned_empty = s.true_positives + s.false_positives == 0;
  s.truth_empty = s.true_positives + s.false_negatives == 0;
  s.precision = s.learned_empty ? 0.0 : tp / (tp + static_cast<double>(s.false_positives));
  s.recall = s.truth_empty ? 0.0 : tp / (tp + static_cast<double>(s.false_negatives));
  s.f_measure = (s.precision + s.recall > 0.0)
                    ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                    : 0.0;
  return s;
}

NmiScore nmi_edges(const EdgeSet& learned, const EdgeSet& truth, NmiNormalization norm) {
  if (learned.vertices() != truth.vertices()) {
    throw ValidationError("edge sets have different vertex counts");
  }
  const auto& a = learned.indicator();
  const auto& b = truth.indicator();
  if (a.empty()) throw ValidationError("NMI needs at least one vertex pair");

  std::array<std::array<double, 2>, 2> joint{};
  for (std::size_t k = 0; k < a.size(); ++k) joint[a[k] ? 1 : 0][b[k] ? 1 : 0] += 1.0;
  const auto total = static_cast<double>(a.size());
  std::array<double, 2> pa{(joint[0][0] + joint[0][1]) / total,
                           (joint[1][0] + joint[1][1]) / total};
  std::array<double, 2> pb{(joint[0][0] + joint[1][0]) / total,
                           (joint[0][1] + joint[1][1]) / total};

  auto entropy = [](const std::array<double, 2>& p) {
    double h = 0.0;
    for (double v : p) {
      if (v > 0.0) h -= v * std::log(v);
    }
    return h;
  };
  const double ha = entropy(pa);
  const double hb = entropy(pb);
  if (ha == 0.0 || hb == 0.0) {
    return {a == b ? 1.0 : 0.0, true};
  }

  double mi = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double pij = joint[i][j] / total;
      if (pij > 0.0) mi += pij * std::log(pij / (pa[i] * pb[j]));
    }
  }
  const double denom = norm == NmiNormalization::kMean ? 0.5 * (ha + hb) : std::sqrt(ha * hb);
  return {std::clamp(mi / denom, 0.0, 1.0), false};
}

double gse(const CglMatrix& l_hat, const CglMatrix& l_true) {
  if (l_hat.size() != l_true.size()) throw ValidationError("gse: size mismatch");
  const double denom = l_true.matrix().norm();
  if (!(denom > 0.0)) throw ValidationError("gse: ground-truth Laplacian has zero norm");
  return (l_hat.matrix() - l_true.matrix()).norm() / denom;
}

double lce(const SignalMatrix& x_hat, const SignalMatrix& x_true) {
  if (x_hat.rows() != x_true.rows() || x_hat.cols() != x_true.cols()) {
    throw ValidationError("lce: shape mismatch");
  }
  const double denom = x_true.norm();
  if (!(denom > 0.0)) throw ValidationError("lce: ground-truth signal has zero norm");
  return (x_hat - x_true).norm() / denom;
}

MetricsReport score(const CglMatrix& l_hat, const CglMatrix& l_true, double tau_edge,
                    const SignalMatrix* x_hat, const SignalMatrix* x_true,
                    NmiNormalization norm) {
  const EdgeSet learned = edges_from_laplacian(l_hat, tau_edge);
  const EdgeSet truth = edges_from_laplacian(l_true, tau_edge);
  const PrfScores prf = edge_prf(learned, truth);
  const NmiScore nmi = nmi_edges(learned, truth, norm);

  MetricsReport rep;
  rep.precision = prf.precision;
  rep.recall = prf.recall;
  rep.f_measure = prf.f_measure;
  rep.learned_empty = prf.learned_empty;
  rep.truth_empty = prf.truth_empty;
  rep.nmi = nmi.value;
  rep.nmi_degenerate = nmi.degenerate;
  rep.gse = gse(l_hat, l_true);
  if (x_hat != nullptr && x_true != nullptr) rep.lce = lce(*x_hat, *x_true);
  return rep;
}

}  // namespace gllrss
