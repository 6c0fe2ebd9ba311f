#pragma once

// Edge-recovery and reconstruction-error measures.

#include "gllrss/graph.hpp"

#include <optional>
#include <vector>

namespace gllrss {

/// Presence indicator over the n(n-1)/2 unordered vertex pairs, ordered
/// (0,1), (0,2), ..., (0,n-1), (1,2), ...
class EdgeSet {
 public:
  explicit EdgeSet(Eigen::Index n);
  EdgeSet(Eigen::Index n, std::vector<bool> present);

  Eigen::Index vertices() const { return n_; }
  std::size_t pairs() const { return present_.size(); }
  std::size_t count() const;

  bool contains(Eigen::Index i, Eigen::Index j) const;
  void set(Eigen::Index i, Eigen::Index j, bool value = true);
  const std::vector<bool>& indicator() const { return present_; }

 private:
  std::size_t index(Eigen::Index i, Eigen::Index j) const;

  Eigen::Index n_;
  std::vector<bool> present_;
};

constexpr double kDefaultEdgeThreshold = 1e-4;

/// Pair (i, j) is present iff -L(i, j) > tau_edge.
EdgeSet edges_from_laplacian(const CglMatrix& l, double tau_edge = kDefaultEdgeThreshold);

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  bool learned_empty = false;  // precision reported as 0
  bool truth_empty = false;    // recall and F undefined, reported as 0
};

PrfScores edge_prf(const EdgeSet& learned, const EdgeSet& truth);

enum class NmiNormalization { kMean, kSqrtProduct };

struct NmiScore {
  double value = 0.0;
  bool degenerate = false;  // one labeling had zero entropy
};

/// Each unordered pair is an item labelled present/absent in both sets.
NmiScore nmi_edges(const EdgeSet& learned, const EdgeSet& truth,
                   NmiNormalization norm = NmiNormalization::kMean);

/// |L_hat - L_0|_F / |L_0|_F.
double gse(const CglMatrix& l_hat, const CglMatrix& l_true);

/// |X_hat - X_0|_F / |X_0|_F.
double lce(const SignalMatrix& x_hat, const SignalMatrix& x_true);

struct MetricsReport {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f_measure;
  std::optional<double> nmi;
  std::optional<double> gse;
  std::optional<double> lce;
  bool learned_empty = false;
  bool truth_empty = false;
  bool nmi_degenerate = false;
};

/// Every measure that the inputs allow; lce only when both X are given.
MetricsReport score(const CglMatrix& l_hat, const CglMatrix& l_true, double tau_edge,
                    const SignalMatrix* x_hat = nullptr, const SignalMatrix* x_true = nullptr,
                    NmiNormalization norm = NmiNormalization::kMean);

}  // namespace gllrss
