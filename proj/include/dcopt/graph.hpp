#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dcopt {

/// Weighted directed graph on nodes 0..N-1.
///
/// Stored as an adjacency matrix where `adjacency(i, j) > 0` means an edge
/// from j to i: agent i receives information from agent j.
class Digraph {
 public:
  /// Throws std::invalid_argument on a non-square matrix, a negative weight or
  /// a nonzero diagonal entry.
  explicit Digraph(Eigen::MatrixXd adjacency);

  /// Unit-weight graph from (src, dst) pairs, 0-indexed.
  static Digraph FromEdges(int n_agents,
                           const std::vector<std::pair<int, int>>& edges);

  /// Edge list text: one `src dst [weight]` triple per line, 1-indexed.
  /// Blank lines and lines starting with '#' are skipped. If `n_agents` is 0
  /// the node count is the largest index seen.
  static Digraph FromEdgeListText(const std::string& text, int n_agents = 0);
  static Digraph FromEdgeListFile(const std::filesystem::path& path,
                                  int n_agents = 0);

  int size() const { return static_cast<int>(adjacency_.rows()); }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  double weight(int i, int j) const { return adjacency_(i, j); }

  /// Edge list text in the same format FromEdgeListText accepts.
  std::string ToEdgeListText() const;

 private:
  Eigen::MatrixXd adjacency_;
};

/// Graph Laplacian: l_ii = sum_j a_ij, l_ij = -a_ij. Rows sum to zero.
Eigen::MatrixXd BuildLaplacian(const Digraph& g);

/// Every node reaches every other along directed edges (Tarjan SCC).
bool IsStronglyConnected(const Digraph& g);

/// 1^T L = 0 within `tol` (in-weight equals out-weight at every node).
bool IsBalanced(const Digraph& g, double tol = 1e-12);

/// Positive unit-sum xi with xi^T L = 0.
///
/// Null space of L^T taken from a dense eigendecomposition. Throws
/// std::domain_error when the zero eigenvalue is not simple or the vector is
/// not strictly positive (graph not strongly connected).
Eigen::VectorXd LeftEigenvector(const Eigen::MatrixXd& laplacian,
                                double zero_tol = 1e-9);

struct SpectralCertificate {
  Eigen::VectorXd xi;
  double lambda2_bar = 0.0;  // second smallest eigenvalue of RL + L^T R
  double lambdaN_bar = 0.0;  // largest eigenvalue of L^T L
  double lambda2_LtL = 0.0;  // second smallest eigenvalue of L^T L
  double lambda1_bar = 0.0;  // smallest eigenvalue of RL + L^T R, ~0
};

/// L̄ = R L + L^T R with R = diag(xi).
Eigen::MatrixXd SymmetrizedLaplacian(const Eigen::MatrixXd& laplacian,
                                     const Eigen::VectorXd& xi);

/// Throws std::domain_error if lambda2_bar or lambda2_LtL is not positive.
SpectralCertificate ComputeSpectralCertificate(const Eigen::MatrixXd& laplacian,
                                               const Eigen::VectorXd& xi);

/// exp(-L t) by Padé scaling and squaring.
Eigen::MatrixXd LaplacianExponential(const Eigen::MatrixXd& laplacian, double t);

struct ExponentialEntryViolation {
  double t = 0.0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct ExponentialLimitReport {
  std::vector<double> times;
  std::vector<double> min_entry;         // min over all entries, per t
  std::vector<double> min_diagonal;      // min over diagonal, per t
  std::vector<double> limit_deviation;   // max |exp(-Lt) - 1 xi^T|, per t
  std::vector<ExponentialEntryViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks exp(-Lt) >= -entry_tol entrywise with positive diagonal on every t
/// in `t_grid`, and reports the distance to the limit 1 xi^T.
ExponentialLimitReport CheckExponentialLimit(const Eigen::MatrixXd& laplacian,
                                             const Eigen::VectorXd& xi,
                                             const std::vector<double>& t_grid,
                                             double entry_tol = 1e-12);

/// Five-agent unbalanced topology used by both built-in experiments, unit
/// weights: 1->2, 2->3, 3->4, 4->5, 2->5, 5->1, 3->1 (1-indexed).
Digraph Fig1Digraph();

/// Bidirectional ring on n nodes with unit weights (balanced).
Digraph SymmetricCycle(int n);

}  // namespace dcopt
