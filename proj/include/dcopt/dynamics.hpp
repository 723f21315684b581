#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcopt/costs.hpp"
#include "dcopt/graph.hpp"

namespace dcopt {

/// One agent's (x_i, v_i, w_i, sigma_i).
struct AgentState {
  Eigen::VectorXd x;  // decision variable, R^n
  Eigen::VectorXd v;  // integral-action auxiliary, R^n
  Eigen::VectorXd w;  // running estimate of the left eigenvector, R^N
  double sigma = 1.0;
};

/// Stacked states of all N agents. Also used to hold time derivatives, in
/// which case `time` is unused.
struct NetworkState {
  std::vector<AgentState> agents;
  double time = 0.0;

  int num_agents() const { return static_cast<int>(agents.size()); }
  int dimension() const {
    return agents.empty() ? 0 : static_cast<int>(agents.front().x.size());
  }

  /// this += h * d, component-wise over x, v, w, sigma.
  void AddScaled(const NetworkState& d, double h);
  /// Zero-valued state with the same shape.
  NetworkState ZerosLike() const;
  bool AllFinite() const;

  /// Agent i's x in row i.
  Eigen::MatrixXd XMatrix() const;
  Eigen::MatrixXd VMatrix() const;
  /// Agent i's w in row i; the stacked w of the compact form is its row-major
  /// flattening.
  Eigen::MatrixXd WMatrix() const;
  Eigen::VectorXd Sigmas() const;
  /// Diagonal entries w_i^i.
  Eigen::VectorXd SelfWeights() const;
  std::vector<Eigen::VectorXd> Xs() const;
};

/// x_i, v_i free; w_i = e_i (i-th basis vector of R^N); sigma_i = sigma0[i].
/// Throws std::invalid_argument on a nonpositive sigma0 entry or mismatched
/// sizes.
NetworkState InitialState(const std::vector<Eigen::VectorXd>& x0,
                          const std::vector<Eigen::VectorXd>& v0,
                          const std::vector<double>& sigma0);

class IntegrationFault : public std::runtime_error {
 public:
  enum class Kind { kPositivity, kNonFinite };
  IntegrationFault(Kind kind, int agent, double time, const std::string& what)
      : std::runtime_error(what), kind_(kind), agent_(agent), time_(time) {}
  Kind kind() const { return kind_; }
  /// Offending agent, 0-indexed; -1 when not attributable.
  int agent() const { return agent_; }
  double time() const { return time_; }

 private:
  Kind kind_;
  int agent_;
  double time_;
};

/// e_i = sum_j a_ij (x_i - x_j), one row per agent; equals L * X.
Eigen::MatrixXd ConsensusErrors(const NetworkState& state, const Digraph& g);

/// The adaptive distributed flow. For each agent, with e_i the consensus
/// error and rho_i = e_i^T e_i evaluated from the current state:
///
///   x_i' = -grad f_i(x_i) / w_i^i - (sigma_i + rho_i) e_i - sum_j a_ij (v_i - v_j)
///   v_i' = (sigma_i + rho_i) e_i
///   w_i' = -sum_j a_ij (w_i - w_j)
///   sigma_i' = e_i^T e_i
///
/// rho_i is a memoryless gain, not an integrated state. When `fixed_weights`
/// is set, 1/w_i^i is replaced by 1/fixed_weights_i; passing xi gives the
/// unperturbed flow used in the stability analysis.
class NetworkDynamics {
 public:
  NetworkDynamics(Digraph graph, CostList costs,
                  std::optional<Eigen::VectorXd> fixed_weights = std::nullopt);

  /// Throws IntegrationFault (kPositivity) when a divisor w_i^i <= 0 and
  /// (kNonFinite) when a gradient is not finite.
  NetworkState operator()(const NetworkState& state) const;

  const Digraph& graph() const { return graph_; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }
  const CostList& costs() const { return costs_; }
  const std::optional<Eigen::VectorXd>& fixed_weights() const {
    return fixed_weights_;
  }

 private:
  Digraph graph_;
  Eigen::MatrixXd laplacian_;
  CostList costs_;
  std::optional<Eigen::VectorXd> fixed_weights_;
};

/// Same field assembled from the stacked compact form with dense Kronecker
/// products:
///   x' = -(W^-1 ⊗ I_n) grad f(x) - ((C + B) L ⊗ I_n) x - (L ⊗ I_n) v
///   v' = ((C + B) L ⊗ I_n) x
///   w' = -(L ⊗ I_N) w
/// Independent of NetworkDynamics; used to cross-check it.
NetworkState CompactFormField(
    const NetworkState& state, const Digraph& g, const CostList& costs,
    const std::optional<Eigen::VectorXd>& fixed_weights = std::nullopt);

/// zeta = (L ⊗ I_n)(x - x_bar) and eta = (L ⊗ I_n)(v - v_bar), one row per
/// agent.
struct ErrorCoordinates {
  Eigen::MatrixXd zeta;
  Eigen::MatrixXd eta;

  Eigen::VectorXd StackedZeta() const;
  Eigen::VectorXd StackedEta() const;
};

/// `x_bar` and `v_bar` hold one agent per row.
ErrorCoordinates ComputeErrorCoordinates(const NetworkState& state,
                                         const Eigen::MatrixXd& x_bar,
                                         const Eigen::MatrixXd& v_bar,
                                         const Digraph& g);

/// Row-major flattening: agent blocks of length cols.
Eigen::VectorXd Flatten(const Eigen::MatrixXd& per_agent_rows);
Eigen::MatrixXd Unflatten(const Eigen::VectorXd& stacked, int rows);

}  // namespace dcopt
