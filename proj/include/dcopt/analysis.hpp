#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcopt/costs.hpp"
#include "dcopt/dynamics.hpp"
#include "dcopt/graph.hpp"
#include "dcopt/integrator.hpp"

namespace dcopt {

struct ConvergenceReport {
  double time = 0.0;
  double consensus_error = 0.0;      // max_{i,j} ||x_i - x_j||
  double optimality_residual = 0.0;  // ||sum_i grad f_i(x_hat)||, x_hat xi-weighted mean
  double distance_to_oracle = 0.0;   // max_i ||x_i - s*||
  double w_error = 0.0;              // max_i ||w_i - xi||
  std::vector<double> sigma_final;
};

/// xi-weighted mean of the agent states.
Eigen::VectorXd WeightedMean(const NetworkState& state, const Eigen::VectorXd& xi);

double OptimalityResidual(const NetworkState& state, const CostList& costs,
                          const Eigen::VectorXd& xi);

ConvergenceReport MakeConvergenceReport(const NetworkState& state,
                                        const Eigen::VectorXd& s_star,
                                        const Eigen::VectorXd& xi,
                                        const CostList& costs);

/// Metric time series over the recorded states of a run.
struct MetricSeries {
  std::vector<double> times;
  std::vector<double> consensus_error;
  std::vector<double> optimality_residual;
  std::vector<double> distance_to_oracle;
  std::vector<double> w_error;
  std::vector<double> lyapunov;  // empty unless requested
};

/// Final-state report plus the series over every record.
struct TrajectoryReport {
  ConvergenceReport final;
  MetricSeries series;
};

/// The consensus point x_bar = 1 ⊗ s* with the minimum-norm v_bar solving
///   (L ⊗ I_n) v_bar = -(R^-1 ⊗ I_n) grad f(x_bar),
/// i.e. the stationary pair of the compact flow with W^-1 = R^-1. One agent
/// per row.
struct StationaryPair {
  Eigen::MatrixXd x_bar;
  Eigen::MatrixXd v_bar;
  double solve_residual = 0.0;  // max abs of the linear system residual
};

StationaryPair ComputeStationaryPair(const Digraph& g, const CostList& costs,
                                     const Eigen::VectorXd& s_star,
                                     const Eigen::VectorXd& xi);

/// Max abs entry of the unperturbed compact field at (x_bar, v_bar) with
/// w_i = xi and the given gains. Zero in exact arithmetic for any gains.
double StationaryFieldResidual(const StationaryPair& pair, const Digraph& g,
                               const CostList& costs, const Eigen::VectorXd& xi,
                               const std::vector<double>& sigmas);

/// Constants of the stability certificate.
struct LyapunovConstants {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double sigma_zero = 0.0;  // 1 + omega1 + omega2 + N / (2 lambda2)
  double epsilon = 0.0;     // weight of V3: 33 N lambdaN / lambda2^2
  double varrho = 0.0;
  double kappa = 0.0;
  double l_hat = 0.0;       // max_i l_i
  double w_check = 0.0;     // lower bound on w_i^i
  double eta_weight = 0.0;  // 17 N lambdaN / (4 lambda2), the ||eta||^2 rate
};

/// Plug-in evaluation from the spectral certificate and Lipschitz hints.
/// Throws std::invalid_argument when a cost declares no Lipschitz hint or
/// w_check <= 0.
LyapunovConstants ComputeLyapunovConstants(const SpectralCertificate& cert,
                                           const CostList& costs, double w_check,
                                           int n_agents);

/// Same formulas from raw inputs.
LyapunovConstants ComputeLyapunovConstants(double lambda2_bar, double lambdaN_bar,
                                           double lambda2_LtL, double l_hat,
                                           double w_check, int n_agents);

struct LyapunovTerms {
  double v1 = 0.0;  // ½ Σ (σ_i − σ0)²
  double v2 = 0.0;  // ½ Σ ξ_i (2σ_i + ρ_i) ζ_iᵀζ_i,  ρ_i = ζ_iᵀζ_i
  double v3 = 0.0;  // ½ (ζ+η)ᵀ (R ⊗ I_n) (ζ+η)
  double total = 0.0;  // v1 + v2 + epsilon v3
};

LyapunovTerms LyapunovValue(const ErrorCoordinates& ec, const Eigen::VectorXd& sigmas,
                            const Eigen::VectorXd& xi, double sigma_zero,
                            const SpectralCertificate& cert);

struct DecreaseCheckOptions {
  double substep = 1e-6;       // half-width of the central difference in time
  double relative_slack = 1e-4;  // slack = relative_slack * (1 + |Vdot|)
};

struct DecreaseSample {
  int index = 0;
  double v = 0.0;
  double vdot = 0.0;
  double bound = 0.0;  // -||zeta||^2 - eta_weight ||eta||^2
  double slack = 0.0;
  bool ok = true;
  std::string dump;  // full state, filled for violations
};

struct DecreaseCheckReport {
  std::vector<DecreaseSample> samples;
  int violations = 0;
  double worst_margin = 0.0;  // max over samples of vdot - bound - slack
  bool ok() const { return violations == 0; }
};

/// For each sample, estimates dV/dt along the unperturbed flow (1/w_i^i
/// replaced by 1/xi_i) by a central difference of two short RK4 steps, and
/// checks dV/dt <= -||zeta||^2 - eta_weight ||eta||^2 + slack.
DecreaseCheckReport CheckLyapunovDecrease(const std::vector<NetworkState>& samples,
                                          const StationaryPair& pair,
                                          const Digraph& g, const CostList& costs,
                                          const SpectralCertificate& cert,
                                          const LyapunovConstants& constants,
                                          const DecreaseCheckOptions& options = {});

/// Random states around the stationary pair: x = x_bar + x_perp with x_perp
/// zero-mean across agents (no consensus component), v = v_bar + noise,
/// sigma_i uniform in [sigma_lo, sigma_hi], w_i = xi. Perturbation radii are
/// drawn log-uniformly in [radius_lo, radius_hi].
std::vector<NetworkState> SampleStatesNearStationary(
    const StationaryPair& pair, const Eigen::VectorXd& xi, int count,
    std::uint64_t seed, double radius_lo = 1e-2, double radius_hi = 1.0,
    double sigma_lo = 0.1, double sigma_hi = 50.0);

/// ||zeta||^2 - lambda2(L^T L) ||x_perp||^2, where x_perp is x - x_bar with
/// its per-coordinate agent mean removed. Nonnegative up to rounding.
double ZetaProjectionMargin(const NetworkState& state, const StationaryPair& pair,
                            const Digraph& g, double lambda2_LtL);

struct SeriesOptions {
  bool lyapunov = false;
  StationaryPair pair;           // required when lyapunov is set
  SpectralCertificate cert;      // required when lyapunov is set
  double sigma_zero = 0.0;
};

TrajectoryReport MakeTrajectoryReport(const std::vector<NetworkState>& records,
                                      const NetworkState& final_state,
                                      const Eigen::VectorXd& s_star,
                                      const Eigen::VectorXd& xi,
                                      const CostList& costs, const Digraph& g,
                                      const SeriesOptions& options = {});

}  // namespace dcopt
