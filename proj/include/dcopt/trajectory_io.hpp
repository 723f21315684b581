#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "dcopt/experiment.hpp"

namespace dcopt {

/// `t,x_1_1,...,x_N_n,v_1_1,...,v_N_n,sigma_1,...,sigma_N,consensus_error,
/// optimality_residual,w_error`.
std::string TrajectoryCsvHeader(int n_agents, int dim);

/// One row per record, numbers printed with %.17g so they round-trip. The
/// metric columns come from `series`, which must cover the same records.
void WriteTrajectoryCsv(std::ostream& out, const std::vector<NetworkState>& records,
                        const MetricSeries& series);

/// Rows of a trajectory CSV. w is not stored; it is a deterministic function
/// of t (row i of exp(-L t)) and is rebuilt from the graph when needed.
struct TrajectoryTable {
  int n_agents = 0;
  int dim = 0;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> x;  // per record, one agent per row
  std::vector<Eigen::MatrixXd> v;
  std::vector<Eigen::VectorXd> sigma;
  std::vector<double> consensus_error;
  std::vector<double> optimality_residual;
  std::vector<double> w_error;
};

/// Throws std::invalid_argument on a malformed header or row.
TrajectoryTable ReadTrajectoryCsv(std::istream& in);

/// Records with w_i(t) = row i of exp(-L t), the exact solution of the
/// w-dynamics from the basis initial condition.
std::vector<NetworkState> RebuildStates(const TrajectoryTable& table,
                                        const Eigen::MatrixXd& laplacian);

/// Report schema (all keys always present unless noted):
///   config              echo of the text config
///   graph               {agents, edges, strongly_connected, balanced}
///   xi, certificate     left eigenvector and spectral quantities
///   oracle              {s_star, value, gradient_norm, optimality_residual}
///   constants           Lyapunov certificate constants
///   stationary_pair     {x_bar, v_bar, solve_residual, field_residual}
///   initial_state       {x0, v0, sigma0}
///   integrator          {step, t_end, stride, records, halvings,
///                        smallest_step, min_self_weight, max_sigma_drop}
///   final               ConvergenceReport at t_end
///   series              {t, consensus_error, optimality_residual,
///                        distance_to_oracle, w_error, lyapunov}
///   per_coordinate_error  example2 only: {final, first_time_below_0.02}
nlohmann::json MakeReportJson(const RunResult& run);

nlohmann::json ToJson(const SpectralCertificate& cert);
nlohmann::json ToJson(const LyapunovConstants& c);
nlohmann::json ToJson(const ConvergenceReport& r);
nlohmann::json ToJson(const MetricSeries& s);

/// `sensor,sample,q_1,...,q_n` rows.
void WriteDatasetCsv(std::ostream& out, const std::vector<HuberSpec>& data);

/// Writes trajectory.csv, report.json and (example2) dataset.csv into `dir`.
void WriteRunOutputs(const RunResult& run, const std::filesystem::path& dir);

/// First record time at which every agent is within `bound` of mu in every
/// coordinate, or a negative value if never.
double FirstTimeWithin(const std::vector<NetworkState>& records,
                       const std::vector<double>& mu, double bound);

}  // namespace dcopt
