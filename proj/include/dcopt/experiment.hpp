#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcopt/analysis.hpp"
#include "dcopt/costs.hpp"
#include "dcopt/graph.hpp"
#include "dcopt/integrator.hpp"

namespace dcopt {

/// Experiment description. Text form is one `key = value` per line, '#'
/// starts a comment, lists are whitespace separated and agent blocks are
/// separated by ';'.
///
///   graph               fig1 | cycle:<N> | path to an edge-list file
///   costs               example1 | example2 | quadratic
///   quadratic           `<scale> <c_1> ... <c_n>`, one line per agent
///   n                   decision dimension (checked against the cost set)
///   seed                RNG seed for initial conditions and data
///   step, t_end, stride, min_step   integrator settings
///   sigma0              one value for all agents, or one per agent
///   init_range          `lo hi` for uniformly drawn x(0), v(0)
///   x0, v0              explicit initial states, `a b; c d; ...`
///   mu, huber_tolerance, covariance_scale, samples_per_sensor
///                       Gaussian data set for example2; sensor i draws from
///                       N(mu, covariance_scale * i * I)
///   oracle_grid         `lo hi per_axis` multi-start grid for s*
///   output_dir          where `run` writes its files
struct ExperimentConfig {
  std::string graph = "fig1";
  std::string costs = "example1";
  int n = 2;
  std::uint64_t seed = 1;
  IntegratorConfig integrator;
  std::vector<double> sigma0 = {1.0};
  double init_lo = -5.0;
  double init_hi = 5.0;
  std::optional<std::vector<Eigen::VectorXd>> x0;
  std::optional<std::vector<Eigen::VectorXd>> v0;

  std::vector<double> mu = {1.0, 2.0, 3.0};
  double huber_tolerance = 0.5;
  double covariance_scale = 0.01;
  int samples_per_sensor = 500;

  std::vector<std::pair<double, Eigen::VectorXd>> quadratics;  // (scale, center)

  double oracle_lo = -10.0;
  double oracle_hi = 10.0;
  int oracle_per_axis = 5;

  std::string output_dir = "out";
  /// Directory relative paths in the config resolve against.
  std::filesystem::path base_dir;

  /// Full text form; ParseConfig(ToText()) reproduces this config.
  std::string ToText() const;
};

/// Throws std::invalid_argument on unknown keys or malformed values.
ExperimentConfig ParseConfig(const std::string& text,
                             const std::filesystem::path& base_dir = {});
ExperimentConfig LoadConfig(const std::filesystem::path& path);

/// Defaults of the nonconvex benchmark: five-agent digraph, the five R^2 costs,
/// sigma_i(0) = 1, t_end = 100, h = 1e-3.
ExperimentConfig Example1Config();
/// Defaults of the Huber estimation benchmark: mu = [1,2,3], tolerance 0.5,
/// covariance 0.01 i, 500 samples per sensor, t_end = 100.
ExperimentConfig Example2Config();
/// `example1` / `example2`; nullopt for other names.
std::optional<ExperimentConfig> BuiltinConfig(const std::string& name);

/// Per-sensor Gaussian data sets. Sensor i (1-indexed) draws `count` vectors
/// from N(mu, scales[i-1] * I) using PortableRng(seed): coordinates in order,
/// polar-method normals scaled by sqrt(scale).
std::vector<HuberSpec> GenerateGaussianData(std::uint64_t seed,
                                            const std::vector<double>& mu,
                                            const std::vector<double>& scales,
                                            int count, double tolerance);

/// Everything a run needs, resolved from a config: the validated graph, the
/// cost set, and the oracles.
struct Experiment {
  ExperimentConfig config;
  Digraph graph;
  Eigen::MatrixXd laplacian;
  CostList costs;
  std::vector<HuberSpec> datasets;  // example2 only
  Eigen::VectorXd xi;
  SpectralCertificate certificate;
  MinimizerResult oracle;  // centralized minimizer of the global cost
};

/// Thrown when the communication graph violates the strong connectivity
/// precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Builds graph, costs and oracles. Throws PreconditionError when the graph is
/// not strongly connected.
Experiment BuildExperiment(const ExperimentConfig& config);

/// Initial network state: explicit x0/v0 when given, otherwise uniform draws
/// on [init_lo, init_hi]^n from the init stream (x_1, v_1, x_2, v_2, ...).
NetworkState MakeInitialState(const Experiment& exp);

/// Seed of the init stream; the data stream uses the seed itself.
std::uint64_t InitStreamSeed(std::uint64_t seed);

struct RunResult {
  Experiment experiment;
  Trajectory trajectory;
  TrajectoryReport report;
  LyapunovConstants constants;  // unperturbed certificate, w_check = min xi
  StationaryPair pair;
};

RunResult RunExperiment(const ExperimentConfig& config);
RunResult RunExample1(const ExperimentConfig& overrides = Example1Config());
RunResult RunExample2(const ExperimentConfig& overrides = Example2Config());

/// max_i |x_i^k - mu^k| for each coordinate k at one state.
Eigen::VectorXd PerCoordinateError(const NetworkState& state,
                                   const std::vector<double>& mu);

}  // namespace dcopt
