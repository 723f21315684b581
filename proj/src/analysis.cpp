#include "dcopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dcopt/random.hpp"

namespace dcopt {

Eigen::VectorXd WeightedMean(const NetworkState& state, const Eigen::VectorXd& xi) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(state.dimension());
  for (int i = 0; i < state.num_agents(); ++i) m += xi(i) * state.agents[i].x;
  return m / xi.sum();
}

double OptimalityResidual(const NetworkState& state, const CostList& costs,
                          const Eigen::VectorXd& xi) {
  const Eigen::VectorXd x_hat = WeightedMean(state, xi);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x_hat.size());
  for (const auto& c : costs) g += c->Gradient(x_hat);
  return g.norm();
}

ConvergenceReport MakeConvergenceReport(const NetworkState& state,
                                        const Eigen::VectorXd& s_star,
                                        const Eigen::VectorXd& xi,
                                        const CostList& costs) {
  ConvergenceReport r;
  r.time = state.time;
  const int n_agents = state.num_agents();
  for (int i = 0; i < n_agents; ++i) {
    const AgentState& a = state.agents[i];
    for (int j = i + 1; j < n_agents; ++j) {
      r.consensus_error = std::max(r.consensus_error, (a.x - state.agents[j].x).norm());
    }
    r.distance_to_oracle = std::max(r.distance_to_oracle, (a.x - s_star).norm());
    r.w_error = std::max(r.w_error, (a.w - xi).norm());
    r.sigma_final.push_back(a.sigma);
  }
  r.optimality_residual = OptimalityResidual(state, costs, xi);
  return r;
}

StationaryPair ComputeStationaryPair(const Digraph& g, const CostList& costs,
                                     const Eigen::VectorXd& s_star,
                                     const Eigen::VectorXd& xi) {
  const int n_agents = g.size();
  const Eigen::MatrixXd lap = BuildLaplacian(g);
  StationaryPair pair;
  pair.x_bar = Eigen::VectorXd::Ones(n_agents) * s_star.transpose();

  Eigen::MatrixXd rhs(n_agents, s_star.size());
  for (int i = 0; i < n_agents; ++i) {
    rhs.row(i) = -(costs[i]->Gradient(s_star) / xi(i)).transpose();
  }
  // The Kronecker structure decouples the coordinates: L V = rhs columnwise.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(lap);
  pair.v_bar = cod.solve(rhs);
  pair.solve_residual = (lap * pair.v_bar - rhs).cwiseAbs().maxCoeff();
  return pair;
}

double StationaryFieldResidual(const StationaryPair& pair, const Digraph& g,
                               const CostList& costs, const Eigen::VectorXd& xi,
                               const std::vector<double>& sigmas) {
  const int n_agents = g.size();
  NetworkState s;
  for (int i = 0; i < n_agents; ++i) {
    s.agents.push_back({pair.x_bar.row(i).transpose(), pair.v_bar.row(i).transpose(),
                        xi, sigmas.at(i)});
  }
  const NetworkState d = CompactFormField(s, g, costs, xi);
  double worst = 0.0;
  for (const auto& a : d.agents) {
    worst = std::max({worst, a.x.cwiseAbs().maxCoeff(), a.v.cwiseAbs().maxCoeff(),
                      std::abs(a.sigma)});
  }
  return worst;
}

LyapunovConstants ComputeLyapunovConstants(double lambda2_bar, double lambdaN_bar,
                                           double lambda2_LtL, double l_hat,
                                           double w_check, int n_agents) {
  if (!(w_check > 0.0)) throw std::invalid_argument("w_check must be > 0");
  if (!(lambda2_bar > 0.0) || !(lambdaN_bar > 0.0) || !(lambda2_LtL > 0.0)) {
    throw std::invalid_argument("spectral quantities must be positive");
  }
  if (!(l_hat > 0.0)) throw std::invalid_argument("l_hat must be > 0");
  const double n = n_agents;
  const double l2 = lambda2_bar;
  const double ln = lambdaN_bar;
  const double w2 = w_check * w_check;

  LyapunovConstants c;
  c.l_hat = l_hat;
  c.w_check = w_check;
  c.omega1 = 33.0 * n * ln * (l2 + 2.0 * ln) / (l2 * l2 * l2);
  c.omega2 = (l_hat * l_hat / lambda2_LtL) *
             (4.0 * n * ln / (l2 * w2) +
              17.0 * n * ln * ln * (8.0 + l2) / (4.0 * l2 * l2 * l2 * w2));
  c.sigma_zero = 1.0 + c.omega1 + c.omega2 + n / (2.0 * l2);
  c.epsilon = 33.0 * n * ln / (l2 * l2);
  c.varrho = 4.0 * n / l2 + c.epsilon * (8.0 + l2) / (4.0 * l2);
  c.kappa = std::min(n * ln / (8.0 * l2), 1.0);
  c.eta_weight = 17.0 * n * ln / (4.0 * l2);
  return c;
}

LyapunovConstants ComputeLyapunovConstants(const SpectralCertificate& cert,
                                           const CostList& costs, double w_check,
                                           int n_agents) {
  double l_hat = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const auto hint = costs[i]->LipschitzHint();
    if (!hint) {
      throw std::invalid_argument("cost " + std::to_string(i + 1) + " (" +
                                  costs[i]->Name() +
                                  ") declares no Lipschitz constant");
    }
    l_hat = std::max(l_hat, *hint);
  }
  return ComputeLyapunovConstants(cert.lambda2_bar, cert.lambdaN_bar,
                                  cert.lambda2_LtL, l_hat, w_check, n_agents);
}

namespace {

double EpsilonOf(const SpectralCertificate& cert, int n_agents) {
  return 33.0 * n_agents * cert.lambdaN_bar /
         (cert.lambda2_bar * cert.lambda2_bar);
}

// V2 and V3 alone; V1 is differenced separately to avoid cancellation
// against sigma_zero.
struct SmoothTerms {
  double v2 = 0.0;
  double v3 = 0.0;
};

SmoothTerms SmoothPart(const ErrorCoordinates& ec, const Eigen::VectorXd& sigmas,
                       const Eigen::VectorXd& xi) {
  SmoothTerms t;
  for (int i = 0; i < ec.zeta.rows(); ++i) {
    const double z2 = ec.zeta.row(i).squaredNorm();
    t.v2 += 0.5 * xi(i) * (2.0 * sigmas(i) + z2) * z2;
    t.v3 += 0.5 * xi(i) * (ec.zeta.row(i) + ec.eta.row(i)).squaredNorm();
  }
  return t;
}

std::string DumpState(const NetworkState& s) {
  std::ostringstream out;
  out.precision(17);
  for (int i = 0; i < s.num_agents(); ++i) {
    const auto& a = s.agents[i];
    out << "agent " << i + 1 << ": x=[" << a.x.transpose() << "] v=["
        << a.v.transpose() << "] w=[" << a.w.transpose() << "] sigma=" << a.sigma
        << '\n';
  }
  return out.str();
}

}  // namespace

LyapunovTerms LyapunovValue(const ErrorCoordinates& ec, const Eigen::VectorXd& sigmas,
                            const Eigen::VectorXd& xi, double sigma_zero,
                            const SpectralCertificate& cert) {
  const SmoothTerms s = SmoothPart(ec, sigmas, xi);
  LyapunovTerms t;
  t.v1 = 0.5 * (sigmas.array() - sigma_zero).square().sum();
  t.v2 = s.v2;
  t.v3 = s.v3;
  t.total = t.v1 + t.v2 + EpsilonOf(cert, static_cast<int>(xi.size())) * t.v3;
  return t;
}

DecreaseCheckReport CheckLyapunovDecrease(const std::vector<NetworkState>& samples,
                                          const StationaryPair& pair,
                                          const Digraph& g, const CostList& costs,
                                          const SpectralCertificate& cert,
                                          const LyapunovConstants& constants,
                                          const DecreaseCheckOptions& options) {
  const NetworkDynamics unperturbed(g, costs, cert.xi);
  const VectorFieldFn field = [&](const NetworkState& s) { return unperturbed(s); };
  const double eps = EpsilonOf(cert, g.size());
  const double dt = options.substep;
  const Eigen::VectorXd& xi = cert.xi;

  DecreaseCheckReport report;
  report.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const NetworkState& s = samples[k];
    const NetworkState inc_fwd = Rk4Increment(s, field, dt);
    const NetworkState inc_bwd = Rk4Increment(s, field, -dt);
    NetworkState fwd = s, bwd = s;
    fwd.AddScaled(inc_fwd, 1.0);
    bwd.AddScaled(inc_bwd, 1.0);

    const ErrorCoordinates ec = ComputeErrorCoordinates(s, pair.x_bar, pair.v_bar, g);
    const SmoothTerms tf = SmoothPart(
        ComputeErrorCoordinates(fwd, pair.x_bar, pair.v_bar, g), fwd.Sigmas(), xi);
    const SmoothTerms tb = SmoothPart(
        ComputeErrorCoordinates(bwd, pair.x_bar, pair.v_bar, g), bwd.Sigmas(), xi);

    // ½Σ[(σ⁺−σ0)² − (σ⁻−σ0)²] = ½Σ(Δ⁺−Δ⁻)(2(σ−σ0) + Δ⁺ + Δ⁻)
    double dv1 = 0.0;
    for (int i = 0; i < s.num_agents(); ++i) {
      const double up = inc_fwd.agents[i].sigma;
      const double down = inc_bwd.agents[i].sigma;
      dv1 += 0.5 * (up - down) *
             (2.0 * (s.agents[i].sigma - constants.sigma_zero) + up + down);
    }

    DecreaseSample out;
    out.index = static_cast<int>(k);
    out.v = LyapunovValue(ec, s.Sigmas(), xi, constants.sigma_zero, cert).total;
    out.vdot = (dv1 + (tf.v2 - tb.v2) + eps * (tf.v3 - tb.v3)) / (2.0 * dt);
    out.bound = -ec.zeta.squaredNorm() - constants.eta_weight * ec.eta.squaredNorm();
    out.slack = options.relative_slack * (1.0 + std::abs(out.vdot));
    const double margin = out.vdot - out.bound - out.slack;
    out.ok = margin <= 0.0;
    report.worst_margin = std::max(report.worst_margin, margin);
    if (!out.ok) {
      ++report.violations;
      out.dump = DumpState(s);
    }
    report.samples.push_back(std::move(out));
  }
  return report;
}

std::vector<NetworkState> SampleStatesNearStationary(
    const StationaryPair& pair, const Eigen::VectorXd& xi, int count,
    std::uint64_t seed, double radius_lo, double radius_hi, double sigma_lo,
    double sigma_hi) {
  PortableRng rng(seed);
  const int n_agents = static_cast<int>(pair.x_bar.rows());
  const int n = static_cast<int>(pair.x_bar.cols());
  auto radius = [&] {
    return std::exp(rng.Uniform(std::log(radius_lo), std::log(radius_hi)));
  };
  auto gaussian = [&](int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = rng.Normal();
    return m;
  };

  std::vector<NetworkState> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Eigen::MatrixXd dx = gaussian(n_agents, n);
    dx.rowwise() -= dx.colwise().mean();
    dx *= radius() / std::max(dx.norm(), 1e-300);
    Eigen::MatrixXd dv = gaussian(n_agents, n);
    dv *= radius() / std::max(dv.norm(), 1e-300);

    NetworkState s;
    for (int i = 0; i < n_agents; ++i) {
      s.agents.push_back({(pair.x_bar.row(i) + dx.row(i)).transpose(),
                          (pair.v_bar.row(i) + dv.row(i)).transpose(), xi,
                          rng.Uniform(sigma_lo, sigma_hi)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

double ZetaProjectionMargin(const NetworkState& state, const StationaryPair& pair,
                            const Digraph& g, double lambda2_LtL) {
  Eigen::MatrixXd x_tilde = state.XMatrix() - pair.x_bar;
  const Eigen::MatrixXd zeta = BuildLaplacian(g) * x_tilde;
  x_tilde.rowwise() -= x_tilde.colwise().mean();
  return zeta.squaredNorm() - lambda2_LtL * x_tilde.squaredNorm();
}

TrajectoryReport MakeTrajectoryReport(const std::vector<NetworkState>& records,
                                      const NetworkState& final_state,
                                      const Eigen::VectorXd& s_star,
                                      const Eigen::VectorXd& xi,
                                      const CostList& costs, const Digraph& g,
                                      const SeriesOptions& options) {
  if (records.empty()) throw std::invalid_argument("trajectory has no records");
  TrajectoryReport out;
  out.final = MakeConvergenceReport(final_state, s_star, xi, costs);
  auto& s = out.series;
  for (const auto& r : records) {
    const ConvergenceReport c = MakeConvergenceReport(r, s_star, xi, costs);
    s.times.push_back(r.time);
    s.consensus_error.push_back(c.consensus_error);
    s.optimality_residual.push_back(c.optimality_residual);
    s.distance_to_oracle.push_back(c.distance_to_oracle);
    s.w_error.push_back(c.w_error);
    if (options.lyapunov) {
      const ErrorCoordinates ec =
          ComputeErrorCoordinates(r, options.pair.x_bar, options.pair.v_bar, g);
      s.lyapunov.push_back(
          LyapunovValue(ec, r.Sigmas(), xi, options.sigma_zero, options.cert).total);
    }
  }
  return out;
}

}  // namespace dcopt
