#include "dcopt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dcopt {

namespace {

CheckResult Below(std::string name, double value, double threshold,
                  std::string detail = {}) {
  return {std::move(name), value < threshold, value, threshold, "<", std::move(detail)};
}

CheckResult AtLeast(std::string name, double value, double threshold,
                    std::string detail = {}) {
  return {std::move(name), value >= threshold, value, threshold, ">=",
          std::move(detail)};
}

}  // namespace

Digraph RandomStronglyConnectedDigraph(int n_agents, PortableRng& rng,
                                       double extra_edge_prob) {
  if (n_agents < 2) throw std::invalid_argument("need at least two agents");
  std::vector<int> order(n_agents);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n_agents - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.Bits() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_agents, n_agents);
  for (int k = 0; k < n_agents; ++k) {
    a(order[(k + 1) % n_agents], order[k]) = rng.Uniform(0.5, 2.0);
  }
  for (int i = 0; i < n_agents; ++i) {
    for (int j = 0; j < n_agents; ++j) {
      if (i == j || a(i, j) > 0.0) continue;
      if (rng.Uniform() < extra_edge_prob) a(i, j) = rng.Uniform(0.5, 2.0);
    }
  }
  return Digraph(std::move(a));
}

double SampledQuadraticFormMargin(const Eigen::MatrixXd& laplacian,
                                  const SpectralCertificate& cert, int samples,
                                  PortableRng& rng) {
  const int n = static_cast<int>(laplacian.rows());
  const Eigen::MatrixXd lbar = SymmetrizedLaplacian(laplacian, cert.xi);
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd c(n), x(n);
    for (int i = 0; i < n; ++i) c(i) = rng.Uniform(0.01, 1.0);
    for (int i = 0; i < n; ++i) x(i) = rng.Normal();
    x -= c * (c.dot(x) / c.squaredNorm());
    const double margin =
        x.dot(lbar * x) - cert.lambda2_bar / n * x.squaredNorm();
    worst = std::min(worst, margin);
  }
  return worst;
}

std::vector<Eigen::VectorXd> SampleRegularPoints(const CostFunction& f, int count,
                                                 double lo, double hi,
                                                 double clearance, PortableRng& rng) {
  std::vector<Eigen::VectorXd> pts;
  int attempts = 0;
  while (static_cast<int>(pts.size()) < count) {
    if (++attempts > 1000 * count) {
      throw std::runtime_error("could not sample points away from the singular set");
    }
    Eigen::VectorXd p(f.dimension());
    for (int k = 0; k < p.size(); ++k) p(k) = rng.Uniform(lo, hi);
    if (f.DistanceToSingularSet(p) >= clearance) pts.push_back(std::move(p));
  }
  return pts;
}

double FieldConsistencyError(const Digraph& g, const CostList& costs,
                             const Eigen::VectorXd& center, int count,
                             PortableRng& rng) {
  const NetworkDynamics dyn(g, costs);
  const int n_agents = g.size();
  const int dim = static_cast<int>(center.size());
  double worst = 0.0;
  for (int s = 0; s < count; ++s) {
    NetworkState st;
    for (int i = 0; i < n_agents; ++i) {
      AgentState a;
      a.x = center + Eigen::VectorXd::NullaryExpr(dim, [&] { return rng.Uniform(-5, 5); });
      a.v = Eigen::VectorXd::NullaryExpr(dim, [&] { return rng.Uniform(-5, 5); });
      a.w = Eigen::VectorXd::NullaryExpr(n_agents, [&] { return rng.Uniform(0.05, 1.0); });
      a.sigma = rng.Uniform(1.0, 10.0);
      st.agents.push_back(std::move(a));
    }
    const NetworkState d1 = dyn(st);
    const NetworkState d2 = CompactFormField(st, g, costs);
    double diff = 0.0, scale = 1.0;
    for (int i = 0; i < n_agents; ++i) {
      const auto& a = d1.agents[i];
      const auto& b = d2.agents[i];
      diff = std::max({diff, (a.x - b.x).cwiseAbs().maxCoeff(),
                       (a.v - b.v).cwiseAbs().maxCoeff(),
                       (a.w - b.w).cwiseAbs().maxCoeff(), std::abs(a.sigma - b.sigma)});
      scale = std::max({scale, a.x.cwiseAbs().maxCoeff(), a.v.cwiseAbs().maxCoeff(),
                        a.w.cwiseAbs().maxCoeff(), std::abs(a.sigma)});
    }
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

std::vector<CheckResult> RunVerification(const Experiment& exp,
                                         const VerifyOptions& options) {
  std::vector<CheckResult> out;
  PortableRng rng(options.seed);
  const Eigen::MatrixXd& L = exp.laplacian;
  const int n_agents = exp.graph.size();

  out.push_back({"graph.strongly_connected", IsStronglyConnected(exp.graph), 1.0, 1.0,
                 ">=", ""});
  out.push_back(Below("graph.left_null_residual",
                      (exp.xi.transpose() * L).cwiseAbs().maxCoeff(), 1e-10));
  out.push_back(AtLeast("graph.xi_min_entry", exp.xi.minCoeff(), 1e-12));
  out.push_back(Below("graph.xi_unit_sum", std::abs(exp.xi.sum() - 1.0), 1e-12));
  if (n_agents > 1) {
    out.push_back(AtLeast(
        "graph.quadratic_form_margin",
        SampledQuadraticFormMargin(L, exp.certificate, options.quadratic_form_samples, rng),
        -1e-9));
    const double t_limit = 100.0 / exp.certificate.lambda2_bar;
    const auto rep = CheckExponentialLimit(L, exp.xi, {0.1, 1.0, 10.0, t_limit});
    out.push_back(AtLeast("graph.exp_min_entry",
                          *std::min_element(rep.min_entry.begin(), rep.min_entry.end()),
                          -1e-12));
    out.push_back(Below("graph.exp_limit_deviation", rep.limit_deviation.back(), 1e-8,
                        "t = 100 / lambda2"));
  }

  const bool huber = exp.config.costs == "example2";
  for (std::size_t i = 0; i < exp.costs.size(); ++i) {
    const auto& f = *exp.costs[i];
    const double lo = huber ? -2.0 : -10.0;
    const double hi = huber ? 2.0 : 10.0;
    auto pts = SampleRegularPoints(f, options.gradient_points, lo, hi,
                                   CostFunction::kSingularRadius, rng);
    if (huber) {
      for (auto& p : pts) p += exp.oracle.point;
    }
    const auto rep = GradientCheck(f, pts);
    out.push_back(Below("gradient." + std::to_string(i + 1) + "." + f.Name(),
                        rep.max_error, 1e-5));
  }

  NetworkState at_oracle;
  for (int i = 0; i < n_agents; ++i) {
    at_oracle.agents.push_back({exp.oracle.point, exp.oracle.point * 0.0,
                                exp.xi, 1.0});
  }
  out.push_back(Below("oracle.optimality_residual",
                      OptimalityResidual(at_oracle, exp.costs, exp.xi), 1e-9));

  const StationaryPair pair =
      ComputeStationaryPair(exp.graph, exp.costs, exp.oracle.point, exp.xi);
  std::vector<double> gains(n_agents);
  for (auto& s : gains) s = rng.Uniform(0.1, 50.0);
  out.push_back(Below("stationary.field_residual",
                      StationaryFieldResidual(pair, exp.graph, exp.costs, exp.xi, gains),
                      1e-9));

  if (n_agents > 1) {
    const LyapunovConstants c = ComputeLyapunovConstants(
        exp.certificate, exp.costs, exp.xi.minCoeff(), n_agents);
    const auto samples = SampleStatesNearStationary(
        pair, exp.xi, options.lyapunov_samples, rng.Bits());
    const auto rep = CheckLyapunovDecrease(samples, pair, exp.graph, exp.costs,
                                           exp.certificate, c);
    out.push_back(Below("lyapunov.violations", rep.violations, 0.5,
                        std::to_string(rep.samples.size()) + " samples"));
    LyapunovConstants wrong = c;
    wrong.sigma_zero = 0.0;
    const auto neg = CheckLyapunovDecrease(samples, pair, exp.graph, exp.costs,
                                           exp.certificate, wrong);
    out.push_back(AtLeast("lyapunov.negative_control_violations", neg.violations, 1.0,
                          "sigma_zero = 0"));
  }

  out.push_back(Below("field.per_agent_vs_compact",
                      FieldConsistencyError(exp.graph, exp.costs, exp.oracle.point,
                                            options.field_samples, rng),
                      1e-12));
  return out;
}

}  // namespace dcopt
