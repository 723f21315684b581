#include "dcopt/dynamics.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace dcopt {

void NetworkState::AddScaled(const NetworkState& d, double h) {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].x += h * d.agents[i].x;
    agents[i].v += h * d.agents[i].v;
    agents[i].w += h * d.agents[i].w;
    agents[i].sigma += h * d.agents[i].sigma;
  }
}

NetworkState NetworkState::ZerosLike() const {
  NetworkState z;
  z.time = time;
  z.agents.reserve(agents.size());
  for (const auto& a : agents) {
    z.agents.push_back({Eigen::VectorXd::Zero(a.x.size()),
                        Eigen::VectorXd::Zero(a.v.size()),
                        Eigen::VectorXd::Zero(a.w.size()), 0.0});
  }
  return z;
}

bool NetworkState::AllFinite() const {
  for (const auto& a : agents) {
    if (!a.x.allFinite() || !a.v.allFinite() || !a.w.allFinite() ||
        !std::isfinite(a.sigma)) {
      return false;
    }
  }
  return std::isfinite(time);
}

namespace {

template <typename Get>
Eigen::MatrixXd Rows(const std::vector<AgentState>& agents, Get get) {
  if (agents.empty()) return {};
  Eigen::MatrixXd m(agents.size(), get(agents.front()).size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    m.row(static_cast<int>(i)) = get(agents[i]).transpose();
  }
  return m;
}

}  // namespace

Eigen::MatrixXd NetworkState::XMatrix() const {
  return Rows(agents, [](const AgentState& a) -> const Eigen::VectorXd& { return a.x; });
}
Eigen::MatrixXd NetworkState::VMatrix() const {
  return Rows(agents, [](const AgentState& a) -> const Eigen::VectorXd& { return a.v; });
}
Eigen::MatrixXd NetworkState::WMatrix() const {
  return Rows(agents, [](const AgentState& a) -> const Eigen::VectorXd& { return a.w; });
}

Eigen::VectorXd NetworkState::Sigmas() const {
  Eigen::VectorXd s(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) s(static_cast<int>(i)) = agents[i].sigma;
  return s;
}

Eigen::VectorXd NetworkState::SelfWeights() const {
  Eigen::VectorXd s(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    s(static_cast<int>(i)) = agents[i].w(static_cast<int>(i));
  }
  return s;
}

std::vector<Eigen::VectorXd> NetworkState::Xs() const {
  std::vector<Eigen::VectorXd> xs;
  xs.reserve(agents.size());
  for (const auto& a : agents) xs.push_back(a.x);
  return xs;
}

NetworkState InitialState(const std::vector<Eigen::VectorXd>& x0,
                          const std::vector<Eigen::VectorXd>& v0,
                          const std::vector<double>& sigma0) {
  const std::size_t n_agents = x0.size();
  if (n_agents == 0) throw std::invalid_argument("at least one agent required");
  if (v0.size() != n_agents || sigma0.size() != n_agents) {
    throw std::invalid_argument("x0, v0 and sigma0 must have one entry per agent");
  }
  const auto n = x0.front().size();
  NetworkState state;
  state.agents.reserve(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) {
    if (x0[i].size() != n || v0[i].size() != n) {
      throw std::invalid_argument("x0 and v0 entries must share one dimension");
    }
    if (!(sigma0[i] > 0.0)) {
      throw std::invalid_argument("sigma0 must be positive (agent " +
                                  std::to_string(i + 1) + ")");
    }
    AgentState a;
    a.x = x0[i];
    a.v = v0[i];
    a.w = Eigen::VectorXd::Unit(static_cast<int>(n_agents), static_cast<int>(i));
    a.sigma = sigma0[i];
    state.agents.push_back(std::move(a));
  }
  return state;
}

Eigen::MatrixXd ConsensusErrors(const NetworkState& state, const Digraph& g) {
  const int n_agents = state.num_agents();
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n_agents, state.dimension());
  for (int i = 0; i < n_agents; ++i) {
    for (int j = 0; j < n_agents; ++j) {
      const double a = g.weight(i, j);
      if (a != 0.0) {
        e.row(i) += a * (state.agents[i].x - state.agents[j].x).transpose();
      }
    }
  }
  return e;
}

NetworkDynamics::NetworkDynamics(Digraph graph, CostList costs,
                                 std::optional<Eigen::VectorXd> fixed_weights)
    : graph_(std::move(graph)),
      laplacian_(BuildLaplacian(graph_)),
      costs_(std::move(costs)),
      fixed_weights_(std::move(fixed_weights)) {
  if (static_cast<int>(costs_.size()) != graph_.size()) {
    throw std::invalid_argument("one cost per agent required");
  }
  for (const auto& c : costs_) {
    if (!c || c->dimension() != costs_.front()->dimension()) {
      throw std::invalid_argument("costs must share one dimension");
    }
  }
  if (fixed_weights_ && fixed_weights_->size() != graph_.size()) {
    throw std::invalid_argument("fixed weights need one entry per agent");
  }
}

NetworkState NetworkDynamics::operator()(const NetworkState& state) const {
  const int n_agents = state.num_agents();
  if (n_agents != graph_.size()) {
    throw std::invalid_argument("state and graph disagree on agent count");
  }
  NetworkState d = state.ZerosLike();
  for (int i = 0; i < n_agents; ++i) {
    const AgentState& ai = state.agents[i];
    AgentState& di = d.agents[i];

    const double divisor = fixed_weights_ ? (*fixed_weights_)(i) : ai.w(i);
    if (!(divisor > 0.0)) {
      throw IntegrationFault(IntegrationFault::Kind::kPositivity, i, state.time,
                             "w_i^i <= 0 for agent " + std::to_string(i + 1) +
                                 " at t = " + std::to_string(state.time));
    }

    // e_i, the v-disagreement and the w-disagreement in one pass.
    Eigen::VectorXd e = Eigen::VectorXd::Zero(ai.x.size());
    Eigen::VectorXd dv_sum = Eigen::VectorXd::Zero(ai.v.size());
    for (int j = 0; j < n_agents; ++j) {
      const double a = graph_.weight(i, j);
      if (a == 0.0) continue;
      const AgentState& aj = state.agents[j];
      e += a * (ai.x - aj.x);
      dv_sum += a * (ai.v - aj.v);
      di.w -= a * (ai.w - aj.w);
    }
    const double rho = e.squaredNorm();
    const double gain = ai.sigma + rho;

    const Eigen::VectorXd grad = costs_[i]->Gradient(ai.x);
    if (!grad.allFinite()) {
      throw IntegrationFault(IntegrationFault::Kind::kNonFinite, i, state.time,
                             "non-finite gradient for agent " +
                                 std::to_string(i + 1) + " at t = " +
                                 std::to_string(state.time));
    }
    di.x = -grad / divisor - gain * e - dv_sum;
    di.v = gain * e;
    di.sigma = rho;
  }
  return d;
}

Eigen::VectorXd Flatten(const Eigen::MatrixXd& per_agent_rows) {
  Eigen::VectorXd out(per_agent_rows.size());
  const auto cols = per_agent_rows.cols();
  for (Eigen::Index i = 0; i < per_agent_rows.rows(); ++i) {
    out.segment(i * cols, cols) = per_agent_rows.row(i).transpose();
  }
  return out;
}

Eigen::MatrixXd Unflatten(const Eigen::VectorXd& stacked, int rows) {
  if (rows <= 0 || stacked.size() % rows != 0) {
    throw std::invalid_argument("stacked vector does not split into rows");
  }
  const int cols = static_cast<int>(stacked.size()) / rows;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) m.row(i) = stacked.segment(i * cols, cols).transpose();
  return m;
}

NetworkState CompactFormField(const NetworkState& state, const Digraph& g,
                              const CostList& costs,
                              const std::optional<Eigen::VectorXd>& fixed_weights) {
  const int n_agents = state.num_agents();
  const int n = state.dimension();
  const Eigen::MatrixXd lap = BuildLaplacian(g);
  const Eigen::MatrixXd in = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd iN = Eigen::MatrixXd::Identity(n_agents, n_agents);

  const Eigen::VectorXd x = Flatten(state.XMatrix());
  const Eigen::VectorXd v = Flatten(state.VMatrix());
  const Eigen::VectorXd w = Flatten(state.WMatrix());

  const Eigen::MatrixXd l_n = Eigen::kroneckerProduct(lap, in);
  const Eigen::VectorXd e = l_n * x;

  Eigen::VectorXd rho(n_agents);
  Eigen::VectorXd winv(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    rho(i) = e.segment(i * n, n).squaredNorm();
    winv(i) = 1.0 / (fixed_weights ? (*fixed_weights)(i) : state.agents[i].w(i));
  }
  const Eigen::MatrixXd cb = (state.Sigmas() + rho).asDiagonal();
  const Eigen::MatrixXd w_inv = winv.asDiagonal();
  const Eigen::VectorXd grad = StackedGradient(costs, state.Xs());

  const Eigen::MatrixXd cbl_n = Eigen::kroneckerProduct(Eigen::MatrixXd(cb * lap), in);
  const Eigen::VectorXd dx =
      -Eigen::kroneckerProduct(w_inv, in) * grad - cbl_n * x - l_n * v;
  const Eigen::VectorXd dv = cbl_n * x;
  const Eigen::VectorXd dw = -Eigen::kroneckerProduct(lap, iN) * w;

  NetworkState d = state.ZerosLike();
  for (int i = 0; i < n_agents; ++i) {
    d.agents[i].x = dx.segment(i * n, n);
    d.agents[i].v = dv.segment(i * n, n);
    d.agents[i].w = dw.segment(i * n_agents, n_agents);
    d.agents[i].sigma = rho(i);
  }
  return d;
}

Eigen::VectorXd ErrorCoordinates::StackedZeta() const { return Flatten(zeta); }
Eigen::VectorXd ErrorCoordinates::StackedEta() const { return Flatten(eta); }

ErrorCoordinates ComputeErrorCoordinates(const NetworkState& state,
                                         const Eigen::MatrixXd& x_bar,
                                         const Eigen::MatrixXd& v_bar,
                                         const Digraph& g) {
  const Eigen::MatrixXd lap = BuildLaplacian(g);
  return {lap * (state.XMatrix() - x_bar), lap * (state.VMatrix() - v_bar)};
}

}  // namespace dcopt
