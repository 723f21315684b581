#include "dcopt/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcopt {

void IntegratorConfig::Validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("integrator step must be > 0");
  if (!(min_step > 0.0) || min_step > step) {
    throw std::invalid_argument("integrator min_step must be in (0, step]");
  }
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("integrator t_end must be finite and >= 0");
  }
  if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
}

long long IntegratorConfig::NumSteps() const {
  return static_cast<long long>(std::ceil(t_end / step - 1e-9));
}

NetworkState Rk4Increment(const NetworkState& state, const VectorFieldFn& field,
                          double h) {
  const NetworkState k1 = field(state);

  NetworkState probe = state;
  probe.AddScaled(k1, 0.5 * h);
  probe.time = state.time + 0.5 * h;
  const NetworkState k2 = field(probe);

  probe = state;
  probe.AddScaled(k2, 0.5 * h);
  probe.time = state.time + 0.5 * h;
  const NetworkState k3 = field(probe);

  probe = state;
  probe.AddScaled(k3, h);
  probe.time = state.time + h;
  const NetworkState k4 = field(probe);

  NetworkState inc = k1.ZerosLike();
  inc.AddScaled(k1, h / 6.0);
  inc.AddScaled(k2, h / 3.0);
  inc.AddScaled(k3, h / 3.0);
  inc.AddScaled(k4, h / 6.0);
  inc.time = h;
  return inc;
}

NetworkState Rk4Step(const NetworkState& state, const VectorFieldFn& field,
                     double h) {
  NetworkState next = state;
  next.AddScaled(Rk4Increment(state, field, h), 1.0);
  next.time = state.time + h;
  return next;
}

namespace {

int FirstNonFiniteAgent(const NetworkState& s) {
  for (int i = 0; i < s.num_agents(); ++i) {
    const auto& a = s.agents[i];
    if (!a.x.allFinite() || !a.v.allFinite() || !a.w.allFinite() ||
        !std::isfinite(a.sigma)) {
      return i;
    }
  }
  return -1;
}

struct StepStats {
  int halvings = 0;
  double smallest = 0.0;
};

NetworkState Advance(const NetworkState& state, const VectorFieldFn& field,
                     double h, double min_step, StepStats& stats) {
  try {
    NetworkState next = Rk4Step(state, field, h);
    stats.smallest = std::min(stats.smallest, h);
    return next;
  } catch (const IntegrationFault& fault) {
    if (fault.kind() != IntegrationFault::Kind::kPositivity) throw;
    const double half = 0.5 * h;
    if (half < min_step) {
      std::ostringstream msg;
      msg << "positivity fault persists below min_step " << min_step
          << " (agent " << fault.agent() + 1 << ", t = " << state.time
          << "): " << fault.what();
      throw IntegrationFault(fault.kind(), fault.agent(), state.time, msg.str());
    }
    ++stats.halvings;
    NetworkState mid = Advance(state, field, half, min_step, stats);
    return Advance(mid, field, half, min_step, stats);
  }
}

void Observe(const NetworkState& s, Trajectory& traj) {
  traj.min_self_weight = std::min(traj.min_self_weight, s.SelfWeights().minCoeff());
}

}  // namespace

std::vector<double> Trajectory::Times() const {
  std::vector<double> t;
  t.reserve(records.size());
  for (const auto& r : records) t.push_back(r.time);
  return t;
}

Trajectory Integrate(const NetworkState& state0, const VectorFieldFn& field,
                     const IntegratorConfig& cfg,
                     const std::vector<Observer>& observers) {
  cfg.Validate();
  if (!state0.AllFinite()) {
    throw IntegrationFault(IntegrationFault::Kind::kNonFinite,
                           FirstNonFiniteAgent(state0), state0.time,
                           "initial state is not finite");
  }
  Trajectory traj;
  traj.smallest_step = cfg.step;
  traj.records.push_back(state0);
  Observe(state0, traj);
  for (const auto& obs : observers) obs(state0);

  const long long steps = cfg.NumSteps();
  const double t0 = state0.time;
  NetworkState state = state0;
  for (long long k = 1; k <= steps; ++k) {
    const double t_next = std::min(t0 + static_cast<double>(k) * cfg.step, t0 + cfg.t_end);
    const double h = t_next - state.time;

    StepStats stats{0, cfg.step};
    NetworkState next = Advance(state, field, h, cfg.min_step, stats);
    next.time = t_next;
    traj.halvings += stats.halvings;
    traj.smallest_step = std::min(traj.smallest_step, stats.smallest);

    if (const int bad = FirstNonFiniteAgent(next); bad >= 0) {
      throw IntegrationFault(IntegrationFault::Kind::kNonFinite, bad, state.time,
                             "state of agent " + std::to_string(bad + 1) +
                                 " became non-finite after t = " +
                                 std::to_string(state.time));
    }
    for (int i = 0; i < next.num_agents(); ++i) {
      traj.max_sigma_drop = std::max(
          traj.max_sigma_drop, state.agents[i].sigma - next.agents[i].sigma);
    }
    Observe(next, traj);

    state = std::move(next);
    if (k % cfg.record_stride == 0) {
      traj.records.push_back(state);
      for (const auto& obs : observers) obs(state);
    }
  }
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace dcopt
