#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "dcopt/dynamics.hpp"

namespace dcopt {

struct IntegratorConfig {
  double step = 1e-3;
  double t_end = 100.0;
  int record_stride = 1;  // record every k-th step
  double min_step = 1e-7; // floor for fault-driven step halving

  /// Throws std::invalid_argument unless 0 < min_step <= step, t_end >= 0 and
  /// record_stride >= 1.
  void Validate() const;
  /// Nominal step count; the last step is shortened to land on t_end.
  long long NumSteps() const;
};

using VectorFieldFn = std::function<NetworkState(const NetworkState&)>;
using Observer = std::function<void(const NetworkState&)>;

/// Classical fourth-order Runge–Kutta over all components at once.
/// Field exceptions propagate.
NetworkState Rk4Step(const NetworkState& state, const VectorFieldFn& field,
                     double h);

/// The RK4 increment h * (k1 + 2 k2 + 2 k3 + k4) / 6 alone, so callers can
/// difference two short steps without cancellation against the base state.
NetworkState Rk4Increment(const NetworkState& state, const VectorFieldFn& field,
                          double h);

struct Trajectory {
  std::vector<NetworkState> records;  // every record_stride-th step, from t = 0
  NetworkState final_state;

  int halvings = 0;                    // fault-driven step subdivisions
  double smallest_step = 0.0;
  /// min over agents and over every accepted step of w_i^i.
  double min_self_weight = std::numeric_limits<double>::infinity();
  /// max over agents and accepted steps of sigma_i(t_k) - sigma_i(t_{k+1});
  /// nonpositive when every sigma is non-decreasing.
  double max_sigma_drop = -std::numeric_limits<double>::infinity();

  std::vector<double> Times() const;
};

/// Fixed-step loop from state0.time to cfg.t_end. A positivity fault retries
/// the step as two half steps, recursively down to cfg.min_step; below that,
/// or on a non-finite state, IntegrationFault is thrown. Observers see each
/// recorded state.
Trajectory Integrate(const NetworkState& state0, const VectorFieldFn& field,
                     const IntegratorConfig& cfg,
                     const std::vector<Observer>& observers = {});

}  // namespace dcopt
