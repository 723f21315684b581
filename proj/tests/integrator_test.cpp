#include "dcopt/integrator.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

namespace dcopt {
namespace {

Eigen::VectorXd Scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

NetworkState OneAgent(double x) { return InitialState({Scalar(x)}, {Scalar(0)}, {1.0}); }

// Single agent with f = scale (x - center)^2 and no neighbours.
VectorFieldFn QuadraticFlow(double center, double scale) {
  auto dyn = std::make_shared<NetworkDynamics>(Digraph(Eigen::MatrixXd::Zero(1, 1)),
                                               CostList{MakeQuadratic(Scalar(center), scale)});
  return [dyn](const NetworkState& s) { return (*dyn)(s); };
}

class NanCost final : public CostFunction {
 public:
  int dimension() const override { return 1; }
  double Value(const Eigen::VectorXd&) const override { return 0.0; }
  Eigen::VectorXd Gradient(const Eigen::VectorXd& s) const override {
    return Scalar(s(0) < 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0);
  }
  std::string Name() const override { return "nan"; }
};

TEST(Rk4, ExponentialDecayOneStep) {
  // x' = -x: f = x^2 / 2.
  const NetworkState next = Rk4Step(OneAgent(1.0), QuadraticFlow(0.0, 0.5), 0.1);
  EXPECT_NEAR(next.agents[0].x(0), std::exp(-0.1), 1e-7);
  EXPECT_NEAR(next.agents[0].x(0), 0.9048374, 1e-7);
  EXPECT_DOUBLE_EQ(next.time, 0.1);
}

TEST(Rk4, ZeroFieldLeavesStateUnchanged) {
  const NetworkState s = OneAgent(2.5);
  const NetworkState next = Rk4Step(s, [](const NetworkState& st) { return st.ZerosLike(); }, 0.3);
  EXPECT_EQ(next.agents[0].x, s.agents[0].x);
  EXPECT_EQ(next.agents[0].w, s.agents[0].w);
  EXPECT_EQ(next.agents[0].sigma, s.agents[0].sigma);
}

TEST(Integrate, ClosedFormLinearFlow) {
  // f = 2 (x - 3)^2: x(t) = 3 + (x0 - 3) exp(-4 t).
  IntegratorConfig cfg;
  cfg.step = 1e-3;
  cfg.t_end = 1.0;
  const Trajectory tr = Integrate(OneAgent(5.0), QuadraticFlow(3.0, 2.0), cfg);
  EXPECT_NEAR(tr.final_state.agents[0].x(0), 3.0 + 2.0 * std::exp(-4.0), 1e-9);
  EXPECT_DOUBLE_EQ(tr.final_state.time, 1.0);
}

TEST(Integrate, OrderRatioNearSixteen) {
  auto error = [](double h) {
    IntegratorConfig cfg;
    cfg.step = h;
    cfg.min_step = h;
    cfg.t_end = 1.0;
    const Trajectory tr = Integrate(OneAgent(5.0), QuadraticFlow(3.0, 2.0), cfg);
    return std::abs(tr.final_state.agents[0].x(0) - (3.0 + 2.0 * std::exp(-4.0)));
  };
  for (double h : {0.1, 0.05}) {
    const double ratio = error(h) / error(h / 2);
    EXPECT_GE(ratio, 12.0);
    EXPECT_LE(ratio, 20.0);
  }
}

TEST(Integrate, HorizonZeroKeepsOnlyInitialRecord) {
  IntegratorConfig cfg;
  cfg.t_end = 0.0;
  const Trajectory tr = Integrate(OneAgent(1.0), QuadraticFlow(0.0, 1.0), cfg);
  ASSERT_EQ(tr.records.size(), 1u);
  EXPECT_EQ(tr.final_state.agents[0].x, tr.records[0].agents[0].x);
}

TEST(Integrate, RecordCountAndStrictlyIncreasingTimes) {
  IntegratorConfig cfg;
  cfg.step = 0.01;
  cfg.t_end = 1.0;
  cfg.record_stride = 7;
  int observed = 0;
  const Trajectory tr = Integrate(OneAgent(1.0), QuadraticFlow(0.0, 1.0), cfg,
                                  {[&](const NetworkState&) { ++observed; }});
  EXPECT_EQ(cfg.NumSteps(), 100);
  EXPECT_EQ(tr.records.size(), 100u / 7 + 1);
  EXPECT_EQ(observed, static_cast<int>(tr.records.size()));
  const auto t = tr.Times();
  for (std::size_t k = 1; k < t.size(); ++k) EXPECT_GT(t[k], t[k - 1]);
}

TEST(Integrate, NonFiniteGradientAbortsWithAgentIndex) {
  const Digraph g = SymmetricCycle(2);
  const NetworkDynamics dyn(g, {MakeQuadratic(Scalar(0), 1.0), std::make_shared<NanCost>()});
  const NetworkState s0 =
      InitialState({Scalar(0.0), Scalar(1.0)}, {Scalar(0), Scalar(0)}, {1.0, 1.0});
  IntegratorConfig cfg;
  cfg.step = 0.01;
  cfg.t_end = 10.0;
  try {
    Integrate(s0, [&](const NetworkState& s) { return dyn(s); }, cfg);
    FAIL() << "expected an integration fault";
  } catch (const IntegrationFault& f) {
    EXPECT_EQ(f.kind(), IntegrationFault::Kind::kNonFinite);
    EXPECT_EQ(f.agent(), 1);
  }
}

TEST(Integrate, PositivityFaultHalvesTheStep) {
  // Agent 1 of the five-agent graph has in-degree 2, so w_1^1' = -2 at t = 0
  // and a step of 1.3 drives the half-step probe of w_1^1 negative. Flat
  // costs keep x from blowing up once the weights get small.
  CostList costs;
  for (int i = 0; i < 5; ++i) costs.push_back(MakeQuadratic(Eigen::Vector2d(i, 0), 1e-3));
  const NetworkDynamics dyn(Fig1Digraph(), costs);
  std::vector<Eigen::VectorXd> x(5, Eigen::Vector2d::Zero());
  IntegratorConfig cfg;
  cfg.step = 1.3;
  cfg.t_end = 1.3;
  cfg.min_step = 0.01;
  const Trajectory tr = Integrate(InitialState(x, x, std::vector<double>(5, 1.0)),
                                  [&](const NetworkState& s) { return dyn(s); }, cfg);
  EXPECT_GT(tr.halvings, 0);
  EXPECT_LT(tr.smallest_step, 1.3);
  EXPECT_GT(tr.min_self_weight, 0.0);
  EXPECT_TRUE(tr.final_state.AllFinite());

  cfg.min_step = 1.0;
  EXPECT_THROW(Integrate(InitialState(x, x, std::vector<double>(5, 1.0)),
                         [&](const NetworkState& s) { return dyn(s); }, cfg),
               IntegrationFault);
}

TEST(IntegratorConfig, Validation) {
  IntegratorConfig cfg;
  cfg.step = 0.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = {};
  cfg.min_step = 1.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = {};
  cfg.record_stride = 0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = {};
  cfg.t_end = -1.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace dcopt
