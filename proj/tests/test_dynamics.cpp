#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "enlab/dynamics.hpp"
#include "enlab/energy.hpp"

using namespace enlab;

namespace {

VectorXd vec1(double a) {
  VectorXd v(1);
  v << a;
  return v;
}

// Tracking of a constant input x0 with unit masses: w'' + ratio(t) w' + (w - x0) = 0.
AgentConfig scalar_config(double x0, double w0, double wdot0, DissipationSchedule schedule) {
  AgentConfig cfg;
  cfg.masses = vec1(1.0);
  cfg.dissipation = schedule;
  cfg.potential = std::make_shared<QuadraticTracking>(MatrixXd::Identity(1, 1));
  cfg.signal = std::make_shared<EnvironmentSignal>(EnvironmentSignal::constant(vec1(x0)));
  cfg.w0 = vec1(w0);
  cfg.wdot0 = vec1(wdot0);
  return cfg;
}

}  // namespace

TEST_CASE("acceleration formula") {
  AgentConfig cfg;
  cfg.masses = VectorXd(2);
  cfg.masses << 1, 2;
  cfg.dissipation = DissipationSchedule::exponential(3.0);
  // Potential chosen so grad_w at the probe point is (2, 4): 1/2||w - x||^2
  // with w - x = (2, 4).
  cfg.potential = std::make_shared<QuadraticTracking>(MatrixXd::Identity(2, 2));
  cfg.signal = std::make_shared<EnvironmentSignal>(EnvironmentSignal::constant(VectorXd::Zero(2)));
  AgentState state;
  state.t = 0.0;
  state.w = VectorXd(2);
  state.w << 2, 4;
  state.wdot = VectorXd(2);
  state.wdot << 1, -1;
  const VectorXd acc = acceleration(state, cfg);
  CHECK(acc[0] == doctest::Approx(-5.0).epsilon(1e-15));   // -(3*1 + 2)/1
  CHECK(acc[1] == doctest::Approx(-0.5).epsilon(1e-15));   // -(3*(-1) + 4)/2
}

TEST_CASE("acceleration vanishes at rest on a stationary point") {
  const auto cfg = scalar_config(1.0, 1.0, 0.0, DissipationSchedule::exponential(2.0));
  AgentState state{0.0, vec1(1.0), vec1(0.0)};
  CHECK(acceleration(state, cfg).norm() == 0.0);
}

TEST_CASE("constant dissipation and unit mass reduce to the harmonic oscillator") {
  const auto cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::constant());
  AgentState state{0.0, vec1(1.0), vec1(0.0)};
  CHECK(acceleration(state, cfg)[0] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("rk4 reproduces cos on the harmonic oscillator") {
  const auto cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::constant());
  AgentState state{0.0, vec1(1.0), vec1(0.0)};
  for (int i = 0; i < 1000; ++i) state = step_rk4(state, cfg, 1e-3);
  CHECK(state.w[0] == doctest::Approx(std::cos(1.0)).epsilon(1e-9));
  CHECK(std::abs(state.w[0] - 0.5403023058681398) <= 1e-9);
}

TEST_CASE("rk4 reproduces the critically damped solution") {
  // w'' + 2 w' + w = 0, w(0) = 1, w'(0) = 0: w(t) = (1 + t) e^-t.
  const auto cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::exponential(2.0));
  AgentState state{0.0, vec1(1.0), vec1(0.0)};
  for (int i = 0; i < 1000; ++i) state = step_rk4(state, cfg, 1e-3);
  CHECK(std::abs(state.w[0] - 2.0 * std::exp(-1.0)) <= 1e-9);
  CHECK(std::abs(state.w[0] - 0.7357588823428847) <= 1e-9);
}

TEST_CASE("a minimizer at rest is a fixed point of the step") {
  const auto cfg = scalar_config(2.0, 2.0, 0.0, DissipationSchedule::exponential(1.0));
  AgentState state{0.0, vec1(2.0), vec1(0.0)};
  const AgentState next = step_rk4(state, cfg, 1e-2);
  CHECK(next.w[0] == 2.0);
  CHECK(next.wdot[0] == 0.0);
}

TEST_CASE("simulate conserves energy without dissipation or drive") {
  const auto cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::constant());
  const auto traj = simulate(cfg, 10.0, 1e-3, 10);
  CHECK(traj.Z_total == 0.0);
  CHECK(traj.E_total == 0.0);
  for (double u : traj.U) CHECK(std::abs(u - 0.5) <= 1e-8);
}

TEST_CASE("simulate dissipates the initial energy under damping") {
  const auto cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::exponential(2.0));
  const auto traj = simulate(cfg, 10.0, 1e-3, 10);
  CHECK(traj.U_final <= 1e-6);
  CHECK(std::abs(traj.Z_total - (0.5 - traj.U_final)) <= 1e-6);
  CHECK(traj.E_total == 0.0);
}

TEST_CASE("simulate keeps an equilibrium constant") {
  const auto cfg = scalar_config(3.0, 3.0, 0.0, DissipationSchedule::exponential(1.0));
  const auto traj = simulate(cfg, 5.0, 1e-2, 5);
  for (int i = 0; i < traj.sample_count(); ++i) {
    CHECK(traj.w(i, 0) == 3.0);
    CHECK(traj.wdot(i, 0) == 0.0);
  }
}

TEST_CASE("simulate is deterministic bit for bit") {
  AgentConfig cfg;
  cfg.masses = VectorXd::Ones(2);
  cfg.dissipation = DissipationSchedule::exponential(1.0);
  cfg.potential = std::make_shared<QuadraticTracking>(MatrixXd::Identity(2, 2));
  cfg.signal = std::make_shared<EnvironmentSignal>(EnvironmentSignal::sinusoid_bank(
      2, {{0, 1.0, 1.0, 0.0}, {1, 0.5, 2.0, 0.3}}));
  cfg.w0 = VectorXd::Zero(2);
  cfg.wdot0 = VectorXd::Zero(2);
  const auto a = simulate(cfg, 5.0, 1e-3, 10);
  const auto b = simulate(cfg, 5.0, 1e-3, 10);
  CHECK(a.w == b.w);
  CHECK(a.wdot == b.wdot);
  CHECK(a.Z == b.Z);
  CHECK(a.E == b.E);
  CHECK(a.Z_total == b.Z_total);
}

TEST_CASE("divergence raises an error naming the first bad step") {
  // RK4 on w'' = -w is unstable at h = 3; the norm guard must fire.
  const auto cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::constant());
  CHECK_THROWS_AS(simulate(cfg, 600.0, 3.0, 1), divergence_error);
  try {
    simulate(cfg, 600.0, 3.0, 1);
  } catch (const divergence_error& e) {
    CHECK(e.step > 0);
    CHECK(std::string(e.what()).find("step=") != std::string::npos);
  }
}

TEST_CASE("gradient flow reference decays exponentially") {
  const auto cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::exponential(10.0));
  const auto traj = gradient_flow_reference(cfg, 10.0, 1e-3, 10);
  CHECK(std::abs(traj.w(traj.sample_count() - 1, 0) - std::exp(-1.0)) <= 1e-9);
  CHECK(std::abs(traj.w(traj.sample_count() - 1, 0) - 0.36787944117144233) <= 1e-9);
}

TEST_CASE("gradient flow stays at a stationary start") {
  const auto cfg = scalar_config(0.0, 0.0, 0.0, DissipationSchedule::exponential(5.0));
  const auto traj = gradient_flow_reference(cfg, 5.0, 1e-3, 10);
  for (int i = 0; i < traj.sample_count(); ++i) CHECK(traj.w(i, 0) == 0.0);
}

TEST_CASE("doubling theta doubles the gradient-flow time constant") {
  const auto cfg10 = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::exponential(10.0));
  const auto cfg20 = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::exponential(20.0));
  const auto t10 = gradient_flow_reference(cfg10, 1.0, 1e-3, 1000);
  const auto t20 = gradient_flow_reference(cfg20, 2.0, 1e-3, 2000);
  CHECK(std::abs(t10.w(t10.sample_count() - 1, 0) - t20.w(t20.sample_count() - 1, 0)) <= 1e-9);
}

TEST_CASE("second-order dynamics approach the gradient flow as theta grows") {
  // sup_{t in [1, T]} |w2(t) - wgf(t)| must shrink monotonically as theta doubles.
  double prev = 1e300;
  for (double theta : {10.0, 20.0, 40.0, 80.0}) {
    const auto cfg = scalar_config(2.0, 0.0, 0.0, DissipationSchedule::exponential(theta));
    const auto second = simulate(cfg, 100.0, 1e-3, 10);
    const auto flow = gradient_flow_reference(cfg, 100.0, 1e-3, 10);
    double sup = 0.0;
    for (int i = second.index_at_or_after(1.0); i < second.sample_count(); ++i)
      sup = std::max(sup, std::abs(second.w(i, 0) - flow.w(i, 0)));
    CHECK(sup < prev);
    prev = sup;
  }
}

TEST_CASE("dissipation schedule ratios") {
  CHECK(DissipationSchedule::constant().ratio(7.0) == 0.0);
  CHECK(DissipationSchedule::exponential(2.5).ratio(100.0) == 2.5);
  const auto power = DissipationSchedule::power(1.0, 2.0);
  CHECK(power.ratio(0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(power.ratio(3.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(DissipationSchedule::exponential(-1.0), parameter_error);
  CHECK_THROWS_AS(DissipationSchedule::power(0.0, 1.0), parameter_error);
  CHECK_THROWS_AS(DissipationSchedule::power(1.0, -1.0), parameter_error);
}

TEST_CASE("config validation") {
  auto cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::constant());
  cfg.masses = vec1(-1.0);
  CHECK_THROWS_AS(cfg.validate(), parameter_error);
  cfg.masses = VectorXd::Ones(2);
  CHECK_THROWS_AS(cfg.validate(), shape_error);
  cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::constant());
  CHECK_THROWS_AS(simulate(cfg, -1.0, 1e-3, 1), parameter_error);
  CHECK_THROWS_AS(simulate(cfg, 1.0, 0.0, 1), parameter_error);
  CHECK_THROWS_AS(simulate(cfg, 1.0, 1e-3, 0), parameter_error);
}

TEST_CASE("trajectory interpolation is exact at samples and cubic between") {
  const auto cfg = scalar_config(0.0, 1.0, 0.0, DissipationSchedule::constant());
  const auto traj = simulate(cfg, 10.0, 1e-3, 10);
  const int k = 500;
  CHECK((traj.w_at(traj.times[k]) - traj.w.row(k).transpose()).norm() == 0.0);
  // Between samples the cubic tracks cos(t) to the stencil error ~ dt^4.
  const double t = traj.times[k] + 0.004;
  CHECK(std::abs(traj.w_at(t)[0] - std::cos(t)) <= 1e-8);
  CHECK_THROWS_AS(traj.w_at(10.5), std::domain_error);
}
