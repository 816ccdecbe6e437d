#pragma once

#include <memory>
#include <string>
#include <vector>

#include "enlab/common.hpp"
#include "enlab/potentials.hpp"
#include "enlab/signals.hpp"

namespace enlab {

// Damping weight psi(t). Only the ratio psi'/psi ever enters the dynamics or
// the ledger, so exp(theta*t) is never formed and cannot overflow.
class DissipationSchedule {
 public:
  enum class Kind { Constant, Exponential, Power };

  static DissipationSchedule constant();
  static DissipationSchedule exponential(double theta);          // psi = e^{theta t}
  static DissipationSchedule power(double alpha, double k);      // psi = (alpha + t)^k

  Kind kind() const { return kind_; }
  double ratio(double t) const;  // psi'(t) / psi(t), >= 0 for all supported kinds
  double theta() const { return theta_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::Constant;
  double theta_ = 0.0;  // exponential rate
  double alpha_ = 1.0;  // power shift
  double k_ = 0.0;      // power exponent
};

struct AgentConfig {
  VectorXd masses;  // all strictly positive
  DissipationSchedule dissipation;
  std::shared_ptr<const PotentialModel> potential;
  std::shared_ptr<const EnvironmentSignal> signal;
  VectorXd w0;
  VectorXd wdot0;

  void validate() const;  // throws parameter_error / shape_error
};

struct AgentState {
  double t = 0.0;
  VectorXd w;
  VectorXd wdot;
};

// Quadrature increments accumulated over one integrator step, produced from
// the RK4 stage values with Simpson weights (1,2,2,1)/6 so the running
// integrals converge at the same O(h^4) order as the state.
struct StepLedgerDelta {
  double dZ = 0.0;      // (psi'/psi) * sum wdot_i^2
  double dE = 0.0;      // grad_x(V) . xdot
  double dWork = 0.0;   // grad_w(V) . wdot
};

// w''_i = -((psi'/psi) w'_i + dV/dw_i) / m_i
VectorXd acceleration(const AgentState& state, const AgentConfig& config);

AgentState step_rk4(const AgentState& state, const AgentConfig& config, double h);
AgentState step_rk4(const AgentState& state, const AgentConfig& config, double h,
                    StepLedgerDelta& delta);

struct EnergyLedger;  // energy.hpp

struct TrajectoryRecord {
  std::vector<double> times;
  MatrixXd w;      // samples x m
  MatrixXd wdot;   // samples x m
  std::vector<double> V;
  std::vector<double> K;
  std::vector<double> U;
  std::vector<double> Z;         // cumulative
  std::vector<double> E;         // cumulative
  std::vector<double> residual;  // Z + (U - U0) - E at each sample

  double h = 0.0;
  int sample_stride = 1;
  std::string method = "rk4";
  double U0 = 0.0;
  double U_final = 0.0;     // internal energy at T (T may fall between samples)
  double Z_total = 0.0;
  double E_total = 0.0;
  double work_total = 0.0;  // cumulative grad_w(V) . wdot, for cross-checks

  int sample_count() const { return static_cast<int>(times.size()); }
  double t_start() const { return times.front(); }
  double t_end() const { return times.back(); }
  double sample_dt() const { return h * sample_stride; }

  // Cubic interpolation of the stored samples (exact at sample times).
  VectorXd w_at(double t) const;
  VectorXd wdot_at(double t) const;
  int index_at_or_after(double t) const;
};

// Fixed-step RK4 over [0, T] with the energy ledger accumulated every step
// and the state recorded every sample_stride steps. Deterministic. Throws
// divergence_error naming the first bad step when the state leaves
// ||w|| <= 1e12 or turns non-finite.
TrajectoryRecord simulate(const AgentConfig& config, double T, double h, int sample_stride);

// First-order comparison flow w'_i = -dV/dw_i / theta (the large-theta limit
// of the second-order dynamics), integrated with the same fixed-step RK4.
TrajectoryRecord gradient_flow_reference(const AgentConfig& config, double T, double h,
                                         int sample_stride);

}  // namespace enlab
