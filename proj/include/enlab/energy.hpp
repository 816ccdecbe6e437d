#pragma once

#include "enlab/dynamics.hpp"

namespace enlab {

// Running energy bookkeeping along one trajectory. One ledger per trajectory;
// never shared across workers.
struct EnergyLedger {
  double U0 = 0.0;     // internal energy at t = 0
  double Z = 0.0;      // dissipated energy, quadrature of (psi'/psi) sum wdot_i^2
  double E = 0.0;      // environmental energy, quadrature of grad_x(V) . xdot
  double work = 0.0;   // quadrature of grad_w(V) . wdot (internal cross-check)
  double U = 0.0;      // latest V + K

  void reset(double initial_U) {
    U0 = initial_U;
    U = initial_U;
    Z = E = work = 0.0;
  }
};

// K = 1/2 sum m_i wdot_i^2
double kinetic(const AgentState& state, const VectorXd& masses);

double internal_energy(const AgentState& state, const AgentConfig& config);

// Folds one step's Simpson increments into the ledger and refreshes U from
// the post-step state.
void accumulate(EnergyLedger& ledger, const StepLedgerDelta& delta, const AgentState& next,
                const AgentConfig& config);

// Spec'd form: recomputes the RK4 stage quadrature from prev and verifies it
// reproduces next (bitwise, both come from the same sweep).
void accumulate(EnergyLedger& ledger, const AgentState& prev, const AgentState& next,
                const AgentConfig& config, double h);

// Z + (U - U0) - E; identically zero for the continuous dynamics.
double balance_residual(const EnergyLedger& ledger);

struct CorollaryReport {
  double delta_U;
  double E;
  bool pass;  // delta_U <= E + 1e-6 * (1 + |E|)
};
CorollaryReport check_corollary(const EnergyLedger& ledger);

struct PerfectLearningReport {
  double max_dVdt;  // max |grad_x(V(x(t), w_bar)) . xdot(t)| over [0, T]
  double E;         // its signed integral
};

// Freezes the weights at w_bar (no dynamics) and integrates dV/dt along the
// signal with composite Simpson at step h.
PerfectLearningReport perfect_learning_probe(const PotentialModel& model,
                                             const EnvironmentSignal& signal,
                                             const VectorXd& w_bar, double T, double h);

}  // namespace enlab
