#include "enlab/energy.hpp"

#include <cmath>

namespace enlab {

double kinetic(const AgentState& state, const VectorXd& masses) {
  if (masses.size() != state.wdot.size()) throw shape_error("kinetic: masses dimension mismatch");
  return 0.5 * (masses.array() * state.wdot.array().square()).sum();
}

double internal_energy(const AgentState& state, const AgentConfig& config) {
  const auto sig = config.signal->sample(state.t);
  return config.potential->value(sig.x, state.w) + kinetic(state, config.masses);
}

void accumulate(EnergyLedger& ledger, const StepLedgerDelta& delta, const AgentState& next,
                const AgentConfig& config) {
  ledger.Z += delta.dZ;
  ledger.E += delta.dE;
  ledger.work += delta.dWork;
  ledger.U = internal_energy(next, config);
}

void accumulate(EnergyLedger& ledger, const AgentState& prev, const AgentState& next,
                const AgentConfig& config, double h) {
  StepLedgerDelta delta;
  const AgentState recomputed = step_rk4(prev, config, h, delta);
  if ((recomputed.w.array() != next.w.array()).any() ||
      (recomputed.wdot.array() != next.wdot.array()).any())
    throw parameter_error("accumulate: states are not consecutive integrator states");
  accumulate(ledger, delta, next, config);
}

double balance_residual(const EnergyLedger& ledger) {
  return ledger.Z + (ledger.U - ledger.U0) - ledger.E;
}

CorollaryReport check_corollary(const EnergyLedger& ledger) {
  const double delta_U = ledger.U - ledger.U0;
  const double tol = 1e-6 * (1.0 + std::abs(ledger.E));
  return CorollaryReport{delta_U, ledger.E, delta_U <= ledger.E + tol};
}

PerfectLearningReport perfect_learning_probe(const PotentialModel& model,
                                             const EnvironmentSignal& signal,
                                             const VectorXd& w_bar, double T, double h) {
  if (!(T > 0.0) || !(h > 0.0)) throw parameter_error("perfect_learning_probe: T, h must be > 0");
  long n = std::lround(T / h);
  if (n < 2) n = 2;
  if (n % 2 != 0) ++n;  // composite Simpson wants an even interval count
  const double dt = T / static_cast<double>(n);

  PerfectLearningReport rep{0.0, 0.0};
  double simpson = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double t = (i == n) ? T : i * dt;
    const auto sig = signal.sample(t);
    const double dVdt = model.grad_x(sig.x, w_bar).dot(sig.xdot);
    rep.max_dVdt = std::max(rep.max_dVdt, std::abs(dVdt));
    const double weight = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    simpson += weight * dVdt;
  }
  rep.E = simpson * dt / 3.0;
  return rep;
}

}  // namespace enlab
