#pragma once

#include <map>
#include <string>

#include "enlab/dynamics.hpp"
#include "enlab/energy.hpp"
#include "enlab/signals.hpp"

namespace enlab {

enum class TheoremId { PseudoPeriodDecay, EnvironmentalEnergy, Convergence };
enum class Verdict { Pass, Fail, NotApplicable };

const char* to_string(TheoremId id);
const char* to_string(Verdict v);

// Outcome of one end-to-end theorem experiment. measured/params use ordered
// maps so serialization is deterministic.
struct TheoremReport {
  TheoremId id;
  std::string scenario;
  Verdict verdict = Verdict::Fail;
  std::map<std::string, double> measured;
  std::map<std::string, double> params;
  std::string note;

  std::string to_text() const;      // structured multi-line block
  std::string summary_row() const;  // single machine-readable line
};

struct PseudoPeriodOptions {
  double transient_fraction = 0.1;  // discarded before fitting
  double slack = 0.2;               // allowance on the fitted exponent
};

// Measures ||w(t) - w(gamma(t))|| along the trajectory (cubic interpolation
// at gamma(t)), fits the tail exponent on log-log axes, and checks the series
// against the envelope B_w / (alpha + t)^(p - 1/2) with B_w calibrated on the
// first geometric half of the fit range and tested on the second.
// Requires p > 0, p != 1/2, and a horizon long enough that gamma stays inside
// the record past the transient cut.
TheoremReport pseudo_period_deviation(const TrajectoryRecord& traj, const QuasiPeriodSpec& spec,
                                      const std::string& scenario,
                                      const PseudoPeriodOptions& opts = {});

// Cumulative integral of |grad_x(V) . xdot| with a 1% plateau test between
// check_horizon/2 and check_horizon. Order p <= 3/2 is reported as
// not-applicable rather than failed. check_horizon <= 0 uses the full record.
TheoremReport environmental_energy_boundedness(const TrajectoryRecord& traj,
                                               const PotentialModel& model,
                                               const EnvironmentSignal& signal,
                                               const QuasiPeriodSpec& spec,
                                               const std::string& scenario,
                                               double check_horizon = 0.0);

// w_bar = mean of the trailing tail_fraction of samples; passes when both
// ||w - w_bar|| and ||wdot|| stay below 1e-2 on that tail.
TheoremReport convergence_check(const TrajectoryRecord& traj, double tail_fraction,
                                const std::string& scenario);

}  // namespace enlab
