#include "enlab/verify.hpp"

#include <cmath>
#include <sstream>

#include "enlab/numerics.hpp"

namespace enlab {

const char* to_string(TheoremId id) {
  switch (id) {
    case TheoremId::PseudoPeriodDecay: return "pseudo-period-decay";
    case TheoremId::EnvironmentalEnergy: return "environmental-energy-bounded";
    case TheoremId::Convergence: return "convergence";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotApplicable: return "not-applicable";
  }
  return "?";
}

std::string TheoremReport::to_text() const {
  std::ostringstream out;
  out << "[" << to_string(id) << "] scenario=" << scenario << " verdict=" << to_string(verdict)
      << "\n";
  for (const auto& [k, v] : params) out << "  param " << k << " = " << fmt_short(v) << "\n";
  for (const auto& [k, v] : measured) out << "  measured " << k << " = " << fmt_short(v) << "\n";
  if (!note.empty()) out << "  note: " << note << "\n";
  return out.str();
}

std::string TheoremReport::summary_row() const {
  std::ostringstream out;
  out << scenario << "," << to_string(id) << "," << to_string(verdict);
  for (const auto& [k, v] : measured) out << "," << k << "=" << fmt_short(v);
  return out.str();
}

TheoremReport pseudo_period_deviation(const TrajectoryRecord& traj, const QuasiPeriodSpec& spec,
                                      const std::string& scenario,
                                      const PseudoPeriodOptions& opts) {
  if (!(spec.p > 0.0) || spec.p == 0.5)
    throw parameter_error("pseudo_period_deviation: requires order p > 0 with p != 1/2");

  TheoremReport rep;
  rep.id = TheoremId::PseudoPeriodDecay;
  rep.scenario = scenario;
  rep.params["p"] = spec.p;
  rep.params["alpha"] = spec.alpha;
  rep.params["epsilon"] = spec.epsilon;
  rep.params["transient_fraction"] = opts.transient_fraction;

  const double horizon = traj.t_end();
  const double t_lo = opts.transient_fraction * horizon;
  // Largest t whose advanced image still lies inside the record.
  double t_hi = traj.t_end();
  while (t_hi > t_lo && spec.gamma.gamma(t_hi) > traj.t_end()) t_hi -= traj.sample_dt();
  if (!(t_hi > t_lo * 1.5))
    throw parameter_error("pseudo_period_deviation: horizon too short for the advance map");

  const int i_lo = traj.index_at_or_after(t_lo);
  const int i_hi = traj.index_at_or_after(t_hi);
  std::vector<double> ts, devs;
  ts.reserve(i_hi - i_lo + 1);
  devs.reserve(i_hi - i_lo + 1);
  for (int i = i_lo; i <= i_hi; ++i) {
    const double t = traj.times[i];
    const double g = spec.gamma.gamma(t);
    if (g > traj.t_end()) break;
    const VectorXd dev = traj.w.row(i).transpose() - traj.w_at(g);
    ts.push_back(t);
    devs.push_back(dev.norm());
  }
  if (ts.size() < 16)
    throw parameter_error("pseudo_period_deviation: too few usable samples");

  const double exponent = fit_log_log_slope(ts, devs, spec.alpha, 0.0);
  const double decay_order = spec.p - 0.5;
  rep.measured["fitted_exponent"] = exponent;
  rep.measured["required_exponent"] = -decay_order + opts.slack;

  // Envelope constant from the first geometric half, tested on the second.
  const double t_split = std::sqrt(ts.front() * ts.back());
  double B_hat = 0.0;
  for (size_t i = 0; i < ts.size(); ++i)
    if (ts[i] <= t_split)
      B_hat = std::max(B_hat, devs[i] * std::pow(spec.alpha + ts[i], decay_order));
  bool bounded = true;
  double worst_ratio = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] <= t_split) continue;
    const double envelope = B_hat * std::pow(spec.alpha + ts[i], -decay_order);
    const double ratio = envelope > 0.0 ? devs[i] / envelope : (devs[i] > 0.0 ? 1e300 : 0.0);
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 1.0 + 1e-9) bounded = false;
  }
  rep.measured["B_hat"] = B_hat;
  rep.measured["worst_envelope_ratio"] = worst_ratio;
  rep.measured["fit_t_lo"] = ts.front();
  rep.measured["fit_t_hi"] = ts.back();

  const bool exponent_ok = exponent <= -decay_order + opts.slack;
  rep.verdict = (exponent_ok && bounded) ? Verdict::Pass : Verdict::Fail;
  if (spec.gamma.is_affine()) rep.note = "advance map has unit slope (boundary case)";
  return rep;
}

TheoremReport environmental_energy_boundedness(const TrajectoryRecord& traj,
                                               const PotentialModel& model,
                                               const EnvironmentSignal& signal,
                                               const QuasiPeriodSpec& spec,
                                               const std::string& scenario,
                                               double check_horizon) {
  TheoremReport rep;
  rep.id = TheoremId::EnvironmentalEnergy;
  rep.scenario = scenario;
  rep.params["p"] = spec.p;

  if (!(spec.p > 1.5)) {
    rep.verdict = Verdict::NotApplicable;
    rep.note = "order p <= 3/2: boundedness hypothesis not met";
    return rep;
  }

  const double T = check_horizon > 0.0 ? check_horizon : traj.t_end();
  if (T > traj.t_end() + 1e-9)
    throw parameter_error("environmental_energy_boundedness: horizon beyond the record");
  rep.params["check_horizon"] = T;

  const int count = traj.index_at_or_after(T) + 1;
  std::vector<double> integrand(count);
  double sup_xdot = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto sig = signal.sample(traj.times[i]);
    const VectorXd w = traj.w.row(i).transpose();
    integrand[i] = std::abs(model.grad_x(sig.x, w).dot(sig.xdot));
    sup_xdot = std::max(sup_xdot, sig.xdot.norm());
  }
  const auto cum = cumulative_simpson(integrand, traj.sample_dt());
  const int i_half = traj.index_at_or_after(T / 2.0);
  const double C_half = cum[i_half];
  const double C_full = cum[count - 1];
  const double increment = C_full - C_half;

  rep.measured["C_E_hat"] = C_full;
  rep.measured["C_half"] = C_half;
  rep.measured["increment_fraction"] = C_full > 0.0 ? increment / C_full : 0.0;
  rep.measured["sup_xdot"] = sup_xdot;
  rep.verdict = (increment <= 0.01 * C_full) ? Verdict::Pass : Verdict::Fail;
  return rep;
}

TheoremReport convergence_check(const TrajectoryRecord& traj, double tail_fraction,
                                const std::string& scenario) {
  if (!(tail_fraction > 0.0) || !(tail_fraction <= 1.0))
    throw parameter_error("convergence_check: tail_fraction must lie in (0, 1]");
  TheoremReport rep;
  rep.id = TheoremId::Convergence;
  rep.scenario = scenario;
  rep.params["tail_fraction"] = tail_fraction;

  const int n = traj.sample_count();
  const int start = std::max(0, n - std::max(2, static_cast<int>(std::lround(n * tail_fraction))));
  VectorXd w_bar = VectorXd::Zero(traj.w.cols());
  for (int i = start; i < n; ++i) w_bar += traj.w.row(i).transpose();
  w_bar /= static_cast<double>(n - start);

  double max_dev = 0.0;
  double max_speed = 0.0;
  for (int i = start; i < n; ++i) {
    max_dev = std::max(max_dev, (traj.w.row(i).transpose() - w_bar).norm());
    max_speed = std::max(max_speed, traj.wdot.row(i).norm());
  }
  rep.measured["max_tail_deviation"] = max_dev;
  rep.measured["max_tail_speed"] = max_speed;
  rep.measured["w_bar_norm"] = w_bar.norm();
  for (int j = 0; j < w_bar.size(); ++j)
    rep.measured["w_bar_" + std::to_string(j)] = w_bar[j];
  rep.verdict = (max_dev <= 1e-2 && max_speed <= 1e-2) ? Verdict::Pass : Verdict::Fail;
  return rep;
}

}  // namespace enlab
