#include "enlab/dynamics.hpp"

#include <cmath>

#include "enlab/energy.hpp"

namespace enlab {

DissipationSchedule DissipationSchedule::constant() {
  return DissipationSchedule{};
}

DissipationSchedule DissipationSchedule::exponential(double theta) {
  if (theta < 0.0) throw parameter_error("dissipation: exponential rate must be >= 0");
  DissipationSchedule s;
  s.kind_ = Kind::Exponential;
  s.theta_ = theta;
  return s;
}

DissipationSchedule DissipationSchedule::power(double alpha, double k) {
  if (!(alpha > 0.0)) throw parameter_error("dissipation: power schedule needs alpha > 0");
  if (k < 0.0) throw parameter_error("dissipation: power exponent must be >= 0");
  DissipationSchedule s;
  s.kind_ = Kind::Power;
  s.alpha_ = alpha;
  s.k_ = k;
  return s;
}

double DissipationSchedule::ratio(double t) const {
  switch (kind_) {
    case Kind::Constant: return 0.0;
    case Kind::Exponential: return theta_;
    case Kind::Power: return k_ / (alpha_ + t);
  }
  return 0.0;
}

std::string DissipationSchedule::describe() const {
  switch (kind_) {
    case Kind::Constant: return "constant";
    case Kind::Exponential: return "exponential theta=" + fmt_short(theta_);
    case Kind::Power: return "power alpha=" + fmt_short(alpha_) + " k=" + fmt_short(k_);
  }
  return "?";
}

void AgentConfig::validate() const {
  if (!potential) throw parameter_error("agent config: missing potential");
  if (!signal) throw parameter_error("agent config: missing signal");
  const int m = potential->weight_dim();
  if (signal->dimension() != potential->input_dim())
    throw shape_error("agent config: signal/potential dimension mismatch");
  if (masses.size() != m) throw shape_error("agent config: masses dimension mismatch");
  if ((masses.array() <= 0.0).any())
    throw parameter_error("agent config: masses must be strictly positive");
  if (w0.size() != m || wdot0.size() != m)
    throw shape_error("agent config: initial state dimension mismatch");
}

VectorXd acceleration(const AgentState& state, const AgentConfig& config) {
  const auto sig = config.signal->sample(state.t);
  const VectorXd g = config.potential->grad_w(sig.x, state.w);
  if (!g.allFinite())
    throw divergence_error("acceleration: non-finite gradient", state.t, -1);
  const double ratio = config.dissipation.ratio(state.t);
  return (-(ratio * state.wdot + g).array() / config.masses.array()).matrix();
}

namespace {

struct StageEval {
  VectorXd kw;     // dw/dt at the stage
  VectorXd kv;     // dwdot/dt at the stage
  double zdot;     // ledger integrands at the stage
  double edot;
  double workdot;
};

StageEval eval_stage(double t, const VectorXd& w, const VectorXd& wdot,
                     const AgentConfig& config) {
  const auto sig = config.signal->sample(t);
  const VectorXd gw = config.potential->grad_w(sig.x, w);
  const VectorXd gx = config.potential->grad_x(sig.x, w);
  const double ratio = config.dissipation.ratio(t);
  StageEval s;
  s.kw = wdot;
  s.kv = (-(ratio * wdot + gw).array() / config.masses.array()).matrix();
  s.zdot = ratio * wdot.squaredNorm();
  s.edot = gx.dot(sig.xdot);
  s.workdot = gw.dot(wdot);
  return s;
}

AgentState rk4_sweep(const AgentState& state, const AgentConfig& config, double h,
                     StepLedgerDelta& delta) {
  const double t = state.t;
  const StageEval s1 = eval_stage(t, state.w, state.wdot, config);
  const StageEval s2 = eval_stage(t + 0.5 * h, state.w + 0.5 * h * s1.kw,
                                  state.wdot + 0.5 * h * s1.kv, config);
  const StageEval s3 = eval_stage(t + 0.5 * h, state.w + 0.5 * h * s2.kw,
                                  state.wdot + 0.5 * h * s2.kv, config);
  const StageEval s4 =
      eval_stage(t + h, state.w + h * s3.kw, state.wdot + h * s3.kv, config);

  AgentState next;
  next.t = t + h;
  next.w = state.w + h / 6.0 * (s1.kw + 2.0 * s2.kw + 2.0 * s3.kw + s4.kw);
  next.wdot = state.wdot + h / 6.0 * (s1.kv + 2.0 * s2.kv + 2.0 * s3.kv + s4.kv);
  delta.dZ = h / 6.0 * (s1.zdot + 2.0 * s2.zdot + 2.0 * s3.zdot + s4.zdot);
  delta.dE = h / 6.0 * (s1.edot + 2.0 * s2.edot + 2.0 * s3.edot + s4.edot);
  delta.dWork = h / 6.0 * (s1.workdot + 2.0 * s2.workdot + 2.0 * s3.workdot + s4.workdot);
  return next;
}

void check_finite(const AgentState& state, long step) {
  if (!state.w.allFinite() || !state.wdot.allFinite())
    throw divergence_error("trajectory diverged (non-finite state) at t=" + fmt_short(state.t) +
                               " step=" + std::to_string(step),
                           state.t, step);
  if (state.w.norm() > 1e12)
    throw divergence_error("trajectory diverged (||w|| > 1e12) at t=" + fmt_short(state.t) +
                               " step=" + std::to_string(step),
                           state.t, step);
}

}  // namespace

AgentState step_rk4(const AgentState& state, const AgentConfig& config, double h,
                    StepLedgerDelta& delta) {
  if (!(h > 0.0)) throw parameter_error("step_rk4: h must be positive");
  AgentState next = rk4_sweep(state, config, h, delta);
  check_finite(next, -1);
  return next;
}

AgentState step_rk4(const AgentState& state, const AgentConfig& config, double h) {
  StepLedgerDelta delta;
  return step_rk4(state, config, h, delta);
}

VectorXd TrajectoryRecord::w_at(double t) const {
  return interpolate_uniform_cubic(times.front(), sample_dt(), w, t);
}

VectorXd TrajectoryRecord::wdot_at(double t) const {
  return interpolate_uniform_cubic(times.front(), sample_dt(), wdot, t);
}

int TrajectoryRecord::index_at_or_after(double t) const {
  const double dt = sample_dt();
  const int idx = static_cast<int>(std::ceil((t - times.front()) / dt - 1e-9));
  if (idx < 0 || idx >= sample_count())
    throw parameter_error("trajectory index out of range");
  return idx;
}

TrajectoryRecord simulate(const AgentConfig& config, double T, double h, int sample_stride) {
  config.validate();
  if (!(T > 0.0)) throw parameter_error("simulate: T must be positive");
  if (!(h > 0.0)) throw parameter_error("simulate: h must be positive");
  if (sample_stride < 1) throw parameter_error("simulate: sample_stride must be >= 1");
  const long steps = std::lround(T / h);
  if (steps < 1) throw parameter_error("simulate: horizon shorter than one step");

  const int m = config.potential->weight_dim();
  const long samples = steps / sample_stride + 1;
  TrajectoryRecord rec;
  rec.h = h;
  rec.sample_stride = sample_stride;
  rec.method = "rk4";
  rec.times.reserve(samples);
  rec.w.resize(samples, m);
  rec.wdot.resize(samples, m);
  rec.V.reserve(samples);
  rec.K.reserve(samples);
  rec.U.reserve(samples);
  rec.Z.reserve(samples);
  rec.E.reserve(samples);
  rec.residual.reserve(samples);

  AgentState state{0.0, config.w0, config.wdot0};
  check_finite(state, 0);

  EnergyLedger ledger;
  ledger.reset(internal_energy(state, config));
  rec.U0 = ledger.U0;

  auto record_sample = [&](long row, const AgentState& s) {
    rec.times.push_back(s.t);
    rec.w.row(row) = s.w.transpose();
    rec.wdot.row(row) = s.wdot.transpose();
    const double v = config.potential->value(config.signal->sample(s.t).x, s.w);
    const double k = kinetic(s, config.masses);
    rec.V.push_back(v);
    rec.K.push_back(k);
    rec.U.push_back(v + k);
    rec.Z.push_back(ledger.Z);
    rec.E.push_back(ledger.E);
    rec.residual.push_back(ledger.Z + (v + k - ledger.U0) - ledger.E);
  };

  long row = 0;
  record_sample(row++, state);
  StepLedgerDelta delta;
  for (long step = 1; step <= steps; ++step) {
    AgentState next = rk4_sweep(state, config, h, delta);
    next.t = step * h;  // keeps sample times exact multiples of h
    check_finite(next, step);
    accumulate(ledger, delta, next, config);
    state = std::move(next);
    if (step % sample_stride == 0) record_sample(row++, state);
  }
  rec.w.conservativeResize(row, m);
  rec.wdot.conservativeResize(row, m);
  rec.U_final = ledger.U;
  rec.Z_total = ledger.Z;
  rec.E_total = ledger.E;
  rec.work_total = ledger.work;
  return rec;
}

TrajectoryRecord gradient_flow_reference(const AgentConfig& config, double T, double h,
                                         int sample_stride) {
  config.validate();
  if (config.dissipation.kind() != DissipationSchedule::Kind::Exponential ||
      !(config.dissipation.theta() > 0.0))
    throw parameter_error("gradient_flow_reference: needs exponential dissipation with theta > 0");
  if (!(T > 0.0) || !(h > 0.0)) throw parameter_error("gradient_flow_reference: T, h must be > 0");
  if (sample_stride < 1) throw parameter_error("gradient_flow_reference: sample_stride >= 1");

  const double theta = config.dissipation.theta();
  const int m = config.potential->weight_dim();
  const long steps = std::lround(T / h);
  const long samples = steps / sample_stride + 1;

  auto flow = [&](double t, const VectorXd& w) -> VectorXd {
    const auto sig = config.signal->sample(t);
    return -config.potential->grad_w(sig.x, w) / theta;
  };

  TrajectoryRecord rec;
  rec.h = h;
  rec.sample_stride = sample_stride;
  rec.method = "gradient-flow-rk4";
  rec.w.resize(samples, m);
  rec.wdot.resize(samples, m);

  VectorXd w = config.w0;
  auto record_sample = [&](long row, double t, const VectorXd& wv) {
    const VectorXd wd = flow(t, wv);
    rec.times.push_back(t);
    rec.w.row(row) = wv.transpose();
    rec.wdot.row(row) = wd.transpose();
    const double v = config.potential->value(config.signal->sample(t).x, wv);
    rec.V.push_back(v);
    rec.K.push_back(0.0);
    rec.U.push_back(v);
    rec.Z.push_back(0.0);
    rec.E.push_back(0.0);
    rec.residual.push_back(0.0);
  };
  rec.U0 = config.potential->value(config.signal->sample(0.0).x, w);

  long row = 0;
  record_sample(row++, 0.0, w);
  for (long step = 1; step <= steps; ++step) {
    const double t = (step - 1) * h;
    const VectorXd k1 = flow(t, w);
    const VectorXd k2 = flow(t + 0.5 * h, w + 0.5 * h * k1);
    const VectorXd k3 = flow(t + 0.5 * h, w + 0.5 * h * k2);
    const VectorXd k4 = flow(t + h, w + h * k3);
    w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!w.allFinite() || w.norm() > 1e12)
      throw divergence_error("gradient flow diverged at t=" + fmt_short(step * h), step * h, step);
    if (step % sample_stride == 0) record_sample(row++, step * h, w);
  }
  rec.w.conservativeResize(row, m);
  rec.wdot.conservativeResize(row, m);
  rec.U_final = config.potential->value(config.signal->sample(steps * h).x, w);
  return rec;
}

}  // namespace enlab
