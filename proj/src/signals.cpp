#include "enlab/signals.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace enlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

void eval_bank(const std::vector<SinusoidTerm>& terms, double t, VectorXd& x, VectorXd& xdot) {
  x.setZero();
  xdot.setZero();
  for (const auto& term : terms) {
    const double arg = kTwoPi * term.frequency * t + term.phase;
    x[term.dim] += term.amplitude * std::sin(arg);
    xdot[term.dim] += term.amplitude * kTwoPi * term.frequency * std::cos(arg);
  }
}
}  // namespace

const char* to_string(SignalKind k) {
  switch (k) {
    case SignalKind::Constant: return "constant";
    case SignalKind::SinusoidBank: return "sinusoid-bank";
    case SignalKind::PeriodicPlusDecay: return "periodic-plus-decay";
    case SignalKind::Tabulated: return "tabulated";
  }
  return "?";
}

SignalSample EnvironmentSignal::sample(double t) const {
  if (t < 0.0) throw std::domain_error("signal sample: t must be >= 0");
  if (t > domain_end_) throw std::domain_error("signal sample: t beyond tabulated range");
  return sampler_(t);
}

EnvironmentSignal EnvironmentSignal::constant(VectorXd value) {
  const int d = static_cast<int>(value.size());
  if (d < 1) throw parameter_error("constant signal: empty value");
  const VectorXd zero = VectorXd::Zero(d);
  auto s = [value = std::move(value), zero](double) { return SignalSample{value, zero}; };
  return EnvironmentSignal(d, SignalKind::Constant, std::move(s),
                           std::numeric_limits<double>::infinity());
}

EnvironmentSignal EnvironmentSignal::sinusoid_bank(int dim, std::vector<SinusoidTerm> terms,
                                                   VectorXd offset) {
  if (dim < 1) throw parameter_error("sinusoid bank: dimension must be positive");
  for (const auto& term : terms)
    if (term.dim < 0 || term.dim >= dim)
      throw parameter_error("sinusoid bank: term dimension out of range");
  if (offset.size() == 0) offset = VectorXd::Zero(dim);
  if (offset.size() != dim) throw shape_error("sinusoid bank: offset dimension mismatch");
  auto s = [dim, terms = std::move(terms), offset = std::move(offset)](double t) {
    SignalSample out{VectorXd(dim), VectorXd(dim)};
    eval_bank(terms, t, out.x, out.xdot);
    out.x += offset;
    return out;
  };
  return EnvironmentSignal(dim, SignalKind::SinusoidBank, std::move(s),
                           std::numeric_limits<double>::infinity());
}

EnvironmentSignal EnvironmentSignal::periodic_plus_decay(int dim, std::vector<SinusoidTerm> terms,
                                                         double amp_base, PowerDecay amp_decay,
                                                         PowerDecay add_decay,
                                                         VectorXd add_direction, VectorXd offset) {
  if (dim < 1) throw parameter_error("periodic-plus-decay: dimension must be positive");
  for (const auto& term : terms)
    if (term.dim < 0 || term.dim >= dim)
      throw parameter_error("periodic-plus-decay: term dimension out of range");
  if (add_direction.size() == 0) {
    add_direction = VectorXd::Zero(dim);
    add_direction[0] = 1.0;
  }
  if (add_direction.size() != dim)
    throw shape_error("periodic-plus-decay: direction dimension mismatch");
  if (offset.size() == 0) offset = VectorXd::Zero(dim);
  if (offset.size() != dim) throw shape_error("periodic-plus-decay: offset dimension mismatch");
  if (amp_decay.coeff != 0.0 && amp_decay.alpha <= 0.0)
    throw parameter_error("periodic-plus-decay: amplitude decay needs alpha > 0");
  if (add_decay.coeff != 0.0 && add_decay.alpha <= 0.0)
    throw parameter_error("periodic-plus-decay: additive decay needs alpha > 0");

  auto s = [dim, terms = std::move(terms), amp_base, amp_decay, add_decay,
            dir = std::move(add_direction), offset = std::move(offset)](double t) {
    SignalSample bank{VectorXd(dim), VectorXd(dim)};
    eval_bank(terms, t, bank.x, bank.xdot);
    const double g = amp_base + amp_decay.value(t);
    const double gdot = amp_decay.deriv(t);
    SignalSample out{VectorXd(dim), VectorXd(dim)};
    out.x = g * bank.x + add_decay.value(t) * dir + offset;
    out.xdot = g * bank.xdot + gdot * bank.x + add_decay.deriv(t) * dir;
    return out;
  };
  return EnvironmentSignal(dim, SignalKind::PeriodicPlusDecay, std::move(s),
                           std::numeric_limits<double>::infinity());
}

EnvironmentSignal EnvironmentSignal::tabulated(const std::vector<double>& ts, const MatrixXd& xs) {
  const int n = static_cast<int>(ts.size());
  if (n < 2) throw parameter_error("tabulated signal: need at least two rows");
  if (xs.rows() != n) throw shape_error("tabulated signal: row count mismatch");
  const int d = static_cast<int>(xs.cols());
  if (d < 1) throw parameter_error("tabulated signal: no components");

  auto splines = std::make_shared<std::vector<CubicSpline>>();
  splines->reserve(d);
  for (int j = 0; j < d; ++j) {
    std::vector<double> col(n);
    for (int i = 0; i < n; ++i) col[i] = xs(i, j);
    splines->emplace_back(ts, std::move(col));
  }
  const double t_end = ts.back();
  auto s = [d, splines](double t) {
    SignalSample out{VectorXd(d), VectorXd(d)};
    for (int j = 0; j < d; ++j) {
      out.x[j] = (*splines)[j].value(t);
      out.xdot[j] = (*splines)[j].derivative(t);
    }
    return out;
  };
  return EnvironmentSignal(d, SignalKind::Tabulated, std::move(s), t_end);
}

EnvironmentSignal EnvironmentSignal::tabulated_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parameter_error("tabulated signal: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw parameter_error("tabulated signal: empty file " + path);
  // Header `t,x_1,...,x_d` is required; only the column count is used.
  int cols = 1;
  for (char c : line)
    if (c == ',') ++cols;
  if (cols < 2) throw parameter_error("tabulated signal: header must be t,x_1,...,x_d");
  const int d = cols - 1;

  std::vector<double> ts;
  std::vector<double> flat;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int j = 0;
    while (std::getline(ss, cell, ',')) {
      const double v = std::stod(cell);
      if (j == 0)
        ts.push_back(v);
      else
        flat.push_back(v);
      ++j;
    }
    if (j != cols) throw parameter_error("tabulated signal: ragged row in " + path);
  }
  const int n = static_cast<int>(ts.size());
  if (n < 2) throw parameter_error("tabulated signal: need at least two rows in " + path);
  for (int i = 1; i < n; ++i)
    if (!(ts[i] > ts[i - 1]))
      throw parameter_error("tabulated signal: t column must be strictly increasing in " + path);
  MatrixXd xs(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) xs(i, j) = flat[i * d + j];
  return tabulated(ts, xs);
}

EnvironmentSignal EnvironmentSignal::from_sampler(int dim, SignalKind kind, Sampler s,
                                                  double domain_end) {
  if (dim < 1) throw parameter_error("signal: dimension must be positive");
  return EnvironmentSignal(dim, kind, std::move(s), domain_end);
}

AdvanceMap AdvanceMap::affine(double tau0) {
  if (!(tau0 > 0.0)) throw parameter_error("advance map: tau0 must be positive");
  AdvanceMap m;
  m.tau0_ = tau0;
  return m;
}

AdvanceMap AdvanceMap::tabulated(std::vector<double> ts, std::vector<double> gammas) {
  if (ts.size() != gammas.size()) throw shape_error("advance map: sample size mismatch");
  for (size_t i = 0; i < ts.size(); ++i)
    if (!(gammas[i] > ts[i])) throw parameter_error("advance map: tau(t) must be positive");
  for (size_t i = 1; i < gammas.size(); ++i)
    if (!(gammas[i] > gammas[i - 1]))
      throw parameter_error("advance map: gamma samples must be monotone increasing");
  AdvanceMap m;
  m.spline_ = std::make_shared<CubicSpline>(std::move(ts), std::move(gammas));
  return m;
}

double AdvanceMap::gamma(double t) const {
  if (!spline_) return t + tau0_;
  return spline_->value(t);
}

AdvanceMap::Validation AdvanceMap::validate(const std::vector<double>& grid) const {
  if (grid.empty()) throw parameter_error("advance map: empty validation grid");
  Validation v{std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity(), is_affine(), true};
  for (size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    v.min_tau = std::min(v.min_tau, tau(t));
    // Forward difference at grid resolution.
    const double dt = (i + 1 < grid.size()) ? grid[i + 1] - grid[i]
                                            : (grid.size() > 1 ? grid[i] - grid[i - 1] : 1e-3);
    if (dt > 0.0) {
      double slope;
      try {
        slope = (gamma(t + dt) - gamma(t)) / dt;
      } catch (const std::domain_error&) {
        continue;  // forward point outside a tabulated map's range
      }
      v.min_slope = std::min(v.min_slope, slope);
    }
  }
  if (!(v.min_tau > 0.0)) v.ok = false;
  if (!v.unit_slope && !(v.min_slope > 1.0 - 1e-9)) v.ok = false;
  return v;
}

EnvironmentSignal make_quasi_periodic(const EnvironmentSignal& base, double tau0, double epsilon,
                                      double alpha, double p, std::optional<VectorXd> direction) {
  if (!(epsilon > 0.0)) throw parameter_error("make_quasi_periodic: epsilon must be positive");
  if (!(alpha > 0.0)) throw parameter_error("make_quasi_periodic: alpha must be positive");
  if (!(tau0 > 0.0)) throw parameter_error("make_quasi_periodic: tau0 must be positive");

  // The construction only yields the claimed envelope if the base really is
  // tau0-periodic; probe a few shifts.
  for (double t : {0.0, 0.37, 1.91, 4.44, 7.3}) {
    const auto a = base.sample(t);
    const auto b = base.sample(t + tau0);
    if ((a.x - b.x).norm() > 1e-9 * (1.0 + a.x.norm()))
      throw parameter_error("make_quasi_periodic: base signal is not tau0-periodic");
  }

  VectorXd v;
  if (direction) {
    v = *direction;
    if (v.size() != base.dimension())
      throw shape_error("make_quasi_periodic: direction dimension mismatch");
    const double norm = v.norm();
    if (!(norm > 0.0)) throw parameter_error("make_quasi_periodic: zero direction");
    v /= norm;
  } else {
    v = VectorXd::Zero(base.dimension());
    v[0] = 1.0;
  }

  PowerDecay delta{epsilon / 2.0, alpha, p};
  auto s = [base, delta, v](double t) {
    SignalSample out = base.sample(t);
    out.x += delta.value(t) * v;
    out.xdot += delta.deriv(t) * v;
    return out;
  };
  return EnvironmentSignal::from_sampler(base.dimension(), SignalKind::PeriodicPlusDecay,
                                         std::move(s), base.domain_end());
}

QuasiPeriodReport verify_quasi_periodicity(const EnvironmentSignal& signal,
                                           const QuasiPeriodSpec& spec,
                                           const std::vector<double>& grid) {
  if (grid.empty()) throw parameter_error("verify_quasi_periodicity: empty grid");
  const auto validation = spec.gamma.validate(grid);
  QuasiPeriodReport rep{-std::numeric_limits<double>::infinity(), grid.front(), false,
                        validation.unit_slope, validation.min_slope};
  for (double t : grid) {
    const double g = spec.gamma.gamma(t);
    const auto a = signal.sample(t);
    const auto b = signal.sample(g);
    const double violation = (a.x - b.x).norm() - spec.envelope(t);
    if (violation > rep.max_violation) {
      rep.max_violation = violation;
      rep.worst_t = t;
    }
  }
  rep.pass = rep.max_violation <= 1e-12;
  return rep;
}

OrderEstimate estimate_order(const EnvironmentSignal& signal, const AdvanceMap& gamma,
                             const std::vector<double>& grid) {
  if (grid.empty()) throw parameter_error("estimate_order: empty grid");
  std::vector<double> ts, devs;
  ts.reserve(grid.size());
  devs.reserve(grid.size());
  double scale = 0.0;
  for (double t : grid) {
    const auto a = signal.sample(t);
    const auto b = signal.sample(gamma.gamma(t));
    ts.push_back(t);
    devs.push_back((a.x - b.x).norm());
    scale = std::max(scale, a.x.norm());
  }
  const double floor = 1e-12 * (1.0 + scale);
  int usable = 0;
  for (double d : devs)
    if (d > floor) ++usable;
  if (usable == 0) return {true, std::numeric_limits<double>::infinity(), 0};
  const double slope = fit_log_log_slope(ts, devs, /*alpha=*/1.0, floor);
  return {false, -slope, usable};
}

}  // namespace enlab
