#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "enlab/common.hpp"
#include "enlab/numerics.hpp"

namespace enlab {

enum class SignalKind { Constant, SinusoidBank, PeriodicPlusDecay, Tabulated };

const char* to_string(SignalKind k);

struct SignalSample {
  VectorXd x;
  VectorXd xdot;
};

// One sinusoidal term acting on a single component:
//   x_dim += amplitude * sin(2*pi*frequency*t + phase)
struct SinusoidTerm {
  int dim = 0;
  double amplitude = 1.0;
  double frequency = 1.0;
  double phase = 0.0;
};

// Power-law factor coeff / (alpha + t)^p with its exact derivative.
struct PowerDecay {
  double coeff = 0.0;
  double alpha = 1.0;
  double p = 1.0;

  double value(double t) const { return coeff * std::pow(alpha + t, -p); }
  double deriv(double t) const { return -p * coeff * std::pow(alpha + t, -p - 1.0); }
};

// Immutable input trajectory x(t) with exact derivative. Samplers are pure,
// so signals can be shared freely across threads.
class EnvironmentSignal {
 public:
  using Sampler = std::function<SignalSample(double)>;

  int dimension() const { return dim_; }
  SignalKind kind() const { return kind_; }
  double domain_end() const { return domain_end_; }

  // Throws std::domain_error for t < 0 or beyond a tabulated range.
  SignalSample sample(double t) const;

  static EnvironmentSignal constant(VectorXd value);
  static EnvironmentSignal sinusoid_bank(int dim, std::vector<SinusoidTerm> terms,
                                         VectorXd offset = VectorXd());

  // x(t) = (amp_base + amp_decay(t)) * bank(t) + add_decay(t) * direction + offset
  // where bank is a sinusoid bank without offset. Covers additive decay
  // (amp_base = 1, amp_decay = 0) and amplitude-damped oscillations
  // (amp_base = 0) with one closed form.
  static EnvironmentSignal periodic_plus_decay(int dim, std::vector<SinusoidTerm> terms,
                                               double amp_base, PowerDecay amp_decay,
                                               PowerDecay add_decay, VectorXd add_direction,
                                               VectorXd offset = VectorXd());

  static EnvironmentSignal tabulated(const std::vector<double>& ts,
                                     const MatrixXd& xs);  // rows = len(ts)
  // CSV with header `t,x_1,...,x_d` and strictly increasing t.
  static EnvironmentSignal tabulated_from_csv(const std::string& path);

  // Escape hatch for bespoke closed forms (tests, generated scenarios).
  static EnvironmentSignal from_sampler(int dim, SignalKind kind, Sampler s,
                                        double domain_end);

 private:
  EnvironmentSignal(int dim, SignalKind kind, Sampler s, double domain_end)
      : dim_(dim), kind_(kind), sampler_(std::move(s)), domain_end_(domain_end) {}

  int dim_;
  SignalKind kind_;
  Sampler sampler_;
  double domain_end_;
};

// Advance map gamma(t) = t + tau(t), tau > 0. Affine keeps tau constant
// (gamma' = 1, admitted as the boundary case and flagged); tabulated maps
// interpolate monotone samples of gamma with a cubic spline.
class AdvanceMap {
 public:
  static AdvanceMap affine(double tau0);
  static AdvanceMap tabulated(std::vector<double> ts, std::vector<double> gammas);

  double gamma(double t) const;
  double tau(double t) const { return gamma(t) - t; }
  bool is_affine() const { return !spline_; }

  struct Validation {
    double min_tau;
    double min_slope;        // forward-difference gamma' over the grid
    bool unit_slope;         // affine boundary convention gamma' = 1
    bool ok;                 // tau > 0 and (unit_slope or slope > 1 - 1e-9)
  };
  Validation validate(const std::vector<double>& grid) const;

 private:
  AdvanceMap() = default;
  double tau0_ = 0.0;
  std::shared_ptr<const CubicSpline> spline_;
};

struct QuasiPeriodSpec {
  double epsilon = 1.0;
  double alpha = 1.0;
  double p = 1.0;
  AdvanceMap gamma = AdvanceMap::affine(1.0);

  double envelope(double t) const { return epsilon * std::pow(alpha + t, -p); }
};

struct QuasiPeriodReport {
  double max_violation;  // max over grid of ||x(t) - x(gamma(t))|| - envelope(t)
  double worst_t;
  bool pass;             // max_violation <= 1e-12
  bool boundary_unit_slope;
  double min_gamma_slope;
};

// Adds a decaying perturbation (eps/2)/(alpha+t)^p * direction to an exactly
// tau0-periodic base, so the result satisfies the quasi-periodicity envelope
// eps/(alpha+t)^p under gamma(t) = t + tau0 whenever p >= 0.
EnvironmentSignal make_quasi_periodic(const EnvironmentSignal& base, double tau0,
                                      double epsilon, double alpha, double p,
                                      std::optional<VectorXd> direction = std::nullopt);

QuasiPeriodReport verify_quasi_periodicity(const EnvironmentSignal& signal,
                                           const QuasiPeriodSpec& spec,
                                           const std::vector<double>& grid);

struct OrderEstimate {
  bool exactly_periodic;  // all deviations at or below the noise floor
  double p_hat;           // valid when !exactly_periodic
  int points_used;
};

// Least-squares slope of log||x(t) - x(gamma(t))|| against log(1 + t),
// negated. Deviations below 1e-12 * (1 + max||x||) count as zero.
OrderEstimate estimate_order(const EnvironmentSignal& signal, const AdvanceMap& gamma,
                             const std::vector<double>& grid);

}  // namespace enlab
