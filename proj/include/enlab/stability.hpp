#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "enlab/common.hpp"

namespace enlab {

enum class MatrixNorm { One, Two, Inf };

// Logarithmic norm (matrix measure) mu(P) = lim_{h->0+} (||I + h P|| - 1)/h,
// in closed form per induced norm:
//   norm 2:   largest eigenvalue of (P + P^T)/2
//   norm 1:   max_j [ P_jj + sum_{i != j} |P_ij| ]
//   norm inf: max_i [ P_ii + sum_{j != i} |P_ij| ]
double matrix_measure(const MatrixXd& P, MatrixNorm norm);

double spectral_norm(const MatrixXd& P);

// Second-order linear time-varying system  x'' + 2 A(t) x' + B(t) x = 0.
class TimeVaryingSystem {
 public:
  using MatrixProvider = std::function<MatrixXd(double)>;

  static TimeVaryingSystem constant(MatrixXd A, MatrixXd B);
  static TimeVaryingSystem from_functions(int n, MatrixProvider A, MatrixProvider B);
  // CSV header `t,a_11..a_nn,b_11..b_nn` (row-major), strictly increasing t;
  // entries interpolated linearly between grid rows.
  static TimeVaryingSystem from_csv_grid(const std::string& path, int n);

  int dim() const { return n_; }
  MatrixXd A_at(double t) const;
  MatrixXd B_at(double t) const;

 private:
  TimeVaryingSystem(int n, MatrixProvider A, MatrixProvider B)
      : n_(n), A_(std::move(A)), B_(std::move(B)) {}
  int n_;
  MatrixProvider A_;
  MatrixProvider B_;
};

// Witness of exponential stability: ||Phi(t, t0)|| <= gamma e^{-lambda (t-t0)}.
struct StabilityCertificate {
  double m = 0.0;       // the constant whose existence the criterion requires
  double l = 0.0;       // sup_t max(0, 2 mu2(mI - A(t)))
  double c = 0.0;       // sup_t ||2mA(t) - m^2 I - B(t)||_2 (or its eigen bound)
  double margin = 0.0;  // l + sqrt(l^2 + 4c) - 2m, negative when certified
  double lambda = 0.0;  // decay rate, m - (l + sqrt(l^2 + 4c))/2
  double chi = 1.0;            // eigenvector condition sup (second form only)
  double lambda_min = 0.0;     // infimum eigenvalue of B(t) (second form only)
  int t_grid_points = 0;       // suprema were taken over this finite grid
  std::string method;          // "sun" or "homogeneous"
};

// Grid-searched certificate for x'' + 2A(t)x' + B(t)x = 0: first m in m_grid
// with negative margin wins. Suprema are over t_grid, so a too-coarse grid is
// the caller's responsibility (the certificate records the grid size).
std::optional<StabilityCertificate> certify_sun(const TimeVaryingSystem& system,
                                                const std::vector<double>& m_grid,
                                                const std::vector<double>& t_grid);

// Per-m quantities of the criterion above, for hand checks.
StabilityCertificate sun_quantities(const TimeVaryingSystem& system, double m,
                                    const std::vector<double>& t_grid);

// Spectrum/conditioning summary for w'' + theta w' + B(t) w = 0.
struct HomogeneousAnalysis {
  double lambda_min = 0.0;   // min over grid of min eigenvalue of B(t)
  double chi = 1.0;          // max over grid of cond_2 of the eigenvector matrix
  bool cond1 = false;            // theta^2 >= 4 lambda_min
  bool cond2_literal = false;    // theta^2 >= 4 lambda_min * chi * (1 + chi) / chi
  bool cond2_simplified = false; // theta^2 >= 4 lambda_min * (1 + chi)
  double window_lo = 0.0;    // (theta chi - sqrt(chi^2 theta^2 - 4 chi (1+chi) lambda_min)) / (2(1+chi))
  double window_hi = 0.0;    // theta / 2
  double bracket_lo = 0.0;   // theta/2 - sqrt(theta^2 - 4 lambda_min)/2
  double bracket_hi = 0.0;   // theta/2 + sqrt(theta^2 - 4 lambda_min)/2
};

// Throws hypothesis_error when B(t) has a non-positive (or non-real)
// eigenvalue somewhere on the grid — distinct from "no certificate found".
HomogeneousAnalysis analyze_homogeneous(double theta, const TimeVaryingSystem::MatrixProvider& B,
                                        int n, const std::vector<double>& t_grid);

// Feasibility of a specific m: c = |m theta - m^2 - lambda_min| * chi and the
// test sqrt(c) < m.
struct HomogeneousFeasibility {
  double c;
  bool feasible;
};
HomogeneousFeasibility homogeneous_feasibility(const HomogeneousAnalysis& analysis, double theta,
                                               double m);

// 256-point log grid over the analysis window intersected with the bracket;
// first feasible m wins.
std::optional<StabilityCertificate> certify_homogeneous(
    double theta, const TimeVaryingSystem::MatrixProvider& B, int n,
    const std::vector<double>& t_grid);

struct TransitionEnvelope {
  std::vector<double> times;
  std::vector<double> norms;  // ||Phi(t, t0)||_2
};

// Integrates the 2n-dimensional first-order reduction from every canonical
// initial condition and assembles Phi(t, t0) column-wise.
TransitionEnvelope simulate_transition(const TimeVaryingSystem& system, double t0, double T,
                                       double h, int sample_stride = 1);

struct EnvelopeCheck {
  double gamma_hat;  // max over the burn-in prefix of ||Phi|| e^{lambda (t-t0)}
  bool pass;         // no sample beyond burn-in exceeds gamma_hat e^{-lambda (t-t0)}
  double worst_t;
  double worst_excess;  // log ||Phi|| - (log gamma_hat - lambda (t-t0)), max over tail
};
EnvelopeCheck validate_certificate_envelope(const TransitionEnvelope& envelope, double lambda,
                                            double burn_in_fraction = 0.1);

struct BiboReport {
  double fitted_exponent;  // log-log tail slope of ||omega(t)||
  double bound_exponent;   // q + 1/2
  bool pass;               // fitted <= bound + 0.2
};

// Drives the first-order reduction of a certified system with forcing of
// norm forcing_coeff * (1 + t)^q from omega(0) = 0 and fits the tail decay.
// q must be negative and != -1/2. forcing_coeff = 0 switches to the
// homogeneous response from a unit initial state, whose exponential decay
// beats any power-law bound.
BiboReport bibo_decay_check(const TimeVaryingSystem& system, const StabilityCertificate& cert,
                            double q, double T, double h, double forcing_coeff = 1.0);

}  // namespace enlab
