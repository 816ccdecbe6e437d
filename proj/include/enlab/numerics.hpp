#pragma once

#include <vector>

#include "enlab/common.hpp"

namespace enlab {

// Natural cubic spline on strictly increasing knots. value() and derivative()
// are exact for the interpolant, so returned derivatives are consistent with
// finite differences of value() by construction.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> knots, std::vector<double> values);

  double value(double t) const;
  double derivative(double t) const;

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }
  bool empty() const { return t_.empty(); }

 private:
  int interval(double t) const;

  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at knots
};

// Local cubic (4-point Lagrange) interpolation on a uniform grid. Exact at
// the nodes; O(dt^4) between them. rows(values) = number of samples.
VectorXd interpolate_uniform_cubic(double t0, double dt, const MatrixXd& values, double t);

// Ordinary least-squares slope of log(v) vs log(alpha + t). Entries with
// v <= floor are skipped. Throws parameter_error if fewer than two usable
// points remain.
double fit_log_log_slope(const std::vector<double>& ts, const std::vector<double>& vs,
                         double alpha = 1.0, double floor = 0.0);

std::vector<double> linspace(double lo, double hi, int n);
std::vector<double> logspace(double lo, double hi, int n);  // geometric, lo > 0

// Composite Simpson on uniformly spaced samples (trapezoid fallback for a
// trailing odd interval). Returns the cumulative integral at every sample.
std::vector<double> cumulative_simpson(const std::vector<double>& values, double dt);

}  // namespace enlab
