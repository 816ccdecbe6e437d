#include "enlab/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace enlab {

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values)
    : t_(std::move(knots)), y_(std::move(values)) {
  const int n = static_cast<int>(t_.size());
  if (n < 2) throw parameter_error("cubic spline needs at least two knots");
  if (y_.size() != t_.size()) throw shape_error("cubic spline: knots/values size mismatch");
  for (int i = 1; i < n; ++i)
    if (!(t_[i] > t_[i - 1])) throw parameter_error("cubic spline: knots must be strictly increasing");

  // Tridiagonal solve for the natural spline second derivatives.
  m_.assign(n, 0.0);
  if (n == 2) return;
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0), sup(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    const double hl = t_[i] - t_[i - 1];
    const double hr = t_[i + 1] - t_[i];
    sub[i] = hl / 6.0;
    diag[i] = (hl + hr) / 3.0;
    sup[i] = hr / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
  }
  // Thomas algorithm on rows 1..n-2 with natural end conditions m_0 = m_{n-1} = 0.
  for (int i = 2; i + 1 < n; ++i) {
    const double f = sub[i] / diag[i - 1];
    diag[i] -= f * sup[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  for (int i = n - 2; i >= 1; --i) {
    const double upper = (i + 2 < n) ? sup[i] * m_[i + 1] : 0.0;
    m_[i] = (rhs[i] - upper) / diag[i];
  }
}

int CubicSpline::interval(double t) const {
  if (t < t_.front() || t > t_.back())
    throw std::domain_error("cubic spline: query outside knot range");
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  int i = static_cast<int>(it - t_.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(t_.size()) - 2);
  return i;
}

double CubicSpline::value(double t) const {
  const int i = interval(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h;
  const double b = (t - t_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
  const int i = interval(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h;
  const double b = (t - t_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

VectorXd interpolate_uniform_cubic(double t0, double dt, const MatrixXd& values, double t) {
  const int n = static_cast<int>(values.rows());
  if (n < 2) throw parameter_error("interpolation needs at least two samples");
  const double t_end = t0 + dt * (n - 1);
  const double eps = 1e-9 * dt;
  if (t < t0 - eps || t > t_end + eps)
    throw std::domain_error("interpolation: query outside sampled range");
  double s = (t - t0) / dt;
  s = std::clamp(s, 0.0, static_cast<double>(n - 1));
  int k = static_cast<int>(std::floor(s));
  k = std::clamp(k, 0, n - 2);
  const double u = s - k;
  if (u == 0.0) return values.row(k);

  // 4-point stencil clamped at the boundaries.
  const int i1 = std::clamp(k - 1, 0, n - 1);
  const int i2 = k;
  const int i3 = k + 1;
  const int i4 = std::clamp(k + 2, 0, n - 1);
  if (i1 == i2 || i3 == i4) {
    // Boundary interval: fall back to the cubic through the nearest 4 nodes.
    const int base = std::clamp(k - (i1 == i2 ? 0 : 2), 0, n - 4);
    VectorXd out = VectorXd::Zero(values.cols());
    const double x = s - base;
    for (int j = 0; j < 4; ++j) {
      double lj = 1.0;
      for (int l = 0; l < 4; ++l)
        if (l != j) lj *= (x - l) / static_cast<double>(j - l);
      out += lj * values.row(base + j).transpose();
    }
    return out;
  }
  // Interior: Lagrange cubic on nodes {-1, 0, 1, 2} relative to k.
  const double x = u;
  const double c1 = -x * (x - 1.0) * (x - 2.0) / 6.0;
  const double c2 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
  const double c3 = -(x + 1.0) * x * (x - 2.0) / 2.0;
  const double c4 = (x + 1.0) * x * (x - 1.0) / 6.0;
  return c1 * values.row(i1).transpose() + c2 * values.row(i2).transpose() +
         c3 * values.row(i3).transpose() + c4 * values.row(i4).transpose();
}

double fit_log_log_slope(const std::vector<double>& ts, const std::vector<double>& vs,
                         double alpha, double floor) {
  if (ts.size() != vs.size()) throw shape_error("fit_log_log_slope: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (!(vs[i] > floor)) continue;
    const double x = std::log(alpha + ts[i]);
    const double y = std::log(vs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw parameter_error("fit_log_log_slope: fewer than two usable points");
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw parameter_error("fit_log_log_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw parameter_error("linspace: need n >= 2");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo)) throw parameter_error("logspace: need 0 < lo < hi");
  if (n < 2) throw parameter_error("logspace: need n >= 2");
  std::vector<double> out(n);
  const double r = std::log(hi / lo);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(r * i / (n - 1));
  return out;
}

std::vector<double> cumulative_simpson(const std::vector<double>& values, double dt) {
  const int n = static_cast<int>(values.size());
  std::vector<double> cum(n, 0.0);
  if (n < 2) return cum;
  for (int i = 0; i + 2 < n; i += 2) {
    const double seg = dt / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
    // Split the Simpson panel so every sample carries a cumulative value.
    const double half = dt / 12.0 * (5.0 * values[i] + 8.0 * values[i + 1] - values[i + 2]);
    cum[i + 1] = cum[i] + half;
    cum[i + 2] = cum[i] + seg;
  }
  if (n % 2 == 0)  // trailing interval
    cum[n - 1] = cum[n - 2] + dt * 0.5 * (values[n - 2] + values[n - 1]);
  return cum;
}

}  // namespace enlab
