#include "enlab/stability.hpp"

#include "enlab/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace enlab {

double matrix_measure(const MatrixXd& P, MatrixNorm norm) {
  if (P.rows() != P.cols()) throw shape_error("matrix_measure: matrix must be square");
  if (!P.allFinite()) throw parameter_error("matrix_measure: non-finite entries");
  const int n = static_cast<int>(P.rows());
  switch (norm) {
    case MatrixNorm::Two: {
      const MatrixXd sym = 0.5 * (P + P.transpose());
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
      return es.eigenvalues().maxCoeff();
    }
    case MatrixNorm::One: {
      double best = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        double col = P(j, j);
        for (int i = 0; i < n; ++i)
          if (i != j) col += std::abs(P(i, j));
        best = std::max(best, col);
      }
      return best;
    }
    case MatrixNorm::Inf: {
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        double row = P(i, i);
        for (int j = 0; j < n; ++j)
          if (j != i) row += std::abs(P(i, j));
        best = std::max(best, row);
      }
      return best;
    }
  }
  throw parameter_error("matrix_measure: unsupported norm");
}

double spectral_norm(const MatrixXd& P) {
  Eigen::JacobiSVD<MatrixXd> svd(P);
  return svd.singularValues()(0);
}

TimeVaryingSystem TimeVaryingSystem::constant(MatrixXd A, MatrixXd B) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw shape_error("time-varying system: A and B must be square with equal size");
  if (!A.allFinite() || !B.allFinite())
    throw parameter_error("time-varying system: non-finite entries");
  const int n = static_cast<int>(A.rows());
  return TimeVaryingSystem(
      n, [A = std::move(A)](double) { return A; }, [B = std::move(B)](double) { return B; });
}

TimeVaryingSystem TimeVaryingSystem::from_functions(int n, MatrixProvider A, MatrixProvider B) {
  if (n < 1) throw parameter_error("time-varying system: dimension must be positive");
  return TimeVaryingSystem(n, std::move(A), std::move(B));
}

TimeVaryingSystem TimeVaryingSystem::from_csv_grid(const std::string& path, int n) {
  if (n < 1) throw parameter_error("system grid: dimension must be positive");
  std::ifstream in(path);
  if (!in) throw parameter_error("system grid: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw parameter_error("system grid: empty file " + path);
  const int expected = 1 + 2 * n * n;

  auto ts = std::make_shared<std::vector<double>>();
  auto as = std::make_shared<std::vector<MatrixXd>>();
  auto bs = std::make_shared<std::vector<MatrixXd>>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != expected)
      throw parameter_error("system grid: row with wrong column count in " + path);
    ts->push_back(row[0]);
    MatrixXd A(n, n), B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        A(i, j) = row[1 + i * n + j];
        B(i, j) = row[1 + n * n + i * n + j];
      }
    as->push_back(std::move(A));
    bs->push_back(std::move(B));
  }
  if (ts->size() < 2) throw parameter_error("system grid: need at least two rows in " + path);
  for (size_t i = 1; i < ts->size(); ++i)
    if (!((*ts)[i] > (*ts)[i - 1]))
      throw parameter_error("system grid: t must be strictly increasing in " + path);

  auto lerp = [ts](const std::shared_ptr<std::vector<MatrixXd>>& mats, double t) -> MatrixXd {
    if (t < ts->front() || t > ts->back())
      throw std::domain_error("system grid: query outside sampled range");
    const auto it = std::upper_bound(ts->begin(), ts->end(), t);
    int i = static_cast<int>(it - ts->begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(ts->size()) - 2);
    const double u = (t - (*ts)[i]) / ((*ts)[i + 1] - (*ts)[i]);
    return (1.0 - u) * (*mats)[i] + u * (*mats)[i + 1];
  };
  return TimeVaryingSystem(
      n, [as, lerp](double t) { return lerp(as, t); },
      [bs, lerp](double t) { return lerp(bs, t); });
}

MatrixXd TimeVaryingSystem::A_at(double t) const {
  return A_(t);
}

MatrixXd TimeVaryingSystem::B_at(double t) const {
  return B_(t);
}

StabilityCertificate sun_quantities(const TimeVaryingSystem& system, double m,
                                    const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw parameter_error("sun_quantities: empty time grid");
  if (!(m > 0.0)) throw parameter_error("sun_quantities: m must be positive");
  const int n = system.dim();
  const MatrixXd I = MatrixXd::Identity(n, n);
  double l = 0.0;
  double c = 0.0;
  for (double t : t_grid) {
    const MatrixXd A = system.A_at(t);
    const MatrixXd B = system.B_at(t);
    l = std::max(l, std::max(0.0, 2.0 * matrix_measure(m * I - A, MatrixNorm::Two)));
    c = std::max(c, spectral_norm(2.0 * m * A - m * m * I - B));
  }
  StabilityCertificate cert;
  cert.m = m;
  cert.l = l;
  cert.c = c;
  cert.margin = l + std::sqrt(l * l + 4.0 * c) - 2.0 * m;
  cert.lambda = m - (l + std::sqrt(l * l + 4.0 * c)) / 2.0;
  cert.t_grid_points = static_cast<int>(t_grid.size());
  cert.method = "sun";
  return cert;
}

std::optional<StabilityCertificate> certify_sun(const TimeVaryingSystem& system,
                                                const std::vector<double>& m_grid,
                                                const std::vector<double>& t_grid) {
  if (m_grid.empty()) throw parameter_error("certify_sun: empty m grid");
  if (t_grid.empty()) throw parameter_error("certify_sun: empty time grid");
  for (double m : m_grid) {
    if (!(m > 0.0)) throw parameter_error("certify_sun: m grid entries must be positive");
    StabilityCertificate cert = sun_quantities(system, m, t_grid);
    if (cert.margin < 0.0) return cert;
  }
  return std::nullopt;
}

HomogeneousAnalysis analyze_homogeneous(double theta, const TimeVaryingSystem::MatrixProvider& B,
                                        int n, const std::vector<double>& t_grid) {
  if (!(theta > 0.0)) throw parameter_error("analyze_homogeneous: theta must be positive");
  if (t_grid.empty()) throw parameter_error("analyze_homogeneous: empty time grid");

  double lambda_min = std::numeric_limits<double>::infinity();
  double chi = 1.0;
  for (double t : t_grid) {
    const MatrixXd Bt = B(t);
    if (Bt.rows() != n || Bt.cols() != n)
      throw shape_error("analyze_homogeneous: provider dimension mismatch");
    Eigen::EigenSolver<MatrixXd> es(Bt);
    if (es.info() != Eigen::Success)
      throw hypothesis_error("analyze_homogeneous: eigendecomposition failed");
    const auto& vals = es.eigenvalues();
    const double scale = Bt.norm();
    for (int i = 0; i < n; ++i) {
      if (std::abs(vals[i].imag()) > 1e-9 * (1.0 + scale))
        throw hypothesis_error("analyze_homogeneous: B(t) has a non-real eigenvalue at t=" +
                               fmt_short(t));
      if (!(vals[i].real() > 0.0))
        throw hypothesis_error("analyze_homogeneous: B(t) has a non-positive eigenvalue at t=" +
                               fmt_short(t));
      lambda_min = std::min(lambda_min, vals[i].real());
    }
    const MatrixXd P = es.eigenvectors().real();
    Eigen::JacobiSVD<MatrixXd> svd(P);
    const double smin = svd.singularValues()(n - 1);
    if (!(smin > 0.0))
      throw hypothesis_error("analyze_homogeneous: B(t) not diagonalizable at t=" + fmt_short(t));
    chi = std::max(chi, svd.singularValues()(0) / smin);
  }

  HomogeneousAnalysis a;
  a.lambda_min = lambda_min;
  a.chi = chi;
  a.cond1 = theta * theta >= 4.0 * lambda_min;
  a.cond2_literal = theta * theta >= 4.0 * lambda_min * chi * (1.0 + chi) / chi;
  a.cond2_simplified = theta * theta >= 4.0 * lambda_min * (1.0 + chi);
  const double disc_window = chi * chi * theta * theta - 4.0 * chi * (1.0 + chi) * lambda_min;
  a.window_lo = disc_window >= 0.0
                    ? (theta * chi - std::sqrt(disc_window)) / (2.0 * (1.0 + chi))
                    : std::numeric_limits<double>::quiet_NaN();
  a.window_hi = theta / 2.0;
  const double disc_bracket = theta * theta - 4.0 * lambda_min;
  a.bracket_lo = disc_bracket >= 0.0 ? theta / 2.0 - 0.5 * std::sqrt(disc_bracket)
                                     : std::numeric_limits<double>::quiet_NaN();
  a.bracket_hi = disc_bracket >= 0.0 ? theta / 2.0 + 0.5 * std::sqrt(disc_bracket)
                                     : std::numeric_limits<double>::quiet_NaN();
  return a;
}

HomogeneousFeasibility homogeneous_feasibility(const HomogeneousAnalysis& analysis, double theta,
                                               double m) {
  const double c = std::abs(m * theta - m * m - analysis.lambda_min) * analysis.chi;
  return HomogeneousFeasibility{c, std::sqrt(c) < m};
}

std::optional<StabilityCertificate> certify_homogeneous(
    double theta, const TimeVaryingSystem::MatrixProvider& B, int n,
    const std::vector<double>& t_grid) {
  const HomogeneousAnalysis a = analyze_homogeneous(theta, B, n, t_grid);
  if (!a.cond1 || !a.cond2_literal) return std::nullopt;

  const double lo = std::max(a.window_lo, a.bracket_lo);
  const double hi = std::min(a.window_hi, a.bracket_hi);
  if (!(lo > 0.0) || !(hi > lo)) return std::nullopt;

  constexpr int kGridPoints = 256;
  const double r = std::log(hi / lo);
  for (int i = 0; i < kGridPoints; ++i) {
    // Interior points only; both window ends sit exactly on the boundary of
    // the feasibility inequality.
    const double m = lo * std::exp(r * (i + 0.5) / kGridPoints);
    const auto feas = homogeneous_feasibility(a, theta, m);
    if (!feas.feasible) continue;
    StabilityCertificate cert;
    cert.m = m;
    cert.l = 0.0;  // m < theta/2 makes mu2((m - theta/2) I) negative
    cert.c = feas.c;
    cert.margin = 2.0 * std::sqrt(feas.c) - 2.0 * m;
    cert.lambda = m - std::sqrt(feas.c);
    cert.chi = a.chi;
    cert.lambda_min = a.lambda_min;
    cert.t_grid_points = static_cast<int>(t_grid.size());
    cert.method = "homogeneous";
    return cert;
  }
  return std::nullopt;
}

TransitionEnvelope simulate_transition(const TimeVaryingSystem& system, double t0, double T,
                                       double h, int sample_stride) {
  if (!(h > 0.0)) throw parameter_error("simulate_transition: h must be positive");
  if (!(T > t0)) throw parameter_error("simulate_transition: T must exceed t0");
  if (sample_stride < 1) throw parameter_error("simulate_transition: sample_stride must be >= 1");
  const int n = system.dim();
  const int nn = 2 * n;

  auto rhs_matrix = [&](double t) {
    MatrixXd M = MatrixXd::Zero(nn, nn);
    M.topRightCorner(n, n) = MatrixXd::Identity(n, n);
    M.bottomLeftCorner(n, n) = -system.B_at(t);
    M.bottomRightCorner(n, n) = -2.0 * system.A_at(t);
    return M;
  };

  // All canonical initial conditions at once: Phi' = M(t) Phi, Phi(t0) = I.
  MatrixXd Phi = MatrixXd::Identity(nn, nn);
  const long steps = std::lround((T - t0) / h);
  TransitionEnvelope env;
  env.times.reserve(steps / sample_stride + 1);
  env.norms.reserve(steps / sample_stride + 1);
  env.times.push_back(t0);
  env.norms.push_back(1.0);
  for (long step = 1; step <= steps; ++step) {
    const double t = t0 + (step - 1) * h;
    const MatrixXd k1 = rhs_matrix(t) * Phi;
    const MatrixXd k2 = rhs_matrix(t + 0.5 * h) * (Phi + 0.5 * h * k1);
    const MatrixXd k3 = rhs_matrix(t + 0.5 * h) * (Phi + 0.5 * h * k2);
    const MatrixXd k4 = rhs_matrix(t + h) * (Phi + h * k3);
    Phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!Phi.allFinite() || Phi.norm() > 1e12)
      throw divergence_error("transition matrix diverged at t=" + fmt_short(t0 + step * h),
                             t0 + step * h, step);
    if (step % sample_stride == 0 || step == steps) {
      env.times.push_back(t0 + step * h);
      env.norms.push_back(spectral_norm(Phi));
    }
  }
  return env;
}

EnvelopeCheck validate_certificate_envelope(const TransitionEnvelope& envelope, double lambda,
                                            double burn_in_fraction) {
  if (envelope.times.size() < 3) throw parameter_error("envelope check: too few samples");
  const double t0 = envelope.times.front();
  const double t_end = envelope.times.back();
  const double burn_end = t0 + burn_in_fraction * (t_end - t0);

  // Work in log space; the envelope may underflow at long horizons.
  double log_gamma = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < envelope.times.size(); ++i) {
    if (envelope.times[i] > burn_end) break;
    if (envelope.norms[i] > 0.0)
      log_gamma = std::max(log_gamma, std::log(envelope.norms[i]) +
                                          lambda * (envelope.times[i] - t0));
  }
  EnvelopeCheck check{std::exp(log_gamma), true, t0, -std::numeric_limits<double>::infinity()};
  for (size_t i = 0; i < envelope.times.size(); ++i) {
    if (envelope.times[i] <= burn_end) continue;
    if (!(envelope.norms[i] > 0.0)) continue;  // underflowed to zero: below any envelope
    const double excess =
        std::log(envelope.norms[i]) - (log_gamma - lambda * (envelope.times[i] - t0));
    if (excess > check.worst_excess) {
      check.worst_excess = excess;
      check.worst_t = envelope.times[i];
    }
  }
  check.pass = check.worst_excess <= 1e-9;
  return check;
}

BiboReport bibo_decay_check(const TimeVaryingSystem& system, const StabilityCertificate& cert,
                            double q, double T, double h, double forcing_coeff) {
  if (std::abs(q + 0.5) < 1e-12)
    throw parameter_error("bibo_decay_check: q = -1/2 is excluded");
  if (!(q < 0.0)) throw parameter_error("bibo_decay_check: q must be negative");
  if (!(cert.lambda > 0.0)) throw parameter_error("bibo_decay_check: certificate has no decay");
  if (!(T > 0.0) || !(h > 0.0)) throw parameter_error("bibo_decay_check: T, h must be > 0");

  const int n = system.dim();
  const int nn = 2 * n;
  VectorXd dir = VectorXd::Zero(nn);
  for (int i = 0; i < n; ++i) dir[n + i] = 1.0;  // force the velocity block
  dir /= dir.norm();

  auto rhs = [&](double t, const VectorXd& z) -> VectorXd {
    VectorXd out(nn);
    out.head(n) = z.tail(n);
    out.tail(n) = -system.B_at(t) * z.head(n) - 2.0 * system.A_at(t) * z.tail(n);
    out += forcing_coeff * std::pow(1.0 + t, q) * dir;
    return out;
  };

  VectorXd z = forcing_coeff == 0.0 ? VectorXd(VectorXd::Ones(nn) / std::sqrt(double(nn)))
                                    : VectorXd(VectorXd::Zero(nn));
  const long steps = std::lround(T / h);
  std::vector<double> ts, norms;
  ts.reserve(steps + 1);
  norms.reserve(steps + 1);
  for (long step = 1; step <= steps; ++step) {
    const double t = (step - 1) * h;
    const VectorXd k1 = rhs(t, z);
    const VectorXd k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1);
    const VectorXd k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2);
    const VectorXd k4 = rhs(t + h, z + h * k3);
    z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite() || z.norm() > 1e12)
      throw divergence_error("forced response diverged at t=" + fmt_short(step * h), step * h,
                             step);
    ts.push_back(step * h);
    norms.push_back(z.norm());
  }

  // Tail fit over the last decade of the horizon.
  std::vector<double> tail_t, tail_n;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < 0.1 * T) continue;
    tail_t.push_back(ts[i]);
    tail_n.push_back(norms[i]);
  }
  BiboReport rep;
  rep.fitted_exponent = fit_log_log_slope(tail_t, tail_n, 1.0, 0.0);
  rep.bound_exponent = q + 0.5;
  rep.pass = rep.fitted_exponent <= rep.bound_exponent + 0.2;
  return rep;
}

}  // namespace enlab
