#pragma once

#include <Eigen/Dense>

#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace enlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dimension mismatch between an argument and the object it is used with.
class shape_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A constructor or operation received an out-of-range parameter.
class parameter_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A trajectory left the admissible region (non-finite state or norm blow-up).
class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, double t, long step)
      : std::runtime_error(what), t(t), step(step) {}
  double t;
  long step;
};

// A theorem/lemma hypothesis is violated by the supplied data. Distinct from
// "no certificate found", which is a regular (empty) result.
class hypothesis_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Round-trip-exact formatting for doubles; used everywhere a file must be
// byte-identical across runs.
inline std::string fmt_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Uniform double in [0, 1) from the top 53 bits of the generator output.
// uniform_real_distribution is implementation-defined, so outputs would not
// be reproducible across standard libraries.
inline double unit_double(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * unit_double(gen);
}

// Box-Muller; same cross-library reproducibility concern as above.
inline double gaussian(std::mt19937_64& gen) {
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = unit_double(gen);
  const double u2 = unit_double(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace enlab
