#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "enlab/numerics.hpp"
#include "enlab/stability.hpp"

using namespace enlab;

namespace {

MatrixXd randn_matrix(std::mt19937_64& rng, int n) {
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = gaussian(rng);
  return M;
}

double induced_norm(const MatrixXd& P, MatrixNorm norm) {
  switch (norm) {
    case MatrixNorm::Two:
      return spectral_norm(P);
    case MatrixNorm::One:
      return P.cwiseAbs().colwise().sum().maxCoeff();
    case MatrixNorm::Inf:
      return P.cwiseAbs().rowwise().sum().maxCoeff();
  }
  return 0.0;
}

MatrixXd scalar(double v) {
  MatrixXd M(1, 1);
  M << v;
  return M;
}

TimeVaryingSystem hand_system() {
  return TimeVaryingSystem::constant(scalar(1.5), scalar(1.0));
}

}  // namespace

TEST_CASE("matrix measure closed forms") {
  CHECK(matrix_measure(MatrixXd::Identity(3, 3), MatrixNorm::Two) ==
        doctest::Approx(1.0).epsilon(1e-12));
  MatrixXd D = MatrixXd::Zero(2, 2);
  D(0, 0) = -1;
  D(1, 1) = -3;
  CHECK(matrix_measure(D, MatrixNorm::Two) == doctest::Approx(-1.0).epsilon(1e-12));
  MatrixXd R(2, 2);
  R << 0, 1, -1, 0;
  CHECK(std::abs(matrix_measure(R, MatrixNorm::Two)) <= 1e-12);  // zero symmetric part
  CHECK(matrix_measure(R, MatrixNorm::One) == doctest::Approx(1.0));
  CHECK(matrix_measure(R, MatrixNorm::Inf) == doctest::Approx(1.0));
}

TEST_CASE("matrix measure agrees with the one-sided limit definition") {
  std::mt19937_64 rng(17);
  const double h = 1e-7;
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd P = randn_matrix(rng, 4);
    for (MatrixNorm norm : {MatrixNorm::One, MatrixNorm::Two, MatrixNorm::Inf}) {
      const double limit = (induced_norm(MatrixXd::Identity(4, 4) + h * P, norm) - 1.0) / h;
      CHECK(std::abs(matrix_measure(P, norm) - limit) <= 1e-4);
    }
  }
}

TEST_CASE("matrix measure subadditivity and negation bound") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd P = randn_matrix(rng, 3);
    const MatrixXd Q = randn_matrix(rng, 3);
    for (MatrixNorm norm : {MatrixNorm::One, MatrixNorm::Two, MatrixNorm::Inf}) {
      CHECK(matrix_measure(P + Q, norm) <=
            matrix_measure(P, norm) + matrix_measure(Q, norm) + 1e-10);
      CHECK(matrix_measure(P, norm) >= -matrix_measure(-P, norm) - 1e-10);
    }
  }
}

TEST_CASE("hand-worked scalar certificate") {
  // x'' + 2(1.5) x' + x = 0 probed at m = 1.2:
  //   l = max(0, 2 mu2((1.2 - 1.5) I)) = 0
  //   c = |2*1.2*1.5 - 1.44 - 1| = 1.16
  //   margin = sqrt(4*1.16) - 2.4 < 0, lambda = 1.2 - sqrt(1.16)
  const auto t_grid = linspace(0.0, 50.0, 128);
  const auto cert = certify_sun(hand_system(), {1.2}, t_grid);
  REQUIRE(cert.has_value());
  CHECK(cert->l == 0.0);
  CHECK(cert->c == doctest::Approx(1.16).epsilon(1e-12));
  CHECK(cert->margin == doctest::Approx(std::sqrt(4.64) - 2.4).epsilon(1e-12));
  CHECK(cert->margin < 0.0);
  CHECK(cert->lambda == doctest::Approx(1.2 - std::sqrt(1.16)).epsilon(1e-12));
  CHECK(cert->lambda == doctest::Approx(0.12296703857309893).epsilon(1e-10));
  CHECK(cert->method == "sun");
  CHECK(cert->t_grid_points == 128);
}

TEST_CASE("no certificate for an antistable block") {
  const auto system = TimeVaryingSystem::constant(scalar(0.0), scalar(-1.0));
  const auto cert = certify_sun(system, logspace(0.05, 5.0, 64), linspace(0.0, 20.0, 64));
  CHECK_FALSE(cert.has_value());
}

TEST_CASE("m beyond the damping spectrum contributes positive l") {
  const auto quantities = sun_quantities(hand_system(), 2.0, linspace(0.0, 10.0, 16));
  CHECK(quantities.l == doctest::Approx(2.0 * (2.0 - 1.5)).epsilon(1e-12));
  CHECK(quantities.lambda == doctest::Approx(2.0 - (1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("homogeneous analysis of the unit-curvature system") {
  const auto B = [](double) { return MatrixXd::Identity(1, 1); };
  const auto t_grid = linspace(0.0, 50.0, 64);

  const auto a3 = analyze_homogeneous(3.0, B, 1, t_grid);
  CHECK(a3.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a3.chi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a3.cond1);
  CHECK(a3.cond2_literal);      // 9 >= 8
  CHECK(a3.cond2_simplified);   // same value once chi cancels
  CHECK(a3.window_lo == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a3.window_hi == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(a3.bracket_lo == doctest::Approx(1.5 - std::sqrt(5.0) / 2.0).epsilon(1e-12));

  const auto feas = homogeneous_feasibility(a3, 3.0, 1.2);
  CHECK(feas.c == doctest::Approx(1.16).epsilon(1e-12));
  CHECK(std::sqrt(feas.c) == doctest::Approx(1.0770329614269007).epsilon(1e-12));
  CHECK(feas.feasible);

  const auto cert = certify_homogeneous(3.0, B, 1, t_grid);
  REQUIRE(cert.has_value());
  CHECK(cert->m > 0.5);
  CHECK(cert->m < 1.5);
  CHECK(cert->lambda > 0.0);
  CHECK(cert->margin < 0.0);
  CHECK(cert->method == "homogeneous");
  CHECK(homogeneous_feasibility(a3, 3.0, cert->m).feasible);

  // theta = 2 fails the literal second condition (4 < 8): no certificate.
  const auto a2 = analyze_homogeneous(2.0, B, 1, t_grid);
  CHECK(a2.cond1);
  CHECK_FALSE(a2.cond2_literal);
  CHECK_FALSE(certify_homogeneous(2.0, B, 1, t_grid).has_value());
}

TEST_CASE("non-positive or complex spectra violate the hypothesis") {
  const auto t_grid = linspace(0.0, 10.0, 8);
  const auto neg = [](double) { return MatrixXd(-MatrixXd::Identity(2, 2)); };
  CHECK_THROWS_AS(certify_homogeneous(3.0, neg, 2, t_grid), hypothesis_error);
  const auto rot = [](double) {
    MatrixXd M(2, 2);
    M << 0, 1, -1, 0;  // eigenvalues +-i
    return M;
  };
  CHECK_THROWS_AS(analyze_homogeneous(3.0, rot, 2, t_grid), hypothesis_error);
}

TEST_CASE("homogeneous feasibility matches the general criterion for scalar curvature") {
  // B = lambda I with chi = 1: both routes must agree at every m < theta/2.
  std::mt19937_64 rng(31);
  const auto t_grid = linspace(0.0, 5.0, 4);
  for (int trial = 0; trial < 40; ++trial) {
    const double lambda = 0.3 + 1.7 * unit_double(rng);
    const double theta = 2.0 * std::sqrt(2.0 * lambda) * (1.05 + unit_double(rng));
    const double m = (0.05 + 0.9 * unit_double(rng)) * theta / 2.0;
    const auto B = [lambda](double) { return MatrixXd(lambda * MatrixXd::Identity(1, 1)); };
    const auto analysis = analyze_homogeneous(theta, B, 1, t_grid);
    const auto system = TimeVaryingSystem::constant(
        scalar(theta / 2.0), scalar(lambda));
    const auto general = sun_quantities(system, m, t_grid);
    const bool general_feasible = general.margin < 0.0;
    const bool homog_feasible = homogeneous_feasibility(analysis, theta, m).feasible;
    CHECK(general_feasible == homog_feasible);
  }
}

TEST_CASE("transition norm of the undamped oscillator stays at one") {
  const auto system = TimeVaryingSystem::constant(scalar(0.0), scalar(1.0));
  const auto env = simulate_transition(system, 0.0, 20.0, 1e-3, 100);
  for (double norm : env.norms) CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("transition norm grows exponentially for negative curvature") {
  const auto system = TimeVaryingSystem::constant(scalar(0.0), scalar(-1.0));
  const auto env = simulate_transition(system, 0.0, 6.0, 1e-3, 100);
  // log ||Phi|| ~ t for x'' = x.
  std::vector<double> ts, ns;
  for (size_t i = 0; i < env.times.size(); ++i) {
    if (env.times[i] < 1.0) continue;
    ts.push_back(env.times[i]);
    ns.push_back(env.norms[i]);
  }
  double growth = (std::log(ns.back()) - std::log(ns.front())) / (ts.back() - ts.front());
  CHECK(growth == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("certified decay bounds the simulated transition norm") {
  const auto t_grid = linspace(0.0, 50.0, 128);
  const auto cert = certify_sun(hand_system(), {1.2}, t_grid);
  REQUIRE(cert.has_value());
  const auto env = simulate_transition(hand_system(), 0.0, 50.0, 1e-3, 50);
  const auto check = validate_certificate_envelope(env, cert->lambda);
  CHECK(check.pass);
  CHECK(check.gamma_hat >= 1.0);
}

TEST_CASE("time-varying damping certified over a grid") {
  // Small modulation: the criterion takes a sup-norm over the grid, so wide
  // damping swings push c past m^2 and defeat it.
  const auto system = TimeVaryingSystem::from_functions(
      1, [](double t) { return scalar(1.5 + 0.05 * std::sin(t)); },
      [](double) { return scalar(1.0); });
  const auto t_grid = linspace(0.0, 50.0, 512);
  const auto cert = certify_sun(system, logspace(0.5, 2.0, 32), t_grid);
  REQUIRE(cert.has_value());
  const double horizon = std::min(50.0 / cert->lambda, 150.0);
  const auto env = simulate_transition(system, 0.0, horizon, 1e-2, 20);
  CHECK(validate_certificate_envelope(env, cert->lambda).pass);
}

TEST_CASE("forced decay keeps pace with the input power law") {
  const auto t_grid = linspace(0.0, 50.0, 128);
  const auto cert = certify_sun(hand_system(), {1.2}, t_grid);
  REQUIRE(cert.has_value());

  auto rep = bibo_decay_check(hand_system(), *cert, -2.0, 400.0, 0.01);
  CHECK(rep.bound_exponent == doctest::Approx(-1.5));
  CHECK(rep.fitted_exponent <= -1.3);

  rep = bibo_decay_check(hand_system(), *cert, -3.0, 400.0, 0.01);
  CHECK(rep.fitted_exponent <= -2.3);

  // Unforced: exponential decay crushes any power law.
  rep = bibo_decay_check(hand_system(), *cert, -2.0, 60.0, 0.01, 0.0);
  CHECK(rep.pass);
  CHECK(rep.fitted_exponent < -5.0);

  CHECK_THROWS_AS(bibo_decay_check(hand_system(), *cert, -0.5, 100.0, 0.01), parameter_error);
  CHECK_THROWS_AS(bibo_decay_check(hand_system(), *cert, 0.5, 100.0, 0.01), parameter_error);
}

TEST_CASE("system grids load from csv with linear interpolation") {
  const std::string path = "test_system_grid.csv";
  {
    std::ofstream out(path);
    out << "t,a_11,b_11\n";
    out << "0,1.0,2.0\n";
    out << "1,2.0,2.0\n";
    out << "2,3.0,4.0\n";
  }
  const auto system = TimeVaryingSystem::from_csv_grid(path, 1);
  CHECK(system.A_at(0.5)(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(system.A_at(2.0)(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(system.B_at(1.5)(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(system.A_at(2.5), std::domain_error);
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "t,a_11,b_11\n0,1,1\n";
  }
  CHECK_THROWS_AS(TimeVaryingSystem::from_csv_grid(path, 1), parameter_error);
  std::remove(path.c_str());
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(certify_sun(hand_system(), {}, linspace(0, 1, 4)), parameter_error);
  CHECK_THROWS_AS(certify_sun(hand_system(), {1.0}, {}), parameter_error);
  CHECK_THROWS_AS(certify_sun(hand_system(), {-1.0}, linspace(0, 1, 4)), parameter_error);
  CHECK_THROWS_AS(matrix_measure(MatrixXd::Zero(2, 3), MatrixNorm::Two), shape_error);
}
