#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "enlab/runner.hpp"

using namespace enlab;

namespace {

const char* kMinimalScenario = R"(
seed = 7
scenario demo {
  checks = energy-balance corollary
  signal { kind = constant
           value = 0 }
  potential { kind = quadratic-tracking
              input_dim = 1 }
  dissipation { kind = exponential
                theta = 2 }
  initial { w = 1
            wdot = 0 }
  integrator { h = 1e-3
               T = 2
               sample_stride = 10 }
}
)";

std::string with_replacement(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("nested blocks and comments parse") {
  const auto root = parse_config_text(R"(
# top comment
alpha = 1.5       # trailing comment
outer {
  key = a b c
  inner { x = 2 }
}
)");
  CHECK(root.get_double("alpha", "root") == 1.5);
  const Section* outer = root.child("outer");
  REQUIRE(outer != nullptr);
  CHECK(outer->get_strings("key", "outer") == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(outer->child("inner") != nullptr);
  CHECK(outer->child("inner")->get_int("x", "inner") == 2);
}

TEST_CASE("parser reports malformed input") {
  CHECK_THROWS_AS(parse_config_text("foo"), config_error);
  CHECK_THROWS_AS(parse_config_text("a = "), config_error);
  CHECK_THROWS_AS(parse_config_text("block {\nkey = 1\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("}"), config_error);
  CHECK_THROWS_AS(parse_config_text("a b c {\n}\n"), config_error);
}

TEST_CASE("experiment config structural validation") {
  const auto cfg = experiment_config_from_text(kMinimalScenario);
  CHECK(cfg.seed == 7);
  REQUIRE(cfg.scenarios.size() == 1);
  CHECK(cfg.scenarios[0].name == "demo");
  CHECK(cfg.scenarios[0].checks ==
        std::vector<CheckKind>{CheckKind::EnergyBalance, CheckKind::Corollary});
}

TEST_CASE("negative step is rejected with the field name") {
  const auto text = with_replacement(kMinimalScenario, "h = 1e-3", "h = -1e-3");
  try {
    experiment_config_from_text(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("integrator.h must be positive") != std::string::npos);
  }
}

TEST_CASE("duplicate scenario names are rejected") {
  std::string text = kMinimalScenario;
  text += with_replacement(kMinimalScenario, "seed = 7", "");
  CHECK_THROWS_AS(experiment_config_from_text(text), config_error);
}

TEST_CASE("unknown checks and missing blocks are rejected") {
  CHECK_THROWS_AS(
      experiment_config_from_text(with_replacement(kMinimalScenario, "corollary", "bogus-check")),
      config_error);
  CHECK_THROWS_AS(experiment_config_from_text(with_replacement(
                      kMinimalScenario, "dissipation { kind = exponential\n                theta = 2 }", "")),
                  config_error);
}

TEST_CASE("theorem checks require their parameter blocks") {
  const auto text = with_replacement(kMinimalScenario, "energy-balance corollary",
                                     "homo-exp-conv");
  CHECK_THROWS_AS(experiment_config_from_text(text), config_error);
  const auto text2 = with_replacement(kMinimalScenario, "energy-balance corollary",
                                      "stability-certificate");
  CHECK_THROWS_AS(experiment_config_from_text(text2), config_error);
}

TEST_CASE("signal builders cover every kind") {
  const auto constant = parse_config_text("signal { kind = constant\nvalue = 1 2 }");
  const auto sig = build_signal(*constant.child("signal"), "t", ".");
  CHECK(sig->dimension() == 2);
  CHECK(sig->kind() == SignalKind::Constant);

  const auto bank = parse_config_text(R"(
signal { kind = sinusoid-bank
         dimension = 2
         term = 0 1.0 1.0 0.0
         term = 1 0.5 2.0 0.0 }
)");
  const auto sig2 = build_signal(*bank.child("signal"), "t", ".");
  CHECK(sig2->kind() == SignalKind::SinusoidBank);
  CHECK(sig2->sample(0.25).x[0] == doctest::Approx(1.0));

  const auto decay = parse_config_text(R"(
signal { kind = periodic-plus-decay
         dimension = 1
         term = 0 1.0 1.0 0.0
         amp_base = 1
         add_decay_coeff = 1
         add_decay_alpha = 1
         add_decay_p = 1 }
)");
  const auto sig3 = build_signal(*decay.child("signal"), "t", ".");
  CHECK(sig3->sample(0.0).x[0] == doctest::Approx(1.0));  // sin(0) + 1/(1+0)

  const auto bad = parse_config_text("signal { kind = wavelet }");
  CHECK_THROWS_AS(build_signal(*bad.child("signal"), "t", "."), config_error);
}

TEST_CASE("potential builders") {
  const auto quad = parse_config_text(R"(
potential { kind = quadratic-tracking
            input_dim = 2
            weight_dim = 2
            matrix = 1 0 0 2 }
)");
  const auto m = build_potential(*quad.child("potential"), "t");
  CHECK(m->kind() == "quadratic-tracking");
  VectorXd x(2), w(2);
  x << 0, 0;
  w << 1, 1;
  CHECK(m->value(x, w) == doctest::Approx(2.5));  // (1^2 + 2^2)/2

  const auto reg = parse_config_text(R"(
potential { kind = linear-regression
            input_dim = 1
            features = identity
            target_b = 1 }
)");
  const auto m2 = build_potential(*reg.child("potential"), "t");
  CHECK(m2->value(VectorXd::Ones(1), 2.0 * VectorXd::Ones(1)) == doctest::Approx(0.5));

  const auto net = parse_config_text(R"(
potential { kind = two-layer-tanh
            input_dim = 1
            hidden = 3 }
)");
  CHECK(build_potential(*net.child("potential"), "t")->weight_dim() == 6);

  const auto mismatched = parse_config_text(R"(
potential { kind = quadratic-tracking
            input_dim = 2
            weight_dim = 3 }
)");
  CHECK_THROWS_AS(build_potential(*mismatched.child("potential"), "t"), config_error);
}

TEST_CASE("seeded auto initialization is reproducible") {
  const auto text = with_replacement(kMinimalScenario, "w = 1", "w = auto");
  const auto cfg = experiment_config_from_text(text);
  const auto a = build_agent_config(cfg.scenarios[0], ".");
  const auto b = build_agent_config(cfg.scenarios[0], ".");
  CHECK(a.w0 == b.w0);
  CHECK(a.w0.cwiseAbs().maxCoeff() <= 0.5);

  const auto reseeded = experiment_config_from_text(with_replacement(text, "seed = 7", "seed = 8"));
  const auto c = build_agent_config(reseeded.scenarios[0], ".");
  CHECK(a.w0 != c.w0);
}

TEST_CASE("scalar masses broadcast to the weight dimension") {
  std::string text = with_replacement(kMinimalScenario, "checks = energy-balance corollary",
                                      "checks = energy-balance\n  masses = 2");
  const auto cfg = experiment_config_from_text(text);
  const auto agent = build_agent_config(cfg.scenarios[0], ".");
  CHECK(agent.masses.size() == 1);
  CHECK(agent.masses[0] == 2.0);
}

TEST_CASE("quasi-period block builder") {
  const auto root = parse_config_text(R"(
quasi_period { epsilon = 2
               alpha = 1
               p = 2
               tau0 = 1 }
)");
  const auto spec = build_quasi_period(*root.child("quasi_period"), "t");
  CHECK(spec.epsilon == 2.0);
  CHECK(spec.p == 2.0);
  CHECK(spec.gamma.gamma(3.0) == doctest::Approx(4.0));

  const auto bad = parse_config_text("quasi_period { epsilon = -1\nalpha = 1\np = 2 }");
  CHECK_THROWS_AS(build_quasi_period(*bad.child("quasi_period"), "t"), config_error);
}

TEST_CASE("trajectory and summary serialization") {
  const auto cfg = experiment_config_from_text(kMinimalScenario);
  const auto agent = build_agent_config(cfg.scenarios[0], ".");
  const auto traj = simulate(agent, 1.0, 1e-2, 10);
  const auto csv = trajectory_csv(traj);
  CHECK(csv.rfind("t,w_1,wdot_1,V,K,U,Z_cum,E_cum,residual\n", 0) == 0);
  CHECK(trajectory_csv(traj) == csv);  // deterministic

  const std::vector<CheckRow> rows{{"s", "energy-balance", "pass", "residual=0", "tol", "Z+dU-E=0"}};
  const auto summary = summary_csv(rows);
  CHECK(summary.find("scenario,check,status,measured,threshold,statement\n") == 0);
  CHECK(summary.find("s,energy-balance,pass,residual=0,tol,Z+dU-E=0\n") != std::string::npos);
}
