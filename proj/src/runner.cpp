#include "enlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "enlab/energy.hpp"
#include "enlab/svg.hpp"

namespace enlab {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStatementEnergyBalance =
    "Z + (U(T)-U(0)) - E = 0: dissipated plus internal variation balances environmental energy";
constexpr const char* kStatementCorollary =
    "U(T)-U(0) <= E: internal-energy growth is bounded by the environmental energy";
constexpr const char* kStatementHomoExpConv =
    "||w(t)-w(gamma(t))|| = O((alpha+t)^-(p-1/2)): weight variation over the pseudo-period decays";
constexpr const char* kStatementGeneralization =
    "integral of |grad_x V . xdot| stays bounded (plateau test on the second half)";
constexpr const char* kStatementConvergence =
    "w(t) settles: tail deviation from w_bar and tail speed both below 1e-2";
constexpr const char* kStatementCertificate =
    "||Phi(t;t0)|| <= gamma_hat exp(-lambda (t-t0)): exponential-stability witness validated by "
    "simulation";

std::vector<SinusoidTerm> parse_terms(const Section& block, int dim, const std::string& ctx) {
  std::vector<SinusoidTerm> terms;
  for (const auto& row : block.get_double_rows("term")) {
    if (row.size() != 4)
      throw config_error(ctx + ".term: expected 'dim amplitude frequency phase'");
    SinusoidTerm t;
    t.dim = static_cast<int>(row[0]);
    t.amplitude = row[1];
    t.frequency = row[2];
    t.phase = row[3];
    if (t.dim < 0 || t.dim >= dim) throw config_error(ctx + ".term: dim out of range");
    terms.push_back(t);
  }
  if (terms.empty()) throw config_error(ctx + ": at least one 'term' line is required");
  return terms;
}

VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<long>(v.size()));
}

}  // namespace

std::shared_ptr<const EnvironmentSignal> build_signal(const Section& block,
                                                      const std::string& context,
                                                      const std::string& base_dir) {
  const std::string ctx = context + ": signal";
  const std::string kind = block.get_string("kind", ctx);
  try {
    if (kind == "constant") {
      return std::make_shared<EnvironmentSignal>(
          EnvironmentSignal::constant(to_vec(block.get_doubles("value", ctx))));
    }
    if (kind == "sinusoid-bank") {
      const int dim = static_cast<int>(block.get_int("dimension", ctx));
      VectorXd offset;
      if (block.has("offset")) offset = to_vec(block.get_doubles("offset", ctx));
      return std::make_shared<EnvironmentSignal>(
          EnvironmentSignal::sinusoid_bank(dim, parse_terms(block, dim, ctx), offset));
    }
    if (kind == "periodic-plus-decay") {
      const int dim = static_cast<int>(block.get_int("dimension", ctx));
      PowerDecay amp{block.get_double_or("amp_decay_coeff", 0.0, ctx),
                     block.get_double_or("amp_decay_alpha", 1.0, ctx),
                     block.get_double_or("amp_decay_p", 1.0, ctx)};
      PowerDecay add{block.get_double_or("add_decay_coeff", 0.0, ctx),
                     block.get_double_or("add_decay_alpha", 1.0, ctx),
                     block.get_double_or("add_decay_p", 1.0, ctx)};
      VectorXd dir, offset;
      if (block.has("add_direction")) dir = to_vec(block.get_doubles("add_direction", ctx));
      if (block.has("offset")) offset = to_vec(block.get_doubles("offset", ctx));
      return std::make_shared<EnvironmentSignal>(EnvironmentSignal::periodic_plus_decay(
          dim, parse_terms(block, dim, ctx), block.get_double_or("amp_base", 1.0, ctx), amp, add,
          dir, offset));
    }
    if (kind == "tabulated") {
      const std::string path = block.get_string("csv", ctx);
      const std::string full =
          fs::path(path).is_absolute() ? path : (fs::path(base_dir) / path).string();
      return std::make_shared<EnvironmentSignal>(EnvironmentSignal::tabulated_from_csv(full));
    }
  } catch (const parameter_error& e) {
    throw config_error(ctx + ": " + e.what());
  } catch (const shape_error& e) {
    throw config_error(ctx + ": " + e.what());
  }
  throw config_error(ctx + ".kind: unknown signal kind '" + kind + "'");
}

std::shared_ptr<const PotentialModel> build_potential(const Section& block,
                                                      const std::string& context) {
  const std::string ctx = context + ": potential";
  const std::string kind = block.get_string("kind", ctx);
  try {
    if (kind == "quadratic-tracking") {
      const int d = static_cast<int>(block.get_int("input_dim", ctx));
      const int m = static_cast<int>(block.get_int_or("weight_dim", d, ctx));
      MatrixXd M;
      if (block.has("matrix")) {
        const auto vals = block.get_doubles("matrix", ctx);
        if (static_cast<int>(vals.size()) != d * m)
          throw config_error(ctx + ".matrix: expected " + std::to_string(d * m) + " entries");
        M.resize(d, m);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < m; ++j) M(i, j) = vals[i * m + j];
      } else {
        if (d != m)
          throw config_error(ctx + ".matrix is required when input_dim != weight_dim");
        M = MatrixXd::Identity(d, m);
      }
      return std::make_shared<QuadraticTracking>(std::move(M));
    }
    LinearTarget target;
    if (block.has("target_a")) target.a = to_vec(block.get_doubles("target_a", ctx));
    target.b = block.get_double_or("target_b", 0.0, ctx);
    if (kind == "linear-regression") {
      const int d = static_cast<int>(block.get_int("input_dim", ctx));
      const std::string feat = block.get_string_or("features", "identity");
      if (feat != "identity" && feat != "affine")
        throw config_error(ctx + ".features must be 'identity' or 'affine'");
      return std::make_shared<LinearRegression>(
          d, feat == "identity" ? FeatureMap::Identity : FeatureMap::Affine, target);
    }
    if (kind == "two-layer-tanh") {
      const int d = static_cast<int>(block.get_int("input_dim", ctx));
      const int hidden = static_cast<int>(block.get_int("hidden", ctx));
      return std::make_shared<TwoLayerTanh>(d, hidden, target);
    }
  } catch (const parameter_error& e) {
    throw config_error(ctx + ": " + e.what());
  } catch (const shape_error& e) {
    throw config_error(ctx + ": " + e.what());
  }
  throw config_error(ctx + ".kind: unknown potential kind '" + kind + "'");
}

DissipationSchedule build_dissipation(const Section& block, const std::string& context) {
  const std::string ctx = context + ": dissipation";
  const std::string kind = block.get_string("kind", ctx);
  try {
    if (kind == "constant") return DissipationSchedule::constant();
    if (kind == "exponential")
      return DissipationSchedule::exponential(block.get_double("theta", ctx));
    if (kind == "power")
      return DissipationSchedule::power(block.get_double_or("alpha", 1.0, ctx),
                                        block.get_double("k", ctx));
  } catch (const parameter_error& e) {
    throw config_error(ctx + ": " + e.what());
  }
  throw config_error(ctx + ".kind: unknown dissipation kind '" + kind + "'");
}

AgentConfig build_agent_config(const ScenarioConfig& scenario, const std::string& base_dir) {
  const std::string ctx = "scenario '" + scenario.name + "'";
  AgentConfig cfg;
  cfg.signal = build_signal(*scenario.body.child("signal"), ctx, base_dir);
  cfg.potential = build_potential(*scenario.body.child("potential"), ctx);
  cfg.dissipation = build_dissipation(*scenario.body.child("dissipation"), ctx);

  const int m = cfg.potential->weight_dim();
  if (scenario.body.has("masses")) {
    cfg.masses = to_vec(scenario.body.get_doubles("masses", ctx));
    if (cfg.masses.size() == 1 && m > 1) cfg.masses = VectorXd::Constant(m, cfg.masses[0]);
  } else {
    cfg.masses = VectorXd::Ones(m);
  }

  const Section& init = *scenario.body.child("initial");
  const std::string w_spec = init.get_string("w", ctx + ": initial");
  if (w_spec == "auto") {
    const double scale = init.get_double_or("w_scale", 0.5, ctx + ": initial");
    std::mt19937_64 rng(scenario.seed);
    cfg.w0.resize(m);
    for (int i = 0; i < m; ++i) cfg.w0[i] = uniform_in(rng, -scale, scale);
  } else {
    cfg.w0 = to_vec(init.get_doubles("w", ctx + ": initial"));
    if (cfg.w0.size() == 1 && m > 1) cfg.w0 = VectorXd::Constant(m, cfg.w0[0]);
  }
  if (init.has("wdot")) {
    cfg.wdot0 = to_vec(init.get_doubles("wdot", ctx + ": initial"));
    if (cfg.wdot0.size() == 1 && m > 1) cfg.wdot0 = VectorXd::Constant(m, cfg.wdot0[0]);
  } else {
    cfg.wdot0 = VectorXd::Zero(m);
  }

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw config_error(ctx + ": " + e.what());
  }
  return cfg;
}

QuasiPeriodSpec build_quasi_period(const Section& block, const std::string& context) {
  const std::string ctx = context + ": quasi_period";
  QuasiPeriodSpec spec;
  spec.epsilon = block.get_double("epsilon", ctx);
  spec.alpha = block.get_double("alpha", ctx);
  spec.p = block.get_double("p", ctx);
  if (!(spec.epsilon > 0.0)) throw config_error(ctx + ".epsilon must be positive");
  if (!(spec.alpha > 0.0)) throw config_error(ctx + ".alpha must be positive");
  const std::string gamma = block.get_string_or("gamma", "affine");
  if (gamma != "affine") throw config_error(ctx + ".gamma: only 'affine' maps load from config");
  spec.gamma = AdvanceMap::affine(block.get_double_or("tau0", 1.0, ctx));
  return spec;
}

namespace {

struct ScenarioContext {
  const ScenarioConfig* config;
  const ExperimentConfig* experiment;
  const RunOptions* options;
  std::string out_dir;
};

std::string measured_kv(const std::string& key, double v) {
  return key + "=" + fmt_short(v);
}

CheckRow verdict_row(const std::string& scenario, CheckKind kind, const TheoremReport& rep,
                     const char* statement, const std::string& threshold) {
  CheckRow row;
  row.scenario = scenario;
  row.check = to_string(kind);
  row.status = to_string(rep.verdict);
  std::ostringstream measured;
  bool first = true;
  for (const auto& [k, v] : rep.measured) {
    if (!first) measured << " ";
    measured << measured_kv(k, v);
    first = false;
  }
  row.measured = measured.str();
  row.threshold = threshold;
  row.statement = statement;
  return row;
}

void run_stability_check(const ScenarioContext& ctx, ScenarioOutcome& outcome) {
  const std::string name = ctx.config->name;
  const std::string context = "scenario '" + name + "'";
  const Section& block = *ctx.config->body.child("system");
  const std::string sctx = context + ": system";

  const int n = static_cast<int>(block.get_int("n", sctx));
  std::optional<TimeVaryingSystem> system;
  if (block.has("csv")) {
    const std::string path = block.get_string("csv", sctx);
    const std::string full = fs::path(path).is_absolute()
                                 ? path
                                 : (fs::path(ctx.experiment->base_dir) / path).string();
    system = TimeVaryingSystem::from_csv_grid(full, n);
  }

  auto read_matrix = [&](const std::string& key) {
    const auto vals = block.get_doubles(key, sctx);
    if (static_cast<int>(vals.size()) != n * n)
      throw config_error(sctx + "." + key + ": expected " + std::to_string(n * n) + " entries");
    MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = vals[i * n + j];
    return M;
  };

  const bool homogeneous = block.has("theta");
  const double theta = homogeneous ? block.get_double("theta", sctx) : 0.0;
  if (!system) {
    MatrixXd B = read_matrix("b");
    MatrixXd A = homogeneous ? MatrixXd(theta / 2.0 * MatrixXd::Identity(n, n))
                             : read_matrix("a");
    system = TimeVaryingSystem::constant(std::move(A), std::move(B));
  }

  const auto tg = block.has("t_grid") ? block.get_doubles("t_grid", sctx)
                                      : std::vector<double>{0.0, 50.0, 512.0};
  if (tg.size() != 3) throw config_error(sctx + ".t_grid: expected 'start end count'");
  const auto t_grid = linspace(tg[0], tg[1], static_cast<int>(tg[2]));

  CheckRow row;
  row.scenario = name;
  row.check = to_string(CheckKind::StabilityCertificate);
  row.statement = kStatementCertificate;
  row.threshold = "envelope never exceeded after 10% burn-in";

  std::optional<StabilityCertificate> cert;
  try {
    if (homogeneous) {
      auto provider = [system](double t) { return system->B_at(t); };
      cert = certify_homogeneous(theta, provider, n, t_grid);
    } else {
      const auto mg = block.has("m_grid") ? block.get_doubles("m_grid", sctx)
                                          : std::vector<double>{0.05, 5.0, 64.0};
      if (mg.size() != 3) throw config_error(sctx + ".m_grid: expected 'start end count'");
      const auto m_grid = mg[2] < 2.0 ? std::vector<double>{mg[0]}
                                      : logspace(mg[0], mg[1], static_cast<int>(mg[2]));
      cert = certify_sun(*system, m_grid, t_grid);
    }
  } catch (const hypothesis_error& e) {
    row.status = "fail";
    row.measured = std::string("hypothesis violated: ") + e.what();
    outcome.rows.push_back(row);
    return;
  }

  if (!cert) {
    row.status = "fail";
    row.measured = "no certificate";
    outcome.rows.push_back(row);
    return;
  }

  const double horizon = block.get_double_or("horizon", 50.0 / cert->lambda, sctx);
  double h = block.get_double_or("h", 0.0, sctx);
  if (!(h > 0.0)) h = std::clamp(horizon / 150000.0, 1e-3, 0.05);
  const int stride = std::max(1L, std::lround(horizon / h / 2000.0));
  const auto envelope = simulate_transition(*system, 0.0, horizon, h, stride);
  const auto check = validate_certificate_envelope(envelope, cert->lambda);

  row.status = check.pass ? "pass" : "fail";
  row.measured = measured_kv("m", cert->m) + " " + measured_kv("lambda", cert->lambda) + " " +
                 measured_kv("margin", cert->margin) + " " +
                 measured_kv("gamma_hat", check.gamma_hat) + " " +
                 measured_kv("worst_excess", check.worst_excess);
  outcome.rows.push_back(row);

  std::ostringstream rep;
  rep << "[stability-certificate] scenario=" << name << " method=" << cert->method
      << " verdict=" << row.status << "\n"
      << "  m = " << fmt_short(cert->m) << ", l = " << fmt_short(cert->l)
      << ", c = " << fmt_short(cert->c) << ", margin = " << fmt_short(cert->margin)
      << ", lambda = " << fmt_short(cert->lambda) << "\n"
      << "  suprema over " << cert->t_grid_points << " grid nodes in ["
      << fmt_short(t_grid.front()) << ", " << fmt_short(t_grid.back()) << "]\n"
      << "  simulated horizon " << fmt_short(horizon) << ", gamma_hat "
      << fmt_short(check.gamma_hat) << "\n";
  if (cert->method == "homogeneous")
    rep << "  chi = " << fmt_short(cert->chi) << ", lambda_min = " << fmt_short(cert->lambda_min)
        << "\n";
  outcome.report_text += rep.str();
}

ScenarioOutcome run_scenario(const ScenarioContext& ctx) {
  const ScenarioConfig& sc = *ctx.config;
  ScenarioOutcome outcome;
  outcome.name = sc.name;

  bool needs_trajectory = false;
  for (CheckKind k : sc.checks) needs_trajectory = needs_trajectory || check_needs_trajectory(k);

  std::optional<TrajectoryRecord> traj;
  std::shared_ptr<const PotentialModel> potential;
  std::shared_ptr<const EnvironmentSignal> signal;

  if (needs_trajectory) {
    AgentConfig agent = build_agent_config(sc, ctx.experiment->base_dir);
    potential = agent.potential;
    signal = agent.signal;
    const Section& integ = *sc.body.child("integrator");
    const std::string ictx = "scenario '" + sc.name + "': integrator";
    const double h = integ.get_double("h", ictx);
    const double T = integ.get_double("T", ictx);
    const int stride = static_cast<int>(integ.get_int_or("sample_stride", 1, ictx));
    try {
      traj = simulate(agent, T, h, stride);
    } catch (const divergence_error& e) {
      CheckRow row{sc.name, "simulation", "fail", e.what(), "", "trajectory must stay finite"};
      outcome.rows.push_back(row);
      return outcome;
    }

    const std::string csv_path = ctx.out_dir + "/" + sc.name + ".csv";
    std::ofstream csv(csv_path);
    if (!csv) throw config_error("cannot write " + csv_path);
    csv << trajectory_csv(*traj);
  }

  for (CheckKind kind : sc.checks) {
    switch (kind) {
      case CheckKind::EnergyBalance: {
        const double dU = traj->U_final - traj->U0;
        const double residual = traj->Z_total + dU - traj->E_total;
        const double tol = 1e-6 * (1.0 + std::abs(traj->E_total) + std::abs(dU));
        CheckRow row{sc.name, to_string(kind),
                     std::abs(residual) <= tol ? "pass" : "fail",
                     measured_kv("residual", residual) + " " + measured_kv("Z", traj->Z_total) +
                         " " + measured_kv("dU", dU) + " " + measured_kv("E", traj->E_total),
                     "|residual| <= 1e-6*(1+|E|+|dU|)", kStatementEnergyBalance};
        outcome.rows.push_back(row);
        break;
      }
      case CheckKind::Corollary: {
        EnergyLedger ledger;
        ledger.U0 = traj->U0;
        ledger.U = traj->U_final;
        ledger.Z = traj->Z_total;
        ledger.E = traj->E_total;
        const auto rep = check_corollary(ledger);
        CheckRow row{sc.name, to_string(kind), rep.pass ? "pass" : "fail",
                     measured_kv("dU", rep.delta_U) + " " + measured_kv("E", rep.E),
                     "dU <= E + 1e-6*(1+|E|)", kStatementCorollary};
        outcome.rows.push_back(row);
        break;
      }
      case CheckKind::HomoExpConv: {
        const QuasiPeriodSpec spec =
            build_quasi_period(*sc.body.child("quasi_period"), "scenario '" + sc.name + "'");
        const auto rep = pseudo_period_deviation(*traj, spec, sc.name);
        outcome.rows.push_back(verdict_row(sc.name, kind, rep, kStatementHomoExpConv,
                                           "fitted exponent <= -(p-1/2)+0.2 and under envelope"));
        outcome.report_text += rep.to_text();
        if (ctx.options->plots) {
          // Deviation series on log-log axes alongside the fitted envelope.
          std::vector<double> ts, devs, env;
          const int i_lo = traj->index_at_or_after(0.1 * traj->t_end());
          for (int i = i_lo; i < traj->sample_count(); i += 16) {
            const double t = traj->times[i];
            const double g = spec.gamma.gamma(t);
            if (g > traj->t_end()) break;
            ts.push_back(t);
            devs.push_back((traj->w.row(i).transpose() - traj->w_at(g)).norm());
            env.push_back(rep.measured.count("B_hat")
                              ? rep.measured.at("B_hat") *
                                    std::pow(spec.alpha + t, -(spec.p - 0.5))
                              : 0.0);
          }
          write_svg_chart(ctx.out_dir + "/" + sc.name + "_deviation.svg",
                          {{"deviation", ts, devs}, {"envelope", ts, env}},
                          {sc.name + ": pseudo-period deviation", "t", "||w(t)-w(gamma(t))||",
                           true, true});
        }
        break;
      }
      case CheckKind::Generalization: {
        const Section& qp = *sc.body.child("quasi_period");
        const std::string qctx = "scenario '" + sc.name + "'";
        const QuasiPeriodSpec spec = build_quasi_period(qp, qctx);
        const double horizon = qp.get_double_or("check_horizon", 0.0, qctx + ": quasi_period");
        const auto rep = environmental_energy_boundedness(*traj, *potential, *signal, spec,
                                                          sc.name, horizon);
        outcome.rows.push_back(verdict_row(sc.name, kind, rep, kStatementGeneralization,
                                           "increment <= 1% of cumulative"));
        outcome.report_text += rep.to_text();
        break;
      }
      case CheckKind::Convergence: {
        const Section* conv = sc.body.child("convergence");
        const std::string cctx = "scenario '" + sc.name + "': convergence";
        const double tail =
            conv ? conv->get_double_or("tail_fraction", 0.1, cctx) : 0.1;
        auto rep = convergence_check(*traj, tail, sc.name);
        if (conv && conv->has("expected_w")) {
          const VectorXd expected = to_vec(conv->get_doubles("expected_w", cctx));
          const double tol = conv->get_double_or("expected_w_tol", 1e-6, cctx);
          if (expected.size() != traj->w.cols())
            throw config_error(cctx + ".expected_w: dimension mismatch");
          VectorXd w_bar = VectorXd::Zero(traj->w.cols());
          for (int j = 0; j < traj->w.cols(); ++j)
            w_bar[j] = rep.measured.at("w_bar_" + std::to_string(j));
          const double dist = (w_bar - expected).norm();
          rep.measured["minimizer_distance"] = dist;
          if (dist > tol) rep.verdict = Verdict::Fail;
        }
        outcome.rows.push_back(verdict_row(sc.name, kind, rep, kStatementConvergence,
                                           "tail deviation and speed <= 1e-2"));
        outcome.report_text += rep.to_text();
        break;
      }
      case CheckKind::StabilityCertificate:
        run_stability_check(ctx, outcome);
        break;
    }
  }

  if (ctx.options->plots && traj) {
    std::vector<SvgSeries> w_series;
    const int m = static_cast<int>(traj->w.cols());
    const int step = std::max(1, traj->sample_count() / 4000);
    for (int j = 0; j < m && j < 8; ++j) {
      SvgSeries s;
      s.label = "w_" + std::to_string(j + 1);
      for (int i = 0; i < traj->sample_count(); i += step) {
        s.xs.push_back(traj->times[i]);
        s.ys.push_back(traj->w(i, j));
      }
      w_series.push_back(std::move(s));
    }
    write_svg_chart(ctx.out_dir + "/" + sc.name + "_w.svg", w_series,
                    {sc.name + ": weights", "t", "w", false, false});

    SvgSeries u{"U", {}, {}}, z{"Z", {}, {}}, e{"E", {}, {}};
    for (int i = 0; i < traj->sample_count(); i += step) {
      u.xs.push_back(traj->times[i]);
      u.ys.push_back(traj->U[i]);
      z.xs.push_back(traj->times[i]);
      z.ys.push_back(traj->Z[i]);
      e.xs.push_back(traj->times[i]);
      e.ys.push_back(traj->E[i]);
    }
    write_svg_chart(ctx.out_dir + "/" + sc.name + "_energy.svg", {u, z, e},
                    {sc.name + ": energy ledger", "t", "energy", false, false});
  }
  return outcome;
}

}  // namespace

std::string trajectory_csv(const TrajectoryRecord& traj) {
  std::ostringstream out;
  const int m = static_cast<int>(traj.w.cols());
  out << "t";
  for (int j = 1; j <= m; ++j) out << ",w_" << j;
  for (int j = 1; j <= m; ++j) out << ",wdot_" << j;
  out << ",V,K,U,Z_cum,E_cum,residual\n";
  for (int i = 0; i < traj.sample_count(); ++i) {
    out << fmt_full(traj.times[i]);
    for (int j = 0; j < m; ++j) out << "," << fmt_full(traj.w(i, j));
    for (int j = 0; j < m; ++j) out << "," << fmt_full(traj.wdot(i, j));
    out << "," << fmt_full(traj.V[i]) << "," << fmt_full(traj.K[i]) << ","
        << fmt_full(traj.U[i]) << "," << fmt_full(traj.Z[i]) << "," << fmt_full(traj.E[i]) << ","
        << fmt_full(traj.residual[i]) << "\n";
  }
  return out.str();
}

std::string summary_csv(const std::vector<CheckRow>& rows) {
  std::ostringstream out;
  out << "scenario,check,status,measured,threshold,statement\n";
  for (const auto& r : rows)
    out << r.scenario << "," << r.check << "," << r.status << "," << r.measured << ","
        << r.threshold << "," << r.statement << "\n";
  return out.str();
}

SuiteResult run_suite(const ExperimentConfig& config, const RunOptions& options) {
  std::string out_dir = options.out_dir_override;
  if (out_dir.empty()) out_dir = config.output_dir;
  if (out_dir.empty()) {
    const char* env = std::getenv("ENLAB_OUT_DIR");
    out_dir = env ? env : "enlab_out";
  }
  fs::create_directories(out_dir);

  std::vector<const ScenarioConfig*> selected;
  for (const auto& sc : config.scenarios)
    if (options.only.empty() || sc.name == options.only) selected.push_back(&sc);
  if (!options.only.empty() && selected.empty())
    throw config_error("no scenario named '" + options.only + "'");

  std::vector<ScenarioOutcome> outcomes(selected.size());
  std::vector<std::string> errors(selected.size());
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(selected.size())));

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= selected.size()) return;
      ScenarioContext ctx{selected[i], &config, &options, out_dir};
      try {
        outcomes[i] = run_scenario(ctx);
      } catch (const config_error& e) {
        errors[i] = e.what();
      } catch (const std::exception& e) {
        outcomes[i].name = selected[i]->name;
        outcomes[i].rows.push_back(CheckRow{selected[i]->name, "execution", "fail", e.what(), "",
                                            "scenario must run to completion"});
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& err : errors)
    if (!err.empty()) throw config_error(err);

  // Deterministic merge in scenario-name order.
  std::sort(outcomes.begin(), outcomes.end(),
            [](const ScenarioOutcome& a, const ScenarioOutcome& b) { return a.name < b.name; });

  SuiteResult result;
  result.output_dir = out_dir;
  std::string reports;
  bool any_fail = false;
  for (const auto& oc : outcomes) {
    for (const auto& row : oc.rows) {
      any_fail = any_fail || row.status == "fail";
      result.rows.push_back(row);
    }
    reports += oc.report_text;
  }

  {
    std::ofstream summary(out_dir + "/summary.csv");
    if (!summary) throw config_error("cannot write " + out_dir + "/summary.csv");
    summary << summary_csv(result.rows);
  }
  {
    std::ofstream rep(out_dir + "/reports.txt");
    if (!rep) throw config_error("cannot write " + out_dir + "/reports.txt");
    rep << reports;
  }

  result.exit_code = any_fail ? 2 : 0;
  return result;
}

std::string list_scenarios(const ExperimentConfig& config) {
  std::ostringstream out;
  for (const auto& sc : config.scenarios) {
    out << sc.name << ":";
    for (CheckKind k : sc.checks) out << " " << to_string(k);
    out << "\n";
  }
  return out.str();
}

}  // namespace enlab
