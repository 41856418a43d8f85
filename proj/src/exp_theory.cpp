// Closed-form experiments: NSD sweeps, LMS/RLS tracking, tables.

#include "afcomb/ensemble.hpp"
#include "afcomb/scenario.hpp"
#include "afcomb/theory.hpp"
#include "exp_common.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace afc::detail {

namespace {

TrackingSpec white_spec(std::size_t taps, double trace_r, double noise_var, double trace_q) {
  const auto m = static_cast<Eigen::Index>(taps);
  TrackingSpec s;
  s.noise_var = noise_var;
  s.R = Matrix::Identity(m, m) * (trace_r / static_cast<double>(taps));
  s.Q = Matrix::Identity(m, m) * (trace_q / static_cast<double>(taps));
  return s;
}

std::vector<KeySpec> sweep_keys(const std::string& mu1, const std::string& mu2, const std::string& lo,
                                const std::string& hi) {
  return {
      integer("taps", "7").ge(1).sym("M"),
      real("trace_r", "1").gt(0).sym("Tr{R}"),
      real("noise_var", "0.01").gt(0).sym("σ_v²"),
      real("mu1", mu1).gt(0).sym("μ₁"),
      real("mu2", mu2).gt(0).sym("μ₂"),
      real("trq_min", lo).gt(0).sym("Tr{Q} min"),
      real("trq_max", hi).gt(0).sym("Tr{Q} max"),
      integer("theory_points", "61").ge(2),
  };
}

std::vector<Cell> theory_row(double trq, const TheoryResult& r, double ref) {
  auto opt = [](const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); };
  return {trq,
          nsd(r.z1, ref),
          nsd(r.z2, ref),
          nsd(r.zeta_cvx, ref),
          nsd(r.zeta_aff, ref),
          opt(r.lambda_cvx),
          opt(r.lambda_aff),
          std::string(to_string(r.regime))};
}

const std::vector<std::string> kTheoryHeader = {"tr_q",       "nsd_1_db",   "nsd_2_db",   "nsd_cvx_db",
                                                "nsd_aff_db", "lambda_cvx", "lambda_aff", "regime"};

Table theory_sweep(const std::string& name, const Params& p) {
  const auto taps = static_cast<std::size_t>(p.integer("taps"));
  Table t{name, kTheoryHeader, {}};
  const Component c1{Family::lms, p.real("mu1")};
  const Component c2{Family::lms, p.real("mu2")};
  for (double trq : logspace(p.real("trq_min"), p.real("trq_max"), static_cast<std::size_t>(p.integer("theory_points")))) {
    const TrackingSpec spec = white_spec(taps, p.real("trace_r"), p.real("noise_var"), trq);
    const double ref = optimal_params(spec).zeta_lms;
    t.add(theory_row(trq, analyze_pair(c1, c2, spec), ref));
  }
  return t;
}

void check_sweep(const Params& p) {
  if (!(p.real("trq_max") > p.real("trq_min"))) throw ConfigError("trq_max must exceed trq_min");
}

ExperimentResult run_steady_nsd(const Params& p, const RunOptions& opts) {
  check_sweep(p);
  ExperimentResult r;
  r.tables.push_back(theory_sweep("steady-nsd_theory", p));

  const auto taps = static_cast<std::size_t>(p.integer("taps"));
  const auto points = static_cast<std::size_t>(p.integer("sim_points"));
  if (points == 0) return r;
  const MixerConfig mixer = mixer_from(p);
  const CombMode mode = is_convex(mixer.rule) ? CombMode::convex : CombMode::affine;
  const std::int64_t transient = p.integer("transient");
  const std::int64_t window = p.integer("window");
  const double mu1 = p.real("mu1");
  const double mu2 = p.real("mu2");

  Table sim{"steady-nsd_sim",
            {"tr_q", "nsd_1_db", "nsd_2_db", "nsd_comb_db", "nsd_1_theory_db", "nsd_2_theory_db", "nsd_comb_theory_db",
             "lambda_mean"},
            {}};
  const auto grid = logspace(p.real("sim_trq_min"), p.real("sim_trq_max"), points);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double trq = grid[i];
    const TrackingSpec spec = white_spec(taps, p.real("trace_r"), p.real("noise_var"), trq);
    Scenario sc;
    sc.input = white_input(taps, p.real("trace_r") / static_cast<double>(taps));
    sc.plant.kind = PlantInit::gaussian;
    sc.drift = identity_drift(trq / static_cast<double>(taps));
    sc.noise_var = p.real("noise_var");
    EnsembleConfig ec = ensemble_from(p, opts, transient + window, transient + window, transient);
    ec.seed = mix_seed(ec.seed, 1000 + i);
    const auto m = run_ensemble(
        sc,
        [&](std::uint64_t) {
          return std::make_unique<PairBankGraph>(
              std::vector<std::string>{"1", "2"}, std::vector<FilterState>{make_lms(taps, mu1), make_lms(taps, mu2)},
              std::vector<PairBankGraph::MixerSpec>{{"comb", 0, 1, mixer}});
        },
        ec);
    const double ref = optimal_params(spec).zeta_lms;
    const TheoryResult th = analyze_pair({Family::lms, mu1}, {Family::lms, mu2}, spec);
    sim.add({trq, nsd(m.steady("ea2_1"), ref), nsd(m.steady("ea2_2"), ref), nsd(m.steady("ea2_comb"), ref),
             nsd(th.z1, ref), nsd(th.z2, ref), nsd(mode == CombMode::convex ? th.zeta_cvx : th.zeta_aff, ref),
             m.steady("lambda_comb")});
  }
  r.tables.push_back(std::move(sim));
  return r;
}

ExperimentResult run_affine_gain(const Params& p, const RunOptions&) {
  check_sweep(p);
  Table base = theory_sweep("affine-gain", p);
  Table t{"affine-gain", kTheoryHeader, {}};
  t.header.push_back("gain_db");
  for (std::size_t i = 0; i < base.rows.size(); ++i) {
    auto row = base.rows[i];
    const double best = std::min(base.num(i, "nsd_1_db"), base.num(i, "nsd_2_db"));
    row.push_back(base.num(i, "nsd_aff_db") - best);
    t.add(std::move(row));
  }
  ExperimentResult r;
  r.tables.push_back(std::move(t));
  return r;
}

InputModel tracking_input(const Params& p) {
  InputModel in;
  in.taps = static_cast<std::size_t>(p.integer("taps"));
  in.power = p.real("r_power");
  in.pole = p.real("r_pole");
  return in;
}

ExperimentResult run_lms_rls(const Params& p, const RunOptions& opts) {
  const InputModel in = tracking_input(p);
  const Matrix R = in.covariance();
  const double noise = p.real("noise_var");
  const double scale = p.real("q_scale");
  auto spec_for = [&](double alpha) {
    TrackingSpec s;
    s.noise_var = noise;
    s.R = R;
    s.Q = build_q_mixture(alpha, R, scale);
    return s;
  };

  ExperimentResult r;
  Table t{"lms-rls-tracking_theory",
          {"alpha", "mu_opt", "beta_opt", "emse_lms_db", "emse_rls_db", "emse_cross_db", "emse_cvx_db", "emse_aff_db",
           "lambda_cvx", "lambda_aff", "margin_db", "regime"},
          {}};
  const auto n = static_cast<std::size_t>(p.integer("alpha_points"));
  for (std::size_t i = 0; i < n; ++i) {
    const double alpha = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
    const TrackingSpec spec = spec_for(alpha);
    const OptimalParams o = optimal_params(spec);
    const TheoryResult th = analyze_pair({Family::lms, o.mu}, {Family::rls, o.beta}, spec);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    t.add({alpha, o.mu, o.beta, db(th.z1), db(th.z2), th.z12 > 0 ? db(th.z12) : nan, db(th.zeta_cvx), db(th.zeta_aff),
           th.lambda_cvx.value_or(nan), th.lambda_aff.value_or(nan), db(std::min(th.z1, th.z2)) - db(th.zeta_cvx),
           std::string(to_string(th.regime))});
  }
  r.tables.push_back(std::move(t));

  const auto alphas = p.reals("sim_alphas");
  if (alphas.empty()) return r;
  const MixerConfig mixer = mixer_from(p);
  const CombMode mode = is_convex(mixer.rule) ? CombMode::convex : CombMode::affine;
  const std::int64_t transient = p.integer("transient");
  const std::int64_t window = p.integer("window");
  Table sim{"lms-rls-tracking_sim",
            {"alpha", "emse_lms_db", "emse_rls_db", "emse_comb_db", "emse_lms_theory_db", "emse_rls_theory_db",
             "emse_comb_theory_db", "lambda_mean"},
            {}};
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double alpha = alphas[i];
    const TrackingSpec spec = spec_for(alpha);
    const OptimalParams o = optimal_params(spec);
    Scenario sc;
    sc.input = in;
    sc.plant.kind = PlantInit::gaussian;
    sc.drift = matrix_drift(spec.Q);
    sc.noise_var = noise;
    EnsembleConfig ec = ensemble_from(p, opts, transient + window, transient + window, transient);
    ec.seed = mix_seed(ec.seed, 2000 + i);
    const auto m = run_ensemble(
        sc,
        [&](std::uint64_t) {
          return std::make_unique<PairBankGraph>(
              std::vector<std::string>{"lms", "rls"},
              std::vector<FilterState>{make_lms(in.taps, o.mu), make_rls(in.taps, 1.0 - o.beta, p.real("rls_delta"))},
              std::vector<PairBankGraph::MixerSpec>{{"comb", 0, 1, mixer}});
        },
        ec);
    const TheoryResult th = analyze_pair({Family::lms, o.mu}, {Family::rls, o.beta}, spec);
    sim.add({alpha, db(m.steady("ea2_lms")), db(m.steady("ea2_rls")), db(m.steady("ea2_comb")), db(th.z1), db(th.z2),
             db(mode == CombMode::convex ? th.zeta_cvx : th.zeta_aff), m.steady("lambda_comb")});
  }
  r.tables.push_back(std::move(sim));
  return r;
}

ExperimentResult run_theory_tables(const Params& p, const RunOptions&) {
  const auto taps = static_cast<std::size_t>(p.integer("taps"));
  InputModel in;
  in.taps = taps;
  in.power = p.real("trace_r") / static_cast<double>(taps);
  in.pole = p.real("r_pole");
  TrackingSpec spec;
  spec.noise_var = p.real("noise_var");
  spec.R = in.covariance();
  const double trq = p.real("trace_q");
  if (p.has("q_alpha")) {
    spec.Q = build_q_mixture(p.real("q_alpha"), spec.R, trq);
  } else {
    const auto m = static_cast<Eigen::Index>(taps);
    spec.Q = Matrix::Identity(m, m) * (trq / static_cast<double>(taps));
  }
  validate(spec);

  Table t{"theory-tables", {"section", "name", "value"}, {}};
  auto put = [&](const std::string& section, const std::string& name, Cell v) {
    t.add({section, name, std::move(v)});
  };
  put("inputs", "taps", static_cast<std::int64_t>(taps));
  put("inputs", "noise_var", spec.noise_var);
  put("inputs", "trace_r", spec.R.trace());
  put("inputs", "trace_q", spec.Q.trace());
  put("inputs", "trace_qr", (spec.Q * spec.R).trace());

  const double mu1 = p.real("mu1");
  const double mu2 = p.real("mu2");
  const double b1 = p.real("beta1");
  const double b2 = p.real("beta2");
  put("steady_state", fmt::format("zeta_lms(mu={})", label(mu1)), lms_emse(mu1, spec));
  put("steady_state", fmt::format("zeta_lms(mu={})", label(mu2)), lms_emse(mu2, spec));
  put("steady_state", fmt::format("zeta_rls(beta={})", label(b1)), rls_emse(b1, spec));
  put("steady_state", fmt::format("zeta_rls(beta={})", label(b2)), rls_emse(b2, spec));
  if (spec.Q.trace() > 0.0) {
    const OptimalParams o = optimal_params(spec);
    put("optimal", "mu_opt", o.mu);
    put("optimal", "beta_opt", o.beta);
    put("optimal", "zeta_opt_lms", o.zeta_lms);
    put("optimal", "zeta_opt_rls", o.zeta_rls);
    put("optimal", "zeta_lms(mu_opt)", lms_emse(o.mu, spec));
    put("optimal", "zeta_rls(beta_opt)", rls_emse(o.beta, spec));
  }

  const std::vector<std::pair<std::string, std::pair<Component, Component>>> pairs = {
      {"lms/lms", {{Family::lms, mu1}, {Family::lms, mu2}}},
      {"rls/rls", {{Family::rls, b1}, {Family::rls, b2}}},
      {"lms/rls", {{Family::lms, mu1}, {Family::rls, b1}}},
  };
  for (const auto& [name, pr] : pairs) {
    const TheoryResult th = analyze_pair(pr.first, pr.second, spec);
    put("cross_emse", name, th.z12);
    const std::string sec = "combination:" + name;
    put(sec, "zeta_1", th.z1);
    put(sec, "zeta_2", th.z2);
    put(sec, "zeta_12", th.z12);
    put(sec, "regime", std::string(to_string(th.regime)));
    if (th.lambda_aff) put(sec, "lambda_aff", *th.lambda_aff);
    if (th.lambda_cvx) put(sec, "lambda_cvx", *th.lambda_cvx);
    put(sec, "zeta_aff", th.zeta_aff);
    put(sec, "zeta_cvx", th.zeta_cvx);
  }
  ExperimentResult r;
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace

ExperimentDef steady_nsd_def() {
  ExperimentDef d;
  d.id = "steady-nsd";
  d.summary = "steady-state NSD of two LMS filters and their combination versus Tr{Q}";
  d.keys = sweep_keys("0.1", "0.005", "1e-8", "1e-2");
  append(d.keys, {
                     integer("sim_points", "7").ge(0).help("simulated Tr{Q} points (0: theory only)"),
                     real("sim_trq_min", "1e-8").gt(0),
                     real("sim_trq_max", "1e-2").gt(0),
                     integer("transient", "20000").ge(0),
                     integer("window", "80000").ge(1),
                 });
  append(d.keys, mixer_keys("cvx-pn-lms", "0.2"));
  d.run = run_steady_nsd;
  return d;
}

ExperimentDef affine_gain_def() {
  ExperimentDef d;
  d.id = "affine-gain";
  d.summary = "theoretical affine versus convex combination of two nearly identical LMS filters";
  d.keys = sweep_keys("0.01", "0.010001", "1e-9", "1e-3");
  d.simulated = false;
  d.run = run_affine_gain;
  return d;
}

ExperimentDef lms_rls_tracking_def() {
  ExperimentDef d;
  d.id = "lms-rls-tracking";
  d.summary = "optimal LMS, optimal RLS and their combination when Q mixes R and R^-1";
  d.keys = {
      integer("taps", "7").ge(1).sym("M"),
      real("noise_var", "0.01").gt(0).sym("σ_v²"),
      real("r_power", "0.142857142857142857").gt(0).help("r0 of the Toeplitz input covariance"),
      real("r_pole", "0.8").gt(-1).lt(1).help("ratio between consecutive lags"),
      real("q_scale", "1e-5").gt(0).sym("Tr{Q}"),
      integer("alpha_points", "21").ge(1),
      reals("sim_alphas", "").ge(0).le(1).sym("α"),
      real("rls_delta", "0.01").gt(0).sym("δ"),
      integer("transient", "20000").ge(0),
      integer("window", "50000").ge(1),
  };
  append(d.keys, mixer_keys("cvx-pn-lms", "0.5"));
  d.run = run_lms_rls;
  return d;
}

ExperimentDef theory_tables_def() {
  ExperimentDef d;
  d.id = "theory-tables";
  d.summary = "steady-state EMSE, cross-EMSE and optimal combinations for one tracking setup";
  d.simulated = false;
  d.keys = {
      integer("taps", "7").ge(1).sym("M"),
      real("noise_var", "0.01").gt(0).sym("σ_v²"),
      real("trace_r", "1").gt(0).sym("Tr{R}"),
      real("r_pole", "0").gt(-1).lt(1),
      real("trace_q", "1e-6").ge(0).sym("Tr{Q}"),
      real("q_alpha", "").ge(0).le(1).sym("α"),
      real("mu1", "0.1").gt(0).sym("μ₁"),
      real("mu2", "0.005").gt(0).sym("μ₂"),
      real("beta1", "0.01").gt(0).lt(1).sym("β₁"),
      real("beta2", "0.001").gt(0).lt(1).sym("β₂"),
  };
  d.run = run_theory_tables;
  return d;
}

}  // namespace afc::detail
