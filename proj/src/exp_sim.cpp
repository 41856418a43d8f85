// Monte-Carlo experiments on two-filter combinations.

#include "afcomb/combination.hpp"
#include "afcomb/ensemble.hpp"
#include "afcomb/lowcost.hpp"
#include "afcomb/scenario.hpp"
#include "afcomb/theory.hpp"
#include "exp_common.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <limits>

namespace afc::detail {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Scenario identification(const Params& p) {
  Scenario sc;
  sc.input = white_input(static_cast<std::size_t>(p.integer("taps")), p.real("input_var"));
  sc.plant.kind = PlantInit::gaussian;
  sc.snr_db = p.real("snr_db");
  return sc;
}

std::vector<KeySpec> identification_keys(const std::string& taps, const std::string& input_var, const std::string& mu1,
                                         const std::string& mu2) {
  return {
      integer("taps", taps).ge(1).sym("M"),
      real("input_var", input_var).gt(0).sym("σ_u²"),
      real("snr_db", "20").sym("SNR"),
      real("mu1", mu1).gt(0).sym("μ₁"),
      real("mu2", mu2).gt(0).sym("μ₂"),
      real("nlms_eps", "1e-8").ge(0).sym("ε"),
  };
}

// Optimum affine combination of the ensemble a priori errors at each record.
struct OptimumTrack {
  std::vector<double> emse;
  std::vector<double> lambda;
};

OptimumTrack optimum_track(const EnsembleMetrics& m, const std::string& c1, const std::string& c2) {
  OptimumTrack t;
  const auto z1 = m.series(c1);
  const auto z2 = m.series(c2);
  const auto z12 = m.series("ea12");
  for (Eigen::Index i = 0; i < z1.size(); ++i) {
    const double bound = std::sqrt(z1[i] * z2[i]);
    const double x = std::clamp(z12[i], -bound, bound);
    if (!(z1[i] > 0.0 && z2[i] > 0.0)) {
      t.emse.push_back(std::min(z1[i], z2[i]));
      t.lambda.push_back(kNaN);
      continue;
    }
    const TheoryResult r = analyze(z1[i], z2[i], x);
    t.emse.push_back(r.zeta_aff);
    t.lambda.push_back(r.lambda_aff.value_or(kNaN));
  }
  return t;
}

ExperimentResult run_convergence(const Params& p, const RunOptions& opts) {
  const Scenario sc = identification(p);
  const auto taps = sc.taps();
  const auto mus = p.reals("mu_a_list");
  const double ratio = p.real("affine_ratio");
  std::vector<PairBankGraph::MixerSpec> mixers;
  for (double mu : mus) {
    MixerConfig cvx{MixRule::cvx_pn_lms, std::nullopt, mu, p.real("eta"), p.real("mixer_eps"), p.real("a_plus")};
    MixerConfig aff{MixRule::aff_pn_lms, std::nullopt, mu / ratio, p.real("eta"), p.real("mixer_eps"), p.real("a_plus")};
    mixers.push_back({"cvx_" + label(mu), 0, 1, cvx});
    mixers.push_back({"aff_" + label(mu), 0, 1, aff});
  }
  const double mu1 = p.real("mu1");
  const double mu2 = p.real("mu2");
  const double eps = p.real("nlms_eps");
  const std::int64_t horizon = p.integer("horizon");
  const EnsembleConfig ec = ensemble_from(p, opts, horizon, p.integer("record_stride"), -1);
  const auto m = run_ensemble(
      sc,
      [&](std::uint64_t) {
        return std::make_unique<PairBankGraph>(
            std::vector<std::string>{"1", "2"},
            std::vector<FilterState>{make_nlms(taps, mu1, eps), make_nlms(taps, mu2, eps)}, mixers);
      },
      ec);
  const OptimumTrack opt = optimum_track(m, "ea2_1", "ea2_2");

  Table t{"convergence", {"n", "emse_1_db", "emse_2_db", "emse_opt_db", "lambda_opt"}, {}};
  for (const auto& mx : mixers) {
    t.header.push_back("emse_" + mx.label + "_db");
    t.header.push_back("lambda_" + mx.label);
  }
  for (std::size_t i = 0; i < m.record_n.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<Cell> row{m.record_n[i], db(m.series("ea2_1")[r]), db(m.series("ea2_2")[r]), db(opt.emse[i]),
                          opt.lambda[i]};
    for (const auto& mx : mixers) {
      row.emplace_back(db(m.series("ea2_" + mx.label)[r]));
      row.emplace_back(m.series("lambda_" + mx.label)[r]);
    }
    t.add(std::move(row));
  }

  const double level = p.real("crossing_db");
  Table s{"convergence_summary", {"rule", "mu", "steady_excess_db", "crossing_n", "max_excess_db"}, {}};
  auto crossing = [&](const std::vector<double>& emse_db) -> std::int64_t {
    const auto idx = first_at_or_below(emse_db, level);
    return idx < 0 ? -1 : m.record_n[static_cast<std::size_t>(idx)];
  };
  std::vector<double> opt_db;
  for (double v : opt.emse) opt_db.push_back(db(v));
  s.add({std::string("optimum"), kNaN, kNaN, crossing(opt_db), kNaN});
  for (const auto& mx : mixers) {
    std::vector<double> e;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.record_n.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      e.push_back(db(m.series("ea2_" + mx.label)[r]));
      worst = std::max(worst, e.back() - db(std::min(m.series("ea2_1")[r], m.series("ea2_2")[r])));
    }
    s.add({std::string(to_string(mx.config.rule)), mx.config.step,
           db(m.steady("ea2_" + mx.label)) - db(m.steady("ea2_2")), crossing(e), worst});
  }
  ExperimentResult res;
  res.tables.push_back(std::move(t));
  res.tables.push_back(std::move(s));
  return res;
}

ExperimentResult run_pn_robustness(const Params& p, const RunOptions& opts) {
  const auto taps = static_cast<std::size_t>(p.integer("taps"));
  const double input_var = p.real("input_var");
  const double mu1 = p.real("mu1");
  const double mu2 = p.real("mu2");
  const double eps = p.real("nlms_eps");
  MixerConfig lms{MixRule::cvx_lms, std::nullopt, p.real("mu_a_lms"), p.real("eta"), p.real("mixer_eps"),
                  p.real("a_plus")};
  MixerConfig pn{MixRule::cvx_pn_lms, std::nullopt, p.real("mu_a_pn"), p.real("eta"), p.real("mixer_eps"),
                 p.real("a_plus")};
  if (p.text("activation") != "default") {
    lms.activation = parse_activation(p.text("activation"));
    pn.activation = lms.activation;
  }
  const std::int64_t transient = p.integer("transient");
  const std::int64_t window = p.integer("window");
  const auto grid = logspace(p.real("trq_min"), p.real("trq_max"), static_cast<std::size_t>(p.integer("points")));
  Table t{"pn-robustness",
          {"snr_db", "tr_q", "nsd_1_db", "nsd_2_db", "nsd_cvx_lms_db", "nsd_cvx_pn_db", "lambda_cvx_lms",
           "lambda_cvx_pn"},
          {}};
  std::size_t point = 0;
  for (double snr : p.reals("snr_list")) {
    for (double trq : grid) {
      Scenario sc;
      sc.input = white_input(taps, input_var);
      sc.plant.kind = PlantInit::gaussian;
      sc.drift = identity_drift(trq / static_cast<double>(taps));
      sc.snr_db = snr;
      EnsembleConfig ec = ensemble_from(p, opts, transient + window, transient + window, transient);
      ec.seed = mix_seed(ec.seed, 3000 + point++);
      const auto m = run_ensemble(
          sc,
          [&](std::uint64_t) {
            return std::make_unique<PairBankGraph>(
                std::vector<std::string>{"1", "2"},
                std::vector<FilterState>{make_nlms(taps, mu1, eps), make_nlms(taps, mu2, eps)},
                std::vector<PairBankGraph::MixerSpec>{{"lms", 0, 1, lms}, {"pn", 0, 1, pn}});
          },
          ec);
      // Unit-norm plant: w_o' R w_o = input_var.
      const double noise = input_var / from_db(snr);
      const double ref = std::sqrt(noise * input_var * static_cast<double>(taps) * trq);
      t.add({snr, trq, nsd(m.steady("ea2_1"), ref), nsd(m.steady("ea2_2"), ref), nsd(m.steady("ea2_lms"), ref),
             nsd(m.steady("ea2_pn"), ref), m.steady("lambda_lms"), m.steady("lambda_pn")});
    }
  }
  ExperimentResult res;
  res.tables.push_back(std::move(t));
  return res;
}

// Time after `from` for the smoothed series to settle within `tol_db` of its
// final level (mean of the last 10% of records).
std::int64_t recovery_time(const std::vector<std::int64_t>& n, Eigen::Ref<const Vector> power, std::int64_t from,
                           std::size_t smooth_points, double tol_db, double* final_db) {
  std::vector<double> x(power.data(), power.data() + power.size());
  const std::size_t tail = std::max<std::size_t>(1, x.size() / 10);
  double final_level = 0.0;
  for (std::size_t i = x.size() - tail; i < x.size(); ++i) final_level += x[i];
  final_level /= static_cast<double>(tail);
  if (final_db) *final_db = db(final_level);
  const auto sm = moving_average(x, smooth_points);
  std::size_t start = 0;
  while (start < n.size() && n[start] < from) ++start;
  for (std::size_t i = start; i < sm.size(); ++i) {
    if (db(sm[i]) <= db(final_level) + tol_db) return n[i] - from;
  }
  return -1;
}

ExperimentResult run_transfer(const Params& p, const RunOptions& opts) {
  Scenario sc = identification(p);
  const auto taps = sc.taps();
  const std::int64_t change = p.integer("change_at");
  const std::int64_t horizon = p.integer("horizon");
  if (change >= horizon) throw ConfigError("change_at must lie inside the horizon");
  if (change > 0) sc.changes.push_back({change, sc.plant});
  const MixerConfig mixer = mixer_from(p);
  const auto names = p.texts("policies");
  std::vector<TransferPolicy> policies;
  for (const auto& name : names) {
    TransferPolicy tp;
    tp.kind = parse_transfer_kind(name);
    tp.leak = p.real("leak");
    tp.threshold = p.real("lambda0");
    tp.period = p.integer("period");
    validate(tp);
    policies.push_back(tp);
  }
  const double mu1 = p.real("mu1");
  const double mu2 = p.real("mu2");
  const double eps = p.real("nlms_eps");
  const std::int64_t stride = p.integer("record_stride");
  const auto m = run_ensemble(
      sc,
      [&](std::uint64_t) {
        auto bundle = std::make_unique<GraphBundle>();
        for (std::size_t i = 0; i < policies.size(); ++i) {
          bundle->add(names[i], std::make_unique<TransferGraph>(make_nlms(taps, mu1, eps), make_nlms(taps, mu2, eps),
                                                                 mixer, policies[i]));
        }
        return bundle;
      },
      ensemble_from(p, opts, horizon, stride, -1));

  Table t{"transfer", {"n"}, {}};
  for (const auto& name : names) {
    for (const char* c : {"emse_1", "emse_2", "emse_comb"}) t.header.push_back(std::string(c) + "_" + name + "_db");
    t.header.push_back("lambda_" + name);
  }
  for (std::size_t i = 0; i < m.record_n.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<Cell> row{m.record_n[i]};
    for (const auto& name : names) {
      row.emplace_back(db(m.series(name + ":ea2_1")[r]));
      row.emplace_back(db(m.series(name + ":ea2_2")[r]));
      row.emplace_back(db(m.series(name + ":ea2")[r]));
      row.emplace_back(m.series(name + ":lambda")[r]);
    }
    t.add(std::move(row));
  }

  const auto smooth = static_cast<std::size_t>(std::max<std::int64_t>(1, p.integer("smooth") / stride));
  Table s{"transfer_summary", {"policy", "recovery_samples", "final_db", "ratio_vs_none"}, {}};
  std::vector<std::int64_t> rec;
  std::vector<double> fin;
  std::int64_t base = -1;
  for (const auto& name : names) {
    double f = 0.0;
    rec.push_back(recovery_time(m.record_n, m.series(name + ":ea2"), change, smooth, p.real("tolerance_db"), &f));
    fin.push_back(f);
    if (name == "none") base = rec.back();
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double ratio = base > 0 && rec[i] >= 0 ? static_cast<double>(rec[i]) / static_cast<double>(base) : kNaN;
    s.add({names[i], rec[i], fin[i], ratio});
  }
  ExperimentResult res;
  res.tables.push_back(std::move(t));
  res.tables.push_back(std::move(s));
  return res;
}

// Difference-filter combinations at several wordlengths on one signal.
class LowcostGraph : public FilterGraph {
 public:
  LowcostGraph(std::size_t taps, const std::vector<DifferenceComboConfig>& variants,
               const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < variants.size(); ++i) {
      combos_.emplace_back(taps, variants[i]);
      columns_.push_back("ea2_" + labels[i]);
      columns_.push_back("sat_" + labels[i]);
    }
  }
  const std::vector<std::string>& columns() const override { return columns_; }
  void step(const Sample& s, std::span<double> row, bool record) override {
    for (std::size_t i = 0; i < combos_.size(); ++i) {
      const DiffStep r = combos_[i].step(s.u(), s.d);
      if (record) {
        const double ea = s.clean - (s.d - r.e);
        row[2 * i] = ea * ea;
        row[2 * i + 1] = static_cast<double>(combos_[i].saturation_events());
      }
    }
  }

 private:
  std::vector<DifferenceCombination> combos_;
  std::vector<std::string> columns_;
};

ExperimentResult run_lowcost(const Params& p, const RunOptions& opts) {
  const Scenario sc = identification(p);
  const auto taps = sc.taps();
  DifferenceComboConfig base;
  base.mu1 = p.real("mu1");
  base.mu2 = p.real("mu2");
  base.normalized = p.boolean("normalized");
  base.eps = p.real("nlms_eps");
  base.range = p.real("range");
  base.mixer = mixer_from(p);

  std::vector<DifferenceComboConfig> variants{base};
  std::vector<std::string> labels{"full"};
  const auto bits = p.integers("frac_bits");
  for (auto b : bits) {
    DifferenceComboConfig v = base;
    v.frac_bits = static_cast<int>(b);
    variants.push_back(v);
    labels.push_back(std::to_string(b));
  }
  const std::int64_t horizon = p.integer("horizon");
  const std::int64_t window = p.integer("window");
  if (window >= horizon) throw ConfigError("window must be shorter than the horizon");
  const auto m = run_ensemble(
      sc, [&](std::uint64_t) { return std::make_unique<LowcostGraph>(taps, variants, labels); },
      ensemble_from(p, opts, horizon, horizon, horizon - window));

  Table t{"lowcost", {"frac_bits", "emse_db", "degradation_db", "saturations"}, {}};
  const double full = db(m.steady("ea2_full"));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::int64_t b = i == 0 ? 0 : bits[i - 1];
    const double e = db(m.steady("ea2_" + labels[i]));
    // Saturation counts are cumulative, so the window mean is close to the final count.
    t.add({b, e, e - full, m.steady("sat_" + labels[i])});
  }

  // Single-run check against a directly implemented pair of filters.
  const auto steps = p.integer("check_steps");
  SignalSource src(sc, run_seed(static_cast<std::uint64_t>(p.integer("seed")), 0));
  DifferenceCombination diff(taps, base);
  FilterState f1 = base.normalized ? make_nlms(taps, base.mu1, base.eps) : make_lms(taps, base.mu1);
  FilterState f2 = base.normalized ? make_nlms(taps, base.mu2, base.eps) : make_lms(taps, base.mu2);
  TwoFilterCombination direct(f1, f2, base.mixer);
  double max_e2 = 0.0;
  double max_e = 0.0;
  double max_w2 = 0.0;
  for (std::int64_t n = 0; n < steps; ++n) {
    const Sample& s = src.next();
    const DiffStep a = diff.step(s.u(), s.d);
    const ComboStep b = direct.step(s.u(), s.d);
    max_e2 = std::max(max_e2, std::abs(a.e2 - (s.d - b.y2)));
    max_e = std::max(max_e, std::abs(a.e - b.e));
    max_w2 = std::max(max_w2, (diff.slow_weights() - direct.filter2().w).cwiseAbs().maxCoeff());
  }
  const DifferenceCost cost = difference_cost(taps);
  Table c{"lowcost_check", {"metric", "value"}, {}};
  c.add({std::string("steps"), steps});
  c.add({std::string("max_e2_deviation"), max_e2});
  c.add({std::string("max_e_deviation"), max_e});
  c.add({std::string("max_w2_deviation"), max_w2});
  c.add({std::string("full_width_mults"), static_cast<std::int64_t>(cost.full_width)});
  c.add({std::string("reduced_width_mults"), static_cast<std::int64_t>(cost.reduced_width)});

  ExperimentResult res;
  res.tables.push_back(std::move(t));
  res.tables.push_back(std::move(c));
  return res;
}

}  // namespace

ExperimentDef convergence_def() {
  ExperimentDef d;
  d.id = "convergence";
  d.summary = "convergence of affine and convex power-normalized mixers against the optimum mixing parameter";
  d.keys = identification_keys("7", "0.142857142857142857", "0.5", "0.01");
  append(d.keys, {
                     reals("mu_a_list", "0.25,0.5,1").gt(0).sym("μ_a"),
                     real("affine_ratio", "800").gt(0).help("mu_lambda = mu_a / affine_ratio"),
                     real("eta", "0.9").ge(0).lt(1).sym("η"),
                     real("a_plus", "4").gt(0).sym("a⁺"),
                     real("mixer_eps", "1e-8").gt(0).sym("ε"),
                     integer("horizon", "20000").ge(10),
                     integer("record_stride", "10").ge(1),
                     real("crossing_db", "-45"),
                 });
  d.run = run_convergence;
  return d;
}

ExperimentDef pn_robustness_def() {
  ExperimentDef d;
  d.id = "pn-robustness";
  d.summary = "steady NSD of cvx-LMS versus cvx-PN-LMS over Tr{Q} at two SNRs";
  d.keys = identification_keys("30", "0.0333333333333333333", "0.5", "0.01");
  d.keys.erase(std::find_if(d.keys.begin(), d.keys.end(), [](const KeySpec& k) { return k.name == "snr_db"; }));
  append(d.keys, {
                     reals("snr_list", "5,30").sym("SNR"),
                     real("trq_min", "1e-7").gt(0),
                     real("trq_max", "1e-1").gt(0),
                     integer("points", "7").ge(1),
                     real("mu_a_lms", "1000").gt(0).sym("μ_a"),
                     real("mu_a_pn", "1").gt(0).sym("μ_a"),
                     real("eta", "0.9").ge(0).lt(1).sym("η"),
                     real("a_plus", "4").gt(0).sym("a⁺"),
                     real("mixer_eps", "1e-8").gt(0).sym("ε"),
                     text("activation", "default").one_of({"default", "sigmoid", "scaled-sigmoid"}),
                     integer("transient", "30000").ge(0),
                     integer("window", "50000").ge(1),
                 });
  d.run = run_pn_robustness;
  return d;
}

ExperimentDef transfer_def() {
  ExperimentDef d;
  d.id = "transfer";
  d.summary = "reconvergence after an abrupt plant change with and without weight transfer";
  d.keys = identification_keys("7", "0.142857142857142857", "0.1", "0.01");
  append(d.keys, {
                     texts("policies", "none,copy").one_of({"none", "gradual", "copy", "feedback"}),
                     real("lambda0", "0.982").gt(0).lt(1).sym("λ₀"),
                     integer("period", "2").ge(2).sym("N₀"),
                     real("leak", "0.9").gt(0).lt(1).sym("ℓ"),
                     integer("change_at", "50000").ge(0),
                     integer("horizon", "100000").ge(10),
                     integer("record_stride", "10").ge(1),
                     integer("smooth", "101").ge(1).help("moving-average length in samples"),
                     real("tolerance_db", "1").gt(0),
                 });
  append(d.keys, mixer_keys("cvx-pn-lms", "0.5"));
  for (auto& k : d.keys) {
    if (k.name == "activation") k.fallback = "sigmoid";
  }
  d.run = run_transfer;
  return d;
}

ExperimentDef lowcost_def() {
  ExperimentDef d;
  d.id = "lowcost";
  d.summary = "difference-filter combination at reduced wordlength";
  d.keys = identification_keys("7", "0.142857142857142857", "0.5", "0.01");
  append(d.keys, {
                     integers("frac_bits", "8,12,16,20,26").ge(1).le(60).sym("B_c"),
                     real("range", "1").gt(0),
                     boolean("normalized", "true"),
                     integer("horizon", "20000").ge(10),
                     integer("window", "10000").ge(1),
                     integer("check_steps", "10000").ge(1),
                 });
  append(d.keys, mixer_keys("cvx-pn-lms", "0.5"));
  d.run = run_lowcost;
  return d;
}

}  // namespace afc::detail
