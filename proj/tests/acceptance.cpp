// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
// Usage: afcomb_acceptance [criterion numbers...]   (default: all)

#include "afcomb/combo2.hpp"
#include "afcomb/combo_multi.hpp"
#include "afcomb/ensemble.hpp"
#include "afcomb/experiments.hpp"
#include "afcomb/filters.hpp"
#include "afcomb/theory.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

using namespace afc;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double db10(double x) { return 10.0 * std::log10(x); }

ExperimentResult run_preset(const std::string& name, const std::map<std::string, std::string>& overrides = {}) {
  const auto& pr = preset(name);
  Config cfg = Config::parse(pr.text, pr.name);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  return run_experiment(cfg);
}

// Longest run of consecutive grid points with value <= level, in decades of tr_q.
double span_below(const Table& t, const std::string& column, double level) {
  double best = 0.0;
  std::size_t start = 0;
  bool open = false;
  for (std::size_t i = 0; i <= t.rows.size(); ++i) {
    const bool ok = i < t.rows.size() && t.num(i, column) <= level;
    if (ok && !open) {
      start = i;
      open = true;
    } else if (!ok && open) {
      best = std::max(best, std::log10(t.num(i - 1, "tr_q") / t.num(start, "tr_q")));
      open = false;
    }
  }
  return best;
}

Verdict ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 g(20240601);
  std::uniform_real_distribution<double> uz(0.01, 1.0);
  std::uniform_real_distribution<double> ur(-0.999, 0.999);
  const double step = 1e-4;
  double worst_l = 0.0, worst_z = 0.0;
  int checked = 0, flat = 0;
  for (int k = 0; k < 10000; ++k) {
    const double z1 = uz(g), z2 = uz(g);
    const double z12 = ur(g) * std::sqrt(z1 * z2);
    auto emse = [&](double l) { return l * l * z1 + (1 - l) * (1 - l) * z2 + 2 * l * (1 - l) * z12; };
    for (CombMode mode : {CombMode::affine, CombMode::convex}) {
      const auto lam = optimal_lambda(z1, z2, z12, mode);
      const double zeta = optimal_emse(z1, z2, z12, mode);
      if (!lam) {
        ++flat;
        continue;
      }
      // Grid anchored at zero; the affine grid is wide enough to contain the minimizer.
      long lo = 0, hi = 10000;
      if (mode == CombMode::affine) {
        const double reach = std::ceil(std::abs(*lam)) + 1.0;
        lo = -static_cast<long>(reach / step);
        hi = static_cast<long>(reach / step);
      }
      double best_l = 0.0, best_z = std::numeric_limits<double>::infinity();
      for (long i = lo; i <= hi; ++i) {
        const double l = static_cast<double>(i) * step;
        const double z = emse(l);
        if (z < best_z) {
          best_z = z;
          best_l = l;
        }
      }
      worst_l = std::max(worst_l, std::abs(*lam - best_l));
      worst_z = std::max(worst_z, std::abs(zeta - best_z));
      ++checked;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst_l <= 1e-4 && worst_z <= 1e-8 && secs < 10.0,
          fmt::format("{} optima checked ({} indistinguishable), max |dlambda| {:.3g}, max |dzeta| {:.3g}, {:.2f} s",
                      checked, flat, worst_l, worst_z, secs)};
}

// Single filter graph recording e_a^2.
class LoneLms : public FilterGraph {
 public:
  explicit LoneLms(FilterState f) : f_(std::move(f)) {}
  const std::vector<std::string>& columns() const override { return cols_; }
  void step(const Sample& s, std::span<double> row, bool record) override {
    const StepResult r = adapt(f_, s.u(), s.d);
    if (record) row[0] = (s.clean - r.y) * (s.clean - r.y);
  }

 private:
  FilterState f_;
  std::vector<std::string> cols_{"ea2"};
};

Verdict ac2() {
  const std::size_t taps = 7;
  const double mu = 0.05;
  const double noise = 1e-2;
  double worst = 0.0;
  std::string points;
  for (int i = 0; i < 11; ++i) {
    const double trq = std::pow(10.0, -7.0 + 0.4 * i);
    Scenario sc;
    sc.input = white_input(taps, 1.0 / static_cast<double>(taps));
    sc.plant.kind = PlantInit::gaussian;
    sc.drift = identity_drift(trq / static_cast<double>(taps));
    sc.noise_var = noise;
    EnsembleConfig ec;
    ec.runs = 100;
    ec.horizon = 200000;
    ec.record_stride = ec.horizon;
    ec.window_start = 20000;
    ec.seed = 7000 + static_cast<std::uint64_t>(i);
    const auto m = run_ensemble(sc, [&](std::uint64_t) { return std::make_unique<LoneLms>(make_lms(taps, mu)); }, ec);
    TrackingSpec spec;
    spec.noise_var = noise;
    spec.R = Matrix::Identity(7, 7) / 7.0;
    spec.Q = Matrix::Identity(7, 7) * (trq / 7.0);
    const double dev = db10(m.steady("ea2")) - db10(lms_emse(mu, spec));
    worst = std::max(worst, std::abs(dev));
    points += fmt::format(" {:+.2f}", dev);
  }
  return {worst <= 1.0, fmt::format("mu 0.05, Tr{{Q}} 1e-7..1e-3, sim - theory [dB]:{}; max {:.2f}", points, worst)};
}

Verdict ac3() {
  const auto r = run_preset("steady-nsd", {{"theory_points", "121"}});
  const auto& th = r.table("steady-nsd_theory");
  const double comb = span_below(th, "nsd_cvx_db", 2.0);
  const double c1 = span_below(th, "nsd_1_db", 2.0);
  const double c2 = span_below(th, "nsd_2_db", 2.0);
  const auto& sim = r.table("steady-nsd_sim");
  double worst = 0.0;
  for (std::size_t i = 0; i < sim.rows.size(); ++i) {
    worst = std::max(worst, std::abs(sim.num(i, "nsd_comb_db") - sim.num(i, "nsd_comb_theory_db")));
  }
  const bool pass = comb >= 4.0 && c1 <= 2.0 && c2 <= 2.0 && sim.rows.size() == 7 && worst <= 1.0;
  return {pass, fmt::format("NSD <= 2 dB over {:.2f} decades (components {:.2f}, {:.2f}); simulated vs theory max {:.2f} dB "
                            "at {} points",
                            comb, c1, c2, worst, sim.rows.size())};
}

Verdict ac4() {
  const auto r = run_preset("affine-gain");
  const auto& t = r.table("affine-gain");
  int used = 0;
  double worst_aff = 0.0, worst_cvx = 0.0;
  bool cases_ok = true;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double best = std::min(t.num(i, "nsd_1_db"), t.num(i, "nsd_2_db"));
    if (best < 6.0) continue;
    ++used;
    worst_aff = std::max(worst_aff, std::abs(t.num(i, "gain_db") + 3.0));
    worst_cvx = std::max(worst_cvx, std::abs(t.num(i, "nsd_cvx_db") - best));
    const std::string& regime = t.str(i, "regime");
    cases_ok = cases_ok && (regime == "case1" || regime == "case2");
  }
  return {used > 0 && worst_aff <= 0.5 && worst_cvx <= 1e-6 && cases_ok,
          fmt::format("{} points with component NSD >= 6 dB: affine gain within {:.3f} dB of -3 dB, convex minus best "
                      "{:.2g} dB, regimes 1/2: {}",
                      used, worst_aff, worst_cvx, cases_ok ? "yes" : "no")};
}

Verdict ac5() {
  const auto r = run_preset("lms-rls-tracking", {{"sim_alphas", ""}});
  const auto& t = r.table("lms-rls-tracking_theory");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (std::abs(t.num(i, "alpha") - 0.5) > 1e-12) continue;
    const double margin = t.num(i, "margin_db");
    const double lam = t.num(i, "lambda_cvx");
    return {margin > 0.1 && lam > 0.0 && lam < 1.0,
            fmt::format("alpha 0.5: margin {:.3f} dB, lambda {:.3f}", margin, lam)};
  }
  return {false, "alpha 0.5 missing from the sweep"};
}

Verdict ac6() {
  const auto r = run_preset("convergence");
  const auto& s = r.table("convergence_summary");
  bool all_n = true, steady = true;
  std::int64_t cvx_cross = -1, aff_cross = -1;
  std::string detail;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const std::string& rule = s.str(i, "rule");
    if (rule != "cvx-pn-lms") {
      if (rule == "aff-pn-lms" && std::abs(s.num(i, "mu") - 0.25 / 800) < 1e-12) {
        aff_cross = static_cast<std::int64_t>(s.num(i, "crossing_n"));
      }
      continue;
    }
    const double mu = s.num(i, "mu");
    const double excess = s.num(i, "max_excess_db");
    const double fin = s.num(i, "steady_excess_db");
    all_n = all_n && excess <= 2.0;
    steady = steady && std::abs(fin) <= 1.0;
    if (std::abs(mu - 0.25) < 1e-12) cvx_cross = static_cast<std::int64_t>(s.num(i, "crossing_n"));
    detail += fmt::format("mu_a {}: worst excess over best component {:.2f} dB, final vs slow {:+.2f} dB; ", mu, excess,
                          fin);
  }
  const bool earlier = cvx_cross >= 0 && (aff_cross < 0 || cvx_cross < aff_cross);
  detail += fmt::format("crossing of -45 dB at mu_a 0.25: cvx n={}, aff n={}", cvx_cross, aff_cross);
  return {all_n && steady && earlier, detail};
}

Verdict ac7() {
  const auto r = run_preset("pn-robustness");
  const auto& t = r.table("pn-robustness");
  double worst_pn = -1e9, best_lms_gap = -1e9;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double best = std::min(t.num(i, "nsd_1_db"), t.num(i, "nsd_2_db"));
    worst_pn = std::max(worst_pn, t.num(i, "nsd_cvx_pn_db") - best);
    if (std::abs(t.num(i, "snr_db") - 5.0) < 1e-12) best_lms_gap = std::max(best_lms_gap, t.num(i, "nsd_cvx_lms_db") - best);
  }
  return {worst_pn <= 1.0 && best_lms_gap >= 3.0,
          fmt::format("cvx-PN-LMS worst excess over best component {:.2f} dB; cvx-LMS largest excess at SNR 5 dB {:.2f} dB",
                      worst_pn, best_lms_gap)};
}

Verdict ac8() {
  const auto r = run_preset("transfer");
  const auto& s = r.table("transfer_summary");
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    if (s.str(i, "policy") != "copy") continue;
    const double ratio = s.num(i, "ratio_vs_none");
    return {ratio < 0.7, fmt::format("recovery with copy {} samples, ratio to none {:.3f}",
                                     static_cast<std::int64_t>(s.num(i, "recovery_samples")), ratio)};
  }
  return {false, "copy policy missing"};
}

Verdict ac9() {
  const auto r = run_preset("lowcost");
  const auto& c = r.table("lowcost_check");
  double steps = 0.0, dev = 1.0;
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    if (c.str(i, "metric") == "steps") steps = c.num(i, "value");
    if (c.str(i, "metric") == "max_e2_deviation") dev = c.num(i, "value");
  }
  const auto& t = r.table("lowcost");
  double degr = 1e9;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.num(i, "frac_bits") == 26.0) degr = t.num(i, "degradation_db");
  }
  return {steps >= 1e4 && dev < 1e-10 && degr <= 0.5,
          fmt::format("max |e2 deviation| {:.3g} over {} steps; degradation at 26 fractional bits {:.3f} dB", dev, steps,
                      degr)};
}

Verdict ac10() {
  const auto r = run_preset("sparse");
  const auto& s = r.table("sparse_summary");
  bool a_ok = true, b_ok = true;
  std::string detail;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const double act = s.num(i, "active");
    const double a = s.num(i, "msd_a_db");
    const double best = std::min(s.num(i, "msd_nlms_db"), s.num(i, "msd_za_db"));
    const double b = s.num(i, "msd_b256_db");
    a_ok = a_ok && a <= best + 1.0;
    if (act == 16.0 || act == 128.0) b_ok = b_ok && b < a;
    detail += fmt::format("{} active: A {:.2f}, best component {:.2f}, B(256) {:.2f} dB; ", act, a, best, b);
  }
  return {a_ok && b_ok && s.rows.size() == 3, detail};
}

Verdict ac11() {
  const auto r = run_preset("echo");
  const auto& s = r.table("echo_summary");
  bool ok = true, saw_linear = false, saw_nl = false;
  std::string detail;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const double lnlr = s.num(i, "lnlr_db");
    const double l2 = s.num(i, "lambda2_ck");
    const double ck = s.num(i, "erle_ck_db");
    const double other = std::max(s.num(i, "erle_lin_db"), s.num(i, "erle_vol_db"));
    ok = ok && ck >= other - 1.0;
    if (std::isinf(lnlr)) {
      saw_linear = true;
      ok = ok && l2 < 0.1;
    }
    if (lnlr <= 0.0) {
      saw_nl = true;
      ok = ok && l2 > 0.9;
    }
    detail += fmt::format("LNLR {}: lambda2 {:.3f}, ERLE ck {:.2f} vs {:.2f} dB; ", lnlr, l2, ck, other);
  }
  return {ok && saw_linear && saw_nl, detail};
}

Verdict ac12() {
  std::mt19937_64 g(99);
  std::normal_distribution<double> nd;
  std::vector<std::string> failed;

  // softmax weights stay a probability vector
  {
    SoftmaxMixerConfig cfg;
    cfg.step = 50.0;
    auto s = make_softmax_mixer(5, cfg);
    bool ok = true;
    std::vector<double> y(5);
    for (int n = 0; n < 20000; ++n) {
      for (auto& v : y) v = nd(g);
      softmax_adapt(s, y[2] + 0.1 * nd(g), y);
      ok = ok && std::abs(s.lambda.sum() - 1.0) < 1e-12 && s.lambda.minCoeff() >= 0.0 &&
           s.a.cwiseAbs().maxCoeff() <= cfg.a_plus;
    }
    if (!ok) failed.push_back("softmax");
  }
  // convex rules keep lambda in [0, 1] and |a| <= a+
  for (MixRule rule : {MixRule::cvx_lms, MixRule::cvx_pn_lms}) {
    MixerConfig mc;
    mc.rule = rule;
    mc.step = rule == MixRule::cvx_lms ? 1000.0 : 5.0;
    auto m = make_mixer(mc);
    bool ok = true;
    for (int n = 0; n < 50000; ++n) {
      const double y1 = nd(g), y2 = nd(g);
      mixer_step(m, (n % 2000 < 1000 ? y1 : y2) - combine_outputs(m.lambda, y1, y2), y1, y2);
      ok = ok && m.lambda >= 0.0 && m.lambda <= 1.0 && std::abs(m.a) <= m.a_plus;
    }
    if (!ok) failed.push_back(std::string(to_string(rule)) + " range");
  }
  // sigmoid / scaled sigmoid endpoints
  if (!(scaled_sigmoid(4.0, 4.0) == 1.0 && scaled_sigmoid(-4.0, 4.0) == 0.0 && scaled_sigmoid(0.0, 4.0) == 0.5 &&
        sigmoid(0.0) == 0.5 && std::abs(sigmoid(3.0) + sigmoid(-3.0) - 1.0) < 1e-15)) {
    failed.push_back("sigmoid endpoints");
  }
  // RLS inverse correlation stays symmetric
  {
    auto f = make_rls(10, 0.99);
    Vector u(10);
    double worst = 0.0;
    for (int n = 0; n < 100000; ++n) {
      for (auto& v : u) v = nd(g);
      adapt(f, u, nd(g));
      worst = std::max(worst, symmetry_residual(f));
    }
    if (worst > 1e-10) failed.push_back("RLS symmetry");
  }
  // zero-attracting NLMS with rho = 0 is NLMS
  {
    auto a = make_nlms(8, 0.5);
    auto b = make_za_nlms(8, 0.5, 0.0);
    Vector u(8);
    bool same = true;
    for (int n = 0; n < 5000; ++n) {
      for (auto& v : u) v = nd(g);
      const double d = nd(g);
      same = same && adapt(a, u, d).y == adapt(b, u, d).y;
    }
    if (!(same && a.w == b.w)) failed.push_back("ZA rho=0");
  }
  // byte-identical CSV for repeated seeds, whatever the thread count
  {
    const std::string text = "experiment = convergence\nruns = 8\nhorizon = 3000\nseed = 5\n";
    const auto a = run_experiment(Config::parse(text), {std::nullopt, std::nullopt, 1});
    const auto b = run_experiment(Config::parse(text), {std::nullopt, std::nullopt, 4});
    bool same = a.tables.size() == b.tables.size();
    for (std::size_t i = 0; same && i < a.tables.size(); ++i) same = to_csv(a.tables[i]) == to_csv(b.tables[i]);
    if (!same) failed.push_back("determinism");
  }
  std::string detail = "softmax, convex range, a-clamp, sigmoid endpoints, RLS symmetry, ZA rho=0, determinism";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Verdict()>> checks = {
      {1, ac1}, {2, ac2}, {3, ac3}, {4, ac4}, {5, ac5}, {6, ac6},
      {7, ac7}, {8, ac8}, {9, ac9}, {10, ac10}, {11, ac11}, {12, ac12},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [k, _] : checks) selected.insert(k);
  }
  int failures = 0;
  for (int k : selected) {
    const auto it = checks.find(k);
    if (it == checks.end()) {
      fmt::print("AC{} FAIL unknown criterion\n", k);
      ++failures;
      continue;
    }
    Verdict v;
    try {
      v = it->second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    fmt::print("AC{} {} {}\n", k, v.pass ? "PASS" : "FAIL", v.detail);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
