// Sparse identification and nonlinear echo cancellation experiments.

#include "afcomb/ensemble.hpp"
#include "afcomb/scenario.hpp"
#include "afcomb/sparse.hpp"
#include "afcomb/volterra.hpp"
#include "exp_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace afc::detail {

namespace {

struct SparseSetup {
  std::vector<std::size_t> blocks;
  MixerConfig scheme_a;
  MixerConfig scheme_b;
  double mu = 0.5;
  double rho = 0.0;
  double eps = 1e-8;
};

// NLMS and ZA-NLMS components, their combination (scheme A) and block-wise
// shrinkage of an NLMS filter for each block count (scheme B).
class SparseGraph : public FilterGraph {
 public:
  SparseGraph(std::size_t taps, const SparseSetup& cfg)
      : combo_(make_za_combination(taps, cfg.mu, cfg.rho, cfg.scheme_a, cfg.eps)) {
    columns_ = {"msd_nlms", "msd_za", "msd_a", "lambda_a"};
    for (auto q : cfg.blocks) {
      schemes_.emplace_back(make_nlms(taps, cfg.mu, cfg.eps), BlockShrinkConfig{q, cfg.scheme_b, false});
      columns_.push_back("msd_b" + std::to_string(q));
      columns_.push_back("lambda_b" + std::to_string(q));
    }
  }
  const std::vector<std::string>& columns() const override { return columns_; }
  void step(const Sample& s, std::span<double> row, bool record) override {
    combo_.step(s.u(), s.d);
    for (auto& b : schemes_) b.step(s.u(), s.d);
    if (!record) return;
    const Vector& wo = *s.w_o;
    row[0] = (combo_.filter1().w - wo).squaredNorm();
    row[1] = (combo_.filter2().w - wo).squaredNorm();
    row[2] = (combo_.combined_weights() - wo).squaredNorm();
    row[3] = combo_.mixer().lambda;
    for (std::size_t i = 0; i < schemes_.size(); ++i) {
      row[4 + 2 * i] = (schemes_[i].effective_weights() - wo).squaredNorm();
      double mean = 0.0;
      for (std::size_t q = 0; q < schemes_[i].blocks(); ++q) mean += schemes_[i].mixer(q).lambda;
      row[5 + 2 * i] = mean / static_cast<double>(schemes_[i].blocks());
    }
  }

 private:
  TwoFilterCombination combo_;
  std::vector<BlockShrinkFilter> schemes_;
  std::vector<std::string> columns_;
};

// Mean of a recorded series over records with n in [lo, hi).
double record_mean(const EnsembleMetrics& m, const std::string& column, std::int64_t lo, std::int64_t hi) {
  const auto x = m.series(column);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < m.record_n.size(); ++i) {
    if (m.record_n[i] >= lo && m.record_n[i] < hi) {
      sum += x[static_cast<Eigen::Index>(i)];
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

ExperimentResult run_sparse(const Params& p, const RunOptions& opts) {
  const auto taps = static_cast<std::size_t>(p.integer("taps"));
  const auto active = p.integers("segment_active");
  const std::int64_t len = p.integer("segment_length");
  if (active.empty()) throw ConfigError("segment_active needs at least one entry");
  for (auto a : active) {
    if (a < 1 || static_cast<std::size_t>(a) > taps) throw ConfigError("segment_active entries must lie in [1, taps]");
  }
  Scenario sc;
  sc.input = white_input(taps, p.real("input_var"));
  sc.plant = PlantDraw{PlantInit::sparse, {}, static_cast<std::size_t>(active[0])};
  for (std::size_t k = 1; k < active.size(); ++k) {
    sc.changes.push_back({static_cast<std::int64_t>(k) * len, PlantDraw{PlantInit::sparse, {}, static_cast<std::size_t>(active[k])}});
  }
  sc.snr_db = p.real("snr_db");

  SparseSetup cfg;
  for (auto q : p.integers("blocks")) {
    if (q < 1 || static_cast<std::size_t>(q) > taps) throw ConfigError("blocks entries must lie in [1, taps]");
    cfg.blocks.push_back(static_cast<std::size_t>(q));
  }
  cfg.scheme_a = mixer_from(p);
  cfg.scheme_b = MixerConfig{MixRule::cvx_pn_lms, Activation::scaled_sigmoid, p.real("mu_b"), p.real("eta"),
                             p.real("mixer_eps"), p.real("a_plus")};
  cfg.mu = p.real("mu");
  cfg.rho = p.real("rho");
  cfg.eps = p.real("nlms_eps");
  const std::int64_t horizon = len * static_cast<std::int64_t>(active.size());
  const auto m = run_ensemble(
      sc, [&](std::uint64_t) { return std::make_unique<SparseGraph>(taps, cfg); },
      ensemble_from(p, opts, horizon, p.integer("record_stride"), -1));

  Table t{"sparse", {"n", "msd_nlms_db", "msd_za_db", "msd_a_db", "lambda_a"}, {}};
  for (auto q : cfg.blocks) {
    t.header.push_back("msd_b" + std::to_string(q) + "_db");
    t.header.push_back("lambda_b" + std::to_string(q));
  }
  for (std::size_t i = 0; i < m.record_n.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<Cell> row{m.record_n[i], db(m.series("msd_nlms")[r]), db(m.series("msd_za")[r]),
                          db(m.series("msd_a")[r]), m.series("lambda_a")[r]};
    for (auto q : cfg.blocks) {
      row.emplace_back(db(m.series("msd_b" + std::to_string(q))[r]));
      row.emplace_back(m.series("lambda_b" + std::to_string(q))[r]);
    }
    t.add(std::move(row));
  }

  Table s{"sparse_summary", {"segment", "active", "msd_nlms_db", "msd_za_db", "msd_a_db"}, {}};
  for (auto q : cfg.blocks) s.header.push_back("msd_b" + std::to_string(q) + "_db");
  const double tail = p.real("tail_fraction");
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::int64_t hi = static_cast<std::int64_t>(k + 1) * len;
    const std::int64_t lo = hi - std::max<std::int64_t>(1, static_cast<std::int64_t>(tail * static_cast<double>(len)));
    std::vector<Cell> row{static_cast<std::int64_t>(k), active[k], db(record_mean(m, "msd_nlms", lo, hi)),
                          db(record_mean(m, "msd_za", lo, hi)), db(record_mean(m, "msd_a", lo, hi))};
    for (auto q : cfg.blocks) row.emplace_back(db(record_mean(m, "msd_b" + std::to_string(q), lo, hi)));
    s.add(std::move(row));
  }
  ExperimentResult res;
  res.tables.push_back(std::move(t));
  res.tables.push_back(std::move(s));
  return res;
}

// ---- echo -----------------------------------------------------------------

const char* const kSchemes[] = {"ck", "lin", "vol"};

class EchoTrial : public Trial {
 public:
  EchoTrial(const EchoScenario& sc, const CkConfig& ck, std::uint64_t seed)
      : sig_(simulate_echo(sc, seed)), hist_(std::max(ck.n1, ck.n2)) {
    for (std::size_t i = 0; i < sig_.preroll; ++i) hist_.push(sig_.x[i]);
    for (CkMode mode : {CkMode::combination, CkMode::linear_only, CkMode::full_volterra}) {
      CkConfig c = ck;
      c.mode = mode;
      cancellers_.emplace_back(c);
    }
    columns_.push_back("echo2");
    for (const char* s : kSchemes) columns_.push_back(std::string("res2_") + s);
    columns_.insert(columns_.end(), {"lambda1_ck", "lambda2_ck", "lambda1_lin", "lambda1_vol"});
  }
  const std::vector<std::string>& columns() const override { return columns_; }
  void step(std::int64_t n, std::span<double> row, bool record) override {
    const auto i = static_cast<std::size_t>(n);
    hist_.push(sig_.x[i + sig_.preroll]);
    CkStep r[3];
    for (std::size_t k = 0; k < 3; ++k) {
      r[k] = cancellers_[k].step(hist_.view(), sig_.d[i]);
      if (!std::isfinite(r[k].e)) throw DivergenceError("echo canceller: non-finite error");
    }
    if (!record) return;
    row[0] = sig_.echo[i] * sig_.echo[i];
    for (std::size_t k = 0; k < 3; ++k) {
      const double res = r[k].e - sig_.e0[i];
      row[1 + k] = res * res;
    }
    row[4] = r[0].lambda1;
    row[5] = r[0].lambda2;
    row[6] = r[1].lambda1;
    row[7] = r[2].lambda1;
  }

 private:
  EchoSignals sig_;
  DelayLine hist_;
  std::vector<CkEchoCanceller> cancellers_;
  std::vector<std::string> columns_;
};

ExperimentResult run_echo(const Params& p, const RunOptions& opts) {
  EchoScenario sc;
  sc.rir_length = static_cast<std::size_t>(p.integer("rir_length"));
  sc.rir_decay = p.real("rir_decay");
  sc.memory = static_cast<std::size_t>(p.integer("memory"));
  sc.input_pole = p.real("input_pole");
  sc.input_dist = parse_distribution(p.text("input_dist"));
  sc.enr_db = p.real("enr_db");
  const auto lnlr = p.reals("segment_lnlr");
  const auto fresh = p.integers("segment_new_rir");
  if (lnlr.empty()) throw ConfigError("segment_lnlr needs at least one entry");
  if (!fresh.empty() && fresh.size() != lnlr.size()) {
    throw ConfigError("segment_new_rir must be empty or match segment_lnlr in length");
  }
  const std::int64_t len = p.integer("segment_length");
  for (std::size_t k = 0; k < lnlr.size(); ++k) {
    sc.segments.push_back({len, lnlr[k], !fresh.empty() && fresh[k] != 0});
  }
  validate(sc);

  CkConfig ck;
  ck.n1 = static_cast<std::size_t>(p.integer("n1"));
  ck.n2 = static_cast<std::size_t>(p.integer("n2"));
  ck.mu_fast = p.real("mu_fast");
  ck.mu_slow = p.real("mu_slow");
  ck.mu_quadratic = p.real("mu_quadratic");
  ck.eps = p.real("kernel_eps");
  ck.mixer = mixer_from(p);

  const std::int64_t stride = p.integer("record_stride");
  const auto m = run_trials([&](std::uint64_t seed) { return std::make_unique<EchoTrial>(sc, ck, seed); },
                            ensemble_from(p, opts, sc.horizon(), stride, -1));

  const auto window = static_cast<std::size_t>(std::max<std::int64_t>(1, p.integer("erle_window") / stride));
  auto as_vec = [&](const std::string& c) {
    const auto s = m.series(c);
    return std::vector<double>(s.data(), s.data() + s.size());
  };
  const auto echo = moving_average(as_vec("echo2"), window);
  std::vector<std::vector<double>> res;
  for (const char* s : kSchemes) res.push_back(moving_average(as_vec(std::string("res2_") + s), window));

  Table t{"echo", {"n", "erle_ck_db", "erle_lin_db", "erle_vol_db", "lambda1_ck", "lambda2_ck", "lambda1_lin",
                   "lambda1_vol"}, {}};
  for (std::size_t i = 0; i < m.record_n.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<Cell> row{m.record_n[i]};
    for (std::size_t k = 0; k < 3; ++k) row.emplace_back(db(echo[i] / res[k][i]));
    for (const char* c : {"lambda1_ck", "lambda2_ck", "lambda1_lin", "lambda1_vol"}) row.emplace_back(m.series(c)[r]);
    t.add(std::move(row));
  }

  Table s{"echo_summary", {"segment", "lnlr_db", "new_rir", "erle_ck_db", "erle_lin_db", "erle_vol_db",
                           "lambda1_ck", "lambda2_ck"}, {}};
  const double tail = p.real("tail_fraction");
  for (std::size_t k = 0; k < sc.segments.size(); ++k) {
    const std::int64_t hi = static_cast<std::int64_t>(k + 1) * len;
    const std::int64_t lo = hi - std::max<std::int64_t>(1, static_cast<std::int64_t>(tail * static_cast<double>(len)));
    const double e = record_mean(m, "echo2", lo, hi);
    std::vector<Cell> row{static_cast<std::int64_t>(k), lnlr[k], static_cast<std::int64_t>(sc.segments[k].new_rir)};
    for (const char* c : kSchemes) row.emplace_back(db(e / record_mean(m, std::string("res2_") + c, lo, hi)));
    row.emplace_back(record_mean(m, "lambda1_ck", lo, hi));
    row.emplace_back(record_mean(m, "lambda2_ck", lo, hi));
    s.add(std::move(row));
  }
  ExperimentResult out;
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(s));
  return out;
}

}  // namespace

ExperimentDef sparse_def() {
  ExperimentDef d;
  d.id = "sparse";
  d.summary = "NLMS/ZA-NLMS combination and block-wise shrinkage on plants of decreasing sparsity";
  d.keys = {
      integer("taps", "1024").ge(1).sym("M"),
      real("input_var", "1").gt(0).sym("σ_u²"),
      real("snr_db", "20").sym("SNR"),
      integers("segment_active", "16,128,512").ge(1),
      integer("segment_length", "40000").ge(10),
      real("mu", "0.5").gt(0).lt(2).sym("μ"),
      real("rho", "1e-6").ge(0).sym("ρ"),
      real("nlms_eps", "1e-8").ge(0).sym("ε"),
      integers("blocks", "128,256").ge(1).sym("Q"),
      real("mu_b", "0.02").gt(0).sym("μ_a").help("step of the shrinkage mixers"),
      integer("record_stride", "100").ge(1),
      real("tail_fraction", "0.25").gt(0).le(1),
  };
  append(d.keys, mixer_keys("cvx-pn-lms", "0.5"));
  d.run = run_sparse;
  return d;
}

ExperimentDef echo_def() {
  ExperimentDef d;
  d.id = "echo";
  d.summary = "combination-of-kernels echo canceller over segments of varying nonlinearity";
  d.keys = {
      integer("rir_length", "64").ge(1),
      real("rir_decay", "8").gt(0),
      integer("memory", "8").ge(1),
      real("input_pole", "0.5").gt(-1).lt(1),
      text("input_dist", "laplacian").one_of({"gaussian", "laplacian"}),
      real("enr_db", "40").help("linear echo to background noise"),
      reals("segment_lnlr", "inf,10,10,0").help("linear-to-nonlinear echo ratio per segment (dB)"),
      integers("segment_new_rir", "0,0,1,0").ge(0).le(1),
      integer("segment_length", "20000").ge(10),
      integer("n1", "64").ge(1).sym("N₁"),
      integer("n2", "8").ge(1).sym("N₂"),
      real("mu_fast", "0.5").gt(0).lt(2).sym("μ"),
      real("mu_slow", "0.05").gt(0).lt(2).sym("μ"),
      real("mu_quadratic", "0.1").gt(0).lt(2).sym("μ"),
      real("kernel_eps", "1e-6").gt(0).sym("ε"),
      integer("record_stride", "10").ge(1),
      integer("erle_window", "1000").ge(1),
      real("tail_fraction", "0.5").gt(0).le(1),
  };
  append(d.keys, mixer_keys("cvx-pn-lms", "0.5"));
  d.run = run_echo;
  return d;
}

}  // namespace afc::detail
