#include "afcomb/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace afc {

std::size_t quadratic_size(std::size_t n2) { return n2 * (n2 + 1) / 2; }

void quadratic_regressor(ConstVectorRef history, std::size_t n2, VectorRef out) {
  if (history.size() < static_cast<Eigen::Index>(n2)) throw DimensionError("history shorter than quadratic memory");
  if (out.size() != static_cast<Eigen::Index>(quadratic_size(n2))) throw DimensionError("quadratic regressor size");
  Eigen::Index k = 0;
  for (Eigen::Index i1 = 0; i1 < static_cast<Eigen::Index>(n2); ++i1) {
    for (Eigen::Index i2 = i1; i2 < static_cast<Eigen::Index>(n2); ++i2) out[k++] = history[i1] * history[i2];
  }
}

VolterraKernels make_volterra(std::size_t n1, std::size_t n2, double mu_linear, double mu_quadratic, double eps) {
  VolterraKernels k;
  k.linear = make_nlms(n1, mu_linear, eps);
  k.quadratic = make_nlms(quadratic_size(n2), mu_quadratic, eps);
  k.n2 = n2;
  return k;
}

namespace {

void check_history(ConstVectorRef history, std::size_t n1, std::size_t n2) {
  if (history.size() < static_cast<Eigen::Index>(std::max(n1, n2))) {
    throw DimensionError("input history shorter than the kernel memory");
  }
}

}  // namespace

VolterraOutput volterra_output(const VolterraKernels& k, ConstVectorRef history) {
  check_history(history, k.linear.size(), k.n2);
  VolterraOutput o;
  o.y1 = predict(k.linear, history.head(k.linear.w.size()));
  if (k.n2 > 0) {
    Vector q(static_cast<Eigen::Index>(quadratic_size(k.n2)));
    quadratic_regressor(history, k.n2, q);
    o.y2 = predict(k.quadratic, q);
  }
  o.y = o.y1 + o.y2;
  return o;
}

void nlms_correct(FilterState& f, ConstVectorRef u, double e) {
  if (u.size() != f.w.size()) throw DimensionError("nlms correction: regressor length mismatch");
  if (!std::isfinite(e)) throw DivergenceError("nlms correction: non-finite error");
  const double energy = f.eps + u.squaredNorm();
  if (energy == 0.0) return;
  f.w.noalias() += (f.mu * e / energy) * u;
}

void volterra_adapt(VolterraKernels& k, ConstVectorRef history, double e) {
  check_history(history, k.linear.size(), k.n2);
  nlms_correct(k.linear, history.head(k.linear.w.size()), e);
  if (k.n2 > 0) {
    Vector q(static_cast<Eigen::Index>(quadratic_size(k.n2)));
    quadratic_regressor(history, k.n2, q);
    nlms_correct(k.quadratic, q, e);
  }
}

CkEchoCanceller::CkEchoCanceller(const CkConfig& cfg)
    : cfg_(cfg),
      fast_(make_nlms(cfg.n1, cfg.mu_fast, cfg.eps)),
      slow_(make_nlms(cfg.n1, cfg.mu_slow, cfg.eps)),
      quad_(make_nlms(quadratic_size(cfg.n2), cfg.mu_quadratic, cfg.eps)),
      zero_(Vector::Zero(static_cast<Eigen::Index>(quadratic_size(cfg.n2)))),
      qreg_(static_cast<Eigen::Index>(quadratic_size(cfg.n2))),
      m1_(make_mixer(cfg.mixer)),
      m2_(make_mixer(cfg.mixer)) {
  if (cfg.n1 == 0 || cfg.n2 == 0) throw std::invalid_argument("kernel lengths must be >= 1");
  if (!is_convex(cfg.mixer.rule)) throw std::invalid_argument("kernel combination needs a convex mixing rule");
  if (cfg.mode == CkMode::linear_only) set_lambda(m2_, 0.0);
  if (cfg.mode == CkMode::full_volterra) set_lambda(m2_, 1.0);
}

CkStep CkEchoCanceller::step(ConstVectorRef history, double d) {
  check_history(history, cfg_.n1, cfg_.n2);
  const auto x1 = history.head(static_cast<Eigen::Index>(cfg_.n1));
  CkStep s;
  s.y_fast = x1.dot(fast_.w);
  s.y_slow = x1.dot(slow_.w);
  quadratic_regressor(history, cfg_.n2, qreg_);
  const bool quad_active = cfg_.mode != CkMode::linear_only;
  s.y_quadratic = quad_active ? qreg_.dot(quad_.w) : 0.0;
  s.lambda1 = m1_.lambda;
  s.lambda2 = m2_.lambda;

  const double y_linear = combine_outputs(s.lambda1, s.y_fast, s.y_slow);
  const double y_nonlinear = s.lambda2 * s.y_quadratic;  // the all-zeros kernel contributes (1 - lambda2) * 0
  s.y = y_linear + y_nonlinear;
  s.e = d - s.y;
  if (!std::isfinite(s.e)) throw DivergenceError("combination of kernels: non-finite error");

  nlms_correct(fast_, x1, d - s.y_fast - y_nonlinear);
  nlms_correct(slow_, x1, d - s.y_slow - y_nonlinear);
  if (quad_active) nlms_correct(quad_, qreg_, d - s.y_quadratic - y_linear);

  mixer_step(m1_, s.e, s.y_fast, s.y_slow);
  if (cfg_.mode == CkMode::combination) mixer_step(m2_, s.e, s.y_quadratic, 0.0);
  return s;
}

std::int64_t EchoScenario::horizon() const {
  std::int64_t n = 0;
  for (const auto& s : segments) n += s.length;
  return n;
}

void validate(const EchoScenario& sc) {
  if (sc.rir_length == 0) throw std::invalid_argument("room response length must be >= 1");
  if (!(sc.rir_decay > 0.0)) throw std::invalid_argument("room response decay must be > 0");
  if (sc.memory == 0 || sc.memory > sc.rir_length) throw std::invalid_argument("nonlinear memory must lie in [1, rir_length]");
  if (!(std::abs(sc.input_pole) < 1.0)) throw std::invalid_argument("input pole must satisfy |a| < 1");
  if (sc.segments.empty()) throw std::invalid_argument("echo scenario needs at least one segment");
  for (const auto& s : sc.segments) {
    if (s.length < 2) throw std::invalid_argument("segment length must be >= 2");
    if (std::isnan(s.lnlr_db)) throw std::invalid_argument("LNLR must be a number or inf");
  }
}

Vector draw_rir(std::size_t length, double decay, Rng& rng) {
  Vector h(static_cast<Eigen::Index>(length));
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    h[i] = std::exp(-static_cast<double>(i) / decay) * draw_unit(Distribution::gaussian, rng);
  }
  return h / h.norm();
}

EchoSignals simulate_echo(const EchoScenario& sc, std::uint64_t seed) {
  validate(sc);
  Rng input_rng(mix_seed(seed, 1));
  Rng noise_rng(mix_seed(seed, 2));
  Rng path_rng(mix_seed(seed, 3));

  const auto total = static_cast<std::size_t>(sc.horizon());
  const std::size_t L = sc.rir_length;
  EchoSignals out;
  // Leading L-1 samples of input history so the echo is stationary from n = 0.
  std::vector<double> x(total + L - 1);
  const double a = sc.input_pole;
  double state = draw_unit(sc.input_dist, input_rng);
  const double drive = std::sqrt(1.0 - a * a);
  for (double& v : x) {
    v = state;
    state = a * state + drive * draw_unit(sc.input_dist, input_rng);
  }

  Vector h = draw_rir(L, sc.rir_decay, path_rng);
  out.echo.resize(total);
  out.e0.resize(total);
  out.d.resize(total);
  std::size_t start = 0;
  for (const auto& seg : sc.segments) {
    if (seg.new_rir && start > 0) h = draw_rir(L, sc.rir_decay, path_rng);
    const auto len = static_cast<std::size_t>(seg.length);
    std::vector<double> lin(len), nl(len);
    double p_lin = 0.0;
    double p_nl = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t n = start + i + L - 1;  // index of x(n) in the padded buffer
      double yl = 0.0;
      double yn = 0.0;
      for (std::size_t k = 0; k < L; ++k) yl += h[static_cast<Eigen::Index>(k)] * x[n - k];
      for (std::size_t k = 0; k < sc.memory; ++k) yn += h[static_cast<Eigen::Index>(k)] * x[n - k] * x[n - k];
      lin[i] = yl;
      nl[i] = yn;
      p_lin += yl * yl;
      p_nl += yn * yn;
    }
    const double c = std::isinf(seg.lnlr_db) && seg.lnlr_db > 0 ? 0.0 : std::sqrt(p_lin / (p_nl * from_db(seg.lnlr_db)));
    const double noise_sd = std::sqrt(p_lin / static_cast<double>(len) / from_db(sc.enr_db));
    for (std::size_t i = 0; i < len; ++i) {
      out.echo[start + i] = lin[i] + c * nl[i];
      out.e0[start + i] = noise_sd * draw_unit(Distribution::gaussian, noise_rng);
      out.d[start + i] = out.echo[start + i] + out.e0[start + i];
    }
    out.segment_start.push_back(static_cast<std::int64_t>(start));
    out.gain.push_back(c);
    start += len;
  }
  out.x = std::move(x);
  out.preroll = L - 1;
  return out;
}

}  // namespace afc
