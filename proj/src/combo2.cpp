#include "afcomb/combo2.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace afc {

std::string_view to_string(MixRule rule) {
  switch (rule) {
    case MixRule::aff_lms: return "aff-lms";
    case MixRule::aff_pn_lms: return "aff-pn-lms";
    case MixRule::cvx_lms: return "cvx-lms";
    case MixRule::cvx_pn_lms: return "cvx-pn-lms";
  }
  return "?";
}

std::string_view to_string(Activation act) {
  return act == Activation::sigmoid ? "sigmoid" : "scaled-sigmoid";
}

MixRule parse_mix_rule(std::string_view name) {
  for (MixRule r : {MixRule::aff_lms, MixRule::aff_pn_lms, MixRule::cvx_lms, MixRule::cvx_pn_lms}) {
    if (to_string(r) == name) return r;
  }
  throw std::invalid_argument("unknown mixing rule '" + std::string(name) + "'");
}

MixerState make_mixer(const MixerConfig& cfg) {
  if (!(cfg.step > 0.0)) throw std::invalid_argument("mixer step size must be > 0");
  if (!(cfg.eta >= 0.0 && cfg.eta < 1.0)) throw std::invalid_argument("eta must lie in [0, 1)");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("mixer eps must be > 0");
  if (!(cfg.a_plus > 0.0)) throw std::invalid_argument("a+ must be > 0");
  MixerState m;
  m.rule = cfg.rule;
  m.activation = cfg.activation.value_or(cfg.rule == MixRule::cvx_lms ? Activation::sigmoid
                                                                     : Activation::scaled_sigmoid);
  m.step = cfg.step;
  m.eta = cfg.eta;
  m.eps = cfg.eps;
  m.a_plus = cfg.a_plus;
  m.a = 0.0;
  m.p = 0.0;
  m.lambda = is_convex(m.rule) ? activation_value(m, 0.0) : 0.5;
  return m;
}

Vector combine_weights(double lambda, ConstVectorRef w1, ConstVectorRef w2) {
  const Eigen::Index n = std::max(w1.size(), w2.size());
  Vector a = Vector::Zero(n);
  Vector b = Vector::Zero(n);
  a.head(w1.size()) = w1;
  b.head(w2.size()) = w2;
  return b + lambda * (a - b);
}

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

double scaled_sigmoid(double a, double a_plus) {
  if (std::abs(a) > a_plus) throw std::domain_error("scaled_sigmoid: a outside [-a+, a+]");
  const double lo = sigmoid(-a_plus);
  const double hi = sigmoid(a_plus);
  return (sigmoid(a) - lo) / (hi - lo);
}

double update_power(double p, double y1, double y2, double eta) {
  const double diff = y1 - y2;
  return eta * p + (1.0 - eta) * (diff * diff);
}

double activation_value(const MixerState& m, double a) {
  return m.activation == Activation::sigmoid ? sigmoid(a) : scaled_sigmoid(a, m.a_plus);
}

void aff_step(MixerState& m, double e, double y1, double y2) {
  const double diff = y1 - y2;
  switch (m.rule) {
    case MixRule::aff_lms:
      m.lambda += m.step * e * diff;
      break;
    case MixRule::aff_pn_lms:
      m.p = update_power(m.p, y1, y2, m.eta);
      m.lambda += (m.step / (m.eps + m.p)) * e * diff;
      break;
    default:
      throw std::logic_error("aff_step called on a convex mixer");
  }
  if (!std::isfinite(m.lambda)) throw DivergenceError("affine mixing parameter diverged");
}

void cvx_step(MixerState& m, double e, double y1, double y2) {
  double norm = 1.0;
  switch (m.rule) {
    case MixRule::cvx_lms:
      break;
    case MixRule::cvx_pn_lms:
      m.p = update_power(m.p, y1, y2, m.eta);
      norm = m.eps + m.p;
      break;
    default:
      throw std::logic_error("cvx_step called on an affine mixer");
  }
  double gain;
  if (m.activation == Activation::sigmoid) {
    gain = m.lambda * (1.0 - m.lambda);
  } else {
    const double s = sigmoid(m.a);
    gain = s * (1.0 - s);
  }
  const double a = m.a + (m.step / norm) * gain * e * (y1 - y2);
  if (std::isnan(a)) throw DivergenceError("convex auxiliary parameter is NaN");
  m.a = std::clamp(a, -m.a_plus, m.a_plus);
  m.lambda = activation_value(m, m.a);
}

void mixer_step(MixerState& m, double e, double y1, double y2) {
  if (is_convex(m.rule)) {
    cvx_step(m, e, y1, y2);
  } else {
    aff_step(m, e, y1, y2);
  }
}

void set_lambda(MixerState& m, double lambda) {
  if (!is_convex(m.rule)) {
    m.lambda = lambda;
    return;
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("convex lambda must lie in [0, 1]");
  const double lo = sigmoid(-m.a_plus);
  const double hi = sigmoid(m.a_plus);
  double a;
  if (m.activation == Activation::scaled_sigmoid && (lambda == 0.0 || lambda == 1.0)) {
    a = lambda == 1.0 ? m.a_plus : -m.a_plus;
  } else {
    const double s = m.activation == Activation::sigmoid ? std::clamp(lambda, lo, hi)
                                                         : lo + lambda * (hi - lo);
    a = std::log(s / (1.0 - s));
  }
  m.a = std::clamp(a, -m.a_plus, m.a_plus);
  m.lambda = activation_value(m, m.a);
}

}  // namespace afc
