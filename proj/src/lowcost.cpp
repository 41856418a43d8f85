#include "afcomb/lowcost.hpp"

#include <cmath>

namespace afc {

double Quantizer::step() const { return std::ldexp(1.0, -frac_bits); }

double Quantizer::operator()(double x, std::size_t* saturations) const {
  const double s = step();
  const double top = std::floor(range / s) * s;
  if (x > top || x < -top) {
    if (std::abs(x) > range && saturations != nullptr) ++*saturations;
    if (x > top) return top;
    if (x < -top) return -top;
  }
  return std::round(x / s) * s;
}

Vector quantize(ConstVectorRef x, int frac_bits, double range, std::size_t* saturations) {
  if (frac_bits <= 0) throw std::invalid_argument("quantizer needs a positive number of fractional bits");
  if (!(range > 0.0)) throw std::invalid_argument("quantizer range must be > 0");
  const Quantizer q{frac_bits, range};
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = q(x[i], saturations);
  return out;
}

DifferenceCombination::DifferenceCombination(std::size_t taps, const DifferenceComboConfig& cfg)
    : cfg_(cfg),
      w1_(Vector::Zero(static_cast<Eigen::Index>(taps))),
      dw2_(Vector::Zero(static_cast<Eigen::Index>(taps))),
      mixer_(make_mixer(cfg.mixer)) {
  if (!(cfg.mu1 > 0.0 && cfg.mu2 > 0.0)) throw std::invalid_argument("step sizes must be > 0");
  if (cfg.frac_bits) {
    if (*cfg.frac_bits <= 0) throw std::invalid_argument("frac_bits must be > 0");
    if (!(cfg.range > 0.0)) throw std::invalid_argument("quantizer range must be > 0");
    quantizer_ = Quantizer{*cfg.frac_bits, cfg.range};
  }
}

DiffStep DifferenceCombination::step(ConstVectorRef u, double d) {
  if (u.size() != w1_.size()) throw DimensionError("difference combination: regressor length mismatch");
  DiffStep s;
  s.lambda = mixer_.lambda;
  const double norm = cfg_.normalized ? 1.0 / (cfg_.eps + u.squaredNorm()) : 1.0;

  // 1-2: full-width fast filter.
  s.e1 = d - u.dot(w1_);
  if (!std::isfinite(s.e1)) throw DivergenceError("difference combination: non-finite error");
  w1_.noalias() += (cfg_.mu1 * s.e1 * norm) * u;

  // 3-4: difference filter output. With dw2 = w2 - w1, y2 = y1 + dy2.
  const double dy2 = u.dot(dw2_);
  s.e2 = s.e1 - dy2;

  // 5: combined error.
  s.e = s.lambda * s.e1 + (1.0 - s.lambda) * s.e2;

  // 6: difference update, w2(n+1) = w2(n) + mu2 e2 u.
  const double e_delta = (cfg_.mu2 * s.e2 - cfg_.mu1 * s.e1) * norm;
  dw2_.noalias() += e_delta * u;
  if (quantizer_) {
    for (Eigen::Index i = 0; i < dw2_.size(); ++i) dw2_[i] = (*quantizer_)(dw2_[i], &saturations_);
  }

  s.y1 = d - s.e1;
  s.y2 = d - s.e2;
  mixer_step(mixer_, s.e, s.y1, s.y2);
  return s;
}

DifferenceCost difference_cost(std::size_t taps) {
  // Full: fast output (M), fast update (M + 1), combined error (2), e_delta scalars (2).
  return DifferenceCost{2 * taps + 5, 2 * taps};
}

}  // namespace afc
