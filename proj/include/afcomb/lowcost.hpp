#pragma once

#include "afcomb/combo2.hpp"
#include "afcomb/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>

namespace afc {

// Uniform round-to-nearest grid with step 2^-frac_bits, saturating at +-range.
struct Quantizer {
  int frac_bits = 16;
  double range = 1.0;

  double step() const;
  // Returns the quantized value; counts a saturation when |x| exceeds range.
  double operator()(double x, std::size_t* saturations = nullptr) const;
};

Vector quantize(ConstVectorRef x, int frac_bits, double range = 1.0, std::size_t* saturations = nullptr);

struct DifferenceComboConfig {
  double mu1 = 0.5;
  double mu2 = 0.01;
  // Normalize both updates by eps + |u|^2 (NLMS pair); plain LMS pair otherwise.
  bool normalized = false;
  double eps = 1e-8;
  // Unset: difference weights kept at full precision.
  std::optional<int> frac_bits;
  double range = 1.0;
  MixerConfig mixer;
};

struct DiffStep {
  double e1 = 0.0;
  double e2 = 0.0;
  double e = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
  double lambda = 0.0;
};

// Two-filter combination that stores only w1 and the reduced-wordlength
// difference dw2 = w2 - w1. The slow filter is implied as w1 + dw2.
class DifferenceCombination {
 public:
  DifferenceCombination(std::size_t taps, const DifferenceComboConfig& cfg);

  DiffStep step(ConstVectorRef u, double d);

  const Vector& fast_weights() const { return w1_; }
  const Vector& difference_weights() const { return dw2_; }
  Vector slow_weights() const { return w1_ + dw2_; }
  const MixerState& mixer() const { return mixer_; }
  std::size_t saturation_events() const { return saturations_; }

 private:
  DifferenceComboConfig cfg_;
  std::optional<Quantizer> quantizer_;
  Vector w1_;
  Vector dw2_;
  MixerState mixer_;
  std::size_t saturations_ = 0;
};

// Per-sample multiply counts of the difference scheme.
struct DifferenceCost {
  std::size_t full_width = 0;
  std::size_t reduced_width = 0;  // difference-filter output and update: 2M
};

DifferenceCost difference_cost(std::size_t taps);

}  // namespace afc
