#pragma once

#include "afcomb/types.hpp"

#include <optional>
#include <string_view>

namespace afc {

inline constexpr double kDefaultAPlus = 4.0;
inline constexpr double kDefaultEta = 0.9;
inline constexpr double kDefaultMixerEps = 1e-8;

enum class MixRule { aff_lms, aff_pn_lms, cvx_lms, cvx_pn_lms };
enum class Activation { sigmoid, scaled_sigmoid };

std::string_view to_string(MixRule rule);
std::string_view to_string(Activation act);
MixRule parse_mix_rule(std::string_view name);

inline bool is_convex(MixRule r) { return r == MixRule::cvx_lms || r == MixRule::cvx_pn_lms; }
inline bool is_power_normalized(MixRule r) { return r == MixRule::aff_pn_lms || r == MixRule::cvx_pn_lms; }

struct MixerConfig {
  MixRule rule = MixRule::cvx_pn_lms;
  // Unset: plain sigmoid for cvx-LMS, scaled sigmoid for cvx-PN-LMS.
  std::optional<Activation> activation;
  double step = 0.5;  // mu_a (convex) or mu_lambda (affine)
  double eta = kDefaultEta;
  double eps = kDefaultMixerEps;
  double a_plus = kDefaultAPlus;
};

// Second-layer "length one" adaptive filter that learns the mixing parameter.
struct MixerState {
  double lambda = 0.5;
  double a = 0.0;  // auxiliary parameter, convex rules only
  double p = 0.0;  // low-pass power of y1 - y2
  MixRule rule = MixRule::cvx_pn_lms;
  Activation activation = Activation::scaled_sigmoid;
  double step = 0.5;
  double eta = kDefaultEta;
  double eps = kDefaultMixerEps;
  double a_plus = kDefaultAPlus;
};

MixerState make_mixer(const MixerConfig& cfg);

// lambda*y1 + (1 - lambda)*y2, evaluated as y2 + lambda*(y1 - y2) so that equal
// inputs pass through unchanged.
inline double combine_outputs(double lambda, double y1, double y2) { return y2 + lambda * (y1 - y2); }

// Weight-space mixing. The shorter vector is zero-extended.
Vector combine_weights(double lambda, ConstVectorRef w1, ConstVectorRef w2);

double sigmoid(double a);
// Shifted/scaled sigmoid reaching exactly 0 and 1 at -a_plus and a_plus.
// Throws if |a| > a_plus.
double scaled_sigmoid(double a, double a_plus);

double update_power(double p, double y1, double y2, double eta);

double activation_value(const MixerState& m, double a);

void aff_step(MixerState& m, double e, double y1, double y2);
void cvx_step(MixerState& m, double e, double y1, double y2);
// Dispatches on m.rule.
void mixer_step(MixerState& m, double e, double y1, double y2);

// Pins a mixer to a fixed lambda (convex rules: a is set to the matching value).
void set_lambda(MixerState& m, double lambda);

}  // namespace afc
