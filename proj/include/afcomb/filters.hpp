#pragma once

#include "afcomb/types.hpp"

#include <cstddef>
#include <string_view>

namespace afc {

inline constexpr double kDefaultNlmsEps = 1e-8;
inline constexpr double kDefaultRlsDelta = 1e-2;

enum class Algorithm { lms, nlms, rls, za_nlms };

std::string_view to_string(Algorithm alg);

struct StepResult {
  double y = 0.0;  // a priori output u'w(n)
  double e = 0.0;  // d - y
};

// State of one component filter. Every algorithm shares the (predict, adapt)
// contract so combination layers never need to know which one they hold.
struct FilterState {
  Algorithm algorithm = Algorithm::lms;
  Vector w;
  double mu = 0.0;          // lms / nlms / za_nlms
  double forgetting = 1.0;  // rls, 1 - beta
  double eps = 0.0;         // nlms / za_nlms regularizer
  double rho = 0.0;         // za_nlms zero attractor
  Matrix P;                 // rls inverse correlation

  std::size_t size() const { return static_cast<std::size_t>(w.size()); }
};

FilterState make_lms(std::size_t taps, double mu);
FilterState make_nlms(std::size_t taps, double mu, double eps = kDefaultNlmsEps);
// forgetting = 1 - beta, in (0, 1]; P(0) = I / delta.
FilterState make_rls(std::size_t taps, double forgetting, double delta = kDefaultRlsDelta);
FilterState make_za_nlms(std::size_t taps, double mu, double rho, double eps = kDefaultNlmsEps);

double predict(const FilterState& f, ConstVectorRef u);

StepResult lms_adapt(FilterState& f, ConstVectorRef u, double d);
StepResult nlms_adapt(FilterState& f, ConstVectorRef u, double d);
StepResult rls_adapt(FilterState& f, ConstVectorRef u, double d);
StepResult za_nlms_adapt(FilterState& f, ConstVectorRef u, double d);

// Dispatches on f.algorithm.
StepResult adapt(FilterState& f, ConstVectorRef u, double d);

// Largest |P - P'| entry; zero for non-RLS filters.
double symmetry_residual(const FilterState& f);

}  // namespace afc
