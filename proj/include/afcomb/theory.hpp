#pragma once

#include "afcomb/types.hpp"

#include <optional>
#include <string_view>

namespace afc {

// Steady-state tracking setup: noise variance, input covariance R and
// random-walk increment covariance Q.
struct TrackingSpec {
  double noise_var = 0.0;
  Matrix R;
  Matrix Q;

  std::size_t taps() const { return static_cast<std::size_t>(R.rows()); }
};

// Throws std::invalid_argument when R / Q are not square, same size and symmetric.
void validate(const TrackingSpec& spec);

double lms_emse(double mu, const TrackingSpec& spec);
double rls_emse(double beta, const TrackingSpec& spec);

struct OptimalParams {
  double mu = 0.0;
  double beta = 0.0;
  double zeta_lms = 0.0;
  double zeta_rls = 0.0;
};

// Throws std::domain_error when Tr{Q} = 0 (stationary plant, no finite optimum).
OptimalParams optimal_params(const TrackingSpec& spec);

enum class Family { lms, rls };

// One component of a pair: an LMS step size mu or an RLS beta (forgetting 1 - beta).
struct Component {
  Family family = Family::lms;
  double param = 0.0;
};

double steady_emse(const Component& c, const TrackingSpec& spec);
double cross_emse(const Component& a, const Component& b, const TrackingSpec& spec);

// dzeta_i = zeta_i - zeta_12.
struct Deltas {
  double d1 = 0.0;
  double d2 = 0.0;
};

// Deltas of a pair. Same-family pairs use a closed form proportional to the
// parameter gap, so nearly identical filters do not lose precision.
Deltas pair_deltas(const Component& a, const Component& b, const TrackingSpec& spec);

enum class CombMode { affine, convex };
enum class Regime { case1, case2, case3, case4 };

std::string_view to_string(CombMode mode);
std::string_view to_string(Regime regime);

// EMSE of lambda*e_a1 + (1-lambda)*e_a2.
double combination_emse(double lambda, double z1, double z2, double z12);

// Throws std::invalid_argument if z1, z2 <= 0 or z12^2 > z1*z2.
void check_cauchy_schwarz(double z1, double z2, double z12);

bool is_indeterminate(double z1, double z2, const Deltas& d);

// Empty when the two errors are indistinguishable (every lambda is optimal).
std::optional<double> optimal_lambda(double z1, double z2, double z12, CombMode mode);
std::optional<double> optimal_lambda(double z1, double z2, const Deltas& d, CombMode mode);

double optimal_emse(double z1, double z2, double z12, CombMode mode);
double optimal_emse(double z1, double z2, const Deltas& d, CombMode mode);

Regime classify_regime(double z1, double z2, double z12);
Regime classify_regime(double z1, double z2, const Deltas& d);

double nsd(double zeta, double zeta_ref);

struct TheoryResult {
  double z1 = 0.0;
  double z2 = 0.0;
  double z12 = 0.0;
  std::optional<double> lambda_aff;
  std::optional<double> lambda_cvx;
  double zeta_aff = 0.0;
  double zeta_cvx = 0.0;
  Regime regime = Regime::case4;
};

TheoryResult analyze(double z1, double z2, double z12);
TheoryResult analyze_pair(const Component& a, const Component& b, const TrackingSpec& spec);

}  // namespace afc
