#include "afcomb/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace afc {

namespace {

double trace_qr(const TrackingSpec& spec) { return (spec.Q * spec.R).trace(); }

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

}  // namespace

void validate(const TrackingSpec& spec) {
  if (spec.R.rows() == 0 || spec.R.rows() != spec.R.cols()) throw DimensionError("R must be square and non-empty");
  if (spec.Q.rows() != spec.R.rows() || spec.Q.cols() != spec.R.cols()) throw DimensionError("Q and R sizes differ");
  if (!(spec.noise_var > 0.0)) throw std::invalid_argument("noise variance must be > 0");
  const double tol = 1e-12;
  if ((spec.R - spec.R.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, spec.R.cwiseAbs().maxCoeff()) ||
      (spec.Q - spec.Q.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, spec.Q.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("R and Q must be symmetric");
  }
}

double lms_emse(double mu, const TrackingSpec& spec) {
  check_positive(mu, "LMS step size");
  return 0.5 * (mu * spec.noise_var * spec.R.trace() + spec.Q.trace() / mu);
}

double rls_emse(double beta, const TrackingSpec& spec) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("RLS beta must lie in (0, 1)");
  return 0.5 * (beta * spec.noise_var * static_cast<double>(spec.taps()) + trace_qr(spec) / beta);
}

OptimalParams optimal_params(const TrackingSpec& spec) {
  const double tq = spec.Q.trace();
  const double tqr = trace_qr(spec);
  if (!(tq > 0.0)) throw std::domain_error("Tr{Q} = 0: stationary plant has no optimal tracking step");
  const double s_lms = spec.noise_var * spec.R.trace();
  const double s_rls = spec.noise_var * static_cast<double>(spec.taps());
  OptimalParams o;
  o.mu = std::sqrt(tq / s_lms);
  o.beta = std::sqrt(tqr / s_rls);
  o.zeta_lms = std::sqrt(s_lms * tq);
  o.zeta_rls = std::sqrt(s_rls * tqr);
  return o;
}

double steady_emse(const Component& c, const TrackingSpec& spec) {
  return c.family == Family::lms ? lms_emse(c.param, spec) : rls_emse(c.param, spec);
}

double cross_emse(const Component& a, const Component& b, const TrackingSpec& spec) {
  if (a.family == Family::lms && b.family == Family::lms) {
    check_positive(a.param, "LMS step size");
    check_positive(b.param, "LMS step size");
    return (a.param * b.param * spec.noise_var * spec.R.trace() + spec.Q.trace()) / (a.param + b.param);
  }
  if (a.family == Family::rls && b.family == Family::rls) {
    check_positive(a.param, "RLS beta");
    check_positive(b.param, "RLS beta");
    const double m = static_cast<double>(spec.taps());
    return (a.param * b.param * spec.noise_var * m + trace_qr(spec)) / (a.param + b.param);
  }
  const double mu = a.family == Family::lms ? a.param : b.param;
  const double beta = a.family == Family::rls ? a.param : b.param;
  check_positive(mu, "LMS step size");
  check_positive(beta, "RLS beta");
  const auto m = static_cast<Eigen::Index>(spec.taps());
  const Matrix A = mu * spec.R + beta * Matrix::Identity(m, m);
  const Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) throw std::domain_error("mu R + beta I is not positive definite");
  const Matrix X = llt.solve(spec.R);  // (mu R + beta I)^-1 R
  return mu * beta * spec.noise_var * X.trace() + (spec.Q * X).trace();
}

Deltas pair_deltas(const Component& a, const Component& b, const TrackingSpec& spec) {
  if (a.family == b.family) {
    // zeta_i - zeta_12 = (p_i - p_j)(p_i^2 s - T) / (2 p_i (p_i + p_j)).
    const bool lms = a.family == Family::lms;
    const double s = spec.noise_var * (lms ? spec.R.trace() : static_cast<double>(spec.taps()));
    const double t = lms ? spec.Q.trace() : trace_qr(spec);
    const double p1 = a.param;
    const double p2 = b.param;
    if (lms) {
      check_positive(p1, "LMS step size");
      check_positive(p2, "LMS step size");
    } else {
      steady_emse(a, spec);
      steady_emse(b, spec);
    }
    return Deltas{(p1 - p2) * (p1 * p1 * s - t) / (2.0 * p1 * (p1 + p2)),
                  (p2 - p1) * (p2 * p2 * s - t) / (2.0 * p2 * (p1 + p2))};
  }
  const double z12 = cross_emse(a, b, spec);
  return Deltas{steady_emse(a, spec) - z12, steady_emse(b, spec) - z12};
}

std::string_view to_string(CombMode mode) { return mode == CombMode::affine ? "affine" : "convex"; }

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::case1: return "case1";
    case Regime::case2: return "case2";
    case Regime::case3: return "case3";
    case Regime::case4: return "case4";
  }
  return "?";
}

double combination_emse(double lambda, double z1, double z2, double z12) {
  const double mu = 1.0 - lambda;
  return lambda * lambda * z1 + mu * mu * z2 + 2.0 * lambda * mu * z12;
}

void check_cauchy_schwarz(double z1, double z2, double z12) {
  if (!(z1 > 0.0) || !(z2 > 0.0)) throw std::invalid_argument("component EMSEs must be > 0");
  if (!std::isfinite(z12) || z12 * z12 > z1 * z2 * (1.0 + 1e-12)) {
    throw std::invalid_argument("cross-EMSE violates the Cauchy-Schwarz bound z12^2 <= z1 z2");
  }
}

bool is_indeterminate(double z1, double z2, const Deltas& d) {
  return std::abs(d.d1) + std::abs(d.d2) < 1e-12 * std::max(z1, z2);
}

std::optional<double> optimal_lambda(double z1, double z2, const Deltas& d, CombMode mode) {
  if (is_indeterminate(z1, z2, d)) return std::nullopt;
  const double den = d.d1 + d.d2;
  if (den < 0.0) throw std::invalid_argument("negative E{(e_a1 - e_a2)^2}: inconsistent EMSE triple");
  const double lambda = d.d2 / den;
  return mode == CombMode::convex ? std::clamp(lambda, 0.0, 1.0) : lambda;
}

std::optional<double> optimal_lambda(double z1, double z2, double z12, CombMode mode) {
  check_cauchy_schwarz(z1, z2, z12);
  return optimal_lambda(z1, z2, Deltas{z1 - z12, z2 - z12}, mode);
}

double optimal_emse(double z1, double z2, const Deltas& d, CombMode mode) {
  const auto lambda = optimal_lambda(z1, z2, d, mode);
  if (!lambda) return z1;
  const double den = d.d1 + d.d2;
  if (mode == CombMode::convex) {
    if (*lambda >= 1.0) return z1;
    if (*lambda <= 0.0) return z2;
  }
  // zeta1 - (1 - lambda) dzeta1 with 1 - lambda = dzeta1 / den.
  return z1 - d.d1 * d.d1 / den;
}

double optimal_emse(double z1, double z2, double z12, CombMode mode) {
  check_cauchy_schwarz(z1, z2, z12);
  return optimal_emse(z1, z2, Deltas{z1 - z12, z2 - z12}, mode);
}

Regime classify_regime(double z1, double z2, const Deltas& d) {
  if (is_indeterminate(z1, z2, d)) return Regime::case4;
  if (d.d1 <= 0.0) return Regime::case1;
  if (d.d2 <= 0.0) return Regime::case2;
  return Regime::case3;
}

Regime classify_regime(double z1, double z2, double z12) {
  check_cauchy_schwarz(z1, z2, z12);
  return classify_regime(z1, z2, Deltas{z1 - z12, z2 - z12});
}

double nsd(double zeta, double zeta_ref) {
  check_positive(zeta_ref, "reference EMSE");
  return to_db(zeta / zeta_ref);
}

namespace {

TheoryResult analyze_deltas(double z1, double z2, double z12, const Deltas& d) {
  TheoryResult r;
  r.z1 = z1;
  r.z2 = z2;
  r.z12 = z12;
  r.lambda_aff = optimal_lambda(z1, z2, d, CombMode::affine);
  r.lambda_cvx = optimal_lambda(z1, z2, d, CombMode::convex);
  r.zeta_aff = optimal_emse(z1, z2, d, CombMode::affine);
  r.zeta_cvx = optimal_emse(z1, z2, d, CombMode::convex);
  r.regime = classify_regime(z1, z2, d);
  return r;
}

}  // namespace

TheoryResult analyze(double z1, double z2, double z12) {
  check_cauchy_schwarz(z1, z2, z12);
  return analyze_deltas(z1, z2, z12, Deltas{z1 - z12, z2 - z12});
}

TheoryResult analyze_pair(const Component& a, const Component& b, const TrackingSpec& spec) {
  const double z1 = steady_emse(a, spec);
  const double z2 = steady_emse(b, spec);
  const double z12 = cross_emse(a, b, spec);
  check_cauchy_schwarz(z1, z2, z12);
  return analyze_deltas(z1, z2, z12, pair_deltas(a, b, spec));
}

}  // namespace afc
