#include "afcomb/filters.hpp"

#include <cmath>
#include <string>

namespace afc {

namespace {

void check_dims(const FilterState& f, ConstVectorRef u) {
  if (u.size() != f.w.size()) {
    throw DimensionError("regressor length " + std::to_string(u.size()) +
                         " does not match filter length " + std::to_string(f.w.size()));
  }
}

void check_finite(double e, std::string_view what) {
  if (!std::isfinite(e)) throw DivergenceError(std::string(what) + ": non-finite error");
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be > 0");
}

}  // namespace

std::string_view to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::lms: return "lms";
    case Algorithm::nlms: return "nlms";
    case Algorithm::rls: return "rls";
    case Algorithm::za_nlms: return "za-nlms";
  }
  return "?";
}

FilterState make_lms(std::size_t taps, double mu) {
  require_positive(mu, "mu");
  FilterState f;
  f.algorithm = Algorithm::lms;
  f.w = Vector::Zero(static_cast<Eigen::Index>(taps));
  f.mu = mu;
  return f;
}

FilterState make_nlms(std::size_t taps, double mu, double eps) {
  require_positive(mu, "mu");
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  FilterState f;
  f.algorithm = Algorithm::nlms;
  f.w = Vector::Zero(static_cast<Eigen::Index>(taps));
  f.mu = mu;
  f.eps = eps;
  return f;
}

FilterState make_rls(std::size_t taps, double forgetting, double delta) {
  if (!(forgetting > 0.0 && forgetting <= 1.0)) {
    throw std::invalid_argument("RLS forgetting factor must lie in (0, 1]");
  }
  require_positive(delta, "delta");
  FilterState f;
  f.algorithm = Algorithm::rls;
  const auto n = static_cast<Eigen::Index>(taps);
  f.w = Vector::Zero(n);
  f.forgetting = forgetting;
  f.P = Matrix::Identity(n, n) / delta;
  return f;
}

FilterState make_za_nlms(std::size_t taps, double mu, double rho, double eps) {
  if (rho < 0.0) throw std::invalid_argument("rho must be >= 0");
  FilterState f = make_nlms(taps, mu, eps);
  f.algorithm = Algorithm::za_nlms;
  f.rho = rho;
  return f;
}

double predict(const FilterState& f, ConstVectorRef u) {
  check_dims(f, u);
  return u.dot(f.w);
}

StepResult lms_adapt(FilterState& f, ConstVectorRef u, double d) {
  check_dims(f, u);
  StepResult r;
  r.y = u.dot(f.w);
  r.e = d - r.y;
  check_finite(r.e, "lms");
  f.w.noalias() += (f.mu * r.e) * u;
  return r;
}

StepResult nlms_adapt(FilterState& f, ConstVectorRef u, double d) {
  check_dims(f, u);
  StepResult r;
  r.y = u.dot(f.w);
  r.e = d - r.y;
  check_finite(r.e, "nlms");
  const double energy = f.eps + u.squaredNorm();
  if (energy == 0.0) throw std::domain_error("nlms: degenerate (zero) regressor with eps = 0");
  f.w.noalias() += (f.mu * r.e / energy) * u;
  return r;
}

StepResult za_nlms_adapt(FilterState& f, ConstVectorRef u, double d) {
  check_dims(f, u);
  StepResult r;
  r.y = u.dot(f.w);
  r.e = d - r.y;
  check_finite(r.e, "za-nlms");
  const double energy = f.eps + u.squaredNorm();
  if (energy == 0.0) throw std::domain_error("za-nlms: degenerate (zero) regressor with eps = 0");
  const double step = f.mu * r.e / energy;
  // sign is taken on w(n), before the gradient step; sgn(0) = 0.
  f.w.array() = (f.w.array() + step * u.array()) - f.rho * f.w.array().sign();
  return r;
}

StepResult rls_adapt(FilterState& f, ConstVectorRef u, double d) {
  check_dims(f, u);
  const Vector pu = f.P * u;
  const double denom = f.forgetting + u.dot(pu);
  StepResult r;
  r.y = u.dot(f.w);
  r.e = d - r.y;
  check_finite(r.e, "rls");
  if (!(denom > 0.0)) throw DivergenceError("rls: gain denominator is not positive");
  const Vector k = pu / denom;
  f.w.noalias() += r.e * k;
  f.P.noalias() -= k * pu.transpose();
  f.P /= f.forgetting;
  const Eigen::Index n = f.P.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (f.P(i, j) + f.P(j, i));
      f.P(i, j) = avg;
      f.P(j, i) = avg;
    }
    if (!(f.P(i, i) > 0.0) || !std::isfinite(f.P(i, i))) {
      throw DivergenceError("rls: inverse correlation matrix lost positive definiteness");
    }
  }
  return r;
}

StepResult adapt(FilterState& f, ConstVectorRef u, double d) {
  switch (f.algorithm) {
    case Algorithm::lms: return lms_adapt(f, u, d);
    case Algorithm::nlms: return nlms_adapt(f, u, d);
    case Algorithm::rls: return rls_adapt(f, u, d);
    case Algorithm::za_nlms: return za_nlms_adapt(f, u, d);
  }
  throw std::logic_error("unknown algorithm");
}

double symmetry_residual(const FilterState& f) {
  if (f.algorithm != Algorithm::rls) return 0.0;
  return (f.P - f.P.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace afc
