#include "afcomb/scenario.hpp"

#include <boost/random/laplace_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <cmath>
#include <numeric>
#include <string>

namespace afc {

namespace {

constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kPlantStream = 3;

Matrix psd_factor(const Matrix& Q) {
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // Semidefinite Q: symmetric square root instead.
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
  if (es.info() != Eigen::Success) throw std::invalid_argument("increment covariance factorization failed");
  const Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::string_view to_string(Distribution d) { return d == Distribution::gaussian ? "gaussian" : "laplacian"; }

Distribution parse_distribution(std::string_view name) {
  if (name == "gaussian") return Distribution::gaussian;
  if (name == "laplacian") return Distribution::laplacian;
  throw std::invalid_argument("unknown distribution '" + std::string(name) + "'");
}

double draw_unit(Distribution dist, Rng& rng) {
  if (dist == Distribution::gaussian) return boost::random::normal_distribution<double>(0.0, 1.0)(rng);
  // Laplace(0, b) has variance 2 b^2.
  return boost::random::laplace_distribution<double>(0.0, std::sqrt(0.5))(rng);
}

Matrix InputModel::covariance() const {
  const auto m = static_cast<Eigen::Index>(taps);
  Matrix R(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) R(i, j) = power * std::pow(pole, static_cast<double>(std::abs(i - j)));
  }
  return R;
}

InputModel white_input(std::size_t taps, double variance) {
  return InputModel{taps, variance, 0.0, Distribution::gaussian};
}

InputModel toeplitz_input(const std::vector<double>& first_row) {
  if (first_row.empty() || !(first_row[0] > 0.0)) throw std::invalid_argument("Toeplitz row needs r0 > 0");
  const double pole = first_row.size() > 1 ? first_row[1] / first_row[0] : 0.0;
  if (!(std::abs(pole) < 1.0)) throw std::invalid_argument("Toeplitz row must satisfy |r1| < r0");
  return InputModel{first_row.size(), first_row[0], pole, Distribution::gaussian};
}

Matrix toeplitz(const std::vector<double>& first_row) {
  const auto m = static_cast<Eigen::Index>(first_row.size());
  Matrix R(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) R(i, j) = first_row[static_cast<std::size_t>(std::abs(i - j))];
  }
  return R;
}

Matrix build_q_mixture(double alpha, ConstMatrixRef R, double scale) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("mixture weight alpha must lie in [0, 1]");
  if (R.rows() != R.cols() || R.rows() == 0) throw DimensionError("R must be square and non-empty");
  Eigen::LLT<Matrix> llt(R);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("R must be positive definite to build Q");
  const auto m = R.rows();
  const Matrix Ri = llt.solve(Matrix::Identity(m, m));
  Matrix Q = scale * (alpha * R / R.trace() + (1.0 - alpha) * Ri / Ri.trace());
  return 0.5 * (Q + Q.transpose());
}

Vector draw_plant(const PlantDraw& draw, std::size_t taps, Rng& rng) {
  const auto m = static_cast<Eigen::Index>(taps);
  Vector w = Vector::Zero(m);
  switch (draw.kind) {
    case PlantInit::fixed:
      if (draw.fixed.size() != m) throw DimensionError("fixed plant length differs from filter length");
      return draw.fixed;
    case PlantInit::gaussian:
      for (Eigen::Index i = 0; i < m; ++i) w[i] = draw_unit(Distribution::gaussian, rng);
      break;
    case PlantInit::sparse: {
      if (draw.active == 0 || draw.active > taps) throw std::invalid_argument("sparse plant needs 1..M active taps");
      std::vector<std::size_t> idx(taps);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = 0; i < draw.active; ++i) {
        const std::size_t j = boost::random::uniform_int_distribution<std::size_t>(i, taps - 1)(rng);
        std::swap(idx[i], idx[j]);
        w[static_cast<Eigen::Index>(idx[i])] = draw_unit(Distribution::gaussian, rng);
      }
      break;
    }
  }
  const double norm = w.norm();
  if (!(norm > 0.0)) throw std::runtime_error("drawn plant has zero norm");
  return w / norm;
}

double IncrementModel::trace(std::size_t taps) const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::scaled_identity: return variance * static_cast<double>(taps);
    case Kind::matrix: return Q.trace();
  }
  return 0.0;
}

Matrix IncrementModel::covariance(std::size_t taps) const {
  const auto m = static_cast<Eigen::Index>(taps);
  switch (kind) {
    case Kind::none: return Matrix::Zero(m, m);
    case Kind::scaled_identity: return variance * Matrix::Identity(m, m);
    case Kind::matrix: return Q;
  }
  return Matrix::Zero(m, m);
}

IncrementModel no_drift() { return IncrementModel{}; }

IncrementModel identity_drift(double variance) {
  if (!(variance >= 0.0)) throw std::invalid_argument("increment variance must be >= 0");
  IncrementModel d;
  d.kind = variance > 0.0 ? IncrementModel::Kind::scaled_identity : IncrementModel::Kind::none;
  d.variance = variance;
  return d;
}

IncrementModel matrix_drift(Matrix Q) {
  if (Q.rows() != Q.cols()) throw DimensionError("Q must be square");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("Q must be symmetric");
  }
  IncrementModel d;
  d.kind = IncrementModel::Kind::matrix;
  d.factor = psd_factor(Q);
  d.Q = std::move(Q);
  return d;
}

void validate(const Scenario& sc) {
  if (sc.input.taps == 0) throw std::invalid_argument("filter length must be >= 1");
  if (!(sc.input.power > 0.0)) throw std::invalid_argument("input power must be > 0");
  if (!(std::abs(sc.input.pole) < 1.0)) throw std::invalid_argument("input pole must satisfy |a| < 1");
  if (sc.noise_var.has_value() == sc.snr_db.has_value()) {
    throw std::invalid_argument("set exactly one of noise variance and SNR");
  }
  if (sc.noise_var && !(*sc.noise_var >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
  if (sc.drift.kind == IncrementModel::Kind::matrix &&
      (sc.drift.Q.rows() != static_cast<Eigen::Index>(sc.taps()) || sc.drift.factor.rows() != sc.drift.Q.rows())) {
    throw DimensionError("Q size differs from filter length (build it with matrix_drift)");
  }
  if (sc.drift.kind == IncrementModel::Kind::scaled_identity && !(sc.drift.variance >= 0.0)) {
    throw std::invalid_argument("increment variance must be >= 0");
  }
  for (std::size_t i = 0; i < sc.changes.size(); ++i) {
    if (sc.changes[i].n <= 0) throw std::invalid_argument("change times must be > 0");
    if (i > 0 && sc.changes[i].n <= sc.changes[i - 1].n) {
      throw std::invalid_argument("change times must be strictly increasing");
    }
  }
}

Plant::Plant(Vector w, IncrementModel drift) : w_(std::move(w)), drift_(std::move(drift)) {
  const auto m = w_.size();
  switch (drift_.kind) {
    case IncrementModel::Kind::none:
      break;
    case IncrementModel::Kind::scaled_identity:
      scale_ = std::sqrt(drift_.variance);
      break;
    case IncrementModel::Kind::matrix:
      if (drift_.Q.rows() != m) throw DimensionError("Q size differs from plant length");
      chol_ = drift_.factor.rows() == m ? drift_.factor : psd_factor(drift_.Q);
      z_.resize(m);
      break;
  }
}

void Plant::replace(Vector w) {
  if (w.size() != w_.size()) throw DimensionError("replacement plant length differs");
  w_ = std::move(w);
}

void Plant::evolve(Rng& rng) {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  switch (drift_.kind) {
    case IncrementModel::Kind::none:
      return;
    case IncrementModel::Kind::scaled_identity:
      for (Eigen::Index i = 0; i < w_.size(); ++i) w_[i] += scale_ * normal(rng);
      return;
    case IncrementModel::Kind::matrix:
      for (Eigen::Index i = 0; i < z_.size(); ++i) z_[i] = normal(rng);
      w_.noalias() += chol_ * z_;
      return;
  }
}

DelayLine::DelayLine(std::size_t taps) : taps_(taps), pos_(taps), buf_(2 * taps, 0.0) {
  if (taps == 0) throw std::invalid_argument("delay line needs at least one tap");
}

void DelayLine::push(double x) {
  pos_ = pos_ == 0 ? taps_ - 1 : pos_ - 1;
  buf_[pos_] = x;
  buf_[pos_ + taps_] = x;
}

Eigen::Map<const Vector> DelayLine::view() const {
  return Eigen::Map<const Vector>(buf_.data() + (pos_ == taps_ ? 0 : pos_), static_cast<Eigen::Index>(taps_));
}

SignalSource::SignalSource(const Scenario& sc, std::uint64_t run_seed)
    : sc_(&sc),
      input_rng_(mix_seed(run_seed, kInputStream)),
      noise_rng_(mix_seed(run_seed, kNoiseStream)),
      plant_rng_(mix_seed(run_seed, kPlantStream)),
      plant_(Vector::Zero(static_cast<Eigen::Index>(sc.taps())), sc.drift),
      line_(sc.taps()) {
  validate(sc);
  plant_.replace(draw_plant(sc.plant, sc.taps(), plant_rng_));
  const double a = sc.input.pole;
  drive_scale_ = std::sqrt(sc.input.power * (1.0 - a * a));
  // Start the recursion in its stationary distribution and fill all but one tap.
  ar_state_ = std::sqrt(sc.input.power) * draw_unit(sc.input.dist, input_rng_);
  for (std::size_t i = 0; i + 1 < sc.taps(); ++i) {
    line_.push(ar_state_);
    next_input();
  }

  if (sc.noise_var) {
    noise_var_ = *sc.noise_var;
  } else {
    const Matrix R = sc.input.covariance();
    noise_var_ = plant_.weights().dot(R * plant_.weights()) / from_db(*sc.snr_db);
  }
  noise_scale_ = std::sqrt(noise_var_);
  sample_.taps = static_cast<Eigen::Index>(sc.taps());
  sample_.noise_var = noise_var_;
}

void SignalSource::next_input() {
  ar_state_ = sc_->input.pole * ar_state_ + drive_scale_ * draw_unit(sc_->input.dist, input_rng_);
}

const Sample& SignalSource::next() {
  if (n_ > 0) plant_.evolve(plant_rng_);
  if (next_change_ < sc_->changes.size() && sc_->changes[next_change_].n == n_) {
    plant_.replace(draw_plant(sc_->changes[next_change_].draw, sc_->taps(), plant_rng_));
    ++next_change_;
  }
  line_.push(ar_state_);
  next_input();
  const auto u = line_.view();
  sample_.n = n_;
  sample_.u_data = u.data();
  sample_.clean = u.dot(plant_.weights());
  sample_.d = sample_.clean + noise_scale_ * draw_unit(sc_->noise_dist, noise_rng_);
  sample_.w_o = &plant_.weights();
  ++n_;
  return sample_;
}

}  // namespace afc
