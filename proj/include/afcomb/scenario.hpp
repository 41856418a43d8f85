#pragma once

#include "afcomb/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace afc {

enum class Distribution { gaussian, laplacian };

std::string_view to_string(Distribution d);
Distribution parse_distribution(std::string_view name);

// Zero-mean, unit-variance draw.
double draw_unit(Distribution dist, Rng& rng);

// Tapped-delay-line input. An AR(1) process with pole `pole` and power `power`
// gives the Toeplitz covariance power * pole^|i-j|; pole = 0 is white input.
struct InputModel {
  std::size_t taps = 0;
  double power = 1.0;
  double pole = 0.0;
  Distribution dist = Distribution::gaussian;

  Matrix covariance() const;
};

InputModel white_input(std::size_t taps, double variance);
// Fits the AR(1) generator to a Toeplitz first row r (pole = r1/r0). Rows
// that are not geometric are only matched in their first two lags.
InputModel toeplitz_input(const std::vector<double>& first_row);
Matrix toeplitz(const std::vector<double>& first_row);

// Q = scale [alpha R/Tr{R} + (1-alpha) R^-1/Tr{R^-1}], Tr{Q} = scale.
Matrix build_q_mixture(double alpha, ConstMatrixRef R, double scale = 1e-5);

enum class PlantInit { fixed, gaussian, sparse };

struct PlantDraw {
  PlantInit kind = PlantInit::gaussian;
  Vector fixed;            // kind == fixed
  std::size_t active = 0;  // kind == sparse: nonzero taps at random positions
};

// Gaussian and sparse draws are scaled to unit norm.
Vector draw_plant(const PlantDraw& draw, std::size_t taps, Rng& rng);

struct ChangeEvent {
  std::int64_t n = 0;  // w_o is replaced before sample n is generated
  PlantDraw draw;
};

// Random-walk increment covariance.
struct IncrementModel {
  enum class Kind { none, scaled_identity, matrix } kind = Kind::none;
  double variance = 0.0;  // scaled_identity: Q = variance * I
  Matrix Q;               // matrix
  Matrix factor;          // L with L L' = Q; filled by matrix_drift

  double trace(std::size_t taps) const;
  Matrix covariance(std::size_t taps) const;
};

IncrementModel no_drift();
IncrementModel identity_drift(double variance);
IncrementModel matrix_drift(Matrix Q);

struct Scenario {
  InputModel input;
  PlantDraw plant;
  IncrementModel drift;
  std::vector<ChangeEvent> changes;  // strictly increasing n
  // Exactly one of noise_var / snr_db. With SNR the noise variance is
  // w_o' R w_o / SNR at the initial plant.
  std::optional<double> noise_var;
  std::optional<double> snr_db;
  Distribution noise_dist = Distribution::gaussian;

  std::size_t taps() const { return input.taps; }
};

// Throws std::invalid_argument describing the first inconsistency.
void validate(const Scenario& sc);

// Plant state w_o with its increment generator.
class Plant {
 public:
  Plant(Vector w, IncrementModel drift);

  const Vector& weights() const { return w_; }
  void replace(Vector w);
  // w_o <- w_o + q, q ~ N(0, Q).
  void evolve(Rng& rng);

 private:
  Vector w_;
  IncrementModel drift_;
  Matrix chol_;
  double scale_ = 0.0;
  Vector z_;
};

// Delay line u(n) = [x(n), x(n-1), ..., x(n-M+1)] kept contiguous through a
// doubled buffer.
class DelayLine {
 public:
  explicit DelayLine(std::size_t taps);
  void push(double x);
  Eigen::Map<const Vector> view() const;
  std::size_t taps() const { return taps_; }

 private:
  std::size_t taps_;
  std::size_t pos_;
  std::vector<double> buf_;
};

struct Sample {
  std::int64_t n = 0;
  const double* u_data = nullptr;
  Eigen::Index taps = 0;
  double d = 0.0;
  double clean = 0.0;  // u' w_o(n), so e_a = clean - y
  const Vector* w_o = nullptr;
  double noise_var = 0.0;

  Eigen::Map<const Vector> u() const { return Eigen::Map<const Vector>(u_data, taps); }
};

// Independent realization of a scenario. Input, noise and plant draw from
// separate engines derived from the run seed.
class SignalSource {
 public:
  SignalSource(const Scenario& sc, std::uint64_t run_seed);

  // Produces sample n (0, 1, 2, ...) and advances the plant afterwards.
  const Sample& next();
  double noise_var() const { return noise_var_; }
  const Plant& plant() const { return plant_; }

 private:
  void next_input();

  const Scenario* sc_;
  Rng input_rng_;
  Rng noise_rng_;
  Rng plant_rng_;
  Plant plant_;
  DelayLine line_;
  double ar_state_ = 0.0;
  double drive_scale_ = 1.0;
  double noise_var_ = 0.0;
  double noise_scale_ = 0.0;
  std::size_t next_change_ = 0;
  std::int64_t n_ = 0;
  Sample sample_;
};

}  // namespace afc
