#pragma once

#include "afcomb/combo2.hpp"
#include "afcomb/filters.hpp"
#include "afcomb/scenario.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace afc {

// Number of upper-triangular products x(n-i1) x(n-i2), 0 <= i1 <= i2 < n2.
std::size_t quadratic_size(std::size_t n2);

// Fills `out` (length quadratic_size(n2)) from history x(n), x(n-1), ...;
// ordering is i1 outer, i2 = i1..n2-1 inner.
void quadratic_regressor(ConstVectorRef history, std::size_t n2, VectorRef out);

// Second-order Volterra filter: a linear kernel of length n1 and an
// upper-triangular quadratic kernel of memory n2, each adapted by NLMS on its
// own regressor.
struct VolterraKernels {
  FilterState linear;
  FilterState quadratic;
  std::size_t n2 = 0;
};

VolterraKernels make_volterra(std::size_t n1, std::size_t n2, double mu_linear, double mu_quadratic,
                              double eps = kDefaultNlmsEps);

struct VolterraOutput {
  double y = 0.0;
  double y1 = 0.0;  // linear kernel
  double y2 = 0.0;  // quadratic kernel
};

VolterraOutput volterra_output(const VolterraKernels& k, ConstVectorRef history);
// NLMS correction of both kernels with an externally formed error e.
void volterra_adapt(VolterraKernels& k, ConstVectorRef history, double e);

// NLMS step w += mu e u / (eps + |u|^2) with a given error.
void nlms_correct(FilterState& f, ConstVectorRef u, double e);

enum class CkMode {
  combination,    // lambda2 adapted: the quadratic kernel competes with an all-zeros kernel
  linear_only,    // lambda2 = 0, quadratic kernel idle
  full_volterra,  // lambda2 = 1
};

struct CkConfig {
  std::size_t n1 = 64;
  std::size_t n2 = 8;
  double mu_fast = 0.5;
  double mu_slow = 0.05;
  double mu_quadratic = 0.1;
  double eps = 1e-6;
  MixerConfig mixer{MixRule::cvx_pn_lms, Activation::scaled_sigmoid, 0.5};
  CkMode mode = CkMode::combination;
};

struct CkStep {
  double y = 0.0;
  double e = 0.0;
  double y_fast = 0.0;
  double y_slow = 0.0;
  double y_quadratic = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Combination of kernels: two linear kernels (fast, slow) mixed by lambda1 and
// a quadratic kernel mixed by lambda2 against the non-adapting all-zeros
// kernel. Every kernel adapts on its own output plus the combined output of
// the other order.
class CkEchoCanceller {
 public:
  explicit CkEchoCanceller(const CkConfig& cfg);

  // `history` holds x(n), x(n-1), ... with at least max(n1, n2) entries.
  CkStep step(ConstVectorRef history, double d);

  const FilterState& fast() const { return fast_; }
  const FilterState& slow() const { return slow_; }
  const FilterState& quadratic() const { return quad_; }
  const MixerState& lambda1() const { return m1_; }
  const MixerState& lambda2() const { return m2_; }
  // The virtual kernel: always zero, never adapted.
  const Vector& zero_kernel() const { return zero_; }

 private:
  CkConfig cfg_;
  FilterState fast_;
  FilterState slow_;
  FilterState quad_;
  Vector zero_;
  Vector qreg_;
  MixerState m1_;
  MixerState m2_;
};

// ---- echo path simulation --------------------------------------------------

struct EchoSegment {
  std::int64_t length = 20000;
  // Linear-to-nonlinear echo power ratio; +infinity disables the nonlinearity.
  double lnlr_db = std::numeric_limits<double>::infinity();
  bool new_rir = false;  // draw a fresh room response at the segment start
};

struct EchoScenario {
  std::size_t rir_length = 64;
  double rir_decay = 8.0;   // envelope exp(-i / rir_decay)
  std::size_t memory = 8;   // taps of the room response seen by the squared input
  double input_pole = 0.5;  // AR(1) coloring of the far-end signal
  Distribution input_dist = Distribution::laplacian;
  double enr_db = 40.0;  // linear echo to background noise
  std::vector<EchoSegment> segments;

  std::int64_t horizon() const;
};

void validate(const EchoScenario& sc);

// Unit-norm room response with an exponentially decaying random envelope.
Vector draw_rir(std::size_t length, double decay, Rng& rng);

struct EchoSignals {
  std::vector<double> x;     // far-end input, x(n) at index n + preroll
  std::size_t preroll = 0;
  std::vector<double> echo;  // linear + nonlinear echo
  std::vector<double> e0;    // background noise
  std::vector<double> d;     // microphone: echo + e0
  std::vector<std::int64_t> segment_start;
  std::vector<double> gain;  // per-segment nonlinear gain c
};

// Echo = h * x + c * sum_{i < memory} h_i x^2(n - i), with c set per segment
// from the sample powers so that the segment meets its LNLR.
EchoSignals simulate_echo(const EchoScenario& sc, std::uint64_t seed);

}  // namespace afc
