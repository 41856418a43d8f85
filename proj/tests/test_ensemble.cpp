#include "afcomb/ensemble.hpp"
#include "afcomb/theory.hpp"

#include <doctest.h>

#include <cmath>

using namespace afc;

namespace {

class LoneFilter : public FilterGraph {
 public:
  explicit LoneFilter(FilterState f) : f_(std::move(f)) {}
  const std::vector<std::string>& columns() const override { return cols_; }
  void step(const Sample& s, std::span<double> row, bool record) override {
    const StepResult r = adapt(f_, s.u(), s.d);
    if (record) {
      const double ea = s.clean - r.y;
      row[0] = ea * ea;
    }
  }

 private:
  FilterState f_;
  std::vector<std::string> cols_{"ea2"};
};

Scenario white_tracking(double trq) {
  Scenario sc;
  sc.input = white_input(7, 1.0 / 7);
  sc.plant.kind = PlantInit::gaussian;
  sc.drift = trq > 0 ? identity_drift(trq / 7) : no_drift();
  sc.noise_var = 0.01;
  return sc;
}

}  // namespace

TEST_CASE("noiseless nlms reaches zero error") {
  Scenario sc = white_tracking(0.0);
  sc.noise_var = 0.0;
  EnsembleConfig ec;
  ec.runs = 1;
  ec.horizon = 400;
  const auto m = run_ensemble(
      sc, [](std::uint64_t) { return std::make_unique<LoneFilter>(make_nlms(7, 1.0, 0.0)); }, ec);
  CHECK(m.series("ea2")[399] < 1e-25);
}

TEST_CASE("ensemble runs are deterministic and thread independent") {
  const Scenario sc = white_tracking(1e-5);
  EnsembleConfig ec;
  ec.runs = 12;
  ec.horizon = 3000;
  ec.record_stride = 7;
  auto factory = [](std::uint64_t) {
    MixerConfig mc;
    return std::make_unique<PairBankGraph>(std::vector<std::string>{"a", "b"},
                                           std::vector<FilterState>{make_lms(7, 0.1), make_lms(7, 0.01)},
                                           std::vector<PairBankGraph::MixerSpec>{{"c", 0, 1, mc}}, true);
  };
  ec.threads = 1;
  const auto a = run_ensemble(sc, factory, ec);
  ec.threads = 3;
  const auto b = run_ensemble(sc, factory, ec);
  CHECK(a.mean == b.mean);
  CHECK(a.window_mean == b.window_mean);
  CHECK(a.record_n.back() == 2996);
  CHECK(a.window_start == 2700);
  ec.seed = 2;
  const auto c = run_ensemble(sc, factory, ec);
  CHECK(a.mean != c.mean);
}

TEST_CASE("steady-state EMSE of a lone lms matches theory") {
  const Scenario sc = white_tracking(1e-6);
  EnsembleConfig ec;
  ec.runs = 100;
  ec.horizon = 40000;
  ec.record_stride = 40000;
  ec.window_start = 10000;
  const auto m = run_ensemble(
      sc, [](std::uint64_t) { return std::make_unique<LoneFilter>(make_lms(7, 0.01)); }, ec);
  CHECK(std::abs(to_db(m.steady("ea2")) - (-40.0)) < 0.5);
}

TEST_CASE("cross EMSE estimate respects Cauchy-Schwarz") {
  const Scenario sc = white_tracking(1e-4);
  EnsembleConfig ec;
  ec.runs = 20;
  ec.horizon = 20000;
  const auto m = run_ensemble(
      sc,
      [](std::uint64_t) {
        return std::make_unique<PairBankGraph>(std::vector<std::string>{"1", "2"},
                                               std::vector<FilterState>{make_lms(7, 0.2), make_lms(7, 0.01)},
                                               std::vector<PairBankGraph::MixerSpec>{});
      },
      ec);
  const double z1 = m.steady("ea2_1"), z2 = m.steady("ea2_2"), z12 = m.steady("ea12");
  const Eigen::Index r = m.run_window.rows();
  const Vector x = m.run_window.col(static_cast<Eigen::Index>(m.index("ea12")));
  const double sigma = std::sqrt((x.array() - z12).square().sum() / (r - 1) / r);
  CHECK(std::abs(z12) <= std::sqrt(z1 * z2) + 3 * sigma);
}

TEST_CASE("nsd of the optimally tuned lms is about zero") {
  const double trq = 1e-5;
  const Scenario sc = white_tracking(trq);
  TrackingSpec spec;
  spec.noise_var = 0.01;
  spec.R = Matrix::Identity(7, 7) / 7.0;
  spec.Q = Matrix::Identity(7, 7) * (trq / 7);
  const OptimalParams o = optimal_params(spec);
  EnsembleConfig ec;
  ec.runs = 50;
  ec.horizon = 30000;
  ec.record_stride = 30000;
  ec.window_start = 5000;
  const auto m = run_ensemble(
      sc, [&](std::uint64_t) { return std::make_unique<LoneFilter>(make_lms(7, o.mu)); }, ec);
  CHECK(std::abs(nsd(m.steady("ea2"), o.zeta_lms)) < 0.5);
}

TEST_CASE("divergence policies") {
  Scenario sc = white_tracking(0.0);
  sc.input = white_input(7, 10.0);
  EnsembleConfig ec;
  ec.runs = 3;
  ec.horizon = 5000;
  auto factory = [](std::uint64_t) { return std::make_unique<LoneFilter>(make_lms(7, 1.0)); };
  CHECK_THROWS_AS(run_ensemble(sc, factory, ec), DivergenceError);
  ec.divergence = DivergencePolicy::exclude;
  CHECK_THROWS(run_ensemble(sc, factory, ec));  // nothing left to average
}

TEST_CASE("series helpers") {
  const std::vector<double> d{1, 1, 1, 1};
  const std::vector<double> zero(4, 0.0);
  const auto none = erle(d, d, zero, 2);
  for (double v : none) CHECK(v == doctest::Approx(0.0));
  const auto perfect = erle(d, zero, zero, 2);
  CHECK(perfect.back() == kInfiniteErle);
  const std::vector<double> half{std::sqrt(0.5), std::sqrt(0.5), std::sqrt(0.5), std::sqrt(0.5)};
  CHECK(erle_total(d, half, zero) == doctest::Approx(3.0103).epsilon(1e-5));

  const std::vector<double> x{0, 3, 6, 9, 12};
  const auto ma = moving_average(x, 3);
  CHECK(ma[0] == doctest::Approx(1.5));
  CHECK(ma[2] == doctest::Approx(6.0));
  CHECK(ma[4] == doctest::Approx(10.5));
  CHECK(first_at_or_below(x, 5.0, 2) == -1);
  CHECK(first_at_or_below(x, 5.0, 1) == 1);
  const std::vector<double> y{5, 4, 3, 2};
  CHECK(first_at_or_below(y, 3.0) == 2);
}
