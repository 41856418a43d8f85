#include "afcomb/combo_multi.hpp"

#include <doctest.h>

#include <array>
#include <random>

using namespace afc;

namespace {

MixerConfig cvx(double step = 0.5) {
  MixerConfig c;
  c.rule = MixRule::cvx_pn_lms;
  c.step = step;
  return c;
}

}  // namespace

TEST_CASE("hierarchical output") {
  auto tree = HierarchicalCombiner::balanced(4, cvx());
  REQUIRE(tree.nodes().size() == 7);
  const std::array<double, 4> y{1.5, -2.0, 3.0, 7.0};
  for (std::size_t node : {4u, 5u, 6u}) set_lambda(tree.mixer(node), 1.0);
  CHECK(tree.output(y) == 1.5);

  set_lambda(tree.mixer(6), 1.0);
  set_lambda(tree.mixer(4), 0.5);
  set_lambda(tree.mixer(5), 0.2);
  const std::array<double, 4> z{0.0, 2.0, 100.0, -50.0};
  CHECK(tree.output(z) == doctest::Approx(1.0).epsilon(1e-15));

  auto pair = HierarchicalCombiner::balanced(2, cvx());
  set_lambda(pair.mixer(2), 0.3);
  const std::array<double, 2> w{0.4, -1.1};
  CHECK(pair.output(w) == combine_outputs(pair.mixer(2).lambda, 0.4, -1.1));
}

TEST_CASE("hierarchical adaptation") {
  SUBCASE("single node equals the two-filter rule") {
    auto tree = HierarchicalCombiner::balanced(2, cvx());
    MixerState ref = make_mixer(cvx());
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int n = 0; n < 2000; ++n) {
      const std::array<double, 2> y{g(rng), g(rng)};
      const double d = 0.8 * y[0] + 0.2 * y[1] + 0.1 * g(rng);
      const double e = d - combine_outputs(ref.lambda, y[0], y[1]);
      tree.adapt(d, y);
      mixer_step(ref, e, y[0], y[1]);
      REQUIRE(tree.mixer(2).a == ref.a);
      REQUIRE(tree.mixer(2).lambda == ref.lambda);
    }
  }
  SUBCASE("equal children leave a node unchanged") {
    auto tree = HierarchicalCombiner::balanced(4, cvx());
    const std::array<double, 4> y{1.0, 1.0, 2.0, -3.0};
    tree.adapt(5.0, y);
    CHECK(tree.mixer(4).a == 0.0);
    CHECK(tree.mixer(5).a != 0.0);
  }
  SUBCASE("top mixer sees subtree outputs") {
    auto tree = HierarchicalCombiner::balanced(4, cvx());
    set_lambda(tree.mixer(4), 0.25);
    set_lambda(tree.mixer(5), 0.75);
    const std::array<double, 4> y{1.0, 3.0, -2.0, 6.0};
    const double left = 0.25 * 1.0 + 0.75 * 3.0;    // 2.5
    const double right = 0.75 * -2.0 + 0.25 * 6.0;  // 0
    MixerState top = tree.mixer(6);
    const double d = 4.0;
    mixer_step(top, d - combine_outputs(top.lambda, left, right), left, right);
    tree.adapt(d, y);
    CHECK(tree.mixer(6).a == top.a);
    CHECK(tree.mixer(6).p == doctest::Approx(0.1 * 2.5 * 2.5));
  }
}

TEST_CASE("softmax") {
  Vector a = Vector::Constant(5, 0.7);
  const Vector l = softmax(a);
  for (auto v : l) CHECK(v == doctest::Approx(0.2));

  Vector b(3);
  b << 0.1, -2.0, 3.5;
  const Vector s1 = softmax(b);
  const Vector s2 = softmax((b.array() + 1000.0).matrix());
  CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-15);

  Vector two(2);
  two << 1.3, -0.4;
  CHECK(softmax(two)[0] == doctest::Approx(sigmoid(1.7)).epsilon(1e-15));
}

TEST_CASE("softmax weights remain a probability vector") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (bool pn : {false, true}) {
    SoftmaxMixerConfig cfg;
    cfg.step = pn ? 0.5 : 5.0;
    cfg.power_normalized = pn;
    auto s = make_softmax_mixer(4, cfg);
    for (int n = 0; n < 20000; ++n) {
      const std::array<double, 4> y{g(rng), 2 * g(rng), g(rng) + 1, 0.1 * g(rng)};
      softmax_adapt(s, y[1] + 0.3 * g(rng), y);
      REQUIRE(std::abs(s.lambda.sum() - 1.0) <= 1e-12);
      REQUIRE(s.lambda.minCoeff() >= 0.0);
      REQUIRE(s.a.cwiseAbs().maxCoeff() <= cfg.a_plus);
    }
    CHECK(s.lambda[1] > 0.9);
  }
}

TEST_CASE("softmax update is the gradient of the squared error") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  SoftmaxMixerConfig cfg;
  cfg.step = 1e-3;
  cfg.clamp = false;
  for (int trial = 0; trial < 20; ++trial) {
    auto s = make_softmax_mixer(4, cfg);
    for (auto& v : s.a) v = g(rng);
    s.lambda = softmax(s.a);
    const std::array<double, 4> y{g(rng), g(rng), g(rng), g(rng)};
    const double d = g(rng);
    auto err2 = [&](const Vector& a) {
      SoftmaxMixerState t = s;
      t.lambda = softmax(a);
      const double e = d - softmax_output(t, y);
      return e * e;
    };
    const Vector a0 = s.a;
    softmax_adapt(s, d, y);
    for (Eigen::Index k = 0; k < 4; ++k) {
      const double h = 1e-6;
      Vector ap = a0, am = a0;
      ap[k] += h;
      am[k] -= h;
      const double grad = (err2(ap) - err2(am)) / (2 * h);
      const double step = (s.a[k] - a0[k]) / cfg.step;
      CHECK(step == doctest::Approx(-0.5 * grad).epsilon(1e-6));
    }
  }
}

TEST_CASE("softmax adaptation fixed points") {
  SoftmaxMixerConfig cfg;
  auto s = make_softmax_mixer(3, cfg);
  s.a << 0.5, -0.2, 0.1;
  s.lambda = softmax(s.a);
  const Vector a0 = s.a;
  const std::array<double, 3> same{2.0, 2.0, 2.0};
  softmax_adapt(s, 7.0, same);
  CHECK(s.a == a0);
  const std::array<double, 3> y{1.0, -1.0, 3.0};
  softmax_adapt(s, softmax_output(s, y), y);
  CHECK(s.a == a0);

  // K = 2: lambda_1 moves the same way as the two-filter sigmoid rule.
  auto two = make_softmax_mixer(2, cfg);
  const std::array<double, 2> yy{2.0, 0.5};
  softmax_adapt(two, 3.0, yy);  // e (y1 - y2) > 0
  CHECK(two.lambda[0] > 0.5);
}

TEST_CASE("affine layer") {
  auto s = make_affine_layer(3, 0.1);
  s.lambda << 0.3, 0.3;
  const std::array<double, 3> y{1.0, 2.0, 3.0};
  CHECK(affine_layer_output(s, y) == doctest::Approx(2.1));

  const Vector l0 = s.lambda;
  const std::array<double, 3> same{1.0, 1.0, 1.0};
  affine_layer_step(s, 4.0, same);
  CHECK(s.lambda == l0);

  auto layer = make_affine_layer(2, 0.02);
  MixerConfig c;
  c.rule = MixRule::aff_pn_lms;
  c.step = 0.02;
  MixerState ref = make_mixer(c);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int n = 0; n < 3000; ++n) {
    const std::array<double, 2> yy{g(rng), g(rng)};
    const double d = 0.3 * yy[0] + 0.7 * yy[1] + 0.05 * g(rng);
    REQUIRE(affine_layer_output(layer, yy) == combine_outputs(ref.lambda, yy[0], yy[1]));
    const double e = d - combine_outputs(ref.lambda, yy[0], yy[1]);
    affine_layer_step(layer, d, yy);
    mixer_step(ref, e, yy[0], yy[1]);
    REQUIRE(layer.lambda[0] == ref.lambda);
  }
  CHECK(ref.lambda == doctest::Approx(0.3).epsilon(0.1));
}
