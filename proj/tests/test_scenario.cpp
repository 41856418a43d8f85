#include "afcomb/scenario.hpp"

#include <doctest.h>

#include <cmath>

using namespace afc;

TEST_CASE("q mixture") {
  const Matrix R = toeplitz({1.0 / 7, 0.8 / 7, 0.64 / 7, 0.512 / 7, 0.4096 / 7, 0.32768 / 7, 0.262144 / 7});
  for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
    const Matrix Q = build_q_mixture(alpha, R);
    CHECK(Q.trace() == doctest::Approx(1e-5).epsilon(1e-12));
    CHECK((Q - Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  const Matrix Q1 = build_q_mixture(1.0, R);
  CHECK((Q1 - R * (1e-5 / R.trace())).cwiseAbs().maxCoeff() < 1e-18);

  const Matrix W = Matrix::Identity(5, 5) * 0.3;
  for (double alpha : {0.0, 0.6, 1.0}) {
    CHECK((build_q_mixture(alpha, W) - Matrix::Identity(5, 5) * (1e-5 / 5)).cwiseAbs().maxCoeff() < 1e-18);
  }
}

TEST_CASE("plant draws") {
  Rng rng(1);
  const Vector g = draw_plant(PlantDraw{PlantInit::gaussian, {}, 0}, 16, rng);
  CHECK(g.norm() == doctest::Approx(1.0));
  const Vector s = draw_plant(PlantDraw{PlantInit::sparse, {}, 5}, 64, rng);
  CHECK(s.norm() == doctest::Approx(1.0));
  CHECK((s.array() != 0.0).count() == 5);
  Vector f(3);
  f << 1, 2, 3;
  CHECK(draw_plant(PlantDraw{PlantInit::fixed, f, 0}, 3, rng) == f);
  CHECK_THROWS(draw_plant(PlantDraw{PlantInit::fixed, f, 0}, 4, rng));
  CHECK_THROWS(draw_plant(PlantDraw{PlantInit::sparse, {}, 65}, 64, rng));
}

TEST_CASE("random walk increments follow Q") {
  const Matrix R = toeplitz({1.0, 0.5, 0.25});
  const Matrix Q = build_q_mixture(0.3, R, 1.0);
  Plant p(Vector::Zero(3), matrix_drift(Q));
  Rng rng(3);
  Matrix S = Matrix::Zero(3, 3);
  const int n = 100000;
  Vector prev = p.weights();
  for (int i = 0; i < n; ++i) {
    p.evolve(rng);
    const Vector q = p.weights() - prev;
    prev = p.weights();
    S += q * q.transpose();
  }
  S /= n;
  CHECK((S - Q).norm() / Q.norm() < 0.05);

  Plant still(Vector::Ones(3), no_drift());
  still.evolve(rng);
  CHECK(still.weights() == Vector::Ones(3));

  // Semidefinite Q (rank one) still works.
  Vector v(3);
  v << 1, -1, 0.5;
  Plant rank1(Vector::Zero(3), matrix_drift(v * v.transpose()));
  rank1.evolve(rng);
  const Vector w = rank1.weights();
  CHECK(std::abs(w[0] + w[1]) < 1e-12);
}

TEST_CASE("noiseless samples are exact and changes switch on time") {
  Scenario sc;
  sc.input = white_input(4, 1.0);
  sc.plant.kind = PlantInit::gaussian;
  sc.noise_var = 0.0;
  sc.changes.push_back({500, PlantDraw{PlantInit::gaussian, {}, 0}});
  SignalSource src(sc, 9);
  Vector before;
  for (int n = 0; n < 1000; ++n) {
    const Sample& s = src.next();
    REQUIRE(s.d == s.u().dot(*s.w_o));
    if (n == 0) before = *s.w_o;
    if (n < 500) REQUIRE(*s.w_o == before);
    if (n == 500) CHECK(*s.w_o != before);
  }
}

TEST_CASE("delay line shifts") {
  DelayLine line(3);
  for (double x : {1.0, 2.0, 3.0, 4.0}) line.push(x);
  const auto v = line.view();
  CHECK(v[0] == 4.0);
  CHECK(v[1] == 3.0);
  CHECK(v[2] == 2.0);

  Scenario sc;
  sc.input = white_input(3, 1.0);
  sc.noise_var = 0.01;
  SignalSource src(sc, 4);
  const Vector u0 = src.next().u();
  const Vector u1 = src.next().u();
  CHECK(u1[1] == u0[0]);
  CHECK(u1[2] == u0[1]);
}

TEST_CASE("configured SNR and input covariance are reproduced") {
  Scenario sc;
  sc.input = toeplitz_input({1.0 / 7, 0.8 / 7, 0.64 / 7, 0.512 / 7, 0.4096 / 7, 0.32768 / 7, 0.262144 / 7});
  sc.plant.kind = PlantInit::gaussian;
  sc.snr_db = 20.0;
  SignalSource src(sc, 5);
  const Matrix R = sc.input.covariance();
  Matrix S = Matrix::Zero(7, 7);
  double clean = 0.0, noise = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Sample& s = src.next();
    S += s.u() * s.u().transpose();
    clean += s.clean * s.clean;
    noise += (s.d - s.clean) * (s.d - s.clean);
  }
  S /= n;
  CHECK((S - R).norm() / R.norm() < 0.05);
  CHECK(std::abs(to_db(clean / noise) - 20.0) < 0.2);
  const Vector& w = *src.next().w_o;
  CHECK(src.noise_var() == doctest::Approx(w.dot(R * w) / 100.0));
}

TEST_CASE("laplacian draws have unit variance") {
  Rng rng(2);
  double s2 = 0.0, s4 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = draw_unit(Distribution::laplacian, rng);
    s2 += x * x;
    s4 += x * x * x * x;
  }
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(s4 / n == doctest::Approx(6.0).epsilon(0.1));  // kurtosis of the Laplace law
}

TEST_CASE("scenario validation") {
  Scenario sc;
  sc.input = white_input(4, 1.0);
  CHECK_THROWS(validate(sc));  // no noise level
  sc.noise_var = 0.1;
  sc.snr_db = 10.0;
  CHECK_THROWS(validate(sc));
  sc.snr_db.reset();
  sc.changes = {{10, {}}, {5, {}}};
  CHECK_THROWS(validate(sc));
}
