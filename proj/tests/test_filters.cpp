#include "afcomb/filters.hpp"

#include <doctest.h>

#include <random>

using namespace afc;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vector gaussian(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("predict is the inner product") {
  FilterState f = make_lms(2, 0.1);
  CHECK(predict(f, vec({3, 4})) == 0.0);
  f.w = vec({1, 2});
  CHECK(predict(f, vec({3, 4})) == 11.0);
  f.w = vec({0, 1});
  CHECK(predict(f, vec({7, -5})) == -5.0);
  CHECK_THROWS_AS(predict(f, vec({1, 2, 3})), DimensionError);
}

TEST_CASE("lms one step by hand") {
  FilterState f = make_lms(1, 0.5);
  const StepResult r = lms_adapt(f, vec({1}), 1.0);
  CHECK(r.y == 0.0);
  CHECK(r.e == 1.0);
  CHECK(f.w[0] == 0.5);

  f.w = vec({0.3});
  const StepResult z = lms_adapt(f, vec({2}), 0.6);
  CHECK(z.e == 0.0);
  CHECK(f.w[0] == 0.3);

  const StepResult u0 = lms_adapt(f, vec({0}), 1.7);
  CHECK(u0.y == 0.0);
  CHECK(u0.e == 1.7);
  CHECK(f.w[0] == 0.3);
}

TEST_CASE("nlms full projection") {
  FilterState f = make_nlms(2, 1.0, 0.0);
  nlms_adapt(f, vec({1, 1}), 2.0);
  CHECK(f.w[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.w[1] == doctest::Approx(1.0).epsilon(1e-15));

  Rng rng(3);
  FilterState g = make_nlms(5, 1.0, 0.0);
  g.w = gaussian(5, rng);
  const Vector u = gaussian(5, rng);
  nlms_adapt(g, u, 0.42);
  CHECK(0.42 - u.dot(g.w) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));

  const Vector before = g.w;
  nlms_adapt(g, u, u.dot(g.w));
  CHECK((g.w - before).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("error equals d minus y exactly") {
  Rng rng(11);
  for (FilterState f : {make_lms(4, 0.05), make_nlms(4, 0.5), make_rls(4, 0.99), make_za_nlms(4, 0.5, 1e-3)}) {
    for (int i = 0; i < 50; ++i) {
      const Vector u = gaussian(4, rng);
      const double d = u.sum();
      const StepResult r = adapt(f, u, d);
      CHECK(r.e == d - r.y);
    }
  }
}

TEST_CASE("rls one step by hand") {
  FilterState f = make_rls(1, 1.0, 1.0);
  const StepResult r = rls_adapt(f, vec({1}), 1.0);
  CHECK(r.y == 0.0);
  CHECK(f.w[0] == doctest::Approx(0.5));
  CHECK(f.P(0, 0) == doctest::Approx(0.5));

  FilterState g = make_rls(2, 0.9, 1.0);
  g.w = vec({0.2, -0.1});
  const Matrix P0 = g.P;
  rls_adapt(g, vec({0, 0}), 3.0);
  CHECK(g.w == vec({0.2, -0.1}));
  CHECK((g.P - P0 / 0.9).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rls matches the regularized least-squares solution") {
  Rng rng(5);
  const Eigen::Index m = 4;
  const Vector wo = gaussian(m, rng);
  const double delta = 1e-3;
  FilterState f = make_rls(static_cast<std::size_t>(m), 1.0, delta);
  Matrix A = delta * Matrix::Identity(m, m);
  Vector b = Vector::Zero(m);
  for (int n = 0; n < 12; ++n) {
    const Vector u = gaussian(m, rng);
    const double d = u.dot(wo);
    rls_adapt(f, u, d);
    A += u * u.transpose();
    b += d * u;
    const Vector ls = A.ldlt().solve(b);
    CHECK((f.w - ls).cwiseAbs().maxCoeff() < 1e-9);
  }

  // A nearly unregularized start interpolates the plant after M independent regressors.
  FilterState g = make_rls(static_cast<std::size_t>(m), 1.0, 1e-12);
  for (int n = 0; n < m; ++n) {
    const Vector u = gaussian(m, rng);
    rls_adapt(g, u, u.dot(wo));
  }
  CHECK((g.w - wo).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("rls inverse correlation stays symmetric") {
  Rng rng(9);
  FilterState f = make_rls(8, 0.995);
  double x = 0.0;
  std::normal_distribution<double> g;
  Vector u = Vector::Zero(8);
  for (int n = 0; n < 20000; ++n) {
    x = 0.9 * x + g(rng);
    u.tail(7) = u.head(7).eval();
    u[0] = x;
    rls_adapt(f, u, 0.3 * x + 0.01 * g(rng));
    REQUIRE(symmetry_residual(f) < 1e-8);
    REQUIRE(f.P.diagonal().minCoeff() > 0.0);
  }
}

TEST_CASE("zero attraction") {
  FilterState f = make_za_nlms(2, 0.5, 1e-6);
  za_nlms_adapt(f, vec({0, 0}), 3.0);
  CHECK(f.w == vec({0, 0}));

  FilterState g = make_za_nlms(2, 0.5, 0.1);
  g.w = vec({0.5, -0.5});
  za_nlms_adapt(g, vec({0, 0}), 1.0);
  CHECK(g.w[0] == doctest::Approx(0.4));
  CHECK(g.w[1] == doctest::Approx(-0.4));
}

TEST_CASE("za-nlms with rho = 0 is bitwise nlms") {
  Rng rng(21);
  FilterState a = make_za_nlms(6, 0.7, 0.0, 1e-6);
  FilterState b = make_nlms(6, 0.7, 1e-6);
  for (int n = 0; n < 5000; ++n) {
    const Vector u = gaussian(6, rng);
    const double d = u[0] - 0.5 * u[3];
    const StepResult ra = adapt(a, u, d);
    const StepResult rb = adapt(b, u, d);
    REQUIRE(ra.y == rb.y);
    REQUIRE(a.w == b.w);
  }
}

TEST_CASE("lms and nlms stay finite over a million steps") {
  Rng rng(1);
  std::normal_distribution<double> g;
  FilterState lms = make_lms(8, 0.02);
  FilterState nlms = make_nlms(8, 1.5);
  Vector u = Vector::Zero(8);
  Vector wo(8);
  wo << 1, -0.5, 0.25, 0, 0, 0.1, 0, -0.2;
  for (int n = 0; n < 1000000; ++n) {
    u.tail(7) = u.head(7).eval();
    u[0] = g(rng);
    const double d = u.dot(wo) + 0.1 * g(rng);
    lms_adapt(lms, u, d);
    nlms_adapt(nlms, u, d);
  }
  CHECK(lms.w.allFinite());
  CHECK(nlms.w.allFinite());
  CHECK((lms.w - wo).norm() < 0.1);
  CHECK((nlms.w - wo).norm() < 0.3);
}

TEST_CASE("identical inputs give identical trajectories") {
  auto run = [] {
    Rng rng(77);
    FilterState f = make_rls(3, 0.98);
    for (int n = 0; n < 1000; ++n) {
      const Vector u = gaussian(3, rng);
      adapt(f, u, u[1]);
    }
    return f;
  };
  const FilterState a = run();
  const FilterState b = run();
  CHECK(a.w == b.w);
  CHECK(a.P == b.P);
}

TEST_CASE("constructors reject bad parameters") {
  CHECK_THROWS(make_lms(3, 0.0));
  CHECK_THROWS(make_nlms(3, -1.0));
  CHECK_THROWS(make_rls(3, 0.0));
  CHECK_THROWS(make_rls(3, 1.5));
  CHECK_THROWS(make_za_nlms(3, 0.5, -1.0));
}
