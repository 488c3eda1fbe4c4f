#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dynent/linalg.hpp"

using namespace dynent;

TEST_CASE("hermitize and is_hermitian") {
  CMat m(2, 2);
  m << Complex(1, 0), Complex(2, 1), Complex(0, 0), Complex(3, 0);
  CHECK(!is_hermitian(m));
  CMat h = hermitize(m);
  CHECK(is_hermitian(h));
  CHECK(h(0, 1) == std::conj(h(1, 0)));
}

TEST_CASE("trace_norm of a Hermitian matrix is the absolute eigenvalue sum") {
  CMat m(2, 2);
  m << 3, 0, 0, -4;
  CHECK(trace_norm(m) == doctest::Approx(7.0));
}

TEST_CASE("sqrt_psd squares back; inv_sqrt_psd on singular input") {
  std::mt19937_64 rng(11);
  DensityOperator rho = random_density(4, rng, 2);  // rank deficient
  CMat s = sqrt_psd(rho.matrix);
  CHECK((s * s - rho.matrix).cwiseAbs().maxCoeff() < 1e-10);
  CMat is = inv_sqrt_psd(rho.matrix);
  // is * rho * is is the support projector
  CMat p = is * rho.matrix * is;
  CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fidelity convention is squared") {
  // pure states: F = |<psi|phi>|^2
  CVec a(2), b(2);
  a << 1, 0;
  b << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  DensityOperator ra = pure_state(a, {2});
  DensityOperator rb = pure_state(b, {2});
  CHECK(fidelity(ra, rb) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fidelity(ra, ra) == doctest::Approx(1.0));
  // maximally mixed vs pure in dim d: F = 1/d
  DensityOperator mm = make_density(CMat::Identity(2, 2) / 2.0, {2});
  CHECK(fidelity(ra, mm) == doctest::Approx(0.5));
}

TEST_CASE("min_eigenvalue rejects non-Hermitian input") {
  CMat m(2, 2);
  m << 0, 1, 0, 0;
  CHECK_THROWS(min_eigenvalue(m));
  CMat h(2, 2);
  h << 1, 0, 0, -2;
  CHECK(min_eigenvalue(h) == doctest::Approx(-2.0));
}

TEST_CASE("random samplers are seeded and well formed") {
  std::mt19937_64 r1(5), r2(5), r3(6);
  CMat u1 = random_unitary(4, r1);
  CMat u2 = random_unitary(4, r2);
  CMat u3 = random_unitary(4, r3);
  CHECK((u1 - u2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((u1 - u3).cwiseAbs().maxCoeff() > 1e-3);
  CHECK((u1.adjoint() * u1 - CMat::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-12);

  DensityOperator rho = random_density(5, r1);
  CHECK_NOTHROW(rho.validate());
  CHECK(std::abs(rho.matrix.trace().real() - 1.0) < 1e-12);
}

TEST_CASE("density validation catches bad input") {
  CMat m(2, 2);
  m << 1.5, 0, 0, -0.5;  // trace 1 but not PSD
  DensityOperator d{m, {2}};
  CHECK_THROWS(d.validate());
}
