#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dynent/lmi.hpp"
#include "dynent/tensor.hpp"

using namespace dynent;

TEST_CASE("scalar LMI: min y s.t. y >= 3") {
  LmiProblem p;
  int y = p.add_param();
  p.objective[y] = 1.0;
  CMat h(1, 1);
  h << -3.0;  // -y <= -3
  int b = p.add_block("lb", 1, h);
  p.add_term(b, y, 0, 0, -1.0);
  LmiSolution sol = solve_lmi(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(sol.y(y) == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("max eigenvalue as an LMI: min y s.t. y I >= A") {
  std::mt19937_64 rng(2);
  CMat a = random_hermitian(4, rng);
  double lmax = Eigen::SelfAdjointEigenSolver<CMat>(a).eigenvalues().maxCoeff();

  LmiProblem p;
  int y = p.add_param();
  p.objective[y] = 1.0;
  int b = p.add_block("dom", 4, -a);  // -yI <= -A
  for (int i = 0; i < 4; ++i) p.add_term(b, y, i, i, -1.0);
  LmiSolution sol = solve_lmi(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value == doctest::Approx(lmax).epsilon(1e-6));
}

TEST_CASE("equality-constrained LMI") {
  // min y0 + y1 s.t. y0 - y1 = 1, y0 >= 2, y1 >= 0
  LmiProblem p;
  int y0 = p.add_param();
  int y1 = p.add_param();
  p.objective[y0] = 1.0;
  p.objective[y1] = 1.0;
  CMat h(1, 1);
  h << -2.0;
  int b0 = p.add_block("lb0", 1, h);
  p.add_term(b0, y0, 0, 0, -1.0);
  CMat z = CMat::Zero(1, 1);
  int b1 = p.add_block("lb1", 1, z);
  p.add_term(b1, y1, 0, 0, -1.0);
  p.equalities.push_back({{{y0, 1.0}, {y1, -1.0}}, 1.0});
  LmiSolution sol = solve_lmi(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value == doctest::Approx(3.0).epsilon(1e-5));  // y0=2, y1=1
}

TEST_CASE("Hermitian variable helpers reconstruct consistently") {
  std::mt19937_64 rng(9);
  CMat g = random_hermitian(3, rng);
  for (int k = 0; k < 9; ++k) {
    CMat bk = herm_basis(3, k);
    CHECK(is_hermitian(bk));
    // inner coefficient equals Re tr(g bk)
    RVec c = lmi_inner_coeffs(3, g);
    double want = (g.adjoint() * bk).trace().real();
    CHECK(c(k) == doctest::Approx(want).epsilon(1e-12));
  }
  // herm_from_params is the inverse of coordinates
  RVec y = RVec::Random(9);
  CMat w = herm_from_params(y, 0, 3);
  for (int k = 0; k < 9; ++k) {
    double coord = (herm_basis(3, k).adjoint() * w).trace().real() /
                   (herm_basis(3, k).adjoint() * herm_basis(3, k))
                       .trace().real();
    CHECK(coord == doctest::Approx(y(k)).epsilon(1e-12));
  }
}

TEST_CASE("matrix variable: min tr(W) s.t. W >= G via map terms") {
  std::mt19937_64 rng(12);
  CMat g = random_hermitian(3, rng);
  // value = sum of positive eigenvalues? no: W >= G and W >= 0 absent; with
  // only W >= G the trace minimum is tr(G). Check that.
  LmiProblem p;
  int off = lmi_add_herm_params(p, 3);
  lmi_add_trace_objective(p, off, 3, 1.0);
  int b = p.add_block("dom", 3, -g);  // -W <= -G
  lmi_add_map_terms(p, b, off, 3, [](const CMat& x) { return -x; });
  LmiSolution sol = solve_lmi(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value == doctest::Approx(g.trace().real()).epsilon(1e-5));
  CMat w = herm_from_params(sol.y, off, 3);
  CHECK(min_eigenvalue(hermitize(w - g)) > -1e-5);
}

TEST_CASE("infeasible LMI reported as infeasible") {
  LmiProblem p;
  int y = p.add_param();
  p.objective[y] = 1.0;
  CMat h1(1, 1), h2(1, 1);
  h1 << -1.0;  // y >= 1
  h2 << -2.0;  // -y >= 2, i.e. y <= -2
  int b1 = p.add_block("a", 1, h1);
  p.add_term(b1, y, 0, 0, -1.0);
  int b2 = p.add_block("b", 1, h2);
  p.add_term(b2, y, 0, 0, 1.0);
  LmiSolution sol = solve_lmi(p);
  CHECK(sol.status == SolveStatus::infeasible);
}
