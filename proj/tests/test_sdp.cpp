#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "dynent/sdp.hpp"

using namespace dynent;

namespace {

// min tr(C X) s.t. tr(X) = 1, X >= 0  -> smallest eigenvalue of C.
HermitianSdp min_eig_problem(const CMat& c) {
  HermitianSdp p;
  int b = p.add_block("x", static_cast<int>(c.rows()));
  p.set_objective(b, c);
  auto& con = p.add_constraint(1.0);
  HermitianSdp::add_dense(con, b, CMat::Identity(c.rows(), c.cols()));
  return p;
}

}  // namespace

TEST_CASE("minimum eigenvalue SDP with a complex objective") {
  CMat c(2, 2);
  c << 2.0, Complex(0, -1), Complex(0, 1), 2.0;  // eigenvalues 1 and 3
  SdpSolution sol = solve(min_eig_problem(c));
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(verify(min_eig_problem(c), sol, 1e-5).ok());
}

TEST_CASE("maximize flag") {
  CMat c(2, 2);
  c << 1, 0, 0, 5;
  HermitianSdp p = min_eig_problem(c);
  p.maximize = true;
  SdpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("free variables: linear program embedded") {
  // min u  s.t.  x00 + u = 2, x00 >= 0  -> unbounded below? no: u = 2 - x00,
  // minimizing u drives x00 up; add x00 <= 1 via a slack block.
  HermitianSdp p;
  int b = p.add_block("x", 1);
  int s = p.add_block("slack", 1);
  p.num_free = 1;
  p.free_objective = RVec::Ones(1);
  auto& c1 = p.add_constraint(2.0);  // x + u = 2
  c1.entries.push_back({b, 0, 0, 1.0});
  c1.free_entries.push_back({0, 1.0});
  auto& c2 = p.add_constraint(1.0);  // x + slack = 1
  c2.entries.push_back({b, 0, 0, 1.0});
  c2.entries.push_back({s, 0, 0, 1.0});
  SdpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.free_values(0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("infeasible problem is certified") {
  HermitianSdp p;
  int b = p.add_block("x", 1);
  auto& c1 = p.add_constraint(-1.0);  // x = -1 with x >= 0
  c1.entries.push_back({b, 0, 0, 1.0});
  SdpSolution sol = solve(p);
  CHECK(sol.status == SolveStatus::infeasible);
}

TEST_CASE("unbounded problem is certified") {
  HermitianSdp p;
  int b = p.add_block("x", 2);
  CMat c = CMat::Zero(2, 2);
  c(0, 0) = -1.0;  // push x00 to infinity
  p.set_objective(b, c);
  auto& c1 = p.add_constraint(1.0);  // only constrains x11
  c1.entries.push_back({b, 1, 1, 1.0});
  SdpSolution sol = solve(p);
  CHECK(sol.status == SolveStatus::unbounded);
}

TEST_CASE("verify flags corrupted certificates") {
  CMat c(2, 2);
  c << 1, 0, 0, 3;
  HermitianSdp p = min_eig_problem(c);
  SdpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);

  SUBCASE("corrupted primal flags feasibility") {
    SdpSolution bad = sol;
    bad.primal[0](0, 0) += 0.1;
    VerifyReport r = verify(p, bad, 1e-5);
    CHECK(!r.ok());
    bool found = false;
    for (const auto& f : r.flags)
      if (f.find("primal") != std::string::npos) found = true;
    CHECK(found);
  }
  SUBCASE("perturbed value flags the duality gap") {
    SdpSolution bad = sol;
    bad.value += 1e-4;  // 10x the tolerance
    VerifyReport r = verify(p, bad, 1e-5);
    CHECK(!r.ok());
    bool found = false;
    for (const auto& f : r.flags)
      if (f.find("gap") != std::string::npos) found = true;
    CHECK(found);
  }
}

TEST_CASE("well-formedness checks") {
  HermitianSdp p;
  int b = p.add_block("x", 2);
  auto& c1 = p.add_constraint(0.0);
  c1.entries.push_back({b, 0, 5, 1.0});  // column out of range
  CHECK_THROWS(p.check_well_formed());
}

TEST_CASE("dump emits the documented text format") {
  CMat c(1, 1);
  c << 1;
  HermitianSdp p = min_eig_problem(c);
  std::ostringstream os;
  dump(p, os);
  std::string text = os.str();
  CHECK(text.find("hermitian-sdp") != std::string::npos);
  CHECK(text.find("block") != std::string::npos);
  CHECK(text.find("con ") != std::string::npos);
}
