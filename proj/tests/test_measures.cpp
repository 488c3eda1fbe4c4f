#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dynent/channel.hpp"
#include "dynent/measures.hpp"

using namespace dynent;

namespace {
DensityOperator mes_input(const BipartiteChannel& n) {
  int din = n.d_in();
  CVec v = CVec::Zero(static_cast<long>(din) * din);
  for (int i = 0; i < din; ++i)
    v(static_cast<long>(i) * din + i) = 1.0 / std::sqrt(double(din));
  return pure_state(v, {n.dims[0], n.dims[1], din});
}
}  // namespace

TEST_CASE("diamond distance known values") {
  BipartiteChannel id = identity_channel(2, 1);
  CMat x(2, 2);
  x << 0, 1, 1, 0;
  BipartiteChannel xs = from_kraus({x}, {2, 1, 2, 1});
  CHECK(diamond_distance(id, id) < 1e-7);
  CHECK(diamond_distance(id, xs) == doctest::Approx(1.0).epsilon(1e-6));
  // halfway dephasing-type mixture sits strictly between
  BipartiteChannel m = mix_channels({id, xs}, {0.5, 0.5});
  double d = diamond_distance(id, m);
  CHECK(d == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("dmax: support mismatch is infinite, depolarizing reference finite") {
  BipartiteChannel f = swap_channel(2);
  BipartiteChannel dep = depolarizing_channel(2, 2, 1.0);
  MeasureReport inf = dmax(dep, f);  // swap Choi is rank one
  CHECK(inf.infinite);
  MeasureReport fin = dmax(f, dep);
  CHECK(!fin.infinite);
  CHECK(fin.value == doctest::Approx(4.0).epsilon(1e-6));  // lambda = 16
}

TEST_CASE("robustness of the qubit swap is 3 on every oracle") {
  BipartiteChannel f = swap_channel(2);
  RobustnessResult rs = standard_robustness(f);
  RobustnessResult rg = generalized_robustness(f);
  CHECK(rs.s == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(rg.s == doctest::Approx(3.0).epsilon(1e-5));
  TwirlStructure ts = standard_twirl_structure(f.dims);
  RobustnessResult rc = covariant_robustness(f, ts, RobustKind::standard);
  CHECK(rc.s == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(rc.report.bound_kind == rs.report.bound_kind);

  // the decomposition witness: (J + s M)/(1+s) must be PPT
  BipartiteChannel mix = robustness_mix(rs, f);
  CMat w = (f.choi + rs.s * mix.choi) / (1.0 + rs.s);
  CHECK(min_eigenvalue(choi_partial_transpose(hermitize(w), f.dims), 1e-7) >
        -1e-6);

  // D_max against the PPT mixture reproduces the log-robustness
  BipartiteChannel mixture = make_channel(hermitize(w), f.dims);
  MeasureReport d = dmax(f, mixture);
  CHECK(d.value == doctest::Approx(std::log2(1.0 + rs.s)).epsilon(1e-5));
}

TEST_CASE("robustness of a PPT channel is zero") {
  BipartiteChannel dep = depolarizing_channel(2, 2, 1.0);
  CHECK(standard_robustness(dep).s < 1e-5);
  CHECK(log_robustness(dep, RobustKind::generalized) < 1e-5);
}

TEST_CASE("Nielsen closed form agrees with the SDP for the swap") {
  BipartiteChannel f = swap_channel(2);
  // swap unitary on A x B
  CMat u = CMat::Zero(4, 4);
  u(0, 0) = u(3, 3) = 1;
  u(1, 2) = u(2, 1) = 1;
  NielsenResult nr = nielsen_unitary_robustness(u, 2, 2);
  REQUIRE(nr.applicable);
  CHECK(nr.value == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(nr.value ==
        doctest::Approx(standard_robustness(f).s).epsilon(1e-4));
}

TEST_CASE("Nielsen hypothesis rejected for a generic unitary") {
  // Every 2x2 unitary has unitary Schmidt factors (Cartan form), so a
  // generic rejection needs unequal local dims.
  std::mt19937_64 rng(15);
  CMat u = random_unitary(6, rng);
  NielsenResult nr = nielsen_unitary_robustness(u, 2, 3);
  CHECK(!nr.applicable);
}

TEST_CASE("hypothesis testing divergence basics") {
  DensityOperator mes = maximally_entangled(2);
  DensityOperator mm = make_density(CMat::Identity(4, 4) / 4.0, {2, 2});
  MeasureReport d0 = hypothesis_testing_divergence(mes, mm, 0.0);
  CHECK(d0.value == doctest::Approx(2.0).epsilon(1e-5));
  MeasureReport de = hypothesis_testing_divergence(mes, mm, 0.5);
  CHECK(de.value >= d0.value - 1e-6);  // smoothing can only help
  MeasureReport self = hypothesis_testing_divergence(mes, mes, 0.0);
  CHECK(std::abs(self.value) < 1e-5);
}

TEST_CASE("E_H at the MES input of the swap is 2, and the dualization gate "
          "holds on random instances") {
  BipartiteChannel f = swap_channel(2);
  EhResult r = eh_fixed_input(f, mes_input(f), 0.0);
  CHECK(r.report.value == doctest::Approx(2.0).epsilon(1e-5));
  // the optimal test evaluated through the primal inner problem agrees
  double inner = eh_inner_primal(f, mes_input(f), r.Q);
  CHECK(inner == doctest::Approx(std::exp2(-r.report.value)).epsilon(1e-4));

  std::mt19937_64 rng(77);
  for (int t = 0; t < 3; ++t) {
    BipartiteChannel n = random_channel({2, 2, 2, 2}, rng());
    EhResult e = eh_fixed_input(n, mes_input(n), 0.0);
    if (e.report.infinite) continue;
    double p = eh_inner_primal(n, mes_input(n), e.Q);
    // Q* is feasible for the primal, so its value cannot beat the optimum by
    // more than solver slack
    CHECK(p >= std::exp2(-e.report.value) - 1e-5);
    CHECK(p <= std::exp2(-e.report.value) + 1e-4);
  }
}

TEST_CASE("eh_maximize never beats the PPT bound and grows with epsilon") {
  BipartiteChannel f = swap_channel(2);
  EhResult a = eh_maximize(f, 0.0, 2, 3);
  CHECK(a.report.value == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(a.report.bound_kind == "heuristic");
  EhResult b = eh_maximize(f, 0.1, 2, 3);
  CHECK(b.report.value >= a.report.value - 1e-5);
}

TEST_CASE("mes_overlap_ppt equals 1/K and dominates sampled separables") {
  for (int k : {2, 3}) {
    double v = mes_overlap_ppt(k);
    CHECK(v == doctest::Approx(1.0 / k).epsilon(1e-6));
  }
  // sampled separable states never exceed the K=2 bound
  std::mt19937_64 rng(5);
  DensityOperator mes = maximally_entangled(2);
  for (int t = 0; t < 20; ++t) {
    DensityOperator a = random_density(2, rng);
    DensityOperator b = random_density(2, rng);
    CMat sep = kron(a.matrix, b.matrix);
    double ov = (mes.matrix.adjoint() * sep).trace().real();
    CHECK(ov <= 0.5 + 1e-9);
  }
}

TEST_CASE("smoothed log-robustness decreases with epsilon and falls back at 0") {
  BipartiteChannel f = swap_channel(2);
  SmoothedResult s0 = smoothed_log_robustness(f, 0.0, RobustKind::standard);
  CHECK(s0.report.value == doctest::Approx(2.0).epsilon(1e-5));
  SmoothedResult s1 = smoothed_log_robustness(f, 0.1, RobustKind::standard);
  CHECK(s1.report.value <= s0.report.value + 1e-6);
  CHECK(s1.report.value > 1.0);  // still visibly entangled
  // the optimizer stays inside the diamond ball
  BipartiteChannel nprime = make_channel(
      hermitize(s1.Jprime / s1.Jprime.trace().real()), f.dims);
  CHECK(diamond_distance(f, nprime) <= 0.1 + 1e-4);
}

TEST_CASE("liberal ball contains the diamond ball") {
  BipartiteChannel f = swap_channel(2);
  DensityOperator phi = mes_input(f);
  double eps = 0.1;
  SmoothedResult dia = smoothed_log_robustness(f, eps, RobustKind::standard);
  SmoothedResult lib = liberal_smoothed_log_robustness(f, phi, eps);
  // liberal smoothing minimizes over a superset, so it can only be smaller
  CHECK(lib.report.value <= dia.report.value + 1e-5);
}

TEST_CASE("fidelity/diamond transfer inequalities on random pairs") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 5; ++t) {
    BipartiteChannel a = random_channel({2, 2, 2, 2}, rng());
    BipartiteChannel b = random_channel({2, 2, 2, 2}, rng());
    TransferCheck tc = fidelity_diamond_transfer_check(a, b, 4, rng());
    CHECK(tc.fidelity_slack <= 1e-8);
    CHECK(tc.choi_slack <= 1e-8);
  }
}

TEST_CASE("twirl machinery") {
  BipartiteChannel f = swap_channel(2);
  TwirlStructure ts = standard_twirl_structure(f.dims);
  TwirlDecomposition dec = twirl_project(f.choi, ts);
  CHECK(dec.residual < 1e-10);  // the swap is already covariant
  CHECK(dec.coeffs.size() == 4);
  CMat recon = twirl_reconstruct(ts, dec.coeffs);
  CHECK((recon - f.choi).cwiseAbs().maxCoeff() < 1e-10);

  // projecting a non-covariant channel is idempotent
  BipartiteChannel n = random_channel({2, 2, 2, 2}, 41);
  TwirlDecomposition d1 = twirl_project(n.choi, ts);
  CHECK(d1.residual > 1e-3);  // generic channels are not covariant
  CMat p1 = twirl_reconstruct(ts, d1.coeffs);
  TwirlDecomposition d2 = twirl_project(p1, ts);
  CHECK(d2.residual < 1e-10);
  for (int v = 0; v < 4; ++v)
    CHECK(d1.coeffs[v] == doctest::Approx(d2.coeffs[v]).epsilon(1e-10));
}

TEST_CASE("covariant LP matches the dense SDP on a covariant mixture") {
  BipartiteChannel f = swap_channel(2);
  long d = f.choi.rows();
  CMat g = (CMat::Identity(d, d) - f.choi) / double(d - 1);
  BipartiteChannel mixed =
      make_channel(0.8 * f.choi + 0.2 * g, f.dims);
  TwirlStructure ts = standard_twirl_structure(f.dims);
  RobustnessResult lp = covariant_robustness(mixed, ts, RobustKind::standard);
  RobustnessResult sdp = standard_robustness(mixed);
  CHECK(lp.s == doctest::Approx(sdp.s).epsilon(1e-4));
}

TEST_CASE("report serialization carries the caveat fields") {
  BipartiteChannel f = swap_channel(2);
  RobustnessResult rs = standard_robustness(f);
  std::string j = report_to_json(rs.report);
  CHECK(j.find("bound_kind") != std::string::npos);
  CHECK(j.find("solver_status") != std::string::npos);
  CHECK(j.find("gap") != std::string::npos);
}
