#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dynent/channel.hpp"
#include "dynent/measures.hpp"
#include "dynent/superchannel.hpp"

using namespace dynent;

namespace {
double maxdiff(const CMat& a, const CMat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}
}  // namespace

TEST_CASE("compose_choi reproduces channel composition") {
  std::mt19937_64 rng(2);
  BipartiteChannel a = random_channel({2, 2, 2, 2}, rng());
  BipartiteChannel id = identity_channel(2, 2);
  // composing with the identity is the identity of composition
  CMat j = compose_choi(a.choi, 4, 4, id.choi, 4);
  CHECK(maxdiff(j, a.choi) < 1e-12);
  CMat j2 = compose_choi(id.choi, 4, 4, a.choi, 4);
  CHECK(maxdiff(j2, a.choi) < 1e-12);

  // against direct application on a random input with reference
  BipartiteChannel b = random_channel({2, 2, 2, 2}, rng());
  CMat jc = compose_choi(a.choi, 4, 4, b.choi, 4);
  BipartiteChannel comp = make_channel(hermitize(jc), {2, 2, 2, 2});
  DensityOperator in = random_density(16, rng);
  in.dims = {2, 2, 4};
  DensityOperator mid = apply(a, in);
  DensityOperator want = apply(b, mid);
  DensityOperator got = apply(comp, in);
  CHECK(maxdiff(got.matrix, want.matrix) < 1e-10);
}

TEST_CASE("measure-and-prepare apply is affine in the probe") {
  BipartiteChannel f = swap_channel(2);
  RobustnessResult rr = standard_robustness(f);
  BipartiteChannel mix = robustness_mix(rr, f);
  Superchannel th = dilution_superchannel(f, mix, rr.s, 2);

  std::mt19937_64 rng(4);
  BipartiteChannel e1 = random_channel({2, 2, 2, 2}, rng());
  BipartiteChannel e2 = random_channel({2, 2, 2, 2}, rng());
  BipartiteChannel em = mix_channels({e1, e2}, {0.3, 0.7});
  CMat lhs = apply_superchannel(th, em).choi;
  CMat rhs = 0.3 * apply_superchannel(th, e1).choi +
             0.7 * apply_superchannel(th, e2).choi;
  CHECK(maxdiff(lhs, rhs) < 1e-10);
}

TEST_CASE("dilution superchannel reproduces its target exactly on the unit") {
  BipartiteChannel f = swap_channel(2);
  RobustnessResult rr = standard_robustness(f);
  BipartiteChannel mix = robustness_mix(rr, f);
  Superchannel th = dilution_superchannel(f, mix, rr.s, 2);
  BipartiteChannel sim = apply_superchannel(th, golden_unit(2));
  CHECK(maxdiff(sim.choi, f.choi) < 1e-9);

  SUBCASE("premise violations throw") {
    CHECK_THROWS(dilution_superchannel(f, mix, rr.s, 1));     // k too small
    CHECK_THROWS(dilution_superchannel(f, f, 0.5, 2));        // not PPT
  }
}

TEST_CASE("pre/post realization agrees with the measure-and-prepare form") {
  BipartiteChannel f = swap_channel(2);
  RobustnessResult rr = standard_robustness(f);
  Superchannel th = dilution_superchannel(f, robustness_mix(rr, f), rr.s, 2);
  Superchannel tpp = to_pre_post(th);
  CHECK(tpp.form == Superchannel::Form::pre_post);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 3; ++t) {
    BipartiteChannel probe = random_channel({2, 2, 2, 2}, rng());
    CMat a = apply_superchannel(th, probe).choi;
    CMat b = apply_superchannel(tpp, probe).choi;
    CHECK(maxdiff(a, b) < 1e-8);
  }
}

TEST_CASE("distillation of the swap recovers the unit exactly") {
  BipartiteChannel f = swap_channel(2);
  EhResult eh = eh_maximize(f, 0.0, 1, 5);
  Superchannel th = distillation_superchannel(eh.psi, eh.Q, 2, f.dims);
  BipartiteChannel out = apply_superchannel(th, f);
  CHECK(diamond_distance(out, golden_unit(2)) < 1e-6);
}

TEST_CASE("distill harness on the swap hits the sandwich") {
  DistillReport r = distill_bound_harness(swap_channel(2), 0.0, 1, 5);
  CHECK(r.eh_eps == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(r.k == 2);
  CHECK(r.realized == doctest::Approx(2.0));
  CHECK(r.lower == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(r.diamond_err < 1e-6);
  CHECK(r.eh_two_eps >= r.eh_eps - 1e-6);
}

TEST_CASE("cost harness sandwich on the swap and a random channel") {
  CostReport c = cost_bound_harness(swap_channel(2), 0.0, 3, 2);
  CHECK(c.lower == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(c.realized == doctest::Approx(2.0));
  CHECK(c.upper == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(c.sim_residual < 1e-9);
  CHECK(c.cert.pass);

  BipartiteChannel n = random_channel({2, 2, 2, 2}, 19);
  CostReport cr = cost_bound_harness(n, 0.0, 3, 2);
  CHECK(cr.realized >= cr.lower - 1e-5);
  CHECK(cr.realized <= cr.upper + 1e-5);
  CHECK(cr.cert.pass);
}

TEST_CASE("catalysis on the swap with an F^2 catalyst") {
  auto [th, rep] = catalytic_dilution(swap_channel(2), 2, 1.0, 0.0);
  CHECK(rep.k == 2);
  CHECK(rep.realized == doctest::Approx(2.0));
  CHECK(rep.realized >= rep.lower - 1e-5);
  CHECK(rep.realized <= rep.upper + 1e-5);
  CHECK(rep.miss_robustness <= 1.0 / 3.0 + 1e-6);
  // the catalyst input reproduces N (x) F^l exactly
  BipartiteChannel unit =
      tensor_channels(golden_unit(rep.k), swap_channel(2));
  BipartiteChannel hit = tensor_channels(swap_channel(2), swap_channel(2));
  BipartiteChannel sim = apply_superchannel(th, unit);
  CHECK(maxdiff(sim.choi, hit.choi) < 1e-8);

  CHECK_THROWS(catalytic_dilution(swap_channel(2), 2, 0.1, 0.0));  // l^2 < 1+1/delta
}

TEST_CASE("twisted twirl fixes the unit, is idempotent, has rank-4 image") {
  BipartiteChannel f = swap_channel(2);
  BipartiteChannel tf = twisted_twirl(f);
  CHECK(maxdiff(tf.choi, f.choi) < 1e-10);
  std::mt19937_64 rng(23);
  for (int t = 0; t < 3; ++t) {
    BipartiteChannel n = random_channel({2, 2, 2, 2}, rng());
    BipartiteChannel tn = twisted_twirl(n);
    BipartiteChannel ttn = twisted_twirl(tn);
    CHECK(maxdiff(tn.choi, ttn.choi) < 1e-10);
    TwirlStructure ts = standard_twirl_structure(n.dims);
    CHECK(twirl_project(tn.choi, ts).residual < 1e-10);
  }
}

TEST_CASE("partial pair twirl pins the unit-overlap coefficient") {
  // pinching the (A0:B1),(B0:A1) pairs of the swap leaves it fixed
  BipartiteChannel f = swap_channel(2);
  TwirlStructure ts = standard_twirl_structure(f.dims);
  CMat p = partial_pair_twirl(f.choi, ts.dims, ts.pairs);
  CHECK(maxdiff(p, f.choi) < 1e-12);

  // on a mixture, the all-Phi coefficient equals the hit probability
  long d = f.choi.rows();
  CMat g = (CMat::Identity(d, d) - f.choi) / double(d - 1);
  CMat mixj = 0.9 * f.choi + 0.1 * g;
  CMat proj = kron(twirl_basis_projector(ts, 0), CMat::Identity(1, 1));
  double overlap = (twirl_basis_projector(ts, 0).adjoint() * mixj)
                       .trace().real();
  CHECK(overlap == doctest::Approx(0.9).epsilon(1e-8));
  (void)proj;
}

TEST_CASE("seppsc certificate rejects a resource-creating map") {
  // a 'superchannel' that always outputs the swap is not free
  BipartiteChannel f = swap_channel(2);
  CMat q = CMat::Zero(16, 16);  // probability 0: always miss = swap
  Superchannel bad = make_measure_and_prepare(q, f, f, {2, 2, 2, 2});
  SeppscCertificate cert = seppsc_certify(bad, 2, 0.0, 3);
  CHECK(!cert.pass);
  CHECK(cert.max_output_robustness > 2.9);
  CHECK(!cert.worst_witness.empty());
}

TEST_CASE("monotonicity of robustness under sampled free superchannels") {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 3; ++t) {
    BipartiteChannel n = random_channel({2, 2, 2, 2}, rng());
    Superchannel th = random_seppsc({2, 2, 2, 2}, rng());
    double before = log_robustness(n, RobustKind::generalized);
    double after =
        log_robustness(apply_superchannel(th, n), RobustKind::generalized);
    CHECK(after <= before + 1e-5);
  }
}

TEST_CASE("E_H monotone under a unitary-pre free superchannel") {
  BipartiteChannel n = random_channel({2, 2, 2, 2}, 57);
  Superchannel th = random_unitary_pre_seppsc({2, 2, 2, 2}, 58);
  BipartiteChannel out = apply_superchannel(th, n);
  DensityOperator mes = [&] {
    CVec v = CVec::Zero(16);
    for (int i = 0; i < 4; ++i) v(i * 4 + i) = 0.5;
    return pure_state(v, {2, 2, 4});
  }();
  EhResult lhs = eh_fixed_input(out, mes, 0.0);
  DensityOperator pulled = pre_pullback(th, mes);
  EhResult rhs = eh_maximize(n, 0.0, 1, 9, {pulled});
  CHECK(lhs.report.value <= rhs.report.value + 1e-5);
}

TEST_CASE("superchannel JSON round trip in both forms") {
  BipartiteChannel f = swap_channel(2);
  RobustnessResult rr = standard_robustness(f);
  Superchannel th = dilution_superchannel(f, robustness_mix(rr, f), rr.s, 2);
  Superchannel rt = superchannel_from_json(superchannel_to_json(th));
  CHECK(maxdiff(rt.q_eff, th.q_eff) < 1e-12);
  CHECK(maxdiff(rt.hit.choi, th.hit.choi) < 1e-12);

  Superchannel pp = random_seppsc({2, 2, 2, 2}, 3);
  Superchannel rt2 = superchannel_from_json(superchannel_to_json(pp));
  CHECK(maxdiff(rt2.pre.choi, pp.pre.choi) < 1e-12);
  CHECK(maxdiff(rt2.post.choi, pp.post.choi) < 1e-12);
  CHECK(rt2.mem_a == pp.mem_a);
}

TEST_CASE("structural validation catches inconsistent dims") {
  BipartiteChannel f = swap_channel(2);
  CMat q = CMat::Identity(16, 16);
  CHECK_THROWS(make_measure_and_prepare(2.0 * q, f, f, {2, 2, 2, 2}));
  CHECK_THROWS(make_measure_and_prepare(q, f, f, {2, 2, 2, 3}));
}
