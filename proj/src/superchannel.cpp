#include "dynent/superchannel.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dynent {

namespace {

// Clamp small negative eigenvalues and renormalize the trace; used wherever a
// solver-produced Choi is promoted to a channel.
BipartiteChannel clean_channel(const CMat& j, const std::array<int, 4>& dims,
                               double neg_tol = 1e-5) {
  CMat h = hermitize(j);
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  RVec ev = es.eigenvalues();
  for (long i = 0; i < ev.size(); ++i) {
    if (ev(i) < -neg_tol)
      throw std::runtime_error("clean_channel: Choi not PSD within tolerance");
    if (ev(i) < 0.0) ev(i) = 0.0;
  }
  double tr = ev.sum();
  if (tr <= 0.0) throw std::runtime_error("clean_channel: zero trace");
  CMat out = es.eigenvectors() * (ev / tr).asDiagonal() *
             es.eigenvectors().adjoint();
  BipartiteChannel c;
  c.choi = out;
  c.dims = dims;
  c.validate(1e-5);
  return c;
}

void check_same_dims(const BipartiteChannel& a, const BipartiteChannel& b,
                     const char* what) {
  if (a.dims != b.dims)
    throw std::invalid_argument(std::string(what) + ": dims mismatch");
}

}  // namespace

void Superchannel::validate() const {
  for (int d : slot_dims)
    if (d < 1) throw std::invalid_argument("superchannel: bad slot dims");
  for (int d : out_dims)
    if (d < 1) throw std::invalid_argument("superchannel: bad out dims");
  if (form == Form::measure_and_prepare) {
    long dslot = static_cast<long>(slot_dims[0]) * slot_dims[1] *
                 slot_dims[2] * slot_dims[3];
    if (q_eff.rows() != dslot || q_eff.cols() != dslot)
      throw std::invalid_argument("superchannel: q_eff dimension mismatch");
    if (!is_hermitian(q_eff, 1e-8))
      throw std::invalid_argument("superchannel: q_eff not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(q_eff);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-7 || hi > 1.0 + 1e-7)
      throw std::invalid_argument(
          "superchannel: q_eff spectrum outside [0,1]");
    hit.validate(1e-5);
    miss.validate(1e-5);
    if (hit.dims != out_dims || miss.dims != out_dims)
      throw std::invalid_argument("superchannel: hit/miss dims != out dims");
  } else {
    pre.validate(1e-5);
    post.validate(1e-5);
    std::array<int, 4> want_pre = {out_dims[0], out_dims[1],
                                   slot_dims[0] * mem_a, slot_dims[1] * mem_b};
    std::array<int, 4> want_post = {slot_dims[2] * mem_a, slot_dims[3] * mem_b,
                                    out_dims[2], out_dims[3]};
    if (pre.dims != want_pre)
      throw std::invalid_argument("superchannel: pre dims inconsistent");
    if (post.dims != want_post)
      throw std::invalid_argument("superchannel: post dims inconsistent");
  }
}

Superchannel make_measure_and_prepare(const CMat& q_eff,
                                      const BipartiteChannel& hit,
                                      const BipartiteChannel& miss,
                                      const std::array<int, 4>& slot_dims) {
  check_same_dims(hit, miss, "make_measure_and_prepare");
  Superchannel t;
  t.form = Superchannel::Form::measure_and_prepare;
  t.slot_dims = slot_dims;
  t.out_dims = hit.dims;
  t.q_eff = hermitize(q_eff);
  t.hit = hit;
  t.miss = miss;
  t.validate();
  return t;
}

Superchannel make_pre_post(const BipartiteChannel& pre,
                           const BipartiteChannel& post,
                           const std::array<int, 4>& slot_dims, int mem_a,
                           int mem_b) {
  Superchannel t;
  t.form = Superchannel::Form::pre_post;
  t.slot_dims = slot_dims;
  t.out_dims = {pre.dims[0], pre.dims[1], post.dims[2], post.dims[3]};
  t.pre = pre;
  t.post = post;
  t.mem_a = mem_a;
  t.mem_b = mem_b;
  t.validate();
  return t;
}

CMat compose_choi(const CMat& j1, int din, int dmid, const CMat& j2,
                  int dout) {
  if (j1.rows() != static_cast<long>(din) * dmid ||
      j2.rows() != static_cast<long>(dmid) * dout)
    throw std::invalid_argument("compose_choi: dimension mismatch");
  long dt = static_cast<long>(din) * dout;
  CMat r = CMat::Zero(dt, dt);
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < din; ++i)
    for (int o = 0; o < dout; ++o)
      for (int i2 = 0; i2 < din; ++i2)
        for (int o2 = 0; o2 < dout; ++o2) {
          Complex acc = 0.0;
          for (int m2 = 0; m2 < dmid; ++m2)
            for (int m = 0; m < dmid; ++m)
              acc += j1(static_cast<long>(i) * dmid + m2,
                        static_cast<long>(i2) * dmid + m) *
                     j2(static_cast<long>(m2) * dout + o,
                        static_cast<long>(m) * dout + o2);
          r(static_cast<long>(i) * dout + o,
            static_cast<long>(i2) * dout + o2) = double(dmid) * acc;
        }
  return r;
}

BipartiteChannel apply_superchannel(const Superchannel& theta,
                                    const BipartiteChannel& e) {
  theta.validate();
  if (e.dims != theta.slot_dims)
    throw std::invalid_argument("apply_superchannel: slot dims mismatch");
  if (theta.form == Superchannel::Form::measure_and_prepare) {
    double p = (theta.q_eff.adjoint() * e.choi).trace().real();
    p = std::min(1.0, std::max(0.0, p));
    CMat j = p * theta.hit.choi + (1.0 - p) * theta.miss.choi;
    return make_channel(hermitize(j), theta.out_dims);
  }
  BipartiteChannel mid = e;
  if (theta.mem_a > 1 || theta.mem_b > 1)
    mid = tensor_channels(e, identity_channel(theta.mem_a, theta.mem_b));
  CMat ja = compose_choi(theta.pre.choi, theta.pre.d_in(), theta.pre.d_out(),
                         mid.choi, mid.d_out());
  CMat jt = compose_choi(ja, theta.pre.d_in(), mid.d_out(), theta.post.choi,
                         theta.post.d_out());
  return clean_channel(jt, theta.out_dims);
}

Superchannel to_pre_post(const Superchannel& theta) {
  theta.validate();
  if (theta.form == Superchannel::Form::pre_post) return theta;
  const auto& sd = theta.slot_dims;
  const auto& od = theta.out_dims;
  int a0s = sd[0], b0s = sd[1], a1s = sd[2], b1s = sd[3];
  int xa = od[0], xb = od[1];
  int mem_a = a0s * xa;  // (refA, storeA)
  int mem_b = b0s * xb;

  // pre: isometry per party, |x> -> (1/sqrt d) sum_i |i>_slot |i>_ref (x)
  // |x>_store; party-local output order (slot, ref, store).
  CMat ka = CMat::Zero(static_cast<long>(a0s) * a0s * xa, xa);
  for (int x = 0; x < xa; ++x)
    for (int i = 0; i < a0s; ++i)
      ka((static_cast<long>(i) * a0s + i) * xa + x, x) =
          1.0 / std::sqrt(double(a0s));
  CMat kb = CMat::Zero(static_cast<long>(b0s) * b0s * xb, xb);
  for (int x = 0; x < xb; ++x)
    for (int i = 0; i < b0s; ++i)
      kb((static_cast<long>(i) * b0s + i) * xb + x, x) =
          1.0 / std::sqrt(double(b0s));
  BipartiteChannel pre =
      from_kraus({kron(ka, kb)}, {xa, xb, a0s * mem_a, b0s * mem_b});

  // post: measure {Q, I-Q} on the Choi probe, trace it out, run hit or miss
  // on the stored input. Choi of the measure-and-discard map N_P in closed
  // form, then linked with the prepared channel.
  std::vector<int> in_dims = {a1s, a0s, xa, b1s, b0s, xb};
  std::vector<int> perm = {1, 4, 0, 3, 2, 5};  // -> (refA, refB, A1s, B1s, stores)
  int din_post = dims_product(in_dims);
  int dc = a0s * b0s * a1s * b1s;
  int ds = xa * xb;
  auto permuted_index = [&](int u, int& c, int& s) {
    int digits[6];
    for (int k = 5; k >= 0; --k) {
      digits[k] = u % in_dims[k];
      u /= in_dims[k];
    }
    int pd[6];
    for (int k = 0; k < 6; ++k) pd[k] = digits[perm[k]];
    c = ((pd[0] * in_dims[4] + pd[1]) * in_dims[0] + pd[2]) * in_dims[3] +
        pd[3];
    s = pd[4] * in_dims[5] + pd[5];
  };
  std::vector<int> cidx(din_post), sidx(din_post);
  for (int u = 0; u < din_post; ++u) permuted_index(u, cidx[u], sidx[u]);

  auto np_choi = [&](const CMat& p) {
    CMat j = CMat::Zero(static_cast<long>(din_post) * ds,
                        static_cast<long>(din_post) * ds);
    for (int u = 0; u < din_post; ++u)
      for (int u2 = 0; u2 < din_post; ++u2)
        j(static_cast<long>(u) * ds + sidx[u],
          static_cast<long>(u2) * ds + sidx[u2]) =
            p(cidx[u2], cidx[u]) / double(din_post);
    return j;
  };
  (void)dc;
  CMat iq = CMat::Identity(theta.q_eff.rows(), theta.q_eff.cols()) -
            theta.q_eff;
  int dout = od[2] * od[3];
  CMat jpost =
      compose_choi(np_choi(theta.q_eff), din_post, ds, theta.hit.choi, dout) +
      compose_choi(np_choi(iq), din_post, ds, theta.miss.choi, dout);
  BipartiteChannel post = clean_channel(
      jpost, {a1s * mem_a, b1s * mem_b, od[2], od[3]});
  return make_pre_post(pre, post, theta.slot_dims, mem_a, mem_b);
}

BipartiteChannel golden_unit(int k) {
  if (k < 1) throw std::invalid_argument("golden_unit: k >= 1 required");
  if (k == 1) return identity_channel(1, 1);
  return swap_channel(k);
}

Superchannel dilution_superchannel(const BipartiteChannel& target,
                                   const BipartiteChannel& mix, double r,
                                   int k) {
  check_same_dims(target, mix, "dilution_superchannel");
  if (r < 0.0) throw std::invalid_argument("dilution: negative robustness");
  CMat w = (target.choi + r * mix.choi) / (1.0 + r);
  double pt_min =
      min_eigenvalue(choi_partial_transpose(hermitize(w), target.dims), 1e-7);
  if (pt_min < -1e-6)
    throw std::invalid_argument(
        "dilution: (J + r M)/(1+r) is not PPT; r is not a valid robustness "
        "decomposition");
  if (double(k) * k < 1.0 + r - 1e-6)
    throw std::invalid_argument("dilution: k^2 < 1 + r, overlap too large");
  BipartiteChannel unit = golden_unit(k);
  return make_measure_and_prepare(unit.choi, target, mix, unit.dims);
}

Superchannel distillation_superchannel(const DensityOperator& psi_star,
                                       const CMat& q_star, int k,
                                       const std::array<int, 4>& slot_dims) {
  CMat q = channel_eval_effect(q_star, slot_dims, psi_star);
  Eigen::SelfAdjointEigenSolver<CMat> es(q);
  RVec ev = es.eigenvalues();
  for (long i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-7)
      throw std::runtime_error("distillation: effect not PSD");
    if (ev(i) < 0.0) ev(i) = 0.0;
  }
  double top = ev.maxCoeff();
  if (top > 1.0 + 1e-12) ev /= top;  // numerical guard; error is checked
                                     // downstream via the diamond distance
  q = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();

  BipartiteChannel hit = golden_unit(k);
  BipartiteChannel miss = hit;
  if (k > 1) {
    long d4 = hit.choi.rows();
    miss = make_channel((CMat::Identity(d4, d4) - hit.choi) /
                            double(d4 - 1),
                        hit.dims);
  }
  Superchannel t;
  t.form = Superchannel::Form::measure_and_prepare;
  t.slot_dims = slot_dims;
  t.out_dims = hit.dims;
  t.q_eff = q;
  t.hit = hit;
  t.miss = miss;
  t.validate();
  return t;
}

BipartiteChannel twisted_twirl(const BipartiteChannel& e) {
  TwirlStructure ts = standard_twirl_structure(e.dims);
  TwirlDecomposition dec = twirl_project(e.choi, ts);
  return make_channel(hermitize(twirl_reconstruct(ts, dec.coeffs)), e.dims);
}

CMat partial_pair_twirl(const CMat& j, const std::vector<int>& dims,
                        const std::vector<std::array<int, 2>>& pairs) {
  int n = static_cast<int>(dims.size());
  std::vector<int> order;
  std::vector<char> used(n, 0);
  for (const auto& p : pairs) {
    if (dims.at(p[0]) != dims.at(p[1]))
      throw std::invalid_argument("partial_pair_twirl: unequal pair dims");
    order.push_back(p[0]);
    order.push_back(p[1]);
    used[p[0]] = used[p[1]] = 1;
  }
  std::vector<int> rest;
  for (int k = 0; k < n; ++k)
    if (!used[k]) rest.push_back(k);
  order.insert(order.end(), rest.begin(), rest.end());

  std::vector<int> pdims(n);
  for (int k = 0; k < n; ++k) pdims[k] = dims[order[k]];
  CMat jp = permute_systems(j, dims, order);

  int npairs = static_cast<int>(pairs.size());
  int dpair = 1;
  for (const auto& p : pairs) dpair *= dims[p[0]] * dims[p[0]];
  int drest = static_cast<int>(jp.rows()) / dpair;

  CMat acc = CMat::Zero(jp.rows(), jp.cols());
  for (unsigned mask = 0; mask < (1u << npairs); ++mask) {
    CMat proj = CMat::Identity(1, 1);
    double vol = 1.0;
    for (int p = 0; p < npairs; ++p) {
      int kp = dims[pairs[p][0]];
      CVec phi = CVec::Zero(static_cast<long>(kp) * kp);
      for (int i = 0; i < kp; ++i)
        phi(static_cast<long>(i) * kp + i) = 1.0 / std::sqrt(double(kp));
      CMat pp = phi * phi.adjoint();
      if (mask & (1u << p)) {
        pp = CMat::Identity(pp.rows(), pp.cols()) - pp;
        vol *= double(kp) * kp - 1.0;
      }
      proj = kron(proj, pp);
    }
    CMat lifted = kron(proj, CMat::Identity(drest, drest));
    // Y_v = tr_pair[(Pi_v (x) I) J] / vol
    std::vector<int> keep;
    for (int k = 2 * npairs; k < n; ++k) keep.push_back(k);
    CMat y;
    if (keep.empty()) {
      y = CMat::Zero(1, 1);
      y(0, 0) = (lifted * jp).trace();
    } else {
      y = partial_trace(lifted * jp, pdims, keep);
    }
    acc += kron(proj, y) / vol;
  }
  std::vector<int> inv(n);
  for (int k = 0; k < n; ++k) inv[order[k]] = k;
  return permute_systems(acc, pdims, inv);
}

SeppscCertificate seppsc_certify(const Superchannel& theta, int samples,
                                 double delta, uint64_t seed,
                                 const TwirlStructure* covariant) {
  SeppscCertificate cert;
  cert.samples = samples;
  cert.delta_claim = delta;
  double worst = -1.0;
  for (int i = 0; i < samples; ++i) {
    BipartiteChannel probe = random_separable_channel(
        theta.slot_dims, seed + 1000ull * (i + 1), 4);
    BipartiteChannel out = apply_superchannel(theta, probe);
    double s;
    if (covariant) {
      s = covariant_robustness(out, *covariant, RobustKind::generalized).s;
    } else if (out.d() <= 64) {
      s = generalized_robustness(out).s;
    } else {
      throw std::runtime_error(
          "seppsc_certify: output dimension too large for the dense oracle; "
          "supply a twirl structure");
    }
    if (s > worst) {
      worst = s;
      cert.worst_witness = channel_to_json(probe);
    }
  }
  cert.max_output_robustness = std::max(0.0, worst);
  cert.pass = cert.max_output_robustness <= delta + 1e-6;
  return cert;
}

CostReport cost_bound_harness(const BipartiteChannel& n, double eps,
                              uint64_t seed, int cert_samples) {
  CostReport rep;
  BipartiteChannel target = n;
  BipartiteChannel mix = n;
  double r;
  if (eps <= 0.0) {
    RobustnessResult rr = standard_robustness(n);
    r = rr.s;
    mix = robustness_mix(rr, n);
    rep.robustness = rr.report;
    rep.lower = std::log2(1.0 + r);
  } else {
    SmoothedResult sm = smoothed_log_robustness(n, eps, RobustKind::standard);
    r = sm.s;
    target = clean_channel(sm.Jprime, n.dims);
    if (r > 1e-9)
      mix = clean_channel((sm.W - sm.Jprime) / r, n.dims);
    else
      mix = target;
    rep.robustness = sm.report;
    rep.lower = sm.report.value;
  }
  if (r < 1e-6) {  // (numerically) free target: trivial dilution from k = 1
    r = 0.0;
    mix = target;
  }
  rep.k = std::max(1, static_cast<int>(std::ceil(std::sqrt(1.0 + r) - 1e-9)));
  rep.realized = 2.0 * std::log2(double(rep.k));
  rep.upper = rep.lower + 2.0;

  Superchannel theta = dilution_superchannel(target, mix, r, rep.k);
  BipartiteChannel sim = apply_superchannel(theta, golden_unit(rep.k));
  rep.sim_residual = (sim.choi - target.choi).cwiseAbs().maxCoeff();
  rep.cert = seppsc_certify(theta, cert_samples, 0.0, seed);
  return rep;
}

DistillReport distill_bound_harness(const BipartiteChannel& n, double eps,
                                    int restarts, uint64_t seed) {
  DistillReport rep;
  EhResult ehr = eh_maximize(n, eps, restarts, seed);
  rep.eh_report = ehr.report;
  rep.eh_eps = ehr.report.value;
  try {
    rep.eh_two_eps = eh_fixed_input(n, ehr.psi, 2.0 * eps).report.value;
  } catch (const std::runtime_error&) {
    rep.eh_two_eps = rep.eh_eps;  // valid but weaker stand-in
  }

  double eh = rep.eh_eps;
  double snapped = std::round(eh);
  if (std::abs(eh - snapped) < 1e-6) eh = snapped;
  int fl = std::max(0, static_cast<int>(std::floor(eh)));
  if (fl % 2 == 0) {
    rep.k = 1 << (fl / 2);
    rep.lower = double(fl);
  } else {
    rep.k = 1 << ((fl - 1) / 2);
    rep.lower = eh - 1.0;
  }
  rep.realized = 2.0 * std::log2(double(rep.k));

  Superchannel theta =
      distillation_superchannel(ehr.psi, ehr.Q, rep.k, n.dims);
  BipartiteChannel out = apply_superchannel(theta, n);
  rep.diamond_err = (rep.k == 1)
                        ? 0.0
                        : diamond_distance(out, golden_unit(rep.k));
  return rep;
}

TwirlStructure composite_twirl_structure(const std::array<int, 4>& n_dims,
                                         int l) {
  if (n_dims[0] != n_dims[3] || n_dims[1] != n_dims[2])
    throw std::invalid_argument(
        "composite_twirl_structure: needs dims (a,b,b,a)");
  TwirlStructure ts;
  ts.dims = {n_dims[0], l, n_dims[1], l, n_dims[2], l, n_dims[3], l};
  ts.pairs = {{0, 6}, {2, 4}, {1, 7}, {3, 5}};
  return ts;
}

std::pair<Superchannel, CatalysisReport> catalytic_dilution(
    const BipartiteChannel& n, int l, double delta, double eps, double tol) {
  if (l < 2) throw std::invalid_argument("catalytic_dilution: l >= 2");
  if (double(l) * l < 1.0 + 1.0 / delta)
    throw std::invalid_argument(
        "catalytic_dilution: premise l^2 >= 1 + 1/delta violated");
  CatalysisReport rep;
  rep.l = l;
  rep.eps_prime = eps * eps /
                  (2.0 * n.dims[0] * n.dims[0] * n.dims[1] * n.dims[1]);

  BipartiteChannel target = n;
  if (eps > 0.0) {
    SmoothedResult sm =
        smoothed_log_robustness(n, rep.eps_prime, RobustKind::generalized, tol);
    target = clean_channel(sm.Jprime, n.dims);
  }
  BipartiteChannel fl = swap_channel(l);
  BipartiteChannel hit = tensor_channels(target, fl);

  // Generalized robustness decomposition of target (x) F^l: exact LP when the
  // composite is pair-twirl covariant, dense SDP when small, and a tensorized
  // feasible decomposition otherwise (a valid but possibly loose r).
  double s;
  CMat w;
  bool have_cov = false;
  TwirlStructure ts;
  if (n.dims[0] == n.dims[3] && n.dims[1] == n.dims[2]) {
    ts = composite_twirl_structure(n.dims, l);
    if (twirl_project(hit.choi, ts).residual < 1e-8) have_cov = true;
  }
  if (have_cov) {
    RobustnessResult rr = covariant_robustness(hit, ts, RobustKind::generalized);
    s = rr.s;
    w = rr.W;
  } else if (hit.d() <= 64) {
    RobustnessResult rr = generalized_robustness(hit, tol);
    s = rr.s;
    w = rr.W;
  } else {
    RobustnessResult rn = generalized_robustness(target, tol);
    double rf = double(l) * l - 1.0;
    long d4 = fl.choi.rows();
    CMat mf = (CMat::Identity(d4, d4) - fl.choi) / double(d4 - 1);
    CMat wf = fl.choi + rf * mf;
    s = (1.0 + rn.s) * (1.0 + rf) - 1.0;
    std::vector<int> merged = {n.dims[0], l, n.dims[1], l,
                               n.dims[2], l, n.dims[3], l};
    CMat wk = kron(rn.W, wf);
    std::vector<int> kron_dims = {n.dims[0], n.dims[1], n.dims[2], n.dims[3],
                                  l, l, l, l};
    w = permute_systems(wk, kron_dims, {0, 4, 1, 5, 2, 6, 3, 7});
    (void)merged;
  }

  double shrink = 1.0 - 2.0 * rep.eps_prime;
  if (shrink <= 0.0)
    throw std::invalid_argument("catalytic_dilution: eps too large");
  double r = (1.0 + s) / shrink;
  rep.k = std::max(1, static_cast<int>(
                          std::ceil(std::sqrt(r) / double(l) - 1e-9)));
  rep.realized = 2.0 * std::log2(double(rep.k));
  rep.lower = std::log2(1.0 + s) - 2.0 * std::log2(double(l)) -
              std::log2(1.0 + delta);
  rep.upper = std::log2(r) - 2.0 * std::log2(double(l)) + 2.0;

  // Scale the PPT part so the decomposition holds at the shifted r; the miss
  // branch is the residual channel.
  CMat rhat = (w * (r / (1.0 + s)) - hit.choi) / (r - 1.0);
  BipartiteChannel miss = clean_channel(rhat, hit.dims);

  BipartiteChannel unit =
      tensor_channels(golden_unit(rep.k), swap_channel(l));
  Superchannel theta =
      make_measure_and_prepare(unit.choi, hit, miss, unit.dims);

  if (have_cov && twirl_project(miss.choi, ts).residual < 1e-8)
    rep.miss_robustness =
        covariant_robustness(miss, ts, RobustKind::generalized).s;
  else if (miss.d() <= 64)
    rep.miss_robustness = generalized_robustness(miss, tol).s;
  else
    rep.miss_robustness = std::numeric_limits<double>::quiet_NaN();
  return {theta, rep};
}

Superchannel random_seppsc(const std::array<int, 4>& dims, uint64_t seed) {
  BipartiteChannel pre = random_separable_channel(
      {dims[0], dims[1], dims[0], dims[1]}, seed * 2 + 1, 3);
  pre.certified_separable = true;
  BipartiteChannel post = random_separable_channel(
      {dims[2], dims[3], dims[2], dims[3]}, seed * 2 + 2, 3);
  post.certified_separable = true;
  return make_pre_post(pre, post, dims, 1, 1);
}

Superchannel random_unitary_pre_seppsc(const std::array<int, 4>& dims,
                                       uint64_t seed) {
  std::mt19937_64 rng(seed);
  CMat ua = random_unitary(dims[0], rng);
  CMat ub = random_unitary(dims[1], rng);
  BipartiteChannel pre =
      from_kraus({kron(ua, ub)}, {dims[0], dims[1], dims[0], dims[1]});
  BipartiteChannel post = random_separable_channel(
      {dims[2], dims[3], dims[2], dims[3]}, seed * 2 + 5, 3);
  post.certified_separable = true;
  return make_pre_post(pre, post, dims, 1, 1);
}

DensityOperator pre_pullback(const Superchannel& theta,
                             const DensityOperator& psi) {
  if (theta.form != Superchannel::Form::pre_post || theta.mem_a != 1 ||
      theta.mem_b != 1)
    throw std::invalid_argument(
        "pre_pullback: needs a memoryless pre/post superchannel");
  return apply(theta.pre, psi);
}

namespace {
nlohmann::json channel_json(const BipartiteChannel& c) {
  return nlohmann::json::parse(channel_to_json(c));
}
CMat mat_from_json(const nlohmann::json& re, const nlohmann::json& im) {
  long rows = static_cast<long>(re.size());
  CMat m(rows, rows);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < rows; ++c)
      m(r, c) = Complex(re[r][c].get<double>(), im[r][c].get<double>());
  return m;
}
}  // namespace

std::string superchannel_to_json(const Superchannel& t) {
  nlohmann::json j;
  j["form"] = t.form == Superchannel::Form::measure_and_prepare
                  ? "measure_and_prepare"
                  : "pre_post";
  j["slot_dims"] = t.slot_dims;
  j["out_dims"] = t.out_dims;
  if (t.form == Superchannel::Form::measure_and_prepare) {
    long d = t.q_eff.rows();
    std::vector<std::vector<double>> re(d, std::vector<double>(d)),
        im(d, std::vector<double>(d));
    for (long r = 0; r < d; ++r)
      for (long c = 0; c < d; ++c) {
        re[r][c] = t.q_eff(r, c).real();
        im[r][c] = t.q_eff(r, c).imag();
      }
    j["q_eff_re"] = re;
    j["q_eff_im"] = im;
    j["hit"] = channel_json(t.hit);
    j["miss"] = channel_json(t.miss);
  } else {
    j["pre"] = channel_json(t.pre);
    j["post"] = channel_json(t.post);
    j["mem_a"] = t.mem_a;
    j["mem_b"] = t.mem_b;
  }
  return j.dump();
}

Superchannel superchannel_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::array<int, 4> sd, od;
  for (int k = 0; k < 4; ++k) {
    sd[k] = j.at("slot_dims")[k].get<int>();
    od[k] = j.at("out_dims")[k].get<int>();
  }
  std::string form = j.at("form").get<std::string>();
  if (form == "measure_and_prepare") {
    CMat q = mat_from_json(j.at("q_eff_re"), j.at("q_eff_im"));
    BipartiteChannel hit = channel_from_json(j.at("hit").dump());
    BipartiteChannel miss = channel_from_json(j.at("miss").dump());
    Superchannel t = make_measure_and_prepare(q, hit, miss, sd);
    t.out_dims = od;
    t.validate();
    return t;
  }
  if (form != "pre_post")
    throw std::invalid_argument("superchannel_from_json: unknown form");
  BipartiteChannel pre = channel_from_json(j.at("pre").dump());
  BipartiteChannel post = channel_from_json(j.at("post").dump());
  return make_pre_post(pre, post, sd, j.at("mem_a").get<int>(),
                       j.at("mem_b").get<int>());
}

}  // namespace dynent
