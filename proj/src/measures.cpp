#include "dynent/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace dynent {

namespace {

void fill_report(MeasureReport& r, const LmiSolution& sol) {
  r.solver_status = to_string(sol.status);
  r.primal_res = sol.conjugate.primal_res;
  r.dual_res = sol.conjugate.dual_res;
  r.gap = sol.conjugate.gap;
}

void require_solved(const LmiSolution& sol, const std::string& what) {
  if (sol.status != SolveStatus::optimal)
    throw std::runtime_error(what + ": solver returned " +
                             std::string(to_string(sol.status)));
}

// Hermitian basis of the input space with all elements traceless; pinning
// <G (x) I_out, W> = 0 for each forces tr_out W proportional to the identity.
std::vector<CMat> traceless_basis(int din) {
  std::vector<CMat> out;
  for (int r = 1; r < din; ++r) {
    CMat g = CMat::Zero(din, din);
    g(0, 0) = 1.0;
    g(r, r) = -1.0;
    out.push_back(g);
  }
  for (int k = din; k < din * din; ++k) out.push_back(herm_basis(din, k));
  return out;
}

CMat kron_out(const CMat& g, int dout) {
  return kron(g, CMat::Identity(dout, dout));
}

void add_tp_proportional_rows(LmiProblem& p, int offset,
                              const BipartiteChannel& n) {
  const int d = n.d();
  for (const CMat& g : traceless_basis(n.d_in()))
    lmi_add_herm_equality(p, offset, d, kron_out(g, n.d_out()), 0.0);
}

void add_tp_rows(LmiProblem& p, int offset, const BipartiteChannel& n) {
  const int d = n.d(), din = n.d_in();
  for (int k = 0; k < din * din; ++k) {
    CMat g = herm_basis(din, k);
    lmi_add_herm_equality(p, offset, d, kron_out(g, n.d_out()),
                          g.trace().real() / din);
  }
}

RobustnessResult robustness_impl(const BipartiteChannel& n, RobustKind kind,
                                 double tol) {
  n.validate();
  const int d = n.d();
  const CMat& J = n.choi;
  const CMat Z = CMat::Zero(d, d);
  auto pt = [&](const CMat& b) { return CMat(choi_partial_transpose(b, n.dims)); };

  LmiProblem p;
  int w = lmi_add_herm_params(p, d);
  int bcp = p.add_block("cp", d, CMat(-J));  // W - J >= 0
  lmi_add_map_terms(p, bcp, w, d, [](const CMat& b) { return CMat(-b); });
  int bppt = p.add_block("ppt-mix", d, Z);   // PT(W) >= 0
  lmi_add_map_terms(p, bppt, w, d, [&](const CMat& b) { return CMat(-pt(b)); });
  if (kind == RobustKind::standard) {
    int bd = p.add_block("ppt-diff", d, CMat(-pt(J)));  // PT(W - J) >= 0
    lmi_add_map_terms(p, bd, w, d, [&](const CMat& b) { return CMat(-pt(b)); });
  }
  add_tp_proportional_rows(p, w, n);
  lmi_add_trace_objective(p, w, d, 1.0);

  LmiSolution sol = solve_lmi(p, tol);
  require_solved(sol, "robustness");
  RobustnessResult out;
  out.s = std::max(0.0, sol.value - 1.0);
  out.W = herm_from_params(sol.y, w, d);
  out.report.name = kind == RobustKind::standard ? "standard_robustness"
                                                 : "generalized_robustness";
  out.report.value = out.s;
  out.report.bound_kind = "lower-bound-via-PPT";
  fill_report(out.report, sol);
  return out;
}

}  // namespace

// Adjoint of J -> (N_J (x) id)(psi) evaluated against q on the output space
// (A1,B1,R): tr(q . N_J(x)id(psi)) = tr(effect . J) for every Choi J.
CMat channel_eval_effect(const CMat& q, const std::array<int, 4>& dims,
                         const DensityOperator& psi) {
  const int din = dims[0] * dims[1], dout = dims[2] * dims[3];
  int dr = 1;
  for (size_t i = 2; i < psi.dims.size(); ++i) dr *= psi.dims[i];
  // systems (in, R, out); q arrives on (out, R)
  CMat qt = permute_systems(q, {dout, dr}, {1, 0});  // (R, out)
  CMat lhs = kron(partial_transpose(psi.matrix, {din, dr}, {0}),
                  CMat::Identity(dout, dout));
  CMat a = kron(CMat::Identity(din, din), qt) * lhs;
  a = permute_systems(a, {din, dr, dout}, {0, 2, 1});  // (in, out, R)
  return static_cast<double>(din) *
         hermitize(partial_trace(a, {din, dout, dr}, {0, 1}));
}

std::string report_to_json(const MeasureReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  if (r.infinite)
    j["value"] = nullptr;
  else
    j["value"] = r.value;
  j["infinite"] = r.infinite;
  j["bound_kind"] = r.bound_kind;
  j["epsilon"] = r.epsilon;
  j["solver_status"] = r.solver_status;
  j["residuals"] = {{"primal", r.primal_res},
                    {"dual", r.dual_res},
                    {"gap", r.gap}};
  return j.dump();
}

double diamond_distance(const BipartiteChannel& n, const BipartiteChannel& m,
                        double tol) {
  if (n.dims != m.dims)
    throw std::invalid_argument("diamond_distance: dims mismatch");
  const int d = n.d(), din = n.d_in();
  const CMat Z = CMat::Zero(d, d);
  CMat delta = static_cast<double>(din) * (n.choi - m.choi);
  if (delta.cwiseAbs().maxCoeff() < 1e-14) return 0.0;

  LmiProblem p;
  int y = lmi_add_herm_params(p, d);
  int lam = p.add_param();
  p.objective[lam] = 1.0;
  int b1 = p.add_block("y-psd", d, Z);  // Y >= 0
  lmi_add_map_terms(p, b1, y, d, [](const CMat& b) { return CMat(-b); });
  int b2 = p.add_block("y-dom", d, CMat(-delta));  // Y >= d_in (J1 - J2)
  lmi_add_map_terms(p, b2, y, d, [](const CMat& b) { return CMat(-b); });
  int b3 = p.add_block("trace-cap", din, CMat::Zero(din, din));
  lmi_add_map_terms(p, b3, y, d, [&](const CMat& b) {
    return CMat(partial_trace(b, n.choi_dims(), {0, 1}));
  });
  for (int r = 0; r < din; ++r) p.add_term(b3, lam, r, r, -1.0);

  LmiSolution sol = solve_lmi(p, tol);
  require_solved(sol, "diamond_distance");
  return std::clamp(sol.value, 0.0, 1.0);
}

MeasureReport dmax(const BipartiteChannel& n, const BipartiteChannel& m) {
  if (n.dims != m.dims) throw std::invalid_argument("dmax: dims mismatch");
  MeasureReport r;
  r.name = "dmax";
  r.solver_status = "closed-form";
  Eigen::SelfAdjointEigenSolver<CMat> es(m.choi);
  const double top = es.eigenvalues().maxCoeff();
  const double thr = std::max(1e-12, 1e-10 * top);
  CMat p0 = CMat::Zero(m.choi.rows(), m.choi.cols());
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) < thr)
      p0 += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  if ((p0 * n.choi * p0).cwiseAbs().maxCoeff() > 1e-9) {
    r.infinite = true;
    r.value = std::numeric_limits<double>::infinity();
    return r;
  }
  CMat isq = inv_sqrt_psd(m.choi, thr);
  Eigen::SelfAdjointEigenSolver<CMat> es2(hermitize(isq * n.choi * isq));
  double lam = std::max(1.0, es2.eigenvalues().maxCoeff());
  r.value = std::log2(lam);
  return r;
}

RobustnessResult generalized_robustness(const BipartiteChannel& n, double tol) {
  return robustness_impl(n, RobustKind::generalized, tol);
}

RobustnessResult standard_robustness(const BipartiteChannel& n, double tol) {
  return robustness_impl(n, RobustKind::standard, tol);
}

BipartiteChannel robustness_mix(const RobustnessResult& r,
                                const BipartiteChannel& n) {
  if (r.s < 1e-9) return n;
  // solver-accuracy cleanup: clamp tiny negative eigenvalues, renormalize
  CMat m = hermitize((r.W - n.choi) / r.s);
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  RVec ev = es.eigenvalues().cwiseMax(0.0);
  m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  m /= m.trace().real();
  BipartiteChannel c{hermitize(m), n.dims, false};
  c.validate(1e-5);
  return c;
}

double log_robustness(const BipartiteChannel& n, RobustKind kind, double tol) {
  return std::log2(1.0 + robustness_impl(n, kind, tol).s);
}

SmoothedResult smoothed_log_robustness(const BipartiteChannel& n, double eps,
                                       RobustKind kind, double tol) {
  if (eps < 0.0) throw std::invalid_argument("smoothed_log_robustness: eps < 0");
  if (eps <= 1e-12) {
    RobustnessResult r = robustness_impl(n, kind, tol);
    SmoothedResult out;
    out.s = r.s;
    out.W = r.W;
    out.Jprime = n.choi;
    out.report = r.report;
    out.report.name = "smoothed_log_robustness";
    out.report.value = std::log2(1.0 + r.s);
    out.report.epsilon = eps;
    return out;
  }
  const int d = n.d(), din = n.d_in();
  const CMat Z = CMat::Zero(d, d);
  auto pt = [&](const CMat& b) { return CMat(choi_partial_transpose(b, n.dims)); };

  LmiProblem p;
  int w = lmi_add_herm_params(p, d);
  int jp = lmi_add_herm_params(p, d);
  int yy = lmi_add_herm_params(p, d);
  int lam = p.add_param();

  int bcp = p.add_block("cp", d, Z);  // W - J' >= 0
  lmi_add_map_terms(p, bcp, jp, d, [](const CMat& b) { return b; });
  lmi_add_map_terms(p, bcp, w, d, [](const CMat& b) { return CMat(-b); });
  int bppt = p.add_block("ppt-mix", d, Z);  // PT(W) >= 0
  lmi_add_map_terms(p, bppt, w, d, [&](const CMat& b) { return CMat(-pt(b)); });
  if (kind == RobustKind::standard) {
    int bd = p.add_block("ppt-diff", d, Z);  // PT(W - J') >= 0
    lmi_add_map_terms(p, bd, jp, d, [&](const CMat& b) { return pt(b); });
    lmi_add_map_terms(p, bd, w, d, [&](const CMat& b) { return CMat(-pt(b)); });
  }
  int bjp = p.add_block("choi-psd", d, Z);  // J' >= 0
  lmi_add_map_terms(p, bjp, jp, d, [](const CMat& b) { return CMat(-b); });
  int byp = p.add_block("y-psd", d, Z);
  lmi_add_map_terms(p, byp, yy, d, [](const CMat& b) { return CMat(-b); });
  int bdom = p.add_block("y-dom", d, CMat(static_cast<double>(din) * n.choi));
  lmi_add_map_terms(p, bdom, jp, d, [&](const CMat& b) {
    return CMat(static_cast<double>(din) * b);
  });
  lmi_add_map_terms(p, bdom, yy, d, [](const CMat& b) { return CMat(-b); });
  int btr = p.add_block("trace-cap", din, CMat::Zero(din, din));
  lmi_add_map_terms(p, btr, yy, d, [&](const CMat& b) {
    return CMat(partial_trace(b, n.choi_dims(), {0, 1}));
  });
  for (int r = 0; r < din; ++r) p.add_term(btr, lam, r, r, -1.0);
  int bcap = p.add_block("eps-cap", 1, eps * CMat::Identity(1, 1));
  p.add_term(bcap, lam, 0, 0, 1.0);

  add_tp_rows(p, jp, n);
  add_tp_proportional_rows(p, w, n);
  lmi_add_trace_objective(p, w, d, 1.0);

  LmiSolution sol = solve_lmi(p, tol);
  require_solved(sol, "smoothed_log_robustness");
  SmoothedResult out;
  out.s = std::max(0.0, sol.value - 1.0);
  out.W = herm_from_params(sol.y, w, d);
  out.Jprime = herm_from_params(sol.y, jp, d);
  out.report.name = "smoothed_log_robustness";
  out.report.value = std::log2(1.0 + out.s);
  out.report.bound_kind = "lower-bound-via-PPT";
  out.report.epsilon = eps;
  fill_report(out.report, sol);
  return out;
}

SmoothedResult liberal_smoothed_log_robustness(const BipartiteChannel& n,
                                               const DensityOperator& phi,
                                               double eps, double tol) {
  if (eps < 0.0) throw std::invalid_argument("liberal smoothing: eps < 0");
  if (phi.dims.size() < 2 || phi.dims[0] != n.dims[0] || phi.dims[1] != n.dims[1])
    throw std::invalid_argument("liberal smoothing: phi dims mismatch");
  const int d = n.d(), din = n.d_in();
  int dr = 1;
  for (size_t i = 2; i < phi.dims.size(); ++i) dr *= phi.dims[i];
  const int dq = n.d_out() * dr;
  const CMat Z = CMat::Zero(d, d);
  auto pt = [&](const CMat& b) { return CMat(choi_partial_transpose(b, n.dims)); };

  // The output map J -> (N_J (x) id)(phi), precomputed on the parameter basis.
  std::vector<RVec> lam_coeffs(d * d);
  for (int i = 0; i < d * d; ++i)
    lam_coeffs[i] = lmi_inner_coeffs(
        dq, hermitize(choi_apply(herm_basis(d, i), n.dims, phi.matrix, phi.dims)));
  RVec rho_coeffs = lmi_inner_coeffs(dq, apply(n, phi).matrix);

  LmiProblem p;
  int w = lmi_add_herm_params(p, d);
  int jp = lmi_add_herm_params(p, d);
  const bool ball = eps > 1e-12;
  int pp = -1, qq = -1;
  if (ball) {
    pp = lmi_add_herm_params(p, dq);
    qq = lmi_add_herm_params(p, dq);
  }

  int bcp = p.add_block("cp", d, Z);
  lmi_add_map_terms(p, bcp, jp, d, [](const CMat& b) { return b; });
  lmi_add_map_terms(p, bcp, w, d, [](const CMat& b) { return CMat(-b); });
  int bppt = p.add_block("ppt-mix", d, Z);
  lmi_add_map_terms(p, bppt, w, d, [&](const CMat& b) { return CMat(-pt(b)); });
  int bd = p.add_block("ppt-diff", d, Z);
  lmi_add_map_terms(p, bd, jp, d, [&](const CMat& b) { return pt(b); });
  lmi_add_map_terms(p, bd, w, d, [&](const CMat& b) { return CMat(-pt(b)); });
  int bjp = p.add_block("choi-psd", d, Z);
  lmi_add_map_terms(p, bjp, jp, d, [](const CMat& b) { return CMat(-b); });
  if (ball) {
    int bp = p.add_block("pos-part", dq, CMat::Zero(dq, dq));
    lmi_add_map_terms(p, bp, pp, dq, [](const CMat& b) { return CMat(-b); });
    int bq = p.add_block("neg-part", dq, CMat::Zero(dq, dq));
    lmi_add_map_terms(p, bq, qq, dq, [](const CMat& b) { return CMat(-b); });
    int bt = p.add_block("ball", 1, 2.0 * eps * CMat::Identity(1, 1));
    lmi_add_scalar_row(p, bt, pp, dq, CMat::Identity(dq, dq), 1.0);
    lmi_add_scalar_row(p, bt, qq, dq, CMat::Identity(dq, dq), 1.0);
  }

  // N'(phi) - P + Q = N(phi), row per Hermitian basis element of the output.
  for (int k = 0; k < dq * dq; ++k) {
    LmiProblem::Equality eq;
    eq.rhs = rho_coeffs(k);
    for (int i = 0; i < d * d; ++i)
      if (lam_coeffs[i](k) != 0.0) eq.coeffs.push_back({jp + i, lam_coeffs[i](k)});
    if (ball) {
      double unit = k < dq ? 1.0 : 2.0;
      eq.coeffs.push_back({pp + k, -unit});
      eq.coeffs.push_back({qq + k, unit});
    }
    p.equalities.push_back(std::move(eq));
  }
  add_tp_rows(p, jp, n);
  add_tp_proportional_rows(p, w, n);
  lmi_add_trace_objective(p, w, d, 1.0);

  LmiSolution sol = solve_lmi(p, tol);
  require_solved(sol, "liberal_smoothed_log_robustness");
  SmoothedResult out;
  out.s = std::max(0.0, sol.value - 1.0);
  out.W = herm_from_params(sol.y, w, d);
  out.Jprime = herm_from_params(sol.y, jp, d);
  out.report.name = "liberal_smoothed_log_robustness";
  out.report.value = std::log2(1.0 + out.s);
  out.report.bound_kind = "lower-bound-via-PPT";
  out.report.epsilon = eps;
  fill_report(out.report, sol);
  return out;
}

NielsenResult nielsen_unitary_robustness(const CMat& u, int da, int db) {
  OperatorSchmidt os = operator_schmidt(u, da, db);
  NielsenResult out;
  out.coeffs = os.coeffs;
  // The closed form's hypothesis A_j A_j^dag = I/|A| (and likewise for B) is about
  // some Schmidt basis; within a degenerate coefficient group the basis may be
  // rotated (for the swap gate the Weyl basis works, not the SVD one). We test
  // the rotation-invariant groupwise average, which is the exact condition for
  // non-degenerate coefficients.
  const long nterms = os.coeffs.size();
  long j = 0;
  while (j < nterms && os.coeffs(j) > 1e-12) {
    long end = j + 1;
    while (end < nterms && std::abs(os.coeffs(end) - os.coeffs(j)) < 1e-8) ++end;
    CMat suma = CMat::Zero(da, da), sumb = CMat::Zero(db, db);
    for (long t = j; t < end; ++t) {
      suma += os.A[t] * os.A[t].adjoint();
      sumb += os.B[t] * os.B[t].adjoint();
    }
    const double g = static_cast<double>(end - j);
    if ((suma - (g / da) * CMat::Identity(da, da)).cwiseAbs().maxCoeff() > 1e-8 ||
        (sumb - (g / db) * CMat::Identity(db, db)).cwiseAbs().maxCoeff() > 1e-8)
      return out;  // inapplicable
    j = end;
  }
  out.applicable = true;
  double s = os.coeffs.sum();
  out.value = s * s / (static_cast<double>(da) * db) - 1.0;
  return out;
}

MeasureReport hypothesis_testing_divergence(const DensityOperator& rho,
                                            const DensityOperator& sigma,
                                            double eps, double tol) {
  if (eps < 0.0 || eps >= 1.0)
    throw std::invalid_argument("hypothesis test: eps out of [0,1)");
  if (rho.dim() != sigma.dim())
    throw std::invalid_argument("hypothesis test: dims mismatch");
  const int d = rho.dim();

  LmiProblem p;
  int q = lmi_add_herm_params(p, d);
  int b1 = p.add_block("q-psd", d, CMat::Zero(d, d));
  lmi_add_map_terms(p, b1, q, d, [](const CMat& b) { return CMat(-b); });
  int b2 = p.add_block("q-cap", d, CMat::Identity(d, d));
  lmi_add_map_terms(p, b2, q, d, [](const CMat& b) { return b; });
  int b3 = p.add_block("power", 1, -(1.0 - eps) * CMat::Identity(1, 1));
  lmi_add_scalar_row(p, b3, q, d, rho.matrix, -1.0);
  lmi_add_matrix_objective(p, q, d, sigma.matrix, 1.0);

  LmiSolution sol = solve_lmi(p, tol);
  require_solved(sol, "hypothesis_testing_divergence");
  MeasureReport r;
  r.name = "hypothesis_testing_divergence";
  r.epsilon = eps;
  fill_report(r, sol);
  if (sol.value < 1e-10) {
    r.infinite = true;
    r.value = std::numeric_limits<double>::infinity();
  } else {
    r.value = -std::log2(sol.value);
  }
  return r;
}

EhResult eh_fixed_input(const BipartiteChannel& n, const DensityOperator& psi,
                        double eps, double tol) {
  if (eps < 0.0 || eps >= 1.0)
    throw std::invalid_argument("eh_fixed_input: eps out of [0,1)");
  if (psi.dims.size() < 2 || psi.dims[0] != n.dims[0] || psi.dims[1] != n.dims[1])
    throw std::invalid_argument("eh_fixed_input: psi dims mismatch");
  const int d = n.d(), din = n.d_in(), dout = n.d_out();
  int dr = 1;
  for (size_t i = 2; i < psi.dims.size(); ++i) dr *= psi.dims[i];
  const int dq = dout * dr;
  CMat rho_n = apply(n, psi).matrix;
  auto pt = [&](const CMat& b) { return CMat(choi_partial_transpose(b, n.dims)); };

  EhResult out;
  out.psi = psi;
  out.report.name = "eh_fixed_input";
  out.report.epsilon = eps;
  out.report.bound_kind = "lower-bound-via-PPT";

  // At eps = 0 the power constraint pins the test: tr(Q rho) = 1 with Q <= I
  // forces Q = Pi + V, Pi the support projector of rho and V acting on its
  // kernel. The full-Q encoding then has no strict interior and stalls the
  // barrier, so parametrize on the kernel (a full-rank output pins Q = I).
  const bool pinned = (eps == 0.0);
  CMat proj, ker;
  int dk = dq;
  if (pinned) {
    Eigen::SelfAdjointEigenSolver<CMat> es(rho_n);
    const double thr = std::max(1e-11, 1e-9 * es.eigenvalues().maxCoeff());
    proj = CMat::Zero(dq, dq);
    std::vector<long> kc;
    for (long i = 0; i < dq; ++i) {
      if (es.eigenvalues()(i) > thr)
        proj += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      else
        kc.push_back(i);
    }
    dk = static_cast<int>(kc.size());
    if (dk == 0) {  // Q = I scores 1 on every trace-preserving competitor
      out.Q = CMat::Identity(dq, dq);
      out.report.value = 0.0;
      out.report.solver_status = "closed-form";
      return out;
    }
    ker.resize(dq, dk);
    for (int c = 0; c < dk; ++c) ker.col(c) = es.eigenvectors().col(kc[c]);
  }
  const int dv = pinned ? dk : dq;
  auto lift = [&](const CMat& b) {
    return pinned ? CMat(ker * b * ker.adjoint()) : b;
  };

  // inf over tests Q of  max_{M PPT, TP} tr(Q (M (x) id)(psi)), with the inner
  // maximization replaced by its Lagrangian dual min tr(Y)/d_in subject to
  // Y (x) I >= d_in T(Q) + PT(S), S >= 0 (Slater holds at M = I/d).
  LmiProblem p;
  int q = lmi_add_herm_params(p, dv);
  int y = lmi_add_herm_params(p, din);
  int s = lmi_add_herm_params(p, d);

  int b1 = p.add_block("q-psd", dv, CMat::Zero(dv, dv));
  lmi_add_map_terms(p, b1, q, dv, [](const CMat& b) { return CMat(-b); });
  int b2 = p.add_block("q-cap", dv, CMat::Identity(dv, dv));
  lmi_add_map_terms(p, b2, q, dv, [](const CMat& b) { return b; });
  if (!pinned) {
    int b3 = p.add_block("power", 1, -(1.0 - eps) * CMat::Identity(1, 1));
    lmi_add_scalar_row(p, b3, q, dv, rho_n, -1.0);
  }
  int b4 = p.add_block("s-psd", d, CMat::Zero(d, d));
  lmi_add_map_terms(p, b4, s, d, [](const CMat& b) { return CMat(-b); });
  CMat dom_const = pinned ? CMat(-channel_eval_effect(proj, n.dims, psi))
                          : CMat(CMat::Zero(d, d));
  int b5 = p.add_block("dual-dom", d, dom_const);
  lmi_add_map_terms(p, b5, q, dv, [&](const CMat& b) {
    return channel_eval_effect(lift(b), n.dims, psi);
  });
  lmi_add_map_terms(p, b5, s, d, [&](const CMat& b) { return pt(b); });
  lmi_add_map_terms(p, b5, y, din, [&](const CMat& b) {
    return CMat(-kron_out(b, dout));
  });
  lmi_add_trace_objective(p, y, din, 1.0 / din);

  LmiSolution sol = solve_lmi(p, tol);
  // Ill-conditioned instances can stall near the optimum; a looser rerun
  // still certifies a valid bound (the status lands in the report).
  if (sol.status == SolveStatus::max_iterations)
    sol = solve_lmi(p, tol * 100.0, 400);
  require_solved(sol, "eh_fixed_input");
  CMat v = herm_from_params(sol.y, q, dv);
  out.Q = pinned ? CMat(proj + ker * v * ker.adjoint()) : v;
  fill_report(out.report, sol);
  if (sol.value < 1e-10) {
    out.report.infinite = true;
    out.report.value = std::numeric_limits<double>::infinity();
  } else {
    out.report.value = std::max(0.0, -std::log2(sol.value));
  }
  return out;
}

double eh_inner_primal(const BipartiteChannel& n, const DensityOperator& psi,
                       const CMat& q, double tol) {
  const int d = n.d(), din = n.d_in();
  auto pt = [&](const CMat& b) { return CMat(choi_partial_transpose(b, n.dims)); };
  LmiProblem p;
  int j = lmi_add_herm_params(p, d);
  int b1 = p.add_block("choi-psd", d, CMat::Zero(d, d));
  lmi_add_map_terms(p, b1, j, d, [](const CMat& b) { return CMat(-b); });
  int b2 = p.add_block("choi-ppt", d, CMat::Zero(d, d));
  lmi_add_map_terms(p, b2, j, d, [&](const CMat& b) { return CMat(-pt(b)); });
  add_tp_rows(p, j, n);
  lmi_add_matrix_objective(p, j, d, channel_eval_effect(q, n.dims, psi), -1.0);
  LmiSolution sol = solve_lmi(p, tol);
  if (sol.status == SolveStatus::max_iterations)
    sol = solve_lmi(p, tol * 100.0, 400);
  require_solved(sol, "eh_inner_primal");
  return -sol.value;
}

EhResult eh_maximize(const BipartiteChannel& n, double eps, int restarts,
                     uint64_t seed,
                     const std::vector<DensityOperator>& extra_inputs,
                     double tol) {
  if (restarts < 1) throw std::invalid_argument("eh_maximize: restarts < 1");
  const int din = n.d_in();
  std::mt19937_64 rng(seed);

  auto mes_input = [&]() {
    CVec v = CVec::Zero(static_cast<long>(din) * din);
    for (int i = 0; i < din; ++i)
      v(static_cast<long>(i) * din + i) = 1.0 / std::sqrt(static_cast<double>(din));
    return pure_state(v, {n.dims[0], n.dims[1], din});
  };

  std::vector<DensityOperator> candidates;
  candidates.push_back(mes_input());
  for (int t = 1; t < restarts; ++t)
    candidates.push_back(
        pure_state(random_pure(din * din, rng), {n.dims[0], n.dims[1], din}));
  for (const auto& e : extra_inputs) candidates.push_back(e);

  EhResult best;
  best.report.value = -1.0;
  int solved = 0;
  for (const auto& c : candidates) {
    EhResult r;
    try {
      r = eh_fixed_input(n, c, eps, tol);
    } catch (const std::runtime_error&) {
      continue;  // heuristic search: skip candidates the solver stalls on
    }
    ++solved;
    if (r.report.infinite || r.report.value > best.report.value) best = r;
    if (best.report.infinite) break;
  }
  if (solved == 0)
    throw std::runtime_error("eh_maximize: no candidate input solved");
  // local refinement around the winner when it is (numerically) pure
  if (!best.report.infinite) {
    Eigen::SelfAdjointEigenSolver<CMat> es(best.psi.matrix);
    if (es.eigenvalues().maxCoeff() > 1.0 - 1e-9) {
      CVec v = es.eigenvectors().col(es.eigenvalues().size() - 1);
      std::normal_distribution<double> g(0.0, 1.0);
      for (int t = 0; t < restarts; ++t) {
        CVec pert(v.size());
        for (long i = 0; i < v.size(); ++i) pert(i) = Complex(g(rng), g(rng));
        CVec w = v + 0.1 * pert;
        w /= w.norm();
        EhResult r;
        try {
          r = eh_fixed_input(n, pure_state(w, best.psi.dims), eps, tol);
        } catch (const std::runtime_error&) {
          continue;
        }
        if (r.report.value > best.report.value) {
          best = r;
          v = w;
        }
      }
    }
  }
  best.report.name = "eh_maximize";
  best.report.bound_kind = "heuristic";
  return best;
}

double mes_overlap_ppt(int k, double tol) {
  if (k < 2) throw std::invalid_argument("mes_overlap_ppt: k < 2");
  const int d = k * k;
  CMat phi = maximally_entangled(k).matrix;
  LmiProblem p;
  int sg = lmi_add_herm_params(p, d);
  int b1 = p.add_block("psd", d, CMat::Zero(d, d));
  lmi_add_map_terms(p, b1, sg, d, [](const CMat& b) { return CMat(-b); });
  int b2 = p.add_block("ppt", d, CMat::Zero(d, d));
  lmi_add_map_terms(p, b2, sg, d, [&](const CMat& b) {
    return CMat(partial_transpose(b, {k, k}, {1}) * -1.0);
  });
  lmi_add_herm_equality(p, sg, d, CMat::Identity(d, d), 1.0);
  lmi_add_matrix_objective(p, sg, d, phi, -1.0);  // maximize the overlap
  LmiSolution sol = solve_lmi(p, tol);
  require_solved(sol, "mes_overlap_ppt");
  return -sol.value;
}

TransferCheck fidelity_diamond_transfer_check(const BipartiteChannel& n,
                                              const BipartiteChannel& m,
                                              int samples, uint64_t seed) {
  if (n.dims != m.dims)
    throw std::invalid_argument("transfer check: dims mismatch");
  TransferCheck out;
  out.diamond = diamond_distance(n, m);
  out.choi_fidelity = fidelity(n.choi, m.choi);
  const int din = n.d_in();
  const double floor2 = (1.0 - out.diamond) * (1.0 - out.diamond);
  std::mt19937_64 rng(seed);
  double worst = -1.0;
  for (int t = 0; t < samples; ++t) {
    DensityOperator psi =
        pure_state(random_pure(din * din, rng), {n.dims[0], n.dims[1], din});
    double f = fidelity(apply(n, psi), apply(m, psi));
    worst = std::max(worst, floor2 - f);
  }
  out.fidelity_slack = worst;
  out.choi_slack =
      out.diamond - din * std::sqrt(std::max(0.0, 1.0 - out.choi_fidelity));
  return out;
}

TwirlStructure standard_twirl_structure(const std::array<int, 4>& dims) {
  if (dims[0] != dims[3] || dims[1] != dims[2])
    throw std::invalid_argument("twirl: needs |A0|=|B1| and |B0|=|A1|");
  TwirlStructure ts;
  ts.dims = {dims[0], dims[1], dims[2], dims[3]};
  ts.pairs = {{0, 3}, {1, 2}};
  return ts;
}

namespace {
int pair_dim(const TwirlStructure& ts, size_t p) {
  int a = ts.dims.at(ts.pairs[p][0]), b = ts.dims.at(ts.pairs[p][1]);
  if (a != b) throw std::invalid_argument("twirl: unequal pair dims");
  return a;
}

void check_cover(const TwirlStructure& ts) {
  std::vector<int> seen(ts.dims.size(), 0);
  for (const auto& pr : ts.pairs) {
    ++seen.at(pr[0]);
    ++seen.at(pr[1]);
  }
  for (int s : seen)
    if (s != 1)
      throw std::invalid_argument("twirl: pairs must cover each subsystem once");
}
}  // namespace

CMat twirl_basis_projector(const TwirlStructure& ts, unsigned mask) {
  check_cover(ts);
  CMat acc = CMat::Identity(1, 1);
  std::vector<int> pl_dims;
  std::vector<int> pl_subsys;
  for (size_t p = 0; p < ts.pairs.size(); ++p) {
    const int k = pair_dim(ts, p);
    CMat phi = maximally_entangled(k).matrix;
    CMat f = (mask >> p) & 1u ? CMat(CMat::Identity(k * k, k * k) - phi) : phi;
    acc = kron(acc, f);
    pl_dims.push_back(k);
    pl_dims.push_back(k);
    pl_subsys.push_back(ts.pairs[p][0]);
    pl_subsys.push_back(ts.pairs[p][1]);
  }
  std::vector<int> perm(ts.dims.size());
  for (size_t k = 0; k < ts.dims.size(); ++k) {
    auto it = std::find(pl_subsys.begin(), pl_subsys.end(), static_cast<int>(k));
    perm[k] = static_cast<int>(it - pl_subsys.begin());
  }
  return permute_systems(acc, pl_dims, perm);
}

TwirlDecomposition twirl_project(const CMat& j, const TwirlStructure& ts) {
  const size_t np = ts.pairs.size();
  TwirlDecomposition out;
  out.coeffs.resize(1u << np);
  CMat recon = CMat::Zero(j.rows(), j.cols());
  for (unsigned v = 0; v < (1u << np); ++v) {
    CMat proj = twirl_basis_projector(ts, v);
    double vol = 1.0;
    for (size_t p = 0; p < np; ++p) {
      int k = pair_dim(ts, p);
      vol *= (v >> p) & 1u ? k * k - 1.0 : 1.0;
    }
    out.coeffs[v] = (proj * j).trace().real() / vol;
    recon += out.coeffs[v] * proj;
  }
  out.residual = (j - recon).cwiseAbs().maxCoeff();
  return out;
}

CMat twirl_reconstruct(const TwirlStructure& ts,
                       const std::vector<double>& coeffs) {
  const size_t np = ts.pairs.size();
  if (coeffs.size() != (1u << np))
    throw std::invalid_argument("twirl_reconstruct: coefficient count");
  CMat out;
  for (unsigned v = 0; v < (1u << np); ++v) {
    CMat proj = coeffs[v] * twirl_basis_projector(ts, v);
    out = v == 0 ? proj : CMat(out + proj);
  }
  return out;
}

RobustnessResult covariant_robustness(const BipartiteChannel& n,
                                      const TwirlStructure& ts,
                                      RobustKind kind, double tol) {
  TwirlDecomposition dec = twirl_project(n.choi, ts);
  if (dec.residual > 1e-8)
    throw std::invalid_argument("covariant_robustness: channel is not covariant");
  const size_t np = ts.pairs.size();
  const unsigned nv = 1u << np;

  std::vector<double> vol(nv);
  for (unsigned v = 0; v < nv; ++v) {
    vol[v] = 1.0;
    for (size_t p = 0; p < np; ++p) {
      int k = pair_dim(ts, p);
      vol[v] *= (v >> p) & 1u ? k * k - 1.0 : 1.0;
    }
  }
  // PT sector coefficient of basis element v in the (sym/anti) sector s:
  // Phi -> F/K contributes +-1/K, (I - Phi) -> 1 -+ 1/K.
  auto sector = [&](unsigned s, unsigned v) {
    double c = 1.0;
    for (size_t p = 0; p < np; ++p) {
      double k = pair_dim(ts, p);
      bool anti = (s >> p) & 1u;
      if ((v >> p) & 1u)
        c *= anti ? 1.0 + 1.0 / k : 1.0 - 1.0 / k;
      else
        c *= anti ? -1.0 / k : 1.0 / k;
    }
    return c;
  };

  LmiProblem p;
  for (unsigned v = 0; v < nv; ++v) {
    p.add_param();
    p.objective[v] = vol[v];
  }
  for (unsigned v = 0; v < nv; ++v) {
    int b = p.add_block("cp", 1, -dec.coeffs[v] * CMat::Identity(1, 1));
    p.add_term(b, static_cast<int>(v), 0, 0, -1.0);
  }
  for (unsigned s = 0; s < nv; ++s) {
    int b = p.add_block("ppt-mix", 1, CMat::Zero(1, 1));
    for (unsigned v = 0; v < nv; ++v)
      p.add_term(b, static_cast<int>(v), 0, 0, -sector(s, v));
  }
  if (kind == RobustKind::standard) {
    for (unsigned s = 0; s < nv; ++s) {
      double rhs = 0.0;
      for (unsigned v = 0; v < nv; ++v) rhs -= dec.coeffs[v] * sector(s, v);
      int b = p.add_block("ppt-diff", 1, rhs * CMat::Identity(1, 1));
      for (unsigned v = 0; v < nv; ++v)
        p.add_term(b, static_cast<int>(v), 0, 0, -sector(s, v));
    }
  }

  LmiSolution sol = solve_lmi(p, tol);
  require_solved(sol, "covariant_robustness");
  RobustnessResult out;
  out.s = std::max(0.0, sol.value - 1.0);
  std::vector<double> a(nv);
  for (unsigned v = 0; v < nv; ++v) a[v] = sol.y(v);
  out.W = twirl_reconstruct(ts, a);
  out.report.name = kind == RobustKind::standard
                        ? "standard_robustness_covariant"
                        : "generalized_robustness_covariant";
  out.report.value = out.s;
  out.report.bound_kind = "lower-bound-via-PPT";
  fill_report(out.report, sol);
  return out;
}

}  // namespace dynent
