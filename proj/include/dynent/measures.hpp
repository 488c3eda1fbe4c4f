#pragma once

#include <optional>
#include <string>

#include "dynent/channel.hpp"
#include "dynent/lmi.hpp"
#include "dynent/sdp.hpp"

namespace dynent {

// Scalar quantity with its relaxation caveat and solver certificate summary.
// bound_kind records how the SEPC set was handled: every SEPC minimization is
// relaxed to PPT-Choi (value becomes a lower bound of the true quantity),
// maximizations over free objects are sampled (upper-bound-via-sampling), and
// nonconvex outer maximizations are heuristic.
struct MeasureReport {
  std::string name;
  double value = 0.0;
  bool infinite = false;
  std::string bound_kind = "exact";
  double epsilon = 0.0;
  std::string solver_status = "optimal";
  double primal_res = 0.0;
  double dual_res = 0.0;
  double gap = 0.0;
};

std::string report_to_json(const MeasureReport& r);

// ---- distances ----

// 1/2 || N - M ||_diamond, in [0,1].
double diamond_distance(const BipartiteChannel& n, const BipartiteChannel& m,
                        double tol = 1e-8);

// D_max(N||M) = log2 of the least lambda with lambda*M - N completely
// positive; +infinity (infinite flag) on support mismatch.
MeasureReport dmax(const BipartiteChannel& n, const BipartiteChannel& m);

// ---- robustness ----

enum class RobustKind { standard, generalized };

struct RobustnessResult {
  MeasureReport report;
  double s = 0.0;  // the robustness value
  CMat W;          // optimal W = J + s*M, trace 1+s
};

RobustnessResult generalized_robustness(const BipartiteChannel& n,
                                        double tol = 1e-7);
RobustnessResult standard_robustness(const BipartiteChannel& n,
                                     double tol = 1e-7);
// The optimal mixing channel M = (W - J)/s (returns n itself when s ~ 0).
BipartiteChannel robustness_mix(const RobustnessResult& r,
                                const BipartiteChannel& n);

double log_robustness(const BipartiteChannel& n, RobustKind kind,
                      double tol = 1e-7);

struct SmoothedResult {
  MeasureReport report;
  double s = 0.0;
  CMat W;
  CMat Jprime;  // Choi of the optimal nearby channel N^eps
};
// min over channels N' with (1/2)||N'-N||_diamond <= eps of LR(N'); one joint
// SDP. eps = 0 falls back to the unsmoothed solve (the degenerate ball has no
// interior).
SmoothedResult smoothed_log_robustness(const BipartiteChannel& n, double eps,
                                       RobustKind kind, double tol = 1e-7);

// Liberal ball: only the output on the fixed input phi (on A0,B0,R) is
// constrained, to trace distance eps.
SmoothedResult liberal_smoothed_log_robustness(const BipartiteChannel& n,
                                               const DensityOperator& phi,
                                               double eps, double tol = 1e-7);

struct NielsenResult {
  bool applicable = false;  // Schmidt factors must satisfy A_j A_j^dag = I/|A|
  double value = 0.0;
  RVec coeffs;
};
NielsenResult nielsen_unitary_robustness(const CMat& u, int da, int db);

// ---- hypothesis testing ----

// -log2 min tr(Q sigma) over 0 <= Q <= I, tr(Q rho) >= 1 - eps.
MeasureReport hypothesis_testing_divergence(const DensityOperator& rho,
                                            const DensityOperator& sigma,
                                            double eps, double tol = 1e-7);

struct EhResult {
  MeasureReport report;
  CMat Q;              // optimal test on (A1,B1,R)
  DensityOperator psi; // the input it was computed at
};

// E_H at a fixed input psi on (A0,B0,R): -log2 inf_Q max_{M PPT-TP}
// tr(Q (M(x)id)psi), as one SDP via the dual of the inner maximization.
EhResult eh_fixed_input(const BipartiteChannel& n, const DensityOperator& psi,
                        double eps, double tol = 1e-7);

// Effect on the Choi space representing the channel-evaluation functional
// E -> tr(q . (E (x) id)(psi)): tr(effect J^E) equals that for every channel E
// with the given dims. q lives on the output space (A1,B1,R) of psi.
CMat channel_eval_effect(const CMat& q, const std::array<int, 4>& dims,
                         const DensityOperator& psi);

// Direct solve of the inner maximization at a fixed Q; validation oracle for
// the dualization inside eh_fixed_input.
double eh_inner_primal(const BipartiteChannel& n, const DensityOperator& psi,
                       const CMat& q, double tol = 1e-7);

// Outer maximization over psi: maximally entangled ansatz + seeded random
// restarts + local perturbation refinement. Heuristic lower bound. Additional
// candidate inputs (e.g. pullbacks through a superchannel's pre-processing)
// may be supplied.
EhResult eh_maximize(const BipartiteChannel& n, double eps, int restarts,
                     uint64_t seed,
                     const std::vector<DensityOperator>& extra_inputs = {},
                     double tol = 1e-7);

// ---- closed-form / auxiliary checks ----

// PPT-SDP maximum of tr(Phi^K sigma) over states sigma; equals 1/K.
double mes_overlap_ppt(int k, double tol = 1e-7);

struct TransferCheck {
  double fidelity_slack = 0.0;  // max over samples of (1-eps)^2 - F(outputs)
  double choi_slack = 0.0;      // (1/2)||.||_dia - |A0||B0| sqrt(1 - F(J,J'))
  double diamond = 0.0;
  double choi_fidelity = 0.0;
};
TransferCheck fidelity_diamond_transfer_check(const BipartiteChannel& n,
                                              const BipartiteChannel& m,
                                              int samples = 10,
                                              uint64_t seed = 1234);

// ---- twirl-covariant fast path ----

// Exact PPT robustness for channels invariant under the pairwise twirl
// (projection residual below 1e-8 required): reduces to a linear program in
// the 2^P sector coefficients. Same value as the SDP path, far cheaper;
// needed at composite dimensions where the dense SDP is out of reach.
struct TwirlStructure {
  std::vector<int> dims;                 // refined Choi subsystem dims
  std::vector<std::array<int, 2>> pairs; // (reference, output) subsystem per pair
};
TwirlStructure standard_twirl_structure(const std::array<int, 4>& dims);

struct TwirlDecomposition {
  std::vector<double> coeffs;  // index = bitmask over pairs, bit=1 means I-Phi
  double residual;             // max |J - reconstruction|
};
CMat twirl_basis_projector(const TwirlStructure& ts, unsigned mask);
TwirlDecomposition twirl_project(const CMat& j, const TwirlStructure& ts);
CMat twirl_reconstruct(const TwirlStructure& ts,
                       const std::vector<double>& coeffs);

RobustnessResult covariant_robustness(const BipartiteChannel& n,
                                      const TwirlStructure& ts,
                                      RobustKind kind, double tol = 1e-9);

}  // namespace dynent
