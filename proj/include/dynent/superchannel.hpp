#pragma once

#include <string>
#include <utility>

#include "dynent/channel.hpp"
#include "dynent/measures.hpp"

namespace dynent {

// A superchannel in one of two executable forms.
//
// MeasureAndPrepare acts on the slot channel's Choi state: the effect Q_eff is
// measured on J^E and the output is the corresponding hit/miss mixture,
//   Theta[E] = tr(Q_eff J^E) hit + tr((I - Q_eff) J^E) miss.
//
// PrePost is the generic composition form: pre maps the outer input into the
// slot input plus a memory (mem_a with party A, mem_b with party B), the slot
// channel acts tensored with the identity on the memory, post maps slot output
// plus memory to the outer output. Party-local subsystem order is
// (slot, memory) on both sides.
struct Superchannel {
  enum class Form { pre_post, measure_and_prepare };
  Form form = Form::measure_and_prepare;
  std::array<int, 4> slot_dims{1, 1, 1, 1};
  std::array<int, 4> out_dims{1, 1, 1, 1};

  // measure-and-prepare
  CMat q_eff;
  BipartiteChannel hit, miss;

  // pre-post
  BipartiteChannel pre, post;
  int mem_a = 1, mem_b = 1;

  void validate() const;  // structural checks; throws with a message
};

Superchannel make_measure_and_prepare(const CMat& q_eff,
                                      const BipartiteChannel& hit,
                                      const BipartiteChannel& miss,
                                      const std::array<int, 4>& slot_dims);
Superchannel make_pre_post(const BipartiteChannel& pre,
                           const BipartiteChannel& post,
                           const std::array<int, 4>& slot_dims, int mem_a,
                           int mem_b);

BipartiteChannel apply_superchannel(const Superchannel& theta,
                                    const BipartiteChannel& e);

// Link product of normalized Chois: j1 of a map (din -> dmid), j2 of a map
// (dmid -> dout); returns the Choi of the composition on (din, dout).
CMat compose_choi(const CMat& j1, int din, int dmid, const CMat& j2, int dout);

// Realization of a MeasureAndPrepare superchannel in pre/post form: the pre
// channel stores the outer input in memory and probes the slot with halves of
// maximally entangled pairs (so the slot's Choi state appears on the probe),
// the post channel measures {Q_eff, I - Q_eff} on it and conditionally
// prepares hit or miss on the stored input.
Superchannel to_pre_post(const Superchannel& theta);

// F^k, or the trivial one-dimensional identity channel at k = 1.
BipartiteChannel golden_unit(int k);

// The three constructions.
Superchannel dilution_superchannel(const BipartiteChannel& target,
                                   const BipartiteChannel& mix, double r,
                                   int k);
Superchannel distillation_superchannel(const DensityOperator& psi_star,
                                       const CMat& q_star, int k,
                                       const std::array<int, 4>& slot_dims);
BipartiteChannel twisted_twirl(const BipartiteChannel& e);

// Orthogonal projection onto operators of the form sum_v Pi_v (x) Y_v over the
// listed pairs (other subsystems untouched); the exact Haar pair twirl.
CMat partial_pair_twirl(const CMat& j, const std::vector<int>& dims,
                        const std::vector<std::array<int, 2>>& pairs);

struct SeppscCertificate {
  int samples = 0;
  double max_output_robustness = 0.0;
  double delta_claim = 0.0;
  bool pass = false;
  std::string worst_witness;  // serialized worst free probe channel
};

// Sampled necessary check of (delta-)separability preservation: draws
// certified-separable probes and measures the generalized robustness of each
// output (covariant LP when a structure is supplied, full SDP otherwise).
SeppscCertificate seppsc_certify(const Superchannel& theta, int samples,
                                 double delta, uint64_t seed,
                                 const TwirlStructure* covariant = nullptr);

struct CostReport {
  double lower = 0.0;
  double realized = 0.0;
  double upper = 0.0;
  double sim_residual = 0.0;
  int k = 1;
  MeasureReport robustness;
  SeppscCertificate cert;
};
CostReport cost_bound_harness(const BipartiteChannel& n, double eps,
                              uint64_t seed = 99, int cert_samples = 8);

struct DistillReport {
  double eh_eps = 0.0;
  double eh_two_eps = 0.0;
  double lower = 0.0;     // parity-adjusted lower bound
  double realized = 0.0;  // log2 k^2
  double diamond_err = 0.0;
  int k = 1;
  MeasureReport eh_report;
};
DistillReport distill_bound_harness(const BipartiteChannel& n, double eps,
                                    int restarts = 4, uint64_t seed = 7);

struct CatalysisReport {
  double realized = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double eps_prime = 0.0;
  double miss_robustness = 0.0;  // NaN when no exact oracle fits the size
  int k = 1;
  int l = 1;
};
std::pair<Superchannel, CatalysisReport> catalytic_dilution(
    const BipartiteChannel& n, int l, double delta, double eps,
    double tol = 1e-7);

// Twirl structure of Theta[.]-outputs for catalysis on a covariant channel
// with dims (a,b,a,b): the composite N (x) F^l Choi refines into eight
// subsystems with the twisted pairing on each factor.
TwirlStructure composite_twirl_structure(const std::array<int, 4>& n_dims,
                                         int l);

// Sampled free superchannel families for the monotonicity suites.
Superchannel random_seppsc(const std::array<int, 4>& dims, uint64_t seed);
// Product-unitary pre (so inputs pull back through it exactly), separable post.
Superchannel random_unitary_pre_seppsc(const std::array<int, 4>& dims,
                                       uint64_t seed);
// psi pushed through the pre channel; candidate input for eh_maximize on the
// original channel when testing E_H monotonicity.
DensityOperator pre_pullback(const Superchannel& theta,
                             const DensityOperator& psi);

std::string superchannel_to_json(const Superchannel& t);
Superchannel superchannel_from_json(const std::string& text);

}  // namespace dynent
