#pragma once

#include <array>
#include <string>
#include <vector>

#include "dynent/linalg.hpp"
#include "dynent/tensor.hpp"

namespace dynent {

// Bipartite channel A0 B0 -> A1 B1 as a normalized (trace-1) Choi matrix on
// subsystems ordered (A0, B0, A1, B1); A0,B0 are the reference copies of the
// inputs. Trace preservation reads tr_{A1B1} J = I/(|A0||B0|).
struct BipartiteChannel {
  CMat choi;
  std::array<int, 4> dims;  // |A0|, |B0|, |A1|, |B1|
  bool certified_separable = false;

  int d_in() const { return dims[0] * dims[1]; }
  int d_out() const { return dims[2] * dims[3]; }
  int d() const { return d_in() * d_out(); }
  std::vector<int> choi_dims() const { return {dims[0], dims[1], dims[2], dims[3]}; }
  void validate(double tol = 1e-8) const;  // throws with a specific message
};

struct PptFlag {
  bool is_ppt_across_AB;
  double min_pt_eigenvalue;
};

BipartiteChannel make_channel(const CMat& choi, const std::array<int, 4>& dims,
                              bool certified_separable = false);
BipartiteChannel from_kraus(const std::vector<CMat>& kraus,
                            const std::array<int, 4>& dims);

BipartiteChannel identity_channel(int a0, int b0);
BipartiteChannel swap_channel(int k);
BipartiteChannel depolarizing_channel(int a0, int b0, double p);
BipartiteChannel random_channel(const std::array<int, 4>& dims, uint64_t seed);
BipartiteChannel random_separable_channel(const std::array<int, 4>& dims,
                                          uint64_t seed, int terms);

DensityOperator maximally_entangled(int k);
// p * Phi^K + (1-p) * (I - Phi^K)/(K^2 - 1)
DensityOperator isotropic_state(int k, double p);

// Partial transpose of the Choi over the B side (B0, B1), i.e. across the
// grouped A0A1 : B0B1 cut. Subsystem indices 1 and 3.
CMat choi_partial_transpose(const CMat& j, const std::array<int, 4>& dims);
PptFlag is_ppt(const BipartiteChannel& c);

// Action of a Choi matrix (not necessarily PSD) on rho tensored with identity
// on the reference systems. rho_dims = {a0, b0, r...}; the output is ordered
// (A1, B1, r...). Linear in j; used both for apply() and for SDP coefficients.
CMat choi_apply(const CMat& j, const std::array<int, 4>& dims, const CMat& rho,
                const std::vector<int>& rho_dims);
DensityOperator apply(const BipartiteChannel& c, const DensityOperator& state);

// Convex mixture of channels with the same dims.
BipartiteChannel mix_channels(const std::vector<BipartiteChannel>& cs,
                              const std::vector<double>& weights);
// Tensor product: parties are merged pairwise, A = A x A', B = B x B'.
BipartiteChannel tensor_channels(const BipartiteChannel& n,
                                 const BipartiteChannel& m);

struct OperatorSchmidt {
  RVec coeffs;              // descending, nonnegative
  std::vector<CMat> A, B;   // u = sum_j coeffs[j] A_j (x) B_j
};
OperatorSchmidt operator_schmidt(const CMat& u, int da, int db);

// JSON channel file format: {"dims":[a0,b0,a1,b1],"choi_re":[[..]],"choi_im":[[..]]}
std::string channel_to_json(const BipartiteChannel& c);
BipartiteChannel channel_from_json(const std::string& text);
BipartiteChannel load_channel(const std::string& path);
void save_channel(const BipartiteChannel& c, const std::string& path);

}  // namespace dynent
