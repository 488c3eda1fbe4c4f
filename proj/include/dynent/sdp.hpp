#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dynent/linalg.hpp"
#include "dynent/sdp_real.hpp"

namespace dynent {

// Sparse coefficient of a Hermitian constraint matrix. For row < col the entry
// stands for value at (row,col) and conj(value) at (col,row); diagonal entries
// must have real value. <A,X> = Re tr(A X).
struct HermEntry {
  int block;
  int row;
  int col;
  Complex value;
};

// Conic program over Hermitian PSD blocks with affine equality constraints and
// optional free scalar variables:
//   min/max  sum_b <C_b, X_b> + free_objective.u + constant
//   s.t.     sum over entries <A_i, X> + (free_coeff u)_i = rhs_i,  X_b >= 0.
struct HermitianSdp {
  std::vector<std::pair<std::string, int>> blocks;
  std::vector<CMat> objective;  // one per block; empty matrix means zero
  double objective_constant = 0.0;
  bool maximize = false;

  struct Constraint {
    std::vector<HermEntry> entries;
    std::vector<std::pair<int, double>> free_entries;  // (free var index, coeff)
    double rhs = 0.0;
  };
  std::vector<Constraint> constraints;

  int num_free = 0;
  RVec free_objective;  // size num_free (may be empty when num_free == 0)

  int add_block(const std::string& name, int dim);
  int block_index(const std::string& name) const;  // -1 if absent
  void set_objective(int block, const CMat& c);
  // Append a constraint whose coefficient on `block` is the dense Hermitian
  // matrix a (zeros dropped).
  Constraint& add_constraint(double rhs);
  static void add_dense(Constraint& con, int block, const CMat& a,
                        double drop_tol = 0.0);
  void check_well_formed() const;  // throws on malformed input
};

struct SdpSolution {
  SolveStatus status = SolveStatus::max_iterations;
  double value = 0.0;            // objective in the user's sense
  std::vector<CMat> primal;      // Hermitian PSD block values
  RVec dual;                     // one scalar per constraint (min convention)
  RVec free_values;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

SdpSolution solve(const HermitianSdp& problem, double tol = 1e-7,
                  int max_iter = 200);

struct VerifyReport {
  double max_constraint_violation = 0.0;
  double min_primal_eigenvalue = 0.0;
  double dual_slack_min_eigenvalue = 0.0;
  double free_dual_violation = 0.0;
  double duality_gap = 0.0;
  std::vector<std::string> flags;  // names of checks exceeding tol
  bool ok() const { return flags.empty(); }
};

// Recomputes every residual from (problem, sol) alone.
VerifyReport verify(const HermitianSdp& problem, const SdpSolution& sol,
                    double tol);

// Text dump (block sizes + constraint triplets) for external cross-checking;
// format documented in the README.
void dump(const HermitianSdp& problem, std::ostream& os);

const char* to_string(SolveStatus s);

}  // namespace dynent
