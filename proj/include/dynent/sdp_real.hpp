#pragma once

#include <vector>

#include "dynent/linalg.hpp"

namespace dynent {

enum class SolveStatus { optimal, infeasible, unbounded, max_iterations };

struct SolveOptions {
  double tol = 1e-7;
  int max_iter = 200;
  bool verbose = false;
};

// One coefficient of a symmetric constraint matrix. row <= col; an off-diagonal
// entry stands for the value at (row,col) and (col,row) simultaneously, so
// <A,X> = sum over entries of (row==col ? v*X(r,r) : 2*v*X(r,c)).
struct RealEntry {
  int block;
  int row;
  int col;
  double value;
};

// min  sum_b <C_b, X_b> + f.u   s.t.  <A_i, X> + (F u)_i = b_i,  X_b >= 0,
// u free.  Dual:  max b.y  s.t.  C - A*(y) >= 0,  F^T y = f.
struct RealSdp {
  std::vector<int> block_dims;
  std::vector<RMat> C;
  std::vector<std::vector<RealEntry>> rows;  // A_i as sparse symmetric triplets
  RVec b;
  RMat F;  // m x p (p may be 0)
  RVec f;  // p
};

struct RealSolution {
  SolveStatus status = SolveStatus::max_iterations;
  double value = 0.0;
  std::vector<RMat> X;
  std::vector<RMat> S;
  RVec y;
  RVec u;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double gap = 0.0;
  double mu = 0.0;
  int iterations = 0;
};

RealSolution solve_real(const RealSdp& p, const SolveOptions& opt = {});

// Schur complement M_ij = sum_b <A_i, W_b A_j W_b>; the hot kernel of the
// interior-point iteration. Parallel over columns; ref:: is the serial oracle.
void assemble_schur(const std::vector<std::vector<RealEntry>>& rows,
                    const std::vector<RMat>& W, RMat& M);
namespace ref {
void assemble_schur(const std::vector<std::vector<RealEntry>>& rows,
                    const std::vector<RMat>& W, RMat& M);
}

}  // namespace dynent
