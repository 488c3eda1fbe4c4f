#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dynent/sdp.hpp"

namespace dynent {

// Linear-matrix-inequality program over a real parameter vector y:
//   min  t.y + constant
//   s.t. sum_i y_i F_i^(b) <= H_b   for every block b (Loewner order)
//        sum_i coeff_i y_i = rhs    for every equality
// Solved through the conjugate HermitianSdp whose dual variables are y; this
// keeps the constraint count at the parameter count instead of the (much
// larger) primal-form encoding.
struct LmiProblem {
  struct Term {
    int param;
    int row;
    int col;
    Complex value;  // Hermitian entry convention as in HermEntry
  };
  struct Block {
    std::string name;
    int dim;
    CMat constant;  // H_b
    std::vector<Term> terms;
  };
  struct Equality {
    std::vector<std::pair<int, double>> coeffs;
    double rhs;
  };

  int num_params = 0;
  std::vector<double> objective;  // t, grows with parameters
  double constant = 0.0;
  std::vector<Block> blocks;
  std::vector<Equality> equalities;

  int add_param();                               // returns its index
  int add_block(const std::string& name, int dim, const CMat& h);
  void add_term(int block, int param, int row, int col, Complex v);
};

struct LmiSolution {
  SolveStatus status = SolveStatus::max_iterations;
  double value = 0.0;
  RVec y;
  SdpSolution conjugate;  // the underlying solver certificate
};

HermitianSdp lmi_conjugate(const LmiProblem& p);
LmiSolution solve_lmi(const LmiProblem& p, double tol = 1e-7, int max_iter = 200);

// ---- Hermitian matrix variables over the parameter vector ----
// A d-dim Hermitian variable occupies d^2 consecutive parameters: d diagonal
// entries first, then (re, im) for each r < c pair in row-major order.

int lmi_add_herm_params(LmiProblem& p, int dim);  // returns offset

// Basis matrix of parameter `offset + k` (unit Hermitian basis element).
CMat herm_basis(int dim, int k);

// Reconstruct the matrix value from a solved parameter vector.
CMat herm_from_params(const RVec& y, int offset, int dim);

// For every parameter of the variable, apply the (Hermiticity-preserving)
// linear map to its basis element and append the resulting entries to `block`.
// Encodes map(W) as part of that block's LMI left-hand side.
using HermMap = std::function<CMat(const CMat&)>;
void lmi_add_map_terms(LmiProblem& p, int block, int offset, int dim,
                       const HermMap& map, double drop_tol = 1e-14);

// Coefficients <g, basis_k> for each of the d^2 parameters of a Hermitian
// variable (g Hermitian), so that <g, W> = coeffs . y_block.
RVec lmi_inner_coeffs(int dim, const CMat& g);

// Equality <G, W> = rhs.
void lmi_add_herm_equality(LmiProblem& p, int offset, int dim, const CMat& g,
                           double rhs);

// Adds weight * <g, W> to the objective.
void lmi_add_matrix_objective(LmiProblem& p, int offset, int dim, const CMat& g,
                              double weight);

// Appends sign * <g, W> to the (0,0) entry of a 1x1 block (scalar row).
void lmi_add_scalar_row(LmiProblem& p, int block, int offset, int dim,
                        const CMat& g, double sign);

// Adds weight * tr(W) to the objective.
void lmi_add_trace_objective(LmiProblem& p, int offset, int dim, double weight);

}  // namespace dynent
