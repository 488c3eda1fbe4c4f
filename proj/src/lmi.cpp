#include "dynent/lmi.hpp"

#include <cmath>
#include <stdexcept>

namespace dynent {

int LmiProblem::add_param() {
  objective.push_back(0.0);
  return num_params++;
}

int LmiProblem::add_block(const std::string& name, int dim, const CMat& h) {
  if (h.rows() != dim || h.cols() != dim)
    throw std::invalid_argument("lmi: block constant dimension mismatch");
  blocks.push_back({name, dim, h, {}});
  return static_cast<int>(blocks.size()) - 1;
}

void LmiProblem::add_term(int block, int param, int row, int col, Complex v) {
  blocks.at(block).terms.push_back({param, row, col, v});
}

HermitianSdp lmi_conjugate(const LmiProblem& p) {
  HermitianSdp sdp;
  for (const auto& b : p.blocks) {
    int idx = sdp.add_block(b.name, b.dim);
    sdp.set_objective(idx, b.constant);
  }
  sdp.num_free = static_cast<int>(p.equalities.size());
  sdp.free_objective.resize(sdp.num_free);
  for (int e = 0; e < sdp.num_free; ++e)
    sdp.free_objective(e) = p.equalities[e].rhs;

  // One conjugate constraint per parameter: sum_b <F_i^(b), X_b> + sum_e
  // coeff_e,i u_e = -t_i.
  std::vector<HermitianSdp::Constraint*> rows(p.num_params);
  for (int i = 0; i < p.num_params; ++i) {
    auto& con = sdp.add_constraint(-p.objective[i]);
    con.entries.clear();
    rows[i] = &con;
  }
  // (vector may reallocate; re-grab pointers)
  for (int i = 0; i < p.num_params; ++i) rows[i] = &sdp.constraints[i];

  for (size_t b = 0; b < p.blocks.size(); ++b)
    for (const auto& t : p.blocks[b].terms)
      rows.at(t.param)->entries.push_back(
          {static_cast<int>(b), t.row, t.col, t.value});
  for (size_t e = 0; e < p.equalities.size(); ++e)
    for (const auto& c : p.equalities[e].coeffs)
      rows.at(c.first)->free_entries.push_back(
          {static_cast<int>(e), c.second});
  return sdp;
}

LmiSolution solve_lmi(const LmiProblem& p, double tol, int max_iter) {
  HermitianSdp sdp = lmi_conjugate(p);
  SdpSolution sol = solve(sdp, tol, max_iter);
  LmiSolution out;
  switch (sol.status) {
    case SolveStatus::optimal: out.status = SolveStatus::optimal; break;
    case SolveStatus::infeasible: out.status = SolveStatus::unbounded; break;
    case SolveStatus::unbounded: out.status = SolveStatus::infeasible; break;
    default: out.status = SolveStatus::max_iterations;
  }
  out.value = p.constant - sol.value;
  out.y = sol.dual;
  out.conjugate = std::move(sol);
  return out;
}

namespace {
struct ParamLoc {
  int row, col;    // row <= col
  bool imag;       // imaginary part of the (row,col) pair
};

ParamLoc locate(int dim, int k) {
  if (k < dim) return {k, k, false};
  int q = k - dim;
  int pair = q / 2;
  bool im = q % 2;
  // invert row-major pair index
  int r = 0;
  int count = dim - 1;
  while (pair >= count) {
    pair -= count;
    ++r;
    --count;
  }
  int c = r + 1 + pair;
  return {r, c, im};
}
}  // namespace

int lmi_add_herm_params(LmiProblem& p, int dim) {
  int offset = p.num_params;
  for (int i = 0; i < dim * dim; ++i) p.add_param();
  return offset;
}

CMat herm_basis(int dim, int k) {
  CMat b = CMat::Zero(dim, dim);
  ParamLoc loc = locate(dim, k);
  if (loc.row == loc.col) {
    b(loc.row, loc.col) = 1.0;
  } else if (!loc.imag) {
    b(loc.row, loc.col) = 1.0;
    b(loc.col, loc.row) = 1.0;
  } else {
    b(loc.row, loc.col) = Complex(0, 1);
    b(loc.col, loc.row) = Complex(0, -1);
  }
  return b;
}

CMat herm_from_params(const RVec& y, int offset, int dim) {
  CMat w = CMat::Zero(dim, dim);
  for (int k = 0; k < dim * dim; ++k) {
    ParamLoc loc = locate(dim, k);
    double v = y(offset + k);
    if (loc.row == loc.col)
      w(loc.row, loc.col) += v;
    else if (!loc.imag) {
      w(loc.row, loc.col) += v;
      w(loc.col, loc.row) += v;
    } else {
      w(loc.row, loc.col) += Complex(0, v);
      w(loc.col, loc.row) += Complex(0, -v);
    }
  }
  return w;
}

void lmi_add_map_terms(LmiProblem& p, int block, int offset, int dim,
                       const HermMap& map, double drop_tol) {
  for (int k = 0; k < dim * dim; ++k) {
    CMat m = hermitize(map(herm_basis(dim, k)));
    for (long r = 0; r < m.rows(); ++r) {
      if (std::abs(m(r, r)) > drop_tol)
        p.add_term(block, offset + k, static_cast<int>(r), static_cast<int>(r),
                   Complex(m(r, r).real(), 0.0));
      for (long c = r + 1; c < m.cols(); ++c)
        if (std::abs(m(r, c)) > drop_tol)
          p.add_term(block, offset + k, static_cast<int>(r),
                     static_cast<int>(c), m(r, c));
    }
  }
}

RVec lmi_inner_coeffs(int dim, const CMat& g) {
  RVec c(dim * dim);
  for (int k = 0; k < dim * dim; ++k) {
    ParamLoc loc = locate(dim, k);
    if (loc.row == loc.col)
      c(k) = g(loc.row, loc.col).real();
    else if (!loc.imag)
      c(k) = 2.0 * g(loc.row, loc.col).real();
    else
      c(k) = 2.0 * g(loc.row, loc.col).imag();
  }
  return c;
}

void lmi_add_herm_equality(LmiProblem& p, int offset, int dim, const CMat& g,
                           double rhs) {
  LmiProblem::Equality eq;
  eq.rhs = rhs;
  RVec c = lmi_inner_coeffs(dim, g);
  for (int k = 0; k < dim * dim; ++k)
    if (c(k) != 0.0) eq.coeffs.push_back({offset + k, c(k)});
  p.equalities.push_back(std::move(eq));
}

void lmi_add_matrix_objective(LmiProblem& p, int offset, int dim, const CMat& g,
                              double weight) {
  RVec c = lmi_inner_coeffs(dim, g);
  for (int k = 0; k < dim * dim; ++k) p.objective.at(offset + k) += weight * c(k);
}

void lmi_add_scalar_row(LmiProblem& p, int block, int offset, int dim,
                        const CMat& g, double sign) {
  RVec c = lmi_inner_coeffs(dim, g);
  for (int k = 0; k < dim * dim; ++k)
    if (c(k) != 0.0) p.add_term(block, offset + k, 0, 0, sign * c(k));
}

void lmi_add_trace_objective(LmiProblem& p, int offset, int dim, double weight) {
  for (int r = 0; r < dim; ++r) p.objective.at(offset + r) += weight;
}

}  // namespace dynent
