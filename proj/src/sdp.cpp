#include "dynent/sdp.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dynent {

namespace {

// <A,X> for Hermitian A given as sparse entries and Hermitian X.
double herm_inner(const std::vector<HermEntry>& entries,
                  const std::vector<CMat>& X) {
  double s = 0.0;
  for (const auto& e : entries) {
    if (e.row == e.col)
      s += e.value.real() * X[e.block](e.row, e.col).real();
    else
      s += 2.0 * (std::conj(e.value) * X[e.block](e.row, e.col)).real();
  }
  return s;
}

void embed_entry(const HermEntry& e, int n, int block,
                 std::vector<RealEntry>& out) {
  int r = e.row, c = e.col;
  Complex v = e.value;
  if (r > c) {
    std::swap(r, c);
    v = std::conj(v);
  }
  const double a = v.real(), im = v.imag();
  if (r == c) {
    out.push_back({block, r, r, a});
    out.push_back({block, n + r, n + r, a});
  } else {
    out.push_back({block, r, c, a});
    out.push_back({block, n + r, n + c, a});
    if (im != 0.0) {
      out.push_back({block, r, n + c, -im});
      out.push_back({block, c, n + r, im});
    }
  }
}

RMat embed_dense(const CMat& A) {
  const long n = A.rows();
  RMat out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = A.real();
  out.bottomRightCorner(n, n) = A.real();
  out.topRightCorner(n, n) = -A.imag();
  out.bottomLeftCorner(n, n) = A.imag();
  return out;
}

CMat unembed(const RMat& Xh) {
  const long n = Xh.rows() / 2;
  CMat out(n, n);
  out.real() = 0.5 * (Xh.topLeftCorner(n, n) + Xh.bottomRightCorner(n, n));
  out.imag() = 0.5 * (Xh.bottomLeftCorner(n, n) - Xh.topRightCorner(n, n));
  return 0.5 * (out + out.adjoint()).eval();
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    default: return "max-iterations";
  }
}

int HermitianSdp::add_block(const std::string& name, int dim) {
  if (dim < 1) throw std::invalid_argument("sdp: block dimension < 1");
  blocks.emplace_back(name, dim);
  objective.emplace_back();
  return static_cast<int>(blocks.size()) - 1;
}

int HermitianSdp::block_index(const std::string& name) const {
  for (size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].first == name) return static_cast<int>(i);
  return -1;
}

void HermitianSdp::set_objective(int block, const CMat& c) {
  objective.at(block) = c;
}

HermitianSdp::Constraint& HermitianSdp::add_constraint(double rhs) {
  constraints.push_back({});
  constraints.back().rhs = rhs;
  return constraints.back();
}

void HermitianSdp::add_dense(Constraint& con, int block, const CMat& a,
                             double drop_tol) {
  const long n = a.rows();
  for (long r = 0; r < n; ++r) {
    if (std::abs(a(r, r)) > drop_tol || (drop_tol == 0.0 && a(r, r) != 0.0))
      con.entries.push_back({block, static_cast<int>(r), static_cast<int>(r),
                             Complex(a(r, r).real(), 0.0)});
    for (long c = r + 1; c < n; ++c)
      if (std::abs(a(r, c)) > drop_tol || (drop_tol == 0.0 && a(r, c) != Complex(0, 0)))
        con.entries.push_back({block, static_cast<int>(r), static_cast<int>(c), a(r, c)});
  }
}

void HermitianSdp::check_well_formed() const {
  if (blocks.empty()) throw std::invalid_argument("sdp: no blocks");
  if (objective.size() != blocks.size())
    throw std::invalid_argument("sdp: objective/block count mismatch");
  for (size_t b = 0; b < blocks.size(); ++b) {
    if (objective[b].size() != 0) {
      if (objective[b].rows() != blocks[b].second ||
          objective[b].cols() != blocks[b].second)
        throw std::invalid_argument("sdp: objective dimension mismatch");
      if (!is_hermitian(objective[b], 1e-10))
        throw std::invalid_argument("sdp: objective not Hermitian");
      if (!is_finite(objective[b]))
        throw std::invalid_argument("sdp: objective not finite");
    }
  }
  if (num_free > 0 && free_objective.size() != num_free)
    throw std::invalid_argument("sdp: free objective size mismatch");
  for (const auto& con : constraints) {
    if (!std::isfinite(con.rhs)) throw std::invalid_argument("sdp: rhs not finite");
    for (const auto& e : con.entries) {
      if (e.block < 0 || e.block >= static_cast<int>(blocks.size()))
        throw std::invalid_argument("sdp: entry block out of range");
      const int d = blocks[e.block].second;
      if (e.row < 0 || e.row >= d || e.col < 0 || e.col >= d)
        throw std::invalid_argument("sdp: entry index out of range");
      if (e.row == e.col && std::abs(e.value.imag()) > 1e-12)
        throw std::invalid_argument("sdp: diagonal entry must be real");
      if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
        throw std::invalid_argument("sdp: entry not finite");
    }
    for (const auto& fe : con.free_entries)
      if (fe.first < 0 || fe.first >= num_free)
        throw std::invalid_argument("sdp: free index out of range");
  }
}

SdpSolution solve(const HermitianSdp& problem, double tol, int max_iter) {
  problem.check_well_formed();
  const double sign = problem.maximize ? -1.0 : 1.0;
  const long nb = static_cast<long>(problem.blocks.size());
  const long m = static_cast<long>(problem.constraints.size());
  const long p = problem.num_free;

  RealSdp rp;
  rp.block_dims.resize(nb);
  rp.C.resize(nb);
  for (long b = 0; b < nb; ++b) {
    const int n = problem.blocks[b].second;
    rp.block_dims[b] = 2 * n;
    if (problem.objective[b].size() != 0)
      rp.C[b] = sign * embed_dense(problem.objective[b]);
    else
      rp.C[b] = RMat::Zero(2 * n, 2 * n);
  }
  rp.rows.resize(m);
  rp.b.resize(m);
  rp.F = RMat::Zero(m, p);
  for (long i = 0; i < m; ++i) {
    const auto& con = problem.constraints[i];
    for (const auto& e : con.entries)
      embed_entry(e, problem.blocks[e.block].second, e.block, rp.rows[i]);
    rp.b(i) = 2.0 * con.rhs;
    for (const auto& fe : con.free_entries) rp.F(i, fe.first) += 2.0 * fe.second;
  }
  rp.f = p ? RVec(2.0 * sign * problem.free_objective) : RVec();

  SolveOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  RealSolution rs = solve_real(rp, opt);

  SdpSolution sol;
  sol.status = rs.status;
  sol.value = problem.objective_constant + sign * 0.5 * rs.value;
  sol.primal.resize(nb);
  for (long b = 0; b < nb; ++b) sol.primal[b] = unembed(rs.X[b]);
  sol.dual = rs.y;
  sol.free_values = rs.u;
  sol.primal_res = rs.primal_res;
  sol.dual_res = rs.dual_res;
  sol.gap = rs.gap;
  sol.iterations = rs.iterations;
  return sol;
}

VerifyReport verify(const HermitianSdp& problem, const SdpSolution& sol,
                    double tol) {
  problem.check_well_formed();
  VerifyReport rep;
  const double sign = problem.maximize ? -1.0 : 1.0;
  const long nb = static_cast<long>(problem.blocks.size());
  const long m = static_cast<long>(problem.constraints.size());

  double rhs_scale = 1.0;
  for (const auto& con : problem.constraints)
    rhs_scale = std::max(rhs_scale, std::abs(con.rhs));

  // Primal feasibility.
  for (long i = 0; i < m; ++i) {
    const auto& con = problem.constraints[i];
    double lhs = herm_inner(con.entries, sol.primal);
    for (const auto& fe : con.free_entries)
      lhs += fe.second * sol.free_values(fe.first);
    rep.max_constraint_violation =
        std::max(rep.max_constraint_violation, std::abs(lhs - con.rhs));
  }
  if (rep.max_constraint_violation > tol * rhs_scale)
    rep.flags.push_back("primal-feasibility");

  rep.min_primal_eigenvalue = 0.0;
  for (long b = 0; b < nb; ++b)
    rep.min_primal_eigenvalue =
        std::min(rep.min_primal_eigenvalue,
                 min_eigenvalue(hermitize(sol.primal[b]), 1e-6));
  if (rep.min_primal_eigenvalue < -tol * 10.0) rep.flags.push_back("primal-psd");

  // Dual feasibility: sign*C - sum_i y_i A_i must be PSD (min convention).
  double obj_scale = 1.0;
  rep.dual_slack_min_eigenvalue = 0.0;
  for (long b = 0; b < nb; ++b) {
    const int n = problem.blocks[b].second;
    CMat Z = CMat::Zero(n, n);
    if (problem.objective[b].size() != 0) Z = sign * problem.objective[b];
    obj_scale = std::max(obj_scale, Z.cwiseAbs().maxCoeff());
    for (long i = 0; i < m; ++i)
      for (const auto& e : problem.constraints[i].entries) {
        if (e.block != b) continue;
        Z(e.row, e.col) -= sol.dual(i) * e.value;
        if (e.row != e.col) Z(e.col, e.row) -= sol.dual(i) * std::conj(e.value);
      }
    rep.dual_slack_min_eigenvalue =
        std::min(rep.dual_slack_min_eigenvalue, min_eigenvalue(hermitize(Z), 1e-6));
  }
  if (rep.dual_slack_min_eigenvalue < -tol * 10.0 * obj_scale)
    rep.flags.push_back("dual-feasibility");

  if (problem.num_free > 0) {
    RVec g = sign * problem.free_objective;
    for (long i = 0; i < m; ++i)
      for (const auto& fe : problem.constraints[i].free_entries)
        g(fe.first) -= sol.dual(i) * fe.second;
    rep.free_dual_violation = g.cwiseAbs().maxCoeff();
    if (rep.free_dual_violation > tol * 10.0) rep.flags.push_back("free-dual");
  }

  // Objective consistency + duality gap against the reported value.
  double pobj = 0.0;
  for (long b = 0; b < nb; ++b)
    if (problem.objective[b].size() != 0)
      pobj += (problem.objective[b].adjoint() * sol.primal[b]).trace().real();
  for (int k = 0; k < problem.num_free; ++k)
    pobj += problem.free_objective.size() ? problem.free_objective(k) * sol.free_values(k)
                                          : 0.0;
  pobj += problem.objective_constant;
  double dobj = 0.0;
  for (long i = 0; i < m; ++i) dobj += sol.dual(i) * problem.constraints[i].rhs;
  dobj = problem.objective_constant + sign * dobj;
  double scale = 1.0 + std::abs(pobj) + std::abs(dobj);
  rep.duality_gap = std::max(std::abs(pobj - dobj), std::abs(sol.value - pobj));
  if (std::abs(pobj - dobj) > tol * scale * 10.0 ||
      std::abs(sol.value - pobj) > tol * 3.0 * (1.0 + std::abs(pobj)))
    rep.flags.push_back("duality-gap");

  return rep;
}

void dump(const HermitianSdp& problem, std::ostream& os) {
  os << "hermitian-sdp\n";
  os << "sense " << (problem.maximize ? "max" : "min") << "\n";
  os << "constant " << problem.objective_constant << "\n";
  for (size_t b = 0; b < problem.blocks.size(); ++b)
    os << "block " << problem.blocks[b].first << " " << problem.blocks[b].second
       << "\n";
  for (size_t b = 0; b < problem.blocks.size(); ++b) {
    const CMat& c = problem.objective[b];
    for (long r = 0; r < c.rows(); ++r)
      for (long col = r; col < c.cols(); ++col)
        if (c(r, col) != Complex(0, 0))
          os << "obj " << b << " " << r << " " << col << " " << c(r, col).real()
             << " " << c(r, col).imag() << "\n";
  }
  for (int k = 0; k < problem.num_free; ++k)
    os << "free " << k << " " << problem.free_objective(k) << "\n";
  for (size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& con = problem.constraints[i];
    os << "con " << i << " rhs " << con.rhs << "\n";
    for (const auto& e : con.entries)
      os << "con " << i << " coef " << e.block << " " << e.row << " " << e.col
         << " " << e.value.real() << " " << e.value.imag() << "\n";
    for (const auto& fe : con.free_entries)
      os << "con " << i << " freecoef " << fe.first << " " << fe.second << "\n";
  }
}

}  // namespace dynent
