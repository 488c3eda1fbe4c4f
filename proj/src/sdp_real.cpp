#include "dynent/sdp_real.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#ifdef DYNENT_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace dynent {

namespace {

RMat sym(const RMat& m) { return 0.5 * (m + m.transpose()); }

double entry_inner(const std::vector<RealEntry>& row, const std::vector<RMat>& X) {
  double s = 0.0;
  for (const auto& e : row) {
    double x = X[e.block](e.row, e.col);
    s += (e.row == e.col) ? e.value * x : 2.0 * e.value * x;
  }
  return s;
}

RVec apply_A(const RealSdp& p, const std::vector<RMat>& X) {
  RVec out(p.b.size());
  for (long i = 0; i < p.b.size(); ++i) out(i) = entry_inner(p.rows[i], X);
  return out;
}

void apply_AT(const RealSdp& p, const RVec& y, std::vector<RMat>& out) {
  for (size_t b = 0; b < p.block_dims.size(); ++b)
    out[b].setZero(p.block_dims[b], p.block_dims[b]);
  for (long i = 0; i < y.size(); ++i)
    for (const auto& e : p.rows[i]) {
      out[e.block](e.row, e.col) += y(i) * e.value;
      if (e.row != e.col) out[e.block](e.col, e.row) += y(i) * e.value;
    }
}

double block_inner(const std::vector<RMat>& A, const std::vector<RMat>& B) {
  double s = 0.0;
  for (size_t b = 0; b < A.size(); ++b) s += A[b].cwiseProduct(B[b]).sum();
  return s;
}

// Largest alpha with X + alpha*dX PSD (X assumed PD).
double max_step(const RMat& X, const RMat& dX) {
  Eigen::LLT<RMat> llt(X);
  RMat Y;
  if (llt.info() == Eigen::Success) {
    RMat L = llt.matrixL();
    RMat A = L.triangularView<Eigen::Lower>().solve(dX);
    Y = L.triangularView<Eigen::Lower>().solve(A.transpose()).transpose();
  } else {
    Eigen::SelfAdjointEigenSolver<RMat> es(X);
    RVec ev = es.eigenvalues().cwiseMax(1e-14);
    RMat Xm12 = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                es.eigenvectors().transpose();
    Y = Xm12 * dX * Xm12;
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(sym(Y), Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-13) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

// W = X^{1/2} (X^{1/2} S X^{1/2})^{-1/2} X^{1/2}. Returns false if X or S is
// numerically indefinite.
bool nt_scaling(const RMat& X, const RMat& S, RMat& W) {
  Eigen::SelfAdjointEigenSolver<RMat> ex(X);
  if (ex.eigenvalues().minCoeff() <= 0.0) return false;
  RMat X12 = ex.eigenvectors() * ex.eigenvalues().cwiseSqrt().asDiagonal() *
             ex.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<RMat> em(sym(X12 * S * X12));
  if (em.eigenvalues().minCoeff() <= 0.0) return false;
  RMat Mm12 = em.eigenvectors() *
              em.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
              em.eigenvectors().transpose();
  W = sym(X12 * Mm12 * X12);
  return true;
}

class CholFactor {
 public:
  // Factors M in place with diagonal jitter escalation.
  bool factor(RMat m) {
    fac_ = std::move(m);
    const long n = fac_.rows();
    double base = fac_.diagonal().cwiseAbs().maxCoeff() / std::max<long>(n, 1);
    double jitter = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      RMat trial = fac_;
      if (jitter > 0.0) trial.diagonal().array() += jitter;
      if (try_factor(trial)) {
        fac_ = std::move(trial);
        return true;
      }
      jitter = (jitter == 0.0) ? std::max(base, 1.0) * 1e-14 : jitter * 100.0;
    }
    return false;
  }

  RMat solve(const RMat& rhs) const {
    RMat x = rhs;
#ifdef DYNENT_HAVE_LAPACKE
    if (lapack_) {
      LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', fac_.rows(), x.cols(),
                     fac_.data(), fac_.rows(), x.data(), x.rows());
      return x;
    }
#endif
    fac_.triangularView<Eigen::Lower>().solveInPlace(x);
    fac_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
  }

 private:
  bool try_factor(RMat& m) {
#ifdef DYNENT_HAVE_LAPACKE
    lapack_ = true;
    lapack_int info =
        LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', m.rows(), m.data(), m.rows());
    return info == 0;
#else
    Eigen::LLT<Eigen::Ref<RMat>> llt(m);
    return llt.info() == Eigen::Success;
#endif
  }

  RMat fac_;
  bool lapack_ = false;
};

}  // namespace

void assemble_schur(const std::vector<std::vector<RealEntry>>& rows,
                    const std::vector<RMat>& W, RMat& M) {
  const long m = static_cast<long>(rows.size());
  M.resize(m, m);
#pragma omp parallel for schedule(dynamic, 8)
  for (long j = 0; j < m; ++j) {
    // T_b = W_b A_j W_b via outer products of W columns.
    std::vector<RMat> T(W.size());
    std::vector<char> touched(W.size(), 0);
    for (const auto& e : rows[j]) {
      if (!touched[e.block]) {
        T[e.block].setZero(W[e.block].rows(), W[e.block].cols());
        touched[e.block] = 1;
      }
      const RMat& Wb = W[e.block];
      if (e.row == e.col) {
        T[e.block].noalias() += e.value * Wb.col(e.row) * Wb.col(e.row).transpose();
      } else {
        T[e.block].noalias() += e.value * Wb.col(e.row) * Wb.col(e.col).transpose();
        T[e.block].noalias() += e.value * Wb.col(e.col) * Wb.col(e.row).transpose();
      }
    }
    for (long i = 0; i < m; ++i) {
      double s = 0.0;
      for (const auto& e : rows[i]) {
        if (!touched[e.block]) continue;
        double t = T[e.block](e.row, e.col);
        s += (e.row == e.col) ? e.value * t : e.value * (t + T[e.block](e.col, e.row));
      }
      M(i, j) = s;
    }
  }
  M = 0.5 * (M + M.transpose().eval());
}

namespace ref {
void assemble_schur(const std::vector<std::vector<RealEntry>>& rows,
                    const std::vector<RMat>& W, RMat& M) {
  const long m = static_cast<long>(rows.size());
  M.resize(m, m);
  auto densify = [&](const std::vector<RealEntry>& row) {
    std::vector<RMat> A(W.size());
    for (size_t b = 0; b < W.size(); ++b) A[b].setZero(W[b].rows(), W[b].cols());
    for (const auto& e : row) {
      A[e.block](e.row, e.col) += e.value;
      if (e.row != e.col) A[e.block](e.col, e.row) += e.value;
    }
    return A;
  };
  for (long j = 0; j < m; ++j) {
    auto Aj = densify(rows[j]);
    for (size_t b = 0; b < W.size(); ++b) Aj[b] = W[b] * Aj[b] * W[b];
    for (long i = 0; i < m; ++i) {
      auto Ai = densify(rows[i]);
      double s = 0.0;
      for (size_t b = 0; b < W.size(); ++b) s += Ai[b].cwiseProduct(Aj[b]).sum();
      M(i, j) = s;
    }
  }
}
}  // namespace ref

RealSolution solve_real(const RealSdp& p, const SolveOptions& opt) {
  const long m = p.b.size();
  const long nb = static_cast<long>(p.block_dims.size());
  const long nf = p.f.size();
  if (static_cast<long>(p.rows.size()) != m)
    throw std::invalid_argument("solve_real: row count mismatch");
  if (nf > 0 && (p.F.rows() != m || p.F.cols() != nf))
    throw std::invalid_argument("solve_real: free coefficient shape mismatch");

  long N = 0;
  for (int d : p.block_dims) N += d;

  RealSolution sol;
  sol.X.resize(nb);
  sol.S.resize(nb);
  double scale = 1.0;
  for (long b = 0; b < nb; ++b) scale = std::max(scale, p.C[b].cwiseAbs().maxCoeff());
  if (m > 0) scale = std::max(scale, p.b.cwiseAbs().maxCoeff());
  double xi = std::max(10.0, scale);
  for (long b = 0; b < nb; ++b) {
    sol.X[b] = xi * RMat::Identity(p.block_dims[b], p.block_dims[b]);
    sol.S[b] = xi * RMat::Identity(p.block_dims[b], p.block_dims[b]);
  }
  sol.y = RVec::Zero(m);
  sol.u = RVec::Zero(nf);

  const double bnorm = 1.0 + (m ? p.b.cwiseAbs().maxCoeff() : 0.0);
  double cnorm = 1.0;
  for (long b = 0; b < nb; ++b) cnorm = std::max(cnorm, 1.0 + p.C[b].cwiseAbs().maxCoeff());
  const double fnorm = 1.0 + (nf ? p.f.cwiseAbs().maxCoeff() : 0.0);
  const double tau = 0.98;

  std::vector<RMat> Rd(nb), W(nb), ATy(nb), dX(nb), dS(nb), Rc(nb), Sinv(nb);
  int consecutive_short_steps = 0;

  auto try_certificates = [&](RealSolution& s) -> bool {
    // Dual ray => primal infeasible.
    double by = m ? p.b.dot(s.y) : 0.0;
    if (by > 0.0) {
      RVec yh = s.y / by;
      apply_AT(p, yh, ATy);
      double meas = 0.0;
      for (long b = 0; b < nb; ++b) {
        Eigen::SelfAdjointEigenSolver<RMat> es(sym(ATy[b]), Eigen::EigenvaluesOnly);
        meas = std::max(meas, es.eigenvalues().maxCoeff());
      }
      if (nf > 0) meas = std::max(meas, (p.F.transpose() * yh).cwiseAbs().maxCoeff());
      if (meas < 10.0 * opt.tol) {
        s.status = SolveStatus::infeasible;
        return true;
      }
    }
    // Primal ray => unbounded.
    double pobj = block_inner(p.C, s.X) + (nf ? p.f.dot(s.u) : 0.0);
    if (pobj < 0.0) {
      double om = -pobj;
      RVec ax = apply_A(p, s.X);
      if (nf > 0) ax += p.F * s.u;
      if ((ax / om).cwiseAbs().maxCoeff() < 10.0 * opt.tol) {
        s.status = SolveStatus::unbounded;
        return true;
      }
    }
    return false;
  };

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    sol.iterations = iter;
    apply_AT(p, sol.y, ATy);
    for (long b = 0; b < nb; ++b) Rd[b] = p.C[b] - sol.S[b] - ATy[b];
    RVec rp = p.b - apply_A(p, sol.X);
    if (nf > 0) rp -= p.F * sol.u;
    RVec rf = nf ? RVec(p.f - p.F.transpose() * sol.y) : RVec();

    double mu = 0.0;
    for (long b = 0; b < nb; ++b) mu += sol.X[b].cwiseProduct(sol.S[b]).sum();
    mu /= std::max<long>(N, 1);
    sol.mu = mu;

    double pobj = block_inner(p.C, sol.X) + (nf ? p.f.dot(sol.u) : 0.0);
    double dobj = m ? p.b.dot(sol.y) : 0.0;
    sol.primal_res = (m ? rp.cwiseAbs().maxCoeff() : 0.0) / bnorm;
    double dres = 0.0;
    for (long b = 0; b < nb; ++b) dres = std::max(dres, Rd[b].cwiseAbs().maxCoeff());
    sol.dual_res = dres / cnorm;
    double fres = nf ? rf.cwiseAbs().maxCoeff() / fnorm : 0.0;
    sol.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.value = pobj;

    if (opt.verbose)
      std::fprintf(stderr, "it %3d  mu %.3e  pres %.3e  dres %.3e  gap %.3e\n",
                   iter, mu, sol.primal_res, std::max(sol.dual_res, fres), sol.gap);

    if (sol.primal_res <= opt.tol && sol.dual_res <= opt.tol && fres <= opt.tol &&
        sol.gap <= opt.tol) {
      sol.status = SolveStatus::optimal;
      return sol;
    }

    double xmax = 0.0;
    for (long b = 0; b < nb; ++b) xmax = std::max(xmax, sol.X[b].cwiseAbs().maxCoeff());
    double ymax = m ? sol.y.cwiseAbs().maxCoeff() : 0.0;
    if (xmax > 1e9 || ymax > 1e9 || consecutive_short_steps >= 5) {
      if (try_certificates(sol)) return sol;
      if (xmax > 1e12 || ymax > 1e12) {
        sol.status = SolveStatus::max_iterations;
        return sol;
      }
    }

    bool ok = true;
    for (long b = 0; b < nb && ok; ++b) ok = nt_scaling(sol.X[b], sol.S[b], W[b]);
    if (!ok) break;

    RMat M;
    assemble_schur(p.rows, W, M);
    CholFactor chol;
    if (!chol.factor(std::move(M))) break;

    RMat G;
    Eigen::LDLT<RMat> ldlt;
    if (nf > 0) {
      G = chol.solve(p.F);
      ldlt.compute(RMat(p.F.transpose() * G));
    }

    // Per-block Rc - W Rd W is formed once per direction; constraint rows then
    // only read their sparse entries of it.
    auto direction = [&](const std::vector<RMat>& RcIn, RVec& dy, RVec& du) {
      std::vector<RMat> Tb(nb);
      for (long b = 0; b < nb; ++b) Tb[b] = RcIn[b] - W[b] * Rd[b] * W[b];
      RVec h = rp;
      for (long i = 0; i < m; ++i) h(i) -= entry_inner(p.rows[i], Tb);
      if (nf == 0) {
        dy = chol.solve(h);
        du = RVec();
      } else {
        RVec w = chol.solve(h);
        du = ldlt.solve(p.F.transpose() * w - rf);
        dy = w - G * du;
      }
      apply_AT(p, dy, ATy);
      for (long b = 0; b < nb; ++b) {
        dS[b] = Rd[b] - ATy[b];
        dX[b] = sym(RcIn[b] - W[b] * dS[b] * W[b]);
        dS[b] = sym(dS[b]);
      }
    };

    // Predictor.
    for (long b = 0; b < nb; ++b) Rc[b] = -sol.X[b];
    RVec dy, du;
    direction(Rc, dy, du);
    double apa = 1.0, ada = 1.0;
    for (long b = 0; b < nb; ++b) {
      apa = std::min(apa, max_step(sol.X[b], dX[b]));
      ada = std::min(ada, max_step(sol.S[b], dS[b]));
    }
    double mu_aff = 0.0;
    for (long b = 0; b < nb; ++b)
      mu_aff += (sol.X[b] + apa * dX[b]).cwiseProduct(sol.S[b] + ada * dS[b]).sum();
    mu_aff = std::max(mu_aff / std::max<long>(N, 1), 0.0);
    double sigma = std::clamp(std::pow(mu_aff / std::max(mu, 1e-300), 3.0), 1e-10, 1.0);

    // Corrector (Mehrotra sigma, no second-order term).
    for (long b = 0; b < nb; ++b) {
      Eigen::LLT<RMat> llt(sol.S[b]);
      RMat I = RMat::Identity(p.block_dims[b], p.block_dims[b]);
      Sinv[b] = (llt.info() == Eigen::Success) ? RMat(llt.solve(I))
                                               : RMat(sol.S[b].inverse());
      Rc[b] = sigma * mu * sym(Sinv[b]) - sol.X[b];
    }
    direction(Rc, dy, du);
    double ap = 1.0, ad = 1.0;
    for (long b = 0; b < nb; ++b) {
      ap = std::min(ap, tau * max_step(sol.X[b], dX[b]));
      ad = std::min(ad, tau * max_step(sol.S[b], dS[b]));
    }
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);
    if (ap < 1e-8 && ad < 1e-8)
      ++consecutive_short_steps;
    else
      consecutive_short_steps = 0;

    for (long b = 0; b < nb; ++b) {
      sol.X[b] += ap * dX[b];
      sol.S[b] += ad * dS[b];
    }
    sol.y += ad * dy;
    if (nf > 0) sol.u += ap * du;
  }

  if (!try_certificates(sol)) sol.status = SolveStatus::max_iterations;
  return sol;
}

}  // namespace dynent
