#include "dynent/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace dynent {

bool is_finite(const CMat& m) { return m.allFinite(); }

bool is_hermitian(const CMat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

CMat hermitize(const CMat& m) { return 0.5 * (m + m.adjoint()); }

double trace_norm(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues().sum();
}

double min_eigenvalue(const CMat& m, double herm_tol) {
  if (!is_hermitian(m, herm_tol))
    throw std::invalid_argument("min_eigenvalue: matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CMat sqrt_psd(const CMat& m, double clamp_tol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(m));
  RVec ev = es.eigenvalues();
  for (long i = 0; i < ev.size(); ++i) {
    if (ev(i) < -clamp_tol) throw std::invalid_argument("sqrt_psd: matrix not PSD");
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

CMat inv_sqrt_psd(const CMat& m, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(m));
  RVec ev = es.eigenvalues();
  for (long i = 0; i < ev.size(); ++i)
    ev(i) = ev(i) > rank_tol ? 1.0 / std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

void DensityOperator::validate(double herm_tol, double psd_tol) const {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("density operator: matrix not square");
  long d = 1;
  for (int k : dims) d *= k;
  if (d != matrix.rows())
    throw std::invalid_argument("density operator: dims inconsistent with matrix");
  if (!is_finite(matrix))
    throw std::invalid_argument("density operator: non-finite entries");
  if (!is_hermitian(matrix, herm_tol))
    throw std::invalid_argument("density operator: not Hermitian");
  if (std::abs(matrix.trace().real() - 1.0) > 1e-8 ||
      std::abs(matrix.trace().imag()) > 1e-8)
    throw std::invalid_argument("density operator: trace != 1");
  if (min_eigenvalue(matrix, herm_tol) < -psd_tol)
    throw std::invalid_argument("density operator: negative eigenvalue");
}

DensityOperator make_density(const CMat& m, std::vector<int> dims) {
  DensityOperator rho{m, std::move(dims)};
  rho.validate();
  return rho;
}

DensityOperator pure_state(const CVec& psi, std::vector<int> dims) {
  CVec v = psi / psi.norm();
  return make_density(v * v.adjoint(), std::move(dims));
}

double fidelity(const CMat& rho, const CMat& sigma) {
  CMat sr = sqrt_psd(rho);
  double root = trace_norm(sqrt_psd(hermitize(sr * sigma * sr)));
  return root * root;
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  return fidelity(rho.matrix, sigma.matrix);
}

CMat random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat z(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix phases so the distribution is Haar.
  for (int j = 0; j < d; ++j) {
    Complex ph = r(j, j) / std::abs(r(j, j));
    q.col(j) *= ph;
  }
  return q;
}

CVec random_pure(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVec v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

DensityOperator random_density(int d, std::mt19937_64& rng, int rank) {
  if (rank <= 0 || rank > d) rank = d;
  std::normal_distribution<double> g(0.0, 1.0);
  CMat z(d, rank);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < rank; ++j) z(i, j) = Complex(g(rng), g(rng));
  CMat rho = z * z.adjoint();
  rho /= rho.trace().real();
  return make_density(hermitize(rho), {d});
}

CMat random_hermitian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat z(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) z(i, j) = Complex(g(rng), g(rng));
  return hermitize(z);
}

}  // namespace dynent
