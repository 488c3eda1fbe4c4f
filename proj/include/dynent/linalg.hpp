#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

namespace dynent {

using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Complex = std::complex<double>;

// Global numerical tolerances (see DensityOperator / channel invariants).
inline constexpr double kHermTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;

bool is_finite(const CMat& m);
bool is_hermitian(const CMat& m, double tol = kHermTol);

// (m + m†)/2
CMat hermitize(const CMat& m);

// Sum of singular values.
double trace_norm(const CMat& m);

// Smallest eigenvalue of a Hermitian matrix. Throws if not Hermitian within tol.
double min_eigenvalue(const CMat& m, double herm_tol = kHermTol);

// PSD square root via eigendecomposition; eigenvalues in [-clamp_tol, 0) are
// clamped to 0, anything below -clamp_tol throws.
CMat sqrt_psd(const CMat& m, double clamp_tol = 1e-8);

// Moore-Penrose pseudo-inverse square root of a PSD matrix (eigenvalues below
// rank_tol are treated as zero).
CMat inv_sqrt_psd(const CMat& m, double rank_tol = 1e-10);

// Density operator with subsystem dimension tags, kron-ordered row-major.
struct DensityOperator {
  CMat matrix;
  std::vector<int> dims;

  int dim() const { return static_cast<int>(matrix.rows()); }
  void validate(double herm_tol = kHermTol, double psd_tol = kPsdTol) const;
};

DensityOperator make_density(const CMat& m, std::vector<int> dims);
DensityOperator pure_state(const CVec& psi, std::vector<int> dims);

// Uhlmann fidelity, squared convention: F = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
// F(pure, pure) = |<psi|phi>|^2.  This is the convention every bound in this
// library assumes; the square root of it is the "root fidelity".
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);
double fidelity(const CMat& rho, const CMat& sigma);

// Seeded samplers; no global RNG anywhere.
CMat random_unitary(int d, std::mt19937_64& rng);
CVec random_pure(int d, std::mt19937_64& rng);
DensityOperator random_density(int d, std::mt19937_64& rng, int rank = 0);
CMat random_hermitian(int d, std::mt19937_64& rng);

}  // namespace dynent
