#pragma once

#include <Eigen/Dense>
#include <vector>

namespace qsel {

/// Real quadratic form Q(v) = v^T M v on R^{2n}, coordinates (q_1..q_n, p_1..p_n).
class QuadraticForm {
 public:
  QuadraticForm() = default;
  /// Validates shape and symmetry (1e-12 relative); the stored matrix is symmetrized.
  explicit QuadraticForm(const Eigen::MatrixXd& matrix);
  static QuadraticForm diagonal(const std::vector<double>& entries);

  int dim_pairs() const { return n_; }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double norm() const;  // spectral norm of M

 private:
  int n_ = 0;
  Eigen::MatrixXd m_;
};

/// J = [[0, I], [-I, 0]].
Eigen::MatrixXd standard_symplectic(int n);

struct SymplecticSpectrum {
  std::vector<double> eigenvalues;  // nonincreasing, one per +-i lambda pair
  int zero_mode_dimension = 0;      // dim ker M
};

struct WilliamsonDecomposition {
  Eigen::MatrixXd basis;  // columns e_1..e_n, f_1..f_n
  int zero_modes = 0;     // pairs with e_i in ker Q
  int slow_modes = 0;     // pairs contributing p_i^2 only
  std::vector<double> fast_eigenvalues;
};

struct MelinValue {
  double value = 0.0;
  double fast_sum = 0.0;    // (1/2) sum lambda_i
  double trace_term = 0.0;  // (1/4) tr M
};

struct KernelIsotropy {
  bool isotropic = false;
  int kernel_dimension = 0;
};

/// Relative threshold below which eigenvalues of M count as zero modes.
inline constexpr double kKernelTolerance = 1e-10;

SymplecticSpectrum symplectic_eigenvalues(const QuadraticForm& q);
WilliamsonDecomposition williamson_decompose(const QuadraticForm& q);

/// mu(Q) = (1/2) sum lambda_i + (1/4) tr M.
/// Also accepts forms whose kernel is not isotropic; see README.
MelinValue melin_value(const QuadraticForm& q);

/// Smallest eigenvalue of T_1(Q) on Bargmann monomials of total degree <= cutoff.
double fock_melin_oracle(const QuadraticForm& q, int cutoff);

KernelIsotropy is_kernel_isotropic(const QuadraticForm& q);

/// Square root of a semipositive symmetric matrix; tiny and negative eigenvalues clamp to 0.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

}  // namespace qsel
