#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>

namespace qsel {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct EigenPairs {
  Eigen::VectorXd values;  // nondecreasing
  Eigen::MatrixXd vectors;
  Eigen::VectorXd residuals;  // ||H v - lambda v||
};

struct SolverOptions {
  double tol = 1e-12;  // ARPACK relative tolerance
  int max_restarts = 3000;
  std::uint64_t seed = 0x5eed;
  int dense_limit = 1200;  // dimensions up to this use a dense solver
};

using MatVec = std::function<void(const double* in, double* out)>;

/// Infinity norm, an upper bound on the spectral norm of a symmetric matrix.
double norm_bound(const SparseMatrix& h);

/// Half bandwidth max |i - j| over stored nonzeros.
int half_bandwidth(const SparseMatrix& h);

EigenPairs dense_lowest(const Eigen::MatrixXd& h, int k);

/// LAPACK banded solver; efficient for long narrow-band matrices.
EigenPairs banded_lowest(const SparseMatrix& h, int k);

/// Implicitly restarted Lanczos (ARPACK) on a symmetric operator.
EigenPairs lanczos_lowest(const MatVec& op, int dim, int k, const SolverOptions& opts = {});

/// Dispatches to dense, banded or Lanczos and fills residuals.
EigenPairs lowest_eigenpairs(const SparseMatrix& h, int k, const SolverOptions& opts = {});

/// Lowest k eigenpairs via shift-invert Lanczos; sigma must lie below the spectrum.
EigenPairs shift_invert_lowest(const SparseMatrix& h, int k, double sigma,
                               const SolverOptions& opts = {});

/// Number of eigenvalues strictly below lambda, from the inertia of an LDL^T factorization.
long count_below(const SparseMatrix& h, double lambda);

Eigen::VectorXd residual_norms(const SparseMatrix& h, const EigenPairs& pairs);

}  // namespace qsel
