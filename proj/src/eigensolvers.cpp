#include "qsel/eigensolvers.hpp"

#include <lapacke.h>

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <arpack/arpack.hpp>
#include <cmath>
#include <mutex>
#include <random>
#include <vector>

#include "qsel/error.hpp"

namespace qsel {

double norm_bound(const SparseMatrix& h) {
  Eigen::VectorXd colsum = Eigen::VectorXd::Zero(h.cols());
  for (int c = 0; c < h.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(h, c); it; ++it) colsum(c) += std::abs(it.value());
  return colsum.size() ? colsum.maxCoeff() : 0.0;
}

int half_bandwidth(const SparseMatrix& h) {
  int bw = 0;
  for (int c = 0; c < h.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(h, c); it; ++it)
      if (it.value() != 0.0) bw = std::max(bw, std::abs(static_cast<int>(it.row()) - c));
  return bw;
}

Eigen::VectorXd residual_norms(const SparseMatrix& h, const EigenPairs& pairs) {
  Eigen::VectorXd r(pairs.values.size());
  for (int i = 0; i < pairs.values.size(); ++i)
    r(i) = (h * pairs.vectors.col(i) - pairs.values(i) * pairs.vectors.col(i)).norm();
  return r;
}

EigenPairs dense_lowest(const Eigen::MatrixXd& h, int k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::NoConvergence, "dense eigensolver failed");
  k = std::min<int>(k, h.rows());
  EigenPairs out;
  out.values = es.eigenvalues().head(k);
  out.vectors = es.eigenvectors().leftCols(k);
  out.residuals.resize(k);
  for (int i = 0; i < k; ++i)
    out.residuals(i) = (h * out.vectors.col(i) - out.values(i) * out.vectors.col(i)).norm();
  return out;
}

EigenPairs banded_lowest(const SparseMatrix& h, int k) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  k = std::min<int>(k, n);
  const int kd = half_bandwidth(h);
  EigenPairs out;
  lapack_int m = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, k);
  if (kd <= 1) {
    Eigen::VectorXd d = h.diagonal();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(std::max<lapack_int>(n, 1));
    for (int c = 0; c < h.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(h, c); it; ++it)
        if (it.row() == c + 1) e(c) = it.value();
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(k));
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0,
                                     1, k, 0.0, &m, w.data(), z.data(), n, isuppz.data());
    if (info != 0) throw Error(ErrorKind::NoConvergence, "dstevr failed");
  } else {
    const lapack_int ldab = kd + 1;
    Eigen::MatrixXd ab = Eigen::MatrixXd::Zero(ldab, n);
    for (int c = 0; c < h.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(h, c); it; ++it)
        if (it.row() <= c) ab(kd + it.row() - c, c) = it.value();
    Eigen::MatrixXd q(n, n);
    std::vector<lapack_int> ifail(n);
    lapack_int info =
        LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, kd, ab.data(), ldab, q.data(), n, 0.0,
                       0.0, 1, k, 0.0, &m, w.data(), z.data(), n, ifail.data());
    if (info != 0) throw Error(ErrorKind::NoConvergence, "dsbevx failed");
  }
  out.values = w.head(m);
  out.vectors = z.leftCols(m);
  out.residuals = residual_norms(h, out);
  return out;
}

EigenPairs lanczos_lowest(const MatVec& op, int dim, int k, const SolverOptions& opts) {
  const a_int n = dim;
  const a_int nev = k;
  const a_int ncv = std::min<a_int>(n, std::max<a_int>(2 * nev + 1, 24));
  if (nev >= ncv) throw Error(ErrorKind::InvalidInput, "too many eigenpairs for dimension");
  std::vector<double> resid(n), v(static_cast<size_t>(n) * ncv), workd(3 * static_cast<size_t>(n));
  const a_int lworkl = ncv * (ncv + 8);
  std::vector<double> workl(lworkl);
  a_int iparam[11] = {0}, ipntr[11] = {0};
  iparam[0] = 1;
  iparam[2] = opts.max_restarts;
  iparam[6] = 1;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (auto& r : resid) r = uni(rng);
  // ARPACK keeps its iteration state in Fortran SAVE variables, so one solve at a time.
  static std::mutex arpack_mutex;
  std::lock_guard<std::mutex> lock(arpack_mutex);
  a_int ido = 0, info = 1;
  while (true) {
    arpack::saupd(ido, arpack::bmat::identity, n, arpack::which::smallest_algebraic, nev,
                  opts.tol, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(),
                  workl.data(), lworkl, info);
    if (ido == -1 || ido == 1) {
      op(&workd[ipntr[0] - 1], &workd[ipntr[1] - 1]);
    } else {
      break;
    }
  }
  if (info < 0) throw Error(ErrorKind::NoConvergence, "dsaupd info " + std::to_string(info));
  if (info == 1) throw Error(ErrorKind::NoConvergence, "Lanczos iteration cap reached");
  std::vector<a_int> select(ncv);
  Eigen::VectorXd d(nev);
  Eigen::MatrixXd z(n, nev);
  arpack::seupd(true, arpack::howmny::ritz_vectors, select.data(), d.data(), z.data(), n, 0.0,
                arpack::bmat::identity, n, arpack::which::smallest_algebraic, nev, opts.tol,
                resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(),
                lworkl, info);
  if (info != 0) throw Error(ErrorKind::NoConvergence, "dseupd info " + std::to_string(info));
  // Sort ascending.
  std::vector<int> order(nev);
  for (int i = 0; i < nev; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d(a) < d(b); });
  EigenPairs out;
  out.values.resize(nev);
  out.vectors.resize(n, nev);
  out.residuals.resize(nev);
  Eigen::VectorXd hv(n);
  for (int i = 0; i < nev; ++i) {
    out.values(i) = d(order[i]);
    out.vectors.col(i) = z.col(order[i]).normalized();
    op(out.vectors.col(i).data(), hv.data());
    out.residuals(i) = (hv - out.values(i) * out.vectors.col(i)).norm();
  }
  return out;
}

EigenPairs lowest_eigenpairs(const SparseMatrix& h, int k, const SolverOptions& opts) {
  const int n = static_cast<int>(h.rows());
  if (n <= opts.dense_limit) return dense_lowest(Eigen::MatrixXd(h), k);
  const int kd = half_bandwidth(h);
  if (kd <= 1 || (kd <= 16 && n <= 6000)) return banded_lowest(h, k);
  MatVec op = [&h](const double* in, double* out) {
    Eigen::Map<const Eigen::VectorXd> x(in, h.cols());
    Eigen::Map<Eigen::VectorXd> y(out, h.rows());
    y.noalias() = h * x;
  };
  return lanczos_lowest(op, n, k, opts);
}

EigenPairs shift_invert_lowest(const SparseMatrix& h, int k, double sigma,
                               const SolverOptions& opts) {
  const int n = static_cast<int>(h.rows());
  if (n <= opts.dense_limit) return dense_lowest(Eigen::MatrixXd(h), k);
  SparseMatrix shifted = h;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success)
    throw Error(ErrorKind::NoConvergence, "shifted factorization failed");
  MatVec op = [&ldlt, n](const double* in, double* out) {
    Eigen::Map<const Eigen::VectorXd> x(in, n);
    Eigen::Map<Eigen::VectorXd> y(out, n);
    y = ldlt.solve(x);
  };
  // Largest eigenvalues of (H - sigma)^{-1} are the lowest of H; ARPACK's 'SA' on the
  // negated operator reuses the same driver.
  MatVec neg = [&op, n](const double* in, double* out) {
    op(in, out);
    for (int i = 0; i < n; ++i) out[i] = -out[i];
  };
  EigenPairs inv = lanczos_lowest(neg, n, k, opts);
  EigenPairs out;
  out.values.resize(inv.values.size());
  for (int i = 0; i < inv.values.size(); ++i) out.values(i) = sigma - 1.0 / inv.values(i);
  out.vectors = inv.vectors;
  // -1/theta is increasing in theta for theta < 0, so the order is preserved.
  for (int i = 0; i < out.vectors.cols(); ++i) {
    Eigen::VectorXd x = out.vectors.col(i);
    out.values(i) = x.dot(h * x);  // Rayleigh quotient refinement
  }
  out.residuals = residual_norms(h, out);
  return out;
}

long count_below(const SparseMatrix& h, double lambda) {
  const int n = static_cast<int>(h.rows());
  SparseMatrix shifted = h;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= lambda;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success)
    throw Error(ErrorKind::NoConvergence, "LDL^T factorization failed at shift");
  const Eigen::VectorXd d = ldlt.vectorD();
  long count = 0;
  for (int i = 0; i < d.size(); ++i) {
    if (d(i) == 0.0 || !std::isfinite(d(i)))
      throw Error(ErrorKind::NoConvergence, "singular pivot at shift");
    if (d(i) < 0.0) ++count;
  }
  return count;
}

}  // namespace qsel
