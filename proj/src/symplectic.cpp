#include "qsel/symplectic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>

#include "qsel/error.hpp"

namespace qsel {

namespace {

struct SymEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

SymEig sym_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::NoConvergence, "symmetric eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

double spectral_norm(const Eigen::VectorXd& eigenvalues) {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

void require_semipositive(const SymEig& eig) {
  const double scale = spectral_norm(eig.values);
  if (eig.values.size() > 0 && eig.values.minCoeff() < -kKernelTolerance * scale)
    throw Error(ErrorKind::NotSemipositive,
                "smallest eigenvalue " + std::to_string(eig.values.minCoeff()));
}

// Orthonormal basis of ker M (eigenvalues below the relative tolerance).
Eigen::MatrixXd kernel_basis(const SymEig& eig) {
  const double tol = kKernelTolerance * spectral_norm(eig.values);
  std::vector<int> idx;
  for (int i = 0; i < eig.values.size(); ++i)
    if (std::abs(eig.values(i)) <= tol) idx.push_back(i);
  Eigen::MatrixXd k(eig.vectors.rows(), static_cast<int>(idx.size()));
  for (size_t c = 0; c < idx.size(); ++c) k.col(c) = eig.vectors.col(idx[c]);
  return k;
}

Eigen::MatrixXd sqrt_from(const SymEig& eig) {
  const double tol = kKernelTolerance * spectral_norm(eig.values);
  Eigen::VectorXd s = eig.values.unaryExpr(
      [tol](double v) { return v <= tol ? 0.0 : std::sqrt(v); });
  return eig.vectors * s.asDiagonal() * eig.vectors.transpose();
}

Eigen::MatrixXd pseudo_inverse(const SymEig& eig) {
  const double tol = kKernelTolerance * spectral_norm(eig.values);
  Eigen::VectorXd s =
      eig.values.unaryExpr([tol](double v) { return v <= tol ? 0.0 : 1.0 / v; });
  return eig.vectors * s.asDiagonal() * eig.vectors.transpose();
}

// Singular values of M^{1/2} J M^{1/2}; nonzero ones are the lambda_i, each twice.
Eigen::VectorXd paired_singular_values(const SymEig& eig, int n) {
  Eigen::MatrixXd r = sqrt_from(eig);
  Eigen::MatrixXd a = r * standard_symplectic(n) * r;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues();
}

}  // namespace

QuadraticForm::QuadraticForm(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() % 2 != 0)
    throw Error(ErrorKind::InvalidInput, "quadratic form must be 2n x 2n");
  if (!matrix.allFinite())
    throw Error(ErrorKind::InvalidInput, "quadratic form has non-finite entries");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorKind::InvalidInput, "quadratic form is not symmetric");
  n_ = static_cast<int>(matrix.rows() / 2);
  m_ = 0.5 * (matrix + matrix.transpose());
}

QuadraticForm QuadraticForm::diagonal(const std::vector<double>& entries) {
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(entries.data(), entries.size());
  return QuadraticForm(Eigen::MatrixXd(d.asDiagonal()));
}

double QuadraticForm::norm() const {
  if (n_ == 0) return 0.0;
  return spectral_norm(sym_eig(m_).values);
}

Eigen::MatrixXd standard_symplectic(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return j;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) { return sqrt_from(sym_eig(m)); }

KernelIsotropy is_kernel_isotropic(const QuadraticForm& q) {
  const int n = q.dim_pairs();
  Eigen::MatrixXd k = kernel_basis(sym_eig(q.matrix()));
  KernelIsotropy out;
  out.kernel_dimension = static_cast<int>(k.cols());
  out.isotropic =
      k.cols() == 0 || (k.transpose() * standard_symplectic(n) * k).norm() <= 1e-8;
  return out;
}

SymplecticSpectrum symplectic_eigenvalues(const QuadraticForm& q) {
  const int n = q.dim_pairs();
  SymEig eig = sym_eig(q.matrix());
  require_semipositive(eig);
  SymplecticSpectrum out;
  out.zero_mode_dimension = static_cast<int>(kernel_basis(eig).cols());
  if (n == 0) return out;
  Eigen::VectorXd s = paired_singular_values(eig, n);
  const double tol = 1e-9 * spectral_norm(eig.values);
  for (int i = 0; i + 1 < s.size(); i += 2) {
    if (s(i + 1) <= tol) break;
    out.eigenvalues.push_back(0.5 * (s(i) + s(i + 1)));
  }
  return out;
}

MelinValue melin_value(const QuadraticForm& q) {
  const int n = q.dim_pairs();
  SymEig eig = sym_eig(q.matrix());
  require_semipositive(eig);
  MelinValue out;
  if (n == 0) return out;
  out.fast_sum = 0.25 * paired_singular_values(eig, n).sum();
  out.trace_term = 0.25 * q.matrix().trace();
  out.value = out.fast_sum + out.trace_term;
  return out;
}

WilliamsonDecomposition williamson_decompose(const QuadraticForm& q) {
  const int n = q.dim_pairs();
  const Eigen::MatrixXd& m = q.matrix();
  const Eigen::MatrixXd j = standard_symplectic(n);
  SymEig eig = sym_eig(m);
  require_semipositive(eig);
  Eigen::MatrixXd k = kernel_basis(eig);
  const int r = static_cast<int>(k.cols());
  if (r > 0 && (k.transpose() * j * k).norm() > 1e-8)
    throw Error(ErrorKind::KernelNotIsotropic, "kernel of Q is not isotropic");

  WilliamsonDecomposition out;
  out.zero_modes = r;
  out.slow_modes = r;
  Eigen::MatrixXd e_slow(2 * n, r), f_slow(2 * n, r);

  // Kernel pairs: f dual to e under omega, Q(f_i, f_j) = delta_ij.
  if (r > 0) {
    Eigen::MatrixXd mplus = pseudo_inverse(eig);
    Eigen::MatrixXd jk = j * k;
    Eigen::MatrixXd s = jk.transpose() * mplus * jk;
    Eigen::MatrixXd f = -mplus * jk * s.inverse();
    Eigen::MatrixXd a = f.transpose() * j * f;
    f += k * (0.5 * a);
    SymEig sinv = sym_eig(s.inverse());
    Eigen::VectorXd d = sinv.values;
    e_slow = k * sinv.vectors * d.cwiseSqrt().asDiagonal();
    f_slow = f * sinv.vectors * d.cwiseSqrt().cwiseInverse().asDiagonal();
  }

  // Symplectic complement of the slow pairs.
  const int mw = 2 * (n - r);
  Eigen::MatrixXd uw;
  if (r == 0) {
    uw = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  } else {
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    // P z = z - sum_i [omega(z, f_i) e_i - omega(z, e_i) f_i], omega(u, v) = u^T J v.
    proj -= e_slow * (j * f_slow).transpose();
    proj += f_slow * (j * e_slow).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(proj, Eigen::ComputeFullU);
    uw = svd.matrixU().leftCols(mw);
  }

  Eigen::MatrixXd e_fast(2 * n, n - r), f_fast(2 * n, n - r);
  if (mw > 0) {
    Eigen::MatrixXd mwm = uw.transpose() * m * uw;
    Eigen::MatrixXd omega = uw.transpose() * j * uw;
    SymEig we = sym_eig(mwm);
    if (we.values.minCoeff() <= 0.0)
      throw Error(ErrorKind::NoConvergence, "complement block is not positive");
    Eigen::MatrixXd rinv =
        we.vectors * we.values.cwiseSqrt().cwiseInverse().asDiagonal() * we.vectors.transpose();
    Eigen::MatrixXd a = rinv * omega * rinv;
    a = 0.5 * (a - a.transpose());
    Eigen::RealSchur<Eigen::MatrixXd> schur(a);
    const Eigen::MatrixXd& t = schur.matrixT();
    const Eigen::MatrixXd& u = schur.matrixU();
    struct Block {
      double sigma;
      Eigen::VectorXd x, y;
    };
    std::vector<Block> blocks;
    for (int i = 0; i < mw;) {
      if (i + 1 >= mw || std::abs(t(i + 1, i)) == 0.0)
        throw Error(ErrorKind::NoConvergence, "unpaired Schur block in Williamson step");
      double b = t(i, i + 1);
      Eigen::VectorXd x = u.col(i), y = u.col(i + 1);
      if (b < 0) {
        std::swap(x, y);
        b = -b;
      }
      blocks.push_back({b, x, y});
      i += 2;
    }
    // lambda = 1 / sigma; order fast modes by nonincreasing lambda.
    std::sort(blocks.begin(), blocks.end(),
              [](const Block& l, const Block& r2) { return l.sigma < r2.sigma; });
    for (size_t i = 0; i < blocks.size(); ++i) {
      const double scale = 1.0 / std::sqrt(blocks[i].sigma);
      e_fast.col(i) = uw * rinv * blocks[i].x * scale;
      f_fast.col(i) = uw * rinv * blocks[i].y * scale;
      out.fast_eigenvalues.push_back(1.0 / blocks[i].sigma);
    }
  }

  out.basis.resize(2 * n, 2 * n);
  out.basis << e_slow, e_fast, f_slow, f_fast;
  return out;
}

double fock_melin_oracle(const QuadraticForm& q, int cutoff) {
  if (cutoff < 2) throw Error(ErrorKind::CutoffTooSmall, "cutoff must be at least 2");
  const int n = q.dim_pairs();
  if (n == 0) return 0.0;
  require_semipositive(sym_eig(q.matrix()));
  using cd = std::complex<double>;
  const cd I(0.0, 1.0);

  // v = C w with w = (z, zbar); Q = w^T G w.
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    c(i, i) = 0.5;
    c(i, n + i) = 0.5;
    c(n + i, i) = -0.5 * I;
    c(n + i, n + i) = 0.5 * I;
  }
  Eigen::MatrixXcd g = c.transpose() * q.matrix().cast<cd>() * c;

  // Monomial terms z^a zbar^b with coefficients.
  struct Term {
    std::vector<int> a, b;
    cd coeff;
  };
  std::vector<Term> terms;
  for (int u = 0; u < 2 * n; ++u)
    for (int v = 0; v < 2 * n; ++v) {
      if (std::abs(g(u, v)) == 0.0) continue;
      Term t{std::vector<int>(n, 0), std::vector<int>(n, 0), g(u, v)};
      (u < n ? t.a[u] : t.b[u - n]) += 1;
      (v < n ? t.a[v] : t.b[v - n]) += 1;
      terms.push_back(std::move(t));
    }

  // Enumerate monomials by parity sector of total degree.
  std::vector<std::vector<int>> monos;
  std::vector<int> cur(n, 0);
  auto rec = [&](auto&& self, int var, int left) -> void {
    if (var == n - 1) {
      for (int k = 0; k <= left; ++k) {
        cur[var] = k;
        monos.push_back(cur);
      }
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[var] = k;
      self(self, var + 1, left - k);
    }
  };
  rec(rec, 0, cutoff);

  double best = std::numeric_limits<double>::infinity();
  for (int parity = 0; parity < 2; ++parity) {
    std::map<std::vector<int>, int> index;
    std::vector<const std::vector<int>*> sector;
    for (const auto& mo : monos) {
      int deg = std::accumulate(mo.begin(), mo.end(), 0);
      if (deg % 2 == parity) {
        index[mo] = static_cast<int>(sector.size());
        sector.push_back(&mo);
      }
    }
    const int dim = static_cast<int>(sector.size());
    if (dim == 0) continue;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    std::vector<int> alpha(n);
    for (int col = 0; col < dim; ++col) {
      const std::vector<int>& beta = *sector[col];
      for (const Term& t : terms) {
        bool ok = true;
        double logv = 0.0;
        for (int i = 0; i < n; ++i) {
          alpha[i] = beta[i] + t.a[i] - t.b[i];
          if (alpha[i] < 0) {
            ok = false;
            break;
          }
          logv += std::lgamma(beta[i] + t.a[i] + 1.0) - 0.5 * std::lgamma(alpha[i] + 1.0) -
                  0.5 * std::lgamma(beta[i] + 1.0);
        }
        if (!ok) continue;
        auto it = index.find(alpha);
        if (it == index.end()) continue;
        h(it->second, col) += t.coeff * std::exp(logv);
      }
    }
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw Error(ErrorKind::NoConvergence, "Fock eigensolver failed");
    best = std::min(best, es.eigenvalues()(0));
  }
  return best;
}

}  // namespace qsel
