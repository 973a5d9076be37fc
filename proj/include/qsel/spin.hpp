#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "qsel/eigensolvers.hpp"
#include "qsel/fit.hpp"
#include "qsel/landscape.hpp"

namespace qsel {

/// Real polynomial sum coeff * x^a y^b z^c on the unit sphere, total degree <= 8.
class SitePolynomial {
 public:
  struct Term {
    int a = 0, b = 0, c = 0;
    double coeff = 0.0;
  };

  SitePolynomial() = default;
  explicit SitePolynomial(std::vector<Term> terms);
  static SitePolynomial constant(double value);
  static SitePolynomial monomial(int a, int b, int c, double coeff = 1.0);

  SitePolynomial operator+(const SitePolynomial& o) const;
  SitePolynomial operator*(const SitePolynomial& o) const;
  SitePolynomial operator*(double s) const;

  /// Sorted by (a, b, c), duplicates merged, zero coefficients dropped.
  const std::vector<Term>& terms() const { return terms_; }
  int degree() const;
  double evaluate(const Eigen::Vector3d& n) const;

 private:
  std::vector<Term> terms_;
};

constexpr int kMaxSiteDegree = 8;

/// Matrix of T_N(f) in the orthonormal monomial basis m_k ~ z1^k z2^(N-k), k = 0..N,
/// where x + iy = 2 z1 conj(z2) and z = |z1|^2 - |z2|^2. Index k carries S^z = (2k - N)/2.
/// Throws DegreeTooLarge above degree 8.
Eigen::MatrixXcd toeplitz_site_op(int N, const SitePolynomial& f);

/// Real symmetric Toeplitz operator on (C^{N+1})^{sites}; site 0 is the slowest index.
struct SpinOperator {
  int N = 0;
  int sites = 0;
  SparseMatrix matrix;
  long dimension() const { return matrix.rows(); }
};

constexpr long kDefaultNonzeroCap = 20'000'000;

/// T_N(f) on a single sphere. Throws InvalidInput if T_N(f) is not real.
SpinOperator single_site_operator(int N, const SitePolynomial& f);

/// T_N(h) for h = sum over edges of e_i . e_j. Throws DimensionCap when the estimated
/// nonzero count exceeds nnz_cap.
SpinOperator assemble_graph_operator(const TriangleGraph& g, int N,
                                     long nnz_cap = kDefaultNonzeroCap);

/// k <= 32 lowest eigenpairs with residual <= 1e-9 ||H||; throws NoConvergence otherwise.
EigenPairs lowest_spectrum(const SpinOperator& op, int k, const SolverOptions& opts = {});

/// Exact lowest eigenvalue of T_N(h_triangle) from the total-spin Casimir:
/// (2/(N+2))^2 (S(S+1) - 3s(s+1)) / 2 with s = N/2 and S = 0 (N even) or 1/2 (N odd).
double triangle_casimir_ground(int N);

/// Gauss-Legendre in cos(theta) times a uniform periodic rule in phi; weights sum to 4 pi.
struct SphereGrid {
  Eigen::VectorXd cos_theta;
  Eigen::VectorXd phi;
  Eigen::MatrixXd weight;  // cos_theta.size() x phi.size()
};

SphereGrid sphere_grid(int n_theta, int n_phi);

/// Unit coherent state centred at n: components sqrt(C(N,k)) conj(zeta1)^k zeta2^(N-k) with
/// zeta1 = cos(theta/2) e^{i phi}, zeta2 = sin(theta/2).
Eigen::VectorXcd coherent_state(int N, const Eigen::Vector3d& n);

/// Per-site Husimi density (N+1)/(4 pi) <n| rho_site |n> sampled on a grid.
struct HusimiMarginal {
  int site = 0;
  int N = 0;
  SphereGrid grid;
  Eigen::MatrixXd density;
  Eigen::MatrixXcd reduced;  // site reduced density matrix

  double density_at(const Eigen::Vector3d& n) const;
  double total_mass() const;
};

/// Throws GridTooCoarse unless the grid integrates degree-2N densities exactly
/// (n_theta >= N + 1, n_phi >= 2N + 1) and the sampled mass is 1 to 1e-6.
HusimiMarginal husimi_marginal(const Eigen::VectorXcd& state, int N, int sites, int site,
                               const SphereGrid& grid);
HusimiMarginal husimi_marginal(const Eigen::VectorXd& state, int N, int sites, int site,
                               const SphereGrid& grid);

Eigen::MatrixXcd reduced_density(const Eigen::VectorXcd& state, int N, int sites, int site);

struct SphereRegion {
  enum class Kind { Cap, Band };
  Kind kind = Kind::Cap;
  Eigen::Vector3d axis{0, 0, 1};
  /// Cap: angular radius. Band: half-width in axis . n.
  double size = 0.0;

  static SphereRegion cap(const Eigen::Vector3d& axis, double angle);
  static SphereRegion band(const Eigen::Vector3d& axis, double half_width);
};

/// Husimi mass outside the region. z-aligned regions use the exact Beta law of the
/// diagonal of the reduced density; others use a Gauss rule adapted to the region.
double mass_outside(const HusimiMarginal& marginal, const SphereRegion& region);

/// sqrt(E |n - target|^2) under the Husimi measure, evaluated exactly as
/// sqrt(2 - 2 target . <T_N(n)>).
double husimi_width(const Eigen::MatrixXcd& reduced, int N, const Eigen::Vector3d& target);

struct ScalingSpec {
  std::string experiment;  // triangle | sphere_z2 | sphere_miniwell
  std::vector<int> N;
  double epsilon = 0.3;
  int jobs = 1;
};

struct ScalingRow {
  int N = 0;
  double lambda_min = 0.0;
  double gap = 0.0;
  double width = 0.0;  // NaN when the experiment has no localization target
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double symbol_min = 0.0;  // min h
  double mu_min = 0.0;      // Melin value at the selected point
  /// lambda_min - symbol_min ~ N^s, expect s = -1
  PowerFit leading;
  /// |lambda_min - symbol_min - mu_min / N| ~ N^s
  PowerFit correction;
  PowerFit width;  // only for localized experiments
  bool has_width = false;
};

/// Runs a built-in experiment; fits use the upper half of the sorted N list.
ScalingResult scaling_study(const ScalingSpec& spec);

}  // namespace qsel
