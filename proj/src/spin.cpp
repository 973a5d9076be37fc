#include "qsel/spin.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <unsupported/Eigen/KroneckerProduct>

#include "qsel/error.hpp"
#include "qsel/parallel.hpp"
#include "qsel/quadrature.hpp"

namespace qsel {

using cd = std::complex<double>;

SitePolynomial::SitePolynomial(std::vector<Term> terms) {
  std::map<std::tuple<int, int, int>, double> merged;
  for (const auto& t : terms) {
    if (t.a < 0 || t.b < 0 || t.c < 0)
      throw Error(ErrorKind::InvalidInput, "negative monomial exponent");
    if (!std::isfinite(t.coeff)) throw Error(ErrorKind::InvalidInput, "non-finite coefficient");
    merged[{t.a, t.b, t.c}] += t.coeff;
  }
  for (const auto& [key, coeff] : merged)
    if (coeff != 0.0) terms_.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), coeff});
}

SitePolynomial SitePolynomial::constant(double value) { return SitePolynomial({{0, 0, 0, value}}); }

SitePolynomial SitePolynomial::monomial(int a, int b, int c, double coeff) {
  return SitePolynomial({{a, b, c, coeff}});
}

SitePolynomial SitePolynomial::operator+(const SitePolynomial& o) const {
  auto t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return SitePolynomial(std::move(t));
}

SitePolynomial SitePolynomial::operator*(const SitePolynomial& o) const {
  std::vector<Term> t;
  for (const auto& p : terms_)
    for (const auto& q : o.terms_) t.push_back({p.a + q.a, p.b + q.b, p.c + q.c, p.coeff * q.coeff});
  return SitePolynomial(std::move(t));
}

SitePolynomial SitePolynomial::operator*(double s) const {
  auto t = terms_;
  for (auto& x : t) x.coeff *= s;
  return SitePolynomial(std::move(t));
}

int SitePolynomial::degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.a + t.b + t.c);
  return d;
}

double SitePolynomial::evaluate(const Eigen::Vector3d& n) const {
  double s = 0.0;
  for (const auto& t : terms_)
    s += t.coeff * std::pow(n.x(), t.a) * std::pow(n.y(), t.b) * std::pow(n.z(), t.c);
  return s;
}

namespace {

// Moments E[s^g], g = 0..gmax, of s = 2t - 1 with t ~ Beta(a, b).
void beta_sign_moments(double a, double b, int gmax, double* m) {
  m[0] = 1.0;
  if (gmax >= 1) m[1] = (a - b) / (a + b);
  for (int g = 1; g < gmax; ++g) m[g + 1] = ((a - b) * m[g] + g * m[g - 1]) / (a + b + g);
}

// x^a y^b z^c as sum of kappa * w^alpha conj(w)^beta z^gamma with w = x + iy.
std::map<std::tuple<int, int, int>, cd> complex_expansion(const SitePolynomial& f) {
  std::map<std::tuple<int, int, int>, cd> out;
  const cd two_i(0.0, 2.0);
  for (const auto& t : f.terms()) {
    const cd pre = t.coeff / std::pow(2.0, t.a) / std::pow(two_i, t.b);
    for (int r = 0; r <= t.a; ++r)
      for (int s = 0; s <= t.b; ++s) {
        const double comb = boost::math::binomial_coefficient<double>(t.a, r) *
                            boost::math::binomial_coefficient<double>(t.b, s) *
                            (((t.b - s) % 2) ? -1.0 : 1.0);
        out[{r + s, t.a - r + t.b - s, t.c}] += pre * comb;
      }
  }
  return out;
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

Eigen::MatrixXcd toeplitz_site_op(int N, const SitePolynomial& f) {
  if (N < 1) throw Error(ErrorKind::InvalidInput, "N must be at least 1");
  if (f.degree() > kMaxSiteDegree)
    throw Error(ErrorKind::DegreeTooLarge, "site polynomial degree " + std::to_string(f.degree()));
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(N + 1, N + 1);
  double m[kMaxSiteDegree + 2];
  for (const auto& [key, kappa] : complex_expansion(f)) {
    const auto [alpha, beta, gamma] = key;
    for (int k = 0; k <= N; ++k) {
      const int j = k + alpha - beta;
      if (j < 0 || j > N) continue;
      // B(k+alpha+1, N-k+beta+1) / B(k+1, N-k+1)
      double r = 1.0;
      for (int i = 1; i <= alpha; ++i) r *= (k + i);
      for (int i = 1; i <= beta; ++i) r *= (N - k + i);
      for (int i = 1; i <= alpha + beta; ++i) r /= (N + 1 + i);
      // B(k+1, N-k+1) / B(j+1, N-j+1)
      double q = 1.0;
      if (j >= k) {
        for (int i = 1; i <= j - k; ++i) q *= double(N - j + i) / double(k + i);
      } else {
        for (int i = 1; i <= k - j; ++i) q *= double(j + i) / double(N - k + i);
      }
      beta_sign_moments(k + alpha + 1.0, N - k + beta + 1.0, gamma, m);
      t(j, k) += kappa * std::pow(2.0, alpha + beta) * r * std::sqrt(q) * m[gamma];
    }
  }
  return t;
}

SpinOperator single_site_operator(int N, const SitePolynomial& f) {
  const Eigen::MatrixXcd t = toeplitz_site_op(N, f);
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  if (t.imag().cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorKind::InvalidInput, "single-site Toeplitz operator is not real");
  SpinOperator op;
  op.N = N;
  op.sites = 1;
  op.matrix = t.real().sparseView(1e-300, 1.0);
  op.matrix.makeCompressed();
  return op;
}

SpinOperator assemble_graph_operator(const TriangleGraph& g, int N, long nnz_cap) {
  if (N < 1) throw Error(ErrorKind::InvalidInput, "N must be at least 1");
  const int v = g.vertex_count();
  const int d = N + 1;
  double dim_f = std::pow(double(d), v);
  if (dim_f > double(std::numeric_limits<int>::max()))
    throw Error(ErrorKind::DimensionCap, "Hilbert dimension exceeds index range");
  const long dim = static_cast<long>(std::llround(dim_f));

  // Two-site coupling sum_c T(c) (x) T(c), first factor on the slower site.
  Eigen::MatrixXcd ops[3] = {toeplitz_site_op(N, SitePolynomial::monomial(1, 0, 0)),
                             toeplitz_site_op(N, SitePolynomial::monomial(0, 1, 0)),
                             toeplitz_site_op(N, SitePolynomial::monomial(0, 0, 1))};
  Eigen::MatrixXcd pair = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (const auto& t : ops) pair += Eigen::kroneckerProduct(t, t);
  const double scale = pair.cwiseAbs().maxCoeff();
  if (pair.imag().cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorKind::InvalidInput, "coupling is not real");
  // per column of the pair matrix: (row, value)
  std::vector<std::vector<std::pair<int, double>>> cols(d * d);
  long pair_nnz = 0;
  for (int c = 0; c < d * d; ++c)
    for (int r = 0; r < d * d; ++r)
      if (std::abs(pair(r, c).real()) > 1e-14 * scale) {
        cols[c].push_back({r, pair(r, c).real()});
        ++pair_nnz;
      }
  const double estimate = double(dim) * double(g.edges().size()) * double(pair_nnz) / (d * d);
  if (estimate > double(nnz_cap))
    throw Error(ErrorKind::DimensionCap,
                "estimated " + std::to_string(static_cast<long>(estimate)) + " nonzeros");

  std::vector<long> stride(v);
  for (int i = v - 1, s = 1; i >= 0; --i, s *= d) stride[i] = s;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(estimate) + 1);
  for (auto [i, j] : g.edges()) {
    for (long col = 0; col < dim; ++col) {
      const int di = static_cast<int>((col / stride[i]) % d);
      const int dj = static_cast<int>((col / stride[j]) % d);
      for (const auto& [r, val] : cols[di * d + dj]) {
        const int a = r / d, b = r % d;
        const long row = col + (a - di) * stride[i] + (b - dj) * stride[j];
        trip.emplace_back(static_cast<int>(row), static_cast<int>(col), val);
      }
    }
  }
  SpinOperator op;
  op.N = N;
  op.sites = v;
  op.matrix.resize(dim, dim);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

EigenPairs lowest_spectrum(const SpinOperator& op, int k, const SolverOptions& opts) {
  if (k < 1 || k > 32) throw Error(ErrorKind::InvalidInput, "k must lie in [1, 32]");
  EigenPairs e = lowest_eigenpairs(op.matrix, std::min<int>(k, op.dimension()), opts);
  const double bound = 1e-9 * std::max(norm_bound(op.matrix), 1e-300);
  for (int i = 0; i < e.residuals.size(); ++i)
    if (!(e.residuals(i) <= bound))
      throw Error(ErrorKind::NoConvergence, "eigenpair residual " + std::to_string(e.residuals(i)));
  return e;
}

double triangle_casimir_ground(int N) {
  const double c = 2.0 / (N + 2.0);
  const double s = N / 2.0;
  const double S = (N % 2 == 0) ? 0.0 : 0.5;
  return 0.5 * c * c * (S * (S + 1.0) - 3.0 * s * (s + 1.0));
}

SphereGrid sphere_grid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw Error(ErrorKind::InvalidInput, "empty sphere grid");
  const GaussRule gl = gauss_legendre(n_theta);
  SphereGrid g;
  g.cos_theta = gl.nodes;
  g.phi = Eigen::VectorXd::LinSpaced(n_phi, 0.0, 2.0 * M_PI * (n_phi - 1) / n_phi);
  g.weight = gl.weights * Eigen::RowVectorXd::Constant(n_phi, 2.0 * M_PI / n_phi);
  return g;
}

Eigen::VectorXcd coherent_state(int N, const Eigen::Vector3d& n) {
  const Eigen::Vector3d u = n.normalized();
  const double theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
  const double phi = std::atan2(u.y(), u.x());
  const double lc = std::log(std::cos(theta / 2.0)), ls = std::log(std::sin(theta / 2.0));
  Eigen::VectorXcd v(N + 1);
  for (int k = 0; k <= N; ++k) {
    double lg = 0.5 * log_choose(N, k);
    if (k > 0) lg += k * lc;
    if (k < N) lg += (N - k) * ls;
    v(k) = std::polar(std::exp(lg), -k * phi);
  }
  return v;
}

double HusimiMarginal::density_at(const Eigen::Vector3d& n) const {
  const Eigen::VectorXcd c = coherent_state(N, n);
  const cd q = c.adjoint() * reduced * c;
  return (N + 1.0) / (4.0 * M_PI) * std::max(0.0, q.real());
}

double HusimiMarginal::total_mass() const { return (density.array() * grid.weight.array()).sum(); }

Eigen::MatrixXcd reduced_density(const Eigen::VectorXcd& state, int N, int sites, int site) {
  const long d = N + 1;
  if (site < 0 || site >= sites) throw Error(ErrorKind::InvalidInput, "site out of range");
  long outer = 1, inner = 1;
  for (int i = 0; i < site; ++i) outer *= d;
  for (int i = site + 1; i < sites; ++i) inner *= d;
  if (state.size() != outer * d * inner)
    throw Error(ErrorKind::InvalidInput, "state dimension does not match (N+1)^sites");
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  for (long o = 0; o < outer; ++o) {
    Eigen::Map<const Eigen::MatrixXcd> y(state.data() + o * d * inner, inner, d);
    rho += y.transpose() * y.conjugate();
  }
  return rho;
}

HusimiMarginal husimi_marginal(const Eigen::VectorXcd& state, int N, int sites, int site,
                               const SphereGrid& grid) {
  if (grid.cos_theta.size() < N + 1 || grid.phi.size() < 2 * N + 1)
    throw Error(ErrorKind::GridTooCoarse, "grid does not integrate degree 2N exactly");
  const double norm = state.norm();
  if (std::abs(norm - 1.0) > 1e-8) throw Error(ErrorKind::InvalidInput, "state is not normalized");
  HusimiMarginal h;
  h.site = site;
  h.N = N;
  h.grid = grid;
  h.reduced = reduced_density(state, N, sites, site);
  h.density.resize(grid.cos_theta.size(), grid.phi.size());
  for (int i = 0; i < grid.cos_theta.size(); ++i) {
    const double c = grid.cos_theta(i), s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < grid.phi.size(); ++j)
      h.density(i, j) =
          h.density_at(Eigen::Vector3d(s * std::cos(grid.phi(j)), s * std::sin(grid.phi(j)), c));
  }
  if (std::abs(h.total_mass() - 1.0) > 1e-6)
    throw Error(ErrorKind::GridTooCoarse, "Husimi mass " + std::to_string(h.total_mass()));
  return h;
}

HusimiMarginal husimi_marginal(const Eigen::VectorXd& state, int N, int sites, int site,
                               const SphereGrid& grid) {
  return husimi_marginal(Eigen::VectorXcd(state.cast<cd>()), N, sites, site, grid);
}

SphereRegion SphereRegion::cap(const Eigen::Vector3d& axis, double angle) {
  return {Kind::Cap, axis.normalized(), angle};
}

SphereRegion SphereRegion::band(const Eigen::Vector3d& axis, double half_width) {
  return {Kind::Band, axis.normalized(), half_width};
}

double mass_outside(const HusimiMarginal& h, const SphereRegion& region) {
  const int N = h.N;
  const Eigen::Vector3d axis = region.axis.normalized();
  // region as an interval [c0, c1] of axis . n
  double c0 = 0.0, c1 = 0.0;
  if (region.kind == SphereRegion::Kind::Cap) {
    c0 = std::cos(std::clamp(region.size, 0.0, M_PI));
    c1 = 1.0;
  } else {
    c0 = -std::clamp(region.size, 0.0, 1.0);
    c1 = -c0;
  }
  if (std::abs(std::abs(axis.z()) - 1.0) < 1e-14) {
    // Husimi z-marginal of m_k is Beta(k+1, N-k+1) in t = (1 + z) / 2.
    double lo = (1.0 + c0) / 2.0, hi = (1.0 + c1) / 2.0;
    if (axis.z() < 0) std::tie(lo, hi) = std::pair(1.0 - hi, 1.0 - lo);
    double out = 0.0;
    for (int k = 0; k <= N; ++k) {
      const double p = h.reduced(k, k).real();
      if (p == 0.0) continue;
      const double below = lo > 0.0 ? boost::math::ibeta(k + 1.0, N - k + 1.0, lo) : 0.0;
      const double above = hi < 1.0 ? boost::math::ibetac(k + 1.0, N - k + 1.0, hi) : 0.0;
      out += p * (below + above);
    }
    return std::clamp(out, 0.0, 1.0);
  }
  Eigen::Vector3d e1 = axis.unitOrthogonal(), e2 = axis.cross(e1);
  const GaussRule gl = gauss_legendre(N + 2, c0, c1);
  const int nphi = 2 * N + 2;
  double inside = 0.0;
  for (int i = 0; i < gl.nodes.size(); ++i) {
    const double c = gl.nodes(i), s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < nphi; ++j) {
      const double ph = 2.0 * M_PI * j / nphi;
      const Eigen::Vector3d n = c * axis + s * (std::cos(ph) * e1 + std::sin(ph) * e2);
      inside += gl.weights(i) * (2.0 * M_PI / nphi) * h.density_at(n);
    }
  }
  return std::clamp(1.0 - inside, 0.0, 1.0);
}

double husimi_width(const Eigen::MatrixXcd& reduced, int N, const Eigen::Vector3d& target) {
  Eigen::Vector3d mean;
  for (int c = 0; c < 3; ++c) {
    const auto f = SitePolynomial::monomial(c == 0, c == 1, c == 2);
    mean(c) = (reduced * toeplitz_site_op(N, f)).trace().real();
  }
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * target.normalized().dot(mean)));
}

namespace {

// first gap above the ground level, skipping a degenerate ground multiplet
double spectral_gap(const EigenPairs& e, double scale) {
  for (int i = 1; i < e.values.size(); ++i)
    if (e.values(i) - e.values(0) > 1e-9 * scale) return e.values(i) - e.values(0);
  return 0.0;
}

}  // namespace

ScalingResult scaling_study(const ScalingSpec& spec) {
  if (spec.N.empty()) throw Error(ErrorKind::InvalidInput, "empty N list");
  std::vector<int> ns = spec.N;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (int n : ns)
    if (n < 1) throw Error(ErrorKind::InvalidInput, "N must be at least 1");

  ScalingResult res;
  SitePolynomial symbol;
  Eigen::Vector3d target(0, 0, 0);
  if (spec.experiment == "triangle") {
    res.symbol_min = -1.5;
    res.mu_min = 3.0;
  } else if (spec.experiment == "sphere_z2") {
    symbol = SitePolynomial::monomial(0, 0, 2);
    res.mu_min = 1.0;
    res.has_width = true;
  } else if (spec.experiment == "sphere_miniwell") {
    if (!(std::abs(spec.epsilon) < 1.0))
      throw Error(ErrorKind::InvalidInput, "miniwell needs |epsilon| < 1");
    symbol = SitePolynomial::monomial(0, 0, 2) + SitePolynomial::monomial(1, 0, 2, spec.epsilon);
    res.mu_min = 1.0 - std::abs(spec.epsilon);
    target = Eigen::Vector3d(spec.epsilon >= 0 ? -1.0 : 1.0, 0, 0);
    res.has_width = true;
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown experiment '" + spec.experiment + "'");
  }

  res.rows.resize(ns.size());
  parallel_for(static_cast<int>(ns.size()), spec.jobs, [&](int idx) {
    const int N = ns[idx];
    ScalingRow row;
    row.N = N;
    row.width = std::numeric_limits<double>::quiet_NaN();
    if (spec.experiment == "triangle") {
      SpinOperator op = assemble_graph_operator(triangle_graph(), N);
      EigenPairs e = lowest_spectrum(op, 6);
      row.lambda_min = e.values(0);
      row.gap = spectral_gap(e, norm_bound(op.matrix));
    } else {
      SpinOperator op = single_site_operator(N, symbol);
      EigenPairs e = lowest_spectrum(op, 2);
      row.lambda_min = e.values(0);
      row.gap = spectral_gap(e, norm_bound(op.matrix));
      const Eigen::VectorXcd psi = e.vectors.col(0).cast<cd>();
      const Eigen::MatrixXcd rho = psi * psi.adjoint();
      if (spec.experiment == "sphere_z2") {
        // RMS distance to the equator
        row.width = std::sqrt(std::max(
            0.0, (rho * toeplitz_site_op(N, SitePolynomial::monomial(0, 0, 2))).trace().real()));
      } else {
        row.width = husimi_width(rho, N, target);
      }
    }
    res.rows[idx] = row;
  });

  const size_t first = ns.size() / 2;
  if (ns.size() - first >= 2) {
    std::vector<double> x, lead, corr, width;
    for (size_t i = first; i < ns.size(); ++i) {
      const auto& r = res.rows[i];
      x.push_back(r.N);
      lead.push_back(r.lambda_min - res.symbol_min);
      corr.push_back(std::abs(r.lambda_min - res.symbol_min - res.mu_min / r.N));
      width.push_back(r.width);
    }
    res.leading = power_law_fit(x, lead);
    res.correction = power_law_fit(x, corr);
    if (res.has_width) res.width = power_law_fit(x, width);
  }
  return res;
}

}  // namespace qsel
