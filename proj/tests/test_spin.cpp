#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "qsel/error.hpp"
#include "qsel/quadrature.hpp"
#include "qsel/spin.hpp"

using namespace qsel;
using cd = std::complex<double>;

namespace {

// Quadrature nodes on one sphere with the orthonormal monomials evaluated at each node.
struct SiteQuadrature {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
  std::vector<Eigen::VectorXcd> basis;
};

SiteQuadrature site_quadrature(int N, int extra_degree) {
  SiteQuadrature q;
  const GaussRule gl = gauss_legendre(N / 2 + extra_degree + 2, 0.0, 1.0);
  const int nphi = 2 * N + 2 * extra_degree + 2;
  for (int i = 0; i < gl.nodes.size(); ++i) {
    const double t = gl.nodes(i);
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2.0 * M_PI * j / nphi;
      const double r = 2.0 * std::sqrt(t * (1.0 - t));
      q.points.emplace_back(r * std::cos(phi), r * std::sin(phi), 2.0 * t - 1.0);
      q.weights.push_back(gl.weights(i) / nphi);
      Eigen::VectorXcd m(N + 1);
      for (int k = 0; k <= N; ++k) {
        const double c = std::sqrt((N + 1.0) * std::tgamma(N + 1.0) /
                                   (std::tgamma(k + 1.0) * std::tgamma(N - k + 1.0)));
        m(k) = c * std::pow(std::sqrt(t), k) * std::pow(std::sqrt(1.0 - t), N - k) *
               std::polar(1.0, k * phi);
      }
      q.basis.push_back(m);
    }
  }
  return q;
}

// Dense Toeplitz matrix of a multi-site symbol by full product quadrature.
Eigen::MatrixXcd brute_force_toeplitz(
    int N, int sites, int extra_degree,
    const std::function<double(const std::vector<Eigen::Vector3d>&)>& symbol) {
  const SiteQuadrature q = site_quadrature(N, extra_degree);
  const int np = static_cast<int>(q.points.size());
  long dim = 1;
  for (int s = 0; s < sites; ++s) dim *= N + 1;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<int> idx(sites, 0);
  std::vector<Eigen::Vector3d> pts(sites);
  while (true) {
    double w = 1.0;
    Eigen::VectorXcd m = Eigen::VectorXcd::Ones(1);
    for (int s = 0; s < sites; ++s) {
      w *= q.weights[idx[s]];
      pts[s] = q.points[idx[s]];
      Eigen::VectorXcd next(m.size() * (N + 1));
      for (int a = 0; a < m.size(); ++a) next.segment(a * (N + 1), N + 1) = m(a) * q.basis[idx[s]];
      m = next;
    }
    h += (w * symbol(pts)) * (m.conjugate() * m.transpose());
    int s = sites - 1;
    while (s >= 0 && ++idx[s] == np) idx[s--] = 0;
    if (s < 0) break;
  }
  return h;
}

Eigen::MatrixXd spin_x(int N) {
  const double s = N / 2.0;
  Eigen::MatrixXd sx = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (int k = 0; k < N; ++k) {
    const double m = k - s;
    sx(k + 1, k) = sx(k, k + 1) = 0.5 * std::sqrt(s * (s + 1) - m * (m + 1));
  }
  return sx;
}

SitePolynomial random_polynomial(std::mt19937_64& rng, int max_degree) {
  std::uniform_int_distribution<int> deg(0, max_degree);
  std::normal_distribution<double> g(0, 1);
  std::vector<SitePolynomial::Term> terms;
  for (int i = 0; i < 6; ++i) {
    int a = deg(rng), b = deg(rng), c = deg(rng);
    while (a + b + c > max_degree) {
      if (a > 0) --a;
      else if (b > 0) --b;
      else --c;
    }
    terms.push_back({a, b, c, g(rng)});
  }
  return SitePolynomial(terms);
}

double heisenberg_symbol(const TriangleGraph& g, const std::vector<Eigen::Vector3d>& n) {
  double s = 0.0;
  for (auto [i, j] : g.edges()) s += n[i].dot(n[j]);
  return s;
}

}  // namespace

TEST(SitePolynomial, CanonicalForm) {
  SitePolynomial p({{0, 0, 2, 1.0}, {1, 0, 0, 2.0}, {0, 0, 2, -1.0}, {1, 0, 0, 1.0}});
  ASSERT_EQ(p.terms().size(), 1u);
  EXPECT_EQ(p.terms()[0].a, 1);
  EXPECT_DOUBLE_EQ(p.terms()[0].coeff, 3.0);
  auto q = (SitePolynomial::monomial(1, 0, 0) + SitePolynomial::constant(1.0)) *
           SitePolynomial::monomial(0, 0, 1);
  EXPECT_EQ(q.degree(), 2);
  EXPECT_DOUBLE_EQ(q.evaluate({0.5, 0.0, 2.0}), 3.0);
}

TEST(ToeplitzSiteOp, Examples) {
  Eigen::MatrixXcd z = toeplitz_site_op(2, SitePolynomial::monomial(0, 0, 1));
  Eigen::Vector3d want(-0.5, 0.0, 0.5);
  EXPECT_LT((z - Eigen::MatrixXcd(want.cast<cd>().asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
  for (int N = 1; N <= 12; ++N) {
    Eigen::MatrixXcd x = toeplitz_site_op(N, SitePolynomial::monomial(1, 0, 0));
    EXPECT_LT((x - (2.0 / (N + 2)) * spin_x(N).cast<cd>()).cwiseAbs().maxCoeff(), 1e-14) << N;
  }
  Eigen::MatrixXcd one = toeplitz_site_op(4, SitePolynomial::constant(1.0));
  EXPECT_LT((one - Eigen::MatrixXcd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ToeplitzSiteOp, DiagonalOfZIsBetaMean) {
  for (int N : {1, 5, 17}) {
    Eigen::MatrixXcd z = toeplitz_site_op(N, SitePolynomial::monomial(0, 0, 1));
    for (int k = 0; k <= N; ++k) EXPECT_NEAR(z(k, k).real(), (2.0 * k - N) / (N + 2.0), 1e-15);
  }
}

TEST(ToeplitzSiteOp, SpinAlgebra) {
  for (int N = 1; N <= 15; ++N) {
    auto x = toeplitz_site_op(N, SitePolynomial::monomial(1, 0, 0));
    auto y = toeplitz_site_op(N, SitePolynomial::monomial(0, 1, 0));
    auto z = toeplitz_site_op(N, SitePolynomial::monomial(0, 0, 1));
    const cd c(0.0, 2.0 / (N + 2));
    EXPECT_LT((x * y - y * x - c * z).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((y * z - z * y - c * x).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((z * x - x * z - c * y).cwiseAbs().maxCoeff(), 1e-14);
    const double cas = std::pow(2.0 / (N + 2), 2) * (N / 2.0) * (N / 2.0 + 1);
    EXPECT_LT((x * x + y * y + z * z - cas * Eigen::MatrixXcd::Identity(N + 1, N + 1))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-14);
  }
}

TEST(ToeplitzSiteOp, MatchesQuadratureForRandomPolynomials) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int N = 1 + trial % 6;
    auto f = random_polynomial(rng, kMaxSiteDegree);
    auto t = toeplitz_site_op(N, f);
    EXPECT_LT((t - t.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    auto ref = brute_force_toeplitz(N, 1, kMaxSiteDegree,
                                    [&](const std::vector<Eigen::Vector3d>& n) { return f.evaluate(n[0]); });
    EXPECT_LT((t - ref).cwiseAbs().maxCoeff(), 1e-11) << trial;
  }
}

TEST(ToeplitzSiteOp, RejectsHighDegree) {
  try {
    toeplitz_site_op(3, SitePolynomial::monomial(0, 0, 9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegreeTooLarge);
  }
}

TEST(AssembleGraphOperator, SingleEdgeSpectrum) {
  auto op = assemble_graph_operator(TriangleGraph::edge_graph(2, {{0, 1}}), 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(op.matrix)};
  EXPECT_NEAR(es.eigenvalues()(0), -1.0 / 3.0, 1e-14);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(es.eigenvalues()(i), 1.0 / 9.0, 1e-14);
}

TEST(AssembleGraphOperator, TriangleMatchesBruteForce) {
  auto g = triangle_graph();
  auto op = assemble_graph_operator(g, 2);
  ASSERT_EQ(op.dimension(), 27);
  auto ref = brute_force_toeplitz(2, 3, 1, [&](const auto& n) { return heisenberg_symbol(g, n); });
  EXPECT_LT((Eigen::MatrixXd(op.matrix).cast<cd>() - ref).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(lowest_spectrum(op, 1).values(0), -0.75, 1e-12);
}

TEST(AssembleGraphOperator, TwoSitesMatchBruteForce) {
  auto g = TriangleGraph::edge_graph(2, {{0, 1}});
  for (int N = 1; N <= 3; ++N) {
    auto op = assemble_graph_operator(g, N);
    auto ref = brute_force_toeplitz(N, 2, 1, [&](const auto& n) { return heisenberg_symbol(g, n); });
    EXPECT_LT((Eigen::MatrixXd(op.matrix).cast<cd>() - ref).cwiseAbs().maxCoeff(), 1e-9) << N;
  }
}

TEST(AssembleGraphOperator, EqualsScaledSpinDotProducts) {
  const int N = 3;
  auto op = assemble_graph_operator(triangle_graph(), N);
  Eigen::MatrixXd sx = spin_x(N);
  Eigen::MatrixXd sz = Eigen::VectorXd::LinSpaced(N + 1, -N / 2.0, N / 2.0).asDiagonal();
  // S.S = Sz Sz + (S+ S- + S- S+) / 2 with S+ = Sx + i Sy
  Eigen::MatrixXd splus = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (int k = 0; k < N; ++k) splus(k + 1, k) = 2.0 * sx(k + 1, k);
  const Eigen::MatrixXd sminus = splus.transpose();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N + 1, N + 1);
  auto embed = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int i, int j) -> Eigen::MatrixXd {
    std::vector<Eigen::MatrixXd> f(3, id);
    f[i] = a;
    f[j] = b;
    Eigen::MatrixXd inner = Eigen::kroneckerProduct(f[1], f[2]);
    Eigen::MatrixXd full = Eigen::kroneckerProduct(f[0], inner);
    return full;
  };
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(op.dimension(), op.dimension());
  const auto tri = triangle_graph();
  for (auto [i, j] : tri.edges())
    want += embed(sz, sz, i, j) +
            0.5 * (embed(splus, sminus, i, j) + embed(sminus, splus, i, j));
  want *= std::pow(2.0 / (N + 2), 2);
  EXPECT_LT((Eigen::MatrixXd(op.matrix) - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AssembleGraphOperator, RelabelingPreservesSpectrum) {
  auto g = leaf_graph();
  auto g2 = TriangleGraph::from_triangles(5, {{4, 3, 2}, {2, 1, 0}});
  auto a = lowest_spectrum(assemble_graph_operator(g, 2), 8).values;
  auto b = lowest_spectrum(assemble_graph_operator(g2, 2), 8).values;
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(AssembleGraphOperator, DimensionCap) {
  try {
    assemble_graph_operator(kagome_patch(2, 2), 6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionCap);
  }
  try {
    assemble_graph_operator(triangle_graph(), 10, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionCap);
  }
}

TEST(LowestSpectrum, TriangleCasimir) {
  auto e = lowest_spectrum(assemble_graph_operator(triangle_graph(), 2), 2);
  EXPECT_NEAR(e.values(0), -0.75, 1e-12);
  EXPECT_GT(e.values(1), e.values(0) + 0.1);
  for (int N = 2; N <= 20; ++N) {
    auto op = assemble_graph_operator(triangle_graph(), N);
    auto s = lowest_spectrum(op, 1);
    EXPECT_NEAR(N * (s.values(0) + 1.5), N * (triangle_casimir_ground(N) + 1.5), 1e-9) << N;
    EXPECT_LE(s.residuals(0), 1e-9 * norm_bound(op.matrix));
    if (N % 2 == 0) EXPECT_NEAR(N * (s.values(0) + 1.5), 3.0 * N / (N + 2), 1e-9);
  }
  EXPECT_NEAR(10 * (triangle_casimir_ground(10) + 1.5), 2.5, 1e-12);
}

TEST(LowestSpectrum, OddSpinTriangleHasDoubletGround) {
  // Three spins N/2 with N odd cannot couple to total spin 0; the ground multiplet is S = 1/2.
  const int N = 3;
  EXPECT_NEAR(triangle_casimir_ground(N), -0.84, 1e-15);
  EXPECT_GT(N * (triangle_casimir_ground(N) + 1.5), 3.0 * N / (N + 2) + 0.1);
  auto e = lowest_spectrum(assemble_graph_operator(triangle_graph(), N), 5);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(e.values(i), -0.84, 1e-10);
  EXPECT_GT(e.values(4), -0.84 + 0.01);
}

TEST(LowestSpectrum, DiagonalOperator) {
  auto op = single_site_operator(40, SitePolynomial::monomial(0, 0, 2));
  Eigen::VectorXd d = op.matrix.diagonal();
  std::sort(d.data(), d.data() + d.size());
  auto e = lowest_spectrum(op, 5);
  EXPECT_LT((e.values - d.head(5)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LowestSpectrum, SphereZ2ExactMinimum) {
  for (int N = 10; N <= 400; N += 2) {
    auto e = lowest_spectrum(single_site_operator(N, SitePolynomial::monomial(0, 0, 2)), 1);
    EXPECT_NEAR(e.values(0), 1.0 / (N + 3), 1e-12) << N;
  }
}

TEST(LowestSpectrum, RejectsTooManyPairs) {
  try {
    lowest_spectrum(single_site_operator(40, SitePolynomial::monomial(0, 0, 2)), 33);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(Husimi, CoherentNorthPoleCap) {
  const int N = 40;
  auto h = husimi_marginal(coherent_state(N, {0, 0, 1}), N, 1, 0, sphere_grid(N + 1, 2 * N + 1));
  EXPECT_NEAR(h.total_mass(), 1.0, 1e-8);
  const double inside = 1.0 - mass_outside(h, SphereRegion::cap({0, 0, 1}, 0.5));
  // closed form 1 - cos(1/4)^(2(N+1)) = 0.92495...
  EXPECT_NEAR(inside, 1.0 - std::pow(std::cos(0.25), 2 * (N + 1)), 1e-12);
  EXPECT_NEAR(inside, 0.924953413300686, 1e-12);
  // the same cap around a tilted axis goes through the rotated quadrature path
  Eigen::Vector3d axis = Eigen::Vector3d(1, -2, 0.5).normalized();
  auto ht = husimi_marginal(coherent_state(N, axis), N, 1, 0, sphere_grid(N + 1, 2 * N + 1));
  EXPECT_NEAR(1.0 - mass_outside(ht, SphereRegion::cap(axis, 0.5)), inside, 1e-10);
}

TEST(Husimi, MaximallyMixedIsUniform) {
  const int N = 6;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero((N + 1) * (N + 1));
  for (int k = 0; k <= N; ++k) psi(k * (N + 1) + k) = 1.0 / std::sqrt(N + 1.0);
  auto h = husimi_marginal(psi, N, 2, 1, sphere_grid(N + 1, 2 * N + 1));
  EXPECT_LT((h.density.array() - 1.0 / (4 * M_PI)).abs().maxCoeff(), 1e-8);
  EXPECT_NEAR(mass_outside(h, SphereRegion::cap(Eigen::Vector3d(1, 1, 0), M_PI / 2)), 0.5, 1e-10);
}

TEST(Husimi, EquatorBandMassOfZ2Ground) {
  const int N = 60;
  auto e = lowest_spectrum(single_site_operator(N, SitePolynomial::monomial(0, 0, 2)), 1);
  auto h = husimi_marginal(Eigen::VectorXd(e.vectors.col(0)), N, 1, 0,
                           sphere_grid(N + 1, 2 * N + 1));
  // z-marginal is Beta(31, 31) in (1 + z)/2 with std 1/sqrt(63); |z| <= 0.3 is 2.38 std.
  const double out = mass_outside(h, SphereRegion::band({0, 0, 1}, 0.3));
  EXPECT_NEAR(out, 0.016020078484598, 1e-12);
  EXPECT_NEAR(out, mass_outside(h, SphereRegion::band({0, 0, -1}, 0.3)), 1e-14);
}

TEST(Husimi, EquatorBandShrinksWithN) {
  // Mass outside |z| <= N^(-0.35): 0.0254 at N=200, 0.0135 at 400, below 0.01 from N=600.
  const double frozen[] = {0.025353345893853, 0.013495500646324, 0.008761463849178,
                           0.006246954578223, 0.004711534519031};
  const int ns[] = {200, 400, 600, 800, 1000};
  for (int i = 0; i < 5; ++i) {
    auto e = lowest_spectrum(single_site_operator(ns[i], SitePolynomial::monomial(0, 0, 2)), 1);
    HusimiMarginal h;
    h.N = ns[i];
    Eigen::VectorXcd psi = e.vectors.col(0).cast<cd>();
    h.reduced = psi * psi.adjoint();
    const double out = mass_outside(h, SphereRegion::band({0, 0, 1}, std::pow(ns[i], -0.35)));
    EXPECT_NEAR(out, frozen[i], 1e-10);
    if (ns[i] >= 600) EXPECT_LE(out, 0.01);
  }
}

TEST(Husimi, TriangleGroundIsDelocalizedPerSite) {
  const int N = 4;
  auto e = lowest_spectrum(assemble_graph_operator(triangle_graph(), N), 1);
  for (int site = 0; site < 3; ++site) {
    auto h = husimi_marginal(Eigen::VectorXd(e.vectors.col(0)), N, 3, site,
                             sphere_grid(N + 1, 2 * N + 1));
    for (const auto& axis : {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 2, 3)})
      EXPECT_NEAR(mass_outside(h, SphereRegion::cap(axis, M_PI / 2)), 0.5, 1e-9);
  }
}

TEST(Husimi, GridTooCoarse) {
  try {
    husimi_marginal(coherent_state(10, {0, 0, 1}), 10, 1, 0, sphere_grid(5, 30));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooCoarse);
  }
}

TEST(Husimi, WidthOfCoherentState) {
  // <T_N(n)> = N/(N+2) n for a coherent state, so the width is 2/sqrt(N+2).
  const int N = 30;
  for (const Eigen::Vector3d n : {Eigen::Vector3d(-1, 0, 0), Eigen::Vector3d(0.3, -0.8, 0.5).normalized()}) {
    Eigen::VectorXcd c = coherent_state(N, n);
    EXPECT_NEAR(husimi_width(c * c.adjoint(), N, n), 2.0 / std::sqrt(N + 2.0), 1e-12);
  }
}

TEST(ScalingStudy, TriangleRows) {
  ScalingSpec spec{"triangle", {2, 4, 6, 8, 10}, 0.0, 1};
  auto r = scaling_study(spec);
  ASSERT_EQ(r.rows.size(), 5u);
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.N * (row.lambda_min + 1.5), 3.0 * row.N / (row.N + 2), 1e-9);
    // first excited level is total spin 1: gap = (2/(N+2))^2
    EXPECT_NEAR(row.gap, std::pow(2.0 / (row.N + 2), 2), 1e-9);
  }
  EXPECT_NEAR(r.leading.exponent, -1.0, 0.25);
}

TEST(ScalingStudy, MiniwellFrozenRows) {
  ScalingSpec spec{"sphere_miniwell", {100, 200}, 0.3, 1};
  auto r = scaling_study(spec);
  EXPECT_NEAR(r.rows[0].lambda_min, 7.467995022801808e-03, 1e-14);
  EXPECT_NEAR(r.rows[1].lambda_min, 3.685929446543154e-03, 1e-14);
  EXPECT_NEAR(r.rows[0].width, 4.862256e-01, 1e-6);
  EXPECT_GT(r.rows[0].gap, 0.0);
  EXPECT_THROW(scaling_study({"nope", {10}, 0.0, 1}), Error);
}
