#include <gtest/gtest.h>

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "qsel/error.hpp"
#include "qsel/model_operators.hpp"

using namespace qsel;

namespace {

ModelSpec shifted_crossing() {
  ModelSpec s = crossing_abs_spec();
  s.linear = Eigen::Vector2d(0.5, 0.5);
  return s;
}

// -u'' + |q| u = E u has an even ground with u'(0) = 0, so E = -a'_1.
double first_ai_prime_zero() {
  boost::uintmax_t iters = 100;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      [](double x) { return boost::math::airy_ai_prime(x); }, -1.2, -0.8,
      boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (lo + hi);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidInput;
}

}  // namespace

TEST(ModelSpecValidation, RejectsBadCoefficients) {
  ModelSpec s = crossing_spec();
  s.kinetic << 1.0, 1.5, 1.5, 1.0;
  EXPECT_EQ(kind_of([&] { validate_model(s); }), ErrorKind::ModelInvalid);
  s = crossing_spec();
  s.quartic = -1.0;
  EXPECT_EQ(kind_of([&] { validate_model(s); }), ErrorKind::ModelInvalid);
  s = crossing_spec();
  s.dim = 3;
  EXPECT_EQ(kind_of([&] { validate_model(s); }), ErrorKind::ModelInvalid);
}

TEST(ModelSpecValidation, UndominatedLinearTermRejected) {
  // q1^2 q2^2 + q1 + q2 is a linear potential along q2 = 0.
  ModelSpec s = crossing_spec();
  s.linear = Eigen::Vector2d(1.0, 1.0);
  EXPECT_EQ(kind_of([&] { validate_model(s); }), ErrorKind::ModelInvalid);
  ModelSpec airy = airy_spec();
  airy.absolute(0) = 0.0;
  airy.linear(0) = 0.2;
  EXPECT_EQ(kind_of([&] { validate_model(airy); }), ErrorKind::ModelInvalid);
}

TEST(ModelSpecValidation, DominatedLinearTermAccepted) {
  EXPECT_NO_THROW(validate_model(shifted_crossing()));
  ModelSpec edge = crossing_abs_spec();
  edge.linear = Eigen::Vector2d(1.0, -1.0);  // |q| + q vanishes on a half-line only
  EXPECT_NO_THROW(validate_model(edge));
  EXPECT_NO_THROW(validate_model(crossing_spec()));
}

TEST(Build, SymmetricWithStencilPattern) {
  ModelSpec s = shifted_crossing();
  s.R = 3.0;
  s.M = 29;
  const DiscretizedOperator op = build(s);
  EXPECT_EQ(op.matrix.rows(), 29 * 29);
  EXPECT_LT((SparseMatrix(op.matrix.transpose()) - op.matrix).norm(), 1e-14);
  for (int c = 0; c < op.matrix.outerSize(); ++c) {
    double diag = 0.0, off = 0.0;
    int entries = 0;
    for (SparseMatrix::InnerIterator it(op.matrix, c); it; ++it) {
      ++entries;
      if (it.row() == c) diag = it.value(); else off += std::abs(it.value());
    }
    EXPECT_LE(entries, 5);
    const double v = s.potential(op.coords(c, 0), op.coords(c, 1));
    EXPECT_NEAR(diag - 4.0 / (op.h * op.h), v, 1e-9);
    EXPECT_GE(diag - off, v - 1e-9);
  }
}

TEST(Build, GridTooLarge) {
  ModelSpec s = crossing_spec();
  s.M = 2100;
  EXPECT_EQ(kind_of([&] { build(s); }), ErrorKind::GridTooLarge);
}

TEST(Build, MixedDerivativeHarmonic) {
  // p.Qp + |q|^2 has ground sum sqrt(eig Q).
  ModelSpec s = harmonic_spec(2);
  s.kinetic << 1.0, 0.3, 0.3, 1.0;
  s.M = 359;
  const DiscretizedOperator op = build(s);
  EXPECT_LT((SparseMatrix(op.matrix.transpose()) - op.matrix).norm(), 1e-12);
  const GroundState g = ground_and_gap(op);
  EXPECT_NEAR(g.lambda0, std::sqrt(1.3) + std::sqrt(0.7), 2e-3);
  EXPECT_NEAR(g.gap, 2.0 * std::sqrt(0.7), 2e-3);
}

TEST(Build, HarmonicGroundAndGap) {
  ModelSpec s = harmonic_spec(2);
  s.R = 12.0;
  s.M = 600;
  const GroundState g = ground_and_gap(build(s));
  EXPECT_NEAR(g.lambda0, 2.0, 1e-3);
  EXPECT_NEAR(g.gap, 2.0, 1e-2);
  EXPECT_TRUE(g.perron);
}

TEST(Build, AiryGround) {
  const GroundState g = ground_and_gap(build(airy_spec()));
  EXPECT_NEAR(g.lambda0, -first_ai_prime_zero(), 1e-4);
  EXPECT_NEAR(g.lambda0, 1.0188, 1e-4);
}

TEST(Build, HbarVariantScalesKinetic) {
  ModelSpec s = harmonic_spec(1);
  s.hbar = 0.5;
  s.R = 8.0;
  s.M = 1599;
  // -hbar^2 d^2 + q^2 has ground hbar.
  EXPECT_NEAR(ground_and_gap(build(s)).lambda0, 0.5, 1e-4);
}

TEST(GroundAndGap, CrossingRichardson) {
  const ConvergedLevels c = converged_levels(crossing_spec(), 2);
  EXPECT_TRUE(c.converged);
  EXPECT_LT(c.delta_refine(0), 5e-3);
  EXPECT_LT(c.delta_box(0), 5e-3);
  // Frozen grid-converged value of -Delta + q1^2 q2^2.
  EXPECT_NEAR(c.value(0), 1.108230, 2e-5);
  EXPECT_LT(c.error(0), 1e-3);
  EXPECT_GE(c.fine(0), c.coarse(0));
}

TEST(GroundAndGap, ShiftedCrossingHasGap) {
  const DiscretizedOperator op = build(shifted_crossing());
  const GroundState g = ground_and_gap(op);
  EXPECT_GT(g.gap, 0.1);
  EXPECT_TRUE(g.perron);
  EXPECT_GT(g.lambda0 + op.offset, -1e-8);
  EXPECT_LT(g.residuals.maxCoeff(), 1e-8 * norm_bound(op.matrix));
}

TEST(GroundAndGap, PositivityWithOffset) {
  ModelSpec s = harmonic_spec(1);
  s.linear(0) = 3.0;  // q^2 + 3q >= -9/4
  s.R = 10.0;
  s.M = 999;
  const DiscretizedOperator op = build(s);
  EXPECT_NEAR(op.offset, 2.25, 1e-12);
  const GroundState g = ground_and_gap(op);
  EXPECT_NEAR(g.lambda0, 1.0 - 2.25, 1e-3);
  EXPECT_GT(g.lambda0 + op.offset, -1e-8);
}

TEST(GroundAndGap, CrossingGroundIsSymmetric) {
  ModelSpec s = crossing_spec();
  s.M = 159;
  const DiscretizedOperator op = build(s);
  const GroundState g = ground_and_gap(op);
  double worst = 0.0;
  for (int i = 0; i < s.M; ++i)
    for (int j = 0; j < s.M; ++j) {
      const double u = g.vector(op.unknown_at(i, j));
      worst = std::max(worst, std::abs(u - g.vector(op.unknown_at(s.M - 1 - i, j))));
      worst = std::max(worst, std::abs(u - g.vector(op.unknown_at(i, s.M - 1 - j))));
      worst = std::max(worst, std::abs(u - g.vector(op.unknown_at(j, i))));
    }
  EXPECT_LT(worst, 1e-8);
}

TEST(AutoBox, GrowsUntilGroundVanishesAtEdge) {
  ModelSpec s = harmonic_spec(2);
  s.R = 3.0;
  s.M = 59;
  const ModelSpec grown = auto_box(s, 1e-12);
  EXPECT_GT(grown.R, 6.0);
  EXPECT_NEAR(grown.spacing(), s.spacing(), 1e-3);
}

TEST(Agmon, CrossingExponent) {
  ModelSpec s = crossing_abs_spec();
  s.M = 479;
  const DiscretizedOperator op = build(s);
  const AgmonFit f = agmon_fit(op, ground_and_gap(op).vector);
  EXPECT_NEAR(f.exponent, 1.5, 0.1);
  EXPECT_GT(f.r2, 0.999);
  EXPECT_GE(f.shells, 5);
}

TEST(Agmon, HarmonicGaussian) {
  ModelSpec s = harmonic_spec(1);
  s.R = 16.0;
  s.M = 1599;
  const DiscretizedOperator op = build(s);
  const AgmonFit f = agmon_fit(op, ground_and_gap(op).vector);
  EXPECT_NEAR(f.exponent, 2.0, 0.05);
  EXPECT_NEAR(f.rate, 0.5, 0.02);
}

TEST(Agmon, AiryExponent) {
  const DiscretizedOperator op = build(airy_spec());
  const AgmonFit f = agmon_fit(op, ground_and_gap(op).vector);
  EXPECT_NEAR(f.exponent, 1.5, 0.1);
}

TEST(Agmon, SmallBoxIsWindowEmpty) {
  ModelSpec s = harmonic_spec(1);
  s.R = 4.0;
  s.M = 399;
  const DiscretizedOperator op = build(s);
  const Eigen::VectorXd u = ground_and_gap(op).vector;
  EXPECT_EQ(kind_of([&] { agmon_fit(op, u); }), ErrorKind::WindowEmpty);
}

TEST(Weyl, HarmonicCount) {
  ModelSpec s = harmonic_spec(2);
  s.R = 8.0;
  s.M = 159;
  const CountCurve c = weyl_count(build(s), {6.1});
  // Levels 2(j + k + 1): 2 once, 4 twice, 6 three times.
  EXPECT_EQ(c.count[0], 6);
}

TEST(Weyl, DenseAndInertiaCountsAgree) {
  for (const ModelSpec& base : {harmonic_spec(2), shifted_crossing(), crossing_abs_spec()}) {
    ModelSpec s = base;
    s.R = 5.0;
    s.M = 39;
    const DiscretizedOperator op = build(s);
    std::vector<double> lambdas{2.5, 5.3, 9.7, 14.1, 21.9};
    const CountCurve c = weyl_count(op, lambdas);
    for (size_t i = 0; i < lambdas.size(); ++i) {
      EXPECT_EQ(c.count[i], dense_count(op, c.lambda[i]));
      if (i) EXPECT_GE(c.count[i], c.count[i - 1]);
    }
  }
}

TEST(Weyl, UnreliableWindow) {
  ModelSpec s = harmonic_spec(1);
  s.R = 10.0;
  s.M = 99;  // h = 0.2, bound ~ 61.7
  const DiscretizedOperator op = build(s);
  EXPECT_EQ(kind_of([&] { weyl_count(op, {20.0, 100.0}); }), ErrorKind::UnreliableWindow);
}

TEST(Weyl, CrossingLogCorrectedLaw) {
  ModelSpec s = crossing_abs_spec();
  s.R = 300.0;
  s.v_cut = 900.0;
  s.M = static_cast<int>(std::lround(2.0 * s.R / 0.05)) - 1;
  std::vector<double> lambdas;
  for (int i = 0; i <= 10; ++i) lambdas.push_back(20.0 * std::pow(10.0, i / 10.0));
  const CountCurve c = weyl_count(build(s), lambdas, 1.0);
  // Frozen counts on this grid.
  EXPECT_EQ(c.count.front(), 60);
  EXPECT_EQ(c.count.back(), 3992);
  EXPECT_GT(c.log_model.coef(1), 0.0);
  EXPECT_GE(c.log_model.r2, 0.98);
  EXPECT_LT(c.f_test_p, 1e-6);
  EXPECT_TRUE(c.log_beats_power);
}

TEST(Weyl, MiniwellReferenceIsLinear) {
  ModelSpec s = harmonic_spec(1);
  s.R = 24.0;
  s.M = 4799;
  std::vector<double> lambdas;
  for (int i = 0; i <= 18; ++i) lambdas.push_back(20.0 * std::pow(10.0, i / 18.0));
  const CountCurve c = weyl_count(build(s), lambdas, 1.0);
  EXPECT_NEAR(c.ratio_mean, 0.5, 0.02);
  EXPECT_LE(c.ratio_spread, 0.05);
  for (size_t i = 0; i < lambdas.size(); ++i)
    EXPECT_EQ(c.count[i], static_cast<long>(std::ceil((c.lambda[i] - 1.0) / 2.0)));
}

TEST(HbarScaling, IdentityAtOne) {
  ModelSpec s = crossing_spec();
  const HbarScaling t = hbar_scaling(s, {1.0});
  EXPECT_NEAR(t.rows[0].ratio, 1.108230, 2e-5);
  EXPECT_DOUBLE_EQ(t.rows[0].R, 12.0);
}

TEST(HbarScaling, RatioConstantAcrossHbar) {
  const HbarScaling t = hbar_scaling(crossing_spec(), {0.05, 0.1, 0.2});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_LE(t.ratio_spread, 1.02);
  EXPECT_LE(t.gap_ratio_spread, 1.05);
  for (const HbarRow& r : t.rows) {
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.ratio, 1.108230, 5e-3);
  }
  // Boxes are rounded, not exactly proportional to hbar^{1/3}.
  EXPECT_NE(t.rows[0].R / t.rows[1].R, std::cbrt(0.5));
}

TEST(SublevelVolume, UnitLevelContainsOrigin) {
  // The diamond |q1| + |q2| <= 1 has area 2; the quartic term trims it.
  const double v = sublevel_volume(1.0);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 2.0);
}

TEST(SublevelVolume, MatchesGridCount) {
  const double lambda = 4.0, h = 2e-3;
  long inside = 0;
  for (double q1 = -lambda + h / 2; q1 < lambda; q1 += h)
    for (double q2 = -lambda + h / 2; q2 < lambda; q2 += h)
      if (q1 * q1 * q2 * q2 + std::abs(q1) + std::abs(q2) <= lambda) ++inside;
  EXPECT_NEAR(sublevel_volume(lambda), inside * h * h, 2e-3 * sublevel_volume(lambda));
}

TEST(SublevelVolume, QuadrupledLevelBracket) {
  for (double lambda : {1e2, 1e3, 1e4, 1e5}) {
    const double ratio = sublevel_volume(4.0 * lambda) / sublevel_volume(lambda);
    EXPECT_GE(ratio, 2.0) << lambda;
    EXPECT_LE(ratio, 2.0 * (1.0 + std::log(4.0) / std::log(lambda)) * 1.1) << lambda;
  }
}

TEST(SublevelVolume, RatioToSqrtLogStaysBounded) {
  double lo = 1e300, hi = 0.0;
  for (int e = 2; e <= 6; ++e)
    for (double m : {1.0, 3.0}) {
      const double lambda = m * std::pow(10.0, e);
      if (lambda > 1e6) continue;
      const double r = sublevel_volume(lambda) / (std::sqrt(lambda) * std::log(lambda));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  EXPECT_GT(lo, 0.5);
  EXPECT_LT(hi / lo, 1.5);
}

TEST(SublevelVolume, PhaseSpaceLaw) {
  std::vector<double> lambdas;
  Eigen::MatrixXd x(13, 2);
  Eigen::VectorXd y(13);
  for (int i = 0; i < 13; ++i) {
    const double lambda = std::pow(10.0, 2.0 + i / 3.0);
    x.row(i) << 1.0, std::log(lambda);
    y(i) = sublevel_volume(lambda, {1.0, 1.0, 1.0, true}) / std::pow(lambda, 1.5);
  }
  const LinearFit f = least_squares_fit(x, y);
  EXPECT_GT(f.coef(1), 0.0);
  EXPECT_GE(f.r2, 0.98);
}

TEST(SublevelVolume, DivergentWithoutSecondAbsTerm) {
  EXPECT_EQ(kind_of([] { sublevel_volume(10.0, {1.0, 1.0, 0.0, false}); }),
            ErrorKind::QuadratureFail);
}
