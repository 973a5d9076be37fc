#include "qsel/fit.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "qsel/error.hpp"

namespace qsel {

std::pair<double, double> LinearFit::confidence(int i, double level) const {
  if (dof < 1) return {-INFINITY, INFINITY};
  boost::math::students_t dist(dof);
  const double q = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
  return {coef(i) - q * std_error(i), coef(i) + q * std_error(i)};
}

LinearFit least_squares_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(x.rows()), p = static_cast<int>(x.cols());
  if (n != y.size() || n < p || p < 1)
    throw Error(ErrorKind::InvalidInput, "regression needs at least as many points as terms");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) throw Error(ErrorKind::InvalidInput, "rank-deficient regression design");
  LinearFit f;
  f.coef = qr.solve(y);
  f.residuals = y - x * f.coef;
  f.rss = f.residuals.squaredNorm();
  f.dof = n - p;
  const double tss = (y.array() - y.mean()).square().sum();
  f.r2 = tss > 0.0 ? 1.0 - f.rss / tss : 1.0;
  const double sigma2 = f.dof > 0 ? f.rss / f.dof : 0.0;
  const Eigen::MatrixXd cov = (x.transpose() * x).inverse() * sigma2;
  f.std_error = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return f;
}

PowerFit power_law_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorKind::InvalidInput, "power fit needs two or more points");
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw Error(ErrorKind::InvalidInput, "power fit needs positive data");
    design(i, 0) = 1.0;
    design(i, 1) = std::log(x[i]);
    rhs(i) = std::log(y[i]);
  }
  const LinearFit lf = least_squares_fit(design, rhs);
  PowerFit pf;
  pf.exponent = lf.coef(1);
  pf.exponent_se = lf.std_error(1);
  pf.prefactor = std::exp(lf.coef(0));
  pf.r2 = lf.r2;
  pf.ci = lf.confidence(1);
  pf.points = n;
  return pf;
}

double f_test_pvalue(double rss_reduced, int dof_reduced, double rss_full, int dof_full) {
  const int df1 = dof_reduced - dof_full;
  if (df1 < 1 || dof_full < 1) throw Error(ErrorKind::InvalidInput, "models are not nested");
  if (rss_full <= 0.0) return rss_reduced > 0.0 ? 0.0 : 1.0;
  const double stat = std::max(0.0, (rss_reduced - rss_full) / df1 / (rss_full / dof_full));
  boost::math::fisher_f dist(df1, dof_full);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace qsel
