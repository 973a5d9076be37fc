#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace qsel {

/// Ordinary least squares y ~ X b.
struct LinearFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_error;
  Eigen::VectorXd residuals;
  double rss = 0.0;
  double r2 = 0.0;
  int dof = 0;

  /// Two-sided Student-t interval for coefficient i.
  std::pair<double, double> confidence(int i, double level = 0.95) const;
};

LinearFit least_squares_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// log y = log a + s log x.
struct PowerFit {
  double exponent = 0.0;
  double exponent_se = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  std::pair<double, double> ci{0.0, 0.0};
  int points = 0;
};

PowerFit power_law_fit(const std::vector<double>& x, const std::vector<double>& y);

/// p-value of the F-test of a nested reduced model against a full model.
double f_test_pvalue(double rss_reduced, int dof_reduced, double rss_full, int dof_full);

}  // namespace qsel
