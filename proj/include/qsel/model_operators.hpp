#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "qsel/eigensolvers.hpp"
#include "qsel/fit.hpp"

namespace qsel {

/// P = -hbar^2 sum Q_ij d_i d_j + V on R^dim (dim 1 or 2), with
/// V = quartic q1^2 q2^2 + sum_i (harmonic_i q_i^2 + absolute_i |q_i| + linear_i q_i).
/// The grid has M interior points per axis on (-R, R), Dirichlet outside.
struct ModelSpec {
  int dim = 2;
  Eigen::Matrix2d kinetic = Eigen::Matrix2d::Identity();
  double quartic = 1.0;
  Eigen::Vector2d harmonic = Eigen::Vector2d::Zero();
  Eigen::Vector2d absolute = Eigen::Vector2d::Zero();
  Eigen::Vector2d linear = Eigen::Vector2d::Zero();
  double hbar = 1.0;
  double R = 12.0;
  int M = 239;
  /// Grid points with V > v_cut are dropped (Dirichlet there). Used for long thin wells.
  double v_cut = std::numeric_limits<double>::infinity();

  double potential(double q1, double q2 = 0.0) const;
  double spacing() const { return 2.0 * R / (M + 1); }
};

ModelSpec harmonic_spec(int dim);
ModelSpec crossing_spec();                  // q1^2 q2^2
ModelSpec crossing_abs_spec();              // q1^2 q2^2 + |q1| + |q2|
ModelSpec airy_spec();                      // 1D |q|

constexpr long kMaxGridUnknowns = 4'000'000;

/// Throws ModelInvalid unless Q > 0, the potential coefficients are nonnegative where
/// required and every frozen-variable 1D operator -Q_ii d_i^2 + V(., q_other) sampled on a
/// coarse grid stays bounded below when its box is doubled.
void validate_model(const ModelSpec& spec);

struct DiscretizedOperator {
  SparseMatrix matrix;
  int dim = 2;
  int M = 0;
  double R = 0.0;
  double h = 0.0;
  double hbar = 1.0;
  double v_min = 0.0;   // min of V over active points
  double offset = 0.0;  // max(0, -inf V), makes V + offset >= 0
  double kinetic_min = 1.0;  // smallest eigenvalue of Q
  /// Grid coordinates of each unknown.
  Eigen::MatrixXd coords;  // unknowns x dim
  /// Unknown index of the grid point (i1, i2), or -1 when masked out.
  long unknown_at(int i1, int i2 = 0) const;

  std::vector<int> row_begin;  // per i1: first active i2 (2D) and its unknown offset
  std::vector<int> row_end;
  std::vector<long> row_offset;
};

/// Second-order central differences (5-point, 9-point when Q12 != 0). Throws
/// GridTooLarge beyond kMaxGridUnknowns.
DiscretizedOperator build(const ModelSpec& spec);

struct GroundState {
  double lambda0 = 0.0;
  double gap = 0.0;
  Eigen::VectorXd vector;  // normalized, positive at its largest entry
  Eigen::VectorXd residuals;
  /// All entries above 1e-8 max|u| share one sign.
  bool perron = false;
};

/// Two lowest eigenpairs by shift-invert below min V. Throws NoConvergence.
GroundState ground_and_gap(const DiscretizedOperator& op);

/// Lowest k eigenvalues.
Eigen::VectorXd lowest_levels(const DiscretizedOperator& op, int k);

/// Lowest k levels at spacing h and h/2, Richardson-extrapolated with two-sided error
/// bars |fine - coarse| / 3, and the deltas under M -> 2M and R -> 1.5R.
struct ConvergedLevels {
  Eigen::VectorXd coarse, fine, box, value, error;
  Eigen::VectorXd delta_refine, delta_box;  // relative changes
  bool converged = false;                   // all deltas below tol
};

ConvergedLevels converged_levels(const ModelSpec& spec, int k, double tol = 5e-3);

/// Grows R at fixed spacing until the ground state is below `threshold` (relative to its
/// maximum) on the outermost grid ring. Throws GridTooLarge when the grid limit is hit.
ModelSpec auto_box(ModelSpec spec, double threshold = 1e-12);

struct AgmonFit {
  double exponent = 0.0;  // s
  double rate = 0.0;      // c
  double log_coef = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
  int shells = 0;
  double r_lo = 0.0, r_hi = 0.0;
};

/// Fits -log(env(r)) = c r^s + a log r + b, env(r) the largest |u| on the radial shell,
/// over shells with env in [1e-9, 1e-3] of the peak. Throws WindowEmpty when fewer than
/// five shells qualify or the ground is not below 1e-10 inside 0.9 R.
AgmonFit agmon_fit(const DiscretizedOperator& op, const Eigen::VectorXd& ground);

struct CountCurve {
  std::vector<double> lambda;
  std::vector<long> count;
  double h = 0.0;
  double reliability_bound = 0.0;  // 1/4 (pi/h)^2 hbar^2 min eig Q

  /// N / Lambda^{3r/2} = a + b log Lambda.
  LinearFit log_model;
  /// N = a Lambda^s with free s, fitted in log space.
  PowerFit power_model;
  double rss_log_model_logspace = 0.0;  // residuals of log N under the log model
  double rss_power_model_logspace = 0.0;
  double f_test_p = 1.0;  // log model against N / Lambda^{3r/2} = const
  bool log_beats_power = false;
  /// N / Lambda^r: mean and largest relative deviation from it.
  double ratio_mean = 0.0;
  double ratio_spread = 0.0;
};

/// Counts eigenvalues below each Lambda by LDL^T inertia (dense solve below `dense_limit`
/// unknowns) and fits both laws with exponent parameter r. Throws UnreliableWindow when
/// max Lambda exceeds the grid reliability bound.
CountCurve weyl_count(const DiscretizedOperator& op, const std::vector<double>& lambdas,
                      double r = 1.0, int jobs = 1);

/// Independent count from a full dense eigen-decomposition; small grids only.
long dense_count(const DiscretizedOperator& op, double lambda);

void fit_count_laws(CountCurve& curve, double r);

struct HbarRow {
  double hbar = 0.0;
  double R = 0.0;
  int M = 0;
  double lambda0 = 0.0, lambda0_error = 0.0;
  double gap = 0.0, gap_error = 0.0;
  double ratio = 0.0;      // hbar^{-4/3} lambda0
  double gap_ratio = 0.0;  // hbar^{-4/3} gap
  bool converged = false;
};

struct HbarScaling {
  std::vector<HbarRow> rows;
  double ratio_spread = 0.0;      // max / min
  double gap_ratio_spread = 0.0;  // max / min
};

/// For each hbar, Richardson-converged levels of -hbar^2 Delta + V with the box rescaled
/// by hbar^{1/3} and rounded outward to a multiple of 0.25.
HbarScaling hbar_scaling(const ModelSpec& base, const std::vector<double>& hbars, int jobs = 1);

struct SublevelSpec {
  double quartic = 1.0;
  double abs1 = 1.0;
  double abs2 = 1.0;
  bool phase_space = false;  // integrate pi (Lambda - V)_+ instead of the indicator
};

/// Vol{q : quartic q1^2 q2^2 + abs1 |q1| + abs2 |q2| <= Lambda}, or the phase-space volume
/// of {|p|^2 + V <= Lambda}. Throws QuadratureFail when the error estimate exceeds 1e-9
/// relative.
double sublevel_volume(double lambda, const SublevelSpec& spec = {});

}  // namespace qsel
