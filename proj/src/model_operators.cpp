#include "qsel/model_operators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "qsel/error.hpp"
#include "qsel/parallel.hpp"

namespace qsel {

double ModelSpec::potential(double q1, double q2) const {
  double v = harmonic(0) * q1 * q1 + absolute(0) * std::abs(q1) + linear(0) * q1;
  if (dim == 2)
    v += quartic * q1 * q1 * q2 * q2 + harmonic(1) * q2 * q2 + absolute(1) * std::abs(q2) +
         linear(1) * q2;
  return v;
}

ModelSpec harmonic_spec(int dim) {
  ModelSpec s;
  s.dim = dim;
  s.quartic = 0.0;
  s.harmonic = Eigen::Vector2d(1.0, dim == 2 ? 1.0 : 0.0);
  return s;
}

ModelSpec crossing_spec() { return ModelSpec{}; }

ModelSpec crossing_abs_spec() {
  ModelSpec s;
  s.absolute = Eigen::Vector2d(1.0, 1.0);
  return s;
}

ModelSpec airy_spec() {
  ModelSpec s;
  s.dim = 1;
  s.quartic = 0.0;
  s.absolute = Eigen::Vector2d(1.0, 0.0);
  s.R = 16.0;
  s.M = 1599;
  return s;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::ModelInvalid, what); }

// Ground energy of -a d^2 + f on (-L, L) with spacing h.
double frozen_ground(double a, const std::function<double(double)>& f, double L, double h) {
  const int n = static_cast<int>(std::lround(2.0 * L / h)) - 1;
  const double hh = 2.0 * L / (n + 1);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    const double q = -L + (i + 1) * hh;
    t.emplace_back(i, i, 2.0 * a / (hh * hh) + f(q));
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -a / (hh * hh));
      t.emplace_back(i + 1, i, -a / (hh * hh));
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return banded_lowest(m, 1).values(0);
}

}  // namespace

void validate_model(const ModelSpec& s) {
  if (s.dim != 1 && s.dim != 2) invalid("dim must be 1 or 2");
  if (!(s.R > 0.0) || s.M < 3) invalid("box needs R > 0 and M >= 3");
  if (!(s.hbar > 0.0)) invalid("hbar must be positive");
  if (std::abs(s.kinetic(0, 1) - s.kinetic(1, 0)) > 1e-14) invalid("Q must be symmetric");
  const Eigen::Matrix2d q =
      s.dim == 2 ? s.kinetic : Eigen::Matrix2d(Eigen::Vector2d(s.kinetic(0, 0), 1.0).asDiagonal());
  if (Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(q).eigenvalues()(0) <= 0.0)
    invalid("Q must be positive definite");
  if (s.quartic < 0.0) invalid("quartic coefficient must be nonnegative");
  if ((s.harmonic.array() < 0.0).any() || (s.absolute.array() < 0.0).any())
    invalid("harmonic and |q| coefficients must be nonnegative");

  // Frozen-variable operators: a linear form that is not dominated makes the 1D ground
  // energy fall roughly linearly with the box size.
  constexpr double kBox = 20.0, kStep = 0.1;
  const double frozen[] = {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0};
  const int axes = s.dim;
  for (int axis = 0; axis < axes; ++axis) {
    for (double t : frozen) {
      if (s.dim == 1 && t != 0.0) break;
      auto f = [&](double x) {
        return axis == 0 ? s.potential(x, t) : s.potential(t, x);
      };
      const double a = s.hbar * s.hbar * s.kinetic(axis, axis);
      const double g1 = frozen_ground(a, f, kBox, kStep);
      const double g2 = frozen_ground(a, f, 2.0 * kBox, kStep);
      if (g1 - g2 > 0.05 * (1.0 + std::abs(g1)))
        invalid("frozen-variable operator along q" + std::to_string(axis + 1) + " at q" +
                std::to_string(2 - axis) + " = " + std::to_string(t) +
                " is not bounded below (linear term dominates)");
    }
  }
}

long DiscretizedOperator::unknown_at(int i1, int i2) const {
  if (dim == 1) {
    if (i1 < row_begin[0] || i1 >= row_end[0]) return -1;
    return i1 - row_begin[0];
  }
  if (i1 < 0 || i1 >= M || i2 < row_begin[i1] || i2 >= row_end[i1]) return -1;
  return row_offset[i1] + (i2 - row_begin[i1]);
}

DiscretizedOperator build(const ModelSpec& spec) {
  validate_model(spec);
  DiscretizedOperator op;
  op.dim = spec.dim;
  op.M = spec.M;
  op.R = spec.R;
  op.h = spec.spacing();
  op.hbar = spec.hbar;
  const int M = spec.M;
  const double h = op.h;
  auto coord = [&](int i) { return -spec.R + (i + 1) * h; };
  auto active = [&](double v) { return v <= spec.v_cut; };

  // Each term of V is convex in each variable, so every masked row is an interval.
  const int rows = spec.dim == 2 ? M : 1;
  op.row_begin.assign(rows, 0);
  op.row_end.assign(rows, 0);
  op.row_offset.assign(rows, 0);
  long n = 0;
  for (int r = 0; r < rows; ++r) {
    auto v_at = [&](int j) {
      return spec.dim == 2 ? spec.potential(coord(r), coord(j)) : spec.potential(coord(j));
    };
    // Integer ternary search for the row minimum, then binary search for both ends.
    int lo = 0, hi = M - 1;
    while (hi - lo > 2) {
      const int m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (v_at(m1) <= v_at(m2)) hi = m2; else lo = m1;
    }
    int jmin = lo;
    for (int j = lo + 1; j <= hi; ++j)
      if (v_at(j) < v_at(jmin)) jmin = j;
    int b = 0, e = 0;
    if (active(v_at(jmin))) {
      int a = 0, z = jmin;  // first active index in [0, jmin]
      while (a < z) {
        const int m = (a + z) / 2;
        if (active(v_at(m))) z = m; else a = m + 1;
      }
      b = a;
      a = jmin, z = M - 1;  // last active index in [jmin, M)
      while (a < z) {
        const int m = (a + z + 1) / 2;
        if (active(v_at(m))) a = m; else z = m - 1;
      }
      e = a + 1;
    }
    op.row_begin[r] = b;
    op.row_end[r] = e;
    op.row_offset[r] = n;
    n += e - b;
    if (n > kMaxGridUnknowns)
      throw Error(ErrorKind::GridTooLarge,
                  "grid exceeds " + std::to_string(kMaxGridUnknowns) + " unknowns");
  }
  if (n == 0) throw Error(ErrorKind::GridTooLarge, "no grid point below v_cut");

  const double hb2 = spec.hbar * spec.hbar / (h * h);
  const Eigen::Matrix2d& Q = spec.kinetic;
  op.kinetic_min = spec.dim == 2
                       ? Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(Q).eigenvalues()(0)
                       : Q(0, 0);
  op.coords.resize(n, spec.dim);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(n) * (spec.dim == 2 ? (Q(0, 1) != 0.0 ? 9 : 5) : 3));
  double vmin = std::numeric_limits<double>::infinity();
  if (spec.dim == 1) {
    for (int i = op.row_begin[0]; i < op.row_end[0]; ++i) {
      const long u = op.unknown_at(i);
      const double v = spec.potential(coord(i));
      vmin = std::min(vmin, v);
      op.coords(u, 0) = coord(i);
      trip.emplace_back(u, u, v + 2.0 * hb2 * Q(0, 0));
      const long w = op.unknown_at(i + 1);
      if (w >= 0) {
        trip.emplace_back(u, w, -hb2 * Q(0, 0));
        trip.emplace_back(w, u, -hb2 * Q(0, 0));
      }
    }
  } else {
    for (int i = 0; i < M; ++i) {
      for (int j = op.row_begin[i]; j < op.row_end[i]; ++j) {
        const long u = op.unknown_at(i, j);
        const double v = spec.potential(coord(i), coord(j));
        vmin = std::min(vmin, v);
        op.coords(u, 0) = coord(i);
        op.coords(u, 1) = coord(j);
        trip.emplace_back(u, u, v + 2.0 * hb2 * (Q(0, 0) + Q(1, 1)));
        auto link = [&](int di, int dj, double c) {
          const long w = op.unknown_at(i + di, j + dj);
          if (w >= 0) trip.emplace_back(u, w, c);
        };
        link(1, 0, -hb2 * Q(0, 0));
        link(-1, 0, -hb2 * Q(0, 0));
        link(0, 1, -hb2 * Q(1, 1));
        link(0, -1, -hb2 * Q(1, 1));
        if (Q(0, 1) != 0.0) {
          const double c = 0.5 * hb2 * Q(0, 1);
          link(1, 1, -c);
          link(-1, -1, -c);
          link(1, -1, c);
          link(-1, 1, c);
        }
      }
    }
  }
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.v_min = vmin;

  // inf V over R^dim: each term is bounded below, and only |q| and linear terms can be
  // negative, along lines where the quartic vanishes.
  double inf_v = 0.0;
  for (int a = 0; a < spec.dim; ++a) {
    const double c = spec.harmonic(a), l = spec.linear(a), b = spec.absolute(a);
    if (c > 0.0) {
      // min over q of c q^2 + b |q| + l q
      const double slope = std::max(0.0, std::abs(l) - b);
      inf_v -= slope * slope / (4.0 * c);
    } else if (std::abs(l) > b) {
      inf_v = -std::numeric_limits<double>::infinity();
    }
  }
  op.offset = std::isfinite(inf_v) ? std::max(0.0, -inf_v) : std::max(0.0, -vmin);
  return op;
}

namespace {

EigenPairs solve_lowest(const DiscretizedOperator& op, int k) {
  const long n = op.matrix.rows();
  if (n <= SolverOptions{}.dense_limit || op.dim == 1) return lowest_eigenpairs(op.matrix, k);
  return shift_invert_lowest(op.matrix, k, op.v_min - 1.0);
}

}  // namespace

GroundState ground_and_gap(const DiscretizedOperator& op) {
  if (op.matrix.rows() < 2) throw Error(ErrorKind::InvalidInput, "grid has fewer than 2 points");
  EigenPairs p = solve_lowest(op, 2);
  if (p.values.size() < 2) throw Error(ErrorKind::NoConvergence, "fewer than two eigenpairs");
  const double tol = 1e-8 * std::max(1.0, norm_bound(op.matrix));
  if (p.residuals.maxCoeff() > tol)
    throw Error(ErrorKind::NoConvergence, "ground residual " + std::to_string(p.residuals(0)));
  GroundState g;
  g.lambda0 = p.values(0);
  g.gap = p.values(1) - p.values(0);
  g.residuals = p.residuals;
  g.vector = p.vectors.col(0).normalized();
  Eigen::Index imax;
  g.vector.cwiseAbs().maxCoeff(&imax);
  if (g.vector(imax) < 0.0) g.vector = -g.vector;
  const double cut = 1e-8 * g.vector(imax);
  g.perron = (g.vector.array() > -cut).all();
  return g;
}

Eigen::VectorXd lowest_levels(const DiscretizedOperator& op, int k) {
  EigenPairs p = solve_lowest(op, k);
  const double tol = 1e-8 * std::max(1.0, norm_bound(op.matrix));
  if (p.values.size() < k || p.residuals.maxCoeff() > tol)
    throw Error(ErrorKind::NoConvergence, "levels did not converge");
  return p.values;
}

ConvergedLevels converged_levels(const ModelSpec& spec, int k, double tol) {
  ModelSpec fine = spec;
  fine.M = 2 * spec.M + 1;
  ModelSpec box = spec;
  box.R = 1.5 * spec.R;
  box.M = static_cast<int>(std::lround(1.5 * (spec.M + 1))) - 1;
  ConvergedLevels c;
  c.coarse = lowest_levels(build(spec), k);
  c.fine = lowest_levels(build(fine), k);
  c.box = lowest_levels(build(box), k);
  c.value = c.fine + (c.fine - c.coarse) / 3.0;
  c.error = (c.fine - c.coarse).cwiseAbs() / 3.0;
  c.delta_refine = ((c.fine - c.coarse).array() / c.coarse.array().abs()).abs().matrix();
  c.delta_box = ((c.box - c.coarse).array() / c.coarse.array().abs()).abs().matrix();
  c.converged = c.delta_refine.maxCoeff() < tol && c.delta_box.maxCoeff() < tol;
  return c;
}

ModelSpec auto_box(ModelSpec spec, double threshold) {
  const double h = spec.spacing();
  for (;;) {
    const DiscretizedOperator op = build(spec);
    const GroundState g = ground_and_gap(op);
    double edge = 0.0;
    const double peak = g.vector.cwiseAbs().maxCoeff();
    for (long u = 0; u < op.coords.rows(); ++u) {
      const double r = op.coords.row(u).cwiseAbs().maxCoeff();
      if (r > spec.R - 1.5 * h) edge = std::max(edge, std::abs(g.vector(u)));
    }
    if (edge <= threshold * peak) return spec;
    spec.R *= 1.25;
    spec.M = static_cast<int>(std::lround(2.0 * spec.R / h)) - 1;
  }
}

AgmonFit agmon_fit(const DiscretizedOperator& op, const Eigen::VectorXd& ground) {
  const double dr = 2.0 * op.h;
  const int shells = static_cast<int>(op.R / dr) + 1;
  std::vector<double> env(shells, 0.0), at(shells, 0.0);
  for (long u = 0; u < op.coords.rows(); ++u) {
    const double r = op.coords.row(u).norm();
    if (r > op.R) continue;  // only complete circles
    const int s = static_cast<int>(r / dr);
    const double a = std::abs(ground(u));
    if (a > env[s]) {
      env[s] = a;
      at[s] = r;
    }
  }
  const double peak = *std::max_element(env.begin(), env.end());
  bool decayed = false;
  std::vector<double> rs, ys;
  for (int s = 0; s < shells; ++s) {
    if (env[s] == 0.0) continue;
    const double rel = env[s] / peak;
    if (at[s] <= 0.9 * op.R && rel < 1e-10) decayed = true;
    if (rel >= 1e-9 && rel <= 1e-3 && at[s] > 0.0) {
      rs.push_back(at[s]);
      ys.push_back(-std::log(rel));
    }
  }
  if (!decayed)
    throw Error(ErrorKind::WindowEmpty, "ground state not below 1e-10 inside 0.9 R; enlarge box");
  if (rs.size() < 5) throw Error(ErrorKind::WindowEmpty, "fewer than five shells in window");

  const int n = static_cast<int>(rs.size());
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  auto fit_at = [&](double s) {
    Eigen::MatrixXd x(n, 3);
    for (int i = 0; i < n; ++i) x.row(i) << std::pow(rs[i], s), std::log(rs[i]), 1.0;
    return least_squares_fit(x, y);
  };
  // Coarse scan, then Brent on the bracket.
  double best_s = 0.5, best = std::numeric_limits<double>::infinity();
  for (double s = 0.5; s <= 4.0 + 1e-12; s += 0.05) {
    const double rss = fit_at(s).rss;
    if (rss < best) {
      best = rss;
      best_s = s;
    }
  }
  const auto [s_opt, rss_opt] = boost::math::tools::brent_find_minima(
      [&](double s) { return fit_at(s).rss; }, std::max(0.5, best_s - 0.05), best_s + 0.05, 40);
  (void)rss_opt;
  const LinearFit f = fit_at(s_opt);
  AgmonFit out;
  out.exponent = s_opt;
  out.rate = f.coef(0);
  out.log_coef = f.coef(1);
  out.constant = f.coef(2);
  out.r2 = f.r2;
  out.shells = n;
  out.r_lo = rs.front();
  out.r_hi = rs.back();
  return out;
}

long dense_count(const DiscretizedOperator& op, double lambda) {
  if (op.matrix.rows() > 4000) throw Error(ErrorKind::DimensionCap, "dense count limited to 4000");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(op.matrix),
                                                    Eigen::EigenvaluesOnly);
  return static_cast<long>((es.eigenvalues().array() < lambda).count());
}

void fit_count_laws(CountCurve& c, double r) {
  const int n = static_cast<int>(c.lambda.size());
  if (n < 3) throw Error(ErrorKind::WindowEmpty, "need at least three Lambda values");
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n), ones = Eigen::VectorXd::Ones(n);
  std::vector<double> lam(c.lambda), cnt(n);
  for (int i = 0; i < n; ++i) {
    if (c.count[i] <= 0) throw Error(ErrorKind::WindowEmpty, "zero count in window");
    x.row(i) << 1.0, std::log(c.lambda[i]);
    y(i) = c.count[i] / std::pow(c.lambda[i], 1.5 * r);
    cnt[i] = static_cast<double>(c.count[i]);
  }
  c.log_model = least_squares_fit(x, y);
  const LinearFit constant = least_squares_fit(ones, y);
  c.f_test_p = f_test_pvalue(constant.rss, constant.dof, c.log_model.rss, c.log_model.dof);
  c.power_model = power_law_fit(lam, cnt);
  c.rss_log_model_logspace = 0.0;
  c.rss_power_model_logspace = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pred_log = std::pow(c.lambda[i], 1.5 * r) *
                            (c.log_model.coef(0) + c.log_model.coef(1) * std::log(c.lambda[i]));
    const double pred_pow =
        c.power_model.prefactor * std::pow(c.lambda[i], c.power_model.exponent);
    const double lc = std::log(cnt[i]);
    c.rss_log_model_logspace += pred_log > 0.0 ? std::pow(lc - std::log(pred_log), 2)
                                               : std::numeric_limits<double>::infinity();
    c.rss_power_model_logspace += std::pow(lc - std::log(pred_pow), 2);
  }
  c.log_beats_power =
      c.f_test_p < 0.01 && c.rss_log_model_logspace < c.rss_power_model_logspace;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += cnt[i] / std::pow(c.lambda[i], r);
  mean /= n;
  double spread = 0.0;
  for (int i = 0; i < n; ++i)
    spread = std::max(spread, std::abs(cnt[i] / std::pow(c.lambda[i], r) / mean - 1.0));
  c.ratio_mean = mean;
  c.ratio_spread = spread;
}

CountCurve weyl_count(const DiscretizedOperator& op, const std::vector<double>& lambdas, double r,
                      int jobs) {
  if (lambdas.empty()) throw Error(ErrorKind::WindowEmpty, "empty Lambda grid");
  CountCurve c;
  c.h = op.h;
  c.reliability_bound = 0.25 * std::pow(M_PI / op.h, 2) * op.hbar * op.hbar * op.kinetic_min;
  c.lambda = lambdas;
  std::sort(c.lambda.begin(), c.lambda.end());
  if (c.lambda.back() > c.reliability_bound)
    throw Error(ErrorKind::UnreliableWindow,
                "Lambda_max " + std::to_string(c.lambda.back()) + " above grid bound " +
                    std::to_string(c.reliability_bound));
  c.count.assign(c.lambda.size(), 0);
  parallel_for(static_cast<int>(c.lambda.size()), jobs,
               [&](int i) { c.count[i] = count_below(op.matrix, c.lambda[i]); });
  for (size_t i = 1; i < c.count.size(); ++i)
    if (c.count[i] < c.count[i - 1])
      throw Error(ErrorKind::NoConvergence, "count not monotone in Lambda");
  if (c.lambda.size() >= 3) fit_count_laws(c, r);
  return c;
}

HbarScaling hbar_scaling(const ModelSpec& base, const std::vector<double>& hbars, int jobs) {
  HbarScaling out;
  out.rows.resize(hbars.size());
  parallel_for(static_cast<int>(hbars.size()), jobs, [&](int i) {
    const double hb = hbars[i];
    if (!(hb > 0.0)) throw Error(ErrorKind::InvalidInput, "hbar must be positive");
    ModelSpec s = base;
    s.hbar = hb;
    s.R = std::ceil(base.R * std::cbrt(hb) / 0.25) * 0.25;
    const ConvergedLevels c = converged_levels(s, 2);
    HbarRow& row = out.rows[i];
    row.hbar = hb;
    row.R = s.R;
    row.M = s.M;
    row.lambda0 = c.value(0);
    row.lambda0_error = c.error(0);
    row.gap = c.value(1) - c.value(0);
    row.gap_error = std::abs((c.fine(1) - c.fine(0)) - (c.coarse(1) - c.coarse(0))) / 3.0;
    const double scale = std::pow(hb, -4.0 / 3.0);
    row.ratio = scale * row.lambda0;
    row.gap_ratio = scale * row.gap;
    row.converged = c.converged;
  });
  auto spread = [&](auto get) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : out.rows) {
      lo = std::min(lo, get(r));
      hi = std::max(hi, get(r));
    }
    return hi / lo;
  };
  if (!out.rows.empty()) {
    out.ratio_spread = spread([](const HbarRow& r) { return r.ratio; });
    out.gap_ratio_spread = spread([](const HbarRow& r) { return r.gap_ratio; });
  }
  return out;
}

double sublevel_volume(double lambda, const SublevelSpec& s) {
  if (!(lambda > 0.0) || !(s.quartic > 0.0) || !(s.abs1 > 0.0) || s.abs2 < 0.0)
    throw Error(ErrorKind::InvalidInput, "need Lambda > 0, quartic > 0, abs1 > 0, abs2 >= 0");
  // Quadrant q1, q2 >= 0. For fixed q1 the q2-section is [0, b] with
  // quartic q1^2 b^2 + abs2 b = A, A = Lambda - abs1 q1.
  auto section = [&](double q1, double& a, double& b) {
    a = lambda - s.abs1 * q1;
    if (a <= 0.0) {
      b = 0.0;
      return;
    }
    b = 2.0 * a / (s.abs2 + std::sqrt(s.abs2 * s.abs2 + 4.0 * s.quartic * q1 * q1 * a));
  };
  auto integrand = [&](double q1) {
    double a, b;
    section(q1, a, b);
    if (!s.phase_space) return b;
    return M_PI * (a * b - s.quartic * q1 * q1 * b * b * b / 3.0 - 0.5 * s.abs2 * b * b);
  };
  // The section changes character near q1 ~ Lambda^{-1/2}; split geometrically.
  const double top = lambda / s.abs1;
  std::vector<double> cuts{0.0};
  for (double x = 1e-6 * std::min(1.0, top); x < top; x *= 4.0) cuts.push_back(x);
  cuts.push_back(top);
  struct Workspace {
    gsl_integration_workspace* w = gsl_integration_workspace_alloc(200);
    ~Workspace() { gsl_integration_workspace_free(w); }
  } ws;
  using Integrand = decltype(integrand);
  gsl_function fn;
  fn.function = [](double x, void* p) { return (*static_cast<Integrand*>(p))(x); };
  fn.params = &integrand;
  gsl_error_handler_t* old_handler = gsl_set_error_handler_off();
  double total = 0.0, err_total = 0.0;
  int status = GSL_SUCCESS;
  for (size_t i = 0; i + 1 < cuts.size() && status == GSL_SUCCESS; ++i) {
    double part = 0.0, err = 0.0;
    status = gsl_integration_qag(&fn, cuts[i], cuts[i + 1], 0.0, 1e-12, 200, GSL_INTEG_GAUSS61,
                                 ws.w, &part, &err);
    if (!std::isfinite(part)) status = GSL_EFAILED;
    total += part;
    err_total += err;
  }
  gsl_set_error_handler(old_handler);
  if (status != GSL_SUCCESS && status != GSL_EROUND)
    throw Error(ErrorKind::QuadratureFail, std::string("integration failed: ") + gsl_strerror(status));
  if (!(err_total <= 1e-9 * std::abs(total)))
    throw Error(ErrorKind::QuadratureFail,
                "error estimate " + std::to_string(err_total) + " above tolerance");
  return 4.0 * total;
}

}  // namespace qsel
