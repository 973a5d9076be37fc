#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qsel {

/// Piecewise-constant density on n^m equal cells of [0,1]^m (m = 1 or 2); axis 0 is the
/// slowest index. values are cell averages.
struct DensityGrid {
  int m = 1;
  int n = 0;
  std::vector<double> values;

  double cell_volume() const;
  double total_mass() const;
  /// Integral over the box prod [lo_k, hi_k], exact for the piecewise-constant density.
  double integrate(const double* lo, const double* hi) const;
  /// Marginal along `axis`: mass of each of the n slabs.
  std::vector<double> marginal(int axis) const;

  static DensityGrid uniform(int m, int n);
  /// Gaussian bump of the given width plus a small floor so the density stays positive.
  static DensityGrid spike(int m, int n, const std::vector<double>& center, double width);
  /// Mass concentrated within `width` of the diagonal x0 = x1 (m = 2) or of x = 1/2 (m = 1).
  static DensityGrid strip(int m, int n, double width);
  /// Random mixture of bumps on a positive background.
  static DensityGrid random(int m, int n, std::uint64_t seed);
};

/// Throws InvalidInput unless values are finite, nonnegative and the mass is positive.
void validate_density(const DensityGrid& f);

struct MarginalSelection {
  std::vector<double> centers;  // one per cell [l/L, (l+1)/L]
  std::vector<double> ratios;   // mass of the chosen subinterval / mass of its cell (0 if empty)
  std::vector<long> slots;      // chosen subinterval index j, covering [j, j + 1] / (L / t')
};

/// For each of the L cells, the centre of the lightest of the 1/t' aligned subintervals of
/// length t'/L; its mass is at most t' times the cell mass. g holds slab masses on a uniform
/// grid of [0,1]. Throws ResolutionTooCoarse if t'/L is below the grid spacing and
/// InvalidInput unless 1/t' is an integer.
MarginalSelection marginal_select(const std::vector<double>& g, int L, double t_prime);

/// Axis-aligned box, open except where flagged closed (only allowed at 0 and 1). Empty flag
/// vectors mean: closed exactly where the end lies on the boundary of [0,1].
struct Box {
  std::vector<double> lo, hi;
  std::vector<bool> lo_closed, hi_closed;
  std::vector<int> index;  // position in the product construction

  bool closed_lo(int k) const { return lo_closed.empty() ? lo[k] <= 0.0 : bool(lo_closed[k]); }
  bool closed_hi(int k) const { return hi_closed.empty() ? hi[k] >= 1.0 : bool(hi_closed[k]); }
};

struct BoxCover {
  int m = 1;
  double a = 0.0, t = 0.0;
  int L = 0;
  double t_prime = 0.0;
  std::vector<Box> boxes;
  std::vector<std::vector<double>> centers;  // per axis
};

/// L = ceil(2 sqrt(m) / a) and t' the largest inverse integer <= min(t a L / 2, 4 t / p_m)
/// with p_1 = 1, p_2 = 3: a point in k overlap strips lies in C(2^k, 2) <= p_m k box pairs,
/// so the pairwise overlap mass is at most p_m m t' <= 4 m t times the total. Throws
/// ParamOutOfRange unless 0 < a <= 1/4 and 0 < t < 1.
BoxCover cut_cover(const DensityGrid& f, double a, double t);

struct CoverReport {
  bool covers = false;
  bool diameters_ok = false;
  bool separation_ok = false;
  bool overlap_ok = false;
  bool neighbors_only = false;  // intersecting boxes differ by at most 1 in every index
  bool centers_covered = false;

  double max_diameter = 0.0;
  double min_separation = 0.0;   // min over boxes of dist(Y \ U_j, Y \ union_{i != j} U_i)
  double separation_target = 0.0;  // t' / L
  double separation_over_ta = 0.0;
  double overlap_mass = 0.0;     // sum over unordered pairs of the mass of U_i cap U_j
  double overlap_ratio = 0.0;    // overlap_mass / total mass
  double overlap_bound = 0.0;    // 4 m t
  std::size_t boxes = 0;

  bool all() const { return covers && diameters_ok && separation_ok && overlap_ok; }
};

/// Recomputes coverage, diameters, separations and overlap mass from the box list alone.
/// Coverage and separations are exact for axis-aligned boxes.
CoverReport verify_cover(const BoxCover& cover, const DensityGrid& f, double a, double t);

}  // namespace qsel
