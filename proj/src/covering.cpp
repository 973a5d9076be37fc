#include "qsel/covering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <functional>
#include <random>
#include <tuple>

#include "qsel/error.hpp"

namespace qsel {

namespace {

// Prefix sums of cell masses; F(x) (and F(x, y)) interpolate them (bi)linearly, which is
// exact for a piecewise-constant density.
class MassTable {
 public:
  explicit MassTable(const DensityGrid& f) : m_(f.m), n_(f.n) {
    const double w = f.cell_volume();
    if (m_ == 1) {
      p_.assign(n_ + 1, 0.0);
      for (int i = 0; i < n_; ++i) p_[i + 1] = p_[i] + w * f.values[i];
    } else {
      p_.assign(static_cast<size_t>(n_ + 1) * (n_ + 1), 0.0);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          at(i + 1, j + 1) = at(i, j + 1) + at(i + 1, j) - at(i, j) +
                             w * f.values[static_cast<size_t>(i) * n_ + j];
    }
  }

  double box(const double* lo, const double* hi) const {
    if (m_ == 1) return cum1(std::min(hi[0], 1.0)) - cum1(std::max(lo[0], 0.0));
    const double x0 = std::max(lo[0], 0.0), x1 = std::min(hi[0], 1.0);
    const double y0 = std::max(lo[1], 0.0), y1 = std::min(hi[1], 1.0);
    if (x1 <= x0 || y1 <= y0) return 0.0;
    return cum2(x1, y1) - cum2(x0, y1) - cum2(x1, y0) + cum2(x0, y0);
  }

 private:
  double& at(int i, int j) { return p_[static_cast<size_t>(i) * (n_ + 1) + j]; }
  double at(int i, int j) const { return p_[static_cast<size_t>(i) * (n_ + 1) + j]; }

  void locate(double x, int& i, double& frac) const {
    const double s = std::clamp(x, 0.0, 1.0) * n_;
    i = std::min(static_cast<int>(s), n_ - 1);
    frac = s - i;
  }
  double cum1(double x) const {
    int i;
    double fr;
    locate(x, i, fr);
    return p_[i] + fr * (p_[i + 1] - p_[i]);
  }
  double cum2(double x, double y) const {
    int i, j;
    double fx, fy;
    locate(x, i, fx);
    locate(y, j, fy);
    return (1 - fx) * (1 - fy) * at(i, j) + fx * (1 - fy) * at(i + 1, j) +
           (1 - fx) * fy * at(i, j + 1) + fx * fy * at(i + 1, j + 1);
  }

  int m_, n_;
  std::vector<double> p_;
};

double cells(const DensityGrid& f) { return f.m == 1 ? f.n : static_cast<double>(f.n) * f.n; }

DensityGrid sample(int m, int n, const std::function<double(double, double)>& fn) {
  DensityGrid f;
  f.m = m;
  f.n = n;
  f.values.resize(static_cast<size_t>(cells(f)));
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    if (m == 1) {
      f.values[i] = fn(x, 0.0);
      continue;
    }
    for (int j = 0; j < n; ++j) f.values[static_cast<size_t>(i) * n + j] = fn(x, (j + 0.5) / n);
  }
  return f;
}

}  // namespace

double DensityGrid::cell_volume() const { return 1.0 / cells(*this); }

double DensityGrid::total_mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_volume();
}

double DensityGrid::integrate(const double* lo, const double* hi) const {
  return MassTable(*this).box(lo, hi);
}

std::vector<double> DensityGrid::marginal(int axis) const {
  std::vector<double> g(n, 0.0);
  const double w = cell_volume();
  if (m == 1) {
    for (int i = 0; i < n; ++i) g[i] = w * values[i];
    return g;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g[axis == 0 ? i : j] += w * values[static_cast<size_t>(i) * n + j];
  return g;
}

DensityGrid DensityGrid::uniform(int m, int n) {
  return sample(m, n, [](double, double) { return 1.0; });
}

DensityGrid DensityGrid::spike(int m, int n, const std::vector<double>& c, double width) {
  return sample(m, n, [&](double x, double y) {
    double r2 = (x - c[0]) * (x - c[0]);
    if (m == 2) r2 += (y - c[1]) * (y - c[1]);
    return 1e-6 + std::exp(-0.5 * r2 / (width * width));
  });
}

DensityGrid DensityGrid::strip(int m, int n, double width) {
  return sample(m, n, [&](double x, double y) {
    const double d = m == 2 ? (x - y) / std::sqrt(2.0) : x - 0.5;
    return std::abs(d) <= width ? 1.0 : 1e-6;
  });
}

DensityGrid DensityGrid::random(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int bumps = 1 + static_cast<int>(u(rng) * 4);
  struct Bump {
    double cx, cy, sx, sy, w;
  };
  std::vector<Bump> b(bumps);
  for (auto& k : b)
    k = {u(rng), u(rng), 0.01 + 0.2 * u(rng), 0.01 + 0.2 * u(rng), 0.1 + u(rng)};
  const double floor = 1e-3 + 0.2 * u(rng);
  return sample(m, n, [&](double x, double y) {
    double v = floor;
    for (const auto& k : b) {
      double e = (x - k.cx) * (x - k.cx) / (2 * k.sx * k.sx);
      if (m == 2) e += (y - k.cy) * (y - k.cy) / (2 * k.sy * k.sy);
      v += k.w * std::exp(-e);
    }
    return v;
  });
}

void validate_density(const DensityGrid& f) {
  if ((f.m != 1 && f.m != 2) || f.n < 1 ||
      f.values.size() != static_cast<size_t>(cells(f)))
    throw Error(ErrorKind::InvalidInput, "density grid must be n^m values with m in {1, 2}");
  for (double v : f.values)
    if (!std::isfinite(v) || v < 0.0)
      throw Error(ErrorKind::InvalidInput, "density values must be finite and nonnegative");
  if (!(f.total_mass() > 0.0)) throw Error(ErrorKind::InvalidInput, "density has zero mass");
}

MarginalSelection marginal_select(const std::vector<double>& g, int L, double t_prime) {
  if (L < 1 || g.empty()) throw Error(ErrorKind::InvalidInput, "need L >= 1 and a nonempty g");
  if (!(t_prime > 0.0 && t_prime <= 1.0))
    throw Error(ErrorKind::InvalidInput, "t' must lie in (0, 1]");
  const double kd = 1.0 / t_prime;
  const int K = static_cast<int>(std::lround(kd));
  if (std::abs(kd - K) > 1e-9 * kd) throw Error(ErrorKind::InvalidInput, "1/t' is not an integer");
  const int n = static_cast<int>(g.size());
  if (static_cast<long>(L) * K > n)
    throw Error(ErrorKind::ResolutionTooCoarse,
                "subinterval length t'/L = 1/" + std::to_string(static_cast<long>(L) * K) +
                    " is finer than the grid spacing 1/" + std::to_string(n));
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + g[i];
  auto mass_to = [&](double x) {
    const double s = std::clamp(x, 0.0, 1.0) * n;
    const int i = std::min(static_cast<int>(s), n - 1);
    return cum[i] + (s - i) * g[i];
  };
  MarginalSelection out;
  out.centers.resize(L);
  out.ratios.resize(L);
  out.slots.resize(L);
  for (int l = 0; l < L; ++l) {
    const double cell_lo = static_cast<double>(l) / L;
    const double cell = mass_to(static_cast<double>(l + 1) / L) - mass_to(cell_lo);
    int best = 0;
    double best_mass = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K; ++i) {
      const double a = cell_lo + static_cast<double>(i) / (static_cast<double>(L) * K);
      const double b = cell_lo + static_cast<double>(i + 1) / (static_cast<double>(L) * K);
      const double mass = mass_to(b) - mass_to(a);
      if (mass < best_mass) {
        best_mass = mass;
        best = i;
      }
    }
    out.slots[l] = static_cast<long>(l) * K + best;
    out.centers[l] = (out.slots[l] + 0.5) / (static_cast<double>(L) * K);
    out.ratios[l] = cell > 0.0 ? best_mass / cell : 0.0;
  }
  return out;
}

BoxCover cut_cover(const DensityGrid& f, double a, double t) {
  validate_density(f);
  if (!(a > 0.0 && a <= 0.25)) throw Error(ErrorKind::ParamOutOfRange, "need 0 < a <= 1/4");
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::ParamOutOfRange, "need 0 < t < 1");
  BoxCover c;
  c.m = f.m;
  c.a = a;
  c.t = t;
  c.L = static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(f.m)) / a));
  const double pairs_per_strip = f.m == 1 ? 1.0 : 3.0;
  const double target = std::min(t * a * c.L / 2.0, 4.0 * t / pairs_per_strip);
  c.t_prime = 1.0 / std::max(1.0, std::ceil(1.0 / target - 1e-12));
  const int L = c.L;
  const double denom = static_cast<double>(L) * std::lround(1.0 / c.t_prime);

  // Per axis, intervals V_0 .. V_L from the L selected subintervals. Edges are slot
  // boundaries j / (L K), so abutting subintervals give exactly equal edges.
  std::vector<std::vector<std::pair<double, double>>> v(f.m);
  for (int k = 0; k < f.m; ++k) {
    const MarginalSelection sel = marginal_select(f.marginal(k), L, c.t_prime);
    c.centers.push_back(sel.centers);
    const auto& s = sel.slots;
    v[k].emplace_back(0.0, (s[0] + 1) / denom);
    for (int l = 1; l < L; ++l) v[k].emplace_back(s[l - 1] / denom, (s[l] + 1) / denom);
    v[k].emplace_back(s[L - 1] / denom, 1.0);
  }
  const int per = L + 1;
  const int count = f.m == 1 ? per : per * per;
  c.boxes.reserve(count);
  for (int idx = 0; idx < count; ++idx) {
    Box b;
    const int i0 = f.m == 1 ? idx : idx / per;
    for (int k = 0; k < f.m; ++k) {
      const int i = k == 0 ? i0 : idx % per;
      b.index.push_back(i);
      b.lo.push_back(v[k][i].first);
      b.hi.push_back(v[k][i].second);
      b.lo_closed.push_back(i == 0);
      b.hi_closed.push_back(i == L);
    }
    c.boxes.push_back(std::move(b));
  }
  return c;
}

namespace {

// Compressed axis: even slots are the edge coordinates, odd slots the open gaps between.
struct Axis {
  std::vector<double> c;
  int slots() const { return 2 * static_cast<int>(c.size()) - 1; }
  int edge(double x) const {
    return static_cast<int>(std::lower_bound(c.begin(), c.end(), x) - c.begin());
  }
  // Slot range [first, last] covered by the interval between lo and hi.
  std::pair<int, int> range(double lo, double hi, bool lo_closed, bool hi_closed) const {
    const int a = edge(std::max(lo, 0.0)), b = edge(std::min(hi, 1.0));
    return {2 * a + (lo_closed ? 0 : 1), 2 * b - (hi_closed ? 0 : 1)};
  }
  int slot_of(double x) const {
    const int i = edge(x);
    if (i < static_cast<int>(c.size()) && c[i] == x) return 2 * i;
    return 2 * i - 1;
  }
  double slot_lo(int s) const { return c[s / 2]; }
  double slot_hi(int s) const { return c[(s + 1) / 2]; }
};

}  // namespace

CoverReport verify_cover(const BoxCover& cover, const DensityGrid& f, double a, double t) {
  CoverReport r;
  const int m = cover.m;
  r.boxes = cover.boxes.size();
  r.overlap_bound = 4.0 * m * t;
  r.separation_target = cover.L > 0 ? cover.t_prime / cover.L : t * a;
  if (cover.boxes.empty()) return r;

  std::vector<Axis> ax(m);
  for (int k = 0; k < m; ++k) {
    ax[k].c = {0.0, 1.0};
    for (const Box& b : cover.boxes) {
      if (b.lo[k] > 0.0 && b.lo[k] < 1.0) ax[k].c.push_back(b.lo[k]);
      if (b.hi[k] > 0.0 && b.hi[k] < 1.0) ax[k].c.push_back(b.hi[k]);
    }
    std::sort(ax[k].c.begin(), ax[k].c.end());
    ax[k].c.erase(std::unique(ax[k].c.begin(), ax[k].c.end()), ax[k].c.end());
  }
  const int s0 = ax[0].slots(), s1 = m == 2 ? ax[1].slots() : 1;
  auto id = [&](int i, int j) { return static_cast<size_t>(i) * s1 + j; };

  // Multiplicity of every slot via a difference array.
  std::vector<long> mult(static_cast<size_t>(s0 + 1) * (s1 + 1), 0);
  auto diff = [&](int i, int j) -> long& { return mult[static_cast<size_t>(i) * (s1 + 1) + j]; };
  std::vector<std::array<int, 4>> ranges;
  for (const Box& b : cover.boxes) {
    auto [a0, b0] = ax[0].range(b.lo[0], b.hi[0], b.closed_lo(0), b.closed_hi(0));
    int a1 = 0, b1 = 0;
    if (m == 2) std::tie(a1, b1) = ax[1].range(b.lo[1], b.hi[1], b.closed_lo(1), b.closed_hi(1));
    ranges.push_back({a0, b0, a1, b1});
    if (a0 > b0 || a1 > b1) continue;
    ++diff(a0, a1);
    --diff(b0 + 1, a1);
    --diff(a0, b1 + 1);
    ++diff(b0 + 1, b1 + 1);
  }
  std::vector<long> count(static_cast<size_t>(s0) * s1, 0);
  for (int i = 0; i < s0; ++i)
    for (int j = 0; j < s1; ++j) {
      long v = diff(i, j);
      if (i) v += count[id(i - 1, j)];
      if (j) v += count[id(i, j - 1)];
      if (i && j) v -= count[id(i - 1, j - 1)];
      count[id(i, j)] = v;
    }
  r.covers = std::all_of(count.begin(), count.end(), [](long c) { return c >= 1; });

  r.centers_covered = true;
  for (int i = 0; i < f.n && r.centers_covered; ++i) {
    const int si = ax[0].slot_of((i + 0.5) / f.n);
    for (int j = 0; j < (m == 2 ? f.n : 1); ++j) {
      const int sj = m == 2 ? ax[1].slot_of((j + 0.5) / f.n) : 0;
      if (count[id(si, sj)] < 1) {
        r.centers_covered = false;
        break;
      }
    }
  }

  r.max_diameter = 0.0;
  r.min_separation = std::numeric_limits<double>::infinity();
  for (size_t bi = 0; bi < cover.boxes.size(); ++bi) {
    const Box& b = cover.boxes[bi];
    double d2 = 0.0;
    for (int k = 0; k < m; ++k) {
      const double side = std::min(b.hi[k], 1.0) - std::max(b.lo[k], 0.0);
      d2 += side * side;
    }
    r.max_diameter = std::max(r.max_diameter, std::sqrt(d2));
    // Points of U_j in no other box, and their distance to the faces of U_j inside Y.
    const auto& rg = ranges[bi];
    for (int i = rg[0]; i <= rg[1]; ++i)
      for (int j = rg[2]; j <= rg[3]; ++j) {
        if (count[id(i, j)] != 1) continue;
        double dist = std::numeric_limits<double>::infinity();
        for (int k = 0; k < m; ++k) {
          const int s = k == 0 ? i : j;
          if (!b.closed_lo(k)) dist = std::min(dist, ax[k].slot_lo(s) - b.lo[k]);
          if (!b.closed_hi(k)) dist = std::min(dist, b.hi[k] - ax[k].slot_hi(s));
        }
        r.min_separation = std::min(r.min_separation, dist);
      }
  }
  r.diameters_ok = r.max_diameter < a;
  r.separation_ok = r.min_separation >= r.separation_target * (1.0 - 1e-9);
  r.separation_over_ta = r.min_separation / (t * a);

  const MassTable table(f);
  const double total = f.total_mass();
  r.neighbors_only = true;
  r.overlap_mass = 0.0;
  for (size_t i = 0; i < cover.boxes.size(); ++i)
    for (size_t j = i + 1; j < cover.boxes.size(); ++j) {
      const Box& p = cover.boxes[i];
      const Box& q = cover.boxes[j];
      double lo[2], hi[2];
      bool meet = true;
      for (int k = 0; k < m && meet; ++k) {
        lo[k] = std::max(p.lo[k], q.lo[k]);
        hi[k] = std::min(p.hi[k], q.hi[k]);
        meet = lo[k] < hi[k];
      }
      if (!meet) continue;
      if (p.index.size() == static_cast<size_t>(m) && q.index.size() == static_cast<size_t>(m))
        for (int k = 0; k < m; ++k)
          if (std::abs(p.index[k] - q.index[k]) > 1) r.neighbors_only = false;
      r.overlap_mass += table.box(lo, hi);
    }
  r.overlap_ratio = r.overlap_mass / total;
  r.overlap_ok = r.overlap_ratio <= r.overlap_bound;
  return r;
}

}  // namespace qsel
