#include "qsel/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "qsel/error.hpp"
#include "qsel/parallel.hpp"

namespace qsel {

namespace {

std::pair<int, int> ordered(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

bool connected(int vertices, const std::vector<std::pair<int, int>>& edges) {
  if (vertices == 0) return false;
  std::vector<std::vector<int>> adj(vertices);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(vertices, false);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = true;
  int count = 1;
  while (!todo.empty()) {
    int v = todo.front();
    todo.pop();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        todo.push(w);
      }
  }
  return count == vertices;
}

}  // namespace

TriangleGraph TriangleGraph::from_triangles(int vertices,
                                            std::vector<std::array<int, 3>> triangles) {
  if (vertices <= 0 || triangles.empty())
    throw Error(ErrorKind::InvalidGraph, "graph needs vertices and triangles");
  TriangleGraph g;
  g.vertices_ = vertices;
  std::set<std::pair<int, int>> seen;
  std::vector<int> degree(vertices, 0);
  for (const auto& t : triangles) {
    for (int x : t)
      if (x < 0 || x >= vertices) throw Error(ErrorKind::InvalidGraph, "vertex out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw Error(ErrorKind::InvalidGraph, "degenerate triangle");
    for (auto [a, b] : {std::pair{t[0], t[1]}, std::pair{t[1], t[2]}, std::pair{t[0], t[2]}}) {
      auto e = ordered(a, b);
      if (!seen.insert(e).second)
        throw Error(ErrorKind::InvalidGraph, "edge in more than one triangle");
      g.edges_.push_back(e);
      ++degree[a];
      ++degree[b];
    }
  }
  for (int v = 0; v < vertices; ++v)
    if (degree[v] != 2 && degree[v] != 4)
      throw Error(ErrorKind::InvalidGraph,
                  "vertex " + std::to_string(v) + " has degree " + std::to_string(degree[v]));
  if (!connected(vertices, g.edges_)) throw Error(ErrorKind::InvalidGraph, "graph not connected");
  g.triangles_ = std::move(triangles);
  return g;
}

TriangleGraph TriangleGraph::edge_graph(int vertices, std::vector<std::pair<int, int>> edges) {
  TriangleGraph g;
  g.vertices_ = vertices;
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= vertices || b >= vertices || a == b)
      throw Error(ErrorKind::InvalidGraph, "bad edge");
    if (!seen.insert(ordered(a, b)).second) throw Error(ErrorKind::InvalidGraph, "repeated edge");
    g.edges_.push_back(ordered(a, b));
  }
  if (!connected(vertices, g.edges_)) throw Error(ErrorKind::InvalidGraph, "graph not connected");
  return g;
}

std::vector<std::vector<int>> TriangleGraph::adjacency() const {
  std::vector<std::vector<int>> adj(vertices_);
  for (auto [a, b] : edges_) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

TriangleGraph triangle_graph() { return TriangleGraph::from_triangles(3, {{0, 1, 2}}); }

TriangleGraph leaf_graph() { return TriangleGraph::from_triangles(5, {{0, 1, 2}, {2, 3, 4}}); }

TriangleGraph husimi_graph(int depth) {
  if (depth < 0) throw Error(ErrorKind::InvalidInput, "depth must be nonnegative");
  std::vector<std::array<int, 3>> tris{{0, 1, 2}};
  std::vector<int> frontier{0, 1, 2};
  int next = 3;
  for (int level = 0; level < depth; ++level) {
    std::vector<int> grown;
    for (int v : frontier) {
      tris.push_back({v, next, next + 1});
      grown.push_back(next);
      grown.push_back(next + 1);
      next += 2;
    }
    frontier = std::move(grown);
  }
  return TriangleGraph::from_triangles(next, std::move(tris));
}

TriangleGraph loop_graph(int k) {
  if (k < 3) throw Error(ErrorKind::InvalidInput, "a loop needs at least 3 triangles");
  std::vector<std::array<int, 3>> tris;
  for (int i = 0; i < k; ++i) tris.push_back({i, (i + 1) % k, k + i});
  return TriangleGraph::from_triangles(2 * k, std::move(tris));
}

TriangleGraph kagome_patch(int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error(ErrorKind::InvalidInput, "empty kagome patch");
  // Cell (i, j) holds sites a, b, c of an up triangle; the down triangle at (i, j) joins
  // a(i, j), b(i-1, j), c(i, j-1). Sites outside the patch become boundary vertices.
  auto site = [cols](int i, int j, int s) { return 3 * (j * cols + i) + s; };
  int next = 3 * rows * cols;
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < cols; ++i) {
      tris.push_back({site(i, j, 0), site(i, j, 1), site(i, j, 2)});
      const int b = i > 0 ? site(i - 1, j, 1) : next++;
      const int c = j > 0 ? site(i, j - 1, 2) : next++;
      tris.push_back({site(i, j, 0), b, c});
    }
  return TriangleGraph::from_triangles(next, std::move(tris));
}

TriangleGraph obstructed_graph() {
  // Vertices are the edges of K4(a,b,c,d) with a-b subdivided by s, plus the pendant at s:
  // 0=as 1=sb 2=ac 3=ad 4=bc 5=bd 6=cd 7=pendant. Triangles are the K4 vertices and s.
  return TriangleGraph::from_triangles(
      8, {{0, 2, 3}, {1, 4, 5}, {2, 4, 6}, {3, 5, 6}, {0, 1, 7}});
}

std::array<Eigen::Vector3d, 3> planar_colors() {
  const double h = std::sqrt(3.0) / 2.0;
  return {Eigen::Vector3d(1.0, 0.0, 0.0), Eigen::Vector3d(-0.5, h, 0.0),
          Eigen::Vector3d(-0.5, -h, 0.0)};
}

Eigen::Vector3d rotate_about(const Eigen::Vector3d& axis, double angle, const Eigen::Vector3d& x) {
  return Eigen::AngleAxisd(angle, axis.normalized()) * x;
}

DarbouxFrame default_frame(const SpinConfiguration& c) {
  DarbouxFrame f;
  for (const auto& e : c) {
    int k;
    e.cwiseAbs().minCoeff(&k);
    Eigen::Vector3d a = Eigen::Vector3d::Unit(k);
    Eigen::Vector3d u = e.cross(a).normalized();
    f.u.push_back(u);
    f.v.push_back(e.cross(u));
  }
  return f;
}

DarbouxFrame rotate_frame(const DarbouxFrame& f, const std::vector<double>& angles) {
  DarbouxFrame out = f;
  for (size_t i = 0; i < f.u.size(); ++i) {
    const double c = std::cos(angles.at(i)), s = std::sin(angles.at(i));
    out.u[i] = c * f.u[i] + s * f.v[i];
    out.v[i] = -s * f.u[i] + c * f.v[i];
  }
  return out;
}

void validate_configuration(const TriangleGraph& g, const SpinConfiguration& c) {
  if (static_cast<int>(c.size()) != g.vertex_count())
    throw Error(ErrorKind::InvalidInput, "configuration size does not match graph");
  for (const auto& e : c)
    if (!e.allFinite() || std::abs(e.norm() - 1.0) > 1e-12)
      throw Error(ErrorKind::InvalidInput, "configuration vectors must be unit vectors");
}

double heisenberg_energy(const TriangleGraph& g, const SpinConfiguration& c) {
  double h = 0.0;
  for (auto [a, b] : g.edges()) h += c[a].dot(c[b]);
  return h;
}

double energy_residual(const TriangleGraph& g, const SpinConfiguration& c) {
  if (!g.triangle_mode()) return heisenberg_energy(g, c);
  // sum over triangles of |s_t|^2 / 2 equals h + 3T/2 on unit spins, without cancellation
  double r = 0.0;
  for (const auto& t : g.triangles()) r += 0.5 * (c[t[0]] + c[t[1]] + c[t[2]]).squaredNorm();
  return r;
}

double triangle_residual(const TriangleGraph& g, const SpinConfiguration& c) {
  double r = 0.0;
  for (const auto& t : g.triangles()) r = std::max(r, (c[t[0]] + c[t[1]] + c[t[2]]).norm());
  return r;
}

std::vector<Eigen::Vector3d> riemannian_gradient(const TriangleGraph& g,
                                                 const SpinConfiguration& c) {
  std::vector<Eigen::Vector3d> grad(c.size(), Eigen::Vector3d::Zero());
  for (auto [a, b] : g.edges()) {
    grad[a] += c[b];
    grad[b] += c[a];
  }
  for (size_t i = 0; i < c.size(); ++i) grad[i] -= c[i].dot(grad[i]) * c[i];
  return grad;
}

namespace {

double total_norm(const std::vector<Eigen::Vector3d>& g) {
  double s = 0.0;
  for (const auto& v : g) s += v.squaredNorm();
  return std::sqrt(s);
}

SpinConfiguration random_configuration(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpinConfiguration c(n);
  for (auto& e : c) {
    do {
      e = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    } while (e.norm() < 1e-6);
    e.normalize();
  }
  return c;
}

MinimizeResult descend(const TriangleGraph& g, SpinConfiguration c, const MinimizeOptions& opts) {
  MinimizeResult res;
  // energy_residual differs from h by a constant and keeps full precision near a zero
  double h = energy_residual(g, c);
  double step = 0.1;
  for (int it = 0; it < opts.max_iters; ++it) {
    auto grad = riemannian_gradient(g, c);
    const double gn = total_norm(grad);
    res.iterations = it;
    res.grad_norm = gn;
    if (gn <= opts.grad_tol) break;
    // flat quartic valleys need steps far above 1/||Hessian||
    step = std::min(step * 2.0, 1e6);
    SpinConfiguration trial(c.size());
    double ht = h;
    while (true) {
      for (size_t i = 0; i < c.size(); ++i) trial[i] = (c[i] - step * grad[i]).normalized();
      ht = energy_residual(g, trial);
      if (ht <= h - 1e-4 * step * gn * gn || step < 1e-16) break;
      step *= 0.5;
    }
    if (!(ht < h)) break;  // no further decrease at machine resolution
    c = std::move(trial);
    h = ht;
  }
  res.grad_norm = total_norm(riemannian_gradient(g, c));
  res.converged = res.grad_norm <= opts.grad_tol;
  res.config = std::move(c);
  res.residual = g.triangle_mode() ? std::max(0.0, h) : 0.0;
  return res;
}

// Levenberg-Marquardt on the triangle sums in tangent coordinates of the default frame.
MinimizeResult least_squares(const TriangleGraph& g, SpinConfiguration c,
                             const MinimizeOptions& opts) {
  const int n = g.vertex_count();
  const int t = static_cast<int>(g.triangles().size());
  MinimizeResult res;
  double f = energy_residual(g, c);
  double damping = 1e-3;
  for (int it = 0; it < opts.max_iters; ++it) {
    res.iterations = it;
    const DarbouxFrame fr = default_frame(c);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * t, 2 * n);
    Eigen::VectorXd r(3 * t);
    for (int k = 0; k < t; ++k) {
      const auto& tri = g.triangles()[k];
      r.segment<3>(3 * k) = c[tri[0]] + c[tri[1]] + c[tri[2]];
      for (int i : tri) {
        jac.block<3, 1>(3 * k, i) = fr.u[i];
        jac.block<3, 1>(3 * k, n + i) = fr.v[i];
      }
    }
    const Eigen::VectorXd grad = jac.transpose() * r;
    res.grad_norm = grad.norm();
    if (res.grad_norm <= opts.grad_tol) break;
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    bool improved = false;
    while (damping < 1e12) {
      Eigen::MatrixXd a = normal;
      a.diagonal().array() += damping;
      const Eigen::VectorXd dx = -a.ldlt().solve(grad);
      SpinConfiguration trial(n);
      for (int i = 0; i < n; ++i) trial[i] = (c[i] + dx(i) * fr.u[i] + dx(n + i) * fr.v[i]).normalized();
      const double ft = energy_residual(g, trial);
      if (ft < f) {
        c = std::move(trial);
        f = ft;
        damping = std::max(damping * 0.3, 1e-12);
        improved = true;
        break;
      }
      damping *= 10.0;
    }
    if (!improved) break;
  }
  res.grad_norm = total_norm(riemannian_gradient(g, c));
  res.converged = res.grad_norm <= opts.grad_tol;
  res.config = std::move(c);
  res.residual = std::max(0.0, f);
  return res;
}

MinimizeResult run_minimizer(const TriangleGraph& g, SpinConfiguration c,
                             const MinimizeOptions& opts) {
  return g.triangle_mode() ? least_squares(g, std::move(c), opts) : descend(g, std::move(c), opts);
}

}  // namespace

MinimizeResult minimize_energy(const TriangleGraph& g, const SpinConfiguration& seed,
                               const MinimizeOptions& opts) {
  validate_configuration(g, seed);
  MinimizeResult res = run_minimizer(g, seed, opts);
  if (!res.converged)
    throw Error(ErrorKind::NoConvergence,
                "gradient norm " + std::to_string(res.grad_norm) + " after cap");
  return res;
}

MultiStartResult multi_start_minimize(const TriangleGraph& g, const MinimizeOptions& opts) {
  std::vector<MinimizeResult> runs(opts.starts);
  parallel_for(opts.starts, opts.jobs, [&](int i) {
    std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1));
    runs[i] = run_minimizer(g, random_configuration(g.vertex_count(), rng), opts);
  });
  MultiStartResult out;
  out.best.residual = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (r.converged) ++out.converged_starts;
    if (r.residual < out.best.residual) out.best = r;
  }
  out.obstructed = out.best.residual > 1e-3;
  return out;
}

QuadraticForm darboux_hessian(const TriangleGraph& g, const SpinConfiguration& c,
                              const DarbouxFrame& frame) {
  validate_configuration(g, c);
  if (g.triangle_mode() && triangle_residual(g, c) > 1e-9)
    throw Error(ErrorKind::NotAtMinimum,
                "triangle residual " + std::to_string(triangle_residual(g, c)));
  const int n = g.vertex_count();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  auto add = [&m](int r, int s, double v) {
    m(r, s) += v;
    m(s, r) += v;
  };
  for (auto [i, j] : g.edges()) {
    const auto &ui = frame.u[i], &vi = frame.v[i], &uj = frame.u[j], &vj = frame.v[j];
    add(i, j, 2.0 * ui.dot(uj));
    add(i, n + j, 2.0 * ui.dot(vj));
    add(n + i, j, 2.0 * vi.dot(uj));
    add(n + i, n + j, 2.0 * vi.dot(vj));
    // normalization of e_i contributes -2 (q_i^2 + p_i^2) e_i . e_j
    const double d = -2.0 * c[i].dot(c[j]);
    m(i, i) += d;
    m(n + i, n + i) += d;
    m(j, j) += d;
    m(n + j, n + j) += d;
  }
  return QuadraticForm(m);
}

double melin_at(const TriangleGraph& g, const SpinConfiguration& c) {
  return melin_value(darboux_hessian(g, c, default_frame(c))).value;
}

ConfigFamily custom_family(std::string id, TriangleGraph graph,
                           std::function<SpinConfiguration(double)> at, double theta_min,
                           double theta_max) {
  return ConfigFamily{std::move(id), std::move(graph), std::move(at), theta_min, theta_max};
}

ConfigFamily leaf_family() {
  auto at = [](double theta) {
    auto [a, b, cc] = planar_colors();
    return SpinConfiguration{a, b, cc, rotate_about(cc, theta, a), rotate_about(cc, theta, b)};
  };
  return custom_family("leaf", leaf_graph(), at, 0.0, 2.0 * M_PI);
}

namespace {

SpinConfiguration close_four_loop(const Eigen::Vector3d& e0, const Eigen::Vector3d& e1,
                                  const Eigen::Vector3d& e2, const Eigen::Vector3d& e3) {
  SpinConfiguration c{e0, e1, e2, e3};
  for (int i = 0; i < 4; ++i) c.push_back(-(c[i] + c[(i + 1) % 4]));
  for (auto& e : c) e.normalize();
  return c;
}

}  // namespace

ConfigFamily four_loop_family_a() {
  auto at = [](double theta) {
    auto [a, b, cc] = planar_colors();
    (void)cc;
    return close_four_loop(a, b, a, rotate_about(a, theta, b));
  };
  return custom_family("four_loop_A", loop_graph(4), at, 0.0, 2.0 * M_PI);
}

ConfigFamily four_loop_family_b() {
  auto at = [](double theta) {
    auto [a, b, cc] = planar_colors();
    (void)cc;
    Eigen::Vector3d e2 = rotate_about(b, theta, a);
    Eigen::Vector3d normal = a.cross(e2);
    // At theta = 0 the plane span(a, e2) degenerates; its limit normal is b + a/2.
    normal = normal.norm() > 1e-8 ? normal.normalized() : (b + 0.5 * a).normalized();
    Eigen::Vector3d e3 = b - 2.0 * b.dot(normal) * normal;
    return close_four_loop(a, b, e2, e3);
  };
  return custom_family("four_loop_B", loop_graph(4), at, 0.0, 2.0 * M_PI);
}

std::vector<double> periodic_grid(double theta_min, double theta_max, int count) {
  if (count < 1) throw Error(ErrorKind::InvalidInput, "grid needs at least one point");
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = theta_min + (theta_max - theta_min) * i / count;
  return grid;
}

std::vector<ScanPoint> family_scan(const ConfigFamily& family, const std::vector<double>& grid,
                                   int jobs) {
  std::vector<ScanPoint> out(grid.size());
  parallel_for(static_cast<int>(grid.size()), jobs, [&](int i) {
    SpinConfiguration c = family.at(grid[i]);
    ScanPoint p;
    p.theta = grid[i];
    p.residual = triangle_residual(family.graph, c);
    if (p.residual > 1e-9)
      throw Error(ErrorKind::DegenerateFamily,
                  family.id + " leaves the zero set at theta = " + std::to_string(grid[i]));
    p.energy = heisenberg_energy(family.graph, c);
    p.mu = melin_at(family.graph, c);
    out[i] = p;
  });
  return out;
}

std::vector<SpinConfiguration> enumerate_three_colorings(const TriangleGraph& g) {
  const int n = g.vertex_count();
  if (n > 24) throw Error(ErrorKind::InvalidInput, "exhaustive coloring limited to 24 vertices");
  auto adj = g.adjacency();
  auto colors = planar_colors();
  std::vector<int> color(n, -1);
  std::vector<SpinConfiguration> out;
  auto rec = [&](auto&& self, int v) -> void {
    if (v == n) {
      SpinConfiguration c(n);
      for (int i = 0; i < n; ++i) c[i] = colors[color[i]];
      out.push_back(std::move(c));
      return;
    }
    for (int k = 0; k < 3; ++k) {
      bool ok = true;
      for (int w : adj[v])
        if (w < v && color[w] == k) ok = false;
      if (!ok) continue;
      color[v] = k;
      self(self, v + 1);
      color[v] = -1;
    }
  };
  rec(rec, 0);
  return out;
}

bool is_planar_three_coloring(const SpinConfiguration& c, double tol) {
  if (c.empty()) return false;
  // Rotate so that the first vector becomes A inside the plane of the configuration.
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  for (size_t i = 1; i < c.size() && normal.norm() < 0.5; ++i) {
    Eigen::Vector3d x = c[0].cross(c[i]);
    if (x.norm() > 0.5) normal = x.normalized();
  }
  if (normal.norm() < 0.5) return false;
  Eigen::Vector3d second = normal.cross(c[0]);
  for (const auto& e : c) {
    if (std::abs(e.dot(normal)) > tol) return false;
    const double ang = std::atan2(e.dot(second), e.dot(c[0]));
    const double k = ang / (2.0 * M_PI / 3.0);
    if (std::abs(k - std::round(k)) * (2.0 * M_PI / 3.0) > tol) return false;
  }
  return true;
}

TangentDimension minimal_set_dimension(const TriangleGraph& g, const SpinConfiguration& c,
                                       int n_probes, std::uint64_t seed) {
  validate_configuration(g, c);
  if (triangle_residual(g, c) > 1e-9)
    throw Error(ErrorKind::NotAtMinimum, "configuration is not a zero of the shifted symbol");
  const int n = g.vertex_count();
  const int t = static_cast<int>(g.triangles().size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  TangentDimension out;
  out.certified = true;
  for (int probe = 0; probe < std::max(1, n_probes); ++probe) {
    std::vector<double> angles(n);
    for (auto& a : angles) a = probe == 0 ? 0.0 : ang(rng);
    DarbouxFrame f = rotate_frame(default_frame(c), angles);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * t, 2 * n);
    for (int k = 0; k < t; ++k)
      for (int x : g.triangles()[k]) {
        jac.block<3, 1>(3 * k, x) += f.u[x];
        jac.block<3, 1>(3 * k, n + x) += f.v[x];
      }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    Eigen::VectorXd s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    int rank = 0;
    double kept = 1.0, dropped = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      const double rel = smax > 0 ? s(i) / smax : 0.0;
      if (rel > 1e-6) {
        ++rank;
        kept = std::min(kept, rel);
      } else {
        dropped = std::max(dropped, rel);
      }
      if (rel > 1e-7 && rel < 1e-5) out.certified = false;
    }
    const int dim = 2 * n - rank;
    if (probe == 0) {
      out.dimension = dim;
      out.smallest_kept = kept;
      out.largest_dropped = dropped;
    } else if (dim != out.dimension) {
      out.certified = false;
    }
  }
  return out;
}

}  // namespace qsel
