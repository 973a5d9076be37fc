#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qsel/symplectic.hpp"

namespace qsel {

/// Vertex/edge/triangle structure. In triangle mode the edges are partitioned into
/// triangles and every vertex has degree 2 or 4; edge mode is a test-only plain graph.
class TriangleGraph {
 public:
  static TriangleGraph from_triangles(int vertices, std::vector<std::array<int, 3>> triangles);
  static TriangleGraph edge_graph(int vertices, std::vector<std::pair<int, int>> edges);

  int vertex_count() const { return vertices_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  bool triangle_mode() const { return !triangles_.empty(); }
  std::vector<std::vector<int>> adjacency() const;

 private:
  int vertices_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::array<int, 3>> triangles_;
};

TriangleGraph triangle_graph();
/// Triangle (0,1,2) with one child triangle (2,3,4).
TriangleGraph leaf_graph();
/// Rooted Husimi cactus: each free vertex of the last generation grows a child triangle.
TriangleGraph husimi_graph(int depth);
/// Ring of k triangles: shared vertices 0..k-1, outer vertices k..2k-1, triangle
/// i = (i, i+1 mod k, k+i).
TriangleGraph loop_graph(int k);
/// rows x cols kagome parallelogram: one up and one down triangle per cell, with
/// degree-2 boundary vertices closing the down triangles on the lower and left edges.
TriangleGraph kagome_patch(int rows, int cols);
/// Five triangles on K4 with one edge subdivided and a pendant vertex at the subdivision;
/// it admits no zero-sum configuration.
TriangleGraph obstructed_graph();

using SpinConfiguration = std::vector<Eigen::Vector3d>;

/// Orthonormal tangent pair per vertex with u x v = e.
struct DarbouxFrame {
  std::vector<Eigen::Vector3d> u, v;
};

DarbouxFrame default_frame(const SpinConfiguration& c);
/// Rotates each (u_i, v_i) by angle_i inside the tangent plane.
DarbouxFrame rotate_frame(const DarbouxFrame& f, const std::vector<double>& angles);

/// Planar reference directions A, B, C at mutual 120 degrees in the xy-plane.
std::array<Eigen::Vector3d, 3> planar_colors();
Eigen::Vector3d rotate_about(const Eigen::Vector3d& axis, double angle, const Eigen::Vector3d& x);

void validate_configuration(const TriangleGraph& g, const SpinConfiguration& c);

/// h = sum over edges of e_i . e_j.
double heisenberg_energy(const TriangleGraph& g, const SpinConfiguration& c);
/// h + (3/2) #triangles, nonnegative in triangle mode.
double energy_residual(const TriangleGraph& g, const SpinConfiguration& c);
/// max over triangles of |u + v + w|.
double triangle_residual(const TriangleGraph& g, const SpinConfiguration& c);
std::vector<Eigen::Vector3d> riemannian_gradient(const TriangleGraph& g,
                                                 const SpinConfiguration& c);

struct MinimizeOptions {
  int max_iters = 20000;
  double grad_tol = 1e-10;
  int starts = 200;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct MinimizeResult {
  SpinConfiguration config;
  double residual = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Triangle mode: Levenberg-Marquardt on the triangle sums over (S^2)^V. Edge mode:
/// Riemannian gradient descent with Armijo backtracking.
/// Throws NoConvergence when the iteration cap is hit.
MinimizeResult minimize_energy(const TriangleGraph& g, const SpinConfiguration& seed,
                               const MinimizeOptions& opts = {});

struct MultiStartResult {
  MinimizeResult best;
  int converged_starts = 0;
  /// Numerical verdict: best residual above 1e-3 after all starts.
  bool obstructed = false;
};

MultiStartResult multi_start_minimize(const TriangleGraph& g, const MinimizeOptions& opts = {});

/// Half-Hessian of h in e_i(q, p) = normalize(e_i + 2 q u_i + 2 p v_i), coordinates
/// (q_1..q_V, p_1..p_V). Throws NotAtMinimum when a triangle residual exceeds 1e-9.
QuadraticForm darboux_hessian(const TriangleGraph& g, const SpinConfiguration& c,
                              const DarbouxFrame& frame);

double melin_at(const TriangleGraph& g, const SpinConfiguration& c);

struct ConfigFamily {
  std::string id;
  TriangleGraph graph;
  std::function<SpinConfiguration(double)> at;
  double theta_min = 0.0;
  double theta_max = 0.0;
};

/// Rotation of the child triangle about the shared vertex.
ConfigFamily leaf_family();
/// Planar ABAB at theta = 0; e_3 rotates about e_0 = e_2.
ConfigFamily four_loop_family_a();
/// e_2 rotates about e_1; e_3 is the mirror image of e_1 across span(e_0, e_2).
ConfigFamily four_loop_family_b();
ConfigFamily custom_family(std::string id, TriangleGraph graph,
                           std::function<SpinConfiguration(double)> at, double theta_min,
                           double theta_max);

struct ScanPoint {
  double theta = 0.0;
  double energy = 0.0;
  double residual = 0.0;  // max triangle residual
  double mu = 0.0;
};

/// count points on [theta_min, theta_max), endpoint excluded.
std::vector<double> periodic_grid(double theta_min, double theta_max, int count);
/// Throws DegenerateFamily if an emitted configuration is not a zero of the shifted symbol.
std::vector<ScanPoint> family_scan(const ConfigFamily& family, const std::vector<double>& grid,
                                   int jobs = 1);

std::vector<SpinConfiguration> enumerate_three_colorings(const TriangleGraph& g);
bool is_planar_three_coloring(const SpinConfiguration& c, double tol = 1e-9);

struct TangentDimension {
  int dimension = 0;
  /// smallest singular value counted in the rank and largest one dropped, relative to the max
  double smallest_kept = 0.0;
  double largest_dropped = 0.0;
  /// no relative singular value falls within a factor 10 of the 1e-6 tolerance, and all
  /// probes agree
  bool certified = false;
};

/// Zariski tangent dimension of {per-triangle sums = 0} at c, in the tangent space of
/// (S^2)^V. Each probe recomputes with randomly rotated frames.
TangentDimension minimal_set_dimension(const TriangleGraph& g, const SpinConfiguration& c,
                                       int n_probes = 4, std::uint64_t seed = 7);

}  // namespace qsel
