#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmpf {

/// Uniform structured grid on a box, 1D or 2D, with at least 3 nodes per axis.
/// Node (i,j) sits at (i*hx, j*hy); flat index is row-major, i*nodes[1] + j.
struct Grid {
  int dim = 1;
  std::array<double, 2> extent{1.0, 0.0};
  std::array<int, 2> nodes{3, 1};

  static Grid line(double length, int n);
  static Grid rect(double lx, double ly, int nx, int ny);

  double spacing(int axis) const { return extent[axis] / (nodes[axis] - 1); }
  int count() const { return nodes[0] * nodes[1]; }
  int idx(int i, int j = 0) const { return i * nodes[1] + j; }
  double coord(int axis, int i) const { return spacing(axis) * i; }
  double measure() const { return dim == 1 ? extent[0] : extent[0] * extent[1]; }

  /// Trapezoidal quadrature weight of node (i,j).
  double weight(int i, int j = 0) const;

  bool operator==(const Grid&) const = default;
  void validate() const;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.count(), fill) {}

  Grid grid;
  std::vector<double> v;

  int size() const { return static_cast<int>(v.size()); }
  double& operator[](int k) { return v[k]; }
  double operator[](int k) const { return v[k]; }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  /// this += s*o
  void axpy(double s, const ScalarField& o);

  bool all_finite() const;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

struct VectorField {
  VectorField() = default;
  VectorField(const Grid& g) : grid(g) {
    for (int k = 0; k < g.dim; ++k) comp[k].assign(g.count(), 0.0);
  }
  Grid grid;
  std::array<std::vector<double>, 2> comp;

  /// Nodewise dot product with a constant direction e.
  ScalarField dot(const std::array<double, 2>& e) const;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

// ---------------------------------------------------------------------------
// Differential operators (homogeneous-Neumann structured-grid stencils)
// ---------------------------------------------------------------------------

/// Second-order centered Laplacian; boundary rows use mirror (ghost) reflection
/// so the discrete normal derivative vanishes. Symmetric negative semidefinite
/// with respect to the trapezoidal inner product.
ScalarField laplacian_neumann(const ScalarField& f);

/// Centered differences in the interior, one-sided second-order at boundaries.
VectorField grad(const ScalarField& f);
ScalarField grad_along(const ScalarField& f, const std::array<double, 2>& e);

/// Adjoint of grad_along in the trapezoidal inner product:
/// inner(grad_along_adjoint(q,e), v) == inner(q, grad_along(v,e)) for all v.
ScalarField grad_along_adjoint(const ScalarField& q, const std::array<double, 2>& e);

// ---------------------------------------------------------------------------
// Quadrature, norms, inner products
// ---------------------------------------------------------------------------

enum class NormKind { L1, L2, Linf, Lq, H1semi, W1qsemi };

double inner(const ScalarField& f, const ScalarField& g);
double norm(const ScalarField& f, NormKind kind, double q = 2.0);
double norm_l2(const VectorField& f);
double integral(const ScalarField& f);

// ---------------------------------------------------------------------------
// Boundary data
// ---------------------------------------------------------------------------

/// Flat indices of boundary nodes, in a fixed deterministic order.
std::vector<int> boundary_nodes(const Grid& g);
/// Boundary quadrature weight for each entry of boundary_nodes (lower-dimensional
/// trapezoid; corners accumulate the half-weights of both incident edges).
std::vector<double> boundary_weights(const Grid& g);

/// Values attached to the boundary nodes of a grid (ordering of boundary_nodes).
struct BoundaryValues {
  Grid grid;
  std::vector<double> values;

  BoundaryValues() = default;
  static BoundaryValues constant(const Grid& g, double c);
  static BoundaryValues ends(const Grid& g, double left, double right);  // 1D
  static BoundaryValues from_field(const ScalarField& f);

  BoundaryValues scaled(double s) const;
};

/// Boundary pairing <b, v> = sum over boundary nodes of quadrature weight * b * v.
double boundary_pairing(const BoundaryValues& b, const ScalarField& v);

/// Nodal source t with inner(t, v) == boundary_pairing(b, v) for all v.
ScalarField boundary_source(const BoundaryValues& b);

// ---------------------------------------------------------------------------
// Edge (cell) forms — the quadrature in which the Laplacian's Dirichlet form
// and the discrete energy identities are exact.
// ---------------------------------------------------------------------------

/// Number of axis-edges along `axis`.
int edge_count(const Grid& g, int axis);
/// Measure of each axis-edge (spacing along axis times transverse trapezoid weight).
std::vector<double> edge_measures(const Grid& g, int axis);
/// Edge difference quotients (f_hi - f_lo)/h along axis.
std::vector<double> edge_diffs(const ScalarField& f, int axis);
/// Edge midpoint means (f_hi + f_lo)/2 along axis.
std::vector<double> edge_means(const ScalarField& f, int axis);

/// d(u,v) = sum over axes/edges of measure * Du * Dv; equals -inner(laplacian(u), v).
double dirichlet_form(const ScalarField& u, const ScalarField& v);

/// Nodal source t with inner(t, v) == sum_k e_k * sum_edges measure * mean(q) * Dv.
/// This is the weak assembly of the flux term \int q e . grad v.
ScalarField edge_flux_source(const ScalarField& q, const std::array<double, 2>& e);

// ---------------------------------------------------------------------------
// Linear solver
// ---------------------------------------------------------------------------

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // final ||a*x - b*lap(x) - rhs||_2
  bool converged = false;
};

/// Solve a.*x - b*lap(x) = rhs by Jacobi-preconditioned CG on the SPD operator
/// (trapezoidal inner product). a must be positive nodewise, b >= 0.
/// Contract: ||a.*x - b*lap(x) - rhs||_2 <= tol * ||rhs||_2 on return.
ScalarField solve_helmholtz(const ScalarField& a, double b, const ScalarField& rhs,
                            double tol = 1e-10, SolveReport* report = nullptr);
ScalarField solve_helmholtz(double a, double b, const ScalarField& rhs,
                            double tol = 1e-10, SolveReport* report = nullptr);

/// Generic Jacobi-preconditioned CG used by the nonlinear steps. `apply` must be
/// self-adjoint positive definite in the trapezoidal inner product; `diag` is its
/// nodal diagonal. Termination on the plain l2 residual relative to ||rhs||_2.
template <class Op>
SolveReport conjugate_gradient(const Grid& g, Op&& apply, const std::vector<double>& diag,
                               const ScalarField& rhs, ScalarField& x, double tol, int max_iter);

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tmpf

// Template definition kept in the header.
#include "tmpf/grid_cg.ipp"
