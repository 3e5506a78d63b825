#include "tmpf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tmpf {

Grid Grid::line(double length, int n) {
  Grid g;
  g.dim = 1;
  g.extent = {length, 0.0};
  g.nodes = {n, 1};
  g.validate();
  return g;
}

Grid Grid::rect(double lx, double ly, int nx, int ny) {
  Grid g;
  g.dim = 2;
  g.extent = {lx, ly};
  g.nodes = {nx, ny};
  g.validate();
  return g;
}

void Grid::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid: dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (nodes[a] < 3) throw std::invalid_argument("grid: need at least 3 nodes per axis");
    if (!(extent[a] > 0.0)) throw std::invalid_argument("grid: extent must be positive");
  }
  if (dim == 1 && nodes[1] != 1) throw std::invalid_argument("grid: 1D grids have nodes[1] == 1");
}

double Grid::weight(int i, int j) const {
  const double hx = spacing(0);
  double w = (i == 0 || i == nodes[0] - 1) ? 0.5 * hx : hx;
  if (dim == 2) {
    const double hy = spacing(1);
    w *= (j == 0 || j == nodes[1] - 1) ? 0.5 * hy : hy;
  }
  return w;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid, o.grid, "field +=");
  for (size_t k = 0; k < v.size(); ++k) v[k] += o.v[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid, o.grid, "field -=");
  for (size_t k = 0; k < v.size(); ++k) v[k] -= o.v[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& t : v) t *= s;
  return *this;
}

void ScalarField::axpy(double s, const ScalarField& o) {
  require_same_grid(grid, o.grid, "field axpy");
  for (size_t k = 0; k < v.size(); ++k) v[k] += s * o.v[k];
}

bool ScalarField::all_finite() const {
  return std::all_of(v.begin(), v.end(), [](double t) { return std::isfinite(t); });
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField VectorField::dot(const std::array<double, 2>& e) const {
  ScalarField out(grid);
  for (int k = 0; k < grid.dim; ++k)
    for (int i = 0; i < out.size(); ++i) out[i] += e[k] * comp[k][i];
  return out;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

namespace {

// Applies the 1D mirror-reflected Laplacian along one axis of the flattened array.
// stride: step between neighbors along the axis; n: nodes along the axis;
// lines: number of transverse lines; line_stride: step between lines.
void add_axis_laplacian(const std::vector<double>& f, std::vector<double>& out, int n, int stride,
                        int lines, int line_stride, double h) {
  const double ih2 = 1.0 / (h * h);
  for (int l = 0; l < lines; ++l) {
    const int base = l * line_stride;
    out[base] += 2.0 * (f[base + stride] - f[base]) * ih2;
    for (int i = 1; i < n - 1; ++i) {
      const int k = base + i * stride;
      out[k] += (f[k + stride] - 2.0 * f[k] + f[k - stride]) * ih2;
    }
    const int k = base + (n - 1) * stride;
    out[k] += 2.0 * (f[k - stride] - f[k]) * ih2;
  }
}

void add_axis_gradient(const std::vector<double>& f, std::vector<double>& out, int n, int stride,
                       int lines, int line_stride, double h, double scale) {
  const double i2h = scale / (2.0 * h);
  for (int l = 0; l < lines; ++l) {
    const int base = l * line_stride;
    out[base] += (-3.0 * f[base] + 4.0 * f[base + stride] - f[base + 2 * stride]) * i2h;
    for (int i = 1; i < n - 1; ++i) {
      const int k = base + i * stride;
      out[k] += (f[k + stride] - f[k - stride]) * i2h;
    }
    const int k = base + (n - 1) * stride;
    out[k] += (3.0 * f[k] - 4.0 * f[k - stride] + f[k - 2 * stride]) * i2h;
  }
}

// Scatter transpose of add_axis_gradient: out += scale * D_axis^T (w .* q),
// where w are the trapezoid weights (applied by the caller via q_weighted).
void add_axis_gradient_transpose(const std::vector<double>& qw, std::vector<double>& out, int n,
                                 int stride, int lines, int line_stride, double h, double scale) {
  const double i2h = scale / (2.0 * h);
  for (int l = 0; l < lines; ++l) {
    const int base = l * line_stride;
    // row 0: (-3, 4, -1)
    out[base] += -3.0 * i2h * qw[base];
    out[base + stride] += 4.0 * i2h * qw[base];
    out[base + 2 * stride] += -i2h * qw[base];
    for (int i = 1; i < n - 1; ++i) {
      const int k = base + i * stride;
      out[k + stride] += i2h * qw[k];
      out[k - stride] += -i2h * qw[k];
    }
    const int k = base + (n - 1) * stride;
    out[k] += 3.0 * i2h * qw[k];
    out[k - stride] += -4.0 * i2h * qw[k];
    out[k - 2 * stride] += i2h * qw[k];
  }
}

struct AxisInfo {
  int n, stride, lines, line_stride;
  double h;
};

AxisInfo axis_info(const Grid& g, int axis) {
  const int nx = g.nodes[0], ny = g.nodes[1];
  if (axis == 0) return {nx, ny, ny, 1, g.spacing(0)};
  return {ny, 1, nx, ny, g.spacing(1)};
}

}  // namespace

ScalarField laplacian_neumann(const ScalarField& f) {
  ScalarField out(f.grid, 0.0);
  for (int a = 0; a < f.grid.dim; ++a) {
    const AxisInfo ax = axis_info(f.grid, a);
    add_axis_laplacian(f.v, out.v, ax.n, ax.stride, ax.lines, ax.line_stride, ax.h);
  }
  return out;
}

VectorField grad(const ScalarField& f) {
  VectorField out(f.grid);
  for (int a = 0; a < f.grid.dim; ++a) {
    const AxisInfo ax = axis_info(f.grid, a);
    add_axis_gradient(f.v, out.comp[a], ax.n, ax.stride, ax.lines, ax.line_stride, ax.h, 1.0);
  }
  return out;
}

ScalarField grad_along(const ScalarField& f, const std::array<double, 2>& e) {
  ScalarField out(f.grid, 0.0);
  for (int a = 0; a < f.grid.dim; ++a) {
    if (e[a] == 0.0) continue;
    const AxisInfo ax = axis_info(f.grid, a);
    add_axis_gradient(f.v, out.v, ax.n, ax.stride, ax.lines, ax.line_stride, ax.h, e[a]);
  }
  return out;
}

ScalarField grad_along_adjoint(const ScalarField& q, const std::array<double, 2>& e) {
  const Grid& g = q.grid;
  // weighted copy
  std::vector<double> qw(q.v.size());
  for (int i = 0; i < g.nodes[0]; ++i)
    for (int j = 0; j < g.nodes[1]; ++j) qw[g.idx(i, j)] = q.v[g.idx(i, j)] * g.weight(i, j);

  ScalarField out(g, 0.0);
  for (int a = 0; a < g.dim; ++a) {
    if (e[a] == 0.0) continue;
    const AxisInfo ax = axis_info(g, a);
    add_axis_gradient_transpose(qw, out.v, ax.n, ax.stride, ax.lines, ax.line_stride, ax.h, e[a]);
  }
  for (int i = 0; i < g.nodes[0]; ++i)
    for (int j = 0; j < g.nodes[1]; ++j) out.v[g.idx(i, j)] /= g.weight(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature and norms
// ---------------------------------------------------------------------------

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid, g.grid, "inner");
  const Grid& gr = f.grid;
  double s = 0.0;
  for (int i = 0; i < gr.nodes[0]; ++i)
    for (int j = 0; j < gr.nodes[1]; ++j) {
      const int k = gr.idx(i, j);
      s += gr.weight(i, j) * f[k] * g[k];
    }
  return s;
}

double integral(const ScalarField& f) {
  const Grid& gr = f.grid;
  double s = 0.0;
  for (int i = 0; i < gr.nodes[0]; ++i)
    for (int j = 0; j < gr.nodes[1]; ++j) s += gr.weight(i, j) * f[gr.idx(i, j)];
  return s;
}

namespace {

double lq_norm(const ScalarField& f, double q) {
  const Grid& gr = f.grid;
  double s = 0.0;
  for (int i = 0; i < gr.nodes[0]; ++i)
    for (int j = 0; j < gr.nodes[1]; ++j)
      s += gr.weight(i, j) * std::pow(std::abs(f[gr.idx(i, j)]), q);
  return std::pow(s, 1.0 / q);
}

ScalarField grad_magnitude(const ScalarField& f) {
  VectorField gf = grad(f);
  ScalarField m(f.grid);
  for (int k = 0; k < m.size(); ++k) {
    double s = 0.0;
    for (int a = 0; a < f.grid.dim; ++a) s += gf.comp[a][k] * gf.comp[a][k];
    m[k] = std::sqrt(s);
  }
  return m;
}

}  // namespace

double norm(const ScalarField& f, NormKind kind, double q) {
  switch (kind) {
    case NormKind::L1:
      return lq_norm(f, 1.0);
    case NormKind::L2:
      return std::sqrt(std::max(0.0, inner(f, f)));
    case NormKind::Linf: {
      double m = 0.0;
      for (double t : f.v) m = std::max(m, std::abs(t));
      return m;
    }
    case NormKind::Lq:
      return lq_norm(f, q);
    case NormKind::H1semi:
      return norm(grad_magnitude(f), NormKind::L2);
    case NormKind::W1qsemi:
      return lq_norm(grad_magnitude(f), q);
  }
  throw std::invalid_argument("norm: unknown kind");
}

double norm_l2(const VectorField& f) {
  double s = 0.0;
  for (int a = 0; a < f.grid.dim; ++a) {
    const Grid& gr = f.grid;
    for (int i = 0; i < gr.nodes[0]; ++i)
      for (int j = 0; j < gr.nodes[1]; ++j) {
        const int k = gr.idx(i, j);
        s += gr.weight(i, j) * f.comp[a][k] * f.comp[a][k];
      }
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Boundary
// ---------------------------------------------------------------------------

std::vector<int> boundary_nodes(const Grid& g) {
  std::vector<int> out;
  if (g.dim == 1) {
    out = {g.idx(0), g.idx(g.nodes[0] - 1)};
    return out;
  }
  const int nx = g.nodes[0], ny = g.nodes[1];
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (i == 0 || i == nx - 1 || j == 0 || j == ny - 1) out.push_back(g.idx(i, j));
  return out;
}

std::vector<double> boundary_weights(const Grid& g) {
  if (g.dim == 1) return {1.0, 1.0};  // point masses
  const int nx = g.nodes[0], ny = g.nodes[1];
  const double hx = g.spacing(0), hy = g.spacing(1);
  std::vector<double> out;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      if (!(i == 0 || i == nx - 1 || j == 0 || j == ny - 1)) continue;
      double w = 0.0;
      // edges parallel to y carry hy-trapezoid weights, and vice versa
      if (i == 0 || i == nx - 1) w += (j == 0 || j == ny - 1) ? 0.5 * hy : hy;
      if (j == 0 || j == ny - 1) w += (i == 0 || i == nx - 1) ? 0.5 * hx : hx;
      out.push_back(w);
    }
  return out;
}

BoundaryValues BoundaryValues::constant(const Grid& g, double c) {
  BoundaryValues b;
  b.grid = g;
  b.values.assign(boundary_nodes(g).size(), c);
  return b;
}

BoundaryValues BoundaryValues::ends(const Grid& g, double left, double right) {
  if (g.dim != 1) throw std::invalid_argument("BoundaryValues::ends: 1D only");
  BoundaryValues b;
  b.grid = g;
  b.values = {left, right};
  return b;
}

BoundaryValues BoundaryValues::from_field(const ScalarField& f) {
  BoundaryValues b;
  b.grid = f.grid;
  for (int k : boundary_nodes(f.grid)) b.values.push_back(f[k]);
  return b;
}

BoundaryValues BoundaryValues::scaled(double s) const {
  BoundaryValues b = *this;
  for (double& t : b.values) t *= s;
  return b;
}

double boundary_pairing(const BoundaryValues& b, const ScalarField& v) {
  require_same_grid(b.grid, v.grid, "boundary_pairing");
  const std::vector<int> nodes = boundary_nodes(b.grid);
  const std::vector<double> w = boundary_weights(b.grid);
  if (b.values.size() != nodes.size())
    throw std::invalid_argument("boundary_pairing: boundary data size mismatch");
  double s = 0.0;
  for (size_t k = 0; k < nodes.size(); ++k) s += w[k] * b.values[k] * v[nodes[k]];
  return s;
}

ScalarField boundary_source(const BoundaryValues& b) {
  const Grid& g = b.grid;
  ScalarField out(g, 0.0);
  const std::vector<int> nodes = boundary_nodes(g);
  const std::vector<double> w = boundary_weights(g);
  for (size_t k = 0; k < nodes.size(); ++k) {
    const int flat = nodes[k];
    const int i = flat / g.nodes[1], j = flat % g.nodes[1];
    out[flat] += w[k] * b.values[k] / g.weight(i, j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Edge forms
// ---------------------------------------------------------------------------

int edge_count(const Grid& g, int axis) {
  if (axis == 0) return (g.nodes[0] - 1) * g.nodes[1];
  return g.nodes[0] * (g.nodes[1] - 1);
}

// Edge enumeration along axis 0: for i in [0,nx-1), j in [0,ny): edge (i,j)-(i+1,j),
// flat order i*ny + j. Along axis 1: for i, j in [0,ny-1): edge (i,j)-(i,j+1),
// flat order i*(ny-1) + j.

std::vector<double> edge_measures(const Grid& g, int axis) {
  std::vector<double> out;
  out.reserve(edge_count(g, axis));
  const double h = g.spacing(axis);
  if (g.dim == 1) {
    out.assign(g.nodes[0] - 1, h);
    return out;
  }
  const int nx = g.nodes[0], ny = g.nodes[1];
  const double hx = g.spacing(0), hy = g.spacing(1);
  if (axis == 0) {
    for (int i = 0; i < nx - 1; ++i)
      for (int j = 0; j < ny; ++j) out.push_back(hx * ((j == 0 || j == ny - 1) ? 0.5 * hy : hy));
  } else {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny - 1; ++j) out.push_back(hy * ((i == 0 || i == nx - 1) ? 0.5 * hx : hx));
  }
  return out;
}

std::vector<double> edge_diffs(const ScalarField& f, int axis) {
  const Grid& g = f.grid;
  const double ih = 1.0 / g.spacing(axis);
  std::vector<double> out;
  out.reserve(edge_count(g, axis));
  const int nx = g.nodes[0], ny = g.nodes[1];
  if (axis == 0) {
    for (int i = 0; i < nx - 1; ++i)
      for (int j = 0; j < ny; ++j) out.push_back((f[g.idx(i + 1, j)] - f[g.idx(i, j)]) * ih);
  } else {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny - 1; ++j) out.push_back((f[g.idx(i, j + 1)] - f[g.idx(i, j)]) * ih);
  }
  return out;
}

std::vector<double> edge_means(const ScalarField& f, int axis) {
  const Grid& g = f.grid;
  std::vector<double> out;
  out.reserve(edge_count(g, axis));
  const int nx = g.nodes[0], ny = g.nodes[1];
  if (axis == 0) {
    for (int i = 0; i < nx - 1; ++i)
      for (int j = 0; j < ny; ++j) out.push_back(0.5 * (f[g.idx(i + 1, j)] + f[g.idx(i, j)]));
  } else {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny - 1; ++j) out.push_back(0.5 * (f[g.idx(i, j + 1)] + f[g.idx(i, j)]));
  }
  return out;
}

double dirichlet_form(const ScalarField& u, const ScalarField& v) {
  require_same_grid(u.grid, v.grid, "dirichlet_form");
  double s = 0.0;
  for (int a = 0; a < u.grid.dim; ++a) {
    const std::vector<double> m = edge_measures(u.grid, a);
    const std::vector<double> du = edge_diffs(u, a);
    const std::vector<double> dv = edge_diffs(v, a);
    for (size_t k = 0; k < m.size(); ++k) s += m[k] * du[k] * dv[k];
  }
  return s;
}

ScalarField edge_flux_source(const ScalarField& q, const std::array<double, 2>& e) {
  const Grid& g = q.grid;
  ScalarField out(g, 0.0);
  const int nx = g.nodes[0], ny = g.nodes[1];
  for (int a = 0; a < g.dim; ++a) {
    if (e[a] == 0.0) continue;
    const std::vector<double> m = edge_measures(g, a);
    const std::vector<double> qm = edge_means(q, a);
    const double ih = 1.0 / g.spacing(a);
    int k = 0;
    if (a == 0) {
      for (int i = 0; i < nx - 1; ++i)
        for (int j = 0; j < ny; ++j, ++k) {
          const double c = e[0] * m[k] * qm[k] * ih;
          out[g.idx(i + 1, j)] += c;
          out[g.idx(i, j)] -= c;
        }
    } else {
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny - 1; ++j, ++k) {
          const double c = e[1] * m[k] * qm[k] * ih;
          out[g.idx(i, j + 1)] += c;
          out[g.idx(i, j)] -= c;
        }
    }
  }
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) out[g.idx(i, j)] /= g.weight(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Helmholtz solver
// ---------------------------------------------------------------------------

namespace {

ScalarField solve_helmholtz_impl(const ScalarField& a, double b, const ScalarField& rhs, double tol,
                                 SolveReport* report) {
  const Grid& g = rhs.grid;
  require_same_grid(a.grid, g, "solve_helmholtz");
  if (b < 0.0) throw std::invalid_argument("solve_helmholtz: b must be nonnegative");
  for (double t : a.v)
    if (!(t > 0.0)) throw std::invalid_argument("solve_helmholtz: coefficient a must be positive");

  // diagonal of the operator a - b*lap
  std::vector<double> diag(g.count());
  for (int i = 0; i < g.nodes[0]; ++i)
    for (int j = 0; j < g.nodes[1]; ++j) {
      double d = a[g.idx(i, j)];
      for (int ax = 0; ax < g.dim; ++ax) {
        const double h = g.spacing(ax);
        d += 2.0 * b / (h * h);
      }
      diag[g.idx(i, j)] = d;
    }

  auto apply = [&](const ScalarField& x, ScalarField& out) {
    if (b != 0.0) {
      out = laplacian_neumann(x);
      for (int k = 0; k < out.size(); ++k) out[k] = a[k] * x[k] - b * out[k];
    } else {
      out = x;
      for (int k = 0; k < out.size(); ++k) out[k] = a[k] * x[k];
    }
  };

  ScalarField x(g, 0.0);
  SolveReport rep = conjugate_gradient(g, apply, diag, rhs, x, tol, 50 * g.count());
  if (report) *report = rep;
  if (!rep.converged) {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "solve_helmholtz: CG iteration cap exceeded, residual = %.3e",
                  rep.residual);
    throw SolverError(msg);
  }
  return x;
}

}  // namespace

ScalarField solve_helmholtz(const ScalarField& a, double b, const ScalarField& rhs, double tol,
                            SolveReport* report) {
  return solve_helmholtz_impl(a, b, rhs, tol, report);
}

ScalarField solve_helmholtz(double a, double b, const ScalarField& rhs, double tol,
                            SolveReport* report) {
  return solve_helmholtz_impl(ScalarField(rhs.grid, a), b, rhs, tol, report);
}

}  // namespace tmpf
