#include "vvs/elements.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vvs {

void gauss_legendre(int n, std::vector<double>& pts, std::vector<double>& wts) {
  pts.assign(n, 0.0);
  wts.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration from the Chebyshev estimate
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    pts[i] = -x;
    pts[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    wts[i] = w;
    wts[n - 1 - i] = w;
  }
  if (n % 2 == 1) pts[n / 2] = 0.0;
}

QuadratureRule quadrature(int degree) {
  if (degree < 0) throw std::invalid_argument("quadrature degree must be >= 0");
  const int n = degree / 2 + 1;  // exact to 2n-1 >= degree
  std::vector<double> p, w;
  gauss_legendre(n, p, w);
  QuadratureRule rule;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({p[i], p[j]});
      rule.weights.push_back(w[i] * w[j]);
    }
  return rule;
}

namespace {

double lagrange_value(const std::vector<double>& nodes, int i, double x) {
  double v = 1.0;
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (static_cast<int>(j) != i) v *= (x - nodes[j]) / (nodes[i] - nodes[j]);
  return v;
}

double lagrange_deriv(const std::vector<double>& nodes, int i, double x) {
  double sum = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    if (static_cast<int>(m) == i) continue;
    double term = 1.0 / (nodes[i] - nodes[m]);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (static_cast<int>(j) == i || j == m) continue;
      term *= (x - nodes[j]) / (nodes[i] - nodes[j]);
    }
    sum += term;
  }
  return sum;
}

std::vector<double> equispaced_nodes(int k) {
  std::vector<double> n(k + 1);
  for (int i = 0; i <= k; ++i) n[i] = -1.0 + 2.0 * i / k;
  return n;
}

// total-degree monomial exponents, graded order, constant first
std::vector<std::pair<int, int>> monomial_exponents(int degree) {
  std::vector<std::pair<int, int>> e;
  for (int t = 0; t <= degree; ++t)
    for (int a = t; a >= 0; --a) e.push_back({a, t - a});
  return e;
}

}  // namespace

void ReferenceElement::eval(Vec2 xhat, std::span<double> values) const {
  if (kind == ElemKind::QkVector) {
    const auto n1d = equispaced_nodes(degree);
    for (int b = 0; b <= degree; ++b)
      for (int a = 0; a <= degree; ++a)
        values[b * (degree + 1) + a] =
            lagrange_value(n1d, a, xhat.x) * lagrange_value(n1d, b, xhat.y);
  } else {
    const auto exps = monomial_exponents(degree);
    for (std::size_t i = 0; i < exps.size(); ++i)
      values[i] = std::pow(xhat.x, exps[i].first) * std::pow(xhat.y, exps[i].second);
  }
}

void ReferenceElement::eval_grad(Vec2 xhat, std::span<Vec2> grads) const {
  if (kind == ElemKind::QkVector) {
    const auto n1d = equispaced_nodes(degree);
    for (int b = 0; b <= degree; ++b)
      for (int a = 0; a <= degree; ++a) {
        const double va = lagrange_value(n1d, a, xhat.x);
        const double vb = lagrange_value(n1d, b, xhat.y);
        grads[b * (degree + 1) + a] = {lagrange_deriv(n1d, a, xhat.x) * vb,
                                       va * lagrange_deriv(n1d, b, xhat.y)};
      }
  } else {
    const auto exps = monomial_exponents(degree);
    for (std::size_t i = 0; i < exps.size(); ++i) {
      const auto [a, b] = exps[i];
      grads[i] = {a == 0 ? 0.0 : a * std::pow(xhat.x, a - 1) * std::pow(xhat.y, b),
                  b == 0 ? 0.0 : b * std::pow(xhat.x, a) * std::pow(xhat.y, b - 1)};
    }
  }
}

ReferenceElement make_qk_element(int k) {
  if (k < 1) throw std::invalid_argument("Qk needs k >= 1");
  ReferenceElement e;
  e.kind = ElemKind::QkVector;
  e.degree = k;
  e.n_basis = (k + 1) * (k + 1);
  const auto n1d = equispaced_nodes(k);
  e.nodes.reserve(e.n_basis);
  for (int b = 0; b <= k; ++b)
    for (int a = 0; a <= k; ++a) e.nodes.push_back({n1d[a], n1d[b]});
  return e;
}

ReferenceElement make_pk_disc_element(int degree) {
  if (degree < 0) throw std::invalid_argument("P disc needs degree >= 0");
  ReferenceElement e;
  e.kind = ElemKind::PkDiscScalar;
  e.degree = degree;
  e.n_basis = (degree + 1) * (degree + 2) / 2;
  return e;
}

int FunctionSpace::n_free_dofs() const {
  int n = 0;
  for (int d = 0; d < n_dofs; ++d)
    if (is_dirichlet.empty() || !is_dirichlet[d]) ++n;
  return n;
}

std::vector<std::vector<int>> FunctionSpace::dof_supports() const {
  std::vector<std::vector<int>> s(n_dofs);
  for (int c = 0; c < mesh->n_cells(); ++c)
    for (int l = 0; l < dofs_per_cell; ++l) {
      auto& list = s[dof(c, l)];
      if (list.empty() || list.back() != c) list.push_back(c);
    }
  return s;
}

FunctionSpace make_velocity_space(const Mesh& mesh, int k) {
  if (k < 2) throw std::invalid_argument("velocity space needs k >= 2");
  FunctionSpace V;
  V.mesh = &mesh;
  V.kind = ElemKind::QkVector;
  V.k = k;
  V.element = make_qk_element(k);
  V.nodes_x = k * mesh.nx + 1;
  V.nodes_y = k * mesh.ny + 1;
  const int n_nodes = V.nodes_x * V.nodes_y;
  V.n_dofs = 2 * n_nodes;
  V.dofs_per_cell = 2 * V.element.n_basis;
  V.dof_map.resize(mesh.n_cells() * V.dofs_per_cell);
  for (int cj = 0; cj < mesh.ny; ++cj)
    for (int ci = 0; ci < mesh.nx; ++ci) {
      const int c = mesh.cell_index(ci, cj);
      for (int b = 0; b <= k; ++b)
        for (int a = 0; a <= k; ++a) {
          const int node = V.node_index(k * ci + a, k * cj + b);
          const int local = b * (k + 1) + a;
          V.dof_map[c * V.dofs_per_cell + 2 * local] = 2 * node;
          V.dof_map[c * V.dofs_per_cell + 2 * local + 1] = 2 * node + 1;
        }
    }
  V.node_coords.resize(n_nodes);
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int l = 0; l < V.element.n_basis; ++l) {
      const int node = V.dof(c, 2 * l) / 2;
      V.node_coords[node] = mesh.maps[c].apply(V.element.nodes[l]);
    }
  V.is_dirichlet.assign(V.n_dofs, 0);
  V.dirichlet_value.assign(V.n_dofs, 0.0);
  return V;
}

FunctionSpace make_pressure_space(const Mesh& mesh, int k) {
  if (k < 2) throw std::invalid_argument("pressure space follows velocity k >= 2");
  FunctionSpace Q;
  Q.mesh = &mesh;
  Q.kind = ElemKind::PkDiscScalar;
  Q.k = k;
  Q.element = make_pk_disc_element(k - 1);
  Q.dofs_per_cell = Q.element.n_basis;
  Q.n_dofs = mesh.n_cells() * Q.dofs_per_cell;
  Q.dof_map.resize(Q.n_dofs);
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int l = 0; l < Q.dofs_per_cell; ++l)
      Q.dof_map[c * Q.dofs_per_cell + l] = c * Q.dofs_per_cell + l;
  Q.mean_constraint = true;
  return Q;
}

namespace {

bool node_on_side(const FunctionSpace& V, int i, int j, Side s) {
  switch (s) {
    case Side::Left: return i == 0;
    case Side::Right: return i == V.nodes_x - 1;
    case Side::Bottom: return j == 0;
    case Side::Top: return j == V.nodes_y - 1;
  }
  return false;
}

}  // namespace

void set_dirichlet_all_boundary(FunctionSpace& V, const std::function<Vec2(Vec2)>& value) {
  for (int j = 0; j < V.nodes_y; ++j)
    for (int i = 0; i < V.nodes_x; ++i) {
      if (i != 0 && i != V.nodes_x - 1 && j != 0 && j != V.nodes_y - 1) continue;
      const int node = V.node_index(i, j);
      const Vec2 g = value(V.node_coords[node]);
      V.is_dirichlet[2 * node] = 1;
      V.dirichlet_value[2 * node] = g.x;
      V.is_dirichlet[2 * node + 1] = 1;
      V.dirichlet_value[2 * node + 1] = g.y;
    }
}

void set_dirichlet_component_on_side(FunctionSpace& V, Side side, int comp,
                                     const std::function<double(Vec2)>& value) {
  for (int j = 0; j < V.nodes_y; ++j)
    for (int i = 0; i < V.nodes_x; ++i) {
      if (!node_on_side(V, i, j, side)) continue;
      const int node = V.node_index(i, j);
      V.is_dirichlet[2 * node + comp] = 1;
      V.dirichlet_value[2 * node + comp] = value(V.node_coords[node]);
    }
}

VelocityDeriv evaluate_velocity(const FunctionSpace& V, std::span<const double> coeffs,
                                int cell, Vec2 xhat) {
  const int nb = V.element.n_basis;
  std::vector<double> vals(nb);
  std::vector<Vec2> grads(nb);
  V.element.eval(xhat, vals);
  V.element.eval_grad(xhat, grads);
  const AffineMap& map = V.mesh->maps[cell];
  VelocityDeriv out;
  for (int l = 0; l < nb; ++l) {
    const double ux = coeffs[V.dof(cell, 2 * l)];
    const double uy = coeffs[V.dof(cell, 2 * l + 1)];
    const Vec2 g = map.map_gradient(grads[l]);
    out.value.x += ux * vals[l];
    out.value.y += uy * vals[l];
    out.du_dx += ux * g.x;
    out.du_dy += ux * g.y;
    out.dv_dx += uy * g.x;
    out.dv_dy += uy * g.y;
  }
  return out;
}

}  // namespace vvs
