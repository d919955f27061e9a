#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vvs/geometry.hpp"
#include "vvs/mesh.hpp"

namespace vvs {

/// Tensor-product Gauss-Legendre rule on (-1,1)^2, exact for polynomials of
/// the requested total degree in each variable.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

QuadratureRule quadrature(int degree);

/// Gauss-Legendre nodes/weights on (-1,1).
void gauss_legendre(int n, std::vector<double>& pts, std::vector<double>& wts);

enum class ElemKind { QkVector, PkDiscScalar };

/// Scalar reference element: nodal Qk on equispaced tensor nodes, or modal
/// total-degree monomials for the discontinuous pressure.
struct ReferenceElement {
  ElemKind kind;
  int degree = 0;       // Qk: k;  pressure: k-1
  int n_basis = 0;      // scalar basis functions per cell
  std::vector<Vec2> nodes;  // Qk only

  void eval(Vec2 xhat, std::span<double> values) const;
  void eval_grad(Vec2 xhat, std::span<Vec2> grads) const;
};

ReferenceElement make_qk_element(int k);
ReferenceElement make_pk_disc_element(int degree);

/// Global finite element space on a mesh. Velocity spaces carry two dofs per
/// scalar node (x component first); pressure dofs are cell-local.
struct FunctionSpace {
  const Mesh* mesh = nullptr;
  ReferenceElement element;
  ElemKind kind = ElemKind::QkVector;
  int k = 0;  // velocity degree; pressure space of degree k-1 stores the same k

  int n_dofs = 0;
  int dofs_per_cell = 0;
  std::vector<int> dof_map;  // n_cells * dofs_per_cell

  // velocity only
  int nodes_x = 0, nodes_y = 0;           // scalar node grid
  std::vector<Vec2> node_coords;          // per scalar node
  std::vector<std::uint8_t> is_dirichlet; // per dof
  std::vector<double> dirichlet_value;    // per dof

  // pressure only
  bool mean_constraint = false;

  int dof(int cell, int local) const { return dof_map[cell * dofs_per_cell + local]; }
  int n_free_dofs() const;
  int node_index(int i, int j) const { return j * nodes_x + i; }

  /// Cells sharing each velocity dof (the support of its basis function).
  std::vector<std::vector<int>> dof_supports() const;
};

FunctionSpace make_velocity_space(const Mesh& mesh, int k);
FunctionSpace make_pressure_space(const Mesh& mesh, int k);

enum class Side { Left, Right, Bottom, Top };

void set_dirichlet_all_boundary(FunctionSpace& V,
                                const std::function<Vec2(Vec2)>& value);
void set_dirichlet_component_on_side(FunctionSpace& V, Side side, int comp,
                                     const std::function<double(Vec2)>& value);

/// Evaluate a velocity field (coefficients on V) at a reference point of a
/// cell; returns value and physical gradient (column j = d u_i / d x_j).
struct VelocityDeriv {
  Vec2 value;
  double du_dx = 0, du_dy = 0, dv_dx = 0, dv_dy = 0;
};
VelocityDeriv evaluate_velocity(const FunctionSpace& V,
                                std::span<const double> coeffs, int cell,
                                Vec2 xhat);

}  // namespace vvs
