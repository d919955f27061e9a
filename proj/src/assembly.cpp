#include "vvs/assembly.hpp"

#include <cmath>
#include <stdexcept>

namespace vvs {

namespace {

struct Strain {  // symmetric 2x2 as (xx, yy, xy)
  double xx = 0, yy = 0, xy = 0;
};

inline double contract(const Strain& a, const Strain& b) {
  return a.xx * b.xx + a.yy * b.yy + 2.0 * a.xy * b.xy;
}

int default_viscous_degree(const FunctionSpace& V) { return 2 * V.k + 2; }

}  // namespace

void BlockDiagMatrix::factorize() {
  if (!chol.empty()) return;
  chol.reserve(blocks.size());
  for (const auto& b : blocks) {
    chol.emplace_back(b);
    if (chol.back().info() != Eigen::Success)
      throw std::runtime_error("block-diagonal matrix is not positive definite");
  }
}

void BlockDiagMatrix::apply(std::span<const double> x, std::span<double> y) const {
  const int m = block_size;
  for (std::size_t c = 0; c < blocks.size(); ++c) {
    Eigen::Map<const DenseVector> xi(x.data() + c * m, m);
    Eigen::Map<DenseVector> yi(y.data() + c * m, m);
    yi = blocks[c] * xi;
  }
}

void BlockDiagMatrix::apply_inverse(std::span<const double> x, std::span<double> y) const {
  if (chol.empty()) throw std::runtime_error("block-diagonal matrix not factorized");
  const int m = block_size;
  for (std::size_t c = 0; c < blocks.size(); ++c) {
    Eigen::Map<const DenseVector> xi(x.data() + c * m, m);
    Eigen::Map<DenseVector> yi(y.data() + c * m, m);
    yi = chol[c].solve(xi);
  }
}

CsrMatrix BlockDiagMatrix::to_csr() const {
  const int m = block_size;
  TripletBuilder t(n(), n());
  for (std::size_t c = 0; c < blocks.size(); ++c)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        t.add(static_cast<int>(c) * m + a, static_cast<int>(c) * m + b, blocks[c](a, b));
  return t.build();
}

CsrMatrix assemble_viscous_block(const FunctionSpace& V, const ViscosityModel& visc,
                                 int quad_degree) {
  const Mesh& mesh = *V.mesh;
  const int nb = V.element.n_basis;
  const int nd = V.dofs_per_cell;  // 2 * nb
  const QuadratureRule rule =
      quadrature(quad_degree > 0 ? quad_degree : default_viscous_degree(V));

  // reference basis data per quadrature point
  std::vector<std::vector<Vec2>> ref_grads(rule.size(), std::vector<Vec2>(nb));
  for (int q = 0; q < rule.size(); ++q) V.element.eval_grad(rule.points[q], ref_grads[q]);

  TripletBuilder trip(V.n_dofs, V.n_dofs);
  trip.reserve(static_cast<std::size_t>(mesh.n_cells()) * nd * nd);

  std::vector<Strain> eps(nd);
  std::vector<double> loc(static_cast<std::size_t>(nd) * nd);
  std::vector<double> t_dot(nd), e_dot(nd);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const AffineMap& map = mesh.maps[c];
    const double detj = map.det();
    std::fill(loc.begin(), loc.end(), 0.0);

    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 x = map.apply(rule.points[q]);
      const ViscositySample s = visc.sample(x);
      if (!(s.mu > 0.0))
        throw std::runtime_error("non-positive viscosity during assembly");
      const double wq = rule.weights[q] * detj;

      for (int l = 0; l < nb; ++l) {
        const Vec2 g = map.map_gradient(ref_grads[q][l]);
        eps[2 * l] = {g.x, 0.0, 0.5 * g.y};      // x component
        eps[2 * l + 1] = {0.0, g.y, 0.5 * g.x};  // y component
      }

      if (s.anisotropic) {
        const Strain E{s.exx, s.eyy, s.exy}, T{s.txx, s.tyy, s.txy};
        for (int j = 0; j < nd; ++j) {
          t_dot[j] = contract(T, eps[j]);
          e_dot[j] = contract(E, eps[j]);
        }
        for (int i = 0; i < nd; ++i)
          for (int j = i; j < nd; ++j) {
            const double corr = 0.5 * s.scale * (t_dot[j] * e_dot[i] + e_dot[j] * t_dot[i]);
            loc[static_cast<std::size_t>(i) * nd + j] +=
                wq * 2.0 * s.mu * (contract(eps[i], eps[j]) - corr);
          }
      } else {
        for (int i = 0; i < nd; ++i)
          for (int j = i; j < nd; ++j)
            loc[static_cast<std::size_t>(i) * nd + j] +=
                wq * 2.0 * s.mu * contract(eps[i], eps[j]);
      }
    }

    for (int i = 0; i < nd; ++i) {
      const int gi = V.dof(c, i);
      for (int j = i; j < nd; ++j) {
        const double v = loc[static_cast<std::size_t>(i) * nd + j];
        trip.add(gi, V.dof(c, j), v);
        if (j != i) trip.add(V.dof(c, j), gi, v);
      }
    }
  }
  return trip.build();
}

CsrMatrix assemble_divergence(const FunctionSpace& V, const FunctionSpace& Q) {
  if (V.mesh != Q.mesh)
    throw std::invalid_argument("divergence: spaces live on different meshes");
  const Mesh& mesh = *V.mesh;
  const int nbv = V.element.n_basis;
  const int nbq = Q.element.n_basis;
  const QuadratureRule rule = quadrature(2 * V.k);

  std::vector<std::vector<Vec2>> ref_grads(rule.size(), std::vector<Vec2>(nbv));
  std::vector<std::vector<double>> qvals(rule.size(), std::vector<double>(nbq));
  for (int q = 0; q < rule.size(); ++q) {
    V.element.eval_grad(rule.points[q], ref_grads[q]);
    Q.element.eval(rule.points[q], qvals[q]);
  }

  TripletBuilder trip(Q.n_dofs, V.n_dofs);
  trip.reserve(static_cast<std::size_t>(mesh.n_cells()) * nbq * 2 * nbv);
  std::vector<double> loc(static_cast<std::size_t>(nbq) * 2 * nbv);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const AffineMap& map = mesh.maps[c];
    const double detj = map.det();
    std::fill(loc.begin(), loc.end(), 0.0);
    for (int q = 0; q < rule.size(); ++q) {
      const double wq = rule.weights[q] * detj;
      for (int l = 0; l < nbv; ++l) {
        const Vec2 g = map.map_gradient(ref_grads[q][l]);
        for (int a = 0; a < nbq; ++a) {
          loc[(static_cast<std::size_t>(a) * 2 * nbv) + 2 * l] -= wq * qvals[q][a] * g.x;
          loc[(static_cast<std::size_t>(a) * 2 * nbv) + 2 * l + 1] -= wq * qvals[q][a] * g.y;
        }
      }
    }
    for (int a = 0; a < nbq; ++a)
      for (int j = 0; j < 2 * nbv; ++j)
        trip.add(Q.dof(c, a), V.dof(c, j), loc[static_cast<std::size_t>(a) * 2 * nbv + j]);
  }
  return trip.build();
}

BlockDiagMatrix assemble_pressure_mass(const FunctionSpace& Q,
                                       const ViscosityModel* inverse_weight) {
  const Mesh& mesh = *Q.mesh;
  const int m = Q.element.n_basis;
  const QuadratureRule rule = quadrature(2 * Q.k);

  std::vector<std::vector<double>> qvals(rule.size(), std::vector<double>(m));
  for (int q = 0; q < rule.size(); ++q) Q.element.eval(rule.points[q], qvals[q]);

  BlockDiagMatrix M;
  M.block_size = m;
  M.blocks.assign(mesh.n_cells(), DenseMatrix::Zero(m, m));
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const AffineMap& map = mesh.maps[c];
    const double detj = map.det();
    for (int q = 0; q < rule.size(); ++q) {
      double w = rule.weights[q] * detj;
      if (inverse_weight) {
        const double mu = inverse_weight->scalar(map.apply(rule.points[q]));
        if (!(mu > 0.0)) throw std::runtime_error("non-positive mass-matrix weight");
        w /= mu;
      }
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) M.blocks[c](a, b) += w * qvals[q][a] * qvals[q][b];
    }
  }
  M.factorize();
  return M;
}

CsrMatrix assemble_div_penalty(const CsrMatrix& B, const BlockDiagMatrix& W,
                               const FunctionSpace& Q) {
  const int m = Q.dofs_per_cell;
  const int n_cells = Q.mesh->n_cells();
  TripletBuilder trip(B.ncols, B.ncols);

  for (int c = 0; c < n_cells; ++c) {
    // union of velocity dofs touched by this cell's pressure rows
    std::vector<int> cols;
    for (int a = 0; a < m; ++a) {
      const int row = c * m + a;
      for (int p = B.row_ptr[row]; p < B.row_ptr[row + 1]; ++p)
        cols.push_back(B.col_idx[p]);
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    if (cols.empty()) continue;
    const int nl = static_cast<int>(cols.size());

    DenseMatrix Bloc = DenseMatrix::Zero(m, nl);
    for (int a = 0; a < m; ++a) {
      const int row = c * m + a;
      for (int p = B.row_ptr[row]; p < B.row_ptr[row + 1]; ++p) {
        const auto it = std::lower_bound(cols.begin(), cols.end(), B.col_idx[p]);
        Bloc(a, static_cast<int>(it - cols.begin())) = B.vals[p];
      }
    }
    const DenseMatrix local = Bloc.transpose() * W.chol[c].solve(Bloc);
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) trip.add(cols[i], cols[j], local(i, j));
  }
  return trip.build();
}

CsrMatrix assemble_augmented(const CsrMatrix& A, const CsrMatrix& penalty, double gamma) {
  if (gamma < 0) throw std::invalid_argument("augmentation parameter must be >= 0");
  if (gamma == 0.0) return A;
  if (A.nrows != penalty.nrows || A.ncols != penalty.ncols)
    throw std::invalid_argument("augmentation: shape mismatch");

  CsrMatrix out;
  out.nrows = A.nrows;
  out.ncols = A.ncols;
  out.row_ptr.assign(A.nrows + 1, 0);
  for (int i = 0; i < A.nrows; ++i) {
    int pa = A.row_ptr[i], pb = penalty.row_ptr[i];
    const int ea = A.row_ptr[i + 1], eb = penalty.row_ptr[i + 1];
    while (pa < ea || pb < eb) {
      int col;
      double v = 0.0;
      if (pb >= eb || (pa < ea && A.col_idx[pa] <= penalty.col_idx[pb])) {
        col = A.col_idx[pa];
        v = A.vals[pa++];
        if (pb < eb && penalty.col_idx[pb] == col) v += gamma * penalty.vals[pb++];
      } else {
        col = penalty.col_idx[pb];
        v = gamma * penalty.vals[pb++];
      }
      out.col_idx.push_back(col);
      out.vals.push_back(v);
      ++out.row_ptr[i + 1];
    }
  }
  for (int i = 0; i < A.nrows; ++i) out.row_ptr[i + 1] += out.row_ptr[i];
  return out;
}

std::vector<double> augmented_rhs(std::span<const double> r1, std::span<const double> r2,
                                  const CsrMatrix& B, const BlockDiagMatrix& W,
                                  double gamma) {
  std::vector<double> out(r1.begin(), r1.end());
  if (gamma == 0.0) return out;
  std::vector<double> t(r2.size());
  W.apply_inverse(r2, t);
  // out += gamma * B^T t
  for (int i = 0; i < B.nrows; ++i)
    for (int p = B.row_ptr[i]; p < B.row_ptr[i + 1]; ++p)
      out[B.col_idx[p]] += gamma * B.vals[p] * t[i];
  return out;
}

std::vector<double> assemble_load_vector(const FunctionSpace& V,
                                         const std::function<Vec2(Vec2)>& f,
                                         int quad_degree) {
  const Mesh& mesh = *V.mesh;
  const int nb = V.element.n_basis;
  const QuadratureRule rule =
      quadrature(quad_degree > 0 ? quad_degree : default_viscous_degree(V));
  std::vector<std::vector<double>> vals(rule.size(), std::vector<double>(nb));
  for (int q = 0; q < rule.size(); ++q) V.element.eval(rule.points[q], vals[q]);

  std::vector<double> out(V.n_dofs, 0.0);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const AffineMap& map = mesh.maps[c];
    const double detj = map.det();
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 fx = f(map.apply(rule.points[q]));
      const double wq = rule.weights[q] * detj;
      for (int l = 0; l < nb; ++l) {
        out[V.dof(c, 2 * l)] += wq * fx.x * vals[q][l];
        out[V.dof(c, 2 * l + 1)] += wq * fx.y * vals[q][l];
      }
    }
  }
  return out;
}

std::vector<double> viscous_residual(const FunctionSpace& V, const ViscosityModel& visc,
                                     std::span<const double> u, int quad_degree) {
  const Mesh& mesh = *V.mesh;
  const int nb = V.element.n_basis;
  const QuadratureRule rule =
      quadrature(quad_degree > 0 ? quad_degree : default_viscous_degree(V));
  std::vector<std::vector<Vec2>> ref_grads(rule.size(), std::vector<Vec2>(nb));
  for (int q = 0; q < rule.size(); ++q) V.element.eval_grad(rule.points[q], ref_grads[q]);

  std::vector<double> out(V.n_dofs, 0.0);
  std::vector<Vec2> g(nb);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const AffineMap& map = mesh.maps[c];
    const double detj = map.det();
    for (int q = 0; q < rule.size(); ++q) {
      for (int l = 0; l < nb; ++l) g[l] = map.map_gradient(ref_grads[q][l]);
      Strain e;  // eps(u) at the quadrature point
      for (int l = 0; l < nb; ++l) {
        const double ux = u[V.dof(c, 2 * l)], uy = u[V.dof(c, 2 * l + 1)];
        e.xx += ux * g[l].x;
        e.yy += uy * g[l].y;
        e.xy += 0.5 * (ux * g[l].y + uy * g[l].x);
      }
      const double mu = visc.scalar(map.apply(rule.points[q]));
      const double wq = rule.weights[q] * detj * 2.0 * mu;
      for (int l = 0; l < nb; ++l) {
        const Strain ex{g[l].x, 0.0, 0.5 * g[l].y};
        const Strain ey{0.0, g[l].y, 0.5 * g[l].x};
        out[V.dof(c, 2 * l)] += wq * contract(e, ex);
        out[V.dof(c, 2 * l + 1)] += wq * contract(e, ey);
      }
    }
  }
  return out;
}

void symmetric_dirichlet_eliminate(CsrMatrix& A, const FunctionSpace& V) {
  for (int i = 0; i < A.nrows; ++i) {
    if (V.is_dirichlet[i]) {
      A.set_unit_row(i, 1.0);
      continue;
    }
    for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
      if (V.is_dirichlet[A.col_idx[p]]) A.vals[p] = 0.0;
  }
}

void eliminate_dirichlet_columns(CsrMatrix& B, const FunctionSpace& V) {
  for (std::size_t p = 0; p < B.col_idx.size(); ++p)
    if (V.is_dirichlet[B.col_idx[p]]) B.vals[p] = 0.0;
}

StokesBlocks assemble_stokes(const FunctionSpace& V, const FunctionSpace& Q,
                             const ViscosityModel& visc,
                             const std::function<Vec2(Vec2)>& force, double gamma,
                             WChoice w) {
  StokesBlocks blocks;
  blocks.V = &V;
  blocks.Q = &Q;
  blocks.gamma = gamma;
  blocks.w_choice = w;

  CsrMatrix A0 = assemble_viscous_block(V, visc);
  CsrMatrix B0 = assemble_divergence(V, Q);
  blocks.Mp = assemble_pressure_mass(Q);
  blocks.Mp_invvisc = assemble_pressure_mass(Q, &visc);

  blocks.bc_values.assign(V.n_dofs, 0.0);
  for (int d = 0; d < V.n_dofs; ++d)
    if (V.is_dirichlet[d]) blocks.bc_values[d] = V.dirichlet_value[d];

  blocks.rhs_u = assemble_load_vector(V, force);
  A0.spmv_add(blocks.bc_values, blocks.rhs_u, -1.0);
  for (int d = 0; d < V.n_dofs; ++d)
    if (V.is_dirichlet[d]) blocks.rhs_u[d] = 0.0;

  blocks.rhs_p.assign(Q.n_dofs, 0.0);
  B0.spmv_add(blocks.bc_values, blocks.rhs_p, -1.0);

  symmetric_dirichlet_eliminate(A0, V);
  eliminate_dirichlet_columns(B0, V);
  blocks.A = std::move(A0);
  blocks.B = std::move(B0);
  blocks.Bt = blocks.B.transposed();

  const BlockDiagMatrix& W = w == WChoice::Mp ? blocks.Mp : blocks.Mp_invvisc;
  blocks.div_penalty = assemble_div_penalty(blocks.B, W, Q);
  blocks.A_gamma = assemble_augmented(blocks.A, blocks.div_penalty, gamma);
  blocks.rhs_u_aug = augmented_rhs(blocks.rhs_u, blocks.rhs_p, blocks.B, W, gamma);
  return blocks;
}

}  // namespace vvs
