#include "vvs/mesh.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "vvs/elements.hpp"

namespace vvs {

namespace {

AffineMap cell_affine_map(const Mesh& m, int c) {
  const auto& v = m.cells[c];
  const Vec2 p0 = m.vertices[v[0]], p1 = m.vertices[v[1]], p2 = m.vertices[v[2]],
             p3 = m.vertices[v[3]];
  AffineMap map;
  map.j00 = 0.5 * (p1.x - p0.x);
  map.j10 = 0.5 * (p1.y - p0.y);
  map.j01 = 0.5 * (p3.x - p0.x);
  map.j11 = 0.5 * (p3.y - p0.y);
  map.origin = {0.5 * (p0.x + p2.x), 0.5 * (p0.y + p2.y)};
  if (map.det() <= 0.0)
    throw std::runtime_error("cell is degenerate or negatively oriented");
  return map;
}

void finalize(Mesh& m) {
  m.maps.resize(m.cells.size());
  for (int c = 0; c < m.n_cells(); ++c) m.maps[c] = cell_affine_map(m, c);
  m.vertex_on_boundary.assign(m.vertices.size(), 0);
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i)
      if (i == 0 || i == m.nx || j == 0 || j == m.ny)
        m.vertex_on_boundary[m.vertex_index(i, j)] = 1;
}

}  // namespace

int Mesh::locate_cell(Vec2 p) const {
  auto find = [](const std::vector<double>& g, double v) {
    auto it = std::upper_bound(g.begin(), g.end(), v);
    int i = static_cast<int>(it - g.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(g.size()) - 2);
  };
  return cell_index(find(xs, p.x), find(ys, p.y));
}

Mesh build_tensor_mesh(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() < 2 || ys.size() < 2)
    throw std::invalid_argument("tensor mesh needs at least one cell per direction");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] <= xs[i - 1]) throw std::invalid_argument("grid lines must increase");
  for (std::size_t j = 1; j < ys.size(); ++j)
    if (ys[j] <= ys[j - 1]) throw std::invalid_argument("grid lines must increase");

  Mesh m;
  m.nx = static_cast<int>(xs.size()) - 1;
  m.ny = static_cast<int>(ys.size()) - 1;
  m.xs = std::move(xs);
  m.ys = std::move(ys);
  m.vertices.reserve((m.nx + 1) * (m.ny + 1));
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) m.vertices.push_back({m.xs[i], m.ys[j]});
  m.cells.reserve(m.nx * m.ny);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i)
      m.cells.push_back({m.vertex_index(i, j), m.vertex_index(i + 1, j),
                         m.vertex_index(i + 1, j + 1), m.vertex_index(i, j + 1)});
  finalize(m);
  return m;
}

Mesh build_rect_mesh(const Rect& domain, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("cell counts must be positive");
  std::vector<double> xs(nx + 1), ys(ny + 1);
  for (int i = 0; i <= nx; ++i)
    xs[i] = (i == nx) ? domain.x1 : domain.x0 + i * (domain.x1 - domain.x0) / nx;
  for (int j = 0; j <= ny; ++j)
    ys[j] = (j == ny) ? domain.y1 : domain.y0 + j * (domain.y1 - domain.y0) / ny;
  return build_tensor_mesh(std::move(xs), std::move(ys));
}

RefinedMesh refine(const Mesh& mesh) {
  std::vector<double> xs(2 * mesh.nx + 1), ys(2 * mesh.ny + 1);
  for (int i = 0; i <= mesh.nx; ++i) xs[2 * i] = mesh.xs[i];
  for (int i = 0; i < mesh.nx; ++i) xs[2 * i + 1] = 0.5 * (mesh.xs[i] + mesh.xs[i + 1]);
  for (int j = 0; j <= mesh.ny; ++j) ys[2 * j] = mesh.ys[j];
  for (int j = 0; j < mesh.ny; ++j) ys[2 * j + 1] = 0.5 * (mesh.ys[j] + mesh.ys[j + 1]);

  RefinedMesh out;
  out.mesh = build_tensor_mesh(std::move(xs), std::move(ys));
  out.child_map.resize(mesh.n_cells());
  for (int j = 0; j < mesh.ny; ++j)
    for (int i = 0; i < mesh.nx; ++i)
      out.child_map[mesh.cell_index(i, j)] = {
          out.mesh.cell_index(2 * i, 2 * j), out.mesh.cell_index(2 * i + 1, 2 * j),
          out.mesh.cell_index(2 * i, 2 * j + 1),
          out.mesh.cell_index(2 * i + 1, 2 * j + 1)};
  out.vertex_embedding.resize(mesh.n_vertices());
  for (int j = 0; j <= mesh.ny; ++j)
    for (int i = 0; i <= mesh.nx; ++i)
      out.vertex_embedding[mesh.vertex_index(i, j)] = out.mesh.vertex_index(2 * i, 2 * j);
  return out;
}

MeshHierarchy build_hierarchy(Mesh coarse, int n_levels) {
  if (n_levels < 1) throw std::invalid_argument("need at least one level");
  MeshHierarchy h;
  h.levels.push_back(std::move(coarse));
  for (int l = 1; l < n_levels; ++l) {
    RefinedMesh r = refine(h.levels.back());
    h.levels.push_back(std::move(r.mesh));
    h.child_maps.push_back(std::move(r.child_map));
    h.vertex_embeddings.push_back(std::move(r.vertex_embedding));
  }
  return h;
}

std::vector<StarPatch> vertex_stars(const Mesh& mesh, const FunctionSpace& space) {
  if (space.kind != ElemKind::QkVector)
    throw std::invalid_argument("vertex stars are built on a velocity space");
  if (space.k < 2)
    throw std::invalid_argument("star decomposition needs k >= 2");

  // cells around each vertex
  std::vector<std::vector<int>> vertex_cells(mesh.n_vertices());
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int v : mesh.cells[c]) vertex_cells[v].push_back(c);

  const auto supports = space.dof_supports();

  std::vector<StarPatch> patches(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    patches[v].vertex = v;
    patches[v].cells = vertex_cells[v];
  }

  // a dof joins the patch iff all cells of its support are in the star
  std::vector<int> cell_count(mesh.n_cells(), 0);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    for (int c : patches[v].cells) cell_count[c] = 1;
    std::vector<char> seen(space.n_dofs, 0);
    for (int c : patches[v].cells) {
      for (int l = 0; l < space.dofs_per_cell; ++l) {
        const int d = space.dof(c, l);
        if (seen[d] || space.is_dirichlet[d]) continue;
        seen[d] = 1;
        bool interior = true;
        for (int sc : supports[d])
          if (!cell_count[sc]) {
            interior = false;
            break;
          }
        if (interior) patches[v].dofs.push_back(d);
      }
    }
    std::sort(patches[v].dofs.begin(), patches[v].dofs.end());
    for (int c : patches[v].cells) cell_count[c] = 0;
  }
  return patches;
}

void dump_mesh(const Mesh& mesh, std::ostream& os) {
  for (const auto& v : mesh.vertices) os << "v " << v.x << " " << v.y << "\n";
  for (const auto& c : mesh.cells)
    os << "c " << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
}

}  // namespace vvs
