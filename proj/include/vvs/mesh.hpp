#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "vvs/geometry.hpp"

namespace vvs {

struct FunctionSpace;

/// Structured tensor-product quadrilateral mesh. Cells and vertices are
/// numbered lexicographically by (y, x) so that iteration order, and hence
/// solver iteration counts, are reproducible.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 4>> cells;  // counterclockwise: SW, SE, NE, NW
  std::vector<AffineMap> maps;
  std::vector<std::uint8_t> vertex_on_boundary;

  // tensor-grid structure
  int nx = 0, ny = 0;
  std::vector<double> xs, ys;  // grid lines, sizes nx+1 and ny+1

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int vertex_index(int i, int j) const { return j * (nx + 1) + i; }
  int cell_index(int i, int j) const { return j * nx + i; }

  /// Cell containing the point (clamped to the grid); tensor-grid bisection.
  int locate_cell(Vec2 p) const;
};

Mesh build_rect_mesh(const Rect& domain, int nx, int ny);
Mesh build_tensor_mesh(std::vector<double> xs, std::vector<double> ys);

struct RefinedMesh {
  Mesh mesh;
  std::vector<std::array<int, 4>> child_map;  // per coarse cell
  std::vector<int> vertex_embedding;          // coarse vertex -> fine vertex
};

/// Uniform 1->4 refinement. Coarse vertex coordinates are copied bit-exactly;
/// new vertices are midpoints of parent grid lines.
RefinedMesh refine(const Mesh& mesh);

struct MeshHierarchy {
  std::vector<Mesh> levels;  // coarsest first
  std::vector<std::vector<std::array<int, 4>>> child_maps;  // [l]: level l -> l+1
  std::vector<std::vector<int>> vertex_embeddings;

  int n_levels() const { return static_cast<int>(levels.size()); }
  const Mesh& finest() const { return levels.back(); }
};

MeshHierarchy build_hierarchy(Mesh coarse, int n_levels);

/// Vertex star patch: the cells around one vertex together with the velocity
/// dofs whose basis support lies inside the star.
struct StarPatch {
  int vertex = -1;
  std::vector<int> cells;
  std::vector<int> dofs;  // interior, non-Dirichlet velocity dofs
};

std::vector<StarPatch> vertex_stars(const Mesh& mesh, const FunctionSpace& space);

/// Plain-text dump: one line `v x y` per vertex, `c i0 i1 i2 i3` per cell.
void dump_mesh(const Mesh& mesh, std::ostream& os);

}  // namespace vvs
