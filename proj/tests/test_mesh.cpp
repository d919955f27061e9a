#include <set>
#include <stdexcept>

#include "doctest.h"
#include "vvs/elements.hpp"
#include "vvs/mesh.hpp"

using namespace vvs;

namespace {
const Rect kUnit{0, 0, 1, 1};
}

TEST_SUITE("mesh") {
  TEST_CASE("single cell") {
    const Mesh m = build_rect_mesh(kUnit, 1, 1);
    CHECK(m.n_cells() == 1);
    CHECK(m.n_vertices() == 4);
    for (int v = 0; v < 4; ++v) CHECK(m.vertex_on_boundary[v] == 1);
  }

  TEST_CASE("2x2 counts") {
    const Mesh m = build_rect_mesh(kUnit, 2, 2);
    CHECK(m.n_cells() == 4);
    CHECK(m.n_vertices() == 9);
    int interior = 0;
    for (auto b : m.vertex_on_boundary)
      if (!b) ++interior;
    CHECK(interior == 1);
  }

  TEST_CASE("3x2 counts by enumeration") {
    const Mesh m = build_rect_mesh(kUnit, 3, 2);
    CHECK(m.n_cells() == 6);
    CHECK(m.n_vertices() == (3 + 1) * (2 + 1));
    int interior = 0;
    for (auto b : m.vertex_on_boundary)
      if (!b) ++interior;
    CHECK(interior == 2);
  }

  TEST_CASE("invalid counts rejected") {
    CHECK_THROWS_AS(build_rect_mesh(kUnit, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_rect_mesh(kUnit, 2, -1), std::invalid_argument);
  }

  TEST_CASE("refinement counts and nestedness") {
    const Mesh m1 = build_rect_mesh(kUnit, 1, 1);
    const RefinedMesh r1 = refine(m1);
    CHECK(r1.mesh.n_cells() == 4);
    CHECK(r1.mesh.n_vertices() == 9);

    const RefinedMesh r2 = refine(r1.mesh);
    CHECK(r2.mesh.n_cells() == 16);
    CHECK(r2.mesh.n_vertices() == 25);

    // coarse vertex coordinates appear bit-exactly on the fine level
    for (int v = 0; v < m1.n_vertices(); ++v) {
      const int fv = r1.vertex_embedding[v];
      CHECK(m1.vertices[v].x == r1.mesh.vertices[fv].x);
      CHECK(m1.vertices[v].y == r1.mesh.vertices[fv].y);
    }
    for (int v = 0; v < r1.mesh.n_vertices(); ++v) {
      const int fv = r2.vertex_embedding[v];
      CHECK(r1.mesh.vertices[v].x == r2.mesh.vertices[fv].x);
      CHECK(r1.mesh.vertices[v].y == r2.mesh.vertices[fv].y);
    }
  }

  TEST_CASE("child cells lie inside the parent") {
    const Mesh m = build_rect_mesh(kUnit, 3, 2);
    const RefinedMesh r = refine(m);
    for (int c = 0; c < m.n_cells(); ++c) {
      for (int child : r.child_map[c]) {
        // child center must map into the parent cell
        const Vec2 center = r.mesh.maps[child].apply({0, 0});
        CHECK(m.locate_cell(center) == c);
      }
    }
  }

  TEST_CASE("affine map corners match cell vertices in order") {
    const Mesh m = build_rect_mesh({-2, 1, 3, 4}, 3, 3);
    const Vec2 ref[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    for (int c = 0; c < m.n_cells(); ++c)
      for (int i = 0; i < 4; ++i) {
        const Vec2 p = m.maps[c].apply(ref[i]);
        const Vec2 v = m.vertices[m.cells[c][i]];
        CHECK(p.x == doctest::Approx(v.x).epsilon(1e-14));
        CHECK(p.y == doctest::Approx(v.y).epsilon(1e-14));
      }
  }

  TEST_CASE("star patches: Q2 on 2x2, full Dirichlet") {
    const Mesh m = build_rect_mesh(kUnit, 2, 2);
    FunctionSpace V = make_velocity_space(m, 2);
    set_dirichlet_all_boundary(V, [](Vec2) { return Vec2{0, 0}; });
    const auto stars = vertex_stars(m, V);
    REQUIRE(stars.size() == 9);

    const int center = m.vertex_index(1, 1);
    CHECK(stars[center].cells.size() == 4);
    CHECK(stars[center].dofs.size() == 18);  // 2 (2k-1)^2 for k=2

    const int corner = m.vertex_index(0, 0);
    CHECK(stars[corner].cells.size() == 1);
    CHECK(stars[corner].dofs.size() == 2);  // 2 (k-1)^2

    // covering: union of patch dofs = all non-Dirichlet dofs
    std::set<int> covered;
    for (const auto& s : stars) covered.insert(s.dofs.begin(), s.dofs.end());
    std::set<int> free;
    for (int d = 0; d < V.n_dofs; ++d)
      if (!V.is_dirichlet[d]) free.insert(d);
    CHECK(covered == free);
  }

  TEST_CASE("star patch covering for k=3 with mixed boundary") {
    const Mesh m = build_rect_mesh(kUnit, 3, 2);
    FunctionSpace V = make_velocity_space(m, 3);
    set_dirichlet_component_on_side(V, Side::Left, 0, [](Vec2) { return 0.0; });
    set_dirichlet_component_on_side(V, Side::Bottom, 1, [](Vec2) { return 0.0; });
    const auto stars = vertex_stars(m, V);
    std::set<int> covered;
    for (const auto& s : stars) covered.insert(s.dofs.begin(), s.dofs.end());
    std::set<int> free;
    for (int d = 0; d < V.n_dofs; ++d)
      if (!V.is_dirichlet[d]) free.insert(d);
    CHECK(covered == free);
  }

  TEST_CASE("stars reject k=1") {
    const Mesh m = build_rect_mesh(kUnit, 2, 2);
    FunctionSpace V = make_velocity_space(m, 2);
    V.k = 1;  // forced, make_velocity_space would refuse it anyway
    CHECK_THROWS_AS(vertex_stars(m, V), std::invalid_argument);
  }
}
