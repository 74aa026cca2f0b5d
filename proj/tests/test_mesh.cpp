#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "mandible/errors.hpp"
#include "mandible/mesh.hpp"
#include "mandible/mesh_io.hpp"
#include "mandible/synth.hpp"
#include "support.hpp"

using namespace mandible;
using namespace mandible::testing;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

void require_identical(const TriangleMesh& a, const TriangleMesh& b) {
    REQUIRE(a.vertex_count() == b.vertex_count());
    REQUIRE(a.triangle_count() == b.triangle_count());
    for (std::size_t i = 0; i < a.vertex_count(); ++i) {
        for (int k = 0; k < 3; ++k) REQUIRE(a.vertices()[i][k] == b.vertices()[i][k]);
    }
    CHECK(a.triangles() == b.triangles());
}

}  // namespace

TEST_CASE("from_soup validates and drops degenerate triangles") {
    std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}};
    MeshReport report;
    auto mesh = TriangleMesh::from_soup(v, {{0, 1, 2}, {0, 0, 1}, {0, 1, 3}}, &report);
    CHECK(mesh.triangle_count() == 1);
    CHECK(report.dropped_degenerate == 2);

    CHECK_THROWS_AS(TriangleMesh::from_soup(v, {{0, 1, 7}}), InputError);
    CHECK_THROWS_AS(TriangleMesh::from_soup(v, {{0, 0, 1}}), InputError);
    auto bad = v;
    bad[2].x() = std::nan("");
    CHECK_THROWS_AS(TriangleMesh::from_soup(bad, {{0, 1, 2}}), InputError);
}

TEST_CASE("non-manifold edges are counted, not rejected") {
    std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
    MeshReport report;
    auto mesh = TriangleMesh::from_soup(v, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}, &report);
    CHECK(mesh.triangle_count() == 3);
    CHECK(report.non_manifold_edges == 1);
}

TEST_CASE("closest point on triangle agrees with the projection oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int trial = 0; trial < 2000; ++trial) {
        const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
        if (triangle_area(a, b, c) < 1e-3) continue;
        const Vec3 p(u(rng), u(rng), u(rng));
        const auto cp = closest_point_on_triangle(p, a, b, c);
        const double expect = oracle_point_triangle_sqdist(p, a, b, c);
        REQUIRE(std::abs(cp.squared_distance - expect) <= 1e-9 * std::max(1.0, expect));
        const Vec3 recon = cp.barycentric[0] * a + cp.barycentric[1] * b + cp.barycentric[2] * c;
        REQUIRE((recon - cp.point).norm() < 1e-9);
        REQUIRE(std::abs((p - cp.point).squaredNorm() - cp.squared_distance) < 1e-9);
    }
}

TEST_CASE("surface measures") {
    const auto grid = make_plane_grid(4, 3, 2.0);
    CHECK(surface_area(grid) == doctest::Approx(48.0).epsilon(1e-12));
    const auto box = bounding_box(grid);
    CHECK(box.max.x() == 8.0);
    CHECK(box.max.y() == 6.0);

    const double r = 10;
    const double area = surface_area(make_icosphere(r, 4));
    const double sphere = 4 * std::numbers::pi * r * r;
    CHECK(area < sphere);
    CHECK(area > 0.99 * sphere);
}

TEST_CASE("surface points") {
    const auto grid = make_plane_grid(2, 2, 1.0);
    auto p = make_surface_point(grid, 0, {0.2, 0.3, 0.5});
    const Vec3 expect = 0.2 * grid.corner(0, 0) + 0.3 * grid.corner(0, 1) + 0.5 * grid.corner(0, 2);
    CHECK((p.position - expect).norm() < 1e-15);
    CHECK_THROWS_AS(make_surface_point(grid, 0, {0.5, 0.6, 0.0}), InputError);
    CHECK_THROWS_AS(make_surface_point(grid, 0, {-0.1, 0.6, 0.5}), InputError);
    CHECK_THROWS_AS(make_surface_point(grid, 99, {1, 0, 0}), InputError);

    const auto v = vertex_surface_point(grid, 4);
    CHECK(v.position == grid.vertices()[4]);

    const auto snapped = snap_to_surface(grid, Vec3(0.5, 0.25, 3.0));
    CHECK((snapped.position - Vec3(0.5, 0.25, 0)).norm() < 1e-12);
}

TEST_CASE("OBJ and PLY round trips are bit exact") {
    TempDir dir("mesh_io");
    PseudoMandibleParams params;
    params.roughness = 0.3;
    params.tessellation = 1;
    std::vector<TriangleMesh> fixtures;
    fixtures.push_back(make_pseudo_mandible(params).mesh);
    fixtures.push_back(make_icosphere(7.3, 3));
    fixtures.push_back(make_ellipsoid(3, 1.0 / 3.0, 2e-3, 2));
    fixtures.push_back(make_plane_grid(5, 4, 0.1));
    for (const auto& m : fixtures) {
        for (auto fmt : {MeshFormat::obj, MeshFormat::ply}) {
            const auto path = dir / (fmt == MeshFormat::obj ? "m.obj" : "m.ply");
            save_mesh(m, path, fmt);
            require_identical(m, load_mesh(path, format_from_path(path)));
        }
    }
}

TEST_CASE("PLY colors round trip; OBJ drops them") {
    TempDir dir("colors");
    const auto m = make_plane_grid(1, 1);
    std::vector<Rgb> colors{{0, 255, 0}, {10, 20, 30}, {255, 0, 0}, {1, 2, 3}};
    auto rep = save_mesh(m, dir / "c.ply", MeshFormat::ply, colors);
    CHECK(rep.colors_written);
    const auto file = read_mesh_file(dir / "c.ply", MeshFormat::ply);
    CHECK(file.colors == colors);
    rep = save_mesh(m, dir / "c.obj", MeshFormat::obj, colors);
    CHECK(rep.colors_dropped);
    CHECK_THROWS_AS(save_mesh(m, dir / "x.ply", MeshFormat::ply, std::vector<Rgb>(2)), InputError);
}

TEST_CASE("OBJ reader accepts common face forms") {
    TempDir dir("obj");
    write_text(dir / "q.obj",
               "# quad and negative indices\n"
               "o thing\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\n"
               "f 1/1/1 2/1/1 3/1/1 4/1/1\n"
               "v 2 0 0\nf -4 -1 -3\n");
    const auto m = load_mesh(dir / "q.obj", MeshFormat::obj);
    CHECK(m.vertex_count() == 5);
    CHECK(m.triangle_count() == 3);
    CHECK(m.triangles()[0] == Triangle{0, 1, 2});
    CHECK(m.triangles()[1] == Triangle{0, 2, 3});
    CHECK(m.triangles()[2] == Triangle{1, 4, 2});
}

TEST_CASE("malformed files raise InputError") {
    TempDir dir("bad");
    write_text(dir / "a.obj", "v 0 0 0\nv 1 0 0\nf 1 2 3\n");
    CHECK_THROWS_AS(load_mesh(dir / "a.obj", MeshFormat::obj), InputError);
    write_text(dir / "b.obj", "v 0 0 zero\n");
    CHECK_THROWS_AS(load_mesh(dir / "b.obj", MeshFormat::obj), InputError);
    write_text(dir / "c.ply", "ply\nformat binary_little_endian 1.0\nend_header\n");
    CHECK_THROWS_AS(load_mesh(dir / "c.ply", MeshFormat::ply), InputError);
    write_text(dir / "d.ply",
               "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
               "element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n");
    CHECK_THROWS_AS(load_mesh(dir / "d.ply", MeshFormat::ply), InputError);
    CHECK_THROWS_AS(load_mesh(dir / "missing.obj", MeshFormat::obj), InputError);
    CHECK_THROWS_AS(format_from_path("mesh.stl"), InputError);
}

TEST_CASE("PLY reader skips unknown properties and elements") {
    TempDir dir("ply");
    write_text(dir / "e.ply",
               "ply\nformat ascii 1.0\ncomment test\nelement vertex 3\nproperty float x\nproperty float nx\n"
               "property float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\n"
               "element edge 1\nproperty int a\nproperty int b\nend_header\n"
               "0 9 0 0\n1 9 0 0\n0 9 1 0\n3 0 1 2\n0 1\n");
    const auto m = load_mesh(dir / "e.ply", MeshFormat::ply);
    CHECK(m.triangle_count() == 1);
    CHECK(m.vertices()[2] == Vec3(0, 1, 0));
}
