#include "mandible/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "mandible/errors.hpp"

namespace mandible {

TriangleMesh TriangleMesh::from_soup(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                                     MeshReport* report) {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (!vertices[i].allFinite()) {
            throw InputError("vertex " + std::to_string(i) + " has non-finite coordinates");
        }
    }

    MeshReport local;
    std::vector<Triangle> kept;
    kept.reserve(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (auto idx : tri) {
            if (idx >= vertices.size()) {
                throw InputError("triangle " + std::to_string(t) + " references vertex " +
                                 std::to_string(idx) + " but the mesh has " +
                                 std::to_string(vertices.size()) + " vertices");
            }
        }
        const bool repeats = tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2];
        if (repeats ||
            triangle_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) <= kMinTriangleArea) {
            ++local.dropped_degenerate;
            continue;
        }
        kept.push_back(tri);
    }
    if (kept.empty()) {
        throw InputError("mesh has no valid triangles");
    }

    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_use;
    for (const auto& tri : kept) {
        for (int k = 0; k < 3; ++k) {
            auto a = tri[k], b = tri[(k + 1) % 3];
            ++edge_use[{std::min(a, b), std::max(a, b)}];
        }
    }
    local.non_manifold_edges = static_cast<std::size_t>(
        std::count_if(edge_use.begin(), edge_use.end(), [](const auto& e) { return e.second > 2; }));

    if (report) *report = local;

    TriangleMesh mesh;
    mesh.vertices_ = std::move(vertices);
    mesh.triangles_ = std::move(kept);
    return mesh;
}

TriangleMesh TriangleMesh::with_vertices(std::vector<Vec3> vertices) const {
    if (vertices.size() != vertices_.size()) {
        throw InputError("with_vertices: vertex count mismatch");
    }
    for (const auto& v : vertices) {
        if (!v.allFinite()) throw ComputeError("transform produced non-finite coordinates");
    }
    TriangleMesh mesh;
    mesh.vertices_ = std::move(vertices);
    mesh.triangles_ = triangles_;
    return mesh;
}

std::uint32_t TriangleMesh::triangle_of_vertex(std::uint32_t v) const {
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        if (tri[0] == v || tri[1] == v || tri[2] == v) return static_cast<std::uint32_t>(t);
    }
    throw InputError("vertex " + std::to_string(v) + " is not used by any triangle");
}

SurfacePoint make_surface_point(const TriangleMesh& mesh, std::uint32_t triangle,
                                const std::array<double, 3>& barycentric) {
    if (triangle >= mesh.triangle_count()) {
        throw InputError("surface point references triangle " + std::to_string(triangle) +
                         " out of range");
    }
    double sum = 0.0;
    for (double w : barycentric) {
        if (!(w >= 0.0 && w <= 1.0)) throw InputError("barycentric weight outside [0,1]");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InputError("barycentric weights do not sum to 1");

    SurfacePoint p;
    p.triangle = triangle;
    p.barycentric = barycentric;
    p.position = surface_position(mesh, p);
    return p;
}

SurfacePoint vertex_surface_point(const TriangleMesh& mesh, std::uint32_t v) {
    const auto t = mesh.triangle_of_vertex(v);
    std::array<double, 3> w{0.0, 0.0, 0.0};
    const auto& tri = mesh.triangles()[t];
    for (int k = 0; k < 3; ++k) {
        if (tri[k] == v) w[k] = 1.0;
    }
    return make_surface_point(mesh, t, w);
}

Vec3 surface_position(const TriangleMesh& mesh, const SurfacePoint& p) {
    const auto& w = p.barycentric;
    return w[0] * mesh.corner(p.triangle, 0) + w[1] * mesh.corner(p.triangle, 1) +
           w[2] * mesh.corner(p.triangle, 2);
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

double surface_area(const TriangleMesh& mesh) {
    double area = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        area += triangle_area(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2));
    }
    return area;
}

Aabb bounding_box(const TriangleMesh& mesh) {
    Aabb box;
    for (const auto& v : mesh.vertices()) box.extend(v);
    return box;
}

double mean_edge_length(const TriangleMesh& mesh) {
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        for (int k = 0; k < 3; ++k) total += (mesh.corner(t, k) - mesh.corner(t, (k + 1) % 3)).norm();
    }
    return total / static_cast<double>(3 * mesh.triangle_count());
}

ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    auto result = [&p](const Vec3& q, double u, double v, double w) {
        return ClosestPoint{q, {u, v, w}, (p - q).squaredNorm()};
    };

    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return result(a, 1, 0, 0);

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return result(b, 0, 1, 0);

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return result(a + v * ab, 1 - v, v, 0);
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return result(c, 0, 0, 1);

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return result(a + w * ac, 1 - w, 0, w);
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return result(b + w * (c - b), 0, 1 - w, w);
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    const double u = std::max(0.0, 1.0 - v - w);
    return result(a + ab * v + ac * w, u, v, w);
}

SurfacePoint snap_to_surface(const TriangleMesh& mesh, const Vec3& p) {
    std::size_t best_tri = 0;
    ClosestPoint best{Vec3::Zero(), {1, 0, 0}, std::numeric_limits<double>::infinity()};
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        auto cp = closest_point_on_triangle(p, mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2));
        if (cp.squared_distance < best.squared_distance) {
            best = cp;
            best_tri = t;
        }
    }
    return make_surface_point(mesh, static_cast<std::uint32_t>(best_tri), best.barycentric);
}

}  // namespace mandible
