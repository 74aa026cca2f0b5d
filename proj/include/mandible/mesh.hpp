#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mandible {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Triangle = std::array<std::uint32_t, 3>;

// Triangles with area at or below this are treated as degenerate (mm^2).
inline constexpr double kMinTriangleArea = 1e-12;

struct MeshReport {
    std::size_t dropped_degenerate = 0;
    std::size_t non_manifold_edges = 0;
};

struct Aabb {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    void extend(const Aabb& b) {
        min = min.cwiseMin(b.min);
        max = max.cwiseMax(b.max);
    }
    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

/// Indexed triangle surface in millimeters.
///
/// Instances are immutable once built. Construction goes through
/// from_soup(), which enforces: indices in range, finite coordinates,
/// at least one triangle. Triangles that repeat a vertex or have area
/// <= kMinTriangleArea are dropped and counted in the report.
/// Non-manifold edges are allowed and only counted.
class TriangleMesh {
public:
    static TriangleMesh from_soup(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                                  MeshReport* report = nullptr);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }

    const Vec3& corner(std::size_t tri, int k) const { return vertices_[triangles_[tri][k]]; }

    // Same connectivity, new vertex positions (one per vertex, finite).
    // Used by rigid and affine transforms, which keep triangles non-degenerate
    // up to their conditioning, so no triangles are dropped here.
    TriangleMesh with_vertices(std::vector<Vec3> vertices) const;

    // Index of some triangle that uses vertex v (lowest triangle index).
    std::uint32_t triangle_of_vertex(std::uint32_t v) const;

private:
    TriangleMesh() = default;

    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
};

/// A point on a mesh triangle, in barycentric form.
struct SurfacePoint {
    std::uint32_t triangle = 0;
    std::array<double, 3> barycentric{1.0, 0.0, 0.0};
    Vec3 position = Vec3::Zero();
};

// Validates the weights (non-negative, sum 1 within 1e-9) and fills in position.
SurfacePoint make_surface_point(const TriangleMesh& mesh, std::uint32_t triangle,
                                const std::array<double, 3>& barycentric);

// Surface point sitting exactly on mesh vertex v.
SurfacePoint vertex_surface_point(const TriangleMesh& mesh, std::uint32_t v);

// Recomputes the position of p on mesh (same triangle and weights).
Vec3 surface_position(const TriangleMesh& mesh, const SurfacePoint& p);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const TriangleMesh& mesh);
Aabb bounding_box(const TriangleMesh& mesh);
double mean_edge_length(const TriangleMesh& mesh);

struct ClosestPoint {
    Vec3 point;
    std::array<double, 3> barycentric;
    double squared_distance;
};

// Closest point on triangle (a, b, c) to p, by Voronoi-region classification.
ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Globally nearest surface point by exhaustive search over all triangles.
// Ties resolve to the lowest triangle index.
SurfacePoint snap_to_surface(const TriangleMesh& mesh, const Vec3& p);

}  // namespace mandible
