#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mandible/mesh.hpp"

namespace mandible {

inline constexpr int kDefaultRefinement = 3;

struct GeodesicResult {
    double length = 0.0;          // mm
    std::vector<Vec3> polyline;   // from a to b, on the surface
    int refinement = 0;

    // "edge-dijkstra" for refinement 0, otherwise "steiner-<k>".
    std::string method_tag() const;
};

/// Shortest paths on a Steiner graph over a triangle mesh.
///
/// Graph nodes are the mesh vertices plus, on every edge, the points of the
/// uniform subdivisions into 2, 3, ..., k+1 parts (nested, so refinement
/// k+1 contains every node of refinement k and lengths never increase with
/// k). Any two nodes on the boundary of a common triangle are joined by a
/// straight segment across that triangle. Query endpoints attach to the
/// nodes of their own triangle, and directly to each other when they share
/// a triangle.
///
/// The solver holds a reference to the mesh, which must outlive it. Queries
/// are const and may run concurrently.
class GeodesicSolver {
public:
    explicit GeodesicSolver(const TriangleMesh& mesh, int refinement = kDefaultRefinement);

    GeodesicResult distance(const SurfacePoint& a, const SurfacePoint& b) const;

    // Symmetric matrix of pairwise lengths. Entry (i, j), i < j, is computed
    // exactly as distance(points[i], points[j]).length would be.
    Eigen::MatrixXd matrix(std::span<const SurfacePoint> points) const;

    int refinement() const { return refinement_; }
    std::size_t node_count() const { return positions_.size(); }
    // Edge fractions where Steiner nodes sit, ascending, in (0, 1).
    const std::vector<double>& steiner_fractions() const { return fractions_; }

private:
    // Runs Dijkstra from source; targets are sinks. Returns per-target
    // distances and, if requested, the path to targets[0].
    std::vector<double> run(const SurfacePoint& source, std::span<const SurfacePoint> targets,
                            std::vector<Vec3>* path_to_first) const;

    template <typename F>
    void for_each_triangle_node(std::uint32_t tri, F&& f) const;

    const TriangleMesh* mesh_;
    int refinement_;
    std::vector<double> fractions_;
    std::size_t steiner_per_edge_ = 0;
    std::vector<Vec3> positions_;                 // vertices, then Steiner nodes edge by edge
    std::vector<std::array<std::uint32_t, 3>> triangle_edges_;
    std::vector<std::uint32_t> vertex_tri_offsets_, vertex_tris_;
    std::vector<std::uint32_t> edge_tri_offsets_, edge_tris_;
};

// One-shot helpers; prefer a GeodesicSolver when issuing many queries.
GeodesicResult geodesic_distance(const TriangleMesh& mesh, const SurfacePoint& a, const SurfacePoint& b,
                                 int refinement = kDefaultRefinement);
Eigen::MatrixXd geodesic_matrix(const TriangleMesh& mesh, std::span<const SurfacePoint> points,
                                int refinement = kDefaultRefinement);

}  // namespace mandible
