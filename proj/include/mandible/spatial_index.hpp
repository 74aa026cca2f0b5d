#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mandible/mesh.hpp"

namespace mandible {

/// Bounding volume hierarchy over the triangles of a mesh, answering
/// nearest-surface-point queries.
///
/// Built by median splits on the longest centroid axis, so the structure is
/// a pure function of the mesh. Queries return the same squared distance
/// and triangle as an exhaustive scan in triangle order (first minimum wins).
class SpatialIndex {
public:
    struct Node {
        Aabb box;
        std::uint32_t first = 0;   // leaf: offset into triangle_order(); inner: left child
        std::uint32_t count = 0;   // leaf: triangle count; inner: 0
        std::uint32_t right = 0;   // inner: right child
        bool is_leaf() const { return count > 0; }
    };

    struct Hit {
        std::uint32_t triangle = 0;
        std::array<double, 3> barycentric{1, 0, 0};
        Vec3 point = Vec3::Zero();
        double squared_distance = 0.0;
    };

    // The mesh must outlive the index.
    explicit SpatialIndex(const TriangleMesh& mesh, std::uint32_t leaf_size = 4);

    Hit nearest(const Vec3& p) const;

    const TriangleMesh& mesh() const { return *mesh_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<std::uint32_t>& triangle_order() const { return order_; }

private:
    std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

    const TriangleMesh* mesh_;
    std::uint32_t leaf_size_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
};

}  // namespace mandible

namespace mandible {

// Same result as the exhaustive snap_to_surface(mesh, p), via the index.
SurfacePoint snap_to_surface(const SpatialIndex& index, const Vec3& p);

}  // namespace mandible
