#include "mandible/spatial_index.hpp"

#include <algorithm>
#include <limits>

namespace mandible {
namespace {

double box_squared_distance(const Aabb& box, const Vec3& p) {
    const Vec3 d = (box.min - p).cwiseMax(p - box.max).cwiseMax(0.0);
    return d.squaredNorm();
}

// Boxes are pruned only when clearly farther than the best hit, so rounding in
// the box bound never hides a triangle that ties or beats it.
constexpr double kPruneSlack = 1.0 + 1e-12;
constexpr double kPruneFloor = 1e-24;  // mm^2

}  // namespace

SpatialIndex::SpatialIndex(const TriangleMesh& mesh, std::uint32_t leaf_size)
    : mesh_(&mesh), leaf_size_(std::max<std::uint32_t>(1, leaf_size)) {
    const auto n = static_cast<std::uint32_t>(mesh.triangle_count());
    order_.resize(n);
    std::vector<Vec3> centroids(n);
    for (std::uint32_t t = 0; t < n; ++t) {
        order_[t] = t;
        centroids[t] = (mesh.corner(t, 0) + mesh.corner(t, 1) + mesh.corner(t, 2)) / 3.0;
    }
    nodes_.reserve(2 * (n / leaf_size_ + 1));
    build(0, n, centroids);
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    Aabb box, centroid_box;
    for (auto i = begin; i < end; ++i) {
        const auto t = order_[i];
        for (int k = 0; k < 3; ++k) box.extend(mesh_->corner(t, k));
        centroid_box.extend(centroids[t]);
    }
    nodes_[index].box = box;

    if (end - begin <= leaf_size_) {
        nodes_[index].first = begin;
        nodes_[index].count = end - begin;
        return index;
    }

    int axis = 0;
    (centroid_box.max - centroid_box.min).maxCoeff(&axis);
    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = centroids[a][axis], cb = centroids[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });

    const auto left = build(begin, mid, centroids);
    const auto right = build(mid, end, centroids);
    nodes_[index].first = left;
    nodes_[index].right = right;
    nodes_[index].count = 0;
    return index;
}

SpatialIndex::Hit SpatialIndex::nearest(const Vec3& p) const {
    Hit best;
    best.squared_distance = std::numeric_limits<double>::infinity();
    bool found = false;

    std::vector<std::pair<double, std::uint32_t>> stack;
    stack.reserve(64);
    stack.emplace_back(box_squared_distance(nodes_[0].box, p), 0);
    while (!stack.empty()) {
        const auto [bound, ni] = stack.back();
        stack.pop_back();
        if (found && bound > best.squared_distance * kPruneSlack + kPruneFloor) continue;
        const Node& node = nodes_[ni];
        if (node.is_leaf()) {
            for (auto i = node.first; i < node.first + node.count; ++i) {
                const auto t = order_[i];
                const auto cp = closest_point_on_triangle(p, mesh_->corner(t, 0), mesh_->corner(t, 1), mesh_->corner(t, 2));
                if (!found || cp.squared_distance < best.squared_distance ||
                    (cp.squared_distance == best.squared_distance && t < best.triangle)) {
                    best = {t, cp.barycentric, cp.point, cp.squared_distance};
                    found = true;
                }
            }
            continue;
        }
        const double dl = box_squared_distance(nodes_[node.first].box, p);
        const double dr = box_squared_distance(nodes_[node.right].box, p);
        // Push the farther child first so the nearer one is visited next.
        if (dl <= dr) {
            stack.emplace_back(dr, node.right);
            stack.emplace_back(dl, node.first);
        } else {
            stack.emplace_back(dl, node.first);
            stack.emplace_back(dr, node.right);
        }
    }
    return best;
}

}  // namespace mandible

namespace mandible {

SurfacePoint snap_to_surface(const SpatialIndex& index, const Vec3& p) {
    const auto hit = index.nearest(p);
    return make_surface_point(index.mesh(), hit.triangle, hit.barycentric);
}

}  // namespace mandible
