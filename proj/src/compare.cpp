#include "mandible/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "mandible/errors.hpp"

namespace mandible {
namespace {

// Small k-d tree over points for the nearest-vertex mode.
class PointTree {
public:
    explicit PointTree(const std::vector<Vec3>& points) : points_(points), order_(points.size()) {
        std::iota(order_.begin(), order_.end(), 0u);
        build(0, static_cast<std::uint32_t>(order_.size()), 0);
    }

    double nearest_squared(const Vec3& p) const {
        double best = std::numeric_limits<double>::infinity();
        search(0, static_cast<std::uint32_t>(order_.size()), 0, p, best);
        return best;
    }

private:
    void build(std::uint32_t begin, std::uint32_t end, int axis) {
        if (end - begin <= 1) return;
        const auto mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             return points_[a][axis] < points_[b][axis] ||
                                    (points_[a][axis] == points_[b][axis] && a < b);
                         });
        build(begin, mid, (axis + 1) % 3);
        build(mid + 1, end, (axis + 1) % 3);
    }

    void search(std::uint32_t begin, std::uint32_t end, int axis, const Vec3& p, double& best) const {
        if (begin >= end) return;
        const auto mid = begin + (end - begin) / 2;
        const Vec3& q = points_[order_[mid]];
        best = std::min(best, (q - p).squaredNorm());
        const double delta = p[axis] - q[axis];
        const int next = (axis + 1) % 3;
        if (delta < 0) {
            search(begin, mid, next, p, best);
            if (delta * delta <= best) search(mid + 1, end, next, p, best);
        } else {
            search(mid + 1, end, next, p, best);
            if (delta * delta <= best) search(begin, mid, next, p, best);
        }
    }

    const std::vector<Vec3>& points_;
    std::vector<std::uint32_t> order_;
};

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n / 256)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk, end = std::min(n, begin + chunk);
        pool.emplace_back([&f, begin, end] {
            for (std::size_t i = begin; i < end; ++i) f(i);
        });
    }
}

}  // namespace

DistanceStats compute_stats(std::span<const double> distances) {
    DistanceStats s;
    s.count = distances.size();
    if (distances.empty()) return s;
    const double n = static_cast<double>(distances.size());
    double sum = 0.0, sum_sq = 0.0;
    for (double d : distances) {
        s.max = std::max(s.max, d);
        sum += d;
        sum_sq += d * d;
    }
    s.mean = sum / n;
    double var = 0.0;
    for (double d : distances) var += (d - s.mean) * (d - s.mean);
    s.std = std::sqrt(var / n);
    s.rms = std::sqrt(sum_sq / n);
    return s;
}

DistanceMap distance_map(const TriangleMesh& source, const SpatialIndex& target, const DistanceOptions& options) {
    DistanceMap map;
    map.source_id = options.source_id;
    map.target_id = options.target_id;
    map.distances.resize(source.vertex_count());
    const auto& verts = source.vertices();

    if (options.mode == DistanceMode::nearest_surface) {
        parallel_for(verts.size(), options.threads,
                     [&](std::size_t i) { map.distances[i] = std::sqrt(target.nearest(verts[i]).squared_distance); });
    } else {
        const PointTree tree(target.mesh().vertices());
        parallel_for(verts.size(), options.threads,
                     [&](std::size_t i) { map.distances[i] = std::sqrt(tree.nearest_squared(verts[i])); });
    }
    map.stats = compute_stats(map.distances);
    return map;
}

DistanceMap distance_map(const TriangleMesh& source, const TriangleMesh& target, const DistanceOptions& options) {
    const SpatialIndex index(target);
    return distance_map(source, index, options);
}

SymmetricStats symmetric_stats(const TriangleMesh& a, const TriangleMesh& b, const DistanceOptions& options) {
    SymmetricStats out;
    out.forward = distance_map(a, b, options);
    DistanceOptions reverse = options;
    std::swap(reverse.source_id, reverse.target_id);
    out.backward = distance_map(b, a, reverse);

    std::vector<double> all = out.forward.distances;
    all.insert(all.end(), out.backward.distances.begin(), out.backward.distances.end());
    out.symmetric = compute_stats(all);
    return out;
}

Rgb distance_color(double distance, double saturation) {
    const double t = saturation > 0.0 ? std::clamp(distance / saturation, 0.0, 1.0) : 0.0;
    auto channel = [](double x) { return static_cast<std::uint8_t>(std::floor(255.0 * x + 0.5)); };
    return {channel(t), channel(1.0 - t), 0};
}

std::vector<Rgb> distance_colors(std::span<const double> distances, double saturation) {
    std::vector<Rgb> colors;
    colors.reserve(distances.size());
    for (double d : distances) colors.push_back(distance_color(d, saturation));
    return colors;
}

void export_distance_map(const DistanceMap& map, const TriangleMesh& source, const std::filesystem::path& path,
                         std::optional<double> saturation) {
    if (map.distances.size() != source.vertex_count()) {
        throw InputError("distance map does not match the source mesh vertex count");
    }
    if (saturation && !(*saturation > 0.0)) throw InputError("saturation must be positive");
    const double sat = saturation.value_or(map.stats.max);
    save_mesh(source, path, MeshFormat::ply, distance_colors(map.distances, sat));
}

nlohmann::json stats_to_json(const DistanceStats& stats, std::size_t n_vertices, std::size_t n_triangles) {
    return {{"max_mm", stats.max},   {"mean_mm", stats.mean},         {"std_mm", stats.std},
            {"rms_mm", stats.rms},   {"n_vertices", n_vertices},      {"n_triangles", n_triangles}};
}

}  // namespace mandible
