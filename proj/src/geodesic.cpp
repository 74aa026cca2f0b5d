#include "mandible/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>
#include <utility>

#include "mandible/errors.hpp"

namespace mandible {
namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Nested uniform subdivision fractions i/(j+1), 1 <= i <= j <= k.
std::vector<double> nested_fractions(int k) {
    std::set<std::pair<int, int>> reduced;
    for (int j = 1; j <= k; ++j) {
        for (int i = 1; i <= j; ++i) {
            const int g = std::gcd(i, j + 1);
            reduced.insert({i / g, (j + 1) / g});
        }
    }
    std::vector<double> out;
    for (auto [num, den] : reduced) out.push_back(static_cast<double>(num) / static_cast<double>(den));
    std::sort(out.begin(), out.end());
    return out;
}

void build_csr(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
               std::vector<std::uint32_t>& offsets, std::vector<std::uint32_t>& items) {
    offsets.assign(n + 1, 0);
    for (auto [key, _] : pairs) ++offsets[key + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    items.resize(pairs.size());
    auto cursor = offsets;
    for (auto [key, value] : pairs) items[cursor[key]++] = value;
}

}  // namespace

std::string GeodesicResult::method_tag() const {
    return refinement == 0 ? "edge-dijkstra" : "steiner-" + std::to_string(refinement);
}

GeodesicSolver::GeodesicSolver(const TriangleMesh& mesh, int refinement)
    : mesh_(&mesh), refinement_(refinement) {
    if (refinement < 0) throw InputError("geodesic refinement must be non-negative");
    fractions_ = nested_fractions(refinement);
    steiner_per_edge_ = fractions_.size();

    // Unique undirected edges, numbered in (lo, hi) order.
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, int>> half;
    half.reserve(mesh.triangle_count() * 3);
    for (std::uint32_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        for (int k = 0; k < 3; ++k) {
            const auto a = tri[k], b = tri[(k + 1) % 3];
            half.emplace_back(std::min(a, b), std::max(a, b), t, k);
        }
    }
    std::sort(half.begin(), half.end());

    triangle_edges_.resize(mesh.triangle_count());
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_ends;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_tri_pairs;
    for (std::size_t i = 0; i < half.size(); ++i) {
        const auto [lo, hi, t, k] = half[i];
        if (edge_ends.empty() || edge_ends.back() != std::make_pair(lo, hi)) edge_ends.emplace_back(lo, hi);
        const auto e = static_cast<std::uint32_t>(edge_ends.size() - 1);
        triangle_edges_[t][k] = e;
        edge_tri_pairs.emplace_back(e, t);
    }
    build_csr(edge_ends.size(), edge_tri_pairs, edge_tri_offsets_, edge_tris_);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> vertex_tri_pairs;
    vertex_tri_pairs.reserve(mesh.triangle_count() * 3);
    for (std::uint32_t t = 0; t < mesh.triangle_count(); ++t) {
        for (auto v : mesh.triangles()[t]) vertex_tri_pairs.emplace_back(v, t);
    }
    build_csr(mesh.vertex_count(), vertex_tri_pairs, vertex_tri_offsets_, vertex_tris_);

    positions_ = mesh.vertices();
    positions_.reserve(mesh.vertex_count() + edge_ends.size() * steiner_per_edge_);
    for (auto [lo, hi] : edge_ends) {
        const Vec3& p0 = mesh.vertices()[lo];
        const Vec3 d = mesh.vertices()[hi] - p0;
        for (double f : fractions_) positions_.push_back(p0 + f * d);
    }
}

template <typename F>
void GeodesicSolver::for_each_triangle_node(std::uint32_t tri, F&& f) const {
    for (auto v : mesh_->triangles()[tri]) f(v);
    const auto base = static_cast<std::uint32_t>(mesh_->vertex_count());
    for (auto e : triangle_edges_[tri]) {
        for (std::size_t i = 0; i < steiner_per_edge_; ++i) {
            f(base + e * static_cast<std::uint32_t>(steiner_per_edge_) + static_cast<std::uint32_t>(i));
        }
    }
}

std::vector<double> GeodesicSolver::run(const SurfacePoint& source, std::span<const SurfacePoint> targets,
                                        std::vector<Vec3>* path_to_first) const {
    const auto n_graph = static_cast<std::uint32_t>(positions_.size());
    const std::uint32_t source_id = n_graph;
    const std::uint32_t first_target = n_graph + 1;
    const std::size_t total = positions_.size() + 1 + targets.size();

    for (const auto& t : targets) {
        if (t.triangle >= mesh_->triangle_count()) throw InputError("target surface point is not on this mesh");
    }
    if (source.triangle >= mesh_->triangle_count()) throw InputError("source surface point is not on this mesh");

    // Triangle -> targets lying in it.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> tri_targets;
    for (std::uint32_t i = 0; i < targets.size(); ++i) tri_targets.emplace_back(targets[i].triangle, i);
    std::sort(tri_targets.begin(), tri_targets.end());

    auto position = [&](std::uint32_t id) -> const Vec3& {
        if (id < n_graph) return positions_[id];
        if (id == source_id) return source.position;
        return targets[id - first_target].position;
    };

    std::vector<double> dist(total, kInf);
    std::vector<std::uint32_t> pred(total, kNone);
    std::vector<char> settled(total, 0);
    using Entry = std::pair<double, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

    auto relax = [&](std::uint32_t u, std::uint32_t x) {
        if (x == u || settled[x]) return;
        const double nd = dist[u] + (position(u) - position(x)).norm();
        if (nd < dist[x]) {
            dist[x] = nd;
            pred[x] = u;
            heap.emplace(nd, x);
        } else if (nd == dist[x] && u < pred[x]) {
            pred[x] = u;
        }
    };
    auto expand_triangle = [&](std::uint32_t u, std::uint32_t tri) {
        for_each_triangle_node(tri, [&](std::uint32_t x) { relax(u, x); });
        auto range = std::equal_range(tri_targets.begin(), tri_targets.end(), std::make_pair(tri, 0u),
                                      [](const auto& l, const auto& r) { return l.first < r.first; });
        for (auto it = range.first; it != range.second; ++it) relax(u, first_target + it->second);
    };

    dist[source_id] = 0.0;
    heap.emplace(0.0, source_id);
    std::size_t remaining = targets.size();
    while (!heap.empty() && remaining > 0) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (settled[u] || d > dist[u]) continue;
        settled[u] = 1;
        if (u >= first_target) {
            --remaining;
            continue;
        }
        if (u == source_id) {
            expand_triangle(u, source.triangle);
        } else if (u < mesh_->vertex_count()) {
            for (auto i = vertex_tri_offsets_[u]; i < vertex_tri_offsets_[u + 1]; ++i) expand_triangle(u, vertex_tris_[i]);
        } else {
            const auto e = (u - static_cast<std::uint32_t>(mesh_->vertex_count())) /
                           static_cast<std::uint32_t>(steiner_per_edge_);
            for (auto i = edge_tri_offsets_[e]; i < edge_tri_offsets_[e + 1]; ++i) expand_triangle(u, edge_tris_[i]);
        }
    }

    std::vector<double> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) out[i] = dist[first_target + i];

    if (path_to_first && !targets.empty() && std::isfinite(out[0])) {
        std::vector<Vec3> path;
        for (auto id = first_target; id != kNone; id = pred[id]) path.push_back(position(id));
        std::reverse(path.begin(), path.end());
        *path_to_first = std::move(path);
    }
    return out;
}

GeodesicResult GeodesicSolver::distance(const SurfacePoint& a, const SurfacePoint& b) const {
    GeodesicResult result;
    result.refinement = refinement_;
    if (a.position == b.position) {
        result.polyline = {a.position};
        return result;
    }
    const auto d = run(a, std::span(&b, 1), &result.polyline);
    if (!std::isfinite(d[0])) throw ComputeError("no surface path: endpoints lie on different components");
    result.length = d[0];
    return result;
}

Eigen::MatrixXd GeodesicSolver::matrix(std::span<const SurfacePoint> points) const {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const auto rest = points.subspan(static_cast<std::size_t>(i) + 1);
        const auto d = run(points[static_cast<std::size_t>(i)], rest, nullptr);
        for (std::size_t j = 0; j < rest.size(); ++j) {
            double value = d[j];
            if (points[static_cast<std::size_t>(i)].position == rest[j].position) value = 0.0;
            if (!std::isfinite(value)) throw ComputeError("no surface path: landmarks lie on different components");
            const auto col = i + 1 + static_cast<Eigen::Index>(j);
            m(i, col) = value;
            m(col, i) = value;
        }
    }
    return m;
}

GeodesicResult geodesic_distance(const TriangleMesh& mesh, const SurfacePoint& a, const SurfacePoint& b,
                                 int refinement) {
    return GeodesicSolver(mesh, refinement).distance(a, b);
}

Eigen::MatrixXd geodesic_matrix(const TriangleMesh& mesh, std::span<const SurfacePoint> points, int refinement) {
    return GeodesicSolver(mesh, refinement).matrix(points);
}

}  // namespace mandible
