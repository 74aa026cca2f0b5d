#include "mandible/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "mandible/errors.hpp"
#include "mandible/spatial_index.hpp"

namespace mandible {
namespace {

struct Anchor {
    int id;
    int u24;  // u in 24ths
    int v20;  // v in 20ths
};

constexpr std::array<Anchor, 17> kAnchors{{
    {1, 0, 19},  {2, 0, 10},  {3, 0, 1},   {4, 3, 17},   {5, 4, 2},    {6, 7, 9},
    {7, 12, 17}, {8, 10, 3},  {9, 14, 11}, {10, 16, 3},  {11, 17, 15}, {12, 19, 4},
    {13, 20, 10}, {14, 21, 18}, {15, 22, 6}, {16, 23, 13}, {17, 24, 19},
}};

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

}  // namespace

void PseudoMandibleParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string(name) + " must be positive");
    };
    positive(arch_radius, "arch_radius");
    positive(arch_depth_ratio, "arch_depth_ratio");
    positive(ramus_height, "ramus_height");
    positive(body_width, "body_width");
    positive(asymmetry_left, "asymmetry_left");
    positive(asymmetry_right, "asymmetry_right");
    if (tessellation < 1) throw InputError("tessellation must be at least 1");
    if (!(roughness >= 0.0) || !std::isfinite(roughness)) throw InputError("roughness must be non-negative");
}

PseudoMandibleParams PseudoMandibleParams::scaled(double s) const {
    if (!(s > 0.0)) throw InputError("scale must be positive");
    auto p = *this;
    p.arch_radius *= s;
    p.ramus_height *= s;
    p.body_width *= s;
    p.roughness *= s;
    return p;
}

PseudoMandible make_pseudo_mandible(const PseudoMandibleParams& params) {
    params.validate();
    const int t = params.tessellation;
    const int half = 24 * t;      // cells per side along u
    const int nu = 2 * half;      // cells along u
    const int nv = 20 * t;        // cells along v
    const double a = params.arch_radius;
    const double b = params.arch_depth_ratio * a;
    const double w = params.body_width;
    const double h_ramus = params.ramus_height;

    // Seeded displacement for the left half and midline, mirrored to the right.
    std::vector<double> jitter(static_cast<std::size_t>((half + 1) * (nv + 1)), 0.0);
    if (params.roughness > 0.0) {
        std::mt19937_64 rng(params.seed);
        std::normal_distribution<double> normal(0.0, params.roughness);
        for (auto& j : jitter) j = normal(rng);
    }

    auto vid = [nv](int i, int j) { return static_cast<std::uint32_t>(i * (nv + 1) + j); };

    std::vector<Vec3> vertices(static_cast<std::size_t>((nu + 1) * (nv + 1)));
    for (int i = 0; i <= nu; ++i) {
        const int k = std::abs(i - half);  // cells from the midline
        const double s = static_cast<double>(k) / half;
        const double phi = s * std::numbers::pi / 2.0;
        const double sin_phi = std::sin(phi), cos_phi = std::cos(phi);
        const Vec3 center(a * sin_phi, b * cos_phi, 0.0);
        const Vec3 normal = Vec3(b * sin_phi, a * cos_phi, 0.0).normalized();
        const double height = w + (h_ramus - w) * smoothstep((s - 0.55) / 0.45);
        for (int j = 0; j <= nv; ++j) {
            const double v = static_cast<double>(j) / nv;
            const double offset = 0.12 * w * std::sin(std::numbers::pi * v) +
                                  jitter[static_cast<std::size_t>(k * (nv + 1) + j)];
            Vec3 p = center + offset * normal;
            p.z() = v * height;
            if (i >= half) {
                p.x() *= params.asymmetry_left;
            } else {
                p.x() = -p.x() * params.asymmetry_right;
            }
            vertices[vid(i, j)] = p;
        }
    }

    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * nu * nv));
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const auto v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            if (i >= half) {
                triangles.push_back({v00, v10, v11});
                triangles.push_back({v00, v11, v01});
            } else {
                triangles.push_back({v00, v10, v01});
                triangles.push_back({v10, v11, v01});
            }
        }
    }

    MeshReport report;
    PseudoMandible out{TriangleMesh::from_soup(std::move(vertices), std::move(triangles), &report), {}};
    if (report.dropped_degenerate != 0) throw ComputeError("pseudo-mandible produced degenerate triangles");

    out.landmarks.mandible_id = params.mandible_id;
    out.landmarks.expert_id = "generator";
    out.landmarks.session_id = "exact";
    for (const auto& anchor : kAnchors) {
        const int j = anchor.v20 * t;
        const int di = anchor.u24 * t;
        if (anchor.id <= kMidlineLandmarks) {
            out.landmarks.add({{anchor.id, Side::midline}, vertex_surface_point(out.mesh, vid(half, j))});
        } else {
            out.landmarks.add({{anchor.id, Side::left}, vertex_surface_point(out.mesh, vid(half + di, j))});
            out.landmarks.add({{anchor.id, Side::right}, vertex_surface_point(out.mesh, vid(half - di, j))});
        }
    }
    return out;
}

PseudoMandibleParams pseudo_mandible_params_from_json(const nlohmann::json& j) {
    PseudoMandibleParams p;
    try {
        p.arch_radius = j.value("arch_radius", p.arch_radius);
        p.arch_depth_ratio = j.value("arch_depth_ratio", p.arch_depth_ratio);
        p.ramus_height = j.value("ramus_height", p.ramus_height);
        p.body_width = j.value("body_width", p.body_width);
        if (j.contains("asymmetry")) {
            p.asymmetry_left = j.at("asymmetry").value("left", 1.0);
            p.asymmetry_right = j.at("asymmetry").value("right", 1.0);
        }
        p.tessellation = j.value("tessellation", p.tessellation);
        p.roughness = j.value("roughness", p.roughness);
        p.seed = j.value("seed", p.seed);
        p.mandible_id = j.value("mandible_id", p.mandible_id);
        if (j.contains("scale")) p = p.scaled(j.at("scale").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed generator parameters: ") + e.what());
    }
    p.validate();
    return p;
}

TriangleMesh make_plane_grid(int nx, int ny, double cell) {
    if (nx < 1 || ny < 1 || !(cell > 0.0)) throw InputError("plane grid needs nx, ny >= 1 and cell > 0");
    std::vector<Vec3> vertices;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) vertices.emplace_back(i * cell, j * cell, 0.0);
    }
    auto id = [nx](int i, int j) { return static_cast<std::uint32_t>(j * (nx + 1) + i); };
    std::vector<Triangle> triangles;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriangleMesh::from_soup(std::move(vertices), std::move(triangles));
}

namespace {

struct UnitSphere {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
};

UnitSphere unit_icosphere(int level) {
    if (level < 0) throw InputError("icosphere level must be non-negative");
    const double g = (1.0 + std::sqrt(5.0)) / 2.0;
    UnitSphere s;
    s.vertices = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                  {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
    for (auto& v : s.vertices) v.normalize();
    s.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                   {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                   {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
        auto mid = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const Vec3 m = (0.5 * (s.vertices[a] + s.vertices[b])).normalized();
            s.vertices.push_back(m);
            const auto idx = static_cast<std::uint32_t>(s.vertices.size() - 1);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Triangle> next;
        next.reserve(s.triangles.size() * 4);
        for (const auto& t : s.triangles) {
            const auto ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        s.triangles = std::move(next);
    }
    return s;
}

}  // namespace

TriangleMesh make_icosphere(double radius, int level) {
    if (!(radius > 0.0)) throw InputError("icosphere radius must be positive");
    auto s = unit_icosphere(level);
    for (auto& v : s.vertices) v *= radius;
    return TriangleMesh::from_soup(std::move(s.vertices), std::move(s.triangles));
}

TriangleMesh make_ellipsoid(double a, double b, double c, int level) {
    if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0)) throw InputError("ellipsoid radii must be positive");
    auto s = unit_icosphere(level);
    const Vec3 radii(a, b, c);
    for (auto& v : s.vertices) v = v.cwiseProduct(radii);
    return TriangleMesh::from_soup(std::move(s.vertices), std::move(s.triangles));
}

TriangleMesh make_primitive(PrimitiveKind kind, const PrimitiveParams& params) {
    switch (kind) {
        case PrimitiveKind::plane_grid: return make_plane_grid(params.nx, params.ny, params.cell);
        case PrimitiveKind::icosphere: return make_icosphere(params.radius, params.level);
        case PrimitiveKind::ellipsoid:
            return make_ellipsoid(params.radii.x(), params.radii.y(), params.radii.z(), params.level);
    }
    throw InputError("unknown primitive kind");
}

PrimitiveKind parse_primitive_kind(std::string_view text) {
    if (text == "plane-grid" || text == "plane") return PrimitiveKind::plane_grid;
    if (text == "icosphere") return PrimitiveKind::icosphere;
    if (text == "ellipsoid") return PrimitiveKind::ellipsoid;
    throw InputError("unknown primitive '" + std::string(text) + "'");
}

LandmarkSet perturb_landmarks(const TriangleMesh& mesh, const LandmarkSet& set, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw InputError("sigma must be non-negative");
    if (sigma == 0.0) return set;
    const SpatialIndex index(mesh);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    LandmarkSet out = set;
    for (auto& [key, lm] : out.landmarks) {
        const Vec3 jitter(normal(rng), normal(rng), normal(rng));
        lm.position = snap_to_surface(index, lm.position.position + jitter);
    }
    return out;
}

}  // namespace mandible
