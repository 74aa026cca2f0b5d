#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "mandible/landmarks.hpp"

namespace mandible {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Parameters of the synthetic pseudo-mandible, a test fixture standing in
/// for digitized scans. It is not an anatomical model.
///
/// The surface is an open U-shaped band. Its centerline is the quarter
/// ellipse (A sin phi, B cos phi, 0), phi in [0, pi/2] per side, with
/// A = arch_radius and B = arch_depth_ratio * A; the chin sits at (0, B, 0)
/// and the posterior ends at (+-A, 0, 0). Left is +x, up is +z. The band
/// rises body_width above the centerline along the body and blends up to
/// ramus_height over the posterior 45% of each side. It bows outward by
/// 0.12 * body_width at mid-height.
///
/// Parameter grid: u in [-1, 1] (right end, chin, left end) with 48 *
/// tessellation cells, v in [0, 1] (bottom, top) with 20 * tessellation
/// cells. Landmarks sit on grid vertices at (u, v) =
///   1 (0, 19/20)   2 (0, 10/20)   3 (0, 1/20)            [midline]
///   4 (3/24, 17/20)  5 (4/24, 2/20)   6 (7/24, 9/20)     7 (12/24, 17/20)
///   8 (10/24, 3/20)  9 (14/24, 11/20) 10 (16/24, 3/20)   11 (17/24, 15/20)
///   12 (19/24, 4/20) 13 (20/24, 10/20) 14 (21/24, 18/20) 15 (22/24, 6/20)
///   16 (23/24, 13/20) 17 (1, 19/20)
/// with u > 0 for the left copy and u < 0 for the right copy.
///
/// asymmetry_left / asymmetry_right stretch the lateral (x) coordinate of
/// their side. roughness adds a seeded normal displacement (mm, standard
/// deviation), mirrored across the midline so both sides match.
struct PseudoMandibleParams {
    double arch_radius = 50.0;
    double arch_depth_ratio = 1.3;
    double ramus_height = 60.0;
    double body_width = 30.0;
    double asymmetry_left = 1.0;
    double asymmetry_right = 1.0;
    int tessellation = 2;
    double roughness = 0.0;
    std::uint64_t seed = kDefaultSeed;
    std::string mandible_id = "synthetic";

    void validate() const;
    // All lengths multiplied by s (a similar copy of the shape).
    PseudoMandibleParams scaled(double s) const;
};

struct PseudoMandible {
    TriangleMesh mesh;
    LandmarkSet landmarks;
};

PseudoMandible make_pseudo_mandible(const PseudoMandibleParams& params);

PseudoMandibleParams pseudo_mandible_params_from_json(const nlohmann::json& j);

// nx * ny square cells of side `cell` in the z = 0 plane, corner at origin,
// each cell split along its (i, j)-(i+1, j+1) diagonal.
TriangleMesh make_plane_grid(int nx, int ny, double cell = 1.0);
// Icosahedron subdivided `level` times, projected onto the sphere.
TriangleMesh make_icosphere(double radius, int level);
// Unit icosphere stretched by (a, b, c) along the axes.
TriangleMesh make_ellipsoid(double a, double b, double c, int level);

enum class PrimitiveKind { plane_grid, icosphere, ellipsoid };

struct PrimitiveParams {
    int nx = 10, ny = 10;
    double cell = 1.0;
    double radius = 10.0;
    Vec3 radii = Vec3::Constant(10.0);
    int level = 3;
};

TriangleMesh make_primitive(PrimitiveKind kind, const PrimitiveParams& params);
PrimitiveKind parse_primitive_kind(std::string_view text);

// Isotropic Gaussian jitter of every landmark, snapped back to the mesh.
LandmarkSet perturb_landmarks(const TriangleMesh& mesh, const LandmarkSet& set, double sigma, std::uint64_t seed);

}  // namespace mandible
