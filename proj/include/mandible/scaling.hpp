#pragma once

#include <optional>

#include "mandible/geodesic.hpp"
#include "mandible/landmarks.hpp"

namespace mandible {

// R_target / R_source. Both lengths must be positive and finite.
double scaling_factor(double r_source, double r_target);

inline constexpr double kMinGrowthAngleDeg = 5.0;

/// Oblique frame spanned by the two growth directions.
struct GrowthFrame {
    Vec3 origin = Vec3::Zero();
    Vec3 u_chin = Vec3::UnitZ();       // vertical chin growth
    Vec3 u_masseter = Vec3::UnitX();   // anterior masseter growth
    Vec3 u_normal = Vec3::UnitY();     // normalized u_chin x u_masseter
    double angle_deg = 90.0;           // angle between u_chin and u_masseter

    // Columns u_chin, u_masseter, u_normal.
    Mat3 basis() const;
};

// Normalizes both directions; rejects zero vectors and angles within
// kMinGrowthAngleDeg of 0 or 180 degrees (ComputeError).
GrowthFrame make_growth_frame(const Vec3& origin, const Vec3& chin_direction, const Vec3& masseter_direction);

// Chord directions first->second of each landmark pair; origin is the first
// chin landmark.
GrowthFrame growth_frame(const LandmarkSet& landmarks, const LandmarkPair& chin_pair,
                         const LandmarkPair& masseter_pair);

// Growth-direction pairs laid out on the synthetic pseudo-mandible.
LandmarkPair default_chin_pair();
LandmarkPair default_masseter_pair();

enum class ScaleMode { uniform, growth_frame };

std::string to_string(ScaleMode mode);
ScaleMode parse_scale_mode(std::string_view text);

struct ScalePlan {
    double factor = 1.0;
    ScaleMode mode = ScaleMode::uniform;
    Vec3 origin = Vec3::Zero();
    std::optional<GrowthFrame> frame;

    static ScalePlan uniform(double factor, const Vec3& origin);
    // Scales the u_chin and u_masseter coordinates by factor, keeps u_normal.
    static ScalePlan growth(double factor, const GrowthFrame& frame);

    void validate() const;
    // Linear part: v -> origin + linear() * (v - origin).
    Mat3 linear() const;
    Vec3 apply(const Vec3& p) const;
};

struct ScaledMandible {
    TriangleMesh mesh;
    std::optional<LandmarkSet> landmarks;
};

// Landmarks keep their triangle and barycentric weights; an affine map
// sends a surface point to the same barycentric point of the mapped triangle.
ScaledMandible scale_mesh(const TriangleMesh& mesh, const ScalePlan& plan, const LandmarkSet* landmarks = nullptr);

enum class ReferenceMetric { geodesic, chord };

double reference_length(const GeodesicSolver& solver, const LandmarkSet& landmarks, const LandmarkPair& pair,
                        ReferenceMetric metric);

}  // namespace mandible
