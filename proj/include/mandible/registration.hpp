#pragma once

#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mandible/landmarks.hpp"

namespace mandible {

/// Proper rigid motion p -> rotation * p + translation.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }
    // Rotation by angle (radians, right-handed) about the line through
    // center along axis.
    static RigidTransform about_axis(const Vec3& axis, double angle, const Vec3& center);

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    // (this * other)(p) == this->apply(other.apply(p))
    RigidTransform operator*(const RigidTransform& other) const;
    RigidTransform inverse() const;

    // R^T R = I and det R = +1 within tol.
    bool is_valid(double tol = 1e-10) const;
};

struct LandmarkResidual {
    LandmarkKey key;
    double distance = 0.0;  // mm, after registration
};

struct RegistrationResult {
    RigidTransform transform;
    std::vector<LandmarkResidual> residuals;
    double rms_residual = 0.0;
    double angle_deg = 0.0;   // chin-axis rotation angle (chin-axis method only)
    bool reflection = false;  // best fit wanted an improper rotation (lsq only)
};

std::vector<LandmarkKey> chin_landmarks();
std::vector<LandmarkKey> default_axis_pair_keys();  // 7L and 7R

// Translates the moving chin centroid (landmarks 1, 2, 3) onto the fixed one,
// then rotates about `axis` through that centroid by the angle that
// minimizes the summed squared distances of `pair_keys` correspondences.
// The angle has a closed form: with p, q the centered moving and fixed
// points, A = sum q.p_perp and B = sum q.(axis x p_perp), theta = atan2(B, A).
// Residuals cover the chin landmarks and pair_keys.
RegistrationResult register_chin_axis(const LandmarkSet& moving, const LandmarkSet& fixed, const Vec3& axis,
                                      std::span<const LandmarkKey> pair_keys);

// Orthogonal Procrustes (Kabsch) fit over the listed correspondences,
// restricted to proper rotations.
RegistrationResult register_landmarks_lsq(const LandmarkSet& moving, const LandmarkSet& fixed,
                                          std::span<const LandmarkKey> keys);

TriangleMesh apply_transform(const TriangleMesh& mesh, const RigidTransform& t);
// Moves the landmark positions; triangle and weights stay valid for the
// equally transformed mesh.
LandmarkSet apply_transform(const LandmarkSet& set, const RigidTransform& t);

// {rotation: 9 numbers row-major, translation: 3 numbers, rms_residual}
nlohmann::json transform_to_json(const RigidTransform& t, double rms_residual);
RigidTransform transform_from_json(const nlohmann::json& j);

}  // namespace mandible
