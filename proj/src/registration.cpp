#include "mandible/registration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "mandible/errors.hpp"

namespace mandible {
namespace {

std::vector<std::pair<Vec3, Vec3>> correspondences(const LandmarkSet& moving, const LandmarkSet& fixed,
                                                   std::span<const LandmarkKey> keys) {
    std::vector<std::pair<Vec3, Vec3>> out;
    for (const auto& k : keys) out.emplace_back(moving.position(k), fixed.position(k));
    return out;
}

void fill_residuals(RegistrationResult& r, const LandmarkSet& moving, const LandmarkSet& fixed,
                    std::span<const LandmarkKey> keys) {
    double sum_sq = 0.0;
    for (const auto& k : keys) {
        const double d = (r.transform.apply(moving.position(k)) - fixed.position(k)).norm();
        r.residuals.push_back({k, d});
        sum_sq += d * d;
    }
    r.rms_residual = keys.empty() ? 0.0 : std::sqrt(sum_sq / static_cast<double>(keys.size()));
}

}  // namespace

RigidTransform RigidTransform::about_axis(const Vec3& axis, double angle, const Vec3& center) {
    RigidTransform t;
    t.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
    t.translation = center - t.rotation * center;
    return t;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
}

RigidTransform RigidTransform::inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
}

bool RigidTransform::is_valid(double tol) const {
    return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol && translation.allFinite();
}

std::vector<LandmarkKey> chin_landmarks() {
    return {{1, Side::midline}, {2, Side::midline}, {3, Side::midline}};
}

std::vector<LandmarkKey> default_axis_pair_keys() { return {{7, Side::left}, {7, Side::right}}; }

RegistrationResult register_chin_axis(const LandmarkSet& moving, const LandmarkSet& fixed, const Vec3& axis,
                                      std::span<const LandmarkKey> pair_keys) {
    const double axis_len = axis.norm();
    if (!(std::abs(axis_len - 1.0) < 1e-6)) throw InputError("chin axis must be a unit vector");
    if (pair_keys.empty()) throw InputError("chin-axis registration needs at least one landmark to align");
    const Vec3 a = axis / axis_len;

    const auto chin = chin_landmarks();
    Vec3 c_moving = Vec3::Zero(), c_fixed = Vec3::Zero();
    for (const auto& k : chin) {
        c_moving += moving.position(k);
        c_fixed += fixed.position(k);
    }
    c_moving /= 3.0;
    c_fixed /= 3.0;
    const Vec3 shift = c_fixed - c_moving;

    double cos_term = 0.0, sin_term = 0.0, perp_sq = 0.0, total_sq = 0.0;
    for (const auto& [m, f] : correspondences(moving, fixed, pair_keys)) {
        const Vec3 p = m + shift - c_fixed;
        const Vec3 q = f - c_fixed;
        const Vec3 p_perp = p - p.dot(a) * a;
        const Vec3 q_perp = q - q.dot(a) * a;
        cos_term += q_perp.dot(p_perp);
        sin_term += q_perp.dot(a.cross(p_perp));
        perp_sq += p_perp.squaredNorm();
        total_sq += p.squaredNorm();
    }
    if (std::sqrt(perp_sq) <= 1e-9 * std::max(1.0, std::sqrt(total_sq))) {
        throw ComputeError("all axis-pair landmarks lie on the chin axis; rotation is undetermined");
    }
    // Objective is constant in theta when both terms vanish: take theta = 0.
    const double amplitude = std::hypot(cos_term, sin_term);
    const double theta = amplitude <= 1e-12 * perp_sq ? 0.0 : std::atan2(sin_term, cos_term);

    RegistrationResult r;
    r.angle_deg = theta * 180.0 / std::numbers::pi;
    RigidTransform translate{Mat3::Identity(), shift};
    r.transform = RigidTransform::about_axis(a, theta, c_fixed) * translate;

    std::vector<LandmarkKey> used = chin;
    for (const auto& k : pair_keys) {
        if (std::find(used.begin(), used.end(), k) == used.end()) used.push_back(k);
    }
    fill_residuals(r, moving, fixed, used);
    return r;
}

RegistrationResult register_landmarks_lsq(const LandmarkSet& moving, const LandmarkSet& fixed,
                                          std::span<const LandmarkKey> keys) {
    if (keys.size() < 3) throw InputError("least-squares registration needs at least three landmarks");
    const auto pts = correspondences(moving, fixed, keys);
    const double n = static_cast<double>(pts.size());

    Vec3 cm = Vec3::Zero(), cf = Vec3::Zero();
    for (const auto& [m, f] : pts) {
        cm += m;
        cf += f;
    }
    cm /= n;
    cf /= n;

    Eigen::Matrix3Xd centered(3, static_cast<Eigen::Index>(pts.size()));
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3 pm = pts[i].first - cm;
        centered.col(static_cast<Eigen::Index>(i)) = pm;
        h += pm * (pts[i].second - cf).transpose();
    }
    const Eigen::JacobiSVD<Eigen::Matrix3Xd> shape(centered);
    const auto sv = shape.singularValues();
    if (!(sv(0) > 0.0) || sv(1) <= 1e-9 * sv(0)) {
        throw ComputeError("registration landmarks are collinear");
    }

    const Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3& u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    const double d = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    const Eigen::Vector3d fix(1.0, 1.0, d);

    RegistrationResult r;
    r.reflection = d < 0.0;
    r.transform.rotation = v * fix.asDiagonal() * u.transpose();
    r.transform.translation = cf - r.transform.rotation * cm;
    fill_residuals(r, moving, fixed, keys);
    return r;
}

TriangleMesh apply_transform(const TriangleMesh& mesh, const RigidTransform& t) {
    std::vector<Vec3> vertices;
    vertices.reserve(mesh.vertex_count());
    for (const auto& v : mesh.vertices()) vertices.push_back(t.apply(v));
    return mesh.with_vertices(std::move(vertices));
}

LandmarkSet apply_transform(const LandmarkSet& set, const RigidTransform& t) {
    LandmarkSet out = set;
    for (auto& [key, lm] : out.landmarks) lm.position.position = t.apply(lm.position.position);
    return out;
}

nlohmann::json transform_to_json(const RigidTransform& t, double rms_residual) {
    nlohmann::json rot = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) rot.push_back(t.rotation(i, j));
    }
    return {{"rotation", rot},
            {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}},
            {"rms_residual", rms_residual}};
}

RigidTransform transform_from_json(const nlohmann::json& j) {
    try {
        const auto& rot = j.at("rotation");
        const auto& tr = j.at("translation");
        if (rot.size() != 9 || tr.size() != 3) throw InputError("transform needs 9 rotation and 3 translation values");
        RigidTransform t;
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) t.rotation(i, k) = rot[static_cast<std::size_t>(3 * i + k)].get<double>();
            t.translation(i) = tr[static_cast<std::size_t>(i)].get<double>();
        }
        if (!t.is_valid(1e-6)) throw InputError("transform rotation is not a proper rotation");
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed transform: ") + e.what());
    }
}

}  // namespace mandible
