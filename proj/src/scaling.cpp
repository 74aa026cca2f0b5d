#include "mandible/scaling.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "mandible/errors.hpp"

namespace mandible {

double scaling_factor(double r_source, double r_target) {
    if (!(r_source > 0.0) || !(r_target > 0.0) || !std::isfinite(r_source) || !std::isfinite(r_target)) {
        throw InputError("reference lengths must be positive (got source " + std::to_string(r_source) +
                         ", target " + std::to_string(r_target) + ")");
    }
    return r_target / r_source;
}

Mat3 GrowthFrame::basis() const {
    Mat3 b;
    b.col(0) = u_chin;
    b.col(1) = u_masseter;
    b.col(2) = u_normal;
    return b;
}

GrowthFrame make_growth_frame(const Vec3& origin, const Vec3& chin_direction, const Vec3& masseter_direction) {
    const double lc = chin_direction.norm();
    const double lm = masseter_direction.norm();
    if (!(lc > 0.0) || !(lm > 0.0)) throw ComputeError("growth direction landmarks coincide");

    GrowthFrame f;
    f.origin = origin;
    f.u_chin = chin_direction / lc;
    f.u_masseter = masseter_direction / lm;
    // atan2 keeps full precision near 0 and 180 degrees, unlike acos.
    const double angle = std::atan2(f.u_chin.cross(f.u_masseter).norm(), f.u_chin.dot(f.u_masseter));
    f.angle_deg = angle * 180.0 / std::numbers::pi;
    if (f.angle_deg < kMinGrowthAngleDeg || f.angle_deg > 180.0 - kMinGrowthAngleDeg) {
        throw ComputeError("growth directions are nearly parallel (" + std::to_string(f.angle_deg) + " deg)");
    }
    f.u_normal = f.u_chin.cross(f.u_masseter).normalized();
    return f;
}

GrowthFrame growth_frame(const LandmarkSet& landmarks, const LandmarkPair& chin_pair,
                         const LandmarkPair& masseter_pair) {
    const Vec3& chin0 = landmarks.position(chin_pair.first);
    const Vec3 chin = landmarks.position(chin_pair.second) - chin0;
    const Vec3 masseter = landmarks.position(masseter_pair.second) - landmarks.position(masseter_pair.first);
    if (chin.norm() == 0.0) throw ComputeError("chin pair " + to_string(chin_pair) + " is coincident");
    if (masseter.norm() == 0.0) throw ComputeError("masseter pair " + to_string(masseter_pair) + " is coincident");
    return make_growth_frame(chin0, chin, masseter);
}

LandmarkPair default_chin_pair() { return {{1, Side::midline}, {3, Side::midline}}; }
LandmarkPair default_masseter_pair() { return {{10, Side::right}, {14, Side::right}}; }

std::string to_string(ScaleMode mode) { return mode == ScaleMode::uniform ? "uniform" : "growth"; }

ScaleMode parse_scale_mode(std::string_view text) {
    if (text == "uniform") return ScaleMode::uniform;
    if (text == "growth" || text == "growth-frame") return ScaleMode::growth_frame;
    throw InputError("unknown scaling mode '" + std::string(text) + "' (expected uniform|growth)");
}

ScalePlan ScalePlan::uniform(double factor, const Vec3& origin) {
    ScalePlan p;
    p.factor = factor;
    p.mode = ScaleMode::uniform;
    p.origin = origin;
    p.validate();
    return p;
}

ScalePlan ScalePlan::growth(double factor, const GrowthFrame& frame) {
    ScalePlan p;
    p.factor = factor;
    p.mode = ScaleMode::growth_frame;
    p.origin = frame.origin;
    p.frame = frame;
    p.validate();
    return p;
}

void ScalePlan::validate() const {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw InputError("scale factor must be positive and finite");
    if (mode == ScaleMode::growth_frame) {
        if (!frame) throw InputError("growth-frame scaling needs a growth frame");
        if (std::abs(frame->basis().determinant()) < 1e-12) throw ComputeError("growth frame basis is singular");
    }
}

Mat3 ScalePlan::linear() const {
    if (mode == ScaleMode::uniform) return factor * Mat3::Identity();
    const Mat3 b = frame->basis();
    const Eigen::Vector3d diag(factor, factor, 1.0);
    return b * diag.asDiagonal() * b.inverse();
}

Vec3 ScalePlan::apply(const Vec3& p) const {
    if (mode == ScaleMode::uniform) return origin + factor * (p - origin);
    return origin + linear() * (p - origin);
}

ScaledMandible scale_mesh(const TriangleMesh& mesh, const ScalePlan& plan, const LandmarkSet* landmarks) {
    plan.validate();
    std::vector<Vec3> vertices;
    vertices.reserve(mesh.vertex_count());
    if (plan.mode == ScaleMode::uniform) {
        for (const auto& v : mesh.vertices()) vertices.push_back(plan.origin + plan.factor * (v - plan.origin));
    } else {
        const Mat3 m = plan.linear();
        for (const auto& v : mesh.vertices()) vertices.push_back(plan.origin + m * (v - plan.origin));
    }

    ScaledMandible out{mesh.with_vertices(std::move(vertices)), std::nullopt};
    if (landmarks) {
        LandmarkSet moved = *landmarks;
        for (auto& [key, lm] : moved.landmarks) lm.position.position = surface_position(out.mesh, lm.position);
        out.landmarks = std::move(moved);
    }
    return out;
}

double reference_length(const GeodesicSolver& solver, const LandmarkSet& landmarks, const LandmarkPair& pair,
                        ReferenceMetric metric) {
    const auto& a = landmarks.at(pair.first).position;
    const auto& b = landmarks.at(pair.second).position;
    return metric == ReferenceMetric::chord ? (a.position - b.position).norm() : solver.distance(a, b).length;
}

}  // namespace mandible
