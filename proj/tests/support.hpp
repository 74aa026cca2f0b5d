#pragma once

// Fixtures and independent reference computations shared by the unit tests
// and the acceptance binary. Nothing here calls the library routine it is
// used to check.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mandible/landmarks.hpp"
#include "mandible/mesh.hpp"

namespace mandible::testing {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("mandible_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline double segment_sqdist(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).squaredNorm();
}

// Point-triangle squared distance: project onto the supporting plane, keep
// the projection if it lies inside, otherwise take the nearest edge.
inline double oracle_point_triangle_sqdist(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 e0 = b - a, e1 = c - a;
    Eigen::Matrix2d g;
    g << e0.dot(e0), e0.dot(e1), e0.dot(e1), e1.dot(e1);
    const Eigen::Vector2d rhs(e0.dot(p - a), e1.dot(p - a));
    const Eigen::Vector2d st = g.ldlt().solve(rhs);
    if (st.x() >= 0 && st.y() >= 0 && st.x() + st.y() <= 1) {
        return (p - (a + st.x() * e0 + st.y() * e1)).squaredNorm();
    }
    return std::min({segment_sqdist(p, a, b), segment_sqdist(p, b, c), segment_sqdist(p, c, a)});
}

// Exhaustive nearest-surface search in triangle order, first minimum wins.
inline ClosestPoint brute_nearest(const TriangleMesh& mesh, const Vec3& p, std::uint32_t* triangle = nullptr) {
    ClosestPoint best{Vec3::Zero(), {1, 0, 0}, std::numeric_limits<double>::infinity()};
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto c = closest_point_on_triangle(p, mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2));
        if (c.squared_distance < best.squared_distance) {
            best = c;
            if (triangle) *triangle = static_cast<std::uint32_t>(t);
        }
    }
    return best;
}

struct RigidFit {
    Mat3 rotation;
    Vec3 translation;
};

// Horn's unit-quaternion absolute orientation: the rotation is the top
// eigenvector of the 4x4 symmetric matrix built from the cross-covariance.
inline RigidFit horn_fit(std::span<const Vec3> moving, std::span<const Vec3> fixed) {
    Vec3 cm = Vec3::Zero(), cf = Vec3::Zero();
    for (std::size_t i = 0; i < moving.size(); ++i) {
        cm += moving[i];
        cf += fixed[i];
    }
    cm /= double(moving.size());
    cf /= double(fixed.size());
    Mat3 s = Mat3::Zero();
    for (std::size_t i = 0; i < moving.size(); ++i) s += (moving[i] - cm) * (fixed[i] - cf).transpose();
    const double sxx = s(0, 0), sxy = s(0, 1), sxz = s(0, 2);
    const double syx = s(1, 0), syy = s(1, 1), syz = s(1, 2);
    const double szx = s(2, 0), szy = s(2, 1), szz = s(2, 2);
    Eigen::Matrix4d n;
    n << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
         syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
         szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
         sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(n);
    const Eigen::Vector4d q = eig.eigenvectors().col(3);
    const Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
    RigidFit fit{quat.normalized().toRotationMatrix(), Vec3::Zero()};
    fit.translation = cf - fit.rotation * cm;
    return fit;
}

inline Vec3 rodrigues(const Vec3& v, const Vec3& axis, double angle) {
    return v * std::cos(angle) + axis.cross(v) * std::sin(angle) + axis * axis.dot(v) * (1 - std::cos(angle));
}

// Chin-axis objective after centering both chin triangles: summed squared
// distance of the pair landmarks when the moving set is turned by angle.
struct ChinAxisObjective {
    std::vector<Vec3> moving, fixed;  // centered
    Vec3 axis;

    ChinAxisObjective(const LandmarkSet& m, const LandmarkSet& f, const Vec3& ax, std::span<const LandmarkKey> keys)
        : axis(ax.normalized()) {
        Vec3 cm = Vec3::Zero(), cf = Vec3::Zero();
        for (int id = 1; id <= 3; ++id) {
            cm += m.position({id, Side::midline}) / 3.0;
            cf += f.position({id, Side::midline}) / 3.0;
        }
        for (const auto& k : keys) {
            moving.push_back(m.position(k) - cm);
            fixed.push_back(f.position(k) - cf);
        }
    }

    double operator()(double angle) const {
        double sum = 0;
        for (std::size_t i = 0; i < moving.size(); ++i) {
            sum += (rodrigues(moving[i], axis, angle) - fixed[i]).squaredNorm();
        }
        return sum;
    }
};

// Angle in degrees minimizing the objective: a 0.05-degree sweep of the full
// circle, then a 1e-4-degree sweep of the best coarse cell's neighborhood.
inline double grid_search_angle_deg(const ChinAxisObjective& f) {
    constexpr double kDeg = std::numbers::pi / 180.0;
    double best = 0, best_val = std::numeric_limits<double>::infinity();
    for (int i = -3600; i < 3600; ++i) {
        const double a = i * 0.05;
        const double v = f(a * kDeg);
        if (v < best_val) {
            best_val = v;
            best = a;
        }
    }
    const double center = best;
    for (int i = -1000; i <= 1000; ++i) {
        const double a = center + i * 1e-4;
        const double v = f(a * kDeg);
        if (v < best_val) {
            best_val = v;
            best = a;
        }
    }
    if (best > 180.0) best -= 360.0;
    if (best <= -180.0) best += 360.0;
    return best;
}

struct PopulationStats {
    double mean = 0, std = 0, rms = 0, max = 0;
};

// Two-pass population statistics in long double.
inline PopulationStats oracle_stats(std::span<const double> xs) {
    long double sum = 0, sq = 0;
    PopulationStats s;
    for (double x : xs) {
        sum += x;
        sq += static_cast<long double>(x) * x;
        s.max = std::max(s.max, x);
    }
    const long double n = xs.size();
    const long double mean = sum / n;
    long double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    s.mean = double(mean);
    s.std = double(std::sqrt(var / n));
    s.rms = double(std::sqrt(sq / n));
    return s;
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    return q.normalized().toRotationMatrix();
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return Vec3(n(rng), n(rng), n(rng)).normalized();
}

inline double relative_error(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace mandible::testing
