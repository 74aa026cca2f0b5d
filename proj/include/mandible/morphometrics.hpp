#pragma once

#include <span>
#include <string>
#include <vector>

#include "mandible/geodesic.hpp"
#include "mandible/landmarks.hpp"

namespace mandible {

// ---------------------------------------------------------------------------
// Marking variability
// ---------------------------------------------------------------------------

// Statistics use the population convention (divide by the number of markings).
struct LandmarkVariability {
    LandmarkKey key;
    Vec3 centroid = Vec3::Zero();
    Vec3 axis_std = Vec3::Zero();   // per-axis standard deviation, mm
    double spread = 0.0;            // RMS distance of markings to centroid, mm
    std::size_t markings = 0;
};

struct VariabilityReport {
    std::string mandible_id;
    // Ascending by spread, ties by key: the most reproducible landmarks first.
    std::vector<LandmarkVariability> landmarks;
};

// Needs at least two sets of the same mandible; every landmark present in
// any set must be present in at least two.
VariabilityReport landmark_variability(std::span<const LandmarkSet> sets);

// Per-landmark centroid snapped back onto mesh.
LandmarkSet consensus_landmarks(const TriangleMesh& mesh, std::span<const LandmarkSet> sets);

// ---------------------------------------------------------------------------
// Local and global ratios
// ---------------------------------------------------------------------------

struct RatioEntry {
    LandmarkPair pair;
    double length = 0.0;   // L, mm
    double ratio = 0.0;    // LR = L / R
};

struct RatioTable {
    std::string mandible_id;
    LandmarkPair reference;
    double reference_length = 0.0;   // R, mm
    std::vector<RatioEntry> entries;  // in PairSpec order

    const RatioEntry* find(const LandmarkPair& pair) const;
};

struct RatioOptions {
    int refinement = kDefaultRefinement;
    // R = mean of the reference pair and its mirror when both are marked.
    bool average_reference_sides = false;
};

RatioTable local_ratios(const GeodesicSolver& solver, const LandmarkSet& landmarks, const PairSpec& spec,
                        bool average_reference_sides = false);
RatioTable local_ratios(const TriangleMesh& mesh, const LandmarkSet& landmarks, const PairSpec& spec,
                        const RatioOptions& options = {});

inline constexpr double kDefaultRatioBand = 0.20;

struct GlobalRatioEntry {
    LandmarkPair pair;
    double lr_a = 0.0;
    double lr_b = 0.0;
    double gr = 0.0;       // lr_a / lr_b
    bool flagged = false;  // |gr - 1| > band
};

struct GlobalRatioTable {
    std::string mandible_a;
    std::string mandible_b;
    double band = kDefaultRatioBand;
    std::vector<GlobalRatioEntry> entries;
    double max_abs_deviation = 0.0;   // max |GR - 1|
    double rms_deviation = 0.0;       // RMS of (GR - 1)
    std::size_t flagged = 0;
};

GlobalRatioTable global_ratios(const RatioTable& a, const RatioTable& b, double band = kDefaultRatioBand);

struct SymmetryEntry {
    LandmarkPair left_pair;
    LandmarkPair right_pair;
    double lr_left = 0.0;
    double lr_right = 0.0;
    double relative_difference = 0.0;  // lr_left / lr_right - 1
};

struct SymmetryReport {
    std::string mandible_id;
    std::vector<SymmetryEntry> entries;
    double rms_asymmetry = 0.0;
    double max_abs_asymmetry = 0.0;
};

// Pairs every sided entry with its mirror image. Midline-only pairs and
// pairs that are their own mirror are skipped.
SymmetryReport symmetry_report(const RatioTable& table);

struct ConsistencyEntry {
    LandmarkPair pair;
    double mean_ratio = 0.0;
    double std_ratio = 0.0;  // population
    std::size_t tables = 0;
};

std::vector<ConsistencyEntry> session_consistency(std::span<const RatioTable> tables);

}  // namespace mandible
