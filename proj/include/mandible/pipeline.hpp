#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mandible/compare.hpp"
#include "mandible/morphometrics.hpp"
#include "mandible/registration.hpp"
#include "mandible/scaling.hpp"

namespace mandible {

inline constexpr double kDefaultRmsBudget = 3.0;  // mm

/// Settings of the scale -> register -> compare run. File paths are used by
/// the CLI only; run_pipeline() works on in-memory inputs.
struct PipelineConfig {
    std::filesystem::path source_mesh, source_landmarks;
    std::filesystem::path target_mesh, target_landmarks;
    std::optional<std::filesystem::path> pairs;
    std::filesystem::path out_dir = ".";

    ScaleMode mode = ScaleMode::uniform;
    std::optional<double> factor;  // overrides the reference-length ratio
    std::optional<std::pair<double, double>> reference_lengths;  // (r_source, r_target)
    ReferenceMetric reference_metric = ReferenceMetric::geodesic;
    LandmarkPair chin_pair = default_chin_pair();
    LandmarkPair masseter_pair = default_masseter_pair();
    std::optional<Vec3> chin_axis;  // default: u_chin of the target's growth frame
    std::vector<LandmarkKey> axis_pair_keys = default_axis_pair_keys();
    int refinement = kDefaultRefinement;
    bool register_meshes = true;
    double rms_budget = kDefaultRmsBudget;
    DistanceMode distance_mode = DistanceMode::nearest_surface;
    MeshFormat output_format = MeshFormat::ply;
};

// Relative paths in j resolve against base_dir. Keys mirror the struct:
// source_mesh, source_landmarks, target_mesh, target_landmarks, pairs,
// out_dir, refine, register, rms_budget, distance_mode, format, and a
// "scaling" object {factor | r_source + r_target, mode, reference,
// chin_pair, masseter_pair}, plus chin_axis [x, y, z] and axis_pairs.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct PipelineInputs {
    const TriangleMesh& source_mesh;
    const LandmarkSet& source_landmarks;
    const TriangleMesh& target_mesh;
    const LandmarkSet& target_landmarks;
    LandmarkPair reference = default_reference_pair();
};

struct PipelineResult {
    double r_source = 0.0;
    double r_target = 0.0;
    double factor = 1.0;
    ScalePlan plan;
    TriangleMesh scaled_mesh;          // scaled and registered source
    LandmarkSet scaled_landmarks;
    RegistrationResult registration;
    Vec3 chin_axis = Vec3::UnitZ();
    SymmetricStats stats;              // forward: scaled source -> target
    bool pass = false;                 // forward RMS within budget
};

// Errors keep their type; messages are prefixed with the failing stage.
PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config);

nlohmann::json pipeline_summary(const PipelineResult& result, const PipelineConfig& config,
                                const TriangleMesh& target_mesh);

// Writes scaled_source.<fmt>, scaled_landmarks.json, transform.json,
// distance_map.ply, stats.json and summary.json into config.out_dir.
void write_pipeline_outputs(const PipelineResult& result, const PipelineConfig& config,
                            const TriangleMesh& target_mesh);

}  // namespace mandible
