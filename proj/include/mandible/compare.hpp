#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mandible/mesh_io.hpp"
#include "mandible/spatial_index.hpp"

namespace mandible {

// Population statistics of a distance sample, in mm.
struct DistanceStats {
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;
    double rms = 0.0;
    std::size_t count = 0;
};

DistanceStats compute_stats(std::span<const double> distances);

enum class DistanceMode {
    nearest_surface,  // vertex to closest point on any target triangle
    nearest_vertex,   // vertex to closest target vertex
};

struct DistanceOptions {
    DistanceMode mode = DistanceMode::nearest_surface;
    unsigned threads = 0;  // 0: hardware concurrency
    std::string source_id = "source";
    std::string target_id = "target";
};

struct DistanceMap {
    std::string source_id;
    std::string target_id;
    std::vector<double> distances;  // one per source vertex
    DistanceStats stats;
};

// The result does not depend on the thread count.
DistanceMap distance_map(const TriangleMesh& source, const TriangleMesh& target, const DistanceOptions& options = {});
DistanceMap distance_map(const TriangleMesh& source, const SpatialIndex& target, const DistanceOptions& options = {});

struct SymmetricStats {
    DistanceMap forward;    // a -> b
    DistanceMap backward;   // b -> a
    DistanceStats symmetric;  // over both samples; max is the Hausdorff distance
};

SymmetricStats symmetric_stats(const TriangleMesh& a, const TriangleMesh& b, const DistanceOptions& options = {});

// Linear green (0 mm) to red (>= saturation) ramp; channels are
// floor(255 * t + 0.5) (round half up), blue is 0.
Rgb distance_color(double distance, double saturation);
std::vector<Rgb> distance_colors(std::span<const double> distances, double saturation);

// Writes a colored ASCII PLY of source. saturation defaults to the map's
// maximum; an all-zero map is exported all green.
void export_distance_map(const DistanceMap& map, const TriangleMesh& source, const std::filesystem::path& path,
                         std::optional<double> saturation = std::nullopt);

// {max_mm, mean_mm, std_mm, rms_mm, n_vertices, n_triangles}
nlohmann::json stats_to_json(const DistanceStats& stats, std::size_t n_vertices, std::size_t n_triangles);

}  // namespace mandible
