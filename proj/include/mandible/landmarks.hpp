#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mandible/mesh.hpp"

namespace mandible {

enum class Side { midline, left, right };

inline constexpr int kLandmarkCount = 31;
inline constexpr int kMidlineLandmarks = 3;   // ids 1..3
inline constexpr int kMaxLandmarkId = 17;     // sided ids 4..17

struct LandmarkKey {
    int id = 0;
    Side side = Side::midline;

    friend auto operator<=>(const LandmarkKey&, const LandmarkKey&) = default;
};

// Throws InputError unless ids 1..3 are midline and 4..17 are left/right.
void validate_key(const LandmarkKey& key);

LandmarkKey mirror(const LandmarkKey& key);
std::string to_string(Side side);
Side parse_side(std::string_view text);
// "1", "7L", "7R"; midline may also be written "2M".
std::string to_string(const LandmarkKey& key);
LandmarkKey parse_landmark_key(std::string_view text);

struct Landmark {
    LandmarkKey key;
    SurfacePoint position;
};

/// One expert-session marking of landmarks on one mandible.
struct LandmarkSet {
    std::string mandible_id;
    std::string expert_id;
    std::string session_id;
    std::map<LandmarkKey, Landmark> landmarks;

    // Rejects duplicate keys and keys outside the numbering scheme.
    void add(const Landmark& landmark);
    bool contains(const LandmarkKey& key) const { return landmarks.contains(key); }
    // Throws InputError naming the missing landmark.
    const Landmark& at(const LandmarkKey& key) const;
    const Vec3& position(const LandmarkKey& key) const { return at(key).position.position; }
    std::size_t size() const { return landmarks.size(); }
};

struct LoadedLandmarks {
    LandmarkSet set;
    // Distance from each raw marking to the surface, in key order (mm).
    std::vector<std::pair<LandmarkKey, double>> snap_distances;
};

// JSON layout: {mandible_id, expert_id, session_id,
//               landmarks: [{id, side, x, y, z}, ...]}
// Raw coordinates are snapped onto the mesh.
LoadedLandmarks landmarks_from_json(const nlohmann::json& j, const TriangleMesh& mesh);
LoadedLandmarks read_landmark_file(const std::filesystem::path& path, const TriangleMesh& mesh);
nlohmann::json landmarks_to_json(const LandmarkSet& set);
void write_landmark_file(const LandmarkSet& set, const std::filesystem::path& path);

using LandmarkPair = std::pair<LandmarkKey, LandmarkKey>;

std::string to_string(const LandmarkPair& pair);
LandmarkPair mirror(const LandmarkPair& pair);

/// Landmark pairs whose lengths are compared, plus the reference pair R.
struct PairSpec {
    std::vector<LandmarkPair> pairs;
    LandmarkPair reference;

    // Throws InputError: empty list, repeated pair, identical reference ends.
    void validate() const;
};

// The landmark pair used as reference length by default: 1 to right 7.
LandmarkPair default_reference_pair();

// Eleven bilateral pairs (22 side-resolved entries) laid out on the
// synthetic pseudo-mandible. A test configuration, not an anatomical
// catalogue: real studies must supply their own pair file.
PairSpec default_pair_spec();

// {pairs: [[{id, side}, {id, side}], ...], reference_pair: [{..}, {..}]}
PairSpec pair_spec_from_json(const nlohmann::json& j);
PairSpec read_pair_spec(const std::filesystem::path& path);
nlohmann::json pair_spec_to_json(const PairSpec& spec);

nlohmann::json key_to_json(const LandmarkKey& key);
LandmarkKey key_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace mandible
