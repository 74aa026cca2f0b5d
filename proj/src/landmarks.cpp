#include "mandible/landmarks.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <set>

#include "mandible/errors.hpp"

namespace mandible {

using nlohmann::json;

void validate_key(const LandmarkKey& key) {
    if (key.id < 1 || key.id > kMaxLandmarkId) {
        throw InputError("landmark id " + std::to_string(key.id) + " outside 1.." + std::to_string(kMaxLandmarkId));
    }
    const bool midline_id = key.id <= kMidlineLandmarks;
    if (midline_id != (key.side == Side::midline)) {
        throw InputError("landmark " + std::to_string(key.id) +
                         (midline_id ? " must be midline" : " needs a left or right side"));
    }
}

LandmarkKey mirror(const LandmarkKey& key) {
    switch (key.side) {
        case Side::left: return {key.id, Side::right};
        case Side::right: return {key.id, Side::left};
        default: return key;
    }
}

std::string to_string(Side side) {
    switch (side) {
        case Side::left: return "left";
        case Side::right: return "right";
        default: return "midline";
    }
}

Side parse_side(std::string_view text) {
    if (text == "midline" || text == "M" || text == "m") return Side::midline;
    if (text == "left" || text == "L" || text == "l") return Side::left;
    if (text == "right" || text == "R" || text == "r") return Side::right;
    throw InputError("unknown landmark side '" + std::string(text) + "'");
}

std::string to_string(const LandmarkKey& key) {
    switch (key.side) {
        case Side::left: return std::to_string(key.id) + "L";
        case Side::right: return std::to_string(key.id) + "R";
        default: return std::to_string(key.id);
    }
}

LandmarkKey parse_landmark_key(std::string_view text) {
    int id = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
    if (ec != std::errc() || ptr == text.data()) throw InputError("bad landmark label '" + std::string(text) + "'");
    const std::string_view rest(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr));
    LandmarkKey key{id, rest.empty() ? Side::midline : parse_side(rest)};
    validate_key(key);
    return key;
}

void LandmarkSet::add(const Landmark& landmark) {
    validate_key(landmark.key);
    if (!landmarks.emplace(landmark.key, landmark).second) {
        throw InputError("duplicate landmark " + to_string(landmark.key) + " in set " + mandible_id);
    }
}

const Landmark& LandmarkSet::at(const LandmarkKey& key) const {
    auto it = landmarks.find(key);
    if (it == landmarks.end()) {
        throw InputError("landmark " + to_string(key) + " missing from mandible '" + mandible_id + "'");
    }
    return it->second;
}

json key_to_json(const LandmarkKey& key) { return {{"id", key.id}, {"side", to_string(key.side)}}; }

LandmarkKey key_from_json(const json& j) {
    try {
        LandmarkKey key{j.at("id").get<int>(),
                        j.contains("side") ? parse_side(j.at("side").get<std::string>()) : Side::midline};
        validate_key(key);
        return key;
    } catch (const json::exception& e) {
        throw InputError(std::string("bad landmark reference: ") + e.what());
    }
}

LoadedLandmarks landmarks_from_json(const json& j, const TriangleMesh& mesh) {
    LoadedLandmarks out;
    try {
        out.set.mandible_id = j.value("mandible_id", "");
        out.set.expert_id = j.value("expert_id", "");
        out.set.session_id = j.value("session_id", "");
        for (const auto& item : j.at("landmarks")) {
            const auto key = key_from_json(item);
            const Vec3 raw(item.at("x").get<double>(), item.at("y").get<double>(), item.at("z").get<double>());
            if (!raw.allFinite()) throw InputError("landmark " + to_string(key) + " has non-finite coordinates");
            const auto snapped = snap_to_surface(mesh, raw);
            out.set.add({key, snapped});
            out.snap_distances.emplace_back(key, (snapped.position - raw).norm());
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed landmark file: ") + e.what());
    }
    std::sort(out.snap_distances.begin(), out.snap_distances.end());
    return out;
}

LoadedLandmarks read_landmark_file(const std::filesystem::path& path, const TriangleMesh& mesh) {
    return landmarks_from_json(read_json_file(path), mesh);
}

json landmarks_to_json(const LandmarkSet& set) {
    json items = json::array();
    for (const auto& [key, lm] : set.landmarks) {
        const auto& p = lm.position.position;
        items.push_back({{"id", key.id}, {"side", to_string(key.side)}, {"x", p.x()}, {"y", p.y()}, {"z", p.z()}});
    }
    return {{"mandible_id", set.mandible_id},
            {"expert_id", set.expert_id},
            {"session_id", set.session_id},
            {"landmarks", items}};
}

void write_landmark_file(const LandmarkSet& set, const std::filesystem::path& path) {
    write_json_file(landmarks_to_json(set), path);
}

std::string to_string(const LandmarkPair& pair) { return to_string(pair.first) + "-" + to_string(pair.second); }

LandmarkPair mirror(const LandmarkPair& pair) { return {mirror(pair.first), mirror(pair.second)}; }

void PairSpec::validate() const {
    if (pairs.empty()) throw InputError("pair spec has no pairs");
    std::set<LandmarkPair> seen;
    for (const auto& p : pairs) {
        validate_key(p.first);
        validate_key(p.second);
        if (p.first == p.second) throw InputError("pair " + to_string(p) + " joins a landmark to itself");
        if (!seen.insert(p).second) throw InputError("pair " + to_string(p) + " repeated in pair spec");
    }
    validate_key(reference.first);
    validate_key(reference.second);
    if (reference.first == reference.second) throw InputError("reference pair members must differ");
}

LandmarkPair default_reference_pair() { return {{1, Side::midline}, {7, Side::right}}; }

PairSpec default_pair_spec() {
    // (first, second) with 0 side meaning midline; sided ids expand to L and R.
    static constexpr std::array<std::pair<int, int>, 11> kGrowthPairs{{
        {1, 9}, {3, 8}, {2, 10}, {4, 11}, {5, 12}, {6, 13}, {7, 14}, {8, 15}, {9, 16}, {10, 17}, {4, 7},
    }};
    PairSpec spec;
    spec.reference = default_reference_pair();
    for (Side side : {Side::left, Side::right}) {
        for (auto [a, b] : kGrowthPairs) {
            auto key = [side](int id) { return LandmarkKey{id, id <= kMidlineLandmarks ? Side::midline : side}; };
            spec.pairs.emplace_back(key(a), key(b));
        }
    }
    return spec;
}

PairSpec pair_spec_from_json(const json& j) {
    auto read_pair = [](const json& p) {
        if (!p.is_array() || p.size() != 2) throw InputError("each pair must be a two-element array");
        return LandmarkPair{key_from_json(p[0]), key_from_json(p[1])};
    };
    PairSpec spec;
    try {
        for (const auto& p : j.at("pairs")) spec.pairs.push_back(read_pair(p));
        spec.reference = j.contains("reference_pair") ? read_pair(j.at("reference_pair")) : default_reference_pair();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed pair spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

PairSpec read_pair_spec(const std::filesystem::path& path) { return pair_spec_from_json(read_json_file(path)); }

json pair_spec_to_json(const PairSpec& spec) {
    json pairs = json::array();
    for (const auto& p : spec.pairs) pairs.push_back({key_to_json(p.first), key_to_json(p.second)});
    return {{"pairs", pairs},
            {"reference_pair", {key_to_json(spec.reference.first), key_to_json(spec.reference.second)}}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace mandible
