#include "mandible/morphometrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mandible/errors.hpp"

namespace mandible {
namespace {

void require_same_pairs(const RatioTable& a, const RatioTable& b) {
    const bool same = a.entries.size() == b.entries.size() &&
                      std::equal(a.entries.begin(), a.entries.end(), b.entries.begin(),
                                 [](const RatioEntry& x, const RatioEntry& y) { return x.pair == y.pair; });
    if (!same) {
        throw InputError("ratio tables '" + a.mandible_id + "' and '" + b.mandible_id +
                         "' were built from different pair specs");
    }
}

}  // namespace

VariabilityReport landmark_variability(std::span<const LandmarkSet> sets) {
    if (sets.size() < 2) throw InputError("variability needs at least two marking sets");
    for (const auto& s : sets) {
        if (s.mandible_id != sets.front().mandible_id) {
            throw InputError("marking sets belong to different mandibles ('" + sets.front().mandible_id + "' vs '" +
                             s.mandible_id + "')");
        }
    }

    std::map<LandmarkKey, std::vector<Vec3>> markings;
    for (const auto& s : sets) {
        for (const auto& [key, lm] : s.landmarks) markings[key].push_back(lm.position.position);
    }

    VariabilityReport report;
    report.mandible_id = sets.front().mandible_id;
    for (const auto& [key, points] : markings) {
        if (points.size() < 2) {
            throw InputError("landmark " + to_string(key) + " is marked in only one set");
        }
        const double n = static_cast<double>(points.size());
        LandmarkVariability v;
        v.key = key;
        v.markings = points.size();
        for (const auto& p : points) v.centroid += p;
        v.centroid /= n;
        Vec3 sq = Vec3::Zero();
        for (const auto& p : points) sq += (p - v.centroid).cwiseAbs2();
        v.axis_std = (sq / n).cwiseSqrt();
        v.spread = std::sqrt(sq.sum() / n);
        report.landmarks.push_back(v);
    }
    std::stable_sort(report.landmarks.begin(), report.landmarks.end(),
                     [](const auto& a, const auto& b) { return a.spread < b.spread; });
    return report;
}

LandmarkSet consensus_landmarks(const TriangleMesh& mesh, std::span<const LandmarkSet> sets) {
    const auto report = landmark_variability(sets);
    LandmarkSet out;
    out.mandible_id = report.mandible_id;
    out.expert_id = "consensus";
    out.session_id = "consensus";
    for (const auto& v : report.landmarks) out.add({v.key, snap_to_surface(mesh, v.centroid)});
    return out;
}

const RatioEntry* RatioTable::find(const LandmarkPair& pair) const {
    for (const auto& e : entries) {
        if (e.pair == pair) return &e;
    }
    return nullptr;
}

RatioTable local_ratios(const GeodesicSolver& solver, const LandmarkSet& landmarks, const PairSpec& spec,
                        bool average_reference_sides) {
    spec.validate();
    auto length = [&](const LandmarkPair& p) {
        return solver.distance(landmarks.at(p.first).position, landmarks.at(p.second).position).length;
    };

    RatioTable table;
    table.mandible_id = landmarks.mandible_id;
    table.reference = spec.reference;
    table.reference_length = length(spec.reference);
    const auto mirrored = mirror(spec.reference);
    if (average_reference_sides && mirrored != spec.reference && landmarks.contains(mirrored.first) &&
        landmarks.contains(mirrored.second)) {
        table.reference_length = 0.5 * (table.reference_length + length(mirrored));
    }
    if (!(table.reference_length > 0.0)) {
        throw ComputeError("reference length " + to_string(spec.reference) + " is zero on mandible '" +
                           landmarks.mandible_id + "'");
    }

    for (const auto& pair : spec.pairs) {
        const double l = length(pair);
        table.entries.push_back({pair, l, l / table.reference_length});
    }
    return table;
}

RatioTable local_ratios(const TriangleMesh& mesh, const LandmarkSet& landmarks, const PairSpec& spec,
                        const RatioOptions& options) {
    const GeodesicSolver solver(mesh, options.refinement);
    return local_ratios(solver, landmarks, spec, options.average_reference_sides);
}

GlobalRatioTable global_ratios(const RatioTable& a, const RatioTable& b, double band) {
    require_same_pairs(a, b);
    GlobalRatioTable out;
    out.mandible_a = a.mandible_id;
    out.mandible_b = b.mandible_id;
    out.band = band;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        const auto& ea = a.entries[i];
        const auto& eb = b.entries[i];
        if (eb.ratio == 0.0) {
            throw ComputeError("local ratio " + to_string(eb.pair) + " is zero on mandible '" + b.mandible_id + "'");
        }
        GlobalRatioEntry g{ea.pair, ea.ratio, eb.ratio, ea.ratio / eb.ratio, false};
        const double dev = g.gr - 1.0;
        g.flagged = std::abs(dev) > band;
        out.flagged += g.flagged ? 1 : 0;
        out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(dev));
        sum_sq += dev * dev;
        out.entries.push_back(g);
    }
    out.rms_deviation = std::sqrt(sum_sq / static_cast<double>(out.entries.size()));
    return out;
}

SymmetryReport symmetry_report(const RatioTable& table) {
    auto first_sided = [](const LandmarkPair& p) {
        return p.first.side != Side::midline ? p.first.side : p.second.side;
    };
    SymmetryReport report;
    report.mandible_id = table.mandible_id;
    double sum_sq = 0.0;
    for (const auto& e : table.entries) {
        const auto m = mirror(e.pair);
        if (m == e.pair || m == LandmarkPair{e.pair.second, e.pair.first}) continue;
        const RatioEntry* other = table.find(m);
        if (!other) other = table.find({m.second, m.first});
        if (!other) {
            throw InputError("pair " + to_string(e.pair) + " has no mirrored counterpart in table '" +
                             table.mandible_id + "'");
        }
        if (first_sided(e.pair) != Side::left) continue;
        SymmetryEntry s{e.pair, other->pair, e.ratio, other->ratio, e.ratio / other->ratio - 1.0};
        sum_sq += s.relative_difference * s.relative_difference;
        report.max_abs_asymmetry = std::max(report.max_abs_asymmetry, std::abs(s.relative_difference));
        report.entries.push_back(s);
    }
    if (report.entries.empty()) {
        throw InputError("table '" + table.mandible_id + "' has no left/right pairs to compare");
    }
    report.rms_asymmetry = std::sqrt(sum_sq / static_cast<double>(report.entries.size()));
    return report;
}

std::vector<ConsistencyEntry> session_consistency(std::span<const RatioTable> tables) {
    if (tables.size() < 2) throw InputError("session consistency needs at least two ratio tables");
    for (const auto& t : tables) require_same_pairs(tables.front(), t);

    const double n = static_cast<double>(tables.size());
    std::vector<ConsistencyEntry> out;
    for (std::size_t i = 0; i < tables.front().entries.size(); ++i) {
        ConsistencyEntry c;
        c.pair = tables.front().entries[i].pair;
        c.tables = tables.size();
        for (const auto& t : tables) c.mean_ratio += t.entries[i].ratio;
        c.mean_ratio /= n;
        double sq = 0.0;
        for (const auto& t : tables) sq += (t.entries[i].ratio - c.mean_ratio) * (t.entries[i].ratio - c.mean_ratio);
        c.std_ratio = std::sqrt(sq / n);
        out.push_back(c);
    }
    return out;
}

}  // namespace mandible
