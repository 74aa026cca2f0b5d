#include "mandible/pipeline.hpp"

#include <utility>

#include "mandible/errors.hpp"

namespace mandible {
namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const InputError& e) {
        throw InputError(std::string(name) + ": " + e.what());
    } catch (const ComputeError& e) {
        throw ComputeError(std::string(name) + ": " + e.what());
    }
}

LandmarkPair pair_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw InputError("landmark pair must be a two-element array");
    auto key = [](const nlohmann::json& k) {
        return k.is_string() ? parse_landmark_key(k.get<std::string>()) : key_from_json(k);
    };
    return {key(j[0]), key(j[1])};
}

}  // namespace

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    PipelineConfig c;
    auto path = [&](const char* key) { return base_dir / j.at(key).get<std::string>(); };
    try {
        c.source_mesh = path("source_mesh");
        c.source_landmarks = path("source_landmarks");
        c.target_mesh = path("target_mesh");
        c.target_landmarks = path("target_landmarks");
        if (j.contains("pairs")) c.pairs = path("pairs");
        if (j.contains("out_dir")) c.out_dir = path("out_dir");
        c.refinement = j.value("refine", c.refinement);
        c.register_meshes = j.value("register", c.register_meshes);
        c.rms_budget = j.value("rms_budget", c.rms_budget);
        if (j.contains("format")) c.output_format = parse_format(j.at("format").get<std::string>());
        if (j.contains("distance_mode")) {
            const auto m = j.at("distance_mode").get<std::string>();
            if (m == "surface") c.distance_mode = DistanceMode::nearest_surface;
            else if (m == "vertex") c.distance_mode = DistanceMode::nearest_vertex;
            else throw InputError("distance_mode must be surface or vertex");
        }
        if (j.contains("scaling")) {
            const auto& s = j.at("scaling");
            if (s.contains("factor")) c.factor = s.at("factor").get<double>();
            if (s.contains("r_source") || s.contains("r_target")) {
                c.reference_lengths = {s.at("r_source").get<double>(), s.at("r_target").get<double>()};
            }
            if (s.contains("mode")) c.mode = parse_scale_mode(s.at("mode").get<std::string>());
            if (s.contains("reference")) {
                const auto r = s.at("reference").get<std::string>();
                if (r == "geodesic") c.reference_metric = ReferenceMetric::geodesic;
                else if (r == "chord") c.reference_metric = ReferenceMetric::chord;
                else throw InputError("scaling.reference must be geodesic or chord");
            }
            if (s.contains("chin_pair")) c.chin_pair = pair_from_json(s.at("chin_pair"));
            if (s.contains("masseter_pair")) c.masseter_pair = pair_from_json(s.at("masseter_pair"));
        }
        if (j.contains("chin_axis")) {
            const auto& a = j.at("chin_axis");
            if (!a.is_array() || a.size() != 3) throw InputError("chin_axis must be [x, y, z]");
            c.chin_axis = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>()).normalized();
        }
        if (j.contains("axis_pairs")) {
            c.axis_pair_keys.clear();
            for (const auto& k : j.at("axis_pairs")) c.axis_pair_keys.push_back(parse_landmark_key(k.get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed pipeline config: ") + e.what());
    }
    if (c.refinement < 0) throw InputError("refine must be non-negative");
    return c;
}

PipelineResult run_pipeline(const PipelineInputs& in, const PipelineConfig& config) {
    // 1. Relative scaling factor from the reference pair.
    double r_source = 0.0, r_target = 0.0, factor = 1.0;
    stage("scaling factor", [&] {
        if (config.factor) {
            factor = *config.factor;
            if (!(factor > 0.0)) throw InputError("scale factor must be positive");
            return 0;
        }
        if (config.reference_lengths) {
            std::tie(r_source, r_target) = *config.reference_lengths;
        } else {
            const GeodesicSolver source_solver(in.source_mesh, config.refinement);
            const GeodesicSolver target_solver(in.target_mesh, config.refinement);
            r_source = reference_length(source_solver, in.source_landmarks, in.reference, config.reference_metric);
            r_target = reference_length(target_solver, in.target_landmarks, in.reference, config.reference_metric);
        }
        factor = scaling_factor(r_source, r_target);
        return 0;
    });

    // 2. Scale the source about its first chin landmark.
    const auto plan = stage("scaling", [&] {
        if (config.mode == ScaleMode::uniform) {
            return ScalePlan::uniform(factor, in.source_landmarks.position(config.chin_pair.first));
        }
        return ScalePlan::growth(factor, growth_frame(in.source_landmarks, config.chin_pair, config.masseter_pair));
    });
    auto scaled = stage("scaling", [&] { return scale_mesh(in.source_mesh, plan, &in.source_landmarks); });

    // 3. Chin-axis rigid registration onto the target.
    Vec3 axis = Vec3::UnitZ();
    RegistrationResult registration;
    stage("registration", [&] {
        if (config.chin_axis) {
            axis = config.chin_axis->normalized();
        } else {
            const Vec3 chord = in.target_landmarks.position(config.chin_pair.second) -
                               in.target_landmarks.position(config.chin_pair.first);
            if (chord.norm() == 0.0) throw ComputeError("chin pair is coincident on the target");
            axis = chord.normalized();
        }
        if (config.register_meshes) {
            registration = register_chin_axis(*scaled.landmarks, in.target_landmarks, axis, config.axis_pair_keys);
        }
        return 0;
    });
    TriangleMesh moved = config.register_meshes ? apply_transform(scaled.mesh, registration.transform)
                                                : std::move(scaled.mesh);
    LandmarkSet moved_landmarks = config.register_meshes ? apply_transform(*scaled.landmarks, registration.transform)
                                                         : std::move(*scaled.landmarks);

    // 4. Surface distances.
    DistanceOptions options;
    options.mode = config.distance_mode;
    options.source_id = in.source_landmarks.mandible_id + "_scaled";
    options.target_id = in.target_landmarks.mandible_id;
    auto stats = stage("compare", [&] { return symmetric_stats(moved, in.target_mesh, options); });

    const bool pass = stats.forward.stats.rms <= config.rms_budget;
    return PipelineResult{r_source, r_target, factor,         plan,  std::move(moved), std::move(moved_landmarks),
                          registration, axis, std::move(stats), pass};
}

nlohmann::json pipeline_summary(const PipelineResult& r, const PipelineConfig& config, const TriangleMesh& target_mesh) {
    nlohmann::json j;
    j["scaling"] = {{"factor", r.factor},
                    {"r_source_mm", r.r_source},
                    {"r_target_mm", r.r_target},
                    {"mode", to_string(r.plan.mode)},
                    {"reference", config.reference_metric == ReferenceMetric::geodesic ? "geodesic" : "chord"},
                    {"refine", config.refinement}};
    if (r.plan.frame) j["scaling"]["growth_angle_deg"] = r.plan.frame->angle_deg;

    nlohmann::json residuals = nlohmann::json::array();
    for (const auto& res : r.registration.residuals) {
        residuals.push_back({{"landmark", to_string(res.key)}, {"distance_mm", res.distance}});
    }
    j["registration"] = {{"enabled", config.register_meshes},
                         {"chin_axis", {r.chin_axis.x(), r.chin_axis.y(), r.chin_axis.z()}},
                         {"angle_deg", r.registration.angle_deg},
                         {"transform", transform_to_json(r.registration.transform, r.registration.rms_residual)},
                         {"residuals", residuals}};

    const auto& f = r.stats.forward.stats;
    j["forward"] = stats_to_json(f, r.scaled_mesh.vertex_count(), r.scaled_mesh.triangle_count());
    j["backward"] = stats_to_json(r.stats.backward.stats, target_mesh.vertex_count(), target_mesh.triangle_count());
    j["symmetric"] = stats_to_json(r.stats.symmetric, r.scaled_mesh.vertex_count() + target_mesh.vertex_count(),
                                   r.scaled_mesh.triangle_count() + target_mesh.triangle_count());
    j["max_mm"] = f.max;
    j["mean_mm"] = f.mean;
    j["std_mm"] = f.std;
    j["rms_mm"] = f.rms;
    j["rms_budget_mm"] = config.rms_budget;
    j["verdict"] = r.pass ? "PASS" : "FAIL";
    return j;
}

void write_pipeline_outputs(const PipelineResult& r, const PipelineConfig& config, const TriangleMesh& target_mesh) {
    std::filesystem::create_directories(config.out_dir);
    const auto& dir = config.out_dir;
    const char* ext = config.output_format == MeshFormat::obj ? "scaled_source.obj" : "scaled_source.ply";
    save_mesh(r.scaled_mesh, dir / ext, config.output_format);
    write_landmark_file(r.scaled_landmarks, dir / "scaled_landmarks.json");
    write_json_file(transform_to_json(r.registration.transform, r.registration.rms_residual), dir / "transform.json");
    export_distance_map(r.stats.forward, r.scaled_mesh, dir / "distance_map.ply");
    write_json_file(stats_to_json(r.stats.forward.stats, r.scaled_mesh.vertex_count(), r.scaled_mesh.triangle_count()),
                    dir / "stats.json");
    write_json_file(pipeline_summary(r, config, target_mesh), dir / "summary.json");
}

}  // namespace mandible
