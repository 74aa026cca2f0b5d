#include "cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numbers>
#include <ostream>

#include "CLI11.hpp"
#include "mandible/compare.hpp"
#include "mandible/errors.hpp"
#include "mandible/geodesic.hpp"
#include "mandible/mesh_io.hpp"
#include "mandible/morphometrics.hpp"
#include "mandible/pipeline.hpp"
#include "mandible/registration.hpp"
#include "mandible/synth.hpp"

namespace mandible::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
    std::array<char, 32> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

TriangleMesh read_mesh(const fs::path& path, std::ostream& err) {
    MeshReport report;
    auto mesh = load_mesh(path, format_from_path(path), &report);
    if (report.dropped_degenerate > 0) {
        err << "warning: " << path.string() << ": dropped " << report.dropped_degenerate << " degenerate triangle(s)\n";
    }
    if (report.non_manifold_edges > 0) {
        err << "warning: " << path.string() << ": " << report.non_manifold_edges << " non-manifold edge(s)\n";
    }
    return mesh;
}

LandmarkSet read_landmarks(const fs::path& path, const TriangleMesh& mesh, std::ostream& err) {
    auto loaded = read_landmark_file(path, mesh);
    double worst = 0.0;
    LandmarkKey worst_key;
    for (const auto& [key, d] : loaded.snap_distances) {
        if (d > worst) {
            worst = d;
            worst_key = key;
        }
    }
    if (worst > 0.0) {
        err << "note: " << path.string() << ": landmarks snapped to surface, max " << num(worst) << " mm ("
            << to_string(worst_key) << ")\n";
    }
    return loaded.set;
}

std::ofstream open_text(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

void write_polyline_csv(const std::vector<Vec3>& polyline, const fs::path& path) {
    auto out = open_text(path);
    out << "x,y,z\n";
    for (const auto& p : polyline) out << num(p.x()) << ',' << num(p.y()) << ',' << num(p.z()) << '\n';
}

// ---------------------------------------------------------------------------

struct GeodesicArgs {
    std::string mesh, landmarks, from, to, path;
    int refine = kDefaultRefinement;
};

int cmd_geodesic(const GeodesicArgs& a, std::ostream& out, std::ostream& err) {
    const auto mesh = read_mesh(a.mesh, err);
    const auto set = read_landmarks(a.landmarks, mesh, err);
    const auto from = parse_landmark_key(a.from);
    const auto to = parse_landmark_key(a.to);
    const auto result = GeodesicSolver(mesh, a.refine).distance(set.at(from).position, set.at(to).position);
    out << num(result.length) << '\n';
    err << to_string(from) << " -> " << to_string(to) << ": " << num(result.length) << " mm (" << result.method_tag()
        << ", " << result.polyline.size() << " path points)\n";
    if (!a.path.empty()) write_polyline_csv(result.polyline, a.path);
    return kOk;
}

// ---------------------------------------------------------------------------

struct RatiosArgs {
    std::vector<std::string> meshes, landmarks;
    std::string pairs, out_dir = ".";
    int refine = kDefaultRefinement;
    double band = kDefaultRatioBand;
    bool average_reference = false;
};

int cmd_ratios(const RatiosArgs& a, std::ostream& out, std::ostream& err) {
    if (a.meshes.empty() || a.meshes.size() != a.landmarks.size()) {
        throw InputError("give one --landmarks file per --mesh");
    }
    const PairSpec spec = a.pairs.empty() ? default_pair_spec() : read_pair_spec(a.pairs);
    if (a.pairs.empty()) err << "note: using the built-in synthetic pair spec\n";
    fs::create_directories(a.out_dir);

    std::vector<RatioTable> tables;
    for (std::size_t i = 0; i < a.meshes.size(); ++i) {
        const auto mesh = read_mesh(a.meshes[i], err);
        const auto set = read_landmarks(a.landmarks[i], mesh, err);
        tables.push_back(local_ratios(mesh, set, spec, {a.refine, a.average_reference}));
        if (tables.back().mandible_id.empty()) tables.back().mandible_id = "m" + std::to_string(i + 1);
    }

    {
        auto csv = open_text(fs::path(a.out_dir) / "local_ratios.csv");
        csv << "index,mandible_id,pair,length_mm,reference_mm,lr\n";
        for (std::size_t i = 0; i < tables.size(); ++i) {
            for (const auto& e : tables[i].entries) {
                csv << i + 1 << ',' << tables[i].mandible_id << ',' << to_string(e.pair) << ',' << num(e.length) << ','
                    << num(tables[i].reference_length) << ',' << num(e.ratio) << '\n';
            }
        }
    }

    json summary;
    summary["pair_spec"] = pair_spec_to_json(spec);
    summary["mandibles"] = json::array();
    for (const auto& t : tables) {
        json m = {{"mandible_id", t.mandible_id}, {"reference_mm", t.reference_length}};
        try {
            const auto sym = symmetry_report(t);
            m["symmetry"] = {{"rms_asymmetry", sym.rms_asymmetry}, {"max_abs_asymmetry", sym.max_abs_asymmetry}};
        } catch (const InputError&) {
            m["symmetry"] = nullptr;
        }
        summary["mandibles"].push_back(m);
    }

    std::vector<std::pair<std::size_t, std::size_t>> combos;
    if (tables.size() == 2) combos.emplace_back(0, 1);
    if (tables.size() >= 3) {
        for (std::size_t i = 0; i < tables.size(); ++i) combos.emplace_back(i, (i + 1) % tables.size());
    }
    summary["global"] = json::array();
    for (auto [i, j] : combos) {
        const auto g = global_ratios(tables[i], tables[j], a.band);
        const auto name = "global_ratios_" + std::to_string(i + 1) + "_" + std::to_string(j + 1) + ".csv";
        auto csv = open_text(fs::path(a.out_dir) / name);
        csv << "pair,lr_a,lr_b,gr,flagged\n";
        for (const auto& e : g.entries) {
            csv << to_string(e.pair) << ',' << num(e.lr_a) << ',' << num(e.lr_b) << ',' << num(e.gr) << ','
                << (e.flagged ? 1 : 0) << '\n';
        }
        summary["global"].push_back({{"a", i + 1},
                                     {"b", j + 1},
                                     {"file", name},
                                     {"band", g.band},
                                     {"max_abs_deviation", g.max_abs_deviation},
                                     {"rms_deviation", g.rms_deviation},
                                     {"flagged", g.flagged}});
        out << "GR " << g.mandible_a << " / " << g.mandible_b << ": max |GR-1| " << num(g.max_abs_deviation)
            << ", RMS " << num(g.rms_deviation) << ", " << g.flagged << " flagged\n";
    }
    if (tables.size() >= 2) {
        json cons = json::array();
        for (const auto& c : session_consistency(tables)) {
            cons.push_back({{"pair", to_string(c.pair)}, {"mean_lr", c.mean_ratio}, {"std_lr", c.std_ratio}});
        }
        summary["consistency"] = cons;
    }
    write_json_file(summary, fs::path(a.out_dir) / "summary.json");
    out << "wrote " << tables.size() << " ratio table(s) to " << a.out_dir << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct VariabilityArgs {
    std::string mesh;
    std::vector<std::string> landmarks;
    std::string out = "variability.csv";
    std::string consensus;
};

int cmd_variability(const VariabilityArgs& a, std::ostream& out, std::ostream& err) {
    const auto mesh = read_mesh(a.mesh, err);
    std::vector<LandmarkSet> sets;
    for (const auto& f : a.landmarks) sets.push_back(read_landmarks(f, mesh, err));
    const auto report = landmark_variability(sets);

    auto csv = open_text(a.out);
    csv << "rank,landmark,markings,centroid_x,centroid_y,centroid_z,std_x,std_y,std_z,spread_mm\n";
    for (std::size_t i = 0; i < report.landmarks.size(); ++i) {
        const auto& v = report.landmarks[i];
        csv << i + 1 << ',' << to_string(v.key) << ',' << v.markings << ',' << num(v.centroid.x()) << ','
            << num(v.centroid.y()) << ',' << num(v.centroid.z()) << ',' << num(v.axis_std.x()) << ','
            << num(v.axis_std.y()) << ',' << num(v.axis_std.z()) << ',' << num(v.spread) << '\n';
    }
    if (!a.consensus.empty()) write_landmark_file(consensus_landmarks(mesh, sets), a.consensus);
    if (!report.landmarks.empty()) {
        out << "most reproducible: " << to_string(report.landmarks.front().key) << " (spread "
            << num(report.landmarks.front().spread) << " mm)\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct PipelineArgs {
    std::string config;
    std::vector<std::string> meshes, landmarks;
    std::string pairs, out_dir, mode, format, reference, distance;
    std::optional<int> refine;
    std::optional<double> factor, rms_budget;
    bool check = false;
    bool no_register = false;
};

int cmd_pipeline(const PipelineArgs& a, std::ostream& out, std::ostream& err) {
    PipelineConfig config;
    if (!a.config.empty()) {
        config = pipeline_config_from_json(read_json_file(a.config), fs::path(a.config).parent_path());
    }
    if (!a.meshes.empty() || !a.landmarks.empty()) {
        if (a.meshes.size() != 2 || a.landmarks.size() != 2) {
            throw InputError("give --mesh and --landmarks twice: source first, then target");
        }
        config.source_mesh = a.meshes[0];
        config.target_mesh = a.meshes[1];
        config.source_landmarks = a.landmarks[0];
        config.target_landmarks = a.landmarks[1];
    }
    if (config.source_mesh.empty()) throw InputError("no inputs: pass --config or --mesh/--landmarks");
    if (!a.pairs.empty()) config.pairs = a.pairs;
    if (!a.out_dir.empty()) config.out_dir = a.out_dir;
    if (!a.mode.empty()) config.mode = parse_scale_mode(a.mode);
    if (!a.format.empty()) config.output_format = parse_format(a.format);
    if (!a.reference.empty()) {
        if (a.reference == "geodesic") config.reference_metric = ReferenceMetric::geodesic;
        else if (a.reference == "chord") config.reference_metric = ReferenceMetric::chord;
        else throw InputError("--reference must be geodesic or chord");
    }
    if (!a.distance.empty()) {
        if (a.distance == "surface") config.distance_mode = DistanceMode::nearest_surface;
        else if (a.distance == "vertex") config.distance_mode = DistanceMode::nearest_vertex;
        else throw InputError("--distance must be surface or vertex");
    }
    if (a.refine) config.refinement = *a.refine;
    if (config.refinement < 0) throw InputError("--refine must be non-negative");
    if (a.factor) config.factor = *a.factor;
    if (a.rms_budget) config.rms_budget = *a.rms_budget;
    if (a.no_register) config.register_meshes = false;

    const auto source_mesh = read_mesh(config.source_mesh, err);
    const auto target_mesh = read_mesh(config.target_mesh, err);
    const auto source_set = read_landmarks(config.source_landmarks, source_mesh, err);
    const auto target_set = read_landmarks(config.target_landmarks, target_mesh, err);
    const auto reference = config.pairs ? read_pair_spec(*config.pairs).reference : default_reference_pair();

    const auto result = run_pipeline({source_mesh, source_set, target_mesh, target_set, reference}, config);
    write_pipeline_outputs(result, config, target_mesh);

    const auto& s = result.stats.forward.stats;
    out << "scale factor " << num(result.factor) << '\n';
    if (config.register_meshes) out << "chin-axis rotation " << num(result.registration.angle_deg) << " deg\n";
    out << "max " << num(s.max) << " mm, mean " << num(s.mean) << " mm, std " << num(s.std) << " mm, rms "
        << num(s.rms) << " mm\n";
    out << "verdict " << (result.pass ? "PASS" : "FAIL") << " (rms budget " << num(config.rms_budget) << " mm)\n";
    return (a.check && !result.pass) ? kVerdictFail : kOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string params, out_dir = ".", format = "obj", name = "mandible";
    std::optional<double> scale, asym_left, asym_right, roughness, perturb, rotate_deg;
    std::optional<int> tessellation;
    std::optional<std::uint64_t> seed;
    std::vector<double> translate;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
    PseudoMandibleParams p = a.params.empty() ? PseudoMandibleParams{}
                                              : pseudo_mandible_params_from_json(read_json_file(a.params));
    if (a.asym_left) p.asymmetry_left = *a.asym_left;
    if (a.asym_right) p.asymmetry_right = *a.asym_right;
    if (a.roughness) p.roughness = *a.roughness;
    if (a.tessellation) p.tessellation = *a.tessellation;
    if (a.seed) p.seed = *a.seed;
    if (a.scale) p = p.scaled(*a.scale);
    p.mandible_id = a.name;

    auto gen = make_pseudo_mandible(p);
    TriangleMesh mesh = std::move(gen.mesh);
    LandmarkSet set = std::move(gen.landmarks);

    if (a.rotate_deg || !a.translate.empty()) {
        if (!a.translate.empty() && a.translate.size() != 3) throw InputError("--translate takes three numbers");
        const auto chin = chin_landmarks();
        Vec3 centroid = Vec3::Zero();
        for (const auto& k : chin) centroid += set.position(k) / 3.0;
        const Vec3 axis = (set.position(default_chin_pair().second) - set.position(default_chin_pair().first)).normalized();
        auto t = RigidTransform::about_axis(axis, a.rotate_deg.value_or(0.0) * std::numbers::pi / 180.0, centroid);
        if (!a.translate.empty()) t.translation += Vec3(a.translate[0], a.translate[1], a.translate[2]);
        mesh = apply_transform(mesh, t);
        set = apply_transform(set, t);
    }
    if (a.perturb) set = perturb_landmarks(mesh, set, *a.perturb, p.seed);

    const auto format = parse_format(a.format);
    fs::create_directories(a.out_dir);
    const fs::path mesh_path = fs::path(a.out_dir) / (a.name + (format == MeshFormat::obj ? ".obj" : ".ply"));
    save_mesh(mesh, mesh_path, format);
    write_landmark_file(set, fs::path(a.out_dir) / (a.name + "_landmarks.json"));
    write_json_file(pair_spec_to_json(default_pair_spec()), fs::path(a.out_dir) / "pairs.json");
    out << "wrote " << mesh_path.string() << " (" << mesh.vertex_count() << " vertices, " << mesh.triangle_count()
        << " triangles, " << set.size() << " landmarks)\n";
    return kOk;
}

struct PrimitiveArgs {
    std::string kind = "icosphere", out;
    PrimitiveParams params;
    std::vector<double> radii;
};

int cmd_primitive(const PrimitiveArgs& a, std::ostream& out, std::ostream&) {
    auto params = a.params;
    if (!a.radii.empty()) {
        if (a.radii.size() != 3) throw InputError("--radii takes three numbers");
        params.radii = Vec3(a.radii[0], a.radii[1], a.radii[2]);
    }
    const auto mesh = make_primitive(parse_primitive_kind(a.kind), params);
    save_mesh(mesh, a.out, format_from_path(a.out));
    out << "wrote " << a.out << " (" << mesh.triangle_count() << " triangles, area " << num(surface_area(mesh))
        << " mm^2)\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Landmark-based mandible scaling, registration and surface comparison"};
    app.require_subcommand(1);

    GeodesicArgs geo;
    auto* geo_cmd = app.add_subcommand("geodesic", "Surface distance between two landmarks");
    geo_cmd->add_option("--mesh", geo.mesh, "Mesh file (.obj/.ply)")->required();
    geo_cmd->add_option("--landmarks", geo.landmarks, "Landmark JSON")->required();
    geo_cmd->add_option("--from", geo.from, "First landmark, e.g. 1 or 7L")->required();
    geo_cmd->add_option("--to", geo.to, "Second landmark, e.g. 7R")->required();
    geo_cmd->add_option("--refine", geo.refine, "Steiner refinement level k");
    geo_cmd->add_option("--path", geo.path, "Write the path polyline as CSV");

    RatiosArgs rat;
    auto* rat_cmd = app.add_subcommand("ratios", "Local and global landmark ratios");
    rat_cmd->add_option("--mesh", rat.meshes, "Mesh file, once per mandible")->required();
    rat_cmd->add_option("--landmarks", rat.landmarks, "Landmark JSON, once per mandible")->required();
    rat_cmd->add_option("--pairs", rat.pairs, "Pair spec JSON");
    rat_cmd->add_option("--refine", rat.refine, "Steiner refinement level k");
    rat_cmd->add_option("--band", rat.band, "Flag |GR-1| above this");
    rat_cmd->add_flag("--average-reference", rat.average_reference, "R = mean of left and right reference lengths");
    rat_cmd->add_option("--out", rat.out_dir, "Output directory");

    VariabilityArgs var;
    auto* var_cmd = app.add_subcommand("variability", "Marking variability across expert sessions");
    var_cmd->add_option("--mesh", var.mesh, "Mesh the markings were made on")->required();
    var_cmd->add_option("--landmarks", var.landmarks, "Two or more landmark JSON files")->required();
    var_cmd->add_option("--out", var.out, "Output CSV");
    var_cmd->add_option("--consensus", var.consensus, "Write consensus landmarks JSON");

    PipelineArgs pipe;
    auto* pipe_cmd = app.add_subcommand("pipeline", "Scale source to target, register, and compare surfaces");
    pipe_cmd->alias("scale-register-compare");
    pipe_cmd->add_option("--config", pipe.config, "Pipeline config JSON");
    pipe_cmd->add_option("--mesh", pipe.meshes, "Source then target mesh");
    pipe_cmd->add_option("--landmarks", pipe.landmarks, "Source then target landmarks");
    pipe_cmd->add_option("--pairs", pipe.pairs, "Pair spec JSON (reference pair)");
    pipe_cmd->add_option("--refine", pipe.refine, "Steiner refinement level k");
    pipe_cmd->add_option("--mode", pipe.mode, "uniform|growth");
    pipe_cmd->add_option("--factor", pipe.factor, "Use this scale factor instead of the reference ratio");
    pipe_cmd->add_option("--reference", pipe.reference, "geodesic|chord reference length");
    pipe_cmd->add_option("--distance", pipe.distance, "surface|vertex distance mode");
    pipe_cmd->add_option("--out", pipe.out_dir, "Output directory");
    pipe_cmd->add_option("--format", pipe.format, "obj|ply for the scaled mesh");
    pipe_cmd->add_flag("--check", pipe.check, "Exit 4 when the RMS budget is exceeded");
    pipe_cmd->add_option("--rms-budget", pipe.rms_budget, "RMS budget in mm");
    pipe_cmd->add_flag("--no-register", pipe.no_register, "Skip chin-axis registration");

    SynthArgs syn;
    auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic pseudo-mandible with landmarks");
    syn_cmd->add_option("--params", syn.params, "Generator parameter JSON");
    syn_cmd->add_option("--name", syn.name, "Mandible id and file stem");
    syn_cmd->add_option("--scale", syn.scale, "Uniform size multiplier");
    syn_cmd->add_option("--asymmetry-left", syn.asym_left);
    syn_cmd->add_option("--asymmetry-right", syn.asym_right);
    syn_cmd->add_option("--roughness", syn.roughness, "Surface noise, mm");
    syn_cmd->add_option("--tessellation", syn.tessellation);
    syn_cmd->add_option("--seed", syn.seed);
    syn_cmd->add_option("--perturb", syn.perturb, "Landmark marking noise sigma, mm");
    syn_cmd->add_option("--rotate-deg", syn.rotate_deg, "Rotate about the chin axis");
    syn_cmd->add_option("--translate", syn.translate, "Translate by x y z")->expected(3);
    syn_cmd->add_option("--out", syn.out_dir, "Output directory");
    syn_cmd->add_option("--format", syn.format, "obj|ply");

    PrimitiveArgs prim;
    auto* prim_cmd = app.add_subcommand("primitive", "Generate a plane grid, icosphere or ellipsoid");
    prim_cmd->add_option("--kind", prim.kind, "plane-grid|icosphere|ellipsoid");
    prim_cmd->add_option("--nx", prim.params.nx);
    prim_cmd->add_option("--ny", prim.params.ny);
    prim_cmd->add_option("--cell", prim.params.cell);
    prim_cmd->add_option("--radius", prim.params.radius);
    prim_cmd->add_option("--radii", prim.radii)->expected(3);
    prim_cmd->add_option("--level", prim.params.level);
    prim_cmd->add_option("--out", prim.out, "Output mesh file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*geo_cmd) return cmd_geodesic(geo, out, err);
        if (*rat_cmd) return cmd_ratios(rat, out, err);
        if (*var_cmd) return cmd_variability(var, out, err);
        if (*pipe_cmd) return cmd_pipeline(pipe, out, err);
        if (*syn_cmd) return cmd_synth(syn, out, err);
        if (*prim_cmd) return cmd_primitive(prim, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const ComputeError& e) {
        err << "error: " << e.what() << '\n';
        return kComputeError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}

}  // namespace mandible::cli
