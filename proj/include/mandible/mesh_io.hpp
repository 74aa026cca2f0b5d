#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mandible/mesh.hpp"

namespace mandible {

enum class MeshFormat { obj, ply };

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Picks the format from the file extension (.obj / .ply, case-insensitive).
MeshFormat format_from_path(const std::filesystem::path& path);
MeshFormat parse_format(std::string_view name);

struct MeshFile {
    TriangleMesh mesh;
    std::vector<Rgb> colors;  // empty unless the PLY carried red/green/blue
    MeshReport report;
};

// OBJ: `v x y z` and `f i j k` (1-based, negative = relative; `i/t/n` forms
// accepted, polygons fan-triangulated). Everything else is ignored.
// PLY: ASCII only; vertex x,y,z (+ optional red,green,blue), faces of 3.
MeshFile read_mesh_file(const std::filesystem::path& path, MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format,
                       MeshReport* report = nullptr);

struct SaveReport {
    bool colors_written = false;
    bool colors_dropped = false;  // OBJ has no vertex color channel here
};

// Coordinates are written in shortest round-trip decimal form, so
// load(save(m)) reproduces every vertex bit for bit.
SaveReport save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format,
                     std::span<const Rgb> colors = {});

}  // namespace mandible
