#include "mandible/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "mandible/errors.hpp"

namespace mandible {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view tok, const std::string& where) {
    T value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw InputError(where + ": cannot parse number '" + std::string(tok) + "'");
    }
    return value;
}

void append_double(std::string& out, double v) {
    std::array<char, 32> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), ptr);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

MeshFile read_obj(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        if (toks[0] == "v") {
            if (toks.size() < 4) throw InputError(where + ": vertex needs three coordinates");
            vertices.emplace_back(parse_number<double>(toks[1], where), parse_number<double>(toks[2], where),
                                  parse_number<double>(toks[3], where));
        } else if (toks[0] == "f") {
            if (toks.size() < 4) throw InputError(where + ": face needs at least three indices");
            std::vector<std::uint32_t> poly;
            for (std::size_t k = 1; k < toks.size(); ++k) {
                const auto idx = parse_number<long long>(toks[k].substr(0, toks[k].find('/')), where);
                const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(vertices.size()) + idx;
                if (idx == 0 || resolved < 0) throw InputError(where + ": invalid face index");
                poly.push_back(static_cast<std::uint32_t>(resolved));
            }
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) triangles.push_back({poly[0], poly[k], poly[k + 1]});
        }
    }
    MeshReport report;
    auto mesh = TriangleMesh::from_soup(std::move(vertices), std::move(triangles), &report);
    return MeshFile{std::move(mesh), {}, report};
}

struct PlyProperty {
    std::string name;
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

MeshFile read_ply(const std::filesystem::path& path) {
    auto in = open_input(path);
    const std::string fname = path.filename().string();
    std::string line;
    if (!std::getline(in, line) || split_ws(line) != std::vector<std::string_view>{"ply"}) {
        throw InputError(fname + ": missing 'ply' magic");
    }

    std::vector<PlyElement> elements;
    bool ascii = false;
    bool header_done = false;
    while (std::getline(in, line)) {
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0] == "format") {
            if (toks.size() < 2 || toks[1] != "ascii") throw InputError(fname + ": only ASCII PLY is supported");
            ascii = true;
        } else if (toks[0] == "element") {
            if (toks.size() != 3) throw InputError(fname + ": malformed element line");
            elements.push_back({std::string(toks[1]), parse_number<std::size_t>(toks[2], fname), {}});
        } else if (toks[0] == "property") {
            if (elements.empty()) throw InputError(fname + ": property before element");
            if (toks.size() == 5 && toks[1] == "list") {
                elements.back().properties.push_back({std::string(toks[4]), true});
            } else if (toks.size() == 3) {
                elements.back().properties.push_back({std::string(toks[2]), false});
            } else {
                throw InputError(fname + ": malformed property line");
            }
        } else if (toks[0] == "end_header") {
            header_done = true;
            break;
        }
    }
    if (!header_done || !ascii) throw InputError(fname + ": incomplete PLY header");

    std::stringstream body;
    body << in.rdbuf();
    const std::string data = body.str();
    const auto toks = split_ws(data);
    std::size_t pos = 0;
    auto next = [&]() -> std::string_view {
        if (pos >= toks.size()) throw InputError(fname + ": unexpected end of data");
        return toks[pos++];
    };

    std::vector<Vec3> vertices;
    std::vector<Rgb> colors;
    std::vector<Triangle> triangles;
    for (const auto& el : elements) {
        auto find = [&](std::string_view n) -> std::optional<std::size_t> {
            for (std::size_t i = 0; i < el.properties.size(); ++i) {
                if (el.properties[i].name == n) return i;
            }
            return std::nullopt;
        };
        if (el.name == "vertex") {
            const auto ix = find("x"), iy = find("y"), iz = find("z");
            if (!ix || !iy || !iz) throw InputError(fname + ": vertex element lacks x/y/z");
            const auto ir = find("red"), ig = find("green"), ib = find("blue");
            const bool has_color = ir && ig && ib;
            std::vector<double> values(el.properties.size());
            for (std::size_t n = 0; n < el.count; ++n) {
                for (std::size_t p = 0; p < el.properties.size(); ++p) {
                    if (el.properties[p].is_list) {
                        const auto len = parse_number<std::size_t>(next(), fname);
                        for (std::size_t q = 0; q < len; ++q) next();
                    } else {
                        values[p] = parse_number<double>(next(), fname);
                    }
                }
                vertices.emplace_back(values[*ix], values[*iy], values[*iz]);
                if (has_color) {
                    auto channel = [&](std::size_t i) {
                        const double c = values[i];
                        if (!(c >= 0 && c <= 255)) throw InputError(fname + ": color channel out of range");
                        return static_cast<std::uint8_t>(c);
                    };
                    colors.push_back({channel(*ir), channel(*ig), channel(*ib)});
                }
            }
        } else if (el.name == "face") {
            auto idx = find("vertex_indices");
            if (!idx) idx = find("vertex_index");
            if (!idx || !el.properties[*idx].is_list) throw InputError(fname + ": face element lacks index list");
            for (std::size_t n = 0; n < el.count; ++n) {
                for (std::size_t p = 0; p < el.properties.size(); ++p) {
                    if (el.properties[p].is_list) {
                        const auto len = parse_number<std::size_t>(next(), fname);
                        if (p == *idx) {
                            if (len != 3) throw InputError(fname + ": only triangular faces are supported");
                            Triangle t{};
                            for (auto& v : t) {
                                const auto i = parse_number<long long>(next(), fname);
                                if (i < 0) throw InputError(fname + ": negative face index");
                                v = static_cast<std::uint32_t>(i);
                            }
                            triangles.push_back(t);
                        } else {
                            for (std::size_t q = 0; q < len; ++q) next();
                        }
                    } else {
                        next();
                    }
                }
            }
        } else {
            for (std::size_t n = 0; n < el.count; ++n) {
                for (const auto& prop : el.properties) {
                    if (prop.is_list) {
                        const auto len = parse_number<std::size_t>(next(), fname);
                        for (std::size_t q = 0; q < len; ++q) next();
                    } else {
                        next();
                    }
                }
            }
        }
    }

    MeshReport report;
    auto mesh = TriangleMesh::from_soup(std::move(vertices), std::move(triangles), &report);
    return MeshFile{std::move(mesh), std::move(colors), report};
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

}  // namespace

MeshFormat parse_format(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "obj") return MeshFormat::obj;
    if (lower == "ply" || lower == "ply-ascii") return MeshFormat::ply;
    throw InputError("unknown mesh format '" + std::string(name) + "'");
}

MeshFormat format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    if (ext.empty()) throw InputError("cannot infer mesh format of " + path.string());
    return parse_format(std::string_view(ext).substr(1));
}

MeshFile read_mesh_file(const std::filesystem::path& path, MeshFormat format) {
    return format == MeshFormat::obj ? read_obj(path) : read_ply(path);
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format, MeshReport* report) {
    auto file = read_mesh_file(path, format);
    if (report) *report = file.report;
    return std::move(file.mesh);
}

SaveReport save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format,
                     std::span<const Rgb> colors) {
    if (!colors.empty() && colors.size() != mesh.vertex_count()) {
        throw InputError("color count does not match vertex count");
    }
    SaveReport report;
    std::string text;
    text.reserve(mesh.vertex_count() * 64 + mesh.triangle_count() * 24);

    if (format == MeshFormat::obj) {
        report.colors_dropped = !colors.empty();
        for (const auto& v : mesh.vertices()) {
            text += "v ";
            append_double(text, v.x());
            text += ' ';
            append_double(text, v.y());
            text += ' ';
            append_double(text, v.z());
            text += '\n';
        }
        for (const auto& t : mesh.triangles()) {
            text += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' +
                    std::to_string(t[2] + 1) + '\n';
        }
    } else {
        report.colors_written = !colors.empty();
        text += "ply\nformat ascii 1.0\n";
        text += "element vertex " + std::to_string(mesh.vertex_count()) + "\n";
        text += "property double x\nproperty double y\nproperty double z\n";
        if (report.colors_written) text += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
        text += "element face " + std::to_string(mesh.triangle_count()) + "\n";
        text += "property list uchar int vertex_indices\nend_header\n";
        for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
            const auto& v = mesh.vertices()[i];
            append_double(text, v.x());
            text += ' ';
            append_double(text, v.y());
            text += ' ';
            append_double(text, v.z());
            if (report.colors_written) {
                const auto& c = colors[i];
                text += ' ' + std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b);
            }
            text += '\n';
        }
        for (const auto& t : mesh.triangles()) {
            text += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
        }
    }

    auto out = open_output(path);
    out << text;
    if (!out) throw InputError("failed writing " + path.string());
    return report;
}

}  // namespace mandible
