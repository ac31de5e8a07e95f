#pragma once

// Validation geometry: the planar XZ toolpath as a polyline, the surface of
// revolution it sweeps when indexed about X, and a brute-force measure of
// how far that faceted surface strays from a nominal cylinder.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rotary/common.hpp"
#include "rotary/gcode.hpp"

namespace rotary::geometry {

enum class MoveKind { rapid, feed };

inline const char* to_string(MoveKind k) { return k == MoveKind::rapid ? "rapid" : "feed"; }

struct Point2 {
    double x = 0.0;
    double z = 0.0;
    bool operator==(const Point2&) const = default;
};

struct Bounds {
    double x_min = 0.0, x_max = 0.0, z_min = 0.0, z_max = 0.0;
};

struct ToolpathPolyline {
    std::vector<Point2> points;
    std::vector<MoveKind> kinds;  // kinds[i] describes points[i] -> points[i + 1]
    Bounds bounds;

    bool empty() const { return kinds.empty(); }
    std::size_t segment_count() const { return kinds.size(); }
};

/// Follows modal X/Z and motion mode (G0 until told otherwise) from the
/// origin. Arcs are treated as straight feed moves to their end point.
inline ToolpathPolyline extract_polyline(const gcode::GcodeProgram& program) {
    ToolpathPolyline out;
    Point2 pos;
    MoveKind mode = MoveKind::rapid;
    for (const auto& line : program.lines) {
        bool moved = false;
        Point2 next = pos;
        for (const auto& w : line.words) {
            if (w.letter == 'G') {
                if (w.value == 0) mode = MoveKind::rapid;
                else if (w.value == 1 || w.value == 2 || w.value == 3) mode = MoveKind::feed;
            } else if (w.letter == 'X') {
                next.x = w.value;
                moved = true;
            } else if (w.letter == 'Z') {
                next.z = w.value;
                moved = true;
            }
        }
        if (!moved) continue;
        if (out.points.empty()) out.points.push_back(pos);
        out.points.push_back(next);
        out.kinds.push_back(mode);
        pos = next;
    }
    if (!out.points.empty()) {
        auto& b = out.bounds;
        b.x_min = b.x_max = out.points.front().x;
        b.z_min = b.z_max = out.points.front().z;
        for (const auto& p : out.points) {
            b.x_min = std::min(b.x_min, p.x);
            b.x_max = std::max(b.x_max, p.x);
            b.z_min = std::min(b.z_min, p.z);
            b.z_max = std::max(b.z_max, p.z);
        }
    }
    return out;
}

using Vec3 = std::array<double, 3>;
using Face = std::array<std::size_t, 3>;

struct RevolvedMesh {
    std::vector<Vec3> vertices;  // station-major: vertex(j, p) = j * profile_points + p
    std::vector<Face> faces;
    int stations = 0;
    std::size_t profile_points = 0;

    double angle_per_station() const { return stations > 0 ? 360.0 / stations : 0.0; }
};

namespace detail {

struct Chain {
    std::vector<Point2> points;
    bool closed = false;
};

// Maximal runs of consecutive feed segments; zero-length steps collapse and a
// run that returns exactly to its start becomes a closed loop.
inline std::vector<Chain> feed_chains(const ToolpathPolyline& profile) {
    std::vector<Chain> chains;
    Chain current;
    auto flush = [&] {
        if (current.points.size() >= 2) {
            if (current.points.size() > 3 && current.points.front() == current.points.back()) {
                current.points.pop_back();
                current.closed = true;
            }
            chains.push_back(std::move(current));
        }
        current = Chain{};
    };
    for (std::size_t i = 0; i < profile.kinds.size(); ++i) {
        if (profile.kinds[i] != MoveKind::feed) {
            flush();
            continue;
        }
        if (current.points.empty()) current.points.push_back(profile.points[i]);
        if (!(profile.points[i + 1] == current.points.back())) current.points.push_back(profile.points[i + 1]);
    }
    flush();
    return chains;
}

inline Chain thin(const Chain& chain, std::size_t stride) {
    if (stride <= 1 || chain.points.size() <= 2) return chain;
    Chain out;
    out.closed = chain.closed;
    for (std::size_t i = 0; i < chain.points.size(); i += stride) out.points.push_back(chain.points[i]);
    if (!chain.closed && !(out.points.back() == chain.points.back())) out.points.push_back(chain.points.back());
    return out;
}

} // namespace detail

/// Revolves the feed segments of `profile` about the X axis at `stations`
/// equally spaced angles, station 0 at angle 0. Profile point (x, z) lands at
/// (x, z sin phi, z cos phi). Each quad between neighbouring stations is
/// split along the same diagonal. `max_profile_points` (0 = unlimited)
/// thins long profiles for previews, always keeping chain end points.
inline RevolvedMesh revolve(const ToolpathPolyline& profile, int stations, std::size_t max_profile_points = 0) {
    if (stations < 3) throw DomainError("passes", "revolving needs at least 3 stations");
    auto chains = detail::feed_chains(profile);
    if (chains.empty()) throw DomainError("profile", "toolpath has no feed segments to revolve");

    std::size_t total = 0;
    for (const auto& c : chains) total += c.points.size();
    if (max_profile_points > 0 && total > max_profile_points) {
        const std::size_t stride = (total + max_profile_points - 1) / max_profile_points;
        for (auto& c : chains) c = detail::thin(c, stride);
        total = 0;
        for (const auto& c : chains) total += c.points.size();
    }

    RevolvedMesh mesh;
    mesh.stations = stations;
    mesh.profile_points = total;
    mesh.vertices.reserve(total * static_cast<std::size_t>(stations));
    for (int j = 0; j < stations; ++j) {
        const double phi = 2.0 * pi * j / stations;
        const double s = std::sin(phi);
        const double c = std::cos(phi);
        for (const auto& chain : chains)
            for (const auto& p : chain.points) mesh.vertices.push_back({p.x, p.z * s, p.z * c});
    }

    const std::size_t m = total;
    std::size_t offset = 0;
    for (const auto& chain : chains) {
        const std::size_t n = chain.points.size();
        const std::size_t edges = chain.closed ? n : n - 1;
        for (std::size_t e = 0; e < edges; ++e) {
            const std::size_t p = offset + e;
            const std::size_t q = offset + (e + 1) % n;
            for (int j = 0; j < stations; ++j) {
                const std::size_t j2 = static_cast<std::size_t>((j + 1) % stations);
                const std::size_t a = static_cast<std::size_t>(j) * m + p;
                const std::size_t b = static_cast<std::size_t>(j) * m + q;
                const std::size_t c = j2 * m + q;
                const std::size_t d = j2 * m + p;
                mesh.faces.push_back({a, b, c});
                mesh.faces.push_back({a, c, d});
            }
        }
        offset += n;
    }
    return mesh;
}

/// Densely samples every facet (barycentric grid, `samples_per_edge`
/// intervals per edge) and returns the largest |R - distance to X axis|.
inline double max_radial_deviation(const RevolvedMesh& mesh, double nominal_radius, int samples_per_edge = 100) {
    const int n = std::max(1, samples_per_edge);
    double worst = 0.0;
    for (const auto& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        for (int i = 0; i <= n; ++i) {
            for (int k = 0; k <= n - i; ++k) {
                const double wb = static_cast<double>(i) / n;
                const double wc = static_cast<double>(k) / n;
                const double wa = static_cast<double>(n - i - k) / n;
                const double y = wa * a[1] + wb * b[1] + wc * c[1];
                const double z = wa * a[2] + wb * b[2] + wc * c[2];
                worst = std::max(worst, std::abs(nominal_radius - std::hypot(y, z)));
            }
        }
    }
    return worst;
}

enum class MeshFormat { wavefront_obj, mesh_json };

inline MeshFormat parse_mesh_format(std::string_view name) {
    if (iequals(name, "obj") || iequals(name, "wavefront-obj")) return MeshFormat::wavefront_obj;
    if (iequals(name, "json") || iequals(name, "mesh-json")) return MeshFormat::mesh_json;
    throw DomainError("format", "unknown mesh format '" + std::string(name) + "'");
}

inline nlohmann::json mesh_document(const RevolvedMesh& mesh) {
    nlohmann::json doc;
    doc["format"] = "rotary-mesh";
    doc["version"] = 1;
    doc["axis"] = "X";
    doc["stations"] = mesh.stations;
    doc["angle_deg"] = mesh.angle_per_station();
    doc["angle_label"] = format_angle_label(mesh.angle_per_station());
    doc["profile_points"] = mesh.profile_points;
    auto& verts = doc["vertices"] = nlohmann::json::array();
    for (const auto& v : mesh.vertices) verts.push_back({v[0], v[1], v[2]});
    auto& faces = doc["faces"] = nlohmann::json::array();
    for (const auto& f : mesh.faces) faces.push_back({f[0], f[1], f[2]});
    return doc;
}

inline std::string export_mesh(const RevolvedMesh& mesh, MeshFormat format) {
    if (format == MeshFormat::mesh_json) return mesh_document(mesh).dump();
    std::string out;
    out.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 20);
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %s %s %s\n", format_fixed(v[0], 6).c_str(),
                      format_fixed(v[1], 6).c_str(), format_fixed(v[2], 6).c_str());
        out += buf;
    }
    for (const auto& f : mesh.faces) {
        std::snprintf(buf, sizeof(buf), "f %zu %zu %zu\n", f[0] + 1, f[1] + 1, f[2] + 1);
        out += buf;
    }
    return out;
}

inline std::string export_mesh(const RevolvedMesh& mesh, std::string_view format) {
    return export_mesh(mesh, parse_mesh_format(format));
}

/// Plot document for the X-vs-Z toolpath view.
inline nlohmann::json preview_2d(const ToolpathPolyline& profile) {
    nlohmann::json doc;
    doc["format"] = "rotary-toolpath-2d";
    doc["version"] = 1;
    doc["axes"] = {{"horizontal", "X"}, {"vertical", "Z"}};
    const auto& b = profile.bounds;
    doc["bounds"] = {{"x_min", b.x_min}, {"x_max", b.x_max}, {"z_min", b.z_min}, {"z_max", b.z_max}};
    auto& segs = doc["segments"] = nlohmann::json::array();
    for (std::size_t i = 0; i < profile.kinds.size(); ++i) {
        const auto& p = profile.points[i];
        const auto& q = profile.points[i + 1];
        segs.push_back({{"kind", to_string(profile.kinds[i])}, {"from", {p.x, p.z}}, {"to", {q.x, q.z}}});
    }
    return doc;
}

} // namespace rotary::geometry
