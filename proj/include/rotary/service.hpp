#pragma once

// Stateless HTTP API for the web client.
//
//   POST /api/convert   multipart/form-data: file + parameter fields
//   GET  /api/health
//
// Uploads are buffered in memory, converted and answered; nothing is written
// to disk and no state survives a request. Request handling is split from
// the transport (handle_convert works on an already-parsed form) so the
// validation rules can be exercised without a socket.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "httplib.h"
#include "json.hpp"
#include "rotary/pipeline.hpp"

namespace rotary::service {

inline constexpr std::size_t kDefaultMaxFileBytes = 5u * 1024u * 1024u;

struct Config {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_file_bytes = kDefaultMaxFileBytes;
};

struct FormPart {
    std::string content;
    std::string filename;  // empty for plain fields
};

using Form = std::map<std::string, FormPart>;

struct Reply {
    int status = 200;
    nlohmann::json body;
};

inline bool accepted_extension(std::string_view filename) {
    const auto ext = std::filesystem::path(std::string(filename)).extension().string();
    return iequals(ext, ".gcode") || iequals(ext, ".nc") || iequals(ext, ".txt");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Collects field-level problems while reading optional typed fields. Empty
// strings count as absent, the way HTML forms submit untouched inputs.
class FieldReader {
public:
    explicit FieldReader(const Form& form) : form_(form) {}

    std::optional<std::string_view> raw(const std::string& name) const {
        auto it = form_.find(name);
        if (it == form_.end()) return std::nullopt;
        auto v = trim(it->second.content);
        if (v.empty()) return std::nullopt;
        return v;
    }

    std::optional<double> number(const std::string& name) {
        auto v = raw(name);
        if (!v) return std::nullopt;
        double out = 0;
        auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc() || ptr != v->data() + v->size() || !std::isfinite(out)) {
            fail(name, "must be a number");
            return std::nullopt;
        }
        return out;
    }

    std::optional<int> integer(const std::string& name) {
        auto v = raw(name);
        if (!v) return std::nullopt;
        int out = 0;
        auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc() || ptr != v->data() + v->size()) {
            fail(name, "must be a whole number");
            return std::nullopt;
        }
        return out;
    }

    void fail(const std::string& name, std::string message) { errors_.emplace(name, std::move(message)); }
    const std::map<std::string, std::string>& errors() const { return errors_; }

private:
    const Form& form_;
    std::map<std::string, std::string> errors_;
};

inline Reply field_errors(const std::map<std::string, std::string>& errors) {
    nlohmann::json fields = nlohmann::json::object();
    for (const auto& [k, v] : errors) fields[k] = v;
    return {400, {{"error", "invalid parameters"}, {"fields", fields}}};
}

} // namespace detail

inline Reply handle_health(const Config& config) {
    return {200, {{"status", "ok"}, {"version", kVersion}, {"max_file_bytes", config.max_file_bytes}}};
}

/// Validates the form, runs the conversion and builds the response document.
/// 400: bad parameters or file type; 413: file over the limit; 422: G-code
/// that cannot be parsed or is not a planar toolpath.
inline Reply handle_convert(const Form& form, const Config& config) {
    detail::FieldReader in(form);

    const auto file = form.find("file");
    if (file == form.end() || file->second.filename.empty()) {
        in.fail("file", "missing value");
    } else if (file->second.content.size() > config.max_file_bytes) {
        return {413,
                {{"error", "file too large"},
                 {"fields", {{"file", "exceeds " + std::to_string(config.max_file_bytes) + " bytes"}}},
                 {"max_file_bytes", config.max_file_bytes}}};
    } else if (!accepted_extension(file->second.filename)) {
        in.fail("file", "invalid file type; expected .gcode, .nc or .txt");
    }

    JobParams params;
    const auto stock_radius = in.number("stock_radius");
    if (!stock_radius) {
        if (!in.errors().count("stock_radius")) in.fail("stock_radius", "missing value");
    } else if (!(*stock_radius > 0)) {
        in.fail("stock_radius", "must be greater than zero");
    } else {
        params.stock_diameter = 2 * *stock_radius;
    }

    // "steps per revolution" is the number of indexed stops, same as passes.
    const auto passes = in.integer("passes");
    const auto steps = in.integer("steps_per_rev");
    if (passes && steps && *passes != *steps) in.fail("steps_per_rev", "conflicts with passes");
    params.passes = passes ? passes : steps;
    if (params.passes && *params.passes < 1) in.fail(passes ? "passes" : "steps_per_rev", "must be at least 1");

    if (auto v = in.number("overlap")) {
        if (!(*v > 0 && *v <= 1)) in.fail("overlap", "must be in (0, 1]");
        params.overlap = *v;
    }
    params.tolerance = in.number("tolerance");
    if (params.tolerance && !(*params.tolerance > 0)) in.fail("tolerance", "must be greater than zero");
    if (params.tolerance && params.passes) in.fail("tolerance", "give either tolerance or passes, not both");

    params.tool_diameter = in.number("tool_diameter");
    if (params.tool_diameter && !(*params.tool_diameter > 0)) in.fail("tool_diameter", "must be greater than zero");

    params.profile.feed_override = in.number("feed_override");
    if (params.profile.feed_override && !(*params.profile.feed_override > 0))
        in.fail("feed_override", "must be greater than zero");
    params.profile.feed_scale = in.number("feed_scale");
    if (params.profile.feed_scale && !(*params.profile.feed_scale > 0 && *params.profile.feed_scale <= 1))
        in.fail("feed_scale", "must be in (0, 1]");
    if (params.profile.feed_override && params.profile.feed_scale)
        in.fail("feed_scale", "give either feed_override or feed_scale, not both");

    if (auto v = in.raw("diameter_basis")) {
        if (auto b = indexing::parse_basis(*v)) params.basis = *b;
        else in.fail("diameter_basis", "must be 'stock' or 'toolpath'");
    }
    if (auto v = in.raw("safe_z"); v && !iequals(*v, "auto")) params.profile.safe_z = in.number("safe_z");

    if (!in.errors().empty()) return detail::field_errors(in.errors());

    JobResult job;
    try {
        job = run_job(file->second.content, file->second.filename, params);
    } catch (const ParseError& e) {
        return {422,
                {{"error", "G-code parse error"},
                 {"message", e.what()},
                 {"line", e.line()},
                 {"column", e.column()}}};
    } catch (const transform::ConversionRefused& e) {
        return {422,
                {{"error", "G-code is not a planar XZ toolpath"},
                 {"message", e.what()},
                 {"findings", findings_document(e.report())}}};
    } catch (const DomainError& e) {
        const std::string field = e.field().empty() ? "parameters" : e.field();
        return detail::field_errors({{field == "stock_diameter" ? "stock_radius" : field, e.what()}});
    }

    nlohmann::json body;
    body["source_name"] = file->second.filename;
    body["plan"] = plan_document(job.planned.plan);
    body["metadata"] = metadata_document(job.planned.metadata);
    body["warnings"] = job.warnings;
    body["findings"] = findings_document(job.conversion.report);
    body["preview_2d"] = geometry::preview_2d(job.polyline);
    body["mesh"] = job.mesh ? geometry::mesh_document(*job.mesh) : nlohmann::json(nullptr);
    body["safe_z"] = job.conversion.safe_z;
    body["stats"] = {{"output_line_count", job.conversion.stats.output_line_count},
                     {"pass_count", job.conversion.stats.pass_count},
                     {"total_index_angle", job.conversion.stats.total_index_angle}};
    body["gcode"] = job.gcode;
    return {200, std::move(body)};
}

inline Form form_from_request(const httplib::Request& req) {
    Form form;
    for (const auto& [name, part] : req.files) form[name] = FormPart{part.content, part.filename};
    for (const auto& [name, value] : req.params) form.try_emplace(name, FormPart{value, {}});
    return form;
}

inline void send(httplib::Response& res, const Reply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
}

/// Registers the API routes. The transport-level payload cap sits above the
/// file limit so oversize uploads still reach the handler and get a JSON 413.
inline void mount(httplib::Server& server, const Config& config) {
    server.set_payload_max_length(config.max_file_bytes * 2 + (1u << 20));
    server.Get("/api/health", [config](const httplib::Request&, httplib::Response& res) {
        send(res, handle_health(config));
    });
    server.Post("/api/convert", [config](const httplib::Request& req, httplib::Response& res) {
        if (!req.is_multipart_form_data()) {
            send(res, detail::field_errors({{"file", "expected multipart/form-data upload"}}));
            return;
        }
        send(res, handle_convert(form_from_request(req), config));
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        nlohmann::json body = {{"error", httplib::status_message(res.status)}, {"status", res.status}};
        res.set_content(body.dump(), "application/json");
        return httplib::Server::HandlerResponse::Handled;
    });
}

} // namespace rotary::service
