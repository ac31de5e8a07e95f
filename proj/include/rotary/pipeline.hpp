#pragma once

// End-to-end job: parse, plan, convert and build previews. The command-line
// tool and the HTTP service both go through run_job, so identical inputs
// give identical G-code from either front end.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rotary/gcode.hpp"
#include "rotary/geometry.hpp"
#include "rotary/indexing.hpp"
#include "rotary/transform.hpp"

namespace rotary {

inline constexpr std::size_t kPreviewMaxProfilePoints = 2000;

struct JobParams {
    double stock_diameter = 0.0;
    std::optional<double> tool_diameter;  // unset: from comments, else fallback
    double overlap = indexing::kDefaultOverlap;
    std::optional<double> tolerance;
    std::optional<int> passes;
    indexing::DiameterBasis basis = indexing::DiameterBasis::toolpath;
    transform::MachineProfile profile;
    std::size_t preview_max_points = kPreviewMaxProfilePoints;
};

struct JobPlan {
    gcode::ToolMetadata metadata;
    indexing::IndexingPlan plan;
};

struct JobResult {
    JobPlan planned;
    transform::ConversionResult conversion;
    geometry::ToolpathPolyline polyline;
    std::optional<geometry::RevolvedMesh> mesh;
    std::vector<std::string> warnings;
    std::string gcode;
};

/// Metadata (with user overrides applied) and the indexing plan.
inline JobPlan plan_job(const gcode::GcodeProgram& program, const JobParams& params) {
    JobPlan out;
    out.metadata = gcode::extract_metadata(program);
    if (params.tool_diameter) {
        out.metadata.tool_diameter = *params.tool_diameter;
        out.metadata.diameter_source = gcode::Provenance::user;
    }
    if (params.profile.feed_override) {
        out.metadata.feedrate = *params.profile.feed_override;
        out.metadata.feedrate_source = gcode::Provenance::user;
    }
    indexing::IndexingParams ip;
    ip.stock_diameter = params.stock_diameter;
    ip.tool_diameter = out.metadata.tool_diameter;
    ip.overlap = params.overlap;
    ip.error_tolerance = params.tolerance;
    ip.explicit_passes = params.passes;
    ip.basis = params.basis;
    out.plan = indexing::make_plan(ip);
    return out;
}

/// Throws ParseError, DomainError or transform::ConversionRefused.
inline JobResult run_job(std::string_view text, std::string source_name, const JobParams& params) {
    const auto program = gcode::parse_program(text, std::move(source_name));
    JobResult job;
    job.planned = plan_job(program, params);
    job.conversion = transform::convert(program, job.planned.plan, params.profile);
    job.conversion.metadata = job.planned.metadata;
    job.warnings = job.conversion.warnings;
    job.gcode = job.conversion.text();

    job.polyline = geometry::extract_polyline(gcode::strip_axis(program, 'Y'));
    if (job.planned.plan.num_passes < 3) {
        job.warnings.push_back("3D preview needs at least 3 passes");
    } else {
        try {
            job.mesh = geometry::revolve(job.polyline, job.planned.plan.num_passes, params.preview_max_points);
        } catch (const DomainError& e) {
            job.warnings.push_back(std::string("3D preview unavailable: ") + e.what());
        }
    }
    return job;
}

inline nlohmann::json plan_document(const indexing::IndexingPlan& plan) {
    return {
        {"passes", plan.num_passes},
        {"angle_deg", plan.angle_per_pass},
        {"angle_label", plan.angle_label()},
        {"caption", plan.caption()},
        {"pass_width", plan.pass_width},
        {"basis_diameter", plan.basis_diameter},
        {"stock_diameter", plan.stock_diameter},
        {"predicted_sagitta", plan.predicted_sagitta},
        {"source", indexing::to_string(plan.source)},
        {"diameter_basis", indexing::to_string(plan.basis)},
    };
}

inline nlohmann::json metadata_document(const gcode::ToolMetadata& m) {
    nlohmann::json doc = {
        {"tool_diameter", m.tool_diameter},
        {"tool_diameter_source", gcode::to_string(m.diameter_source)},
        {"feedrate", m.feedrate},
        {"feedrate_source", gcode::to_string(m.feedrate_source)},
    };
    doc["spindle_speed"] = m.spindle_speed ? nlohmann::json(*m.spindle_speed) : nlohmann::json(nullptr);
    return doc;
}

inline nlohmann::json findings_document(const gcode::ValidationReport& report) {
    auto out = nlohmann::json::array();
    for (const auto& f : report.findings)
        out.push_back({{"severity", f.severity == gcode::Severity::fatal ? "fatal" : "warning"},
                       {"line", f.line},
                       {"message", f.message},
                       {"text", f.describe()}});
    return out;
}

/// Multi-line human-readable plan summary printed by the CLI.
inline std::string plan_summary(const JobPlan& jp) {
    const auto& p = jp.plan;
    std::string s;
    s += p.caption() + "\n";
    s += "source: " + std::string(indexing::to_string(p.source)) + ", basis: " + indexing::to_string(p.basis) +
         " (" + format_fixed(p.basis_diameter, 4) + " mm)\n";
    s += "pass width: " + format_fixed(p.pass_width, 4) + " mm\n";
    s += "predicted sagitta: " + format_fixed(p.predicted_sagitta, 6) + " mm\n";
    s += "tool diameter: " + format_fixed(jp.metadata.tool_diameter, 4) + " mm (" +
         gcode::to_string(jp.metadata.diameter_source) + ")\n";
    return s;
}

} // namespace rotary
