#pragma once

// Indexed-rotary program synthesis. The planar XZ toolpath is sanitized
// (Y words stripped, program-end and tape markers removed) and replayed N
// times; before each replay the spindle stops, Z retracts to a safe height,
// Y moves to the absolute station angle k * theta and the spindle restarts.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rotary/common.hpp"
#include "rotary/gcode.hpp"
#include "rotary/indexing.hpp"

namespace rotary::transform {

inline constexpr double kAutoSafeZClearance = 5.0;  // mm above the highest programmed Z

struct MachineProfile {
    std::optional<double> safe_z;  // nullopt: highest program Z + clearance
    std::string spindle_on_command = "M3";
    std::optional<double> spindle_speed;  // unset: first S word of the source
    std::string spindle_off_command = "M5";
    double dwell_after_restart = 2.0;  // seconds
    std::optional<double> feed_override;
    std::optional<double> feed_scale;
    int decimals = 4;
};

inline void validate(const MachineProfile& p) {
    if (p.feed_override && p.feed_scale)
        throw DomainError("feed_override", "give either a feed override or a feed scale, not both");
    if (p.feed_override && !(*p.feed_override > 0))
        throw DomainError("feed_override", "feed override must be positive");
    if (p.feed_scale && !(*p.feed_scale > 0 && *p.feed_scale <= 1))
        throw DomainError("feed_scale", "feed scale must be in (0, 1]");
    if (p.spindle_speed && !(*p.spindle_speed > 0))
        throw DomainError("spindle_speed", "spindle speed must be positive");
    if (!(p.dwell_after_restart >= 0)) throw DomainError("dwell", "dwell must not be negative");
    if (p.decimals < 0 || p.decimals > 8) throw DomainError("decimals", "decimals must be in [0, 8]");
    for (const auto* cmd : {&p.spindle_on_command, &p.spindle_off_command}) {
        try {
            auto line = gcode::make_line(*cmd);
            if (line.words.empty() || line.has('Y')) throw DomainError("spindle command must be a plain M word");
        } catch (const ParseError&) {
            throw DomainError("spindle", "spindle command '" + *cmd + "' is not valid G-code");
        }
    }
}

/// Highest Z word in the program, or 0 when no Z is programmed.
inline double max_program_z(const gcode::GcodeProgram& program) {
    std::optional<double> top;
    for (const auto& line : program.lines)
        for (const auto& w : line.words)
            if (w.letter == 'Z' && (!top || w.value > *top)) top = w.value;
    return top.value_or(0.0);
}

inline double resolve_safe_z(const gcode::GcodeProgram& program, const MachineProfile& profile) {
    const double top = max_program_z(program);
    if (!profile.safe_z) return top + kAutoSafeZClearance;
    if (*profile.safe_z < top)
        throw DomainError("safe_z", "safe Z " + format_fixed(*profile.safe_z, profile.decimals) +
                                        " is below the highest toolpath Z " + format_fixed(top, profile.decimals));
    return *profile.safe_z;
}

/// Rewrites F words per the profile's override or scale. Lines carrying a
/// G0 word are returned untouched.
inline gcode::GcodeLine apply_feed_policy(const gcode::GcodeLine& line, const MachineProfile& profile) {
    if (!profile.feed_override && !profile.feed_scale) return line;
    if (line.has_command('G', 0)) return line;
    gcode::GcodeLine out = line;
    for (std::size_t i = line.words.size(); i-- > 0;) {
        const auto& w = line.words[i];
        if (w.letter != 'F') continue;
        const double feed = profile.feed_override ? *profile.feed_override : w.value * *profile.feed_scale;
        out = gcode::replace_word(out, i, "F" + format_fixed(feed, profile.decimals));
    }
    return out;
}

inline bool is_program_end(const gcode::GcodeLine& line) {
    return line.has_command('M', 2) || line.has_command('M', 30);
}

/// The replayable part of a sanitized program: everything except '%' tape
/// markers and M2/M30 lines, with LF terminators.
inline gcode::GcodeProgram toolpath_body(const gcode::GcodeProgram& sanitized) {
    gcode::GcodeProgram body;
    body.source_name = sanitized.source_name;
    for (const auto& line : sanitized.lines) {
        if (line.delimiter || is_program_end(line)) continue;
        auto copy = line;
        copy.eol = "\n";
        body.lines.push_back(std::move(copy));
    }
    return body;
}

struct ConversionStats {
    std::size_t output_line_count = 0;
    int pass_count = 0;
    double total_index_angle = 0.0;  // theta * (N - 1)
};

struct ConversionResult {
    gcode::GcodeProgram program;
    indexing::IndexingPlan plan;
    gcode::ToolMetadata metadata;
    gcode::ValidationReport report;
    std::vector<std::string> warnings;
    ConversionStats stats;
    double safe_z = 0.0;

    std::string text() const { return gcode::serialize(program); }
};

/// Conversion refused because the sanitized input is not a planar toolpath.
class ConversionRefused : public std::runtime_error {
public:
    explicit ConversionRefused(gcode::ValidationReport report)
        : std::runtime_error(summarize(report)), report_(std::move(report)) {}
    const gcode::ValidationReport& report() const noexcept { return report_; }

private:
    static std::string summarize(const gcode::ValidationReport& r) {
        for (const auto& f : r.findings)
            if (f.severity == gcode::Severity::fatal) return f.describe();
        return "conversion refused";
    }
    gcode::ValidationReport report_;
};

inline constexpr std::string_view kPassMarker = "ROTARY PASS ";
inline constexpr std::string_view kEndMarker = "ROTARY END";
// Lines between a pass header and the first toolpath line.
inline constexpr std::size_t kBlockPreambleLines = 8;

inline std::string index_value(const indexing::IndexingPlan& plan, int k, int decimals) {
    return format_fixed(plan.angle_per_pass * k, decimals);
}

inline ConversionResult convert(const gcode::GcodeProgram& program, const indexing::IndexingPlan& plan,
                                const MachineProfile& profile) {
    validate(profile);
    if (plan.num_passes < 1) throw DomainError("passes", "pass count must be at least 1");

    const auto sanitized = gcode::strip_axis(program, 'Y');
    auto report = gcode::validate_planar(sanitized);
    if (report.has_fatal()) throw ConversionRefused(std::move(report));

    ConversionResult result;
    result.plan = plan;
    result.metadata = gcode::extract_metadata(program);
    result.safe_z = resolve_safe_z(sanitized, profile);
    for (const auto& f : report.findings) result.warnings.push_back(f.describe());
    result.report = std::move(report);

    auto body = toolpath_body(sanitized);
    std::optional<double> first_feed;
    for (auto& line : body.lines) {
        line = apply_feed_policy(line, profile);
        if (first_feed || line.has_command('G', 0)) continue;
        if (const auto* f = line.find('F'); f && f->value > 0) first_feed = f->value;
    }
    const double active_feed =
        first_feed ? *first_feed
                   : (profile.feed_override
                          ? *profile.feed_override
                          : result.metadata.feedrate * profile.feed_scale.value_or(1.0));
    const auto speed = profile.spindle_speed ? profile.spindle_speed : result.metadata.spindle_speed;

    const int d = profile.decimals;
    const std::string safe = format_fixed(result.safe_z, d);
    const std::string spindle_on =
        profile.spindle_on_command + (speed ? " S" + format_fixed(*speed, d) : std::string());

    auto& out = result.program.lines;
    out.reserve(6 + plan.num_passes * (kBlockPreambleLines + 1 + body.lines.size()) + 5);
    auto emit = [&](const std::string& text) { out.push_back(gcode::make_line(text)); };

    emit("(ROTARY INDEXED PROGRAM)");
    emit("(PASSES " + std::to_string(plan.num_passes) + " STEP " + format_fixed(plan.angle_per_pass, d) +
         " DEG SOURCE " + indexing::to_string(plan.source) + " BASIS " + indexing::to_string(plan.basis) + ")");
    emit("(SAFE Z " + safe + ")");
    emit("G21");
    emit("G90");
    for (int k = 0; k < plan.num_passes; ++k) {
        const std::string y = index_value(plan, k, d);
        emit("(" + std::string(kPassMarker) + std::to_string(k + 1) + "/" + std::to_string(plan.num_passes) +
             " Y=" + y + ")");
        emit("G21");
        emit("G90");
        emit(profile.spindle_off_command);
        emit("G0 Z" + safe);
        emit("G0 Y" + y);
        emit(spindle_on);
        emit("G4 P" + format_fixed(profile.dwell_after_restart, d));
        emit("F" + format_fixed(active_feed, d));
        for (const auto& line : body.lines) out.push_back(line);
    }
    emit("(" + std::string(kEndMarker) + ")");
    emit(profile.spindle_off_command);
    emit("G0 Z" + safe);
    emit("G0 Y" + format_fixed(0.0, d));
    emit("M30");

    result.program.source_name = program.source_name;
    result.stats.output_line_count = out.size();
    result.stats.pass_count = plan.num_passes;
    result.stats.total_index_angle = plan.angle_per_pass * (plan.num_passes - 1);
    return result;
}

/// Splits a converted program into its per-pass toolpath regions (the lines
/// after each pass preamble), serialized. Empty if no pass headers exist.
inline std::vector<std::string> pass_regions(const gcode::GcodeProgram& output) {
    std::vector<std::size_t> headers;
    std::size_t end = output.lines.size();
    for (std::size_t i = 0; i < output.lines.size(); ++i) {
        const auto& line = output.lines[i];
        if (line.comments.size() != 1 || !line.words.empty()) continue;
        const auto& text = line.comments.front().text;
        if (text.starts_with(kPassMarker)) headers.push_back(i);
        else if (text == kEndMarker) end = i;
    }
    std::vector<std::string> regions;
    for (std::size_t h = 0; h < headers.size(); ++h) {
        const std::size_t from = headers[h] + 1 + kBlockPreambleLines;
        const std::size_t to = h + 1 < headers.size() ? headers[h + 1] : end;
        std::string region;
        for (std::size_t i = from; i < to && i < output.lines.size(); ++i) region += gcode::serialize(output.lines[i]);
        regions.push_back(std::move(region));
    }
    return regions;
}

/// Checks the indexing contract on a converted program and returns every
/// violation found (empty when the program conforms):
///  - exactly N pass blocks, with Y values k * theta in order;
///  - each index move preceded by spindle off and a retract to safe Z and
///    followed by a spindle restart;
///  - Y only on bare "G0 Y<v>" lines, never on G1 lines;
///  - when `expected_body` is given, each pass region equals it byte for byte.
inline std::vector<std::string> verify_injection(const gcode::GcodeProgram& output,
                                                 const indexing::IndexingPlan& plan, const MachineProfile& profile,
                                                 double safe_z, const std::string* expected_body = nullptr) {
    std::vector<std::string> problems;
    const int d = profile.decimals;
    const std::string safe_line = "G0 Z" + format_fixed(safe_z, d);

    std::vector<std::size_t> headers;
    for (std::size_t i = 0; i < output.lines.size(); ++i) {
        const auto& line = output.lines[i];
        if (line.words.empty() && line.comments.size() == 1 &&
            line.comments.front().text.starts_with(kPassMarker))
            headers.push_back(i);
    }
    if (static_cast<int>(headers.size()) != plan.num_passes)
        problems.push_back("expected " + std::to_string(plan.num_passes) + " pass blocks, found " +
                           std::to_string(headers.size()));

    for (std::size_t k = 0; k < headers.size(); ++k) {
        const std::size_t h = headers[k];
        const std::string tag = "pass " + std::to_string(k + 1) + ": ";
        if (h + kBlockPreambleLines >= output.lines.size()) {
            problems.push_back(tag + "truncated preamble");
            continue;
        }
        auto at = [&](std::size_t off) -> const std::string& { return output.lines[h + off].text; };
        const std::string y_line = "G0 Y" + index_value(plan, static_cast<int>(k), d);
        if (at(5) != y_line) problems.push_back(tag + "index line '" + at(5) + "' != '" + y_line + "'");
        if (at(3) != profile.spindle_off_command) problems.push_back(tag + "index not preceded by spindle off");
        if (at(4) != safe_line) problems.push_back(tag + "index not preceded by retract to safe Z");
        if (!at(6).starts_with(profile.spindle_on_command)) problems.push_back(tag + "index not followed by spindle on");
    }

    for (const auto& line : output.lines) {
        if (!line.has('Y')) continue;
        const bool index_line = line.words.size() == 2 && line.words[0].is('G', 0) && line.words[1].letter == 'Y';
        if (!index_line) problems.push_back("Y word outside an index line: '" + line.text + "'");
        if (line.has_command('G', 1)) problems.push_back("Y word on a G1 line: '" + line.text + "'");
    }

    if (expected_body) {
        const auto regions = pass_regions(output);
        for (std::size_t k = 0; k < regions.size(); ++k)
            if (regions[k] != *expected_body)
                problems.push_back("pass " + std::to_string(k + 1) + ": toolpath differs from sanitized source");
    }
    return problems;
}

} // namespace rotary::transform
