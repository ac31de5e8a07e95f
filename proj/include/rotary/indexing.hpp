#pragma once

// Rotary indexing plan: pass width, number of indexed passes, angular step
// and the faceting (sagitta) error they imply.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "rotary/common.hpp"

namespace rotary::indexing {

enum class DiameterBasis { stock, toolpath };
enum class PlanSource { overlap, tolerance, explicit_passes };

inline const char* to_string(DiameterBasis b) { return b == DiameterBasis::stock ? "stock" : "toolpath"; }

inline const char* to_string(PlanSource s) {
    switch (s) {
    case PlanSource::overlap: return "overlap";
    case PlanSource::tolerance: return "tolerance";
    case PlanSource::explicit_passes: return "explicit";
    }
    return "overlap";
}

inline std::optional<DiameterBasis> parse_basis(std::string_view text) {
    if (iequals(text, "stock")) return DiameterBasis::stock;
    if (iequals(text, "toolpath")) return DiameterBasis::toolpath;
    return std::nullopt;
}

inline constexpr double kDefaultOverlap = 0.8;
inline constexpr int kMinTolerancePasses = 3;

struct IndexingParams {
    double stock_diameter = 0.0;
    double tool_diameter = 0.0;
    double overlap = kDefaultOverlap;
    std::optional<double> error_tolerance;
    std::optional<int> explicit_passes;
    DiameterBasis basis = DiameterBasis::toolpath;
};

struct IndexingPlan {
    int num_passes = 1;
    double angle_per_pass = 360.0;  // degrees
    double pass_width = 0.0;        // mm
    double basis_diameter = 0.0;    // mm
    double stock_diameter = 0.0;    // mm
    double predicted_sagitta = 0.0; // mm
    PlanSource source = PlanSource::overlap;
    DiameterBasis basis = DiameterBasis::toolpath;

    std::string angle_label() const { return format_angle_label(angle_per_pass); }
    /// "passes: 33, angle: 10.91°"
    std::string caption() const {
        return "passes: " + std::to_string(num_passes) + ", angle: " + angle_label() + "\xC2\xB0";
    }
};

inline double pass_width(double tool_diameter, double overlap) {
    if (!(tool_diameter > 0)) throw DomainError("tool_diameter", "tool diameter must be positive");
    if (!(overlap > 0 && overlap <= 1)) throw DomainError("overlap", "overlap factor must be in (0, 1]");
    return overlap * tool_diameter;
}

inline void validate(const IndexingParams& p) {
    if (!(p.stock_diameter > 0)) throw DomainError("stock_diameter", "stock diameter must be positive");
    if (!(p.tool_diameter > 0)) throw DomainError("tool_diameter", "tool diameter must be positive");
    if (!(p.overlap > 0 && p.overlap <= 1)) throw DomainError("overlap", "overlap factor must be in (0, 1]");
    if (p.error_tolerance && p.explicit_passes)
        throw DomainError("passes", "give either an error tolerance or an explicit pass count, not both");
    if (p.basis == DiameterBasis::toolpath && !(p.stock_diameter - 2 * p.tool_diameter > 0))
        throw DomainError("tool_diameter", "tool diameter is too large for stock diameter");
}

/// Diameter whose circumference the passes must cover: the stock itself, or
/// the innermost diameter the tool reaches (stock - 2 * tool).
inline double basis_diameter(const IndexingParams& p) {
    return p.basis == DiameterBasis::stock ? p.stock_diameter : p.stock_diameter - 2 * p.tool_diameter;
}

inline int passes_from_overlap(const IndexingParams& p) {
    validate(p);
    const double w = pass_width(p.tool_diameter, p.overlap);
    const double n = std::ceil(pi * basis_diameter(p) / w);
    return std::max(1, static_cast<int>(n));
}

inline double angle_per_pass(int passes) {
    if (passes < 1) throw DomainError("passes", "pass count must be at least 1");
    return 360.0 / passes;
}

/// R * (1 - cos(theta)) with the full step angle in degrees.
inline double faceting_error_eq4(double stock_radius, double theta_deg) {
    if (!(stock_radius > 0)) throw DomainError("stock_radius", "stock radius must be positive");
    if (!(theta_deg >= 0 && theta_deg <= 360)) throw DomainError("angle", "angle must be in [0, 360] degrees");
    return stock_radius * (1.0 - std::cos(deg_to_rad(theta_deg)));
}

/// Maximum inward deviation of a regular N-gon inscribed in a circle of the
/// given radius: R * (1 - cos(pi / N)).
inline double sagitta_error(double stock_radius, int passes) {
    if (!(stock_radius > 0)) throw DomainError("stock_radius", "stock radius must be positive");
    if (passes < 3) throw DomainError("passes", "sagitta needs at least 3 passes");
    return stock_radius * (1.0 - std::cos(pi / passes));
}

/// Small-angle form R * pi^2 / (2 N^2).
inline double sagitta_error_approx(double stock_radius, int passes) {
    return stock_radius * pi * pi / (2.0 * static_cast<double>(passes) * passes);
}

inline int passes_from_tolerance(double stock_radius, double tolerance) {
    if (!(stock_radius > 0)) throw DomainError("stock_radius", "stock radius must be positive");
    if (!(tolerance > 0)) throw DomainError("tolerance", "error tolerance must be positive");
    if (!(tolerance < stock_radius))
        throw DomainError("tolerance", "error tolerance must be smaller than the stock radius");
    const double n = std::ceil(pi * std::sqrt(stock_radius / (2.0 * tolerance)));
    return std::max(kMinTolerancePasses, static_cast<int>(n));
}

/// Pass count from explicit_passes, else error_tolerance, else overlap.
inline IndexingPlan make_plan(const IndexingParams& p) {
    validate(p);
    IndexingPlan plan;
    plan.stock_diameter = p.stock_diameter;
    plan.basis = p.basis;
    plan.basis_diameter = basis_diameter(p);
    plan.pass_width = pass_width(p.tool_diameter, p.overlap);
    const double stock_radius = p.stock_diameter / 2;
    if (p.explicit_passes) {
        if (*p.explicit_passes < 1) throw DomainError("passes", "pass count must be at least 1");
        plan.num_passes = *p.explicit_passes;
        plan.source = PlanSource::explicit_passes;
    } else if (p.error_tolerance) {
        plan.num_passes = passes_from_tolerance(stock_radius, *p.error_tolerance);
        plan.source = PlanSource::tolerance;
    } else {
        plan.num_passes = passes_from_overlap(p);
        plan.source = PlanSource::overlap;
    }
    plan.angle_per_pass = angle_per_pass(plan.num_passes);
    plan.predicted_sagitta = stock_radius * (1.0 - std::cos(pi / plan.num_passes));
    return plan;
}

} // namespace rotary::indexing
