// rotary-post: convert a planar XZ G-code toolpath into an indexed-rotary
// program for a 3-axis GRBL machine whose Y axis drives a rotary chuck.
//
// Exit status: 0 success, 1 invalid input/parameters, 2 I/O failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rotary/pipeline.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

void write_file(const fs::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << data;
    if (!out.flush()) throw IoError("cannot write " + path.string());
}

fs::path default_output(const fs::path& input) {
    fs::path out = input;
    out.replace_extension(".rotary.gcode");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convert planar XZ G-code into indexed-rotary G-code (Y axis as rotary index)"};
    app.set_version_flag("--version", rotary::kVersion);

    std::string input;
    std::string output;
    std::optional<double> stock_diameter;
    std::optional<double> stock_radius;
    std::optional<double> tool_diameter;
    double overlap = rotary::indexing::kDefaultOverlap;
    std::optional<double> tolerance;
    std::optional<int> passes;
    std::string basis = "toolpath";
    std::string safe_z = "auto";
    std::optional<double> feed_override;
    std::optional<double> feed_scale;
    std::optional<double> spindle_speed;
    double dwell = 2.0;
    int decimals = 4;
    std::string obj_path;
    std::string preview_path;
    std::string mesh_json_path;
    bool plan_only = false;
    bool strict = false;

    app.add_option("input", input, "Planar XZ G-code file (.gcode, .nc, .txt)")->required();
    app.add_option("-o,--output", output, "Converted G-code path (default: <input>.rotary.gcode)");
    auto* sd = app.add_option("--stock-diameter", stock_diameter, "Stock diameter in mm");
    auto* sr = app.add_option("--stock-radius", stock_radius, "Stock radius in mm");
    sd->excludes(sr);
    app.add_option("--tool-diameter", tool_diameter, "Tool diameter in mm (default: from comments, else 3.175)");
    app.add_option("--overlap", overlap, "Overlap factor in (0, 1]")->capture_default_str();
    auto* tol = app.add_option("--tolerance", tolerance, "Maximum faceting error in mm; sets the pass count");
    auto* np = app.add_option("--passes", passes, "Explicit number of indexed passes");
    tol->excludes(np);
    app.add_option("--basis", basis, "Diameter basis for overlap planning")
        ->check(CLI::IsMember({"toolpath", "stock"}))
        ->capture_default_str();
    app.add_option("--safe-z", safe_z, "Retract height in mm, or 'auto'")->capture_default_str();
    auto* fo = app.add_option("--feed-override", feed_override, "Replace every feed word with this value (mm/min)");
    auto* fs_ = app.add_option("--feed-scale", feed_scale, "Multiply every feed word by this factor in (0, 1]");
    fo->excludes(fs_);
    app.add_option("--spindle-speed", spindle_speed, "Spindle speed for restarts (default: first S word)");
    app.add_option("--dwell", dwell, "Dwell after spindle restart, seconds")->capture_default_str();
    app.add_option("--decimals", decimals, "Decimal places for synthesized numbers")->capture_default_str();
    app.add_option("--obj", obj_path, "Write the revolved preview mesh as Wavefront OBJ");
    app.add_option("--preview", preview_path, "Write the 2D toolpath plot document (JSON)");
    app.add_option("--mesh-json", mesh_json_path, "Write the revolved preview mesh document (JSON)");
    app.add_flag("--plan-only", plan_only, "Print the indexing plan without writing G-code");
    app.add_flag("--strict", strict, "Treat validation warnings as errors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    if (!stock_diameter && !stock_radius) {
        std::cerr << "error: one of --stock-diameter or --stock-radius is required\n";
        return kExitInvalid;
    }

    rotary::JobParams params;
    params.stock_diameter = stock_diameter ? *stock_diameter : 2 * *stock_radius;
    params.tool_diameter = tool_diameter;
    params.overlap = overlap;
    params.tolerance = tolerance;
    params.passes = passes;
    params.basis = *rotary::indexing::parse_basis(basis);
    params.profile.feed_override = feed_override;
    params.profile.feed_scale = feed_scale;
    params.profile.spindle_speed = spindle_speed;
    params.profile.dwell_after_restart = dwell;
    params.profile.decimals = decimals;
    if (!rotary::iequals(safe_z, "auto")) {
        try {
            std::size_t used = 0;
            params.profile.safe_z = std::stod(safe_z, &used);
            if (used != safe_z.size()) throw std::invalid_argument(safe_z);
        } catch (const std::exception&) {
            std::cerr << "error: --safe-z must be a number or 'auto'\n";
            return kExitInvalid;
        }
    }

    const fs::path input_path(input);
    const std::string name = input_path.filename().string();
    try {
        const std::string text = read_file(input_path);
        const auto program = rotary::gcode::parse_program(text, name);
        const auto planned = rotary::plan_job(program, params);
        std::cout << rotary::plan_summary(planned);

        std::optional<rotary::JobResult> job;
        std::vector<std::string> warnings;
        if (!plan_only) {
            job = rotary::run_job(text, name, params);
            warnings = job->warnings;
        } else {
            const auto report = rotary::gcode::validate_planar(rotary::gcode::strip_axis(program, 'Y'));
            if (report.has_fatal()) throw rotary::transform::ConversionRefused(report);
            for (const auto& f : report.findings) warnings.push_back(f.describe());
        }
        for (const auto& w : warnings) std::cerr << "warning: " << name << ": " << w << "\n";
        if (strict && !warnings.empty()) {
            std::cerr << "error: " << name << ": warnings are errors under --strict\n";
            return kExitInvalid;
        }

        if (job) {
            const fs::path out_path = output.empty() ? default_output(input_path) : fs::path(output);
            write_file(out_path, job->gcode);
            std::cout << "wrote " << out_path.string() << " (" << job->conversion.stats.output_line_count
                      << " lines, " << job->conversion.stats.pass_count << " passes)\n";
        }

        if (!obj_path.empty() || !preview_path.empty() || !mesh_json_path.empty()) {
            const auto polyline = rotary::geometry::extract_polyline(rotary::gcode::strip_axis(program, 'Y'));
            if (!preview_path.empty()) write_file(preview_path, rotary::geometry::preview_2d(polyline).dump(2) + "\n");
            if (!obj_path.empty() || !mesh_json_path.empty()) {
                const auto mesh = rotary::geometry::revolve(polyline, planned.plan.num_passes);
                if (!obj_path.empty())
                    write_file(obj_path, rotary::geometry::export_mesh(mesh, rotary::geometry::MeshFormat::wavefront_obj));
                if (!mesh_json_path.empty())
                    write_file(mesh_json_path, rotary::geometry::export_mesh(mesh, rotary::geometry::MeshFormat::mesh_json));
            }
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const rotary::ParseError& e) {
        std::cerr << "error: " << name << ": " << e.detail() << " at line " << e.line() << ", column "
                  << e.column() << "\n";
        return kExitInvalid;
    } catch (const rotary::transform::ConversionRefused& e) {
        for (const auto& f : e.report().findings)
            std::cerr << (f.severity == rotary::gcode::Severity::fatal ? "error: " : "warning: ") << name << ": "
                      << f.describe() << "\n";
        return kExitInvalid;
    } catch (const rotary::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return 0;
}
