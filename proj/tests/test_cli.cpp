#include <catch_amalgamated.hpp>

#include "rotary/pipeline.hpp"
#include "support/test_support.hpp"

using namespace rotary;
using testing::quote;
using testing::run_command;

namespace {

std::string post() { return quote(ROTARY_POST_EXE); }

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

} // namespace

TEST_CASE("plan-only prints the caption and writes nothing", "[cli]") {
    testing::ScratchDir dir("cli-plan");
    const auto input = dir / "part.nc";
    testing::write_file(input, testing::read_file(testing::corpus_dir() / "fusion_parallel.nc"));
    const auto r = run_command(post() + " " + quote(input) + " --stock-radius 11 --passes 33 --plan-only");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("passes: 33, angle: 10.91\xC2\xB0") != std::string::npos);
    CHECK(r.output.find("source: explicit") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "part.rotary.gcode"));
}

TEST_CASE("default overlap plan writes twenty blocks", "[cli]") {
    testing::ScratchDir dir("cli-default");
    const auto input = dir / "part.nc";
    testing::write_file(input, testing::read_file(testing::corpus_dir() / "camworks_crlf.txt"));
    const auto r = run_command(post() + " " + quote(input) + " --stock-diameter 22 --tool-diameter 3.175 --overlap 0.8");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("passes: 20, angle: 18.00\xC2\xB0") != std::string::npos);
    const auto out = testing::read_file(dir / "part.rotary.gcode");
    CHECK(count(out, "(ROTARY PASS ") == 20);
    CHECK(count(out, "\nG0 Y") == 21);
    CHECK(out.find("G0 Y342.0000\n") != std::string::npos);
}

TEST_CASE("CLI output matches the library byte for byte", "[cli]") {
    testing::ScratchDir dir("cli-equal");
    for (const auto& path : testing::corpus_files()) {
        INFO(path.filename().string());
        const auto out = dir / "out.gcode";
        const auto r = run_command(post() + " " + quote(path) + " --stock-radius 11 --passes 33 -o " + quote(out));
        REQUIRE(r.exit_code == 0);
        JobParams params;
        params.stock_diameter = 22;
        params.passes = 33;
        const auto job = run_job(testing::read_file(path), path.filename().string(), params);
        CHECK(testing::read_file(out) == job.gcode);
    }
}

TEST_CASE("arc input is refused with the offending line", "[cli]") {
    testing::ScratchDir dir("cli-arc");
    const auto input = dir / "arc.gcode";
    testing::write_file(input, "G21\nG90\nG1 X0 Z5 F300\nG2 X1 Z1 I0.5\n");
    const auto r = run_command(post() + " " + quote(input) + " --stock-diameter 22");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("arc motion unsupported at line 4") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "arc.rotary.gcode"));

    const auto plan_only = run_command(post() + " " + quote(input) + " --stock-diameter 22 --plan-only");
    CHECK(plan_only.exit_code == 1);
    CHECK(plan_only.output.find("arc motion unsupported at line 4") != std::string::npos);
}

TEST_CASE("exit codes for bad input", "[cli]") {
    testing::ScratchDir dir("cli-exit");
    SECTION("missing file is an I/O failure") {
        const auto r = run_command(post() + " " + quote(dir / "nope.nc") + " --stock-diameter 22");
        CHECK(r.exit_code == 2);
    }
    SECTION("unwritable output is an I/O failure") {
        const auto input = dir / "ok.nc";
        testing::write_file(input, "G21\nG90\nG1 X1 Z1 F100\n");
        const auto r = run_command(post() + " " + quote(input) + " --stock-diameter 22 -o " +
                                   quote(dir / "missing-dir" / "out.gcode"));
        CHECK(r.exit_code == 2);
    }
    SECTION("parse error names line and column") {
        const auto input = dir / "bad.nc";
        testing::write_file(input, "G21\nG1 X\n");
        const auto r = run_command(post() + " " + quote(input) + " --stock-diameter 22");
        CHECK(r.exit_code == 1);
        CHECK(r.output.find("bad.nc") != std::string::npos);
        CHECK(r.output.find("line 2, column 4") != std::string::npos);
    }
    SECTION("stock size is required") {
        const auto input = dir / "ok.nc";
        testing::write_file(input, "G21\nG90\nG1 X1 Z1 F100\n");
        CHECK(run_command(post() + " " + quote(input)).exit_code == 1);
        CHECK(run_command(post() + " " + quote(input) + " --stock-diameter 22 --stock-radius 11").exit_code == 1);
    }
    SECTION("implausible parameters") {
        const auto input = dir / "ok.nc";
        testing::write_file(input, "G21\nG90\nG1 X1 Z1 F100\n");
        for (const char* args : {"--stock-diameter -3", "--stock-diameter 22 --tool-diameter 11.1",
                                 "--stock-diameter 22 --overlap 1.5", "--stock-diameter 22 --passes 0",
                                 "--stock-diameter 22 --safe-z 0.5", "--stock-diameter 22 --basis radial",
                                 "--stock-diameter 22 --tolerance 0.1 --passes 4"}) {
            INFO(args);
            CHECK(run_command(post() + " " + quote(input) + " " + args).exit_code == 1);
        }
    }
    SECTION("strict turns warnings into errors") {
        const auto input = dir / "warn.nc";
        testing::write_file(input, "G1 X1 Z1 F100\n");
        CHECK(run_command(post() + " " + quote(input) + " --stock-diameter 22").exit_code == 0);
        CHECK(run_command(post() + " " + quote(input) + " --stock-diameter 22 --strict").exit_code == 1);
    }
}

TEST_CASE("preview exports", "[cli]") {
    testing::ScratchDir dir("cli-preview");
    const auto input = dir / "cyl.nc";
    testing::write_file(input, "G21\nG90\nG0 X0 Z11\nG1 X10 F300\nG1 X20\nG0 Z15\n");
    const auto r = run_command(post() + " " + quote(input) + " --stock-radius 11 --passes 40 --obj " +
                               quote(dir / "m.obj") + " --preview " + quote(dir / "p.json") + " --mesh-json " +
                               quote(dir / "m.json"));
    REQUIRE(r.exit_code == 0);
    const auto obj = testing::read_file(dir / "m.obj");
    CHECK(count(obj, "v ") == 40 * 3);
    const auto preview = nlohmann::json::parse(testing::read_file(dir / "p.json"));
    CHECK(preview["segments"].size() == 4);
    const auto mesh = nlohmann::json::parse(testing::read_file(dir / "m.json"));
    CHECK(mesh["stations"] == 40);
    CHECK(mesh["angle_label"] == "9.00");
}

TEST_CASE("version flag", "[cli]") {
    const auto r = run_command(post() + " --version");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find(kVersion) != std::string::npos);
}
