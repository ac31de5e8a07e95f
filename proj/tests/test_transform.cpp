#include "rotary/transform.hpp"

#include <catch_amalgamated.hpp>

#include "rotary/pipeline.hpp"
#include "support/test_support.hpp"

using namespace rotary;
using namespace rotary::transform;
using Catch::Approx;

namespace {

indexing::IndexingPlan plan_of(int n) {
    indexing::IndexingPlan plan;
    plan.num_passes = n;
    plan.angle_per_pass = indexing::angle_per_pass(n);
    plan.source = indexing::PlanSource::explicit_passes;
    return plan;
}

MachineProfile profile_with_safe_z(double z) {
    MachineProfile p;
    p.safe_z = z;
    return p;
}

std::string sanitized_body(const gcode::GcodeProgram& program) {
    return gcode::serialize(toolpath_body(gcode::strip_axis(program, 'Y')));
}

} // namespace

TEST_CASE("golden two-pass program", "[transform]") {
    const auto program = gcode::parse_program("G1 X0 Z-1 F300\nG1 X10 Z-1\n");
    const auto result = convert(program, plan_of(2), profile_with_safe_z(5));
    const std::string expected =
        "(ROTARY INDEXED PROGRAM)\n"
        "(PASSES 2 STEP 180.0000 DEG SOURCE explicit BASIS toolpath)\n"
        "(SAFE Z 5.0000)\n"
        "G21\n"
        "G90\n"
        "(ROTARY PASS 1/2 Y=0.0000)\n"
        "G21\n"
        "G90\n"
        "M5\n"
        "G0 Z5.0000\n"
        "G0 Y0.0000\n"
        "M3\n"
        "G4 P2.0000\n"
        "F300.0000\n"
        "G1 X0 Z-1 F300\n"
        "G1 X10 Z-1\n"
        "(ROTARY PASS 2/2 Y=180.0000)\n"
        "G21\n"
        "G90\n"
        "M5\n"
        "G0 Z5.0000\n"
        "G0 Y180.0000\n"
        "M3\n"
        "G4 P2.0000\n"
        "F300.0000\n"
        "G1 X0 Z-1 F300\n"
        "G1 X10 Z-1\n"
        "(ROTARY END)\n"
        "M5\n"
        "G0 Z5.0000\n"
        "G0 Y0.0000\n"
        "M30\n";
    CHECK(result.text() == expected);
    CHECK(result.stats.pass_count == 2);
    CHECK(result.stats.output_line_count == 32);
    CHECK(result.stats.total_index_angle == Approx(180));
    CHECK(result.safe_z == 5.0);
    // no G21/G90 in the source: two program-wide warnings
    CHECK(result.warnings.size() == 2);
}

TEST_CASE("single pass leaves the toolpath untouched", "[transform]") {
    const auto program = gcode::parse_program("G21\nG90\nG0 X0 Z5\nG1 Z-1 F300\nG1 X10\n");
    const auto result = convert(program, plan_of(1), {});
    const auto regions = pass_regions(result.program);
    REQUIRE(regions.size() == 1);
    CHECK(regions[0] == gcode::serialize(program));
    CHECK(result.text().find("G0 Y0.0000\n") != std::string::npos);
    CHECK(verify_injection(result.program, plan_of(1), {}, result.safe_z, &regions[0]).empty());
}

TEST_CASE("Y words are removed before replication", "[transform]") {
    const auto program = gcode::parse_program("G21\nG90\nG1 X5 Y2 Z-1 F200\nG0 Y7\nG1 X6\n");
    const auto result = convert(program, plan_of(4), {});
    for (const auto& line : result.program.lines) {
        if (line.has_command('G', 1)) CHECK_FALSE(line.has('Y'));
        if (line.has('Y')) CHECK(line.text.rfind("G0 Y", 0) == 0);
    }
    CHECK(result.text().find("G1 X5 Z-1 F200\n") != std::string::npos);
    CHECK(result.text().find("G0 Y7") == std::string::npos);
    const auto body = sanitized_body(program);
    CHECK(verify_injection(result.program, plan_of(4), {}, result.safe_z, &body).empty());
}

TEST_CASE("fatal planarity violations refuse conversion", "[transform]") {
    const auto program = gcode::parse_program("G21\nG90\nG1 X1 Z1 F100\nG2 X1 Z1 I0.5\n");
    try {
        convert(program, plan_of(4), {});
        FAIL("expected ConversionRefused");
    } catch (const ConversionRefused& e) {
        CHECK(std::string(e.what()) == "arc motion unsupported at line 4");
        CHECK(e.report().has_fatal());
    }
}

TEST_CASE("resolve_safe_z", "[transform]") {
    const auto program = gcode::parse_program("G0 X0 Z2.0\nG1 Z-1 F100\n");
    CHECK(resolve_safe_z(program, {}) == Approx(7.0));
    CHECK(resolve_safe_z(program, profile_with_safe_z(10)) == 10.0);
    CHECK_THROWS_AS(resolve_safe_z(program, profile_with_safe_z(1)), DomainError);
    CHECK(resolve_safe_z(gcode::parse_program("G1 X1\n"), {}) == Approx(5.0));
}

TEST_CASE("apply_feed_policy", "[transform]") {
    MachineProfile scale;
    scale.feed_scale = 0.75;
    MachineProfile over;
    over.feed_override = 500;
    const auto g1 = gcode::parse_program("G1 X1 F1300").lines[0];
    CHECK(apply_feed_policy(g1, scale).text == "G1 X1 F975.0000");
    CHECK(apply_feed_policy(g1, over).text == "G1 X1 F500.0000");
    CHECK(apply_feed_policy(g1, {}).text == "G1 X1 F1300");

    for (const char* text : {"G0 X1", "G0 X1 F3000"}) {
        const auto g0 = gcode::parse_program(text).lines[0];
        CHECK(apply_feed_policy(g0, scale).text == text);
        CHECK(apply_feed_policy(g0, over).text == text);
    }
    const auto lower = gcode::parse_program("g1x1f1000 (cut)").lines[0];
    CHECK(apply_feed_policy(lower, scale).text == "g1x1F750.0000 (cut)");
}

TEST_CASE("feed policy changes only F words in the replicated body", "[transform]") {
    const auto program = gcode::parse_program("G21\nG90\nG0 X0 Z5 F5000\nG1 Z-1 F400\nG1 X10 F1300\n");
    MachineProfile p;
    p.feed_scale = 0.5;
    const auto text = convert(program, plan_of(3), p).text();
    CHECK(text.find("G0 X0 Z5 F5000\n") != std::string::npos);
    CHECK(text.find("G1 Z-1 F200.0000\n") != std::string::npos);
    CHECK(text.find("G1 X10 F650.0000\n") != std::string::npos);
    CHECK(text.find("F5000.0000") == std::string::npos);
}

TEST_CASE("spindle restart carries the speed and feed is restated", "[transform]") {
    const auto program = gcode::parse_program("G21\nG90\nM3 S8000\nG1 X1 Z1 F1300\nG1 X5\n");
    const auto result = convert(program, plan_of(5), {});
    CHECK(result.text().find("\nM3 S8000.0000\nG4 P2.0000\nF1300.0000\n") != std::string::npos);

    MachineProfile p;
    p.spindle_speed = 12000;
    p.dwell_after_restart = 0.5;
    const auto custom = convert(program, plan_of(5), p).text();
    CHECK(custom.find("\nM3 S12000.0000\nG4 P0.5000\n") != std::string::npos);
}

TEST_CASE("program ends and tape markers are not replicated", "[transform]") {
    const auto program = gcode::parse_program("%\nG21\nG90\nG1 X1 Z1 F100\nM5\nM30\n%\n");
    const auto result = convert(program, plan_of(3), {});
    std::size_t m30 = 0, pct = 0;
    for (const auto& line : result.program.lines) {
        m30 += line.has_command('M', 30);
        pct += line.delimiter;
    }
    CHECK(m30 == 1);
    CHECK(pct == 0);
    CHECK(result.program.lines.back().text == "M30");
}

TEST_CASE("machine profile validation", "[transform]") {
    const auto program = gcode::parse_program("G21\nG90\nG1 X1 Z1 F100\n");
    MachineProfile both;
    both.feed_override = 100;
    both.feed_scale = 0.5;
    CHECK_THROWS_AS(convert(program, plan_of(2), both), DomainError);
    MachineProfile bad_scale;
    bad_scale.feed_scale = 1.5;
    CHECK_THROWS_AS(convert(program, plan_of(2), bad_scale), DomainError);
    MachineProfile bad_cmd;
    bad_cmd.spindle_on_command = "M3 (";
    CHECK_THROWS_AS(convert(program, plan_of(2), bad_cmd), DomainError);
    CHECK_THROWS_AS(convert(program, plan_of(2), profile_with_safe_z(0.5)), DomainError);
    CHECK_THROWS_AS(convert(program, indexing::IndexingPlan{0}, {}), DomainError);
}

TEST_CASE("injection contract over the corpus", "[transform][property]") {
    for (const auto& path : testing::corpus_files()) {
        INFO(path.filename().string());
        const auto program = gcode::parse_program(testing::read_file(path), path.filename().string());
        const auto body = sanitized_body(program);
        for (int n : {1, 2, 3, 20, 33}) {
            const auto result = convert(program, plan_of(n), {});
            CHECK(verify_injection(result.program, plan_of(n), {}, result.safe_z, &body).empty());
            CHECK(pass_regions(result.program).size() == static_cast<std::size_t>(n));
            CHECK(result.safe_z == Approx(20.0));
        }
    }
}

TEST_CASE("verify_injection notices tampering", "[transform]") {
    const auto program = gcode::parse_program("G21\nG90\nG1 X0 Z-1 F300\nG1 X10 Z-1\n");
    const auto plan = plan_of(3);
    const auto result = convert(program, plan, {});
    const auto body = sanitized_body(program);
    REQUIRE(verify_injection(result.program, plan, {}, result.safe_z, &body).empty());

    auto drop_retract = result.program;
    for (auto& line : drop_retract.lines)
        if (line.text.rfind("G0 Z", 0) == 0) {
            line = gcode::make_line("G0 Z1.0000");
            break;
        }
    CHECK_FALSE(verify_injection(drop_retract, plan, {}, result.safe_z, &body).empty());

    auto y_on_g1 = result.program;
    y_on_g1.lines.push_back(gcode::make_line("G1 X1 Y3"));
    CHECK_FALSE(verify_injection(y_on_g1, plan, {}, result.safe_z, &body).empty());

    auto wrong_count = plan_of(4);
    CHECK_FALSE(verify_injection(result.program, wrong_count, {}, result.safe_z, &body).empty());

    const std::string other_body = "G1 X0 Z-1 F300\n";
    CHECK_FALSE(verify_injection(result.program, plan, {}, result.safe_z, &other_body).empty());
}

TEST_CASE("output length is linear in the pass count", "[transform][property]") {
    const auto program = gcode::parse_program(testing::read_file(testing::corpus_dir() / "fusion_parallel.nc"));
    const auto body_lines = toolpath_body(gcode::strip_axis(program, 'Y')).lines.size();
    for (int n = 1; n <= 100; n += 9) {
        const auto result = convert(program, plan_of(n), {});
        CHECK(result.stats.output_line_count == 5 + n * (1 + kBlockPreambleLines + body_lines) + 5);
    }
}

TEST_CASE("run_job front end", "[transform][pipeline]") {
    JobParams params;
    params.stock_diameter = 22;
    params.passes = 33;
    const auto job = run_job(testing::read_file(testing::corpus_dir() / "fusion_parallel.nc"), "fusion_parallel.nc", params);
    CHECK(job.planned.plan.caption() == "passes: 33, angle: 10.91\xC2\xB0");
    CHECK(job.planned.metadata.diameter_source == gcode::Provenance::comment);
    REQUIRE(job.mesh);
    CHECK(job.mesh->stations == 33);
    CHECK(job.mesh->profile_points <= kPreviewMaxProfilePoints + 16);
    CHECK(job.gcode == job.conversion.text());

    params.passes = 2;
    const auto coarse = run_job("G21\nG90\nG1 X1 Z1 F100\nG1 X2\n", "t.nc", params);
    CHECK_FALSE(coarse.mesh);
    CHECK(std::find(coarse.warnings.begin(), coarse.warnings.end(), "3D preview needs at least 3 passes") !=
          coarse.warnings.end());

    JobParams user_tool;
    user_tool.stock_diameter = 22;
    user_tool.tool_diameter = 6.35;
    const auto planned = plan_job(gcode::parse_program("(T1 D=3.175)\n"), user_tool);
    CHECK(planned.metadata.tool_diameter == 6.35);
    CHECK(planned.metadata.diameter_source == gcode::Provenance::user);
}
