#include <mochi/commands.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace mochi;
using namespace mochi::commands;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mochi_cmd_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

Options small_options(const fs::path& out) {
    Options o;
    o.particles = 300;
    o.steps = 20;
    o.out_dir = out.string();
    o.invocation = "mochi test";
    o.seed = 5;
    return o;
}

}  // namespace

TEST(Commands, SimulateWritesReport) {
    const auto dir = fresh_dir("simulate");
    Options o = small_options(dir);
    o.frames = 2;
    std::ostringstream log;
    ASSERT_EQ(cmd_simulate(o, log), kOk);
    const auto lines = read_lines(dir / "report.csv");
    ASSERT_EQ(lines.size(), 4u + 40u);
    EXPECT_EQ(lines[0], "# schema: mochi.report/1");
    EXPECT_EQ(lines[1], "# command: mochi test");
    EXPECT_EQ(lines[2], "# seed: 5");
    EXPECT_EQ(lines[3], "iteration,pairs,build_ns,dcd_ns,update_ns");
    EXPECT_EQ(lines[4].substr(0, 2), "0,");
    EXPECT_EQ(lines.back().substr(0, 3), "39,");
    EXPECT_FALSE(fs::exists(dir / "frames"));
}

TEST(Commands, SimulateExportsFrames) {
    const auto dir = fresh_dir("frames");
    Options o = small_options(dir);
    o.frames = 3;
    o.steps = 5;
    o.export_frames = true;
    std::ostringstream log;
    ASSERT_EQ(cmd_simulate(o, log), kOk);
    for (const char* name : {"frame_000000.txt", "frame_000001.txt", "frame_000002.txt"}) {
        const auto ps = load((dir / "frames" / name).string());
        EXPECT_EQ(ps.size(), 300u);
    }
}

TEST(Commands, GenThenSimulateFromFile) {
    const auto dir = fresh_dir("gen");
    Options o = small_options(dir);
    std::ostringstream log;
    ASSERT_EQ(cmd_gen(o, log), kOk);
    const auto ps = load((dir / "scene.txt").string());
    ASSERT_EQ(ps.size(), 300u);
    Options sim = small_options(dir);
    sim.scene_file = (dir / "scene.txt").string();
    EXPECT_EQ(cmd_simulate(sim, log), kOk);
}

TEST(Commands, VerifyPasses) {
    Options o;
    o.trials = 8;
    o.max_particles = 200;
    std::ostringstream log;
    EXPECT_EQ(cmd_verify(o, log), kOk);
    EXPECT_NE(log.str().find("verified 8 scenes"), std::string::npos);
}

TEST(Commands, BenchWritesRows) {
    const auto dir = fresh_dir("bench");
    Options o = small_options(dir);
    o.particles = 2000;
    o.repetitions = 1;
    std::ostringstream log;
    ASSERT_EQ(cmd_bench(o, log), kOk);
    const auto lines = read_lines(dir / "bench.csv");
    ASSERT_EQ(lines.size(), 4u + 3u);
    EXPECT_EQ(lines[0], "# schema: mochi.bench/1");
    EXPECT_EQ(lines[4].substr(0, 4), "1.2,");
}

TEST(Commands, PerturbStudyWritesBothCsvs) {
    const auto dir = fresh_dir("perturb");
    Options o = small_options(dir);
    o.variants = 3;
    o.steps = 10;
    o.placement = "random";
    std::ostringstream log;
    ASSERT_EQ(cmd_perturb_study(o, log), kOk);
    const auto counts = read_lines(dir / "perturb.csv");
    EXPECT_EQ(counts[3], "variant,detector,step,pairs");
    EXPECT_EQ(counts.size(), 4u + 3 * 2 * 10);
    const auto summary = read_lines(dir / "perturb_summary.csv");
    EXPECT_EQ(summary[0], "# schema: mochi.perturb-summary/1");
    EXPECT_EQ(summary[3], "step,detector,mean,stddev,min,max");
    EXPECT_EQ(summary.size(), 4u + 2 * 10);
}

TEST(Commands, UsageErrors) {
    std::ostringstream log;
    Options o;
    o.detector = "octree";
    EXPECT_THROW(sim_config(o), UsageError);
    o = {};
    o.gravity = "sideways";
    EXPECT_THROW(sim_config(o), UsageError);
    o = {};
    o.placement = "spiral";
    EXPECT_THROW(scene_spec(o), UsageError);
    o = {};
    o.box = 0;
    EXPECT_THROW(world_box(o), UsageError);
    o = {};
    o.trials = 0;
    EXPECT_THROW(cmd_verify(o, log), UsageError);
    o = {};
    o.variants = 1;
    EXPECT_THROW(cmd_perturb_study(o, log), UsageError);
    o = {};
    o.ratios = {0.5};
    EXPECT_THROW(cmd_bench(o, log), UsageError);
}

TEST(Commands, UnstableConfigRejected) {
    const auto dir = fresh_dir("unstable");
    Options o = small_options(dir);
    o.dt = 0.1;
    std::ostringstream log;
    EXPECT_THROW(cmd_simulate(o, log), ConfigError);
}

TEST(Commands, SimConfigMapsOptions) {
    Options o;
    o.gravity = "rotating";
    o.omega = 2;
    o.detector = "fixed";
    o.rebuild_every = 10;
    o.box = 3;
    const SimConfig c = sim_config(o);
    ASSERT_TRUE(std::holds_alternative<RotatingGravity>(c.gravity));
    EXPECT_EQ(std::get<RotatingGravity>(c.gravity).omega, 2);
    EXPECT_EQ(c.detector, Detector::fixed_radius);
    EXPECT_EQ(c.rebuild_every, 10u);
    EXPECT_EQ(c.box, (Aabb{{0, 0, 0}, {3, 3, 3}}));
}
