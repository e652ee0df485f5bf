// mochi: command-line front end for simulations, oracle sweeps, detector
// benchmarks and the perturbation study.

#include <mochi/commands.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int k = 0; k < argc; ++k) {
        if (k) s += ' ';
        s += argv[k];
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace mochi::commands;
    Options o;
    o.invocation = join_args(argc, argv);

    CLI::App app{"Proxy-sphere collision detection and DEM particle simulation"};
    app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
    app.require_subcommand(1);

    app.add_option("--particles", o.particles, "particle count")->capture_default_str();
    app.add_option("--box", o.box, "world cube side; the box is [0, side]^3")->capture_default_str();
    app.add_option("--radii-min", o.radii_min, "smallest radius")->capture_default_str();
    app.add_option("--radii-max", o.radii_max, "largest radius")->capture_default_str();
    app.add_option("--density", o.density, "mass density")->capture_default_str();
    app.add_option("--seed", o.seed, "random seed")->capture_default_str();
    app.add_option("--placement", o.placement, "grid | random")
        ->check(CLI::IsMember({"grid", "random"}))
        ->capture_default_str();
    app.add_option("--scene", o.scene_file, "particle file to load instead of generating");

    app.add_option("--dt", o.dt, "timestep in seconds")->capture_default_str();
    app.add_option("--steps", o.steps, "steps per frame")->capture_default_str();
    app.add_option("--frames", o.frames, "frames")->capture_default_str();
    app.add_option("--gravity", o.gravity, "const | rotating")
        ->check(CLI::IsMember({"const", "rotating"}))
        ->capture_default_str();
    app.add_option("--omega", o.omega, "rotating gravity angular velocity (rad/s)")->capture_default_str();
    app.add_option("--stiffness", o.stiffness, "contact spring constant k")->capture_default_str();
    app.add_option("--damping", o.damping, "contact dashpot constant c")->capture_default_str();
    app.add_option("--restitution", o.restitution, "wall restitution in [0, 1]")->capture_default_str();
    app.add_option("--detector", o.detector, "mochi | fixed | proxy-only | brute")
        ->check(CLI::IsMember({"mochi", "fixed", "proxy-only", "brute"}))
        ->capture_default_str();
    app.add_option("--rebuild-every", o.rebuild_every, "0 = refit only, n = rebuild every n-th step")
        ->capture_default_str();
    app.add_option("--threads", o.threads, "worker threads (1 = canonical deterministic output)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--export-frames", o.export_frames, "write frames/frame_NNNNNN.txt per frame");

    app.add_option("--trials", o.trials, "verify: number of random scenes")->capture_default_str();
    app.add_option("--max-particles", o.max_particles, "verify: largest scene size")->capture_default_str();
    app.add_option("--ratios", o.ratios, "bench: radius ratios, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--volume-fraction", o.volume_fraction, "bench: solid volume fraction")
        ->capture_default_str();
    app.add_option("--repetitions", o.repetitions, "bench: timing repetitions (best of N)")
        ->capture_default_str();
    app.add_option("--variants", o.variants, "perturb-study: perturbed copies")->capture_default_str();
    app.add_option("--noise-min", o.noise_min, "perturb-study: smallest displacement")->capture_default_str();
    app.add_option("--noise-max", o.noise_max, "perturb-study: largest displacement")->capture_default_str();
    app.add_option("--out", o.out_dir, "output directory")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "run a DEM simulation, write report.csv");
    auto* verify = app.add_subcommand("verify", "compare detectors against brute force on random scenes");
    auto* bench = app.add_subcommand("bench", "candidate counts and timings per radius ratio, write bench.csv");
    auto* perturb = app.add_subcommand("perturb-study", "noise sensitivity study, write perturb.csv");
    auto* gen = app.add_subcommand("gen", "generate a scene file, write scene.txt");
    for (auto* sub : {simulate, verify, bench, perturb, gen}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*simulate) return cmd_simulate(o, std::cout);
        if (*verify) return cmd_verify(o, std::cout);
        if (*bench) return cmd_bench(o, std::cout);
        if (*perturb) return cmd_perturb_study(o, std::cout);
        if (*gen) return cmd_gen(o, std::cout);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const mochi::SceneFileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
