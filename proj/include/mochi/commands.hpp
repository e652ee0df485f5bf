#pragma once
/*
commands.hpp
------------
The subcommands behind the `mochi` tool. Each takes a fully populated
Options, writes its artifacts under Options::out_dir and returns the process
exit status:

    0  success
    1  verification failure (oracle mismatch, count mismatch)
    2  usage or input error

Every CSV starts with a schema line, then the echoed command line and seed,
then the column header.
*/

#include "bench.hpp"
#include "dem.hpp"
#include "perturb_study.hpp"
#include "scenes.hpp"
#include "verify.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mochi::commands {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2 };

inline constexpr const char* kReportSchema = "mochi.report/1";
inline constexpr const char* kBenchSchema = "mochi.bench/1";
inline constexpr const char* kPerturbSchema = "mochi.perturb/1";
inline constexpr const char* kPerturbSummarySchema = "mochi.perturb-summary/1";

struct Options {
    // scene
    std::size_t particles = 10000;
    real box = 1;  // cube side, world box is [0, box]^3
    real radii_min = 0.01;
    real radii_max = 0.012;
    real density = 500;
    std::uint64_t seed = 1;
    std::string placement = "grid";
    std::string scene_file;

    // simulation
    real dt = 1e-4;
    std::size_t steps = 1000;  // per frame
    std::size_t frames = 1;
    std::string gravity = "const";
    real omega = real(0.25) * kPi;
    real stiffness = 1e4;
    real damping = 10;
    real restitution = 0.5;
    std::string detector = "mochi";
    std::size_t rebuild_every = 0;
    unsigned threads = 1;
    bool export_frames = false;

    // verify
    std::size_t trials = 1000;
    std::size_t max_particles = 2048;

    // bench
    std::vector<real> ratios{1.2, 12, 120};
    real volume_fraction = 0.05;
    std::size_t repetitions = 3;

    // perturb-study
    std::size_t variants = 30;
    real noise_min = 1e-6;
    real noise_max = 1e-5;

    std::string out_dir = ".";
    std::string invocation;  // echoed into artifact headers
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline Aabb world_box(const Options& o) {
    if (!(o.box > 0)) throw UsageError("--box must be positive");
    return {{0, 0, 0}, {o.box, o.box, o.box}};
}

inline SceneSpec scene_spec(const Options& o) {
    SceneSpec s;
    s.count = o.particles;
    s.box = world_box(o);
    s.radii_min = o.radii_min;
    s.radii_max = o.radii_max;
    s.density = o.density;
    s.seed = o.seed;
    if (o.placement == "grid" || o.placement == "grid_jittered") {
        s.placement = Placement::grid_jittered;
    } else if (o.placement == "random" || o.placement == "uniform_random") {
        s.placement = Placement::uniform_random;
    } else {
        throw UsageError("--placement must be grid or random");
    }
    return s;
}

inline std::vector<Particle> load_scene(const Options& o) {
    if (!o.scene_file.empty()) return load(o.scene_file, o.density);
    return generate(scene_spec(o));
}

inline SimConfig sim_config(const Options& o) {
    SimConfig c;
    c.dt = o.dt;
    c.steps_per_frame = o.steps;
    c.frames = o.frames;
    if (o.gravity == "const") {
        c.gravity = ConstantGravity{};
    } else if (o.gravity == "rotating") {
        c.gravity = RotatingGravity{9.8, o.omega};
    } else {
        throw UsageError("--gravity must be const or rotating");
    }
    c.stiffness = o.stiffness;
    c.damping = o.damping;
    c.restitution = o.restitution;
    c.box = world_box(o);
    c.rebuild_every = o.rebuild_every;
    const auto d = parse_detector(o.detector);
    if (!d) throw UsageError("--detector must be one of mochi, fixed, proxy-only, brute");
    c.detector = *d;
    c.threads = std::max(1u, o.threads);
    return c;
}

inline void write_preamble(std::ostream& out, const char* schema, const Options& o) {
    out << "# schema: " << schema << '\n';
    out << "# command: " << o.invocation << '\n';
    out << "# seed: " << o.seed << '\n';
}

inline void write_report_csv(std::ostream& out, const SimReport& report, const Options& o) {
    write_preamble(out, kReportSchema, o);
    out << "iteration,pairs,build_ns,dcd_ns,update_ns\n";
    for (const StepRecord& s : report.steps) {
        out << s.iteration << ',' << s.pairs << ',' << s.build_ns << ',' << s.dcd_ns << ','
            << s.update_ns << '\n';
    }
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, const Options& o) {
    write_preamble(out, kBenchSchema, o);
    out << "ratio,particles,volume_fraction,mochi_candidates,fixed_candidates,candidate_ratio,"
           "mochi_pairs,fixed_pairs,pairs_equal,mochi_build_ns,mochi_dcd_ns,fixed_build_ns,"
           "fixed_dcd_ns\n";
    out << std::setprecision(9);
    for (const BenchRow& r : rows) {
        out << r.ratio << ',' << r.count << ',' << r.volume_fraction << ',' << r.mochi_candidates
            << ',' << r.fixed_candidates << ',' << r.candidate_ratio() << ',' << r.mochi_pairs << ','
            << r.fixed_pairs << ',' << (r.pairs_equal ? 1 : 0) << ',' << r.mochi_build_ns << ','
            << r.mochi_dcd_ns << ',' << r.fixed_build_ns << ',' << r.fixed_dcd_ns << '\n';
    }
}

inline void write_perturb_csv(std::ostream& out, const PerturbStudyResult& res, const Options& o) {
    write_preamble(out, kPerturbSchema, o);
    out << "variant,detector,step,pairs\n";
    const auto emit = [&](const char* name, const std::vector<std::vector<std::size_t>>& counts) {
        for (std::size_t v = 0; v < counts.size(); ++v) {
            for (std::size_t s = 0; s < counts[v].size(); ++s) {
                out << v << ',' << name << ',' << s << ',' << counts[v][s] << '\n';
            }
        }
    };
    emit("mochi", res.mochi_counts);
    emit("brute", res.brute_counts);
}

inline void write_perturb_summary_csv(std::ostream& out, const PerturbStudyResult& res,
                                      const Options& o) {
    write_preamble(out, kPerturbSummarySchema, o);
    out << "step,detector,mean,stddev,min,max\n";
    out << std::setprecision(9);
    const std::size_t steps = res.mochi_counts.empty() ? 0 : res.mochi_counts[0].size();
    for (std::size_t s = 0; s < steps; ++s) {
        for (const auto& [name, counts] :
             {std::pair{"mochi", &res.mochi_counts}, std::pair{"brute", &res.brute_counts}}) {
            const StepDistribution d = distribution_at(*counts, s);
            out << s << ',' << name << ',' << d.mean << ',' << d.stddev << ',' << d.min << ','
                << d.max << '\n';
        }
    }
}

namespace detail {

inline std::filesystem::path ensure_dir(const std::string& dir) {
    std::filesystem::path p(dir.empty() ? "." : dir);
    std::filesystem::create_directories(p);
    return p;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SceneFileError("cannot open for writing: " + path.string());
    return out;
}

inline std::string frame_name(std::size_t frame) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06zu.txt", frame);
    return buf;
}

}  // namespace detail

inline int cmd_simulate(const Options& o, std::ostream& log) {
    const SimConfig config = sim_config(o);
    auto particles = load_scene(o);
    const real density = implied_density(particles.front());
    const auto dir = detail::ensure_dir(o.out_dir);
    if (o.export_frames) std::filesystem::create_directories(dir / "frames");

    SimObserver observer;
    if (o.export_frames) {
        const std::vector<std::string> comments{"command: " + o.invocation,
                                                "seed: " + std::to_string(o.seed)};
        observer.on_frame = [&](std::size_t frame, const SimState& state) {
            save((dir / "frames" / detail::frame_name(frame)).string(), state.particles, density,
                 comments);
        };
    }
    const SimReport report = run(config, std::move(particles), observer);

    auto out = detail::open_out(dir / "report.csv");
    write_report_csv(out, report, o);

    const auto ms = [](std::uint64_t ns) { return static_cast<double>(ns) / 1e6; };
    log << std::fixed << std::setprecision(3) << "detector " << to_string(config.detector)
        << ", " << report.steps.size() << " steps, " << report.total_pairs << " contacts total\n"
        << "build " << ms(report.totals.build_ns) << " ms | dcd " << ms(report.totals.dcd_ns)
        << " ms | update " << ms(report.totals.update_ns) << " ms | total "
        << ms(report.totals.total_ns()) << " ms\n";
    return kOk;
}

inline int cmd_verify(const Options& o, std::ostream& log) {
    if (o.trials < 1) throw UsageError("--trials must be at least 1");
    if (o.max_particles < 2) throw UsageError("--max-particles must be at least 2");
    VerifyOptions vo;
    vo.trials = o.trials;
    vo.seed = o.seed;
    vo.n_max = o.max_particles;
    vo.threads = std::max(1u, o.threads);
    const VerifySummary sum = run_verify(vo);
    if (!sum.ok()) {
        const TrialOutcome& f = sum.failures.front();
        log << "MISMATCH seed=" << o.seed << ' ' << f.params.describe()
            << " mochi_ok=" << f.mochi_matches << " fixed_ok=" << f.fixed_matches
            << " duplicates=" << f.mochi_duplicates + f.fixed_duplicates
            << " symmetry_violations=" << f.symmetry_violations
            << " exclusivity_violations=" << f.exclusivity_violations << '\n';
        return kVerifyFailed;
    }
    log << "verified " << sum.trials_run << " scenes (" << sum.oracle_pairs
        << " colliding pairs), seed " << o.seed << ": all detectors match brute force\n";
    return kOk;
}

inline int cmd_bench(const Options& o, std::ostream& log) {
    if (o.ratios.empty()) throw UsageError("--ratios must list at least one ratio");
    for (const real r : o.ratios) {
        if (!(r >= 1)) throw UsageError("--ratios entries must be >= 1");
    }
    if (!(o.volume_fraction > 0 && o.volume_fraction < 1)) {
        throw UsageError("--volume-fraction must lie in (0, 1)");
    }
    if (o.particles < 1) throw UsageError("--particles must be at least 1");
    BenchOptions bo;
    bo.ratios = o.ratios;
    bo.count = o.particles;
    bo.volume_fraction = o.volume_fraction;
    bo.seed = o.seed;
    bo.repetitions = std::max<std::size_t>(1, o.repetitions);
    bo.threads = std::max(1u, o.threads);
    const auto rows = run_bench(bo);
    const auto dir = detail::ensure_dir(o.out_dir);
    auto out = detail::open_out(dir / "bench.csv");
    write_bench_csv(out, rows, o);
    bool equal = true;
    for (const BenchRow& r : rows) {
        log << "ratio " << r.ratio << ": candidates mochi " << r.mochi_candidates << ", fixed "
            << r.fixed_candidates << " (x" << r.candidate_ratio() << ")\n";
        equal = equal && r.pairs_equal;
    }
    return equal ? kOk : kVerifyFailed;
}

inline int cmd_perturb_study(const Options& o, std::ostream& log) {
    if (o.variants < 2) throw UsageError("--variants must be at least 2");
    if (!(o.noise_min >= 0 && o.noise_min <= o.noise_max)) {
        throw UsageError("need 0 <= --noise-min <= --noise-max");
    }
    const SimConfig config = sim_config(o);
    const auto base = load_scene(o);
    PerturbStudyOptions po;
    po.variants = o.variants;
    po.noise_min = o.noise_min;
    po.noise_max = o.noise_max;
    po.seed = o.seed;
    const PerturbStudyResult res = run_perturb_study(base, config, po);
    const auto dir = detail::ensure_dir(o.out_dir);
    {
        auto out = detail::open_out(dir / "perturb.csv");
        write_perturb_csv(out, res, o);
    }
    {
        auto out = detail::open_out(dir / "perturb_summary.csv");
        write_perturb_summary_csv(out, res, o);
    }
    if (!res.ok()) {
        log << "count mismatch between mochi and brute on " << res.mismatched_steps
            << " variant-steps (seed " << o.seed << ")\n";
        return kVerifyFailed;
    }
    log << o.variants << " variants x " << res.mochi_counts.front().size()
        << " steps: mochi and brute counts identical\n";
    return kOk;
}

inline int cmd_gen(const Options& o, std::ostream& log) {
    const SceneSpec spec = scene_spec(o);
    const auto particles = generate(spec);
    const auto dir = detail::ensure_dir(o.out_dir);
    const std::vector<std::string> comments{"command: " + o.invocation,
                                            "seed: " + std::to_string(o.seed)};
    save((dir / "scene.txt").string(), particles, spec.density, comments);
    log << "wrote " << particles.size() << " particles to " << (dir / "scene.txt").string() << '\n';
    return kOk;
}

}  // namespace mochi::commands
