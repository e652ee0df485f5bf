// Minimal simulation loop: a small scene settling under gravity, printing the
// contact count every 100 steps.

#include <mochi/dem.hpp>
#include <mochi/scenes.hpp>

#include <cstdio>

int main() {
    using namespace mochi;
    SceneSpec spec;
    spec.count = 2000;
    spec.box = {{0, 0, 0}, {0.5, 0.5, 0.5}};
    const auto particles = generate(spec);

    SimConfig config;
    config.box = spec.box;
    config.steps_per_frame = 100;
    config.frames = 10;

    SimObserver obs;
    obs.on_frame = [](std::size_t frame, const SimState& s) {
        real lowest = s.particles.front().center.z;
        for (const auto& p : s.particles) lowest = std::min(lowest, p.center.z);
        std::printf("frame %zu  t=%.4f s  lowest center z=%.5f\n", frame, s.time, lowest);
    };
    const SimReport report = run(config, particles, obs);
    std::printf("contacts over run: %llu, dcd %.2f ms, build %.2f ms, update %.2f ms\n",
                static_cast<unsigned long long>(report.total_pairs), report.totals.dcd_ns / 1e6,
                report.totals.build_ns / 1e6, report.totals.update_ns / 1e6);
}
