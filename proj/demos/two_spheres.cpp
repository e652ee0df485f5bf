// The asymmetric contact that breaks a proxy-sphere-only detector: a large
// sphere (r = 3) touched by a small one (r = 1) whose center lies outside the
// small sphere's own proxy as seen from the large center.

#include <mochi/dcd.hpp>

#include <cstdio>
#include <vector>

int main() {
    using namespace mochi;
    std::vector<Particle> ps(2);
    ps[0].center = {0, 0, 0};
    ps[0].radius = 3;
    ps[1].center = {0, 0, 3.5};
    ps[1].radius = 1;

    const auto print = [](const char* name, const DetectionResult& r) {
        std::printf("%-12s pairs=%zu candidates=%llu\n", name, r.pairs.size(),
                    static_cast<unsigned long long>(r.candidates_tested));
        for (const auto& p : r.pairs) {
            std::printf("  (%u,%u) overlap=%g normal=(%g,%g,%g)\n", p.i, p.j, p.overlap, p.normal.x,
                        p.normal.y, p.normal.z);
        }
    };
    print("brute", detect_brute(ps));
    print("mochi", detect_mochi(ps));
    print("proxy-only", detect_proxy_only(ps));
    print("fixed", detect_fixed_radius(ps));

    const auto small_ray = process_hit(1, 0, ps);
    const auto large_ray = process_hit(0, 1, ps);
    std::printf("ray from small center emits: %s\n", small_ray ? "yes" : "no");
    std::printf("ray from large center emits: %s\n", large_ray ? "yes" : "no");
}
