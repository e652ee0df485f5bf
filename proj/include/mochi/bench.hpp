#pragma once
// Candidate-count and timing comparison of the proxy-sphere reduction
// against the fixed-radius baseline across radius ratios.

#include "bvh.hpp"
#include "dcd.hpp"
#include "dem.hpp"
#include "verify.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace mochi {

struct BenchOptions {
    std::vector<real> ratios{1.2, 12, 120};
    std::size_t count = 100000;
    real volume_fraction = 0.05;
    std::uint64_t seed = 1;
    std::size_t repetitions = 3;
    unsigned threads = 1;
};

struct BenchRow {
    real ratio = 1;
    std::size_t count = 0;
    real volume_fraction = 0;
    std::uint64_t mochi_candidates = 0;
    std::uint64_t fixed_candidates = 0;
    std::size_t mochi_pairs = 0;
    std::size_t fixed_pairs = 0;
    bool pairs_equal = false;
    // best of N
    std::uint64_t mochi_build_ns = 0;
    std::uint64_t mochi_dcd_ns = 0;
    std::uint64_t fixed_build_ns = 0;
    std::uint64_t fixed_dcd_ns = 0;

    real candidate_ratio() const {
        return mochi_candidates == 0 ? 0
                                     : static_cast<real>(fixed_candidates) / static_cast<real>(mochi_candidates);
    }
};

inline BenchRow bench_ratio(const BenchOptions& opt, real ratio) {
    const auto particles = generate(ratio_scene_spec(opt.count, ratio, opt.volume_fraction, opt.seed));
    BenchRow row;
    row.ratio = ratio;
    row.count = opt.count;
    row.volume_fraction = opt.volume_fraction;
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    row.mochi_build_ns = row.mochi_dcd_ns = row.fixed_build_ns = row.fixed_dcd_ns = kMax;

    const real r_max = max_radius(particles);
    for (std::size_t rep = 0; rep < std::max<std::size_t>(1, opt.repetitions); ++rep) {
        for (const Detector d : {Detector::mochi, Detector::fixed_radius}) {
            const auto t0 = detail::Clock::now();
            const Bvh bvh = Bvh::build(detector_boxes(d, particles, r_max));
            const auto t1 = detail::Clock::now();
            const DetectionResult res = detect(d, particles, bvh, opt.threads);
            const auto t2 = detail::Clock::now();
            const bool mochi = d == Detector::mochi;
            auto& build = mochi ? row.mochi_build_ns : row.fixed_build_ns;
            auto& dcd = mochi ? row.mochi_dcd_ns : row.fixed_dcd_ns;
            build = std::min(build, detail::elapsed_ns(t0, t1));
            dcd = std::min(dcd, detail::elapsed_ns(t1, t2));
            if (rep == 0) {
                (mochi ? row.mochi_candidates : row.fixed_candidates) = res.candidates_tested;
                (mochi ? row.mochi_pairs : row.fixed_pairs) = res.pairs.size();
            }
        }
    }
    // pair sets are compared once, outside the timed region
    row.pairs_equal = detect_mochi(particles, opt.threads).pairs ==
                      detect_fixed_radius(particles, opt.threads).pairs;
    return row;
}

inline std::vector<BenchRow> run_bench(const BenchOptions& opt) {
    std::vector<BenchRow> rows;
    for (const real ratio : opt.ratios) rows.push_back(bench_ratio(opt, ratio));
    return rows;
}

}  // namespace mochi
