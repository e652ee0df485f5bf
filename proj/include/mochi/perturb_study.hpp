#pragma once
// Position-noise sensitivity study: the same short simulation on many
// perturbed copies of a scene, with the proxy-sphere detector and brute force
// side by side. Per-step collision counts must agree exactly.

#include "dem.hpp"
#include "scenes.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace mochi {

struct PerturbStudyOptions {
    std::size_t variants = 30;
    real noise_min = 1e-6;
    real noise_max = 1e-5;
    std::uint64_t seed = 1;
};

struct PerturbStudyResult {
    // [variant][step]
    std::vector<std::vector<std::size_t>> mochi_counts;
    std::vector<std::vector<std::size_t>> brute_counts;
    std::size_t mismatched_steps = 0;

    bool ok() const { return mismatched_steps == 0; }
};

struct StepDistribution {
    real mean = 0;
    real stddev = 0;
    std::size_t min = 0;
    std::size_t max = 0;
};

/// Across-variant distribution of the count at `step`.
inline StepDistribution distribution_at(const std::vector<std::vector<std::size_t>>& counts,
                                        std::size_t step) {
    StepDistribution d;
    if (counts.empty()) return d;
    d.min = counts[0][step];
    real sum = 0;
    for (const auto& series : counts) {
        const std::size_t c = series[step];
        sum += static_cast<real>(c);
        d.min = std::min(d.min, c);
        d.max = std::max(d.max, c);
    }
    d.mean = sum / static_cast<real>(counts.size());
    real var = 0;
    for (const auto& series : counts) {
        const real diff = static_cast<real>(series[step]) - d.mean;
        var += diff * diff;
    }
    d.stddev = counts.size() > 1 ? std::sqrt(var / static_cast<real>(counts.size() - 1)) : 0;
    return d;
}

/// `config.detector` is ignored; each variant runs once per detector.
inline PerturbStudyResult run_perturb_study(const std::vector<Particle>& base,
                                            const SimConfig& config,
                                            const PerturbStudyOptions& opt) {
    if (opt.variants < 2) throw std::invalid_argument("perturb study: need at least 2 variants");
    PerturbStudyResult out;
    for (std::size_t v = 0; v < opt.variants; ++v) {
        const auto variant = perturb(base, opt.noise_min, opt.noise_max, derive_seed(opt.seed, v));
        for (const Detector d : {Detector::mochi, Detector::brute}) {
            SimConfig cfg = config;
            cfg.detector = d;
            const SimReport report = run(cfg, variant);
            std::vector<std::size_t> counts;
            counts.reserve(report.steps.size());
            for (const StepRecord& s : report.steps) counts.push_back(s.pairs);
            (d == Detector::mochi ? out.mochi_counts : out.brute_counts).push_back(std::move(counts));
        }
        const auto& m = out.mochi_counts.back();
        const auto& b = out.brute_counts.back();
        for (std::size_t s = 0; s < m.size(); ++s) out.mismatched_steps += m[s] != b[s] ? 1 : 0;
    }
    return out;
}

}  // namespace mochi
