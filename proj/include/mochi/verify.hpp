#pragma once
/*
verify.hpp
----------
Oracle sweep: random scenes of varying size, radius ratio and volume fraction
where detect_mochi and detect_fixed_radius must reproduce detect_brute
exactly. Each trial also checks, independently of any BVH, that every
colliding pair has one center inside the other's proxy sphere and that
exactly one of its two directed hits is emitted by process_hit.
*/

#include "dcd.hpp"
#include "geometry.hpp"
#include "scenes.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace mochi {

inline constexpr std::array<real, 4> kVerifyRatios{1, 1.2, 12, 120};

/// E[r^3] for r uniform on [lo, hi].
inline real mean_cubed_radius(real lo, real hi) {
    if (lo == hi) return lo * lo * lo;
    return (hi * hi * hi * hi - lo * lo * lo * lo) / (4 * (hi - lo));
}

/// Cube scene of `count` spheres, radii uniform in [r_min, ratio * r_min],
/// sized so the expected solid volume fraction is `volume_fraction`.
/// Placement is uniform random, so spheres may start overlapping.
inline SceneSpec ratio_scene_spec(std::size_t count, real ratio, real volume_fraction,
                                  std::uint64_t seed, real r_min = 0.01) {
    SceneSpec spec;
    spec.count = count;
    spec.radii_min = r_min;
    spec.radii_max = r_min * ratio;
    spec.seed = seed;
    spec.placement = Placement::uniform_random;
    const real solid = static_cast<real>(count) * (real(4) / 3) * kPi *
                       mean_cubed_radius(spec.radii_min, spec.radii_max);
    const real side = std::max(std::cbrt(solid / volume_fraction), 2 * spec.radii_max * real(1.0001));
    spec.box = {{0, 0, 0}, {side, side, side}};
    return spec;
}

struct TrialParams {
    std::size_t trial = 0;
    std::uint64_t scene_seed = 0;
    std::size_t count = 0;
    real ratio = 1;
    real volume_fraction = 0;

    std::string describe() const {
        std::ostringstream s;
        s << "trial=" << trial << " scene_seed=" << scene_seed << " n=" << count
          << " ratio=" << ratio << " volume_fraction=" << volume_fraction;
        return s.str();
    }
};

/// Parameters of trial `k` under `seed`: n uniform in [n_min, n_max], ratio
/// cycling through kVerifyRatios, volume fraction log-uniform in [0.1%, 30%].
inline TrialParams trial_params(std::uint64_t seed, std::size_t k, std::size_t n_min = 2,
                                std::size_t n_max = 2048) {
    TrialParams t;
    t.trial = k;
    t.scene_seed = derive_seed(seed, k);
    RandomStream rng(t.scene_seed, RandomStream::Purpose::trial);
    t.count = n_min + static_cast<std::size_t>(rng.below(n_max - n_min + 1));
    t.ratio = kVerifyRatios[k % kVerifyRatios.size()];
    t.volume_fraction = std::exp(rng.uniform(std::log(0.001), std::log(0.3)));
    return t;
}

inline std::vector<Particle> trial_scene(const TrialParams& t) {
    return generate(ratio_scene_spec(t.count, t.ratio, t.volume_fraction, t.scene_seed));
}

/// Pairs colliding per the oracle where neither center lies in the other's proxy sphere.
inline std::size_t symmetry_violations(std::span<const Particle> particles,
                                    std::span<const CollisionPair> oracle_pairs) {
    std::size_t bad = 0;
    for (const CollisionPair& pr : oracle_pairs) {
        const Particle& a = particles[pr.i];
        const Particle& b = particles[pr.j];
        const bool a_in_b = point_in_sphere(a.center, b.center, 2 * b.radius);
        const bool b_in_a = point_in_sphere(b.center, a.center, 2 * a.radius);
        if (!a_in_b && !b_in_a) ++bad;
    }
    return bad;
}

/// Oracle pairs for which the number of emitting directed hits is not one.
/// A directed hit exists when the ray center lies in the target's proxy AABB.
inline std::size_t exclusivity_violations(std::span<const Particle> particles,
                                          std::span<const CollisionPair> oracle_pairs) {
    std::size_t bad = 0;
    for (const CollisionPair& pr : oracle_pairs) {
        int emitted = 0;
        if (point_in_aabb(particles[pr.i].center, proxy_aabb(particles[pr.j])) &&
            process_hit(pr.i, pr.j, particles)) {
            ++emitted;
        }
        if (point_in_aabb(particles[pr.j].center, proxy_aabb(particles[pr.i])) &&
            process_hit(pr.j, pr.i, particles)) {
            ++emitted;
        }
        if (emitted != 1) ++bad;
    }
    return bad;
}

struct TrialOutcome {
    TrialParams params;
    std::size_t oracle_pairs = 0;
    bool mochi_matches = false;
    bool fixed_matches = false;
    std::uint64_t mochi_duplicates = 0;
    std::uint64_t fixed_duplicates = 0;
    std::size_t symmetry_violations = 0;
    std::size_t exclusivity_violations = 0;
    std::uint64_t mochi_candidates = 0;
    std::uint64_t fixed_candidates = 0;

    bool ok() const {
        return mochi_matches && fixed_matches && mochi_duplicates == 0 && fixed_duplicates == 0 &&
               symmetry_violations == 0 && exclusivity_violations == 0;
    }
};

inline TrialOutcome run_trial(const TrialParams& params, unsigned threads = 1) {
    const auto particles = trial_scene(params);
    const DetectionResult oracle = detect_brute(particles, threads);
    const DetectionResult mochi = detect_mochi(particles, threads);
    const DetectionResult fixed = detect_fixed_radius(particles, threads);

    TrialOutcome out;
    out.params = params;
    out.oracle_pairs = oracle.pairs.size();
    out.mochi_matches = mochi.pairs == oracle.pairs;
    out.fixed_matches = fixed.pairs == oracle.pairs;
    out.mochi_duplicates = mochi.duplicate_emissions;
    out.fixed_duplicates = fixed.duplicate_emissions;
    out.symmetry_violations = symmetry_violations(particles, oracle.pairs);
    out.exclusivity_violations = exclusivity_violations(particles, oracle.pairs);
    out.mochi_candidates = mochi.candidates_tested;
    out.fixed_candidates = fixed.candidates_tested;
    return out;
}

struct VerifyOptions {
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::size_t n_min = 2;
    std::size_t n_max = 2048;
    unsigned threads = 1;
    bool stop_on_failure = true;
};

struct VerifySummary {
    std::size_t trials_run = 0;
    std::size_t failed_trials = 0;
    std::size_t mochi_mismatches = 0;
    std::size_t fixed_mismatches = 0;
    std::uint64_t duplicates = 0;
    std::size_t symmetry_violations = 0;
    std::size_t exclusivity_violations = 0;
    std::uint64_t oracle_pairs = 0;
    std::vector<TrialOutcome> failures;

    bool ok() const { return failed_trials == 0; }
};

inline VerifySummary run_verify(const VerifyOptions& opt,
                                const std::function<void(const TrialOutcome&)>& on_trial = {}) {
    if (opt.trials < 1) throw std::invalid_argument("verify: trials must be at least 1");
    if (opt.n_min < 1 || opt.n_min > opt.n_max) throw std::invalid_argument("verify: bad size range");
    VerifySummary sum;
    for (std::size_t k = 0; k < opt.trials; ++k) {
        const TrialOutcome t = run_trial(trial_params(opt.seed, k, opt.n_min, opt.n_max), opt.threads);
        ++sum.trials_run;
        sum.oracle_pairs += t.oracle_pairs;
        sum.mochi_mismatches += t.mochi_matches ? 0 : 1;
        sum.fixed_mismatches += t.fixed_matches ? 0 : 1;
        sum.duplicates += t.mochi_duplicates + t.fixed_duplicates;
        sum.symmetry_violations += t.symmetry_violations;
        sum.exclusivity_violations += t.exclusivity_violations;
        if (on_trial) on_trial(t);
        if (!t.ok()) {
            ++sum.failed_trials;
            sum.failures.push_back(t);
            if (opt.stop_on_failure) break;
        }
    }
    return sum;
}

}  // namespace mochi
