#pragma once
/*
dem.hpp
-------
Discrete-element simulation loop: detect -> resolve normal contact forces ->
integrate and enforce walls -> refit or rebuild the BVH.

Contact model is a linear spring-dashpot along the contact normal, no
friction or tangential forces. Integration is semi-implicit Euler. Forces are
accumulated in sorted pair order so that detectors producing the same pair
set give bitwise-identical trajectories.
*/

#include "bvh.hpp"
#include "dcd.hpp"
#include "geometry.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mochi {

struct ConstantGravity {
    Vec3 g{0, 0, -9.8};
};

/// g(t) = magnitude * (sin(wt), 0, -cos(wt)): starts pointing down, turns toward +x.
struct RotatingGravity {
    real magnitude = 9.8;
    real omega = real(0.25) * kPi;
};

using GravityMode = std::variant<ConstantGravity, RotatingGravity>;

inline Vec3 gravity_at(const GravityMode& mode, real t) {
    if (const auto* c = std::get_if<ConstantGravity>(&mode)) return c->g;
    const auto& r = std::get<RotatingGravity>(mode);
    return {r.magnitude * std::sin(r.omega * t), 0, -r.magnitude * std::cos(r.omega * t)};
}

struct SimConfig {
    real dt = 1e-4;
    std::size_t steps_per_frame = 1000;
    std::size_t frames = 1;
    GravityMode gravity = ConstantGravity{};
    real stiffness = 1e4;  // k, force / length
    real damping = 10;     // c, force * time / length
    real restitution = 0.5;
    Aabb box{{0, 0, 0}, {1, 1, 1}};
    // 0 = refit only, n = rebuild when iteration % n == 0
    std::size_t rebuild_every = 0;
    Detector detector = Detector::mochi;
    unsigned threads = 1;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Checks parameter ranges, that the box holds every particle, and the
/// explicit-integration limits dt < 2*sqrt(m_min/k) (spring) and
/// c*dt <= m_min (dashpot).
inline void validate(const SimConfig& config, std::span<const Particle> particles) {
    if (!(config.dt > 0)) throw ConfigError("dt must be positive");
    if (!(config.stiffness >= 0)) throw ConfigError("stiffness must be non-negative");
    if (!(config.damping >= 0)) throw ConfigError("damping must be non-negative");
    if (!(config.restitution >= 0 && config.restitution <= 1)) {
        throw ConfigError("restitution must lie in [0, 1]");
    }
    if (!is_valid(config.box)) throw ConfigError("invalid world box");
    if (particles.empty()) throw ConfigError("no particles");
    real m_min = particles[0].mass;
    const Vec3 extent = config.box.extent();
    for (const Particle& p : particles) {
        if (!is_valid(p)) throw ConfigError("invalid particle (radius/mass must be positive and finite)");
        if (!point_in_aabb(p.center, config.box)) throw ConfigError("particle center outside the world box");
        if (2 * p.radius > extent.x || 2 * p.radius > extent.y || 2 * p.radius > extent.z) {
            throw ConfigError("world box cannot contain a particle of radius " + std::to_string(p.radius));
        }
        m_min = std::min(m_min, p.mass);
    }
    if (config.stiffness > 0) {
        const real limit = 2 * std::sqrt(m_min / config.stiffness);
        if (!(config.dt < limit)) {
            throw ConfigError("unstable timestep: dt = " + std::to_string(config.dt) +
                              " must be below 2*sqrt(m_min/k) = " + std::to_string(limit));
        }
    }
    if (config.damping > 0 && !(config.damping * config.dt <= m_min)) {
        throw ConfigError("unstable damping: c*dt = " + std::to_string(config.damping * config.dt) +
                          " exceeds the smallest mass " + std::to_string(m_min));
    }
}

/// Spring-dashpot normal force for one contact: (force on i, force on j).
inline std::pair<Vec3, Vec3> collision_force(const CollisionPair& pair,
                                             std::span<const Particle> particles, real stiffness,
                                             real damping) {
    const Particle& pi = particles[pair.i];
    const Particle& pj = particles[pair.j];
    const real approach = dot(pj.velocity - pi.velocity, pair.normal);
    const Vec3 on_j = pair.normal * (stiffness * pair.overlap - damping * approach);
    return {-on_j, on_j};
}

/// Clamps the sphere back inside `box` on every axis it crosses and
/// reflects the outward velocity component scaled by the restitution.
inline Particle apply_boundary(Particle p, const Aabb& box, real restitution) {
    for (int k = 0; k < 3; ++k) {
        if (p.center[k] - p.radius < box.min[k]) {
            p.center[k] = box.min[k] + p.radius;
            if (p.velocity[k] < 0) p.velocity[k] = -restitution * p.velocity[k];
        } else if (p.center[k] + p.radius > box.max[k]) {
            p.center[k] = box.max[k] - p.radius;
            if (p.velocity[k] > 0) p.velocity[k] = -restitution * p.velocity[k];
        }
    }
    return p;
}

inline Particle integrate(Particle p, const Vec3& gravity, real dt) {
    p.velocity += (p.force / p.mass + gravity) * dt;
    p.center += p.velocity * dt;
    p.force = {};
    return p;
}

struct PhaseTimers {
    std::uint64_t build_ns = 0;
    std::uint64_t dcd_ns = 0;
    std::uint64_t update_ns = 0;

    std::uint64_t total_ns() const { return build_ns + dcd_ns + update_ns; }
};

struct SimState {
    std::vector<Particle> particles;
    real time = 0;
    std::uint64_t iteration = 0;
    Bvh bvh;
    real r_max = 0;
    PhaseTimers timers;
};

struct StepRecord {
    std::uint64_t iteration = 0;
    std::size_t pairs = 0;
    std::uint64_t build_ns = 0;
    std::uint64_t dcd_ns = 0;
    std::uint64_t update_ns = 0;
    std::uint64_t candidates = 0;
    std::uint64_t nodes_visited = 0;
    bool rebuilt = false;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline std::uint64_t elapsed_ns(Clock::time_point from, Clock::time_point to) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count());
}

}  // namespace detail

/// Validates and builds the initial BVH (counted as build time).
inline SimState make_state(std::vector<Particle> particles, const SimConfig& config) {
    validate(config, particles);
    SimState state;
    state.particles = std::move(particles);
    state.r_max = max_radius(state.particles);
    const auto t0 = detail::Clock::now();
    const auto boxes = detector_boxes(config.detector, state.particles, state.r_max);
    state.bvh = Bvh::build(boxes);
    state.timers.build_ns += detail::elapsed_ns(t0, detail::Clock::now());
    return state;
}

/// Adds every pair's contact force into the particle accumulators, in the
/// order given (sorted for determinism).
inline void accumulate_forces(std::span<Particle> particles, std::span<const CollisionPair> pairs,
                              real stiffness, real damping) {
    for (const CollisionPair& pair : pairs) {
        const auto [on_i, on_j] = collision_force(pair, particles, stiffness, damping);
        particles[pair.i].force += on_i;
        particles[pair.j].force += on_j;
    }
}

/// One iteration. When `detected` is non-null it receives the detector output.
inline StepRecord step(SimState& state, const SimConfig& config,
                       DetectionResult* detected = nullptr) {
    if (state.bvh.primitive_count() != state.particles.size()) {
        throw std::logic_error("step: BVH does not match particle count");
    }
    StepRecord rec;
    rec.iteration = state.iteration;

    const auto t0 = detail::Clock::now();
    DetectionResult result = detect(config.detector, state.particles, state.bvh, config.threads);
    accumulate_forces(state.particles, result.pairs, config.stiffness, config.damping);
    const auto t1 = detail::Clock::now();

    const Vec3 g = gravity_at(config.gravity, state.time);
    detail::parallel_ranges(state.particles.size(), config.threads,
                            [&](unsigned, std::size_t begin, std::size_t end) {
                                for (std::size_t k = begin; k < end; ++k) {
                                    Particle& p = state.particles[k];
                                    p = apply_boundary(integrate(p, g, config.dt), config.box,
                                                       config.restitution);
                                }
                            });
    const auto t2 = detail::Clock::now();

    const auto boxes = detector_boxes(config.detector, state.particles, state.r_max);
    rec.rebuilt = config.rebuild_every > 0 && state.iteration % config.rebuild_every == 0;
    if (rec.rebuilt) {
        state.bvh = Bvh::build(boxes);
    } else {
        state.bvh.refit(boxes);
    }
    const auto t3 = detail::Clock::now();

    rec.pairs = result.pairs.size();
    rec.candidates = result.candidates_tested;
    rec.nodes_visited = result.nodes_visited;
    rec.dcd_ns = detail::elapsed_ns(t0, t1);
    rec.update_ns = detail::elapsed_ns(t1, t2);
    rec.build_ns = detail::elapsed_ns(t2, t3);
    state.timers.dcd_ns += rec.dcd_ns;
    state.timers.update_ns += rec.update_ns;
    state.timers.build_ns += rec.build_ns;

    ++state.iteration;
    state.time = static_cast<real>(state.iteration) * config.dt;
    if (detected) *detected = std::move(result);
    return rec;
}

struct SimReport {
    std::vector<StepRecord> steps;
    std::uint64_t initial_build_ns = 0;
    PhaseTimers totals;  // includes the initial build
    std::uint64_t total_pairs = 0;
};

struct SimObserver {
    std::function<void(const SimState&, const StepRecord&)> on_step;
    std::function<void(std::size_t frame, const SimState&)> on_frame;
};

/// frames * steps_per_frame iterations from `particles`.
inline SimReport run(const SimConfig& config, std::vector<Particle> particles,
                     const SimObserver& observer = {}) {
    SimState state = make_state(std::move(particles), config);
    SimReport report;
    report.initial_build_ns = state.timers.build_ns;
    report.steps.reserve(config.frames * config.steps_per_frame);
    for (std::size_t frame = 0; frame < config.frames; ++frame) {
        for (std::size_t s = 0; s < config.steps_per_frame; ++s) {
            const StepRecord rec = step(state, config);
            report.total_pairs += rec.pairs;
            report.steps.push_back(rec);
            if (observer.on_step) observer.on_step(state, rec);
        }
        if (observer.on_frame) observer.on_frame(frame, state);
    }
    report.totals = state.timers;
    return report;
}

inline Vec3 total_momentum(std::span<const Particle> particles) {
    Vec3 m;
    for (const Particle& p : particles) m += p.velocity * p.mass;
    return m;
}

inline real kinetic_energy(std::span<const Particle> particles) {
    real e = 0;
    for (const Particle& p : particles) e += real(0.5) * p.mass * dot(p.velocity, p.velocity);
    return e;
}

}  // namespace mochi
