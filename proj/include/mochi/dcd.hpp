#pragma once
/*
dcd.hpp
-------
Discrete collision detection over spheres.

  detect_mochi         proxy-sphere reduction: each particle indexes the AABB
                       of its 2r proxy sphere and queries with its center;
                       a colliding pair is emitted by exactly one of its two
                       directed hits.
  detect_fixed_radius  baseline: every particle indexes a box of side
                       4 * r_max; both directed hits see each collision and
                       the lower index emits.
  detect_proxy_only    deliberately incomplete: only the larger particle's
                       ray may emit, so small-into-large contacts are lost.
  detect_brute         all n(n-1)/2 pairs; the reference answer.

Broad and narrow phase are interleaved: hits are streamed through a hit rule
and only emitted pairs are stored.
*/

#include "bvh.hpp"
#include "geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace mochi {

struct DetectionResult {
    std::vector<CollisionPair> pairs;  // sorted by (i, j), unique
    std::uint64_t candidates_tested = 0;
    std::uint64_t hits_deduplicated = 0;
    // same pair emitted more than once; must stay zero for a correct rule
    std::uint64_t duplicate_emissions = 0;
    std::uint64_t nodes_visited = 0;
};

enum class HitVerdict { miss, suppressed, emit };

/// The proxy-sphere hit rule. `ray` is the particle whose center was the
/// query point, `target` the particle owning the intersected box.
struct MochiRule {
    HitVerdict operator()(index_t ray_id, const Particle& ray, index_t target_id,
                          const Particle& target, real dist) const {
        if (!(ray.radius + target.radius - dist >= 0)) return HitVerdict::miss;
        const bool in_proxy = 2 * target.radius - dist >= 0;
        bool sole_or_lower = target_id > ray_id || 2 * ray.radius - dist <= 0;
#ifdef MOCHI_MUTATE_DEDUP
        sole_or_lower = !sole_or_lower;
#endif
        return in_proxy && sole_or_lower ? HitVerdict::emit : HitVerdict::suppressed;
    }
};

struct FixedRadiusRule {
    HitVerdict operator()(index_t ray_id, const Particle& ray, index_t target_id,
                          const Particle& target, real dist) const {
        if (!(ray.radius + target.radius - dist >= 0)) return HitVerdict::miss;
        return ray_id < target_id ? HitVerdict::emit : HitVerdict::suppressed;
    }
};

// Larger radius owns the pair (ties: lower index); no symmetry rescue.
struct ProxyOnlyRule {
    HitVerdict operator()(index_t ray_id, const Particle& ray, index_t target_id,
                          const Particle& target, real dist) const {
        if (!(ray.radius + target.radius - dist >= 0)) return HitVerdict::miss;
        const bool owner =
            ray.radius > target.radius || (ray.radius == target.radius && ray_id < target_id);
        return owner && 2 * target.radius - dist >= 0 ? HitVerdict::emit : HitVerdict::suppressed;
    }
};

/// One directed broad-phase hit through the proxy-sphere rule. The caller
/// guarantees the ray's center lies in the target's proxy AABB.
inline std::optional<CollisionPair> process_hit(index_t ray_id, index_t aabb_id,
                                                std::span<const Particle> particles) {
    if (ray_id == aabb_id) throw std::invalid_argument("process_hit: self hit");
    const Particle& ray = particles[ray_id];
    const Particle& target = particles[aabb_id];
    const real dist = distance(ray.center, target.center);
    if (MochiRule{}(ray_id, ray, aabb_id, target, dist) == HitVerdict::emit) {
        return make_pair_record(ray_id, ray, aabb_id, target, dist);
    }
    return std::nullopt;
}

inline real max_radius(std::span<const Particle> particles) {
    real r = 0;
    for (const Particle& p : particles) r = std::max(r, p.radius);
    return r;
}

inline std::vector<Aabb> proxy_boxes(std::span<const Particle> particles) {
    std::vector<Aabb> boxes;
    boxes.reserve(particles.size());
    for (const Particle& p : particles) boxes.push_back(proxy_aabb(p));
    return boxes;
}

inline std::vector<Aabb> baseline_boxes(std::span<const Particle> particles, real r_max) {
    std::vector<Aabb> boxes;
    boxes.reserve(particles.size());
    for (const Particle& p : particles) boxes.push_back(baseline_aabb(p, r_max));
    return boxes;
}

namespace detail {

// Runs body(worker, begin, end) over [0, n) split into contiguous ranges.
template <class Body>
void parallel_ranges(std::size_t n, unsigned threads, Body&& body) {
    const unsigned workers =
        static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n)));
    if (workers <= 1) {
        body(0u, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
    }
    for (auto& t : pool) t.join();
}

struct WorkerOutput {
    std::vector<CollisionPair> pairs;
    std::uint64_t candidates = 0;
    std::uint64_t suppressed = 0;
    std::uint64_t visited = 0;
};

// Set union of the worker buffers; repeated pairs are counted, then dropped.
inline DetectionResult merge_outputs(std::vector<WorkerOutput>& outputs) {
    DetectionResult result;
    std::size_t total = 0;
    for (const auto& o : outputs) total += o.pairs.size();
    result.pairs.reserve(total);
    for (auto& o : outputs) {
        result.pairs.insert(result.pairs.end(), o.pairs.begin(), o.pairs.end());
        result.candidates_tested += o.candidates;
        result.hits_deduplicated += o.suppressed;
        result.nodes_visited += o.visited;
    }
    std::sort(result.pairs.begin(), result.pairs.end(), pair_less);
    const auto same = [](const CollisionPair& a, const CollisionPair& b) {
        return a.i == b.i && a.j == b.j;
    };
    const auto last = std::unique(result.pairs.begin(), result.pairs.end(), same);
    result.duplicate_emissions = static_cast<std::uint64_t>(result.pairs.end() - last);
    result.pairs.erase(last, result.pairs.end());
    return result;
}

}  // namespace detail

/// Queries `bvh` with every particle center and feeds hits, in ascending
/// primitive order, through `rule`. `bvh` must index one box per particle.
template <class Rule>
DetectionResult detect_with_rule(std::span<const Particle> particles, const Bvh& bvh, Rule rule,
                                 unsigned threads = 1) {
    if (bvh.primitive_count() != particles.size()) {
        throw std::invalid_argument("detect: BVH primitive count does not match particle count");
    }
    const std::size_t n = particles.size();
    const unsigned workers =
        static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n)));
    std::vector<detail::WorkerOutput> outputs(workers);

    detail::parallel_ranges(n, workers, [&](unsigned w, std::size_t begin, std::size_t end) {
        detail::WorkerOutput& out = outputs[w];
        std::vector<index_t> hits;
        for (std::size_t q = begin; q < end; ++q) {
            const auto ray_id = static_cast<index_t>(q);
            const Particle& ray = particles[q];
            hits.clear();
            out.visited += bvh.for_each_hit(ray.center, [&](index_t prim) { hits.push_back(prim); });
            std::sort(hits.begin(), hits.end());
            for (const index_t target_id : hits) {
                if (target_id == ray_id) continue;
                const Particle& target = particles[target_id];
                const real dist = distance(ray.center, target.center);
                ++out.candidates;
                switch (rule(ray_id, ray, target_id, target, dist)) {
                    case HitVerdict::emit:
                        out.pairs.push_back(make_pair_record(ray_id, ray, target_id, target, dist));
                        break;
                    case HitVerdict::suppressed:
                        ++out.suppressed;
                        break;
                    case HitVerdict::miss:
                        break;
                }
            }
        }
    });
    return detail::merge_outputs(outputs);
}

/// `bvh` must be built or refit over proxy_boxes(particles).
inline DetectionResult detect_mochi(std::span<const Particle> particles, const Bvh& bvh,
                                    unsigned threads = 1) {
    return detect_with_rule(particles, bvh, MochiRule{}, threads);
}

inline DetectionResult detect_mochi(std::span<const Particle> particles, unsigned threads = 1) {
    const auto boxes = proxy_boxes(particles);
    return detect_mochi(particles, Bvh::build(boxes), threads);
}

/// `bvh` must be built or refit over baseline_boxes(particles, max_radius(particles)).
inline DetectionResult detect_fixed_radius(std::span<const Particle> particles, const Bvh& bvh,
                                           unsigned threads = 1) {
    return detect_with_rule(particles, bvh, FixedRadiusRule{}, threads);
}

inline DetectionResult detect_fixed_radius(std::span<const Particle> particles,
                                           unsigned threads = 1) {
    const auto boxes = baseline_boxes(particles, max_radius(particles));
    return detect_fixed_radius(particles, Bvh::build(boxes), threads);
}

/// Same index as detect_mochi.
inline DetectionResult detect_proxy_only(std::span<const Particle> particles, const Bvh& bvh,
                                         unsigned threads = 1) {
    return detect_with_rule(particles, bvh, ProxyOnlyRule{}, threads);
}

inline DetectionResult detect_proxy_only(std::span<const Particle> particles,
                                         unsigned threads = 1) {
    const auto boxes = proxy_boxes(particles);
    return detect_proxy_only(particles, Bvh::build(boxes), threads);
}

/// Tests every unordered pair. A single-precision squared-distance prefilter
/// skips blocks of pairs that are provably apart; every surviving pair goes
/// through spheres_collide, so the result is exactly the double-precision
/// answer.
inline DetectionResult detect_brute(std::span<const Particle> particles, unsigned threads = 1) {
    const std::size_t n = particles.size();
    DetectionResult result;
    if (n < 2) return result;

    // Coordinates are recentred before rounding to float. Each rounded
    // coordinate is off by at most 2^-24 * C (C = largest recentred
    // magnitude) and a float difference adds at most as much again per
    // operand, so |d_float - d| < 7 * 2^-24 * C. Inflating the contact
    // distance by 8 * 2^-24 * C plus a relative margin for the float
    // arithmetic can only admit extra pairs, never drop one.
    Aabb frame = Aabb::empty();
    for (const Particle& p : particles) frame.extend(p.center);
    const Vec3 mid = frame.centroid();
    real c_max = 0;
    for (const Particle& p : particles) {
        const Vec3 d = p.center - mid;
        c_max = std::max({c_max, std::abs(d.x), std::abs(d.y), std::abs(d.z)});
    }
    const real slack = 8 * 0x1.0p-24 * c_max;

    std::vector<float> xs(n), ys(n), zs(n), rs(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3 d = particles[k].center - mid;
        xs[k] = static_cast<float>(d.x);
        ys[k] = static_cast<float>(d.y);
        zs[k] = static_cast<float>(d.z);
        // rounded up so the float sum never undershoots the real one
        rs[k] = static_cast<float>((particles[k].radius + slack / 2) * (1 + 1e-6));
    }
    constexpr std::size_t kBlock = 64;

    const unsigned workers =
        static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n)));
    std::vector<detail::WorkerOutput> outputs(workers);

    const auto scan_rows = [&](unsigned w) {
        detail::WorkerOutput& out = outputs[w];
        const float* px = xs.data();
        const float* py = ys.data();
        const float* pz = zs.data();
        const float* pr = rs.data();
        // rows interleaved across workers to balance the triangle
        for (std::size_t i = w; i < n; i += workers) {
            const float xi = px[i], yi = py[i], zi = pz[i], ri = pr[i];
            for (std::size_t j0 = i + 1; j0 < n; j0 += kBlock) {
                const std::size_t j1 = std::min(n, j0 + kBlock);
                int near = 0;
                for (std::size_t j = j0; j < j1; ++j) {
                    const float dx = xi - px[j];
                    const float dy = yi - py[j];
                    const float dz = zi - pz[j];
                    const float s = (ri + pr[j]) * 1.00001f;
                    near |= static_cast<int>(dx * dx + dy * dy + dz * dz <= s * s);
                }
                if (near == 0) continue;
                for (std::size_t j = j0; j < j1; ++j) {
                    auto pair = spheres_collide(static_cast<index_t>(i), particles[i],
                                                static_cast<index_t>(j), particles[j]);
                    if (pair) out.pairs.push_back(*pair);
                }
            }
        }
    };
    if (workers <= 1) {
        scan_rows(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(scan_rows, w);
        for (auto& t : pool) t.join();
    }
    result = detail::merge_outputs(outputs);
    result.candidates_tested = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    return result;
}

enum class Detector { mochi, fixed_radius, proxy_only, brute };

inline std::string_view to_string(Detector d) {
    switch (d) {
        case Detector::mochi: return "mochi";
        case Detector::fixed_radius: return "fixed";
        case Detector::proxy_only: return "proxy-only";
        case Detector::brute: return "brute";
    }
    return "?";
}

inline std::optional<Detector> parse_detector(std::string_view s) {
    if (s == "mochi") return Detector::mochi;
    if (s == "fixed" || s == "fixed_radius" || s == "fixed-radius") return Detector::fixed_radius;
    if (s == "proxy-only" || s == "proxy_only") return Detector::proxy_only;
    if (s == "brute") return Detector::brute;
    return std::nullopt;
}

/// Boxes a detector indexes. Brute force uses the proxy boxes so that a
/// simulation state always carries a BVH of matching size.
inline std::vector<Aabb> detector_boxes(Detector d, std::span<const Particle> particles,
                                        real r_max) {
    return d == Detector::fixed_radius ? baseline_boxes(particles, r_max) : proxy_boxes(particles);
}

/// `bvh` must index detector_boxes(d, particles, max radius).
inline DetectionResult detect(Detector d, std::span<const Particle> particles, const Bvh& bvh,
                              unsigned threads = 1) {
    switch (d) {
        case Detector::mochi: return detect_mochi(particles, bvh, threads);
        case Detector::fixed_radius: return detect_fixed_radius(particles, bvh, threads);
        case Detector::proxy_only: return detect_proxy_only(particles, bvh, threads);
        case Detector::brute:
            if (bvh.primitive_count() != particles.size()) {
                throw std::invalid_argument("detect: BVH primitive count does not match particle count");
            }
            return detect_brute(particles, threads);
    }
    throw std::invalid_argument("detect: unknown detector");
}

}  // namespace mochi
