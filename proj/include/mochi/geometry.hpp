#pragma once
/*
geometry.hpp
------------
Core geometric types and the sphere / proxy-sphere / AABB predicates used by
the collision detectors.

A proxy sphere is the concentric sphere of twice the radius. Its AABB is what
gets indexed in the BVH; queries are point containment tests against it.

All containment tests are closed, so touching counts as colliding and the
broad phase is never tighter than the narrow phase at a boundary.
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

namespace mochi {

using real = double;
using index_t = std::uint32_t;

struct Vec3 {
    real x = 0;
    real y = 0;
    real z = 0;

    constexpr Vec3() = default;
    constexpr Vec3(real x_, real y_, real z_) : x(x_), y(y_), z(z_) {}

    constexpr real operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }
    constexpr real& operator[](int k) { return k == 0 ? x : (k == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(real s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(real s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(real s) { x *= s; y *= s; z *= s; return *this; }

    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(real s, const Vec3& v) { return v * s; }

constexpr real dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline real norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Every distance the detectors compare goes through here so that all of them
// see the same rounded value for a given pair, in either argument order.
inline real distance(const Vec3& a, const Vec3& b) {
    const real dx = a.x - b.x;
    const real dy = a.y - b.y;
    const real dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct Particle {
    Vec3 center;
    real radius = 1;
    real mass = 1;
    Vec3 velocity;
    Vec3 force;

    bool operator==(const Particle&) const = default;
};

inline bool is_valid(const Particle& p) {
    return p.radius > 0 && p.mass > 0 && std::isfinite(p.radius) && std::isfinite(p.mass) &&
           is_finite(p.center) && is_finite(p.velocity) && is_finite(p.force);
}

inline constexpr real kPi = 3.14159265358979323846;

inline real sphere_mass(real radius, real density) {
    return density * (real(4) / real(3)) * kPi * radius * radius * radius;
}

struct Aabb {
    Vec3 min;
    Vec3 max;

    bool operator==(const Aabb&) const = default;

    Vec3 centroid() const { return (min + max) * real(0.5); }
    Vec3 extent() const { return max - min; }
    real volume() const {
        const Vec3 e = extent();
        return e.x * e.y * e.z;
    }

    Aabb& extend(const Vec3& p) {
        min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
        max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
        return *this;
    }

    Aabb& extend(const Aabb& b) {
        extend(b.min);
        return extend(b.max);
    }

    // Inverted box; extending it by anything yields that thing.
    static constexpr Aabb empty() {
        constexpr real inf = std::numeric_limits<real>::infinity();
        return {{inf, inf, inf}, {-inf, -inf, -inf}};
    }

    static Aabb cube(const Vec3& center, real half_side) {
        const Vec3 h{half_side, half_side, half_side};
        return {center - h, center + h};
    }
};

inline bool is_valid(const Aabb& b) {
    return is_finite(b.min) && is_finite(b.max) && b.min.x <= b.max.x && b.min.y <= b.max.y &&
           b.min.z <= b.max.z;
}

inline Aabb merge(const Aabb& a, const Aabb& b) {
    return {{std::min(a.min.x, b.min.x), std::min(a.min.y, b.min.y), std::min(a.min.z, b.min.z)},
            {std::max(a.max.x, b.max.x), std::max(a.max.y, b.max.y), std::max(a.max.z, b.max.z)}};
}

// a fully inside b (closed)
inline bool contains(const Aabb& b, const Aabb& a) {
    return b.min.x <= a.min.x && b.min.y <= a.min.y && b.min.z <= a.min.z && a.max.x <= b.max.x &&
           a.max.y <= b.max.y && a.max.z <= b.max.z;
}

/// Unordered colliding pair, stored with i < j. `normal` points from i to j.
struct CollisionPair {
    index_t i = 0;
    index_t j = 0;
    real overlap = 0;
    Vec3 normal{0, 0, 1};

    bool operator==(const CollisionPair&) const = default;
};

inline bool pair_less(const CollisionPair& a, const CollisionPair& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
}

inline real proxy_radius(const Particle& p) { return 2 * p.radius; }

inline Aabb proxy_aabb(const Particle& p) { return Aabb::cube(p.center, 2 * p.radius); }

/// Box of side 4 * r_max around the center, as used by the fixed-radius
/// neighbour-search reduction. Throws if r_max is smaller than the radius.
inline Aabb baseline_aabb(const Particle& p, real r_max) {
    if (!(r_max >= p.radius)) {
        throw std::invalid_argument("baseline_aabb: r_max is smaller than the particle radius");
    }
    return Aabb::cube(p.center, 2 * r_max);
}

inline bool point_in_aabb(const Vec3& q, const Aabb& box) {
    return box.min.x <= q.x && q.x <= box.max.x && box.min.y <= q.y && q.y <= box.max.y &&
           box.min.z <= q.z && q.z <= box.max.z;
}

inline bool point_in_sphere(const Vec3& q, const Vec3& center, real radius) {
    return distance(q, center) <= radius;
}

// Builds the canonical record for a pair known to collide at distance `dist`.
// Coincident centers get the fixed normal (0,0,1).
inline CollisionPair make_pair_record(index_t a, const Particle& pa, index_t b, const Particle& pb,
                                      real dist) {
    CollisionPair out;
    const bool a_first = a < b;
    const Particle& pi = a_first ? pa : pb;
    const Particle& pj = a_first ? pb : pa;
    out.i = a_first ? a : b;
    out.j = a_first ? b : a;
    out.overlap = pi.radius + pj.radius - dist;
    if (dist > 0) {
        out.normal = (pj.center - pi.center) / dist;
    } else {
        out.normal = {0, 0, 1};
    }
    return out;
}

/// Narrow-phase sphere test. Indices are only used for the record; the
/// returned pair is ordered (min, max) with the normal pointing min -> max.
inline std::optional<CollisionPair> spheres_collide(index_t ia, const Particle& a, index_t ib,
                                                    const Particle& b) {
    const real dist = distance(a.center, b.center);
    if (a.radius + b.radius - dist >= 0) {
        return make_pair_record(ia, a, ib, b, dist);
    }
    return std::nullopt;
}

/// Index-free form: pair is reported as (0, 1) with the normal from a to b.
inline std::optional<CollisionPair> spheres_collide(const Particle& a, const Particle& b) {
    return spheres_collide(0, a, 1, b);
}

}  // namespace mochi
