#pragma once
/*
scenes.hpp
----------
Scene generation, position perturbation and the particle text format.

Particle file format (LF line endings):

    # density <value>          optional header, used to derive masses
    x y z r                    one particle per line, 9 significant digits

Other lines starting with '#' are comments. Blank lines are skipped.
*/

#include "geometry.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <algorithm>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace mochi {

// ---------------------------------------------------------------------------
// Random streams

/// Portable random stream: mt19937_64 (fully specified by the standard)
/// keyed by seed and purpose. Reals are built from the top 53 bits directly,
/// since std:: distributions differ between standard libraries.
class RandomStream {
public:
    enum class Purpose : std::uint64_t {
        radii = 0x7261646969ULL,
        placement = 0x706c616365ULL,
        perturbation = 0x7065727462ULL,
        trial = 0x747269616cULL,
    };

    RandomStream(std::uint64_t seed, Purpose purpose)
        : engine_(mix(seed ^ mix(static_cast<std::uint64_t>(purpose)))) {}

    std::uint64_t next() { return engine_(); }

    /// [0, 1)
    real uniform() { return static_cast<real>(engine_() >> 11) * 0x1.0p-53; }

    /// [lo, hi)
    real uniform(real lo, real hi) { return lo + (hi - lo) * uniform(); }

    /// [0, bound)
    std::uint64_t below(std::uint64_t bound) {
        // rejection keeps it unbiased
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

    bool coin() { return (engine_() >> 63) != 0; }

    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

/// Seed for the k-th derived item (trial, variant) of a run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
    return RandomStream::mix(seed + RandomStream::mix(k + 1));
}

// ---------------------------------------------------------------------------
// Generation

enum class Placement { uniform_random, grid_jittered };

struct SceneSpec {
    std::size_t count = 10000;
    Aabb box{{0, 0, 0}, {1, 1, 1}};
    real radii_min = 0.01;
    real radii_max = 0.012;
    real density = 500;
    std::uint64_t seed = 1;
    Placement placement = Placement::grid_jittered;
};

struct GridShape {
    std::size_t nx = 1, ny = 1, nz = 1;
    std::size_t cells() const { return nx * ny * nz; }
};

// Smallest grid with at least `count` cells whose cells are roughly cubic.
inline GridShape grid_shape_for(std::size_t count, const Aabb& box) {
    const Vec3 e = box.extent();
    const real cell = std::cbrt(e.x * e.y * e.z / static_cast<real>(count));
    GridShape g;
    g.nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(e.x / cell)));
    g.ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(e.y / cell)));
    g.nz = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(e.z / cell)));
    // grow the axis with the largest cells until everything fits
    while (g.cells() < count) {
        const real cx = e.x / g.nx, cy = e.y / g.ny, cz = e.z / g.nz;
        if (cx >= cy && cx >= cz) {
            ++g.nx;
        } else if (cy >= cz) {
            ++g.ny;
        } else {
            ++g.nz;
        }
    }
    return g;
}

inline void validate(const SceneSpec& spec) {
    if (spec.count < 1) throw std::invalid_argument("scene: count must be at least 1");
    if (!is_valid(spec.box)) throw std::invalid_argument("scene: invalid box");
    if (!(spec.radii_min > 0) || !(spec.radii_min <= spec.radii_max) ||
        !std::isfinite(spec.radii_max)) {
        throw std::invalid_argument("scene: need 0 < radii_min <= radii_max");
    }
    if (!(spec.density > 0)) throw std::invalid_argument("scene: density must be positive");
    const Vec3 e = spec.box.extent();
    if (e.x < 2 * spec.radii_max || e.y < 2 * spec.radii_max || e.z < 2 * spec.radii_max) {
        throw std::invalid_argument("scene: box is smaller than the largest sphere");
    }
    if (spec.placement == Placement::grid_jittered) {
        const GridShape g = grid_shape_for(spec.count, spec.box);
        const real cell = std::min({e.x / g.nx, e.y / g.ny, e.z / g.nz});
        if (cell < 2 * spec.radii_max) {
            throw std::invalid_argument("scene: grid_jittered placement does not fit " +
                                        std::to_string(spec.count) + " spheres of radius " +
                                        std::to_string(spec.radii_max) + " in the box");
        }
    }
}

/// Deterministic scene for `spec`: radii uniform in [radii_min, radii_max],
/// mass from density, zero velocity, every sphere inside the box.
inline std::vector<Particle> generate(const SceneSpec& spec) {
    validate(spec);
    RandomStream radii(spec.seed, RandomStream::Purpose::radii);
    RandomStream place(spec.seed, RandomStream::Purpose::placement);

    std::vector<Particle> out(spec.count);
    for (Particle& p : out) {
        p.radius = spec.radii_min == spec.radii_max ? spec.radii_min
                                                    : radii.uniform(spec.radii_min, spec.radii_max);
        p.mass = sphere_mass(p.radius, spec.density);
    }

    const Aabb& box = spec.box;
    if (spec.placement == Placement::uniform_random) {
        for (Particle& p : out) {
            const real r = p.radius;
            p.center = {place.uniform(box.min.x + r, box.max.x - r),
                        place.uniform(box.min.y + r, box.max.y - r),
                        place.uniform(box.min.z + r, box.max.z - r)};
        }
        return out;
    }

    // cells filled x-fastest, bottom layer first
    const GridShape g = grid_shape_for(spec.count, box);
    const Vec3 e = box.extent();
    const Vec3 cell{e.x / g.nx, e.y / g.ny, e.z / g.nz};
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::size_t ix = k % g.nx;
        const std::size_t iy = (k / g.nx) % g.ny;
        const std::size_t iz = k / (g.nx * g.ny);
        const Vec3 lo{box.min.x + cell.x * ix, box.min.y + cell.y * iy, box.min.z + cell.z * iz};
        Particle& p = out[k];
        const real r = p.radius;
        p.center = {place.uniform(lo.x + r, lo.x + cell.x - r),
                    place.uniform(lo.y + r, lo.y + cell.y - r),
                    place.uniform(lo.z + r, lo.z + cell.z - r)};
    }
    return out;
}

/// Displaces each center component by a magnitude uniform in
/// [noise_min, noise_max] with a random sign. Everything else is untouched.
inline std::vector<Particle> perturb(std::vector<Particle> particles, real noise_min,
                                     real noise_max, std::uint64_t seed) {
    if (!(noise_min >= 0) || !(noise_min <= noise_max)) {
        throw std::invalid_argument("perturb: need 0 <= noise_min <= noise_max");
    }
    RandomStream rng(seed, RandomStream::Purpose::perturbation);
    for (Particle& p : particles) {
        for (int k = 0; k < 3; ++k) {
            const real magnitude = rng.uniform(noise_min, noise_max);
            const bool negative = rng.coin();
            p.center[k] += negative ? -magnitude : magnitude;
        }
    }
    return particles;
}

// ---------------------------------------------------------------------------
// Particle files

class SceneFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SceneFileNotFound : public SceneFileError {
public:
    explicit SceneFileNotFound(const std::string& path)
        : SceneFileError("particle file not found: " + path), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class SceneParseError : public SceneFileError {
public:
    SceneParseError(const std::string& path, std::size_t line, const std::string& what)
        : SceneFileError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline constexpr real kDefaultDensity = 500;

namespace detail {

inline bool parse_real(std::string_view token, real& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t k = 0;
    while (k < line.size()) {
        while (k < line.size() && (line[k] == ' ' || line[k] == '\t' || line[k] == '\r')) ++k;
        const std::size_t start = k;
        while (k < line.size() && line[k] != ' ' && line[k] != '\t' && line[k] != '\r') ++k;
        if (k > start) tokens.push_back(line.substr(start, k - start));
    }
    return tokens;
}

inline std::string format_real(real v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace detail

/// Reads particles from the text format. Masses come from the "# density"
/// header, or `default_density` without one. Velocities and forces are zero.
inline std::vector<Particle> parse_particles(std::istream& in, const std::string& name,
                                             real default_density = kDefaultDensity) {
    real density = default_density;
    std::vector<Particle> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;
        if (tokens[0].starts_with("#")) {
            const bool hash_alone = tokens[0] == "#";
            const std::string_view key = hash_alone ? (tokens.size() > 1 ? tokens[1] : "")
                                                    : tokens[0].substr(1);
            if (key == "density") {
                const std::size_t at = hash_alone ? 2 : 1;
                real d = 0;
                if (tokens.size() != at + 1 || !detail::parse_real(tokens[at], d) || !(d > 0)) {
                    throw SceneParseError(name, line_no, "malformed density header");
                }
                if (!out.empty()) {
                    throw SceneParseError(name, line_no, "density header after particle data");
                }
                density = d;
            }
            continue;
        }
        if (tokens.size() != 4) {
            throw SceneParseError(name, line_no,
                                  "expected 4 fields \"x y z r\", got " + std::to_string(tokens.size()));
        }
        real v[4];
        for (int k = 0; k < 4; ++k) {
            if (!detail::parse_real(tokens[static_cast<std::size_t>(k)], v[k])) {
                throw SceneParseError(name, line_no,
                                      "not a finite number: \"" + std::string(tokens[static_cast<std::size_t>(k)]) + "\"");
            }
        }
        if (!(v[3] > 0)) throw SceneParseError(name, line_no, "radius must be positive");
        Particle p;
        p.center = {v[0], v[1], v[2]};
        p.radius = v[3];
        p.mass = sphere_mass(p.radius, density);
        out.push_back(p);
    }
    if (out.empty()) throw SceneParseError(name, line_no, "no particles in file");
    return out;
}

inline std::vector<Particle> load(const std::string& path, real default_density = kDefaultDensity) {
    std::ifstream in(path);
    if (!in) throw SceneFileNotFound(path);
    return parse_particles(in, path, default_density);
}

inline void write_particles(std::ostream& out, std::span<const Particle> particles, real density,
                            std::span<const std::string> comments = {}) {
    out << "# density " << detail::format_real(density) << '\n';
    for (const std::string& c : comments) out << "# " << c << '\n';
    for (const Particle& p : particles) {
        out << detail::format_real(p.center.x) << ' ' << detail::format_real(p.center.y) << ' '
            << detail::format_real(p.center.z) << ' ' << detail::format_real(p.radius) << '\n';
    }
}

inline void save(const std::string& path, std::span<const Particle> particles, real density,
                 std::span<const std::string> comments = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SceneFileError("cannot open for writing: " + path);
    write_particles(out, particles, density, comments);
    if (!out) throw SceneFileError("write failed: " + path);
}

/// Density implied by a particle's mass and radius.
inline real implied_density(const Particle& p) { return p.mass / sphere_mass(p.radius, 1); }

}  // namespace mochi
