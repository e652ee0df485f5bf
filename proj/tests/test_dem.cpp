#include "test_util.hpp"

#include <mochi/dem.hpp>
#include <mochi/scenes.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace mochi;
using mochi::test::make_particle;

namespace {

SimConfig free_space_config() {
    SimConfig c;
    c.gravity = ConstantGravity{{0, 0, 0}};
    c.box = {{-100, -100, -100}, {100, 100, 100}};
    c.damping = 0;
    c.steps_per_frame = 100;
    return c;
}

}  // namespace

TEST(CollisionForce, SpringOnly) {
    const std::vector<Particle> ps{make_particle({0, 0, 0}, 1), make_particle({0, 0, 1.9}, 1)};
    const auto pair = spheres_collide(0, ps[0], 1, ps[1]);
    ASSERT_TRUE(pair);
    const auto [on_i, on_j] = collision_force(*pair, ps, 100, 0);
    EXPECT_NEAR(on_j.z, 100 * 0.1, 1e-12);
    EXPECT_EQ(on_j.x, 0);
    EXPECT_EQ(on_i, -on_j);
}

TEST(CollisionForce, DashpotResistsApproach) {
    std::vector<Particle> ps{make_particle({0, 0, 0}, 1), make_particle({0, 0, 1.9}, 1)};
    ps[1].velocity = {0, 0, -2};  // closing at 2 m/s
    const auto pair = *spheres_collide(0, ps[0], 1, ps[1]);
    const auto [on_i, on_j] = collision_force(pair, ps, 100, 3);
    EXPECT_NEAR(on_j.z, 100 * 0.1 + 3 * 2, 1e-12);
    ps[1].velocity = {0, 0, 2};
    EXPECT_NEAR(collision_force(pair, ps, 100, 3).second.z, 100 * 0.1 - 3 * 2, 1e-12);
}

TEST(Boundary, ClampsAndReflectsOutwardVelocity) {
    const Aabb box{{0, 0, 0}, {1, 1, 1}};
    Particle p = make_particle({0.05, 0.5, 0.98}, 0.1);
    p.velocity = {-2, 3, 4};
    const Particle q = apply_boundary(p, box, 0.5);
    EXPECT_EQ(q.center, (Vec3{0.1, 0.5, 0.9}));
    EXPECT_EQ(q.velocity, (Vec3{1, 3, -2}));
}

TEST(Boundary, InwardVelocityKept) {
    const Aabb box{{0, 0, 0}, {1, 1, 1}};
    Particle p = make_particle({0.05, 0.5, 0.5}, 0.1);
    p.velocity = {2, 0, 0};
    const Particle q = apply_boundary(p, box, 0.5);
    EXPECT_EQ(q.center.x, 0.1);
    EXPECT_EQ(q.velocity.x, 2);
}

TEST(Integrate, SemiImplicitEuler) {
    Particle p = make_particle({0, 0, 1}, 0.1);
    p.velocity = {1, 0, 0};
    p.force = {0, 0, p.mass * 2};
    const Particle q = integrate(p, {0, 0, -10}, 0.5);
    EXPECT_EQ(q.velocity, (Vec3{1, 0, -4}));
    // position uses the updated velocity
    EXPECT_EQ(q.center, (Vec3{0.5, 0, -1}));
    EXPECT_EQ(q.force, (Vec3{}));
}

TEST(Gravity, RotatingStartsDownAndTurnsTowardX) {
    const GravityMode g = RotatingGravity{};
    const Vec3 g0 = gravity_at(g, 0);
    EXPECT_EQ(g0, (Vec3{0, 0, -9.8}));
    const Vec3 g2 = gravity_at(g, 2);  // quarter turn at 0.25 pi rad/s
    EXPECT_NEAR(g2.x, 9.8, 1e-12);
    EXPECT_NEAR(g2.z, 0, 1e-12);
    for (real t : {0.3, 1.7, 5.5}) EXPECT_NEAR(norm(gravity_at(g, t)), 9.8, 1e-12);
    EXPECT_EQ(gravity_at(ConstantGravity{}, 123), (Vec3{0, 0, -9.8}));
}

TEST(Validate, DefaultSceneAndConfigAreStable) {
    const auto ps = generate(SceneSpec{});
    EXPECT_NO_THROW(validate(SimConfig{}, ps));
}

TEST(Validate, RejectsUnstableTimestep) {
    const std::vector<Particle> ps{make_particle({0.5, 0.5, 0.5}, 0.01)};
    SimConfig c;
    c.damping = 0;
    c.dt = 2 * std::sqrt(ps[0].mass / c.stiffness);
    EXPECT_THROW(validate(c, ps), ConfigError);
    c.dt *= 0.99;
    EXPECT_NO_THROW(validate(c, ps));
}

TEST(Validate, RejectsOverdampedStep) {
    const std::vector<Particle> ps{make_particle({0.5, 0.5, 0.5}, 0.01)};
    SimConfig c;
    c.dt = 1e-4;
    c.damping = 1.01 * ps[0].mass / c.dt;
    EXPECT_THROW(validate(c, ps), ConfigError);
}

TEST(Validate, RejectsBadInputs) {
    const std::vector<Particle> ps{make_particle({0.5, 0.5, 0.5}, 0.01)};
    SimConfig c;
    c.dt = 0;
    EXPECT_THROW(validate(c, ps), ConfigError);
    c = {};
    c.restitution = 1.5;
    EXPECT_THROW(validate(c, ps), ConfigError);
    c = {};
    EXPECT_THROW(validate(c, std::vector<Particle>{}), ConfigError);
    EXPECT_THROW(validate(c, std::vector<Particle>{make_particle({2, 0.5, 0.5}, 0.01)}), ConfigError);
    c.box = {{0, 0, 0}, {0.01, 1, 1}};
    EXPECT_THROW(validate(c, ps), ConfigError);
}

TEST(Step, HeadOnPairConservesMomentum) {
    std::vector<Particle> ps{make_particle({0, 0, 0}, 0.1), make_particle({0.25, 0, 0}, 0.1)};
    ps[0].velocity = {1, 0, 0};
    ps[1].velocity = {-1, 0, 0};
    const SimConfig c = free_space_config();
    SimState s = make_state(ps, c);
    std::size_t contacts = 0;
    for (int k = 0; k < 2000; ++k) contacts += step(s, c).pairs;
    EXPECT_GT(contacts, 0u);
    const Vec3 p = total_momentum(s.particles);
    EXPECT_NEAR(p.x, 0, 1e-12);
    // bounced apart
    EXPECT_LT(s.particles[0].velocity.x, 0);
    EXPECT_GT(s.particles[1].velocity.x, 0);
    EXPECT_EQ(s.iteration, 2000u);
    EXPECT_DOUBLE_EQ(s.time, 2000 * c.dt);
}

TEST(Step, ElasticContactConservesEnergyApproximately) {
    std::vector<Particle> ps{make_particle({0, 0, 0}, 0.1), make_particle({0.21, 0, 0}, 0.1)};
    ps[0].velocity = {0.5, 0, 0};
    ps[1].velocity = {-0.5, 0, 0};
    const SimConfig c = free_space_config();
    SimState s = make_state(ps, c);
    const real e0 = kinetic_energy(s.particles);
    for (int k = 0; k < 3000; ++k) step(s, c);
    EXPECT_NEAR(kinetic_energy(s.particles), e0, e0 * 0.02);
}

TEST(Step, DetectorsGiveIdenticalTrajectories) {
    SceneSpec spec;
    spec.count = 800;
    spec.placement = Placement::uniform_random;
    spec.radii_min = 0.01;
    spec.radii_max = 0.03;
    spec.box = {{0, 0, 0}, {0.4, 0.4, 0.4}};
    const auto ps = generate(spec);
    SimConfig c;
    c.box = spec.box;
    c.steps_per_frame = 50;
    std::vector<std::vector<Particle>> finals;
    for (const Detector d : {Detector::mochi, Detector::fixed_radius, Detector::brute}) {
        c.detector = d;
        SimState s = make_state(ps, c);
        for (int k = 0; k < 50; ++k) step(s, c);
        finals.push_back(s.particles);
    }
    EXPECT_EQ(finals[0], finals[1]);
    EXPECT_EQ(finals[0], finals[2]);
}

TEST(Step, RebuildAndRefitGiveIdenticalTrajectories) {
    SceneSpec spec;
    spec.count = 600;
    spec.placement = Placement::uniform_random;
    spec.box = {{0, 0, 0}, {0.3, 0.3, 0.3}};
    const auto ps = generate(spec);
    SimConfig c;
    c.box = spec.box;
    c.gravity = RotatingGravity{};
    std::vector<std::vector<Particle>> finals;
    for (const std::size_t every : {0u, 1u, 7u}) {
        c.rebuild_every = every;
        SimState s = make_state(ps, c);
        for (int k = 0; k < 60; ++k) {
            const StepRecord rec = step(s, c);
            EXPECT_EQ(rec.rebuilt, every > 0 && k % every == 0);
        }
        finals.push_back(s.particles);
    }
    EXPECT_EQ(finals[0], finals[1]);
    EXPECT_EQ(finals[0], finals[2]);
}

TEST(Step, ThreadCountDoesNotChangeTrajectory) {
    SceneSpec spec;
    spec.count = 1000;
    spec.box = {{0, 0, 0}, {0.35, 0.35, 0.35}};
    spec.placement = Placement::uniform_random;
    const auto ps = generate(spec);
    SimConfig c;
    c.box = spec.box;
    SimState one = make_state(ps, c);
    SimConfig c4 = c;
    c4.threads = 4;
    SimState four = make_state(ps, c4);
    for (int k = 0; k < 40; ++k) {
        step(one, c);
        step(four, c4);
    }
    EXPECT_EQ(one.particles, four.particles);
}

TEST(Run, ReportsEveryStepAndFrame) {
    SceneSpec spec;
    spec.count = 200;
    const auto ps = generate(spec);
    SimConfig c;
    c.steps_per_frame = 7;
    c.frames = 3;
    std::size_t frames = 0;
    std::size_t steps = 0;
    SimObserver obs;
    obs.on_step = [&](const SimState&, const StepRecord&) { ++steps; };
    obs.on_frame = [&](std::size_t f, const SimState& s) {
        EXPECT_EQ(f, frames);
        EXPECT_EQ(s.iteration, (f + 1) * 7);
        ++frames;
    };
    const SimReport r = run(c, ps, obs);
    EXPECT_EQ(r.steps.size(), 21u);
    EXPECT_EQ(steps, 21u);
    EXPECT_EQ(frames, 3u);
    for (std::size_t k = 0; k < r.steps.size(); ++k) EXPECT_EQ(r.steps[k].iteration, k);
}

TEST(Run, ParticlesStayInsideTheBox) {
    SceneSpec spec;
    spec.count = 1500;
    const auto ps = generate(spec);
    SimConfig c;
    c.steps_per_frame = 300;
    c.gravity = RotatingGravity{9.8, 5.0};
    SimObserver obs;
    obs.on_step = [&](const SimState& s, const StepRecord&) {
        for (const Particle& p : s.particles) {
            for (int k = 0; k < 3; ++k) {
                ASSERT_GE(p.center[k] - p.radius, c.box.min[k] - 1e-12);
                ASSERT_LE(p.center[k] + p.radius, c.box.max[k] + 1e-12);
            }
        }
    };
    run(c, ps, obs);
}
