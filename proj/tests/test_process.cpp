#include "gms/analysis.hpp"
#include "gms/process.hpp"

#include <gtest/gtest.h>

#include <vector>

using gms::IntegerLaw;
using gms::ModelConfig;

namespace {

ModelConfig supercritical(std::uint64_t horizon, std::uint64_t seed = 1) {
    ModelConfig cfg;
    cfg.p = 0.6;
    cfg.law_x = IntegerLaw::uniform_range(1, 3);
    cfg.law_z = IntegerLaw::shifted_poisson(1.0);
    cfg.horizon = horizon;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST(Resolve, FillsDefaults) {
    const auto rc = gms::resolve(supercritical(1000));
    EXPECT_TRUE(rc.frontier_defined);
    EXPECT_NEAR(rc.f, 2.0 / 3.0, 1e-15);
    ASSERT_TRUE(rc.config.bound_M);
    EXPECT_EQ(*rc.config.bound_M, 3u);
    EXPECT_EQ(rc.config.checkpoints.front(), 1u);
    EXPECT_EQ(rc.config.checkpoints.back(), 1000u);
    EXPECT_EQ(gms::geometric_checkpoints(8), (std::vector<std::uint64_t>{1, 2, 4, 8}));
    EXPECT_TRUE(gms::geometric_checkpoints(0).empty());
}

TEST(Resolve, RejectsBadConfigs) {
    auto cfg = supercritical(100);
    cfg.eps_track = 0.4;  // f + eps >= 1
    EXPECT_THROW(gms::resolve(cfg), gms::InvalidParameter);
    cfg = supercritical(100);
    cfg.checkpoints = {5, 3};
    EXPECT_THROW(gms::resolve(cfg), gms::InvalidParameter);
    cfg.checkpoints = {101};
    EXPECT_THROW(gms::resolve(cfg), gms::InvalidParameter);
    cfg = supercritical(100);
    cfg.bound_M = 2;
    EXPECT_THROW(gms::resolve(cfg), gms::InvalidParameter);
    cfg = supercritical(100);
    cfg.p = 1.0;
    EXPECT_THROW(gms::resolve(cfg), gms::InvalidParameter);
    cfg = supercritical(100);
    cfg.eps_track = -0.1;
    EXPECT_THROW(gms::resolve(cfg), gms::InvalidParameter);
}

TEST(Step, DeathOnEmptySystem) {
    gms::Simulation sim(gms::resolve(supercritical(10)));
    const auto out = sim.apply_death(3);
    EXPECT_EQ(out.removed, 0u);
    EXPECT_EQ(sim.size(), 0u);
    EXPECT_EQ(sim.trajectory().extinction_times, (std::vector<std::uint64_t>{1}));
}

TEST(Step, BirthCountsByThreshold) {
    gms::Simulation sim(gms::resolve(supercritical(10)));
    const std::vector<double> batch{0.1, 0.7, 0.95};
    sim.apply_birth(batch);
    EXPECT_EQ(sim.size(), 3u);
    EXPECT_EQ(sim.rprime(), 2u);
    EXPECT_EQ(sim.l(), 1u);
    EXPECT_EQ(sim.r(), 2u);
}

TEST(Step, DeathRemovesSmallest) {
    gms::Simulation sim(gms::resolve(supercritical(10)));
    const std::vector<double> batch{0.1, 0.2, 0.9};
    sim.apply_birth(batch);
    const auto r_before = sim.r();
    const auto l_before = sim.l();
    const auto out = sim.apply_death(2);
    EXPECT_EQ(out.removed, 2u);
    EXPECT_EQ(sim.size(), 1u);
    EXPECT_EQ(l_before - sim.l(), 2u);
    EXPECT_EQ(sim.r(), r_before);
    EXPECT_EQ(sim.population().snapshot_sorted(), (std::vector<double>{0.9}));
}

TEST(Step, AEpsFiresWhenBandEmptied) {
    auto cfg = supercritical(10);
    cfg.eps_track = 0.1;  // f + eps ~ 0.7667
    gms::Simulation sim(gms::resolve(cfg));
    const std::vector<double> batch{0.1, 0.72, 0.9};
    sim.apply_birth(batch);
    EXPECT_EQ(sim.l_eps(), 2u);
    sim.apply_death(1);
    EXPECT_TRUE(sim.trajectory().a_eps_times.empty());
    sim.apply_death(1);
    EXPECT_EQ(sim.trajectory().a_eps_times, (std::vector<std::uint64_t>{2}));
    EXPECT_THROW(sim.apply_birth(std::vector<double>{1.5}), gms::OutOfRangeFitness);
}

TEST(Run, ZeroHorizon) {
    const auto traj = gms::run(supercritical(0));
    EXPECT_TRUE(traj.checkpoints.empty());
    EXPECT_TRUE(traj.final_snapshot.empty());
    EXPECT_TRUE(traj.extinction_times.empty());
    EXPECT_TRUE(traj.a_eps_times.empty());
    EXPECT_EQ(traj.final_size, 0u);
}

TEST(Run, Deterministic) {
    const auto a = gms::run(supercritical(20000, 42));
    const auto b = gms::run(supercritical(20000, 42));
    EXPECT_EQ(a, b);
    const auto c = gms::run(supercritical(20000, 43));
    EXPECT_NE(a.final_snapshot, c.final_snapshot);
}

TEST(Run, CheckpointFieldsConsistent) {
    const auto traj = gms::run(supercritical(50000, 3));
    ASSERT_FALSE(traj.checkpoints.empty());
    for (const auto& c : traj.checkpoints) {
        EXPECT_EQ(c.l + c.r, c.size);
        EXPECT_GE(c.rprime, c.r);
        EXPECT_EQ(c.sym_diff, c.l + c.gap());
        ASSERT_TRUE(c.t_bad);
        EXPECT_LE(*c.t_bad, c.n);
        EXPECT_LE(c.gap(), 3 * *c.t_bad);
    }
    EXPECT_TRUE(traj.gap_invariant_ok);
    EXPECT_EQ(traj.final_size, traj.final_snapshot.size());
    EXPECT_EQ(traj.final_size, traj.checkpoints.back().size);
}

TEST(Run, SnapshotNearUniformAboveFrontier) {
    const auto traj = gms::run(supercritical(100000, 5));
    const auto ks = gms::ks_against_uniform(traj.final_snapshot, 2.0 / 3.0, 1.0);
    EXPECT_LT(ks.statistic, 0.05);
}

TEST(Run, NoFrontierLeavesBadTimeUntracked) {
    auto cfg = supercritical(5000);
    cfg.p = 0.3;
    const auto traj = gms::run(cfg);
    EXPECT_FALSE(traj.frontier_defined);
    EXPECT_TRUE(traj.a_eps_times.empty());
    for (const auto& c : traj.checkpoints) {
        EXPECT_FALSE(c.t_bad);
        EXPECT_EQ(c.l, 0u);
        EXPECT_EQ(c.r, c.size);
    }
    EXPECT_FALSE(traj.extinction_times.empty());
}

TEST(Run, SnapshotSubsampledAboveLimit) {
    auto cfg = supercritical(20000);
    cfg.snapshot_limit = 100;
    const auto traj = gms::run(cfg);
    EXPECT_TRUE(traj.snapshot_subsampled);
    EXPECT_EQ(traj.final_snapshot.size(), 100u);
    EXPECT_GT(traj.final_size, 100u);
}

// Forcing block storage of every batch changes the draws but not the law;
// the internal counter cross-checks throw on any drift.
TEST(Run, LazyBlocksAgreeInLaw) {
    const int reps = 40;
    double size_lazy = 0.0, size_plain = 0.0, l_lazy = 0.0, l_plain = 0.0;
    for (int i = 0; i < reps; ++i) {
        auto cfg = supercritical(20000, 100 + i);
        const auto plain = gms::run(cfg);
        cfg.lazy_threshold = 1;
        const auto lazy = gms::run(cfg);
        size_lazy += static_cast<double>(lazy.final_size);
        size_plain += static_cast<double>(plain.final_size);
        l_lazy += static_cast<double>(lazy.checkpoints.back().l);
        l_plain += static_cast<double>(plain.checkpoints.back().l);
        const auto ks = gms::ks_against_uniform(lazy.final_snapshot, 2.0 / 3.0, 1.0);
        EXPECT_LT(ks.statistic, 0.1);
    }
    // E|T_n| ~ 0.2 n = 4000 with sd ~ 0.7 sqrt(n)
    EXPECT_NEAR(size_lazy / reps, size_plain / reps, 4.0 * std::sqrt(2.0 * 0.5 * 20000 / reps));
    EXPECT_NEAR(l_lazy / reps, l_plain / reps, 40.0);
}

TEST(Run, InfiniteBirthMeanUsesBlocks) {
    ModelConfig cfg;
    cfg.p = 0.5;
    cfg.law_z = IntegerLaw::zeta(1.5);
    cfg.law_x = IntegerLaw::constant(2);
    cfg.horizon = 5000;
    cfg.seed = 8;
    cfg.snapshot_limit = 50000;
    const auto traj = gms::run(cfg);
    EXPECT_FALSE(traj.frontier_defined);
    const auto ks = gms::ks_against_uniform(traj.final_snapshot, 0.0, 1.0);
    EXPECT_LT(ks.statistic, 0.05);
}

TEST(Ensemble, SingleReplicationMatchesRun) {
    const auto cfg = supercritical(5000, 9);
    const auto ens = gms::run_ensemble(cfg, 1, 1);
    ASSERT_EQ(ens.size(), 1u);
    EXPECT_EQ(ens[0], gms::run(cfg, 0));
}

TEST(Ensemble, ThreadCountDoesNotMatter) {
    const auto cfg = supercritical(5000, 10);
    EXPECT_EQ(gms::run_ensemble(cfg, 8, 1), gms::run_ensemble(cfg, 8, 8));
    EXPECT_THROW(gms::run_ensemble(cfg, 0, 1), gms::InvalidParameter);
}

TEST(Ensemble, ParallelMapPropagatesErrors) {
    auto job = [](std::uint64_t i) -> int {
        if (i == 5) throw std::runtime_error("boom");
        return static_cast<int>(i);
    };
    EXPECT_THROW(gms::parallel_map<int>(10, 4, job), std::runtime_error);
}

// Strong law for the births above the frontier: |R'_n|/n -> p mu_Z (1-f).
TEST(Ensemble, BornAboveFrontierRate) {
    auto cfg = supercritical(1'000'000, 11);
    cfg.checkpoints = {1'000'000};
    const auto ens = gms::run_ensemble(cfg, 50);
    const double expected = 0.6 * 2.0 * (1.0 / 3.0);
    double mean = 0.0;
    for (const auto& t : ens) {
        const double rate = static_cast<double>(t.checkpoints.back().rprime) / 1e6;
        EXPECT_NEAR(rate, expected, 0.01);
        mean += rate / 50.0;
    }
    EXPECT_NEAR(mean, expected, 0.002);
}
