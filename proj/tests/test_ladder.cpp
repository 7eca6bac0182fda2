#include "gms/ladder.hpp"
#include "gms/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using gms::IntegerLaw;
using gms::WalkKind;
using gms::WalkSpec;

namespace {

WalkSpec gms_walk() {
    WalkSpec spec;
    spec.kind = WalkKind::FrontierThinned;
    spec.p = 0.75;
    spec.f = 1.0 / 3.0;
    spec.law_z = IntegerLaw::constant(1);
    spec.law_x = IntegerLaw::constant(1);
    return spec;
}

WalkSpec total_walk(double p) {
    WalkSpec spec;
    spec.kind = WalkKind::TotalPopulation;
    spec.p = p;
    spec.law_z = IntegerLaw::shifted_poisson(1.0);
    spec.law_x = IntegerLaw::uniform_range(1, 3);
    return spec;
}

gms::WalkRng walk_rng(std::uint64_t i) {
    return gms::WalkRng::from(gms::RngStream::make(17, i, gms::Lane::Walk));
}

}  // namespace

TEST(Increment, ForcedOutcomes) {
    WalkSpec spec = gms_walk();
    spec.f = 1.0;
    spec.law_z = IntegerLaw::constant(2);
    spec.law_x = IntegerLaw::constant(3);
    auto rng = walk_rng(0);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(gms::sample_birth_increment(spec, rng), 2);
    EXPECT_EQ(gms::sample_death_increment(spec, rng), -3);
}

TEST(Increment, ZeroMeanAtFrontier) {
    WalkSpec spec;
    spec.p = 0.6;
    spec.law_z = IntegerLaw::shifted_poisson(1.0);
    spec.law_x = IntegerLaw::uniform_range(1, 3);
    spec.f = gms::frontier_f(spec.p, spec.law_x.mean(), spec.law_z.mean());
    EXPECT_NEAR(spec.drift(), 0.0, 1e-12);
    auto rng = walk_rng(1);
    const int n = 10'000'000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = static_cast<double>(gms::sample_increment(spec, rng));
        sum += w;
        sum2 += w * w;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    EXPECT_NEAR(mean, 0.0, 4.0 * sd / std::sqrt(n));
}

TEST(Tau, NegativeFirstStepGivesOne) {
    const auto spec = total_walk(0.5);
    int seen = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        auto probe = walk_rng(i);
        auto run = walk_rng(i);
        const auto first = gms::sample_increment(spec, probe);
        const auto tau = gms::sample_tau(spec, run, 1000);
        if (first <= 0) {
            EXPECT_EQ(tau.steps, 1u);
            ++seen;
        } else {
            EXPECT_GT(tau.steps, 1u);
        }
    }
    EXPECT_GT(seen, 50);
}

TEST(Tau, ThinnedWalkNeedsStrictCrossing) {
    WalkSpec spec = gms_walk();
    spec.f = 1.0;
    auto rng = walk_rng(2);
    std::int64_t sum = 0;
    std::uint64_t j = 0;
    auto replay = walk_rng(2);
    const auto tau = gms::sample_tau(spec, replay, 100);
    do {
        sum += gms::sample_increment(spec, rng);
        ++j;
    } while (sum >= 0 && j < 100);
    EXPECT_EQ(tau.steps, j);
}

TEST(Tau, SubcriticalTotalWalkRarelyCensored) {
    const auto taus = gms::sample_taus(total_walk(0.3), 10000, 100000, 3);
    int censored = 0;
    for (const auto& t : taus) censored += t.censored;
    EXPECT_LT(censored, 100);
}

TEST(Tau, SupercriticalTotalWalkOftenCensored) {
    const auto taus = gms::sample_taus(total_walk(0.6), 10000, 10000, 4);
    int censored = 0;
    for (const auto& t : taus) censored += t.censored;
    EXPECT_GT(censored, 1000);
}

TEST(TauTail, FirstRowIsOneAndTailIsMonotone) {
    const auto rows = gms::tau_tail_table(gms_walk(), 200, 20000, 5);
    ASSERT_EQ(rows.size(), 200u);
    EXPECT_EQ(rows.front().estimate, 1.0);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].estimate, rows[i - 1].estimate);
    EXPECT_DOUBLE_EQ(rows[99].asymptote, 1.0 / std::sqrt(100.0 * std::numbers::pi));
}

// The lazy +-1 walk has P(S_k = 0) = C(2k,k)/4^k, so the strict ladder
// tail is exp(sum_k P(S_k = 0) / 2k) / sqrt(pi n) = 2 / sqrt(pi n), twice
// the continuous-law value.
TEST(TauTail, LatticeConstantAtHundred) {
    // exact P(tau >= 100) by propagating the surviving position law
    std::vector<double> alive{1.0};
    for (int k = 1; k < 100; ++k) {
        std::vector<double> next(alive.size() + 1, 0.0);
        for (std::size_t s = 0; s < alive.size(); ++s) {
            if (s >= 1) next[s - 1] += 0.25 * alive[s];
            next[s] += 0.5 * alive[s];
            next[s + 1] += 0.25 * alive[s];
        }
        alive.swap(next);
    }
    double exact = 0.0;
    for (double v : alive) exact += v;
    EXPECT_NEAR(exact * std::sqrt(100.0 * std::numbers::pi), 2.0, 0.01);

    const auto est = gms::tau_tail_estimate(gms_walk(), 100, 100000, 6);
    EXPECT_NEAR(est.estimate, exact, 4.0 * est.std_error);
    EXPECT_NEAR(est.estimate, 2.0 * gms::ladder_tail_asymptote(100), 0.02 * est.estimate + 4.0 * est.std_error);
}

TEST(TauTail, RequiresZeroDrift) {
    auto spec = gms_walk();
    spec.f = 0.5;
    EXPECT_THROW(gms::tau_tail_estimate(spec, 10, 100, 1), gms::DriftNotZero);
    spec.f = 0.0;
    EXPECT_THROW(spec.validate(), gms::InvalidParameter);
}

TEST(TauTail, ThreadCountDoesNotMatter) {
    const auto a = gms::sample_taus(gms_walk(), 10000, 500, 7, 1);
    const auto b = gms::sample_taus(gms_walk(), 10000, 500, 7, 4);
    EXPECT_EQ(a, b);
}
