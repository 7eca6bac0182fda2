#include "gms/distributions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using gms::IntegerLaw;
using gms::LawKind;
using gms::RngStream;

namespace {

// sum_{k>=1} k^{-s} by partial sum up to N plus the integral midpoint of the
// remainder, which lies in [(N+1)^{1-s}, N^{1-s}] / (s-1).
struct SeriesValue {
    long double value;
    long double half_width;
};

SeriesValue zeta_series(long double s, std::uint64_t N = 2'000'000) {
    long double sum = 0.0L;
    for (std::uint64_t k = N; k >= 1; --k) sum += std::pow(static_cast<long double>(k), -s);
    const long double lo = std::pow(static_cast<long double>(N + 1), 1.0L - s) / (s - 1.0L);
    const long double hi = std::pow(static_cast<long double>(N), 1.0L - s) / (s - 1.0L);
    return {sum + 0.5L * (lo + hi), 0.5L * (hi - lo)};
}

}  // namespace

TEST(Law, ConstantHasZeroVariance) {
    const auto law = gms::make_law(LawKind::Constant, {1});
    EXPECT_EQ(law.mean(), 1.0);
    EXPECT_EQ(law.variance(), 0.0);
}

TEST(Law, ZetaBelowTwoHasInfiniteMean) {
    EXPECT_TRUE(std::isinf(gms::make_law(LawKind::Zeta, {1.5}).mean()));
}

TEST(Law, InvalidParametersThrow) {
    EXPECT_THROW(gms::make_law(LawKind::Geometric, {1.5}), gms::InvalidParameter);
    EXPECT_THROW(IntegerLaw::constant(0), gms::InvalidParameter);
    EXPECT_THROW(IntegerLaw::uniform_range(3, 2), gms::InvalidParameter);
    EXPECT_THROW(IntegerLaw::zeta(1.0), gms::InvalidParameter);
    EXPECT_THROW(IntegerLaw::shifted_poisson(0.0), gms::InvalidParameter);
    EXPECT_THROW(gms::make_law(LawKind::Constant, {1.5}), gms::InvalidParameter);
    EXPECT_THROW(gms::make_law(LawKind::UniformRange, {1}), gms::InvalidParameter);
    try {
        gms::make_law(LawKind::Geometric, {1.5});
    } catch (const gms::InvalidParameter& e) {
        EXPECT_EQ(e.field(), "r");
    }
}

TEST(Law, ParseRoundTrip) {
    for (const char* text : {"const:3", "unif:1:3", "geom:0.25", "pois1:1", "zeta:1.5"}) {
        const auto law = gms::parse_law(text);
        EXPECT_EQ(gms::parse_law(law.to_string()), law) << text;
    }
    EXPECT_EQ(gms::parse_law("unif:1:3"), IntegerLaw::uniform_range(1, 3));
    EXPECT_EQ(gms::parse_law("pois1:1.0"), IntegerLaw::shifted_poisson(1.0));
}

TEST(Law, ParseRejectsMalformed) {
    for (const char* text : {"", "const", "const:", "const:x", "unif:1", "zeta:abc", "gamma:2", "const:1:2",
                             "geom:0.5x"})
        EXPECT_THROW(gms::parse_law(text), gms::ConfigError) << text;
    EXPECT_THROW(gms::parse_law("geom:2"), gms::InvalidParameter);
    try {
        gms::parse_law("gamma:2");
    } catch (const gms::ParseError& e) {
        EXPECT_EQ(e.token(), "gamma");
    }
}

TEST(LawMean, ClosedForms) {
    EXPECT_EQ(IntegerLaw::constant(2).mean(), 2.0);
    EXPECT_EQ(IntegerLaw::shifted_poisson(1.0).mean(), 2.0);
    EXPECT_EQ(IntegerLaw::uniform_range(1, 3).mean(), 2.0);
    EXPECT_DOUBLE_EQ(IntegerLaw::geometric(0.25).mean(), 4.0);
}

TEST(LawMean, ZetaThreeAgainstSeries) {
    const auto z2 = zeta_series(2.0L);
    const auto z3 = zeta_series(3.0L);
    const long double expected = z2.value / z3.value;
    ASSERT_LT(z2.half_width, 1e-12L);
    EXPECT_NEAR(IntegerLaw::zeta(3.0).mean(), static_cast<double>(expected), 1e-10);
    EXPECT_NEAR(IntegerLaw::zeta(3.0).mean(), 1.368432, 1e-6);
}

TEST(LawMean, RiemannZetaAgainstSeries) {
    for (double s : {1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 7.5}) {
        const auto ref = zeta_series(s);
        EXPECT_NEAR(gms::detail::riemann_zeta(s), static_cast<double>(ref.value),
                    1e-11 * static_cast<double>(ref.value) + static_cast<double>(ref.half_width))
            << "s=" << s;
    }
}

TEST(LawSecondMoment, ClosedForms) {
    EXPECT_EQ(IntegerLaw::constant(2).second_moment(), 4.0);
    EXPECT_TRUE(std::isinf(IntegerLaw::zeta(2.5).second_moment()));
    EXPECT_NEAR(IntegerLaw::uniform_range(1, 3).second_moment(), 14.0 / 3.0, 1e-12);
    EXPECT_NEAR(IntegerLaw::shifted_poisson(1.0).second_moment(), 5.0, 1e-12);
}

TEST(LawSecondMoment, GeometricHalfAgainstBruteForce) {
    long double sum = 0.0L;
    for (int k = 1; k <= 200; ++k) sum += static_cast<long double>(k) * k * std::pow(0.5L, k);
    EXPECT_NEAR(static_cast<double>(sum), 6.0, 1e-15);
    EXPECT_NEAR(IntegerLaw::geometric(0.5).second_moment(), static_cast<double>(sum), 1e-12);
}

TEST(LawPmf, SumsToOne) {
    for (const auto& law : {IntegerLaw::uniform_range(2, 5), IntegerLaw::geometric(0.3),
                            IntegerLaw::shifted_poisson(2.5), IntegerLaw::zeta(4.0)}) {
        double total = 0.0;
        for (int k = 1; k <= 20000; ++k) total += law.pmf(k);
        EXPECT_NEAR(total, 1.0, 1e-9) << law.to_string();
    }
}

TEST(LawSample, ConstantIsDegenerate) {
    auto rng = RngStream::make(1, 0, gms::Lane::Birth);
    const auto law = IntegerLaw::constant(3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(law.sample(rng), 3u);
}

TEST(LawSample, UniformRangeFrequencies) {
    auto rng = RngStream::make(2, 0, gms::Lane::Birth);
    const auto law = IntegerLaw::uniform_range(1, 3);
    const int n = 1'000'000;
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < n; ++i) ++counts[law.sample(rng)];
    ASSERT_EQ(counts.size(), 3u);
    const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / n);
    for (auto [k, c] : counts) EXPECT_NEAR(c / double(n), 1.0 / 3.0, 3.0 * se) << k;
}

TEST(LawSample, ZetaTailAgainstPartialSum) {
    const double s = 1.5;
    const auto zeta_s = zeta_series(s);
    long double head = 0.0L;
    for (int k = 1; k < 100; ++k) head += std::pow(static_cast<long double>(k), -1.5L);
    const double tail = static_cast<double>(1.0L - head / zeta_s.value);

    auto rng = RngStream::make(3, 0, gms::Lane::Birth);
    const auto law = IntegerLaw::zeta(s);
    const int n = 1'000'000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += law.sample(rng) >= 100 ? 1 : 0;
    EXPECT_NEAR(hits / double(n), tail, 3.0 * std::sqrt(tail * (1 - tail) / n));
}

TEST(LawSample, MeansMatch) {
    auto rng = RngStream::make(4, 0, gms::Lane::Birth);
    for (const auto& law : {IntegerLaw::geometric(0.4), IntegerLaw::shifted_poisson(1.0),
                            IntegerLaw::shifted_poisson(45.0), IntegerLaw::zeta(4.0), IntegerLaw::uniform_range(1, 3)}) {
        const int n = 400000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += static_cast<double>(law.sample(rng));
        EXPECT_NEAR(sum / n, law.mean(), 4.0 * std::sqrt(law.variance() / n)) << law.to_string();
    }
}

TEST(LawSample, PoissonLargeLambdaPmf) {
    // PTRS branch against the exact pmf on the central cells.
    auto rng = RngStream::make(6, 0, gms::Lane::Birth);
    const auto law = IntegerLaw::shifted_poisson(50.0);
    const int n = 400000;
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < n; ++i) ++counts[law.sample(rng)];
    for (int k = 41; k <= 61; k += 4) {
        const double pk = law.pmf(k);
        EXPECT_NEAR(counts[k] / double(n), pk, 4.0 * std::sqrt(pk * (1 - pk) / n)) << k;
    }
}

TEST(Thin, EdgeCases) {
    auto rng = RngStream::make(7, 0, gms::Lane::Fitness);
    EXPECT_EQ(gms::binomial_thin(0, 0.4, rng), 0u);
    EXPECT_EQ(gms::binomial_thin(5, 1.0, rng), 5u);
    EXPECT_EQ(gms::binomial_thin(5, 0.0, rng), 0u);
    EXPECT_EQ(gms::binomial_thin(100000, 1.0, rng), 100000u);
}

TEST(Thin, MeanMatches) {
    auto rng = RngStream::make(8, 0, gms::Lane::Fitness);
    const int n = 1'000'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(gms::binomial_thin(10, 0.3, rng));
    EXPECT_NEAR(sum / n, 3.0, 3.0 * std::sqrt(10 * 0.3 * 0.7 / n));
    double big = 0.0;
    for (int i = 0; i < 2000; ++i) big += static_cast<double>(gms::binomial_thin(100000, 0.3, rng));
    EXPECT_NEAR(big / 2000, 30000.0, 4.0 * std::sqrt(100000 * 0.21 / 2000));
}
