#pragma once

// Statistics computed from trajectories: goodness of fit of the final
// population to a uniform law, growth of the frontier gap, the
// symmetric-difference ratio, extinction and A^eps summaries.

#include "gms/error.hpp"
#include "gms/process.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace gms {

struct KSResult {
    double statistic = 0.0;
    std::uint64_t sample_size = 0;
    double p_value = 1.0;
};

// P(K > lambda) for the Kolmogorov distribution, series truncated at
// relative error 1e-10.
inline double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    constexpr double kTol = 1e-10;
    if (lambda < 1.18) {
        // K(lambda) = sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2))
        const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int k = 1; k < 100; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(c * odd * odd);
            sum += term;
            if (term <= kTol * sum) break;
        }
        const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k < 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term <= kTol * std::fabs(sum)) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Two-sided KS distance between the empirical CDF of a sorted sample and
// U[lo, hi]. Points outside [lo, hi] hit the clamped CDF (0 or 1).
inline KSResult ks_against_uniform(std::span<const double> sorted, double lo, double hi) {
    if (sorted.empty()) throw EmptySample();
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw BadInterval("need finite lo < hi");
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = std::clamp((sorted[i] - lo) / (hi - lo), 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    d = std::clamp(d, 0.0, 1.0);
    return KSResult{d, sorted.size(), kolmogorov_survival(std::sqrt(n) * d)};
}

struct GapFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::uint64_t n_min = 0;
    std::size_t points = 0;
};

inline constexpr std::uint64_t kDefaultGapNMin = 1024;
inline constexpr std::size_t kMinGapPoints = 5;

// Least-squares slope of log(gap + 1) on log n over points with n >= n_min.
inline GapFit gap_exponent(std::span<const std::uint64_t> ns, std::span<const std::uint64_t> gaps,
                           std::uint64_t n_min = kDefaultGapNMin) {
    if (ns.size() != gaps.size()) throw InvalidParameter("gaps", "length differs from n");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < n_min || ns[i] == 0) continue;
        xs.push_back(std::log(static_cast<double>(ns[i])));
        ys.push_back(std::log(static_cast<double>(gaps[i]) + 1.0));
    }
    if (xs.size() < kMinGapPoints)
        throw TooFewCheckpoints("need at least 5 checkpoints with n >= " + std::to_string(n_min) + ", have " +
                                std::to_string(xs.size()));
    const double m = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw TooFewCheckpoints("checkpoints must span more than one n");
    GapFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    fit.r_squared = syy <= 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    fit.n_min = n_min;
    fit.points = xs.size();
    return fit;
}

inline GapFit gap_exponent(const Trajectory& traj, std::uint64_t n_min = kDefaultGapNMin) {
    std::vector<std::uint64_t> ns, gaps;
    for (const auto& c : traj.checkpoints) {
        ns.push_back(c.n);
        gaps.push_back(c.gap());
    }
    return gap_exponent(ns, gaps, n_min);
}

struct SymDiffPoint {
    std::uint64_t n = 0;
    double ratio = 0.0;
};

// (|L_n| + |R'_n| - |R_n|) / |R'_n| at each checkpoint with |R'_n| > 0.
inline std::vector<SymDiffPoint> sym_diff_ratio(const Trajectory& traj) {
    std::vector<SymDiffPoint> out;
    for (const auto& c : traj.checkpoints) {
        if (c.rprime == 0) continue;
        out.push_back({c.n, static_cast<double>(c.sym_diff) / static_cast<double>(c.rprime)});
    }
    return out;
}

struct ExtinctionSummary {
    std::uint64_t count = 0;
    std::optional<std::uint64_t> first;
    std::optional<std::uint64_t> last;
    // Largest of first - 0 and the differences of consecutive extinctions.
    std::optional<std::uint64_t> max_gap;
};

inline ExtinctionSummary extinction_summary(const Trajectory& traj) {
    ExtinctionSummary s;
    const auto& t = traj.extinction_times;
    s.count = t.size();
    if (t.empty()) return s;
    s.first = t.front();
    s.last = t.back();
    std::uint64_t gap = t.front();
    for (std::size_t i = 1; i < t.size(); ++i) gap = std::max(gap, t[i] - t[i - 1]);
    s.max_gap = gap;
    return s;
}

struct AEpsSummary {
    std::uint64_t count = 0;
    std::optional<std::uint64_t> last;
};

inline AEpsSummary a_eps_summary(const Trajectory& traj) {
    if (!traj.frontier_defined)
        throw InvalidParameter("trajectory", "A^eps is tracked only when the frontier is defined");
    AEpsSummary s;
    s.count = traj.a_eps_times.size();
    if (!traj.a_eps_times.empty()) s.last = traj.a_eps_times.back();
    return s;
}

// Middle value; mean of the two middle values for even sizes.
inline double median(std::vector<double> v) {
    if (v.empty()) throw EmptySample();
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace gms
