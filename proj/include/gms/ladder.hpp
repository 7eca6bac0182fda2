#pragma once

// Auxiliary increment walks and their first-passage time tau.
//
// FrontierThinned: W = Binomial(Z, f) w.p. p, -X w.p. q; tau is the first
//   j >= 1 with W_1 + ... + W_j < 0.
// TotalPopulation: W = Z w.p. p, -X w.p. q; tau is the first j >= 1 with
//   W_1 + ... + W_j <= 0.
// The strict/non-strict crossing differs on the lattice, so both are kept.

#include "gms/distributions.hpp"
#include "gms/error.hpp"
#include "gms/process.hpp"
#include "gms/rng.hpp"
#include "gms/theory.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace gms {

enum class WalkKind { FrontierThinned, TotalPopulation };

struct WalkSpec {
    WalkKind kind = WalkKind::FrontierThinned;
    double p = 0.5;
    double f = 0.5;  // FrontierThinned only
    IntegerLaw law_z;
    IntegerLaw law_x;

    void validate() const {
        if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("p", "must lie in (0,1)");
        if (kind == WalkKind::FrontierThinned && !(f > 0.0 && f < 1.0))
            throw InvalidParameter("f", "thinned walk needs f in (0,1)");
    }

    // Mean increment; +-inf or NaN when a mean is infinite.
    double drift() const {
        if (kind == WalkKind::FrontierThinned) return w_increment_mean(p, f, law_z.mean(), law_x.mean());
        return p * law_z.mean() - (1.0 - p) * law_x.mean();
    }
};

// Per-walk draw sources.
struct WalkRng {
    RngStream event;
    RngStream birth;
    RngStream death;
    RngStream thin;

    static WalkRng from(const RngStream& base) {
        return WalkRng{base.split(0), base.split(1), base.split(2), base.split(3)};
    }
};

inline std::int64_t sample_birth_increment(const WalkSpec& spec, WalkRng& rng) {
    const std::uint64_t z = spec.law_z.sample(rng.birth);
    if (spec.kind == WalkKind::TotalPopulation) return static_cast<std::int64_t>(z);
    return static_cast<std::int64_t>(binomial_thin(z, spec.f, rng.thin));
}

inline std::int64_t sample_death_increment(const WalkSpec& spec, WalkRng& rng) {
    return -static_cast<std::int64_t>(spec.law_x.sample(rng.death));
}

inline std::int64_t sample_increment(const WalkSpec& spec, WalkRng& rng) {
    if (rng.event.bernoulli(spec.p)) return sample_birth_increment(spec, rng);
    return sample_death_increment(spec, rng);
}

struct TauSample {
    std::uint64_t steps = 0;  // tau, or the cap when censored
    bool censored = false;

    friend bool operator==(const TauSample&, const TauSample&) = default;
};

inline TauSample sample_tau(const WalkSpec& spec, WalkRng& rng, std::uint64_t cap) {
    if (cap == 0) throw InvalidParameter("cap", "must be >= 1");
    const bool strict = spec.kind == WalkKind::FrontierThinned;
    __int128 sum = 0;
    for (std::uint64_t j = 1; j <= cap; ++j) {
        sum += sample_increment(spec, rng);
        if (strict ? sum < 0 : sum <= 0) return TauSample{j, false};
    }
    return TauSample{cap, true};
}

struct TailEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

struct TauTailRow {
    std::uint64_t n = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double asymptote = 0.0;
    double ratio = 0.0;  // estimate / asymptote
};

// tau for walks 0..walks-1; walk i uses the stream derived from (seed, i).
inline std::vector<TauSample> sample_taus(const WalkSpec& spec, std::uint64_t walks, std::uint64_t cap,
                                          std::uint64_t seed, unsigned threads = 1) {
    spec.validate();
    if (walks == 0) throw InvalidParameter("walks", "must be >= 1");
    constexpr std::uint64_t kChunk = 4096;
    const std::uint64_t chunks = (walks + kChunk - 1) / kChunk;
    auto parts = parallel_map<std::vector<TauSample>>(chunks, threads, [&](std::uint64_t c) {
        std::vector<TauSample> out;
        const std::uint64_t end = std::min(walks, (c + 1) * kChunk);
        for (std::uint64_t i = c * kChunk; i < end; ++i) {
            WalkRng rng = WalkRng::from(RngStream::make(seed, i, Lane::Walk));
            out.push_back(sample_tau(spec, rng, cap));
        }
        return out;
    });
    std::vector<TauSample> all;
    all.reserve(walks);
    for (auto& part : parts) all.insert(all.end(), part.begin(), part.end());
    return all;
}

// Estimates of P(tau >= n) for n = 1..n_max from one shared set of walks,
// each censored at n_max; non-increasing in n by construction.
inline std::vector<TauTailRow> tau_tail_table(const WalkSpec& spec, std::uint64_t n_max, std::uint64_t walks,
                                              std::uint64_t seed, unsigned threads = 1) {
    if (n_max == 0) throw InvalidParameter("n_max", "must be >= 1");
    const auto taus = sample_taus(spec, walks, n_max, seed, threads);
    // ended_at[k] = #walks with tau == k; slot n_max + 1 holds censored walks
    std::vector<std::uint64_t> ended_at(n_max + 2, 0);
    for (const auto& t : taus) ++ended_at[t.censored ? n_max + 1 : t.steps];
    std::vector<TauTailRow> rows;
    std::uint64_t alive = walks;
    const double w = static_cast<double>(walks);
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        if (n >= 2) alive -= ended_at[n - 1];
        TauTailRow row;
        row.n = n;
        row.estimate = static_cast<double>(alive) / w;
        row.std_error = std::sqrt(row.estimate * (1.0 - row.estimate) / w);
        row.asymptote = ladder_tail_asymptote(n);
        row.ratio = row.estimate / row.asymptote;
        rows.push_back(row);
    }
    return rows;
}

inline void require_zero_drift(const WalkSpec& spec) {
    const double d = spec.drift();
    if (!(std::fabs(d) <= 1e-9))
        throw DriftNotZero("increment mean " + detail::format_real(d) + " is not zero");
}

// Monte Carlo P(tau >= n) with binomial standard error; the walk must sit
// at zero drift.
inline TailEstimate tau_tail_estimate(const WalkSpec& spec, std::uint64_t n, std::uint64_t walks,
                                      std::uint64_t seed, unsigned threads = 1) {
    spec.validate();
    require_zero_drift(spec);
    const auto rows = tau_tail_table(spec, n, walks, seed, threads);
    return TailEstimate{rows.back().estimate, rows.back().std_error};
}

}  // namespace gms
