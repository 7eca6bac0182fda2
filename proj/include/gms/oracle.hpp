#pragma once

// Naive reference implementations used to check the fast engine and to
// produce exact expected values.
//
// NaivePopulation keeps an unsorted list and sorts it on every removal.
// naive_run replays the dynamics on it, drawing from the same stream lanes
// as Simulation, and recomputes every tracked count by scanning. It stores
// every batch explicitly, so it agrees with the engine only when
// ModelConfig::lazy_threshold exceeds every birth batch.

#include "gms/distributions.hpp"
#include "gms/error.hpp"
#include "gms/ladder.hpp"
#include "gms/process.hpp"
#include "gms/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace gms {

class NaivePopulation {
public:
    std::uint64_t size() const noexcept { return items_.size(); }

    void insert(double fitness) {
        if (!(fitness >= 0.0 && fitness <= 1.0)) throw OutOfRangeFitness(fitness);
        items_.emplace_back(fitness, next_index_++);
    }

    std::uint64_t remove_k_smallest(std::uint64_t k) {
        std::sort(items_.begin(), items_.end());
        const std::uint64_t removed = std::min<std::uint64_t>(k, items_.size());
        items_.erase(items_.begin(), items_.begin() + static_cast<std::ptrdiff_t>(removed));
        return removed;
    }

    std::uint64_t count_below(double x) const {
        return static_cast<std::uint64_t>(
            std::count_if(items_.begin(), items_.end(), [x](const auto& it) { return it.first < x; }));
    }

    std::vector<double> sorted() const {
        auto copy = items_;
        std::sort(copy.begin(), copy.end());
        std::vector<double> out;
        out.reserve(copy.size());
        for (const auto& it : copy) out.push_back(it.first);
        return out;
    }

private:
    std::vector<std::pair<double, std::uint64_t>> items_;
    std::uint64_t next_index_ = 0;
};

inline Trajectory naive_run(const ModelConfig& input, std::uint64_t replication = 0) {
    const ResolvedConfig rc = resolve(input);
    const ModelConfig& cfg = rc.config;
    const bool frontier = rc.frontier_defined;
    const double f = rc.f;
    const double f_eps = rc.f + cfg.eps_track;
    const bool track_bad = frontier && cfg.bound_M.has_value();
    const std::uint64_t M = cfg.bound_M.value_or(0);

    RngStream event = RngStream::make(cfg.seed, replication, Lane::Event);
    RngStream birth = RngStream::make(cfg.seed, replication, Lane::Birth);
    RngStream death = RngStream::make(cfg.seed, replication, Lane::Death);
    RngStream fitness = RngStream::make(cfg.seed, replication, Lane::Fitness);
    RngStream sampler = RngStream::make(cfg.seed, replication, Lane::Reveal).split(1);

    Trajectory traj;
    traj.frontier_defined = frontier;
    traj.f = f;
    traj.eps = cfg.eps_track;
    traj.horizon = cfg.horizon;
    if (frontier) traj.bound_M = cfg.bound_M;

    NaivePopulation pop;
    std::uint64_t born_above = 0;  // R'
    std::uint64_t bad = 0;
    std::size_t next_cp = 0;
    std::uint64_t l = 0;

    for (std::uint64_t n = 0; n < cfg.horizon; ++n) {
        const std::uint64_t l_before = l;
        const std::uint64_t gap_before = born_above - (pop.size() - l_before);
        if (event.uniform() < cfg.p) {
            const std::uint64_t z = cfg.law_z.sample(birth);
            for (std::uint64_t i = 0; i < z; ++i) {
                const double v = fitness.uniform();
                pop.insert(v);
                if (!frontier || v >= f) ++born_above;
            }
        } else {
            const std::uint64_t x = cfg.law_x.sample(death);
            pop.remove_k_smallest(x);
            if (frontier && pop.count_below(f_eps) == 0) traj.a_eps_times.push_back(n);
        }
        l = frontier ? pop.count_below(f) : 0;
        const std::uint64_t gap_after = born_above - (pop.size() - l);
        if (track_bad && l_before >= M && gap_after != gap_before) traj.gap_invariant_ok = false;
        const std::uint64_t t = n + 1;
        if (track_bad && l < M) ++bad;
        if (pop.size() == 0) traj.extinction_times.push_back(t);
        if (next_cp < cfg.checkpoints.size() && cfg.checkpoints[next_cp] == t) {
            CheckpointRecord rec;
            rec.n = t;
            rec.size = pop.size();
            rec.l = l;
            rec.r = pop.size() - l;
            rec.rprime = born_above;
            if (track_bad) rec.t_bad = bad;
            rec.sym_diff = rec.l + (rec.rprime - rec.r);
            traj.checkpoints.push_back(rec);
            ++next_cp;
        }
    }

    traj.final_size = pop.size();
    const auto all = pop.sorted();
    if (all.size() <= cfg.snapshot_limit) {
        traj.final_snapshot = all;
    } else {
        traj.snapshot_subsampled = true;
        const double n = static_cast<double>(all.size());
        for (std::uint64_t i = 0; i < cfg.snapshot_limit; ++i)
            traj.final_snapshot.push_back(all[static_cast<std::size_t>(sampler.uniform() * n)]);
        std::sort(traj.final_snapshot.begin(), traj.final_snapshot.end());
    }
    return traj;
}

// Increment law of a walk with finitely supported batch laws, as
// value -> probability.
inline std::map<std::int64_t, long double> increment_law(const WalkSpec& spec) {
    spec.validate();
    auto support = [](const IntegerLaw& law) {
        if (!law.is_bounded()) throw SupportTooLarge("enumeration needs finitely supported laws");
        std::vector<std::pair<std::int64_t, long double>> out;
        for (std::int64_t k = law.lower(); k <= law.upper(); ++k) out.emplace_back(k, law.pmf(k));
        return out;
    };
    std::map<std::int64_t, long double> law;
    const long double p = spec.p;
    const long double q = 1.0L - p;
    for (const auto& [z, pz] : support(spec.law_z)) {
        if (spec.kind == WalkKind::TotalPopulation) {
            law[z] += p * pz;
            continue;
        }
        // Binomial(z, f)
        const long double f = spec.f;
        long double coef = 1.0L;
        for (std::int64_t j = 0; j <= z; ++j) {
            if (j > 0) coef = coef * static_cast<long double>(z - j + 1) / static_cast<long double>(j);
            law[j] += p * pz * coef * std::pow(f, static_cast<long double>(j)) *
                      std::pow(1.0L - f, static_cast<long double>(z - j));
        }
    }
    for (const auto& [x, px] : support(spec.law_x)) law[-x] += q * px;
    return law;
}

inline constexpr std::uint64_t kMaxEnumeratedOutcomes = 100'000'000;

// Exact P(tau >= n) for n = 1..max_len by walking every increment sequence
// of length max_len - 1 that has not yet crossed.
inline std::vector<long double> enumerate_tau(const WalkSpec& spec, std::uint64_t max_len) {
    if (max_len == 0 || max_len > 14) throw InvalidParameter("max_len", "must lie in [1, 14]");
    const auto law = increment_law(spec);
    const std::vector<std::pair<std::int64_t, long double>> steps(law.begin(), law.end());
    long double outcomes = 1.0L;
    for (std::uint64_t i = 1; i < max_len; ++i) outcomes *= static_cast<long double>(steps.size());
    if (outcomes > static_cast<long double>(kMaxEnumeratedOutcomes))
        throw SupportTooLarge("enumeration would visit more than 1e8 sequences");

    const bool strict = spec.kind == WalkKind::FrontierThinned;
    std::vector<long double> tail(max_len + 1, 0.0L);
    // Depth d has survived d steps, so it contributes to P(tau >= d + 1).
    auto visit = [&](auto&& self, std::uint64_t depth, std::int64_t sum, long double prob) -> void {
        tail[depth + 1] += prob;
        if (depth + 1 == max_len) return;
        for (const auto& [w, pw] : steps) {
            const std::int64_t next = sum + w;
            if (strict ? next < 0 : next <= 0) continue;
            self(self, depth + 1, next, prob * pw);
        }
    };
    visit(visit, 0, 0, 1.0L);
    return std::vector<long double>(tail.begin() + 1, tail.end());
}

// Randomized configuration number `index` for the engine/oracle
// equivalence suite. Birth laws keep finite means so that every batch can
// be stored explicitly; lazy blocks are disabled.
inline ModelConfig random_validation_config(std::uint64_t index, std::uint64_t horizon, std::uint64_t seed) {
    RngStream rng = RngStream::make(seed, index, Lane::Walk).split(0xC0FFEE);
    auto pick_law = [&](bool death) {
        switch (static_cast<int>(rng.uniform() * 5.0)) {
            case 0:
                return IntegerLaw::constant(1 + static_cast<std::int64_t>(rng.uniform() * 4.0));
            case 1: {
                const auto a = 1 + static_cast<std::int64_t>(rng.uniform() * 3.0);
                return IntegerLaw::uniform_range(a, a + static_cast<std::int64_t>(rng.uniform() * 4.0));
            }
            case 2:
                return IntegerLaw::geometric(0.3 + 0.6 * rng.uniform());
            case 3:
                return IntegerLaw::shifted_poisson(0.2 + 2.8 * rng.uniform());
            default:
                return IntegerLaw::zeta(death ? 1.2 + 2.8 * rng.uniform() : 2.5 + 1.5 * rng.uniform());
        }
    };
    ModelConfig cfg;
    cfg.p = 0.05 + 0.85 * rng.uniform();
    cfg.law_z = pick_law(false);
    cfg.law_x = pick_law(true);
    cfg.horizon = horizon;
    cfg.seed = rng.next();
    cfg.lazy_threshold = std::numeric_limits<std::uint64_t>::max();
    const double eps_choices[] = {0.0, 0.05, 0.1};
    const auto regime = classify_regime(cfg.p, cfg.law_x, cfg.law_z);
    const double eps = eps_choices[static_cast<int>(rng.uniform() * 3.0)];
    cfg.eps_track = regime.f ? std::min(eps, 0.5 * (1.0 - *regime.f)) : eps;
    return cfg;
}

}  // namespace gms
