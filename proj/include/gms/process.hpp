#pragma once

// Step dynamics and trajectory execution.
//
// Time n counts completed steps; step n -> n+1 consumes the index-n draws.
// With probability p a batch of Z uniforms is born, otherwise the X
// smallest fitnesses are removed (all of them when fewer remain).
//
// When the run is supercritical the frontier f splits the population into
// L_n = T_n ∩ [0,f) and R_n = T_n ∩ [f,1], and the engine also tracks
//   R'_n   every particle ever born with fitness >= f,
//   t_n    |{1 <= k <= n : |L_k| < M}| when X <= M almost surely,
//   A^eps  death events at time n that kill all of T_n ∩ [0, f+eps);
//          the recorded time is n, the pre-step index.
// Otherwise the f = 0 convention applies: L is empty and R' counts every
// birth.

#include "gms/distributions.hpp"
#include "gms/error.hpp"
#include "gms/population.hpp"
#include "gms/rng.hpp"
#include "gms/theory.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gms {

struct ModelConfig {
    double p = 0.5;
    IntegerLaw law_z;  // birth batch size
    IntegerLaw law_x;  // death batch size
    std::uint64_t horizon = 0;
    std::uint64_t seed = 0;
    double eps_track = 0.05;
    // Essential supremum of X. Filled from law_x by resolve() when X is bounded.
    std::optional<std::uint64_t> bound_M;
    // Strictly increasing steps in [1, horizon]; empty means the default
    // geometric grid 1, 2, 4, ... plus the horizon itself.
    std::vector<std::uint64_t> checkpoints;
    // Birth batches at least this large are stored as uniform blocks.
    std::uint64_t lazy_threshold = kThinDirectLimit;
    // Final populations larger than this are reported by a sorted sample
    // of this many fitnesses instead of the full snapshot.
    std::uint64_t snapshot_limit = std::uint64_t{1} << 22;
};

inline std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t horizon) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t n = 1; n <= horizon && n != 0; n <<= 1) out.push_back(n);
    if (horizon > 0 && (out.empty() || out.back() != horizon)) out.push_back(horizon);
    return out;
}

// A validated configuration together with its regime.
struct ResolvedConfig {
    ModelConfig config;
    RegimeReport regime;
    bool frontier_defined = false;
    double f = 0.0;
};

inline ResolvedConfig resolve(ModelConfig cfg) {
    if (!(cfg.p > 0.0 && cfg.p < 1.0)) throw InvalidParameter("p", "must lie in (0,1)");
    if (!(cfg.eps_track >= 0.0)) throw InvalidParameter("eps", "must be >= 0");
    if (cfg.lazy_threshold == 0) throw InvalidParameter("lazy_threshold", "must be positive");
    if (cfg.snapshot_limit == 0) throw InvalidParameter("snapshot_limit", "must be positive");
    if (cfg.bound_M) {
        if (*cfg.bound_M == 0) throw InvalidParameter("M", "must be positive");
        if (!cfg.law_x.is_bounded() ||
            static_cast<std::uint64_t>(cfg.law_x.essential_sup()) > *cfg.bound_M)
            throw InvalidParameter("M", "X is not bounded by M");
    } else if (cfg.law_x.is_bounded()) {
        cfg.bound_M = static_cast<std::uint64_t>(cfg.law_x.essential_sup());
    }
    if (cfg.checkpoints.empty()) {
        cfg.checkpoints = geometric_checkpoints(cfg.horizon);
    } else {
        for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
            const auto c = cfg.checkpoints[i];
            if (c < 1 || c > cfg.horizon)
                throw InvalidParameter("checkpoints", "entries must lie in [1, horizon]");
            if (i > 0 && c <= cfg.checkpoints[i - 1])
                throw InvalidParameter("checkpoints", "must be strictly increasing");
        }
    }
    ResolvedConfig out;
    out.regime = classify_regime(cfg.p, cfg.law_x, cfg.law_z);
    if (out.regime.f) {
        out.frontier_defined = true;
        out.f = *out.regime.f;
        if (!(out.f + cfg.eps_track < 1.0)) throw InvalidParameter("eps", "f + eps must be < 1");
    }
    out.config = std::move(cfg);
    return out;
}

struct CheckpointRecord {
    std::uint64_t n = 0;
    std::uint64_t size = 0;
    std::uint64_t l = 0;
    std::uint64_t r = 0;
    std::uint64_t rprime = 0;
    std::optional<std::uint64_t> t_bad;
    std::uint64_t sym_diff = 0;  // |L_n| + |R'_n| - |R_n|

    std::uint64_t gap() const noexcept { return rprime - r; }
    friend bool operator==(const CheckpointRecord&, const CheckpointRecord&) = default;
};

struct Trajectory {
    bool frontier_defined = false;
    double f = 0.0;
    double eps = 0.0;
    std::optional<std::uint64_t> bound_M;
    std::uint64_t horizon = 0;
    std::vector<CheckpointRecord> checkpoints;
    std::vector<std::uint64_t> extinction_times;
    std::vector<std::uint64_t> a_eps_times;
    std::vector<double> final_snapshot;
    bool snapshot_subsampled = false;
    std::uint64_t final_size = 0;
    // The gap |R'_n| - |R_n| never moved at a step whose pre-step |L| was >= M.
    bool gap_invariant_ok = true;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

enum class EventKind { Birth, Death };

struct StepOutcome {
    EventKind kind = EventKind::Birth;
    std::uint64_t drawn = 0;    // Z_n or X_n
    std::uint64_t removed = 0;  // deaths only: min(X_n, |T_n|)
};

// One trajectory in progress. Owns its population and random streams.
class Simulation {
public:
    explicit Simulation(const ResolvedConfig& rc, std::uint64_t replication = 0)
        : cfg_(rc.config),
          frontier_(rc.frontier_defined),
          f_(rc.f),
          f_eps_(rc.f + rc.config.eps_track),
          event_rng_(RngStream::make(cfg_.seed, replication, Lane::Event)),
          birth_rng_(RngStream::make(cfg_.seed, replication, Lane::Birth)),
          death_rng_(RngStream::make(cfg_.seed, replication, Lane::Death)),
          fitness_rng_(RngStream::make(cfg_.seed, replication, Lane::Fitness)),
          sample_rng_(RngStream::make(cfg_.seed, replication, Lane::Reveal).split(1)),
          pop_(RngStream::make(cfg_.seed, replication, Lane::Reveal)) {
        traj_.frontier_defined = frontier_;
        traj_.f = f_;
        traj_.eps = cfg_.eps_track;
        traj_.horizon = cfg_.horizon;
        if (frontier_) traj_.bound_M = cfg_.bound_M;
    }

    std::uint64_t time() const noexcept { return n_; }
    const Population& population() const noexcept { return pop_; }
    Population& population() noexcept { return pop_; }

    std::uint64_t size() const noexcept { return pop_.size(); }
    std::uint64_t l() const noexcept { return l_; }
    std::uint64_t r() const noexcept { return pop_.size() - l_; }
    std::uint64_t rprime() const noexcept { return rprime_; }
    std::uint64_t l_eps() const noexcept { return l_eps_; }
    std::optional<std::uint64_t> t_bad() const {
        if (frontier_ && cfg_.bound_M) return t_bad_;
        return std::nullopt;
    }
    const Trajectory& trajectory() const noexcept { return traj_; }

    StepOutcome step() {
        if (event_rng_.bernoulli(cfg_.p)) {
            const std::uint64_t z = cfg_.law_z.sample(birth_rng_);
            if (z >= cfg_.lazy_threshold) {
                birth_block(z);
            } else {
                buffer_.resize(z);
                for (auto& v : buffer_) v = fitness_rng_.uniform();
                birth_explicit(buffer_);
            }
            return finish_step(StepOutcome{EventKind::Birth, z, 0});
        }
        const std::uint64_t x = cfg_.law_x.sample(death_rng_);
        return finish_step(death(x));
    }

    // Applies a birth with the given fitnesses as the next step.
    StepOutcome apply_birth(std::span<const double> fitnesses) {
        for (double v : fitnesses)
            if (!(v >= 0.0 && v <= 1.0)) throw OutOfRangeFitness(v);
        birth_explicit(fitnesses);
        return finish_step(StepOutcome{EventKind::Birth, fitnesses.size(), 0});
    }

    // Applies a death of size x as the next step.
    StepOutcome apply_death(std::uint64_t x) { return finish_step(death(x)); }

    void run_to_horizon() {
        while (n_ < cfg_.horizon) step();
    }

    Trajectory finish() {
        traj_.final_size = pop_.size();
        if (pop_.size() <= cfg_.snapshot_limit) {
            traj_.final_snapshot = pop_.snapshot_sorted();
            traj_.snapshot_subsampled = false;
        } else {
            traj_.final_snapshot = pop_.sample_sorted(cfg_.snapshot_limit, sample_rng_);
            traj_.snapshot_subsampled = true;
        }
        return traj_;
    }

private:
    void birth_explicit(std::span<const double> fitnesses) {
        pop_.insert_batch(fitnesses);
        if (frontier_) {
            for (double v : fitnesses) {
                if (v < f_) ++l_;
                else ++rprime_;
                if (v < f_eps_) ++l_eps_;
            }
        } else {
            rprime_ += fitnesses.size();
        }
    }

    void birth_block(std::uint64_t z) {
        if (!frontier_) {
            pop_.insert_uniform_block(z, 0.0, 1.0);
            rprime_ += z;
            return;
        }
        // Split the batch at f and f + eps so that neither threshold
        // straddles a block.
        const std::uint64_t below_eps = binomial_thin(z, f_eps_, fitness_rng_);
        const std::uint64_t below_f =
            below_eps == 0 ? 0 : binomial_thin(below_eps, f_ / f_eps_, fitness_rng_);
        const std::uint64_t band = below_eps - below_f;
        const std::uint64_t above = z - below_eps;
        pop_.insert_uniform_block(below_f, 0.0, f_);
        if (f_eps_ > f_) pop_.insert_uniform_block(band, f_, f_eps_);
        pop_.insert_uniform_block(above, f_eps_, 1.0);
        l_ += below_f;
        l_eps_ += below_eps;
        rprime_ += z - below_f;
    }

    StepOutcome death(std::uint64_t x) {
        const std::uint64_t l_eps_before = l_eps_;
        const std::uint64_t removed = pop_.remove_k_smallest(x);
        if (frontier_) {
            l_ -= std::min(removed, l_);
            l_eps_ -= std::min(removed, l_eps_);
            if (x >= l_eps_before) {
                traj_.a_eps_times.push_back(n_);
                if (pop_.count_below(f_eps_) != 0)
                    throw std::logic_error("A^eps event left particles below f + eps");
            }
        }
        return StepOutcome{EventKind::Death, x, removed};
    }

    StepOutcome finish_step(StepOutcome out) {
        const std::uint64_t gap_after = rprime_ - (pop_.size() - l_);
        if (frontier_ && cfg_.bound_M && l_before_ >= *cfg_.bound_M && gap_after != gap_before_)
            traj_.gap_invariant_ok = false;
        ++n_;
        if (frontier_ && cfg_.bound_M && l_ < *cfg_.bound_M) ++t_bad_;
        if (pop_.empty()) traj_.extinction_times.push_back(n_);
        if (next_checkpoint_ < cfg_.checkpoints.size() && cfg_.checkpoints[next_checkpoint_] == n_) {
            record_checkpoint();
            ++next_checkpoint_;
        }
        gap_before_ = gap_after;
        l_before_ = l_;
        return out;
    }

    void record_checkpoint() {
        CheckpointRecord rec;
        rec.n = n_;
        rec.size = pop_.size();
        rec.l = l_;
        rec.r = rec.size - l_;
        rec.rprime = rprime_;
        rec.t_bad = t_bad();
        rec.sym_diff = rec.l + (rec.rprime - rec.r);
        if (frontier_ && (pop_.count_below(f_) != l_ || pop_.count_below(f_eps_) != l_eps_))
            throw std::logic_error("sub-frontier counters diverged from the population");
        traj_.checkpoints.push_back(rec);
    }

    ModelConfig cfg_;
    bool frontier_;
    double f_;
    double f_eps_;
    RngStream event_rng_;
    RngStream birth_rng_;
    RngStream death_rng_;
    RngStream fitness_rng_;
    RngStream sample_rng_;
    Population pop_;
    Trajectory traj_;
    std::vector<double> buffer_;
    std::uint64_t n_ = 0;
    std::uint64_t l_ = 0;
    std::uint64_t l_eps_ = 0;
    std::uint64_t rprime_ = 0;
    std::uint64_t t_bad_ = 0;
    std::uint64_t gap_before_ = 0;
    std::uint64_t l_before_ = 0;
    std::size_t next_checkpoint_ = 0;
};

inline Trajectory run(const ResolvedConfig& rc, std::uint64_t replication = 0) {
    Simulation sim(rc, replication);
    sim.run_to_horizon();
    return sim.finish();
}

inline Trajectory run(const ModelConfig& cfg, std::uint64_t replication = 0) {
    return run(resolve(cfg), replication);
}

// Thread count from GMS_THREADS, else the hardware concurrency.
inline unsigned default_thread_count() {
    if (const char* env = std::getenv("GMS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs `count` independent jobs on up to `threads` workers. Job i writes
// only slot i of the output, so results do not depend on scheduling.
template <typename Result, typename Job>
std::vector<Result> parallel_map(std::uint64_t count, unsigned threads, Job job) {
    std::vector<Result> out(count);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::uint64_t>(count, 1))));
    if (threads == 1) {
        for (std::uint64_t i = 0; i < count; ++i) out[i] = job(i);
        return out;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::uint64_t i = next++; i < count; i = next++) out[i] = job(i);
            } catch (...) {
                errors[t] = std::current_exception();
                next = count;
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// Replication i draws from streams derived from (seed, i).
inline std::vector<Trajectory> run_ensemble(const ModelConfig& cfg, std::uint64_t replications,
                                            unsigned threads = default_thread_count()) {
    if (replications == 0) throw InvalidParameter("replications", "must be >= 1");
    const ResolvedConfig rc = resolve(cfg);
    return parallel_map<Trajectory>(replications, threads,
                                    [&](std::uint64_t i) { return run(rc, i); });
}

}  // namespace gms
