#pragma once

// The living set T_n: an order-indexed multiset of fitnesses in [0,1].
//
// Explicit fitnesses live in an order-statistics tree keyed by
// (fitness, insertion sequence), so equal fitnesses leave oldest first.
//
// Batches too large to store one value per particle are held as uniform
// blocks: c hidden values i.i.d. U(lo, hi), of which only the smallest is
// revealed into the tree. When a revealed minimum is removed the next one
// is drawn from the order-statistic recursion, so remove-k-smallest stays
// exact in distribution without materializing the batch.

#include "gms/error.hpp"
#include "gms/rng.hpp"

#include <ext/pb_ds/assoc_container.hpp>
#include <ext/pb_ds/tree_policy.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gms {

class Population {
public:
    Population() = default;
    explicit Population(RngStream reveal_rng) : reveal_rng_(reveal_rng) {}

    Population(const Population&) = default;
    Population& operator=(const Population&) = default;
    Population(Population&&) noexcept = default;
    Population& operator=(Population&&) noexcept = default;

    std::uint64_t size() const noexcept { return tree_.size() + hidden_total_; }
    bool empty() const noexcept { return size() == 0; }

    std::uint64_t insertions() const noexcept { return insertions_; }
    std::uint64_t removals() const noexcept { return removals_; }
    bool has_blocks() const noexcept { return !blocks_.empty(); }

    void insert(double fitness) {
        check_fitness(fitness);
        tree_.insert(Key{fitness, seq_++});
        ++insertions_;
    }

    void insert_batch(std::span<const double> fitnesses) {
        for (double v : fitnesses) check_fitness(v);
        for (double v : fitnesses) tree_.insert(Key{v, seq_++});
        insertions_ += fitnesses.size();
    }

    // Adds `count` i.i.d. U(lo, hi) fitnesses without storing them.
    void insert_uniform_block(std::uint64_t count, double lo = 0.0, double hi = 1.0) {
        if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) throw OutOfRangeFitness(lo < 0.0 ? lo : hi);
        if (count == 0) return;
        insertions_ += count;
        add_block(count, lo, hi);
    }

    // Removes min(k, size) smallest. Returns the number removed.
    std::uint64_t remove_k_smallest(std::uint64_t k) {
        if (k >= size()) {
            const std::uint64_t n = size();
            clear();
            removals_ += n;
            return n;
        }
        for (std::uint64_t i = 0; i < k; ++i) pop_min();
        removals_ += k;
        return k;
    }

    // |{v : v < x}|. Blocks straddling x are split first, which consumes
    // reveal draws but leaves the law of the population unchanged.
    std::uint64_t count_below(double x) {
        std::uint64_t n = tree_.order_of_key(Key{x, 0});
        if (blocks_.empty()) return n;
        split_blocks_at(x);
        for (const auto& [id, b] : blocks_)
            if (b.hi <= x) n += b.hidden;
        return n;
    }

    // 1-based rank.
    double kth_smallest(std::uint64_t k) {
        if (k < 1 || k > size()) throw IndexOutOfRange("kth_smallest: k out of range");
        if (!blocks_.empty()) {
            for (;;) {
                if (k <= tree_.size()) {
                    const double candidate = tree_.find_by_order(k - 1)->first;
                    if (count_below(candidate) == tree_.order_of_key(Key{candidate, 0})) break;
                    materialize_blocks_below(candidate);
                } else {
                    materialize_all();
                }
            }
        }
        return tree_.find_by_order(k - 1)->first;
    }

    double min() { return kth_smallest(1); }

    // Materializes every block and returns all fitnesses in order.
    std::vector<double> snapshot_sorted() {
        materialize_all();
        std::vector<double> out;
        out.reserve(tree_.size());
        for (const auto& key : tree_) out.push_back(key.first);
        return out;
    }

    // Sorted sample of `m` fitnesses drawn uniformly with replacement from
    // the population; hidden block members are fresh U(lo, hi) draws, which
    // is their exact conditional law.
    std::vector<double> sample_sorted(std::uint64_t m, RngStream& rng) const {
        std::vector<double> out;
        const std::uint64_t n = size();
        if (n == 0) return out;
        std::vector<std::pair<std::uint64_t, const Block*>> cumulative;
        std::uint64_t acc = tree_.size();
        for (const auto& [id, b] : blocks_) {
            acc += b.hidden;
            cumulative.emplace_back(acc, &b);
        }
        out.reserve(m);
        for (std::uint64_t i = 0; i < m; ++i) {
            const auto idx = static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(n));
            if (idx < tree_.size()) {
                out.push_back(tree_.find_by_order(idx)->first);
                continue;
            }
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), idx,
                                       [](std::uint64_t v, const auto& c) { return v < c.first; });
            if (it == cumulative.end()) --it;
            const Block& b = *it->second;
            out.push_back(b.lo + (b.hi - b.lo) * rng.uniform());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    void clear() {
        tree_.clear();
        blocks_.clear();
        frontier_owner_.clear();
        hidden_total_ = 0;
    }

private:
    using Key = std::pair<double, std::uint64_t>;
    using Tree = __gnu_pbds::tree<Key, __gnu_pbds::null_type, std::less<Key>, __gnu_pbds::rb_tree_tag,
                                  __gnu_pbds::tree_order_statistics_node_update>;

    // Hidden values are i.i.d. U(lo, hi); `lo` equals the revealed minimum
    // (frontier) while that minimum is still alive.
    struct Block {
        std::uint64_t hidden = 0;
        double lo = 0.0;
        double hi = 1.0;
        std::uint64_t frontier_seq = 0;
    };

    static void check_fitness(double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw OutOfRangeFitness(v);
    }

    // Minimum of n i.i.d. U(lo, hi).
    double draw_min(std::uint64_t n, double lo, double hi) {
        const double u = reveal_rng_.uniform_pos();
        const double frac = -std::expm1(std::log(u) / static_cast<double>(n));
        return std::min(hi, lo + (hi - lo) * frac);
    }

    void add_block(std::uint64_t count, double lo, double hi) {
        const double first = draw_min(count, lo, hi);
        const std::uint64_t id = next_block_id_++;
        Block b{count - 1, first, hi, seq_++};
        tree_.insert(Key{first, b.frontier_seq});
        frontier_owner_.emplace(b.frontier_seq, id);
        hidden_total_ += b.hidden;
        blocks_.emplace(id, b);
    }

    void pop_min() {
        auto it = tree_.begin();
        const std::uint64_t seq = it->second;
        tree_.erase(it);
        if (frontier_owner_.empty()) return;
        auto owner = frontier_owner_.find(seq);
        if (owner == frontier_owner_.end()) return;
        const std::uint64_t id = owner->second;
        frontier_owner_.erase(owner);
        Block& b = blocks_.at(id);
        if (b.hidden == 0) {
            blocks_.erase(id);
            return;
        }
        const double next = draw_min(b.hidden, b.lo, b.hi);
        --b.hidden;
        --hidden_total_;
        b.lo = next;
        b.frontier_seq = seq_++;
        tree_.insert(Key{next, b.frontier_seq});
        frontier_owner_.emplace(b.frontier_seq, id);
    }

    void split_blocks_at(double x) {
        std::vector<std::uint64_t> straddling;
        for (const auto& [id, b] : blocks_)
            if (b.lo < x && x < b.hi && b.hidden > 0) straddling.push_back(id);
        for (std::uint64_t id : straddling) {
            Block& b = blocks_.at(id);
            const double frac = (x - b.lo) / (b.hi - b.lo);
            std::binomial_distribution<std::uint64_t> dist(b.hidden, frac);
            const std::uint64_t below = dist(reveal_rng_);
            const std::uint64_t above = b.hidden - below;
            const double old_hi = b.hi;
            b.hidden = below;
            b.hi = x;
            hidden_total_ -= above;
            if (above > 0) add_block(above, x, old_hi);
        }
    }

    void materialize_block(std::uint64_t id) {
        Block& b = blocks_.at(id);
        for (std::uint64_t i = 0; i < b.hidden; ++i)
            tree_.insert(Key{b.lo + (b.hi - b.lo) * reveal_rng_.uniform(), seq_++});
        hidden_total_ -= b.hidden;
        frontier_owner_.erase(b.frontier_seq);
        blocks_.erase(id);
    }

    void materialize_blocks_below(double x) {
        std::vector<std::uint64_t> ids;
        for (const auto& [id, b] : blocks_)
            if (b.hi <= x) ids.push_back(id);
        for (std::uint64_t id : ids) materialize_block(id);
    }

    void materialize_all() {
        std::vector<std::uint64_t> ids;
        for (const auto& [id, b] : blocks_) ids.push_back(id);
        std::sort(ids.begin(), ids.end());
        for (std::uint64_t id : ids) materialize_block(id);
    }

    Tree tree_;
    // std::map keeps block iteration order deterministic.
    std::map<std::uint64_t, Block> blocks_;
    std::unordered_map<std::uint64_t, std::uint64_t> frontier_owner_;
    std::uint64_t hidden_total_ = 0;
    std::uint64_t next_block_id_ = 0;
    std::uint64_t seq_ = 0;
    std::uint64_t insertions_ = 0;
    std::uint64_t removals_ = 0;
    RngStream reveal_rng_{};
};

}  // namespace gms
