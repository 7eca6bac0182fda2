#pragma once

// Counter-based, splittable random streams.
//
// A stream is a 64-bit key plus a 64-bit counter. Draw i of a stream is
// mix(key + (i+1) * golden), i.e. SplitMix64 evaluated at an explicit
// position, so streams can be created for any (seed, replication, lane)
// triple without touching any other stream.

#include <cstdint>
#include <limits>

namespace gms {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Independent draw sources inside one replication. Changing the law of Z
// does not shift the draws used for deaths or fitnesses.
enum class Lane : std::uint64_t {
    Event = 0,    // birth/death coin
    Birth = 1,    // batch size Z
    Death = 2,    // batch size X
    Fitness = 3,  // per-particle uniforms
    Reveal = 4,   // lazily revealed order statistics of large batches
    Walk = 5,
};

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t replication,
                                   std::uint64_t lane) noexcept {
    std::uint64_t k = detail::mix64(seed ^ 0x6A09E667F3BCC909ULL);
    k = detail::mix64(k ^ (replication + 0xBB67AE8584CAA73BULL));
    return detail::mix64(k ^ ((lane + 1) * detail::kGolden));
}

class RngStream {
public:
    using result_type = std::uint64_t;

    constexpr RngStream() noexcept = default;
    constexpr explicit RngStream(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr RngStream make(std::uint64_t seed, std::uint64_t replication,
                                    Lane lane) noexcept {
        return RngStream(derive_key(seed, replication, static_cast<std::uint64_t>(lane)));
    }

    // A child stream; used to give every walk of a ladder study its own stream.
    constexpr RngStream split(std::uint64_t index) const noexcept {
        return RngStream(detail::mix64(key_ ^ detail::mix64(index + detail::kGolden)));
    }

    constexpr std::uint64_t next() noexcept {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    // Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1].
    constexpr double uniform_pos() noexcept { return 1.0 - uniform(); }

    constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

    // UniformRandomBitGenerator
    constexpr result_type operator()() noexcept { return next(); }
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    friend constexpr bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t key_ = detail::mix64(0);
    std::uint64_t counter_ = 0;
};

}  // namespace gms
