#pragma once

// Positive-integer laws for the birth batch size Z and the death batch
// size X, with exact samplers and exact (extended-real) moments.
//
// Law syntax: const:k  unif:a:b  geom:r  pois1:lambda  zeta:s

#include "gms/error.hpp"
#include "gms/rng.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gms {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Zeta draws saturate here. Any population is far smaller, so a saturated
// death still empties the system exactly as the unsaturated draw would.
inline constexpr std::uint64_t kSampleCeiling = std::uint64_t{1} << 60;

namespace detail {

// Riemann zeta for real s > 1 by Euler-Maclaurin summation; relative
// error is below 1e-14 over the range used here.
inline double riemann_zeta(double s) {
    if (!(s > 1.0)) return kInfinity;
    constexpr int kTerms = 24;
    // B_{2j} / (2j)!
    constexpr std::array<double, 7> kBernoulliOverFactorial = {
        1.0 / 6.0 / 2.0,
        -1.0 / 30.0 / 24.0,
        1.0 / 42.0 / 720.0,
        -1.0 / 30.0 / 40320.0,
        5.0 / 66.0 / 3628800.0,
        -691.0 / 2730.0 / 479001600.0,
        7.0 / 6.0 / 87178291200.0,
    };
    double sum = 0.0;
    for (int k = kTerms - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
    const double n = kTerms;
    sum += std::pow(n, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(n, -s);
    double rising = s;  // s (s+1) ... (s+2j-2)
    double npow = std::pow(n, -s - 1.0);
    for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
        sum += kBernoulliOverFactorial[j] * rising * npow;
        rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
        npow /= n * n;
    }
    return sum;
}

inline double parse_real(std::string_view token, std::string_view whole) {
    std::string s(token);
    if (s.empty()) throw ParseError(std::string(whole), "missing number");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError(s, "not a number");
    }
    if (used != s.size()) throw ParseError(s, "trailing characters in number");
    return v;
}

inline std::int64_t parse_int(std::string_view token) {
    std::int64_t v = 0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (token.empty() || ec != std::errc() || ptr != last)
        throw ParseError(std::string(token), "not an integer");
    return v;
}

inline std::string format_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::uint64_t sample_poisson(double lambda, RngStream& rng) {
    if (lambda < 30.0) {
        // Inversion; one uniform.
        const double u = rng.uniform();
        double term = std::exp(-lambda);
        double cdf = term;
        std::uint64_t k = 0;
        while (u > cdf && k < 10000) {
            ++k;
            term *= lambda / static_cast<double>(k);
            cdf += term;
        }
        return k;
    }
    // PTRS transformed rejection (Hoermann 1993).
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -lambda + k * loglam - std::lgamma(k + 1.0))
            return static_cast<std::uint64_t>(k);
    }
}

// Devroye's rejection sampler for P(X = k) = k^{-s} / zeta(s).
inline std::uint64_t sample_zeta(double s, RngStream& rng) {
    const double am1 = s - 1.0;
    const double b = std::exp2(am1);
    const double log_ceiling = std::log(static_cast<double>(kSampleCeiling));
    for (;;) {
        const double u = rng.uniform_pos();
        const double v = rng.uniform();
        const double log_x = -std::log(u) / am1;
        if (log_x > 700.0) {
            // (1 + 1/x)^{s-1} - 1 ~ (s-1)/x for astronomically large x.
            if (v * am1 / (b - 1.0) <= 1.0 / b) return kSampleCeiling;
            continue;
        }
        const double x = std::floor(std::exp(log_x));
        const double t = std::pow(1.0 + 1.0 / x, am1);
        const double x_t_minus_1 = x * std::expm1(am1 * std::log1p(1.0 / x));
        if (v * x_t_minus_1 / (b - 1.0) <= t / b) {
            if (std::log(x) >= log_ceiling) return kSampleCeiling;
            return static_cast<std::uint64_t>(x);
        }
    }
}

}  // namespace detail

enum class LawKind { Constant, UniformRange, Geometric, ShiftedPoisson, Zeta };

// A positive-integer law. Immutable after construction.
class IntegerLaw {
public:
    // const:1
    IntegerLaw() : kind_(LawKind::Constant), lo_(1), hi_(1) {}

    static IntegerLaw constant(std::int64_t k) {
        if (k < 1) throw InvalidParameter("k", "constant law needs k >= 1");
        IntegerLaw law(LawKind::Constant);
        law.lo_ = law.hi_ = k;
        return law;
    }

    static IntegerLaw uniform_range(std::int64_t a, std::int64_t b) {
        if (a < 1) throw InvalidParameter("a", "uniform range needs a >= 1");
        if (b < a) throw InvalidParameter("b", "uniform range needs b >= a");
        IntegerLaw law(LawKind::UniformRange);
        law.lo_ = a;
        law.hi_ = b;
        return law;
    }

    // Support {1, 2, ...}, P(k) = (1-r)^{k-1} r.
    static IntegerLaw geometric(double r) {
        if (!(r > 0.0 && r < 1.0)) throw InvalidParameter("r", "geometric needs 0 < r < 1");
        IntegerLaw law(LawKind::Geometric);
        law.real_ = r;
        return law;
    }

    // 1 + Poisson(lambda).
    static IntegerLaw shifted_poisson(double lambda) {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw InvalidParameter("lambda", "shifted Poisson needs lambda > 0");
        IntegerLaw law(LawKind::ShiftedPoisson);
        law.real_ = lambda;
        return law;
    }

    // P(k) proportional to k^{-s}, k >= 1.
    static IntegerLaw zeta(double s) {
        if (!(s > 1.0) || !std::isfinite(s)) throw InvalidParameter("s", "zeta needs s > 1");
        IntegerLaw law(LawKind::Zeta);
        law.real_ = s;
        law.zeta_s_ = detail::riemann_zeta(s);
        return law;
    }

    LawKind kind() const noexcept { return kind_; }

    // Kind-specific parameters: integer bounds for Constant/UniformRange,
    // the real parameter (r, lambda, s) for the others.
    std::int64_t lower() const noexcept { return lo_; }
    std::int64_t upper() const noexcept { return hi_; }
    double parameter() const noexcept { return real_; }

    bool is_bounded() const noexcept {
        return kind_ == LawKind::Constant || kind_ == LawKind::UniformRange;
    }

    // Essential supremum; 0 when unbounded.
    std::int64_t essential_sup() const noexcept { return is_bounded() ? hi_ : 0; }

    double mean() const {
        switch (kind_) {
            case LawKind::Constant:
                return static_cast<double>(lo_);
            case LawKind::UniformRange:
                return 0.5 * (static_cast<double>(lo_) + static_cast<double>(hi_));
            case LawKind::Geometric:
                return 1.0 / real_;
            case LawKind::ShiftedPoisson:
                return 1.0 + real_;
            case LawKind::Zeta:
                return real_ > 2.0 ? detail::riemann_zeta(real_ - 1.0) / zeta_s_ : kInfinity;
        }
        return kInfinity;
    }

    double second_moment() const {
        switch (kind_) {
            case LawKind::Constant:
                return static_cast<double>(lo_) * static_cast<double>(lo_);
            case LawKind::UniformRange: {
                // mean of k^2 over a..b
                const double a = static_cast<double>(lo_);
                const double b = static_cast<double>(hi_);
                const double n = b - a + 1.0;
                auto sq_sum = [](double m) { return m * (m + 1.0) * (2.0 * m + 1.0) / 6.0; };
                return (sq_sum(b) - sq_sum(a - 1.0)) / n;
            }
            case LawKind::Geometric:
                return (2.0 - real_) / (real_ * real_);
            case LawKind::ShiftedPoisson:
                // E(1+N)^2 = 1 + 2 lambda + lambda + lambda^2
                return 1.0 + 3.0 * real_ + real_ * real_;
            case LawKind::Zeta:
                return real_ > 3.0 ? detail::riemann_zeta(real_ - 2.0) / zeta_s_ : kInfinity;
        }
        return kInfinity;
    }

    double variance() const {
        const double m = mean();
        const double m2 = second_moment();
        if (!std::isfinite(m2)) return kInfinity;
        return m2 - m * m;
    }

    // Draws consumed per sample: Constant none; UniformRange, Geometric and
    // ShiftedPoisson (lambda < 30) one; ShiftedPoisson (lambda >= 30) and
    // Zeta two per rejection round.
    std::uint64_t sample(RngStream& rng) const {
        switch (kind_) {
            case LawKind::Constant:
                return static_cast<std::uint64_t>(lo_);
            case LawKind::UniformRange: {
                const double width = static_cast<double>(hi_ - lo_ + 1);
                auto offset = static_cast<std::int64_t>(rng.uniform() * width);
                if (offset > hi_ - lo_) offset = hi_ - lo_;
                return static_cast<std::uint64_t>(lo_ + offset);
            }
            case LawKind::Geometric: {
                const double k = std::floor(std::log(rng.uniform_pos()) / std::log1p(-real_));
                if (k >= static_cast<double>(kSampleCeiling)) return kSampleCeiling;
                return 1 + static_cast<std::uint64_t>(k);
            }
            case LawKind::ShiftedPoisson:
                return 1 + detail::sample_poisson(real_, rng);
            case LawKind::Zeta:
                return detail::sample_zeta(real_, rng);
        }
        return 1;
    }

    // Probability mass at k; used by the exact enumeration oracle and tests.
    double pmf(std::int64_t k) const {
        if (k < 1) return 0.0;
        switch (kind_) {
            case LawKind::Constant:
                return k == lo_ ? 1.0 : 0.0;
            case LawKind::UniformRange:
                return (k >= lo_ && k <= hi_) ? 1.0 / static_cast<double>(hi_ - lo_ + 1) : 0.0;
            case LawKind::Geometric:
                return std::pow(1.0 - real_, static_cast<double>(k - 1)) * real_;
            case LawKind::ShiftedPoisson: {
                const double n = static_cast<double>(k - 1);
                return std::exp(-real_ + n * std::log(real_) - std::lgamma(n + 1.0));
            }
            case LawKind::Zeta:
                return std::pow(static_cast<double>(k), -real_) / zeta_s_;
        }
        return 0.0;
    }

    std::string to_string() const {
        switch (kind_) {
            case LawKind::Constant:
                return "const:" + std::to_string(lo_);
            case LawKind::UniformRange:
                return "unif:" + std::to_string(lo_) + ":" + std::to_string(hi_);
            case LawKind::Geometric:
                return "geom:" + detail::format_real(real_);
            case LawKind::ShiftedPoisson:
                return "pois1:" + detail::format_real(real_);
            case LawKind::Zeta:
                return "zeta:" + detail::format_real(real_);
        }
        return {};
    }

    friend bool operator==(const IntegerLaw& a, const IntegerLaw& b) {
        return a.kind_ == b.kind_ && a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.real_ == b.real_;
    }

private:
    explicit IntegerLaw(LawKind kind) : kind_(kind) {}

    LawKind kind_;
    std::int64_t lo_ = 0;
    std::int64_t hi_ = 0;
    double real_ = 0.0;
    double zeta_s_ = 0.0;
};

inline IntegerLaw make_law(LawKind kind, const std::vector<double>& params) {
    auto need = [&](std::size_t n) {
        if (params.size() != n)
            throw InvalidParameter("params", "expected " + std::to_string(n) + " parameter(s)");
    };
    auto as_int = [](double v, const char* field) {
        if (v != std::floor(v) || !std::isfinite(v)) throw InvalidParameter(field, "must be an integer");
        return static_cast<std::int64_t>(v);
    };
    switch (kind) {
        case LawKind::Constant:
            need(1);
            return IntegerLaw::constant(as_int(params[0], "k"));
        case LawKind::UniformRange:
            need(2);
            return IntegerLaw::uniform_range(as_int(params[0], "a"), as_int(params[1], "b"));
        case LawKind::Geometric:
            need(1);
            return IntegerLaw::geometric(params[0]);
        case LawKind::ShiftedPoisson:
            need(1);
            return IntegerLaw::shifted_poisson(params[0]);
        case LawKind::Zeta:
            need(1);
            return IntegerLaw::zeta(params[0]);
    }
    throw InvalidParameter("kind", "unknown law");
}

inline IntegerLaw parse_law(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto colon = text.find(':', start);
        parts.push_back(text.substr(start, colon == std::string_view::npos ? colon : colon - start));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    const auto name = parts.front();
    auto arity = [&](std::size_t n) {
        if (parts.size() != n + 1)
            throw ParseError(std::string(text), "expected " + std::to_string(n) + " parameter(s) after '" +
                                                    std::string(name) + "'");
    };
    if (name == "const") {
        arity(1);
        return IntegerLaw::constant(detail::parse_int(parts[1]));
    }
    if (name == "unif") {
        arity(2);
        return IntegerLaw::uniform_range(detail::parse_int(parts[1]), detail::parse_int(parts[2]));
    }
    if (name == "geom") {
        arity(1);
        return IntegerLaw::geometric(detail::parse_real(parts[1], text));
    }
    if (name == "pois1") {
        arity(1);
        return IntegerLaw::shifted_poisson(detail::parse_real(parts[1], text));
    }
    if (name == "zeta") {
        arity(1);
        return IntegerLaw::zeta(detail::parse_real(parts[1], text));
    }
    throw ParseError(std::string(name), "unknown law kind (const, unif, geom, pois1, zeta)");
}

inline constexpr std::uint64_t kThinDirectLimit = 4096;

// Binomial(z, f): the number of z independent uniforms landing in [0, f).
// For z <= kThinDirectLimit exactly z uniforms are consumed; larger batches
// take a single std::binomial_distribution draw.
inline std::uint64_t binomial_thin(std::uint64_t z, double f, RngStream& rng) {
    if (z <= kThinDirectLimit) {
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < z; ++i) hits += rng.uniform() < f ? 1 : 0;
        return hits;
    }
    if (f <= 0.0) return 0;
    if (f >= 1.0) return z;
    std::binomial_distribution<std::uint64_t> dist(z, f);
    return dist(rng);
}

}  // namespace gms
