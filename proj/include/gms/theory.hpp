#pragma once

// Closed-form thresholds of the batch birth/death model and the regime
// classification by the means of the batch laws.

#include "gms/distributions.hpp"
#include "gms/error.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace gms {

inline constexpr double kCriticalTolerance = 1e-12;

enum class Regime {
    SupercriticalUniformF1,    // T_n approaches a sample from U[f,1]
    InfiniteBirthUniform01,    // E Z = inf, E X < inf: sample from U[0,1]
    SubcriticalRecurrent,      // p < p_c: empty infinitely often
    InfiniteDeathRecurrent,    // E X = inf, E Z < inf: empty infinitely often
    CriticalUnresolved,        // p = p_c, both means finite
    DoublyInfiniteUnresolved,  // both means infinite
};

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::SupercriticalUniformF1: return "SUPERCRITICAL_UNIFORM_F1";
        case Regime::InfiniteBirthUniform01: return "INFINITE_BIRTH_UNIFORM_01";
        case Regime::SubcriticalRecurrent: return "SUBCRITICAL_RECURRENT";
        case Regime::InfiniteDeathRecurrent: return "INFINITE_DEATH_RECURRENT";
        case Regime::CriticalUnresolved: return "CRITICAL_UNRESOLVED";
        case Regime::DoublyInfiniteUnresolved: return "DOUBLY_INFINITE_UNRESOLVED";
    }
    return "?";
}

struct RegimeReport {
    double p = 0.0;
    double mean_x = 0.0;
    double mean_z = 0.0;
    std::optional<double> p_c;  // absent only when both means are infinite
    std::optional<double> f;    // present iff SupercriticalUniformF1
    Regime regime = Regime::CriticalUnresolved;
    std::vector<std::string> hypotheses_used;
    std::string statement;
};

// mu_x / (mu_x + mu_z), extended to one-sided infinite means.
inline double critical_p(double mu_x, double mu_z) {
    if (!(mu_x > 0.0)) throw InvalidParameter("mu_x", "mean must be positive");
    if (!(mu_z > 0.0)) throw InvalidParameter("mu_z", "mean must be positive");
    const bool inf_x = std::isinf(mu_x);
    const bool inf_z = std::isinf(mu_z);
    if (inf_x && inf_z) throw BothMeansInfinite();
    if (inf_x) return 1.0;
    if (inf_z) return 0.0;
    return mu_x / (mu_x + mu_z);
}

// (q/p) (mu_x/mu_z); defined only above the critical probability.
inline double frontier_f(double p, double mu_x, double mu_z) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("p", "must lie in (0,1)");
    if (!std::isfinite(mu_x) || !std::isfinite(mu_z))
        throw InvalidParameter("mu", "frontier needs finite means");
    const double pc = critical_p(mu_x, mu_z);
    if (!(p > pc + kCriticalTolerance))
        throw NotSupercritical("p = " + detail::format_real(p) + " does not exceed p_c = " +
                               detail::format_real(pc));
    return (1.0 - p) / p * (mu_x / mu_z);
}

// Mean increment of the sub-frontier count while it is large:
// p f mu_z - q mu_x. Zero exactly at the frontier.
inline double w_increment_mean(double p, double f, double mu_z, double mu_x) {
    return p * f * mu_z - (1.0 - p) * mu_x;
}

inline RegimeReport classify_regime(double p, const IntegerLaw& law_x, const IntegerLaw& law_z) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("p", "must lie in (0,1)");
    RegimeReport r;
    r.p = p;
    r.mean_x = law_x.mean();
    r.mean_z = law_z.mean();
    const bool fin_x = std::isfinite(r.mean_x);
    const bool fin_z = std::isfinite(r.mean_z);
    auto& h = r.hypotheses_used;
    h.push_back(fin_x ? "E X < inf" : "E X = inf");
    h.push_back(fin_z ? "E Z < inf" : "E Z = inf");

    if (!fin_x && !fin_z) {
        r.regime = Regime::DoublyInfiniteUnresolved;
        r.statement = "both means infinite: not covered by the limit theorems";
        return r;
    }
    r.p_c = critical_p(r.mean_x, r.mean_z);

    if (!fin_z) {
        r.regime = Regime::InfiniteBirthUniform01;
        r.statement = "T_n approaches a random sample from U[0,1]";
        return r;
    }
    if (!fin_x) {
        r.regime = Regime::InfiniteDeathRecurrent;
        r.statement = "T_n is empty for infinitely many n";
        return r;
    }
    if (std::fabs(p - *r.p_c) <= kCriticalTolerance) {
        h.push_back("p = p_c");
        r.regime = Regime::CriticalUnresolved;
        r.statement = "critical case p = p_c: not covered by the limit theorems";
        return r;
    }
    if (p < *r.p_c) {
        h.push_back("p < p_c");
        r.regime = Regime::SubcriticalRecurrent;
        r.statement = "T_n is empty for infinitely many n";
        return r;
    }
    h.push_back("p > p_c");
    if (law_x.is_bounded()) h.push_back("X bounded (M = " + std::to_string(law_x.essential_sup()) + ")");
    h.push_back(std::isfinite(law_z.second_moment()) ? "E Z^2 < inf" : "E Z^2 = inf");
    r.regime = Regime::SupercriticalUniformF1;
    r.f = (1.0 - p) / p * (r.mean_x / r.mean_z);
    r.statement = "T_n approaches a random sample from U[f,1]";
    return r;
}

// True when the quantitative gap bound |R'_n| - |R_n| <= C n^{1/2+eps}
// applies: supercritical, X bounded and E Z^2 finite.
inline bool gap_bound_applies(const RegimeReport& r) {
    if (r.regime != Regime::SupercriticalUniformF1) return false;
    bool bounded = false, second = false;
    for (const auto& tag : r.hypotheses_used) {
        if (tag.rfind("X bounded", 0) == 0) bounded = true;
        if (tag == "E Z^2 < inf") second = true;
    }
    return bounded && second;
}

// Tail of the dominating variable for the length of a stretch with fewer
// than M sub-frontier particles: (1 - (pf)^M)^floor(m/M).
inline double xi_tail(std::uint64_t m, std::uint64_t M, double p, double f) {
    if (M == 0) throw InvalidParameter("M", "must be positive");
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("p", "must lie in (0,1)");
    if (!(f > 0.0 && f < 1.0)) throw InvalidParameter("f", "must lie in (0,1)");
    const double base = 1.0 - std::pow(p * f, static_cast<double>(M));
    return std::pow(base, static_cast<double>(m / M));
}

// 1 / sqrt(pi n): large-n behavior of P(tau >= n) at zero drift.
inline double ladder_tail_asymptote(std::uint64_t n) {
    if (n == 0) throw InvalidParameter("n", "must be positive");
    return 1.0 / std::sqrt(std::numbers::pi * static_cast<double>(n));
}

}  // namespace gms
