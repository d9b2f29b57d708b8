#pragma once

// Heterodyne CV-QKD: Fock-basis matrix elements of the disk POVM element
//   D = (1/pi) \int_{p^2+q^2 <= V} |p+iq><p+iq| dp dq
// and the off-diagonal weight sum_{i>=0, j>=d} |<i|D|j>| that decides the
// filter dimension d (the filter keeps Fock levels 0..d-1).

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "qkdim/errors.hpp"
#include "qkdim/numerics.hpp"

namespace qkdim::heterodyne {

enum class Party { A, B };

/// Acceptance region of one side: p^2 + q^2 <= v_max (vacuum-variance units).
struct HeterodyneSide {
    double v_max = 0.0;
    Party label = Party::A;

    void validate() const {
        if (!(v_max >= 0.0) || !std::isfinite(v_max)) {
            throw DomainError("heterodyne: v_max must be finite and >= 0");
        }
    }
};

/// paper: 2 \int dr of the coherent-state overlap sums.
/// paper_polar: the same with the polar measure r dr.
/// exact_diagonal: D is diagonal in the Fock basis, so the sum is
///   sum_{j>=d} P(j+1, V).
enum class OverlapMethod { paper, paper_polar, exact_diagonal };

inline std::string_view to_string(OverlapMethod m) {
    switch (m) {
        case OverlapMethod::paper: return "paper-literal";
        case OverlapMethod::paper_polar: return "paper-literal-polar";
        case OverlapMethod::exact_diagonal: return "exact-diagonal";
    }
    return "?";
}

/// Accepts the CLI spellings (paper|polar|exact) and the record names.
inline OverlapMethod parse_overlap_method(std::string_view s) {
    if (s == "paper" || s == "paper-literal") return OverlapMethod::paper;
    if (s == "polar" || s == "paper-literal-polar") return OverlapMethod::paper_polar;
    if (s == "exact" || s == "exact-diagonal") return OverlapMethod::exact_diagonal;
    throw DomainError("unknown overlap method: " + std::string(s));
}

struct OverlapBound {
    std::uint64_t d = 1;
    OverlapMethod method = OverlapMethod::paper;
    CertifiedValue value;
};

/// |<n|alpha>| = r^n e^{-r^2/2} / sqrt(n!) with r = |alpha|.
inline double fock_overlap_magnitude(std::uint64_t n, double r) {
    if (!(r >= 0.0)) {
        throw DomainError("fock_overlap_magnitude: r must be >= 0");
    }
    if (r == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    return std::exp(static_cast<double>(n) * std::log(r) - 0.5 * r * r -
                    0.5 * log_factorial(n));
}

/// <m|D|n>. The angular integral kills m != n; the diagonal is P(n+1, V).
inline double dtilde_matrix_element_exact(std::uint64_t m, std::uint64_t n, double v_max) {
    if (!(v_max >= 0.0)) {
        throw DomainError("dtilde_matrix_element_exact: v_max must be >= 0");
    }
    if (m != n) {
        return 0.0;
    }
    return regularized_lower_gamma(static_cast<double>(n) + 1.0, v_max);
}

namespace detail {

// sum_{j >= start} r^j / sqrt(j!); consecutive ratio r / sqrt(j+1).
inline CertifiedValue coherent_series(double r, std::uint64_t start, const Tolerances& tol) {
    if (r == 0.0) {
        return {start == 0 ? 1.0 : 0.0, 0.0};
    }
    const double log_r = std::log(r);
    return sum_certified(
        [&](std::size_t j) {
            return std::exp(static_cast<double>(j) * log_r - 0.5 * log_factorial(j));
        },
        static_cast<std::size_t>(start),
        [&](std::size_t j) { return r / std::sqrt(static_cast<double>(j) + 1.0); },
        tol.sum_rel_tol, tol.max_terms);
}

inline OverlapBound offdiag_sum_quadrature(const HeterodyneSide& side, std::uint64_t d,
                                           bool polar, const Tolerances& tol) {
    side.validate();
    if (d < 1) {
        throw DomainError("offdiag_sum: d must be >= 1");
    }
    const OverlapMethod method = polar ? OverlapMethod::paper_polar : OverlapMethod::paper;
    if (side.v_max == 0.0) {
        return {d, method, {0.0, 0.0}};
    }
    auto integrand = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double all = coherent_series(r, 0, tol).value;
        const double tail = coherent_series(r, d, tol).value;
        const double f = 2.0 * std::exp(-r * r) * all * tail;
        return polar ? f * r : f;
    };
    const double upper = std::sqrt(side.v_max);
    // The magnitude spans hundreds of decades as d grows, so the absolute
    // quadrature tolerance is scaled by a one-panel estimate.
    const double scale = std::abs(::qkdim::detail::gk15(integrand, 0.0, upper).value);
    if (scale == 0.0) {
        return {d, method, {0.0, 0.0}};
    }
    const auto integral =
        integrate_adaptive(integrand, 0.0, upper, tol.quad_tol * scale, tol.max_intervals);
    // Each inner series is within a factor (1 + rel) of its true value.
    const double rel = tol.sum_rel_tol + 2.0 * std::numeric_limits<double>::epsilon();
    const double series_slack = integral.value * (2.0 * rel + rel * rel);
    return {d, method, {integral.value, integral.tail_bound + series_slack}};
}

}  // namespace detail

/// Loose overlap bound: 2 \int_0^{sqrt V} sum_{i>=0} r^i e^{-r^2}/sqrt(i!)
/// * sum_{j>=d} r^j/sqrt(j!) dr (optionally with the r dr measure).
inline OverlapBound offdiag_sum_paper(const HeterodyneSide& side, std::uint64_t d,
                                      bool polar = false, const Tolerances& tol = {}) {
    return detail::offdiag_sum_quadrature(side, d, polar, tol);
}

/// sum_{j>=d} P(j+1, V) with the tail certified by the Poisson-tail ratio
/// P(j+2, V) / P(j+1, V) <= V / (j+2).
inline OverlapBound offdiag_sum_exact(const HeterodyneSide& side, std::uint64_t d,
                                      const Tolerances& tol = {}) {
    side.validate();
    if (d < 1) {
        throw DomainError("offdiag_sum_exact: d must be >= 1");
    }
    if (side.v_max == 0.0) {
        return {d, OverlapMethod::exact_diagonal, {0.0, 0.0}};
    }
    const double v = side.v_max;
    const auto value = sum_certified(
        [&](std::size_t j) { return regularized_lower_gamma(static_cast<double>(j) + 1.0, v); },
        static_cast<std::size_t>(d),
        [&](std::size_t j) { return v / (static_cast<double>(j) + 2.0); }, tol.sum_rel_tol,
        tol.max_terms);
    return {d, OverlapMethod::exact_diagonal, value};
}

inline OverlapBound offdiag_sum(const HeterodyneSide& side, std::uint64_t d,
                                OverlapMethod method, const Tolerances& tol = {}) {
    switch (method) {
        case OverlapMethod::paper: return offdiag_sum_paper(side, d, false, tol);
        case OverlapMethod::paper_polar: return offdiag_sum_paper(side, d, true, tol);
        case OverlapMethod::exact_diagonal: return offdiag_sum_exact(side, d, tol);
    }
    throw DomainError("offdiag_sum: bad method");
}

struct DimensionSearch {
    std::uint64_t d = 1;
    OverlapBound bound;
};

/// Smallest d whose certified off-diagonal sum (value + tail) fits in budget.
/// Doubling then bisection; minimal because the sum is nonincreasing in d.
inline DimensionSearch find_min_dimension(const HeterodyneSide& side, double budget,
                                          OverlapMethod method, const Tolerances& tol = {},
                                          std::uint64_t d_cap = 100'000) {
    if (!(budget > 0.0)) {
        throw DomainError("find_min_dimension: budget must be > 0");
    }
    auto eval = [&](std::uint64_t d) { return offdiag_sum(side, d, method, tol); };
    auto fits = [&](const OverlapBound& b) { return b.value.upper() <= budget; };

    OverlapBound at_hi = eval(1);
    if (fits(at_hi)) {
        return {1, at_hi};
    }
    std::uint64_t lo = 1;
    std::uint64_t hi = 2;
    while (true) {
        if (hi > d_cap) {
            hi = d_cap;
        }
        at_hi = eval(hi);
        if (fits(at_hi)) break;
        if (hi == d_cap) {
            throw BudgetUnreachable("find_min_dimension: budget not reached below d = " +
                                    std::to_string(d_cap));
        }
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        OverlapBound at_mid = eval(mid);
        if (fits(at_mid)) {
            hi = mid;
            at_hi = at_mid;
        } else {
            lo = mid;
        }
    }
    return {hi, at_hi};
}

}  // namespace qkdim::heterodyne
