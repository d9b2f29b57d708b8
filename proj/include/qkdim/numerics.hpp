#pragma once

// Scalar kernels shared by the dimension calculators: log-space factorials
// and binomials, the regularized incomplete gamma function, certified series
// summation and adaptive Gauss-Kronrod quadrature.
//
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "qkdim/errors.hpp"

namespace qkdim {

/// A finite value together with an absolute bound on what was left out.
struct CertifiedValue {
    double value = 0.0;
    double tail_bound = 0.0;

    [[nodiscard]] double upper() const { return value + tail_bound; }
    [[nodiscard]] double lower() const { return value - tail_bound; }
    [[nodiscard]] bool contains(double x) const { return lower() <= x && x <= upper(); }

    friend CertifiedValue operator+(CertifiedValue a, CertifiedValue b) {
        return {a.value + b.value, a.tail_bound + b.tail_bound};
    }
    CertifiedValue& operator+=(CertifiedValue other) { return *this = *this + other; }
    friend CertifiedValue operator*(double s, CertifiedValue a) {
        return {s * a.value, std::abs(s) * a.tail_bound};
    }
};

/// Per-call numerical knobs. Defaults are what the calculators use.
struct Tolerances {
    double sum_rel_tol = 1e-15;
    double quad_tol = 1e-10;  // relative to the integral's magnitude in the calculators
    std::size_t max_terms = 1'000'000;
    std::size_t max_intervals = 4000;
};

/// Neumaier-compensated accumulator.
class KahanSum {
public:
    KahanSum& operator+=(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

namespace detail {

inline constexpr std::size_t kLogFactorialTable = 256;

inline const std::array<double, kLogFactorialTable>& log_factorial_table() {
    static const auto table = [] {
        std::array<double, kLogFactorialTable> t{};
        KahanSum acc;
        t[0] = 0.0;
        for (std::size_t k = 1; k < kLogFactorialTable; ++k) {
            acc += std::log(static_cast<double>(k));
            t[k] = acc.value();
        }
        return t;
    }();
    return table;
}

// Stirling series for ln Gamma(x), accurate to ~1e-16 relative for x >= 15.
inline double stirling_log_gamma(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv * (1.0 / 12.0 -
               inv2 * (1.0 / 360.0 -
                       inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
    return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

}  // namespace detail

/// ln(n!). Table lookup below 256, Stirling series above.
inline double log_factorial(std::uint64_t n) {
    if (n < detail::kLogFactorialTable) {
        return detail::log_factorial_table()[n];
    }
    return detail::stirling_log_gamma(static_cast<double>(n) + 1.0);
}

/// ln Gamma(x) for x > 0. Reentrant, unlike ::lgamma which writes signgam.
inline double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("log_gamma: argument must be positive and finite");
    }
    const double rounded = std::round(x);
    if (rounded == x && x < 1e15) {
        return log_factorial(static_cast<std::uint64_t>(x) - 1);
    }
    if (x >= 15.0) {
        return detail::stirling_log_gamma(x);
    }
    // Shift into the Stirling regime: Gamma(x) = Gamma(x+k) / (x (x+1) ... (x+k-1)).
    double shift = 0.0;
    double y = x;
    while (y < 15.0) {
        shift += std::log(y);
        y += 1.0;
    }
    return detail::stirling_log_gamma(y) - shift;
}

/// ln C(n, k); requires k <= n.
inline double log_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) {
        throw DomainError("log_binomial: k > n");
    }
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
///
/// Power series below x = s + 1, Lentz continued fraction for the upper
/// function Q above it.
inline double regularized_lower_gamma(double s, double x) {
    if (!(s > 0.0) || !(x >= 0.0) || !std::isfinite(s) || std::isnan(x)) {
        throw DomainError("regularized_lower_gamma: need s > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    const double log_prefactor = s * std::log(x) - x - log_gamma(s);
    constexpr double eps = std::numeric_limits<double>::epsilon() / 4.0;
    constexpr int max_iter = 100000;

    if (x < s + 1.0) {
        double term = 1.0 / s;
        double sum = term;
        for (int n = 1; n < max_iter; ++n) {
            term *= x / (s + n);
            sum += term;
            if (term < sum * eps) {
                return std::min(1.0, std::exp(log_prefactor) * sum);
            }
        }
        throw ConvergenceError("regularized_lower_gamma: series did not converge");
    }

    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) {
            const double q = std::exp(log_prefactor) * h;
            return std::clamp(1.0 - q, 0.0, 1.0);
        }
    }
    throw ConvergenceError("regularized_lower_gamma: continued fraction did not converge");
}

/// Sums a series of nonnegative terms, stopping once a geometric bound on the
/// remainder falls below `rel_tol` times the partial sum.
///
/// `ratio_bound(k)` must bound term(k'+1)/term(k') for every k' >= k, and
/// must eventually drop below 1. The remainder after the last added term t_k
/// is then at most t_k r / (1 - r). The returned tail_bound also carries
/// 4u * partial for compensated-accumulation rounding of the terms as given.
template <class Term, class Ratio>
CertifiedValue sum_certified(Term&& term, std::size_t start, Ratio&& ratio_bound,
                             double rel_tol = 1e-15, std::size_t max_terms = 1'000'000) {
    KahanSum acc;
    for (std::size_t i = 0; i < max_terms; ++i) {
        const std::size_t k = start + i;
        const double t = term(k);
        if (!(t >= 0.0) || !std::isfinite(t)) {
            throw DomainError("sum_certified: term " + std::to_string(k) +
                              " is negative or not finite");
        }
        acc += t;
        const double r = ratio_bound(k);
        if (r < 1.0) {
            const double tail = t * r / (1.0 - r);
            const double partial = acc.value();
            if (tail <= rel_tol * partial || (t == 0.0 && r == 0.0)) {
                return {partial, tail + 2.0 * std::numeric_limits<double>::epsilon() * partial};
            }
        }
    }
    throw ConvergenceError("sum_certified: no certified tail within " +
                           std::to_string(max_terms) + " terms");
}

namespace detail {

struct GaussKronrod15 {
    static constexpr std::array<double, 8> nodes{
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> kronrod{
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    // Gauss weights for the odd-indexed Kronrod nodes.
    static constexpr std::array<double, 4> gauss{
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    using R = GaussKronrod15;
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * R::kronrod[7];
    double gauss = fc * R::gauss[3];
    double abs_kronrod = std::abs(fc) * R::kronrod[7];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * R::nodes[j];
        const double lo = f(center - dx);
        const double hi = f(center + dx);
        kronrod += R::kronrod[j] * (lo + hi);
        abs_kronrod += R::kronrod[j] * (std::abs(lo) + std::abs(hi));
        if (j % 2 == 1) {
            gauss += R::gauss[j / 2] * (lo + hi);
        }
    }
    kronrod *= half;
    gauss *= half;
    abs_kronrod *= std::abs(half);
    // Rounding floor: the Gauss/Kronrod difference can vanish for low-degree
    // integrands while the rule itself still carries rounding error.
    const double floor = 50.0 * std::numeric_limits<double>::epsilon() * abs_kronrod;
    return {a, b, kronrod, std::max(std::abs(kronrod - gauss), floor)};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) quadrature with global bisection of the worst
/// segment. The reported tail_bound is the summed embedded error estimate.
template <class F>
CertifiedValue integrate_adaptive(F&& f, double a, double b, double tol = 1e-10,
                                  std::size_t max_intervals = 4000) {
    if (!(tol > 0.0)) {
        throw DomainError("integrate_adaptive: tol must be positive");
    }
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("integrate_adaptive: need finite a <= b");
    }
    if (a == b) {
        return {0.0, 0.0};
    }
    std::priority_queue<detail::Segment> heap;
    heap.push(detail::gk15(f, a, b));
    double total_error = heap.top().error;
    std::size_t intervals = 1;
    // The running total is updated incrementally and can drift; the returned
    // error is re-summed from the segments.
    while (total_error > tol && intervals < max_intervals) {
        const detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::gk15(f, worst.a, mid);
        const auto right = detail::gk15(f, mid, worst.b);
        heap.push(left);
        heap.push(right);
        ++intervals;
        total_error += left.error + right.error - worst.error;
    }
    KahanSum value;
    double error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    if (!std::isfinite(value.value())) {
        throw DomainError("integrate_adaptive: integrand produced a non-finite value");
    }
    if (error > tol) {
        throw ToleranceNotMet("integrate_adaptive: tolerance not met", value.value(), error);
    }
    return {value.value(), error};
}

}  // namespace qkdim
