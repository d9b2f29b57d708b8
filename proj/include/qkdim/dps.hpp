#pragma once

// DPS-QKD with an inefficient photon-number-resolving detector.
//
// Pi_n = sum_{m>=n} C(m,n) g^n (1-g)^{m-n} P_m, the accepted element is
// D = sum_{n<=n0} Pi_n, and the filter keeps every l-mode Fock state with at
// most m0 photons. The off-filter weight is bounded by
//   Diff <= sum_{n=0}^{n0} g^n sum_{m>=m0} (1-g)^{m-n} (l/n!) (m+l-1)^{l+n-1}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "qkdim/errors.hpp"
#include "qkdim/numerics.hpp"

namespace qkdim::dps {

struct DpsParams {
    double gamma = 1.0;          // detector efficiency
    std::uint64_t n0 = 0;        // largest photon count Bob observed in a block
    std::uint64_t block_size = 1;
    std::uint64_t m0 = 1;        // filter cutoff (total photons kept)

    void validate() const {
        if (!(gamma > 0.0 && gamma <= 1.0)) {
            throw DomainError("dps: gamma must lie in (0, 1]");
        }
        if (block_size < 1) {
            throw DomainError("dps: block size must be >= 1");
        }
        if (m0 < n0) {
            throw DomainError("dps: m0 must be >= n0");
        }
    }
};

/// paper: relaxed weight (l/n!)(m+l-1)^{l+n-1} with m(m-1)...(m-n+1) <= m^n.
/// exact_fm: C(m,n) f_m with the exact stars-and-bars f_m = C(m+l-1, l-1).
enum class DiffMethod { paper, exact_fm };

inline std::string_view to_string(DiffMethod m) {
    return m == DiffMethod::paper ? "paper-literal" : "exact-fm";
}

/// Largest dimension returned as an exact integer (2^53, exactly representable
/// as a double so JSON/CSV output stays lossless).
inline constexpr std::uint64_t kExactDimensionCap = std::uint64_t{1} << 53;

/// C(m,n) g^n (1-g)^{m-n}: probability that m photons register as n clicks.
inline double povm_weight(std::uint64_t n, std::uint64_t m, double gamma) {
    if (n > m) {
        throw DomainError("povm_weight: n > m");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw DomainError("povm_weight: gamma must lie in (0, 1]");
    }
    if (gamma == 1.0) {
        return n == m ? 1.0 : 0.0;
    }
    const double log_w = log_binomial(m, n) + static_cast<double>(n) * std::log(gamma) +
                         static_cast<double>(m - n) * std::log1p(-gamma);
    return std::exp(log_w);
}

/// ln C(m+l-1, l-1), the log of the m-photon subspace dimension over l modes.
inline double log_subspace_dim(std::uint64_t m, std::uint64_t l) {
    if (l < 1) {
        throw DomainError("subspace_dim: l must be >= 1");
    }
    return log_binomial(m + l - 1, l - 1);
}

namespace detail {

// Exact C(n, k) with overflow checking against `cap`. The running product
// C(n-k+i, i) stays integral at every step.
inline std::uint64_t checked_binomial(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const unsigned __int128 next =
            static_cast<unsigned __int128>(result) * (n - k + i) / i;
        if (next > cap) {
            throw OverflowError("binomial exceeds the exact-dimension cap; use the log form");
        }
        result = static_cast<std::uint64_t>(next);
    }
    return result;
}

}  // namespace detail

/// f_m = C(m+l-1, l-1): the number of m-photon Fock states over l modes.
inline std::uint64_t subspace_dim_exact(std::uint64_t m, std::uint64_t l,
                                        std::uint64_t cap = kExactDimensionCap) {
    if (l < 1) {
        throw DomainError("subspace_dim_exact: l must be >= 1");
    }
    return detail::checked_binomial(m + l - 1, l - 1, cap);
}

/// l (m+l-1)! / m!, a loose upper bound on f_m. Exceeds f_m by exactly l!.
inline double subspace_dim_paper_bound(std::uint64_t m, std::uint64_t l) {
    if (l < 1) {
        throw DomainError("subspace_dim_paper_bound: l must be >= 1");
    }
    return std::exp(std::log(static_cast<double>(l)) + log_factorial(m + l - 1) -
                    log_factorial(m));
}

/// Dimension of the filter range: sum_{m<=m0} C(m+l-1, l-1) = C(m0+l, l).
inline std::uint64_t filter_dimension(std::uint64_t m0, std::uint64_t l,
                                      std::uint64_t cap = kExactDimensionCap) {
    if (l < 1) {
        throw DomainError("filter_dimension: l must be >= 1");
    }
    return detail::checked_binomial(m0 + l, l, cap);
}

inline double log_filter_dimension(std::uint64_t m0, std::uint64_t l) {
    if (l < 1) {
        throw DomainError("filter_dimension: l must be >= 1");
    }
    return log_binomial(m0 + l, l);
}

/// Certified upper bound on Diff for the given cutoff m0.
///
/// The n-sum is outside, each m-tail is a certified series. For the paper
/// form the consecutive-term ratio is (1-g)((m+l)/(m+l-1))^{l+n-1}; for the
/// exact f_m form it is (1-g)(m+l)/(m+1-n). Both decrease in m.
inline CertifiedValue diff_bound(const DpsParams& p, DiffMethod method = DiffMethod::paper,
                                 const Tolerances& tol = {}) {
    p.validate();
    const double l = static_cast<double>(p.block_size);
    CertifiedValue total;
    if (p.gamma == 1.0) {
        // (1-g)^{m-n} vanishes unless m == n, which needs n >= m0.
        KahanSum acc;
        for (std::uint64_t n = p.m0; n <= p.n0; ++n) {
            const double dn = static_cast<double>(n);
            if (method == DiffMethod::paper) {
                const double power = l + dn - 1.0;
                const double growth = power > 0.0 ? power * std::log(dn + l - 1.0) : 0.0;
                acc += std::exp(std::log(l) - log_factorial(n) + growth);
            } else {
                acc += std::exp(log_subspace_dim(n, p.block_size));
            }
        }
        return {acc.value(), 0.0};
    }
    const double log_g = std::log(p.gamma);
    const double log_1mg = std::log1p(-p.gamma);
    const double one_minus_g = 1.0 - p.gamma;
    for (std::uint64_t n = 0; n <= p.n0; ++n) {
        const double dn = static_cast<double>(n);
        CertifiedValue inner;
        if (method == DiffMethod::paper) {
            const double log_prefix = dn * log_g + std::log(l) - log_factorial(n);
            const double power = l + dn - 1.0;
            inner = sum_certified(
                [&](std::size_t m) {
                    const double dm = static_cast<double>(m);
                    const double growth = power > 0.0 ? power * std::log(dm + l - 1.0) : 0.0;
                    return std::exp(log_prefix + (dm - dn) * log_1mg + growth);
                },
                static_cast<std::size_t>(p.m0),
                [&](std::size_t m) {
                    const double dm = static_cast<double>(m);
                    return one_minus_g * std::pow((dm + l) / (dm + l - 1.0), power);
                },
                tol.sum_rel_tol, tol.max_terms);
        } else {
            const std::uint64_t start = std::max(p.m0, n);
            inner = sum_certified(
                [&](std::size_t m) {
                    const double dm = static_cast<double>(m);
                    return std::exp(dn * log_g + log_binomial(m, n) + (dm - dn) * log_1mg +
                                    log_subspace_dim(m, p.block_size));
                },
                static_cast<std::size_t>(start),
                [&](std::size_t m) {
                    const double dm = static_cast<double>(m);
                    return one_minus_g * (dm + l) / (dm + 1.0 - dn);
                },
                tol.sum_rel_tol, tol.max_terms);
        }
        total += inner;
    }
    return total;
}

struct CutoffSearch {
    std::uint64_t m0 = 0;
    CertifiedValue diff;
};

/// Smallest m0 >= n0 with diff_bound(m0).upper() <= budget.
/// `params.m0` is ignored. Doubling then bisection over the offset from n0.
inline CutoffSearch find_min_cutoff(DpsParams params, double budget,
                                    DiffMethod method = DiffMethod::paper,
                                    const Tolerances& tol = {},
                                    std::uint64_t m0_cap = 1'000'000) {
    if (!(budget > 0.0)) {
        throw DomainError("find_min_cutoff: budget must be > 0");
    }
    params.m0 = params.n0;
    params.validate();
    auto eval = [&](std::uint64_t m0) {
        DpsParams q = params;
        q.m0 = m0;
        return diff_bound(q, method, tol);
    };
    CertifiedValue at_hi = eval(params.n0);
    if (at_hi.upper() <= budget) {
        return {params.n0, at_hi};
    }
    std::uint64_t lo = params.n0;
    std::uint64_t step = 1;
    std::uint64_t hi = lo + step;
    while (true) {
        if (hi > m0_cap) hi = m0_cap;
        at_hi = eval(hi);
        if (at_hi.upper() <= budget) break;
        if (hi == m0_cap) {
            throw BudgetUnreachable("find_min_cutoff: budget not reached below m0 = " +
                                    std::to_string(m0_cap));
        }
        lo = hi;
        step *= 2;
        hi = lo + step;
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        const CertifiedValue at_mid = eval(mid);
        if (at_mid.upper() <= budget) {
            hi = mid;
            at_hi = at_mid;
        } else {
            lo = mid;
        }
    }
    return {hi, at_hi};
}

}  // namespace qkdim::dps
