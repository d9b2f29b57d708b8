#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qkdim/heterodyne.hpp"

using namespace qkdim;
using namespace qkdim::heterodyne;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
HeterodyneSide side(double v) { return {v, Party::A}; }
}  // namespace

TEST_CASE("fock_overlap_magnitude") {
    CHECK(fock_overlap_magnitude(0, 0.0) == 1.0);
    CHECK(fock_overlap_magnitude(5, 0.0) == 0.0);
    const long double ref = std::exp(3 * std::log(1.5L) - 1.125L - 0.5L * std::log(6.0L));
    CHECK_THAT(fock_overlap_magnitude(3, 1.5), WithinRel(static_cast<double>(ref), 1e-14));
}

TEST_CASE("dtilde_matrix_element_exact examples") {
    CHECK(dtilde_matrix_element_exact(2, 3, 4.0) == 0.0);
    for (double v : {0.0, 0.3, 4.0, 25.0}) {
        CHECK_THAT(dtilde_matrix_element_exact(0, 0, v), WithinAbs(-std::expm1(-v), 1e-14));
    }
    const auto disk = oracle::disk_matrix(4.0, 3);
    CHECK_THAT(dtilde_matrix_element_exact(2, 2, 4.0),
               WithinAbs(static_cast<double>(disk[2][2].real()), 1e-8));
    CHECK_THAT(dtilde_matrix_element_exact(2, 2, 4.0),
               WithinAbs(static_cast<double>(oracle::lower_gamma_series(3, 4)), 1e-12));
}

TEST_CASE("truncated D has eigenvalues in [0, 1]") {
    // D is diagonal in the Fock basis, so its eigenvalues are its diagonal.
    for (double v : {0.0, 0.5, 4.0, 30.0, 200.0}) {
        for (std::uint64_t n = 0; n < 60; ++n) {
            const double e = dtilde_matrix_element_exact(n, n, v);
            CHECK(e >= 0.0);
            CHECK(e <= 1.0 + 1e-10);
        }
    }
}

TEST_CASE("offdiag_sum_paper: zero acceptance region") {
    for (std::uint64_t d : {1, 5, 40}) {
        CHECK(offdiag_sum_paper(side(0.0), d).value.value == 0.0);
        CHECK(offdiag_sum_paper(side(0.0), d, true).value.value == 0.0);
        CHECK(offdiag_sum_exact(side(0.0), d).value.value == 0.0);
    }
}

TEST_CASE("offdiag_sum_paper strictly decreasing in d at V=4") {
    double prev = offdiag_sum_paper(side(4.0), 5).value.value;
    for (std::uint64_t d = 6; d <= 60; ++d) {
        const double cur = offdiag_sum_paper(side(4.0), d).value.value;
        INFO("d = " << d);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("offdiag_sum_paper matches the Simpson oracle") {
    for (std::uint64_t d : {20, 40}) {
        for (bool polar : {false, true}) {
            const auto b = offdiag_sum_paper(side(4.0), d, polar);
            const double ref = static_cast<double>(oracle::simpson_offdiag(4.0, unsigned(d), polar));
            INFO("d = " << d << " polar = " << polar);
            CHECK_THAT(b.value.value, WithinRel(ref, 1e-9));
            CHECK(b.method == (polar ? OverlapMethod::paper_polar : OverlapMethod::paper));
        }
    }
}

TEST_CASE("offdiag_sum_exact matches a direct 50-digit sum") {
    const auto b = offdiag_sum_exact(side(4.0), 1);
    const double ref = static_cast<double>(oracle::exact_diagonal_sum(4.0, 1, 200));
    CHECK_THAT(b.value.value, WithinRel(ref, 1e-12));
    CHECK(b.value.contains(ref));
    CHECK(b.method == OverlapMethod::exact_diagonal);
}

TEST_CASE("exact-diagonal is dominated by paper-literal") {
    for (double v : {0.5, 2.0, 4.0, 8.0}) {
        for (std::uint64_t d : {1, 2, 3, 5, 8, 13, 21, 34, 55}) {
            const auto e = offdiag_sum_exact(side(v), d).value;
            const auto p = offdiag_sum_paper(side(v), d).value;
            INFO("v = " << v << " d = " << d);
            CHECK(e.value <= p.value + e.tail_bound + p.tail_bound);
        }
    }
}

TEST_CASE("both sums decay: strictly decreasing past V, halving over ceil(V)+2 steps") {
    for (double v : {0.5, 2.0, 4.0, 8.0}) {
        for (auto method : {OverlapMethod::paper, OverlapMethod::exact_diagonal}) {
            const auto first = static_cast<std::uint64_t>(std::floor(v)) + 1;
            double prev = offdiag_sum(side(v), first, method).value.value;
            for (std::uint64_t d = first + 1; d <= first + 40; ++d) {
                const double cur = offdiag_sum(side(v), d, method).value.value;
                CHECK(cur < prev);
                prev = cur;
            }
            const auto step = static_cast<std::uint64_t>(std::ceil(v)) + 2;
            const auto from = static_cast<std::uint64_t>(std::ceil(4.0 * v)) + 16;
            for (std::uint64_t d = from; d <= from + 40; d += 3) {
                const double here = offdiag_sum(side(v), d, method).value.value;
                const double later = offdiag_sum(side(v), d + step, method).value.value;
                INFO("v = " << v << " d = " << d << " method " << to_string(method));
                CHECK(later <= 0.5 * here);
            }
        }
    }
}

TEST_CASE("find_min_dimension returns the minimal d") {
    const auto s = side(4.0);
    const double at_one = offdiag_sum_paper(s, 1).value.upper();
    CHECK(find_min_dimension(s, at_one * 1.01, OverlapMethod::paper).d == 1);
    for (auto method : {OverlapMethod::paper, OverlapMethod::paper_polar,
                        OverlapMethod::exact_diagonal}) {
        for (double budget : {1e-3, 1e-7, 1e-12, 1e-20}) {
            const auto r = find_min_dimension(s, budget, method);
            CHECK(r.bound.value.upper() <= budget);
            REQUIRE(r.d > 1);
            CHECK(offdiag_sum(s, r.d - 1, method).value.upper() > budget);
        }
    }
}

TEST_CASE("find_min_dimension is monotone in the budget") {
    const auto s = side(4.0);
    CHECK(find_min_dimension(s, 1e-12, OverlapMethod::paper).d >
          find_min_dimension(s, 1e-6, OverlapMethod::paper).d);
    std::uint64_t prev = 1;
    for (int k = 1; k <= 30; ++k) {
        const auto d = find_min_dimension(s, std::pow(10.0, -k), OverlapMethod::paper).d;
        CHECK(d >= prev);
        prev = d;
    }
}

TEST_CASE("minimal d grows close to linearly in ln(1/budget)") {
    std::vector<double> x, y;
    for (int k = 4; k <= 14; ++k) {
        x.push_back(k * std::log(10.0));
        y.push_back(static_cast<double>(
            find_min_dimension(side(4.0), std::pow(10.0, -k), OverlapMethod::paper).d));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    const double icpt = my - slope * mx;
    CHECK(slope > 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double fit = slope * x[i] + icpt;
        INFO("budget 1e-" << (i + 4) << " d = " << y[i] << " fit = " << fit);
        CHECK(std::abs(y[i] - fit) <= 0.25 * fit);
    }
}

TEST_CASE("find_min_dimension errors") {
    CHECK_THROWS_AS(find_min_dimension(side(4.0), 0.0, OverlapMethod::paper), DomainError);
    CHECK_THROWS_AS(find_min_dimension(side(4.0), 1e-30, OverlapMethod::paper, {}, 10),
                    BudgetUnreachable);
    CHECK_THROWS_AS(offdiag_sum_paper(side(-1.0), 3), DomainError);
    CHECK_THROWS_AS(offdiag_sum_paper(side(4.0), 0), DomainError);
    CHECK_THROWS_AS(parse_overlap_method("simpson"), DomainError);
}

TEST_CASE("adaptive quadrature of the overlap integrand at V=4, d=20") {
    auto integrand = [](double r) {
        if (r <= 0.0) return 0.0;
        double t = 1.0, all = 0.0, tail = 0.0;
        for (int i = 0; i < 120; ++i) {
            all += t;
            if (i >= 20) tail += t;
            t *= r / std::sqrt(i + 1.0);
        }
        return 2.0 * std::exp(-r * r) * all * tail;
    };
    const auto r = integrate_adaptive(integrand, 0.0, 2.0, 1e-16);
    const double ref = static_cast<double>(oracle::simpson_offdiag(4.0, 20, false));
    CHECK_THAT(r.value, WithinRel(ref, 1e-9));
}
