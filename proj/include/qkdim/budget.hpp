#pragma once

// Security-label arithmetic and end-to-end filter dimension planning.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qkdim/dps.hpp"
#include "qkdim/errors.hpp"
#include "qkdim/heterodyne.hpp"
#include "qkdim/numerics.hpp"

namespace qkdim::budget {

struct SecurityBudget {
    double delta = 0.0;       // state-distance half-bound
    double eps_smooth = 0.0;  // smoothing
    double eps_ir = 0.0;      // error correction
    double eps_pe = 0.0;      // parameter estimation
    double leak_ir = 0.0;     // bits; carried through, not used in the labels

    void validate() const {
        for (double v : {delta, eps_smooth, eps_ir, eps_pe, leak_ir}) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw DomainError("SecurityBudget: components must be finite and >= 0");
            }
        }
    }
    [[nodiscard]] double epsilon() const { return eps_smooth + eps_ir + eps_pe; }
};

/// 5 delta + eps.
inline double protocol1_security_label(const SecurityBudget& b) {
    b.validate();
    return 5.0 * b.delta + b.epsilon();
}

/// 2 delta + eps.
inline double protocol2_security_label(const SecurityBudget& b) {
    b.validate();
    return 2.0 * b.delta + b.epsilon();
}

/// Parameter-estimation strength after the filter step: eps_pe + 2 delta.
inline double parameter_estimation_strength(const SecurityBudget& b) {
    b.validate();
    return b.eps_pe + 2.0 * b.delta;
}

enum class Protocol { heterodyne, dps };

inline std::string to_string(Protocol p) { return p == Protocol::heterodyne ? "hetero" : "dps"; }

inline Protocol parse_protocol(const std::string& s) {
    if (s == "hetero" || s == "heterodyne") return Protocol::heterodyne;
    if (s == "dps") return Protocol::dps;
    throw DomainError("unknown protocol '" + s + "' (expected hetero|dps)");
}

struct HeterodyneParams {
    double v_max_a = 4.0;
    double v_max_b = 4.0;
    heterodyne::OverlapMethod method = heterodyne::OverlapMethod::paper;
};

struct DpsPlanParams {
    double gamma = 0.5;
    std::size_t n0 = 2;
    std::size_t block_size = 2;
    dps::DiffMethod method = dps::DiffMethod::paper;
};

using ProtocolParams = std::variant<HeterodyneParams, DpsPlanParams>;

struct PlanOptions {
    double split = 0.5;            // share of eps^3/N given to side A
    double regime_factor = 100.0;  // regime flag: (d_A d_B)^2 <= N / regime_factor
    Tolerances tol;
};

struct DimensionPlan {
    std::uint64_t n_signals = 0;
    double epsilon = 0.0;
    double delta = 0.0;  // identified with epsilon
    Protocol protocol = Protocol::heterodyne;
    ProtocolParams params;
    double split = 0.5;
    double target = 0.0;  // eps^3 / N
    double budget_a = 0.0;
    double budget_b = 0.0;
    // d_A and d_B are doubles because the DPS filter dimension can exceed 2^64;
    // log_d_* are exact logs either way.
    double d_a = 0.0;
    double d_b = 0.0;
    double log_d_a = 0.0;
    double log_d_b = 0.0;
    std::optional<std::size_t> m0;  // DPS photon cutoff
    CertifiedValue sum_a;
    CertifiedValue sum_b;
    CertifiedValue achieved_sum;
    double margin = 0.0;  // target - achieved_sum.upper()
    bool regime_ok = false;
    std::string method;
};

inline void validate_plan_inputs(std::uint64_t n_signals, double epsilon, double split) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("plan: epsilon must lie in (0,1)");
    if (n_signals < 1) throw DomainError("plan: n_signals must be >= 1");
    if (!(split > 0.0 && split < 1.0)) throw DomainError("plan: split must lie in (0,1)");
}

inline DimensionPlan plan_dimensions(const ProtocolParams& params, std::uint64_t n_signals,
                                     double epsilon, const PlanOptions& opt = {}) {
    validate_plan_inputs(n_signals, epsilon, opt.split);
    DimensionPlan plan;
    plan.n_signals = n_signals;
    plan.epsilon = epsilon;
    plan.delta = epsilon;
    plan.params = params;
    plan.split = opt.split;
    plan.target = epsilon * epsilon * epsilon / static_cast<double>(n_signals);
    plan.budget_a = opt.split * plan.target;
    plan.budget_b = plan.target - plan.budget_a;

    if (const auto* h = std::get_if<HeterodyneParams>(&params)) {
        plan.protocol = Protocol::heterodyne;
        plan.method = std::string(heterodyne::to_string(h->method));
        const heterodyne::HeterodyneSide side_a{h->v_max_a, heterodyne::Party::A};
        const heterodyne::HeterodyneSide side_b{h->v_max_b, heterodyne::Party::B};
        const auto ra = heterodyne::find_min_dimension(side_a, plan.budget_a, h->method, opt.tol);
        const auto rb = heterodyne::find_min_dimension(side_b, plan.budget_b, h->method, opt.tol);
        plan.d_a = static_cast<double>(ra.d);
        plan.d_b = static_cast<double>(rb.d);
        plan.log_d_a = std::log(plan.d_a);
        plan.log_d_b = std::log(plan.d_b);
        plan.sum_a = ra.bound.value;
        plan.sum_b = rb.bound.value;
    } else {
        const auto& p = std::get<DpsPlanParams>(params);
        plan.protocol = Protocol::dps;
        plan.method = std::string(dps::to_string(p.method));
        // Alice's modulation space is finite (2^l), so her side contributes nothing.
        dps::DpsParams base{p.gamma, p.n0, p.block_size, p.n0};
        const auto cut = dps::find_min_cutoff(base, plan.budget_b, p.method, opt.tol);
        plan.m0 = cut.m0;
        plan.log_d_a = static_cast<double>(p.block_size) * std::log(2.0);
        plan.d_a = std::exp2(static_cast<double>(p.block_size));
        plan.log_d_b = dps::log_filter_dimension(cut.m0, p.block_size);
        plan.d_b = std::exp(plan.log_d_b);
        plan.sum_a = CertifiedValue{};
        plan.sum_b = cut.diff;
    }
    plan.achieved_sum = plan.sum_a + plan.sum_b;
    plan.margin = plan.target - plan.achieved_sum.upper();
    // (d_A d_B)^2 <= N / factor, compared in log space.
    plan.regime_ok = 2.0 * (plan.log_d_a + plan.log_d_b) <=
                     std::log(static_cast<double>(n_signals)) - std::log(opt.regime_factor);
    return plan;
}

struct ScalingRow {
    std::uint64_t n_signals = 0;
    double epsilon = 0.0;
    double log_arg = 0.0;  // ln(N / eps^3)
    DimensionPlan plan;
    double fitted_dim = 0.0;  // d_A for heterodyne, m0 for DPS
};

struct LinearFit {
    bool defined = false;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double rms_residual = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = slope x + intercept; undefined for < 2 distinct x.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit f;
    f.points = x.size();
    if (x.size() != y.size()) throw DimensionMismatch("fit_line: x and y sizes differ");
    if (x.size() < 2) return f;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) return f;
    f.defined = true;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    f.rms_residual = std::sqrt(ss_res / n);
    return f;
}

struct ScalingReport {
    std::vector<ScalingRow> rows;
    LinearFit fit;
};

/// Plans every (eps, N) grid point, eps-major, and fits the planned dimension
/// against ln(N / eps^3).
inline ScalingReport scaling_report(const ProtocolParams& params,
                                    const std::vector<double>& epsilon_grid,
                                    const std::vector<std::uint64_t>& n_grid,
                                    const PlanOptions& opt = {}) {
    if (epsilon_grid.empty() || n_grid.empty()) {
        throw DomainError("scaling_report: grids must be nonempty");
    }
    ScalingReport rep;
    std::vector<double> xs, ys;
    for (double eps : epsilon_grid) {
        for (std::uint64_t n : n_grid) {
            ScalingRow row;
            row.n_signals = n;
            row.epsilon = eps;
            row.log_arg = std::log(static_cast<double>(n)) - 3.0 * std::log(eps);
            row.plan = plan_dimensions(params, n, eps, opt);
            row.fitted_dim = row.plan.m0 ? static_cast<double>(*row.plan.m0) : row.plan.d_a;
            xs.push_back(row.log_arg);
            ys.push_back(row.fitted_dim);
            rep.rows.push_back(std::move(row));
        }
    }
    rep.fit = fit_line(xs, ys);
    return rep;
}

}  // namespace qkdim::budget
