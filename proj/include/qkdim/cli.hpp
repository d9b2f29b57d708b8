#pragma once

// Command-line front end. `run` is the whole program minus process plumbing so
// tests can drive it in-process.
//
// Output is {"config": {...}, "rows": [...], "summary": {...}} as JSON, or the
// rows table followed by a blank line and a one-row summary table as CSV.
// Exit codes: 0 ok, 1 usage/domain error, 2 computation error, 3 verification
// counterexample.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkdim/budget.hpp"
#include "qkdim/dps.hpp"
#include "qkdim/errors.hpp"
#include "qkdim/heterodyne.hpp"
#include "qkdim/hilbert/verify.hpp"
#include "qkdim/numerics.hpp"

namespace qkdim::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitComputation = 2;
inline constexpr int kExitCounterexample = 3;

struct Document {
    Json config = Json::object();
    Json rows = Json::array();
    Json summary = Json::object();
    std::optional<std::uint64_t> counterexample_seed;
};

namespace detail {

inline std::string csv_cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    }
    return s;
}

inline void csv_table(std::ostream& os, const std::vector<const Json*>& records) {
    if (records.empty()) return;
    bool first = true;
    for (const auto& [key, _] : records.front()->items()) {
        os << (first ? "" : ",") << csv_cell(key);
        first = false;
    }
    os << '\n';
    for (const Json* rec : records) {
        first = true;
        for (const auto& [key, _] : records.front()->items()) {
            os << (first ? "" : ",") << csv_cell(rec->contains(key) ? (*rec)[key] : Json());
            first = false;
        }
        os << '\n';
    }
}

// Accepts "1000000" or "1e6"; must be a positive integer.
inline std::uint64_t parse_count(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw DomainError(what + ": not a number: " + s);
    }
    if (pos != s.size() || !(v >= 1.0) || v > 1.8e19 || std::floor(v) != v) {
        throw DomainError(what + ": expected a positive integer, got " + s);
    }
    return static_cast<std::uint64_t>(v);
}

inline Json certified(const CertifiedValue& c) {
    return Json{{"value", c.value}, {"tail_bound", c.tail_bound}, {"upper", c.upper()}};
}

// Exact integer when it fits in a double losslessly, otherwise null.
inline Json exact_or_null(double log_value) {
    if (log_value <= 53.0 * std::log(2.0) - 1e-9) return std::llround(std::exp(log_value));
    return nullptr;
}

}  // namespace detail

inline void write_document(std::ostream& os, const Document& doc, const std::string& format) {
    if (format == "csv") {
        std::vector<const Json*> rows;
        for (const auto& r : doc.rows) rows.push_back(&r);
        detail::csv_table(os, rows);
        if (!doc.summary.empty()) {
            if (!rows.empty()) os << '\n';
            detail::csv_table(os, {&doc.summary});
        }
        return;
    }
    Json out;
    out["config"] = doc.config;
    out["rows"] = doc.rows;
    out["summary"] = doc.summary;
    os << out.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each fills a Document from already-parsed options.

struct GlobalOptions {
    std::string format = "json";
    std::string output;
    Tolerances tol;
};

inline Json global_config(const GlobalOptions& g, const std::string& command) {
    return Json{{"command", command},
                {"format", g.format},
                {"output", g.output.empty() ? Json(nullptr) : Json(g.output)},
                {"sum_tol", g.tol.sum_rel_tol},
                {"quad_tol", g.tol.quad_tol}};
}

struct HeteroOptions {
    double v_max = 0.0;
    std::vector<std::uint64_t> d;
    std::optional<double> budget;
    std::vector<std::string> methods{"paper"};
};

inline Document cmd_hetero(const GlobalOptions& g, const HeteroOptions& o) {
    if (o.d.empty() == !o.budget.has_value()) {
        throw DomainError("hetero: give exactly one of --d or --budget");
    }
    Document doc;
    doc.config = global_config(g, "hetero");
    doc.config["vmax"] = o.v_max;
    doc.config["d"] = o.d;
    doc.config["budget"] = o.budget ? Json(*o.budget) : Json(nullptr);
    doc.config["method"] = o.methods;
    const heterodyne::HeterodyneSide side{o.v_max, heterodyne::Party::A};
    side.validate();
    for (const auto& name : o.methods) {
        const auto method = heterodyne::parse_overlap_method(name);
        if (o.budget) {
            const auto r = heterodyne::find_min_dimension(side, *o.budget, method, g.tol);
            Json row{{"method", heterodyne::to_string(method)},
                     {"vmax", o.v_max},
                     {"budget", *o.budget},
                     {"d", r.d}};
            row.update(detail::certified(r.bound.value));
            doc.rows.push_back(row);
        } else {
            for (auto d : o.d) {
                const auto b = heterodyne::offdiag_sum(side, d, method, g.tol);
                Json row{{"method", heterodyne::to_string(method)}, {"vmax", o.v_max}, {"d", d}};
                row.update(detail::certified(b.value));
                doc.rows.push_back(row);
            }
        }
    }
    doc.summary["rows"] = doc.rows.size();
    return doc;
}

struct DpsOptions {
    double gamma = 1.0;
    std::uint64_t n0 = 0;
    std::uint64_t block_size = 1;
    std::optional<std::uint64_t> m0;
    std::optional<double> budget;
    bool exact_fm = false;
};

inline Document cmd_dps(const GlobalOptions& g, const DpsOptions& o) {
    if (o.m0.has_value() == o.budget.has_value()) {
        throw DomainError("dps: give exactly one of --m0 or --budget");
    }
    const auto method = o.exact_fm ? dps::DiffMethod::exact_fm : dps::DiffMethod::paper;
    Document doc;
    doc.config = global_config(g, "dps");
    doc.config["gamma"] = o.gamma;
    doc.config["n0"] = o.n0;
    doc.config["block_size"] = o.block_size;
    doc.config["m0"] = o.m0 ? Json(*o.m0) : Json(nullptr);
    doc.config["budget"] = o.budget ? Json(*o.budget) : Json(nullptr);
    doc.config["exact_fm"] = o.exact_fm;

    dps::DpsParams p{o.gamma, o.n0, o.block_size, o.m0.value_or(o.n0)};
    CertifiedValue diff;
    if (o.budget) {
        const auto cut = dps::find_min_cutoff(p, *o.budget, method, g.tol);
        p.m0 = cut.m0;
        diff = cut.diff;
    } else {
        p.validate();
        diff = dps::diff_bound(p, method, g.tol);
    }
    const double log_fd = dps::log_filter_dimension(p.m0, p.block_size);
    Json row{{"method", dps::to_string(method)}, {"gamma", o.gamma}, {"n0", o.n0},
             {"block_size", o.block_size}};
    row["budget"] = o.budget ? Json(*o.budget) : Json(nullptr);
    row["m0"] = p.m0;
    row.update(detail::certified(diff));
    row["filter_dimension"] = detail::exact_or_null(log_fd);
    row["log_filter_dimension"] = log_fd;
    doc.rows.push_back(row);
    doc.summary["rows"] = 1;
    return doc;
}

struct PlanCliOptions {
    std::string protocol = "hetero";
    double epsilon = 1e-3;
    std::string n = "1000000";
    double split = 0.5;
    double regime_factor = 100.0;
    double v_max_a = 4.0;
    double v_max_b = 4.0;
    std::string method = "paper";
    double gamma = 0.5;
    std::uint64_t n0 = 2;
    std::uint64_t block_size = 2;
    bool exact_fm = false;
};

inline budget::ProtocolParams protocol_params(const PlanCliOptions& o) {
    if (budget::parse_protocol(o.protocol) == budget::Protocol::heterodyne) {
        return budget::HeterodyneParams{o.v_max_a, o.v_max_b,
                                        heterodyne::parse_overlap_method(o.method)};
    }
    return budget::DpsPlanParams{o.gamma, o.n0, o.block_size,
                                 o.exact_fm ? dps::DiffMethod::exact_fm : dps::DiffMethod::paper};
}

inline Json protocol_config(const PlanCliOptions& o) {
    Json c{{"protocol", budget::to_string(budget::parse_protocol(o.protocol))},
           {"split", o.split},
           {"regime_factor", o.regime_factor}};
    if (budget::parse_protocol(o.protocol) == budget::Protocol::heterodyne) {
        c["vmax_a"] = o.v_max_a;
        c["vmax_b"] = o.v_max_b;
        c["method"] = heterodyne::to_string(heterodyne::parse_overlap_method(o.method));
    } else {
        c["gamma"] = o.gamma;
        c["n0"] = o.n0;
        c["block_size"] = o.block_size;
        c["exact_fm"] = o.exact_fm;
    }
    return c;
}

inline Json plan_row(const budget::DimensionPlan& p) {
    Json row{{"method", p.method},
             {"protocol", budget::to_string(p.protocol)},
             {"n", p.n_signals},
             {"epsilon", p.epsilon},
             {"delta", p.delta},
             {"target", p.target},
             {"budget_a", p.budget_a},
             {"budget_b", p.budget_b},
             {"m0", p.m0 ? Json(*p.m0) : Json(nullptr)},
             {"d_a", detail::exact_or_null(p.log_d_a)},
             {"d_b", detail::exact_or_null(p.log_d_b)},
             {"log_d_a", p.log_d_a},
             {"log_d_b", p.log_d_b},
             {"sum_a", p.sum_a.upper()},
             {"sum_b", p.sum_b.upper()}};
    row["achieved_value"] = p.achieved_sum.value;
    row["achieved_tail_bound"] = p.achieved_sum.tail_bound;
    row["margin"] = p.margin;
    row["regime_ok"] = p.regime_ok;
    return row;
}

inline budget::PlanOptions plan_options(const GlobalOptions& g, const PlanCliOptions& o) {
    budget::PlanOptions opt;
    opt.split = o.split;
    opt.regime_factor = o.regime_factor;
    opt.tol = g.tol;
    return opt;
}

inline Document cmd_plan(const GlobalOptions& g, const PlanCliOptions& o) {
    const auto n = detail::parse_count(o.n, "--n");
    Document doc;
    doc.config = global_config(g, "plan");
    doc.config.update(protocol_config(o));
    doc.config["epsilon"] = o.epsilon;
    doc.config["n"] = n;
    const auto plan = budget::plan_dimensions(protocol_params(o), n, o.epsilon, plan_options(g, o));
    doc.rows.push_back(plan_row(plan));
    doc.summary["margin"] = plan.margin;
    doc.summary["regime_ok"] = plan.regime_ok;
    if (!plan.regime_ok) {
        doc.summary["warning"] = "(d_A d_B)^2 is not small compared with N";
    }
    return doc;
}

struct ScalingCliOptions {
    PlanCliOptions plan;
    std::vector<double> eps_grid{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<std::string> n_grid{"1e4", "1e5", "1e6", "1e7", "1e8", "1e9", "1e10"};
};

inline Document cmd_scaling(const GlobalOptions& g, const ScalingCliOptions& o) {
    std::vector<std::uint64_t> ns;
    for (const auto& s : o.n_grid) ns.push_back(detail::parse_count(s, "--n-grid"));
    Document doc;
    doc.config = global_config(g, "scaling");
    doc.config.update(protocol_config(o.plan));
    doc.config["eps_grid"] = o.eps_grid;
    doc.config["n_grid"] = ns;
    const auto rep = budget::scaling_report(protocol_params(o.plan), o.eps_grid, ns,
                                            plan_options(g, o.plan));
    for (const auto& r : rep.rows) {
        Json row = plan_row(r.plan);
        row["log_arg"] = r.log_arg;
        row["fitted_dim"] = r.fitted_dim;
        doc.rows.push_back(row);
    }
    doc.summary["points"] = rep.fit.points;
    doc.summary["fit_defined"] = rep.fit.defined;
    doc.summary["fit_variable"] = rep.rows.front().plan.m0 ? "m0" : "d_a";
    if (rep.fit.defined) {
        doc.summary["slope"] = rep.fit.slope;
        doc.summary["intercept"] = rep.fit.intercept;
        doc.summary["r_squared"] = rep.fit.r_squared;
        doc.summary["rms_residual"] = rep.fit.rms_residual;
    } else {
        doc.summary["slope"] = nullptr;
        doc.summary["intercept"] = nullptr;
        doc.summary["r_squared"] = nullptr;
        doc.summary["rms_residual"] = nullptr;
    }
    return doc;
}

struct BudgetCliOptions {
    budget::SecurityBudget b;
};

inline Document cmd_budget(const GlobalOptions& g, const BudgetCliOptions& o) {
    Document doc;
    doc.config = global_config(g, "budget");
    doc.config["delta"] = o.b.delta;
    doc.config["eps_smooth"] = o.b.eps_smooth;
    doc.config["eps_ir"] = o.b.eps_ir;
    doc.config["eps_pe"] = o.b.eps_pe;
    doc.config["leak_ir"] = o.b.leak_ir;
    const double l1 = budget::protocol1_security_label(o.b);
    const double l2 = budget::protocol2_security_label(o.b);
    doc.rows.push_back(Json{{"epsilon", o.b.epsilon()},
                            {"protocol1_label", l1},
                            {"protocol2_label", l2},
                            {"pe_strength", budget::parameter_estimation_strength(o.b)},
                            {"label_gap", l1 - l2},
                            {"leak_ir", o.b.leak_ir}});
    doc.summary["protocol1_label"] = l1;
    doc.summary["protocol2_label"] = l2;
    return doc;
}

template <class Trial>
void fill_verification(Document& doc, const hilbert::VerificationSummary<Trial>& s,
                       bool all_records, Json (*to_row)(const Trial&)) {
    for (const auto& t : s.records) {
        if (all_records || !t.pass) doc.rows.push_back(to_row(t));
    }
    doc.summary["trials"] = s.trials;
    doc.summary["passes"] = s.passes;
    doc.summary["failures"] = s.failures;
    doc.summary["worst_margin"] = s.worst_margin;
    doc.summary["worst_seed"] = s.worst_seed;
    doc.summary["first_failure_seed"] =
        s.first_failure_seed ? Json(*s.first_failure_seed) : Json(nullptr);
    if (s.first_failure_seed) doc.counterexample_seed = s.first_failure_seed;
}

struct Theorem1CliOptions {
    hilbert::Theorem1Config cfg;
    std::optional<std::uint64_t> dim;
    bool all_records = false;
};

inline Json theorem1_row(const hilbert::Theorem1Trial& t) {
    return Json{{"method", "brute-force"}, {"trial", t.trial},   {"seed", t.seed},
                {"n", t.n_systems},        {"dim_a", t.dim_a},   {"dim_b", t.dim_b},
                {"cutoff", t.cutoff},      {"lhs", t.lhs},       {"rhs", t.rhs},
                {"margin", t.margin},      {"pass", t.pass}};
}

inline Document cmd_verify_theorem1(const GlobalOptions& g, Theorem1CliOptions o) {
    if (o.dim) o.cfg.dim_a = o.cfg.dim_b = *o.dim;
    if (o.cfg.trials < 1) throw DomainError("verify-theorem1: --trials must be >= 1");
    Document doc;
    doc.config = global_config(g, "verify-theorem1");
    doc.config["dim_a"] = o.cfg.dim_a;
    doc.config["dim_b"] = o.cfg.dim_b;
    doc.config["dim_e"] = o.cfg.dim_e;
    doc.config["cutoff"] = o.cfg.cutoff;
    doc.config["n"] = o.cfg.n_systems;
    doc.config["random_shape"] = o.cfg.random_shape;
    doc.config["max_dim"] = o.cfg.max_dim;
    doc.config["trials"] = o.cfg.trials;
    doc.config["seed"] = o.cfg.seed;
    doc.config["tol"] = o.cfg.tol;
    doc.config["records"] = o.all_records ? "all" : "failures";
    fill_verification(doc, hilbert::verify_theorem1(o.cfg), o.all_records, &theorem1_row);
    return doc;
}

struct BetaCliOptions {
    hilbert::BetaConfig cfg;
    std::vector<std::uint64_t> dims{3, 3, 2};
    std::vector<std::uint64_t> cutoffs;  // default dim - 1 per side
    bool all_records = false;
};

inline Json beta_row(const hilbert::BetaTrial& t) {
    return Json{{"method", "explicit-states"},
                {"trial", t.trial},
                {"seed", t.seed},
                {"beta", t.beta},
                {"xye_distance", t.xye_distance},
                {"pure_distance", t.pure_distance},
                {"excess", t.xye_distance - 2.0 * t.beta},
                {"pass", t.pass}};
}

inline Document cmd_verify_beta(const GlobalOptions& g, BetaCliOptions o) {
    if (o.dims.size() != 3) throw DomainError("verify-beta: --dims takes a,b,e");
    o.cfg.dim_a = o.dims[0];
    o.cfg.dim_b = o.dims[1];
    o.cfg.dim_e = o.dims[2];
    if (o.cutoffs.empty()) {
        o.cfg.cutoff_a = std::max<std::size_t>(1, o.cfg.dim_a - 1);
        o.cfg.cutoff_b = std::max<std::size_t>(1, o.cfg.dim_b - 1);
    } else if (o.cutoffs.size() == 2) {
        o.cfg.cutoff_a = o.cutoffs[0];
        o.cfg.cutoff_b = o.cutoffs[1];
    } else {
        throw DomainError("verify-beta: --cutoffs takes a,b");
    }
    if (o.cfg.trials < 1) throw DomainError("verify-beta: --trials must be >= 1");
    Document doc;
    doc.config = global_config(g, "verify-beta");
    doc.config["dims"] = o.dims;
    doc.config["cutoffs"] = {o.cfg.cutoff_a, o.cfg.cutoff_b};
    doc.config["n"] = o.cfg.n_systems;
    doc.config["outcomes"] = o.cfg.outcomes;
    doc.config["trials"] = o.cfg.trials;
    doc.config["seed"] = o.cfg.seed;
    doc.config["tol"] = o.cfg.tol;
    doc.config["records"] = o.all_records ? "all" : "failures";
    const auto s = hilbert::verify_beta(o.cfg);
    fill_verification(doc, s, o.all_records, &beta_row);
    doc.summary["max_excess"] = -s.worst_margin;
    return doc;
}

struct LemmaCliOptions {
    hilbert::LemmaConfig cfg;
    bool all_records = false;
};

inline Json lemma_row(const hilbert::LemmaTrial& t) {
    return Json{{"method", "cauchy-schwarz"}, {"trial", t.trial}, {"seed", t.seed},
                {"lhs", t.lhs},               {"rhs", t.rhs},     {"outer", t.outer},
                {"margin", t.margin},         {"pass", t.pass}};
}

inline Document cmd_verify_lemma(const GlobalOptions& g, const LemmaCliOptions& o) {
    if (o.cfg.trials < 1) throw DomainError("verify-lemma: --trials must be >= 1");
    if (o.cfg.dim < 1) throw DomainError("verify-lemma: --dim must be >= 1");
    Document doc;
    doc.config = global_config(g, "verify-lemma");
    doc.config["dim"] = o.cfg.dim;
    doc.config["trials"] = o.cfg.trials;
    doc.config["seed"] = o.cfg.seed;
    doc.config["records"] = o.all_records ? "all" : "failures";
    fill_verification(doc, hilbert::verify_lemma(o.cfg), o.all_records, &lemma_row);
    return doc;
}

// ---------------------------------------------------------------------------

namespace detail {

inline void add_protocol_options(CLI::App* sub, PlanCliOptions& o) {
    sub->add_option("--protocol", o.protocol, "hetero|dps")->required()
        ->check(CLI::IsMember({"hetero", "heterodyne", "dps"}));
    sub->add_option("--split", o.split, "share of eps^3/N given to side A")->capture_default_str();
    sub->add_option("--regime-factor", o.regime_factor, "flag (d_A d_B)^2 <= N/factor")
        ->capture_default_str();
    sub->add_option("--vmax-a", o.v_max_a, "hetero: side A acceptance radius squared")
        ->capture_default_str();
    sub->add_option("--vmax-b", o.v_max_b, "hetero: side B acceptance radius squared")
        ->capture_default_str();
    sub->add_option_function<double>("--vmax", [&o](double v) { o.v_max_a = o.v_max_b = v; },
                                     "hetero: both sides");
    sub->add_option("--method", o.method, "hetero: paper|polar|exact")->capture_default_str()
        ->check(CLI::IsMember({"paper", "polar", "exact"}));
    sub->add_option("--gamma", o.gamma, "dps: detector efficiency")->capture_default_str();
    sub->add_option("--n0", o.n0, "dps: largest observed photon count")->capture_default_str();
    sub->add_option("--block-size", o.block_size, "dps: block length l")->capture_default_str();
    sub->add_flag("--exact-fm", o.exact_fm, "dps: use the exact subspace dimension");
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Effective-dimension calculators and brute-force verifiers", "qkdim"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--format", g.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--output", g.output, "write to this file instead of stdout");
    app.add_option("--sum-tol", g.tol.sum_rel_tol, "relative tolerance of certified sums");
    app.add_option("--quad-tol", g.tol.quad_tol, "relative quadrature tolerance");

    HeteroOptions hetero;
    auto* s_hetero = app.add_subcommand("hetero", "coherent-state off-diagonal sums");
    s_hetero->add_option("--vmax", hetero.v_max, "acceptance radius squared")->required();
    s_hetero->add_option("--d", hetero.d, "filter dimension(s)")->delimiter(',');
    s_hetero->add_option("--budget", hetero.budget, "find the smallest d meeting this budget");
    s_hetero->add_option("--method", hetero.methods, "paper|polar|exact (comma list)")
        ->delimiter(',')->check(CLI::IsMember({"paper", "polar", "exact"}));

    DpsOptions dpso;
    auto* s_dps = app.add_subcommand("dps", "photon-number tail bound and cutoff search");
    s_dps->add_option("--gamma", dpso.gamma, "detector efficiency in (0,1]")->required();
    s_dps->add_option("--n0", dpso.n0, "largest observed photon count")->required();
    s_dps->add_option("--block-size", dpso.block_size, "block length l")->required();
    s_dps->add_option("--m0", dpso.m0, "photon cutoff");
    s_dps->add_option("--budget", dpso.budget, "find the smallest m0 meeting this budget");
    s_dps->add_flag("--exact-fm", dpso.exact_fm, "use the exact subspace dimension");

    PlanCliOptions plano;
    auto* s_plan = app.add_subcommand("plan", "choose filter dimensions for (N, epsilon)");
    detail::add_protocol_options(s_plan, plano);
    s_plan->add_option("--epsilon", plano.epsilon, "epsilon in (0,1)")->required();
    s_plan->add_option("--n", plano.n, "number of signals N")->required();

    ScalingCliOptions scal;
    auto* s_scal = app.add_subcommand("scaling", "plan over a grid and fit d vs ln(N/eps^3)");
    detail::add_protocol_options(s_scal, scal.plan);
    s_scal->add_option("--eps-grid", scal.eps_grid, "comma list")->delimiter(',');
    s_scal->add_option("--n-grid", scal.n_grid, "comma list")->delimiter(',');

    BudgetCliOptions budo;
    auto* s_bud = app.add_subcommand("budget", "security labels of both protocols");
    s_bud->add_option("--delta", budo.b.delta)->required();
    s_bud->add_option("--eps-smooth", budo.b.eps_smooth)->required();
    s_bud->add_option("--eps-ir", budo.b.eps_ir)->required();
    s_bud->add_option("--eps-pe", budo.b.eps_pe)->required();
    s_bud->add_option("--leak-ir", budo.b.leak_ir, "bits, carried through")->capture_default_str();

    Theorem1CliOptions t1;
    auto* s_t1 = app.add_subcommand("verify-theorem1", "brute-force filter bound check");
    s_t1->add_option("--dim", t1.dim, "per-side dimension (sets both)");
    s_t1->add_option("--dim-a", t1.cfg.dim_a)->capture_default_str();
    s_t1->add_option("--dim-b", t1.cfg.dim_b)->capture_default_str();
    s_t1->add_option("--dim-e", t1.cfg.dim_e)->capture_default_str();
    s_t1->add_option("--cutoff", t1.cfg.cutoff)->capture_default_str();
    s_t1->add_option("--n", t1.cfg.n_systems)->capture_default_str();
    s_t1->add_flag("--random-shape", t1.cfg.random_shape,
                   "draw N, cutoff and dimensions per trial");
    s_t1->add_option("--max-dim", t1.cfg.max_dim)->capture_default_str();
    s_t1->add_option("--trials", t1.cfg.trials)->capture_default_str();
    s_t1->add_option("--seed", t1.cfg.seed)->required();
    s_t1->add_flag("--all-records", t1.all_records, "emit every trial, not just failures");

    BetaCliOptions beo;
    auto* s_beta = app.add_subcommand("verify-beta", "reduced-state distance vs 2|beta|");
    s_beta->add_option("--dims", beo.dims, "a,b,e")->delimiter(',');
    s_beta->add_option("--cutoffs", beo.cutoffs, "a,b (default dim-1)")->delimiter(',');
    s_beta->add_option("--n", beo.cfg.n_systems)->capture_default_str();
    s_beta->add_option("--outcomes", beo.cfg.outcomes, "region outcomes per POVM")
        ->capture_default_str();
    s_beta->add_option("--trials", beo.cfg.trials)->capture_default_str();
    s_beta->add_option("--seed", beo.cfg.seed)->required();
    s_beta->add_flag("--all-records", beo.all_records);

    LemmaCliOptions lem;
    auto* s_lem = app.add_subcommand("verify-lemma", "Cauchy-Schwarz step check");
    s_lem->add_option("--dim", lem.cfg.dim)->capture_default_str();
    s_lem->add_option("--trials", lem.cfg.trials)->capture_default_str();
    s_lem->add_option("--seed", lem.cfg.seed)->required();
    s_lem->add_flag("--all-records", lem.all_records);

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        Document doc;
        if (s_hetero->parsed()) doc = cmd_hetero(g, hetero);
        else if (s_dps->parsed()) doc = cmd_dps(g, dpso);
        else if (s_plan->parsed()) doc = cmd_plan(g, plano);
        else if (s_scal->parsed()) doc = cmd_scaling(g, scal);
        else if (s_bud->parsed()) doc = cmd_budget(g, budo);
        else if (s_t1->parsed()) doc = cmd_verify_theorem1(g, t1);
        else if (s_beta->parsed()) doc = cmd_verify_beta(g, beo);
        else doc = cmd_verify_lemma(g, lem);

        if (g.output.empty()) {
            write_document(out, doc, g.format);
        } else {
            std::ofstream file(g.output, std::ios::binary);
            if (!file) {
                err << "error: cannot open " << g.output << " for writing\n";
                return kExitUsage;
            }
            write_document(file, doc, g.format);
        }
        if (doc.counterexample_seed) {
            err << "counterexample found; replay with trial seed " << *doc.counterexample_seed
                << '\n';
            return kExitCounterexample;
        }
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ComputationError& e) {
        err << "computation error: " << e.what() << '\n';
        return kExitComputation;
    } catch (const std::exception& e) {
        err << "computation error: " << e.what() << '\n';
        return kExitComputation;
    }
}

}  // namespace qkdim::cli
