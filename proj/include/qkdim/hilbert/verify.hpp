#pragma once

// Seeded randomized verifiers. Trial i uses the seed derive_seed(seed, i), so
// any failing trial can be replayed on its own.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "qkdim/hilbert/linalg.hpp"
#include "qkdim/hilbert/protocol.hpp"
#include "qkdim/hilbert/random.hpp"
#include "qkdim/hilbert/theorem1.hpp"

namespace qkdim::hilbert {

template <class Trial>
struct VerificationSummary {
    std::size_t trials = 0;
    std::size_t passes = 0;
    std::size_t failures = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::uint64_t worst_seed = 0;
    std::optional<std::uint64_t> first_failure_seed;
    std::vector<Trial> records;

    void add(const Trial& t) {
        ++trials;
        if (t.pass) {
            ++passes;
        } else {
            ++failures;
            if (!first_failure_seed) first_failure_seed = t.seed;
        }
        if (t.margin < worst_margin) {
            worst_margin = t.margin;
            worst_seed = t.seed;
        }
        records.push_back(t);
    }
};

struct Theorem1Config {
    std::size_t dim_a = 3;
    std::size_t dim_b = 3;
    std::size_t dim_e = 1;
    std::size_t cutoff = 2;
    std::size_t n_systems = 2;
    /// Draw N in {1,2,3}, d in {1,2,3} and per-side dims in [d+1, max_dim] per trial.
    bool random_shape = false;
    std::size_t max_dim = 4;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    double tol = 1e-9;
};

struct Theorem1Trial {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t n_systems = 0;
    std::size_t dim_a = 0;
    std::size_t dim_b = 0;
    std::size_t cutoff = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs
    bool pass = false;
};

inline Theorem1Trial run_theorem1_trial(std::size_t trial, std::uint64_t trial_seed,
                                        const Theorem1Config& cfg) {
    InstanceSpec spec;
    spec.want_complement = true;
    spec.layout.dim_e = cfg.dim_e;
    if (cfg.random_shape) {
        Rng shape(derive_seed(trial_seed, 1));
        const std::size_t d = shape.uniform_index(1, 3);
        spec.layout.n_systems = shape.uniform_index(1, 3);
        spec.layout.dim_a = shape.uniform_index(d + 1, std::max(d + 1, cfg.max_dim));
        spec.layout.dim_b = shape.uniform_index(d + 1, std::max(d + 1, cfg.max_dim));
        spec.layout.dim_e = 1;
        spec.cutoff_a = spec.cutoff_b = d;
    } else {
        spec.layout.n_systems = cfg.n_systems;
        spec.layout.dim_a = cfg.dim_a;
        spec.layout.dim_b = cfg.dim_b;
        spec.cutoff_a = spec.cutoff_b = cfg.cutoff;
    }
    const auto inst = random_instance(trial_seed, spec);
    Theorem1Trial t;
    t.trial = trial;
    t.seed = trial_seed;
    t.n_systems = spec.layout.n_systems;
    t.dim_a = spec.layout.dim_a;
    t.dim_b = spec.layout.dim_b;
    t.cutoff = spec.cutoff_a;
    t.lhs = theorem1_lhs(*inst.complement_psi, spec.layout, inst.dtilde_a, inst.dtilde_b,
                         spec.cutoff_a, spec.cutoff_b);
    t.rhs = theorem1_rhs(inst.dtilde_a, inst.dtilde_b, spec.cutoff_a, spec.cutoff_b,
                         spec.layout.n_systems);
    t.margin = t.rhs - t.lhs;
    t.pass = t.lhs <= t.rhs + cfg.tol;
    return t;
}

inline VerificationSummary<Theorem1Trial> verify_theorem1(const Theorem1Config& cfg) {
    VerificationSummary<Theorem1Trial> out;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
        out.add(run_theorem1_trial(i, derive_seed(cfg.seed, i), cfg));
    }
    return out;
}

struct BetaConfig {
    std::size_t dim_a = 3;
    std::size_t dim_b = 3;
    std::size_t dim_e = 2;
    std::size_t n_systems = 2;
    std::size_t cutoff_a = 2;
    std::size_t cutoff_b = 2;
    std::size_t outcomes = 3;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    double tol = 1e-9;
};

struct BetaTrial {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double beta = 0.0;
    double xye_distance = 0.0;   // || rho_XYE^{P1} - rho_XYE^{P2} ||_1
    double pure_distance = 0.0;  // distance of the full post-measurement pure states
    double margin = 0.0;         // 2|beta| - xye_distance
    bool pass = false;
};

/// Builds both protocol states explicitly and checks the reduced-state
/// distance against 2|beta| from the closed-form expression.
inline BetaTrial run_beta_trial(std::size_t trial, std::uint64_t trial_seed,
                                const BetaConfig& cfg) {
    InstanceSpec spec;
    spec.layout = {cfg.n_systems, cfg.dim_a, cfg.dim_b, cfg.dim_e};
    spec.cutoff_a = cfg.cutoff_a;
    spec.cutoff_b = cfg.cutoff_b;
    spec.outcomes = cfg.outcomes;
    const auto inst = random_instance(trial_seed, spec);

    const auto p1 = build_protocol_states(inst.psi, spec.layout, inst.setups_a, inst.setups_b, false);
    const auto p2 = build_protocol_states(inst.psi, spec.layout, inst.setups_a, inst.setups_b, true);

    BetaTrial t;
    t.trial = trial;
    t.seed = trial_seed;
    t.beta = compute_beta(inst.psi, spec.layout, inst.dtilde_a, inst.dtilde_b, inst.filter_a,
                          inst.filter_b);
    t.xye_distance = trace_distance(p1.reduced_xye(), p2.reduced_xye());
    t.pure_distance = 2.0 * std::sqrt(std::max(0.0, 1.0 - std::norm(p1.overlap(p2))));
    t.margin = 2.0 * t.beta - t.xye_distance;
    t.pass = t.xye_distance <= 2.0 * t.beta + cfg.tol &&
             t.pure_distance <= 2.0 * t.beta + cfg.tol &&
             t.xye_distance <= t.pure_distance + cfg.tol;
    return t;
}

inline VerificationSummary<BetaTrial> verify_beta(const BetaConfig& cfg) {
    VerificationSummary<BetaTrial> out;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
        out.add(run_beta_trial(i, derive_seed(cfg.seed, i), cfg));
    }
    return out;
}

struct LemmaConfig {
    std::size_t dim = 4;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
};

struct LemmaTrial {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double outer = 0.0;
    double margin = 0.0;  // rhs - lhs
    bool pass = false;
};

inline LemmaTrial run_lemma_trial(std::size_t trial, std::uint64_t trial_seed,
                                  const LemmaConfig& cfg) {
    Rng rng(trial_seed);
    const auto m = random_contraction(cfg.dim, rng);
    const auto psi = haar_state(cfg.dim, rng);
    const auto phi = haar_state(cfg.dim, rng);
    const auto check = cauchy_schwarz_lemma_check(m, psi, phi);
    return {trial, trial_seed, check.lhs, check.rhs, check.outer, check.rhs - check.lhs,
            check.holds};
}

inline VerificationSummary<LemmaTrial> verify_lemma(const LemmaConfig& cfg) {
    VerificationSummary<LemmaTrial> out;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
        out.add(run_lemma_trial(i, derive_seed(cfg.seed, i), cfg));
    }
    return out;
}

}  // namespace qkdim::hilbert
