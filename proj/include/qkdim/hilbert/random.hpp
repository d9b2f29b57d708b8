#pragma once

// Seeded generators for verifier instances. Every output is a deterministic
// function of the seed.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "qkdim/errors.hpp"
#include "qkdim/hilbert/linalg.hpp"
#include "qkdim/hilbert/protocol.hpp"
#include "qkdim/hilbert/tensor.hpp"

namespace qkdim::hilbert {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent child seed for stream `index` of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    Complex complex_normal() { return {normal(), normal()}; }
    std::size_t uniform_index(std::size_t lo, std::size_t hi) {  // inclusive
        return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
    }
    bool coin() { return uniform() < 0.5; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.complex_normal();
    return g;
}

/// Haar-random pure state (normalized complex Gaussian vector).
inline PureState haar_state(std::size_t dim, Rng& rng) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
    return PureState::normalized(v);
}

inline DenseOperator random_density(std::size_t dim, Rng& rng) {
    const Matrix g = ginibre(dim, dim, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DenseOperator(0.5 * (rho + rho.adjoint()));
}

/// B^dagger B rescaled to spectral norm s with s uniform in (0, 1].
inline DenseOperator random_contraction(std::size_t dim, Rng& rng) {
    const Matrix b = ginibre(dim, dim, rng);
    Matrix m = b.adjoint() * b;
    m = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    const double s = 1.0 - rng.uniform();  // (0, 1]
    return DenseOperator(m * (s / top));
}

/// k-outcome POVM: M_x = S^{-1/2} G_x S^{-1/2} with G_x random PSD, S = sum G_x.
inline std::vector<DenseOperator> random_povm(std::size_t dim, std::size_t k, Rng& rng) {
    if (k < 1) throw DomainError("random_povm: need at least one outcome");
    std::vector<Matrix> parts;
    Matrix total = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t x = 0; x < k; ++x) {
        const Matrix b = ginibre(dim, dim, rng);
        parts.push_back(b.adjoint() * b);
        total += parts.back();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (total + total.adjoint()));
    const Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
    const Matrix t = es.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() *
                     es.eigenvectors().adjoint();
    std::vector<DenseOperator> povm;
    for (const auto& g : parts) {
        Matrix m = t * g * t;
        povm.emplace_back(0.5 * (m + m.adjoint()));
    }
    return povm;
}

struct InstanceSpec {
    TensorLayout layout;
    std::size_t cutoff_a = 1;  // filter keeps basis levels 0..cutoff-1
    std::size_t cutoff_b = 1;
    std::size_t outcomes = 3;  // region outcomes per POVM before the x' / reject elements
    bool want_complement = false;
    std::size_t budget = kDefaultTensorBudget;
};

struct Instance {
    std::uint64_t seed = 0;
    InstanceSpec spec;
    DenseOperator dtilde_a;
    DenseOperator dtilde_b;
    DenseOperator filter_a;
    DenseOperator filter_b;
    std::vector<MeasurementSetup> setups_a;  // one per system
    std::vector<MeasurementSetup> setups_b;
    PureState psi;
    std::optional<PureState> complement_psi;
};

namespace detail {

// Either a generic contraction or one concentrated on the kept levels with a
// small leak, which makes both sides of the theorem small.
inline DenseOperator random_dtilde(std::size_t dim, std::size_t cutoff, Rng& rng) {
    if (rng.coin() || cutoff >= dim) {
        return random_contraction(dim, rng);
    }
    const auto kept = random_contraction(cutoff, rng);
    Matrix inside = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    inside.topLeftCorner(static_cast<Eigen::Index>(cutoff), static_cast<Eigen::Index>(cutoff)) =
        kept.matrix();
    const double leak = 0.05 * rng.uniform();
    return DenseOperator((1.0 - leak) * inside + leak * random_contraction(dim, rng).matrix());
}

// POVM whose accepted elements sum to dtilde: region elements S G_x S for a
// random nonempty subset R of a random POVM G, the complement outcome x' with
// element S (sum_{x not in R} G_x) S, and a rejected element I - dtilde.
inline MeasurementSetup random_setup(const DenseOperator& dtilde, const DenseOperator& filter,
                                     std::size_t outcomes, Rng& rng) {
    const std::size_t dim = dtilde.dim();
    const Matrix s = psd_sqrt(dtilde).matrix();
    const auto g = random_povm(dim, outcomes, rng);
    std::vector<bool> in_region(outcomes);
    bool any = false;
    for (std::size_t x = 0; x < outcomes; ++x) {
        in_region[x] = rng.coin();
        any = any || in_region[x];
    }
    if (!any) in_region[rng.uniform_index(0, outcomes - 1)] = true;

    MeasurementSetup setup;
    Matrix complement = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t x = 0; x < outcomes; ++x) {
        Matrix m = s * g[x].matrix() * s;
        m = 0.5 * (m + m.adjoint());
        if (in_region[x]) {
            setup.accepted.push_back(setup.povm.size());
            setup.povm.emplace_back(std::move(m));
        } else {
            complement += m;
        }
    }
    setup.accepted.push_back(setup.povm.size());
    setup.povm.emplace_back(std::move(complement));
    Matrix reject = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) -
                    dtilde.matrix();
    setup.povm.emplace_back(0.5 * (reject + reject.adjoint()));
    setup.filter = filter;
    return setup;
}

}  // namespace detail

/// Random verifier instance: Haar state on the layout, per-side accepted
/// elements, filters on the first `cutoff` levels, per-system setups, and
/// (optionally) a state in the complement of the filter, resampled with
/// derived sub-seeds up to 16 times when the projection is too thin.
inline Instance random_instance(std::uint64_t seed, const InstanceSpec& spec) {
    spec.layout.validate(spec.budget);
    if (spec.cutoff_a < 1 || spec.cutoff_b < 1) {
        throw DomainError("random_instance: cutoffs must be >= 1");
    }
    if (spec.outcomes < 1) {
        throw DomainError("random_instance: need at least one region outcome");
    }
    Rng rng(seed);
    const auto& lay = spec.layout;
    Instance inst{seed,
                  spec,
                  detail::random_dtilde(lay.dim_a, spec.cutoff_a, rng),
                  detail::random_dtilde(lay.dim_b, spec.cutoff_b, rng),
                  DenseOperator::basis_projector(lay.dim_a, spec.cutoff_a),
                  DenseOperator::basis_projector(lay.dim_b, spec.cutoff_b),
                  {},
                  {},
                  haar_state(lay.total_dim(), rng),
                  std::nullopt};
    for (std::size_t k = 0; k < lay.n_systems; ++k) {
        inst.setups_a.push_back(detail::random_setup(inst.dtilde_a, inst.filter_a, spec.outcomes, rng));
        inst.setups_b.push_back(detail::random_setup(inst.dtilde_b, inst.filter_b, spec.outcomes, rng));
    }
    if (spec.want_complement) {
        constexpr int kRetries = 16;
        for (int attempt = 0; attempt < kRetries && !inst.complement_psi; ++attempt) {
            Rng sub(derive_seed(seed, 0xC0FFEEULL + static_cast<std::uint64_t>(attempt)));
            const auto raw = haar_state(lay.total_dim(), sub);
            Vector p = raw.amplitudes();
            apply_each(p, lay, inst.filter_a.matrix(), inst.filter_b.matrix());
            const Vector comp = raw.amplitudes() - p;
            if (comp.norm() > 1e-6) {
                // One more projection pass removes the rounding residue inside the filter.
                Vector again = comp;
                apply_each(again, lay, inst.filter_a.matrix(), inst.filter_b.matrix());
                inst.complement_psi = PureState::normalized(comp - again);
            }
        }
        if (!inst.complement_psi) {
            throw DegenerateError("random_instance: filter complement is (nearly) empty");
        }
    }
    return inst;
}

}  // namespace qkdim::hilbert
