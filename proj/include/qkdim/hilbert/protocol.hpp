#pragma once

// Measurement model and the two protocol states.
//
// A measurement keeps only its accepted outcomes; outcome x acts on the
// received system through the Kraus operator sqrt(M_x). The detector and
// environment registers |x>|Q_x> are orthonormal and tied to x, so the pure
// post-measurement state is fully described by one unnormalized branch
// vector per accepted outcome string. Reduced states, overlaps and the
// explicit dilation are all computed from those branches.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkdim/errors.hpp"
#include "qkdim/hilbert/linalg.hpp"
#include "qkdim/hilbert/tensor.hpp"

namespace qkdim::hilbert {

/// POVM on one received system, the outcomes that are kept, and the filter
/// placed in front of the detector in the filtered protocol.
struct MeasurementSetup {
    std::vector<DenseOperator> povm;
    std::vector<std::size_t> accepted;
    std::optional<DenseOperator> filter;

    [[nodiscard]] std::size_t dim() const {
        if (povm.empty()) throw DomainError("MeasurementSetup: empty POVM");
        return povm.front().dim();
    }

    /// Sum of the accepted POVM elements (the accepted-region element).
    [[nodiscard]] DenseOperator accepted_element() const {
        Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
        for (const auto x : accepted) sum += povm.at(x).matrix();
        return DenseOperator(std::move(sum));
    }

    [[nodiscard]] DenseOperator filter_or_identity() const {
        return filter ? *filter : DenseOperator::identity(dim());
    }

    void validate(double tol = kPsdTol) const {
        const std::size_t n = dim();
        Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (const auto& m : povm) {
            if (m.dim() != n) throw DimensionMismatch("MeasurementSetup: POVM element size");
            m.validate_povm_element(tol);
            sum += m.matrix();
        }
        if ((sum - Matrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff() > tol) {
            throw DomainError("MeasurementSetup: POVM elements do not sum to the identity");
        }
        std::vector<bool> seen(povm.size(), false);
        for (const auto x : accepted) {
            if (x >= povm.size() || seen[x]) {
                throw DomainError("MeasurementSetup: bad accepted outcome index");
            }
            seen[x] = true;
        }
        if (filter) {
            if (filter->dim() != n) throw DimensionMismatch("MeasurementSetup: filter size");
            if (!filter->is_projector(tol)) {
                throw DomainError("MeasurementSetup: filter is not an orthogonal projector");
            }
        }
    }
};

/// rho_{XR} = sum_x |x><x| (x) tr_A( sqrt(M_x) rho sqrt(M_x) ) over every POVM
/// outcome (the accepted subset and the filter are not used here). X is the
/// leading factor of the result.
inline DenseOperator measure_channel(const DenseOperator& rho, std::size_t dim_r,
                                     const MeasurementSetup& setup) {
    setup.validate();
    const std::size_t dim_a = setup.dim();
    if (rho.dim() != dim_a * dim_r) {
        throw DimensionMismatch("measure_channel: rho is not on A (x) R");
    }
    rho.validate_density();
    const std::size_t k = setup.povm.size();
    const auto dr = static_cast<Eigen::Index>(dim_r);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(k) * dr, static_cast<Eigen::Index>(k) * dr);
    const Matrix id_r = Matrix::Identity(dr, dr);
    for (std::size_t x = 0; x < k; ++x) {
        const Matrix s = psd_sqrt(setup.povm[x]).matrix();
        // (s (x) I_R) rho (s (x) I_R)
        Matrix kron(static_cast<Eigen::Index>(dim_a) * dr, static_cast<Eigen::Index>(dim_a) * dr);
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            for (Eigen::Index j = 0; j < s.cols(); ++j)
                kron.block(i * dr, j * dr, dr, dr) = s(i, j) * id_r;
        const DenseOperator post(kron * rho.matrix() * kron.adjoint());
        const auto cond = partial_trace(post, {dim_a, dim_r}, {false, true});
        out.block(static_cast<Eigen::Index>(x) * dr, static_cast<Eigen::Index>(x) * dr, dr, dr) =
            cond.matrix();
    }
    return DenseOperator(std::move(out));
}

/// Outcome probabilities tr(M_x rho_A) for rho on A (x) R.
inline std::vector<double> outcome_probabilities(const DenseOperator& rho, std::size_t dim_r,
                                                 const MeasurementSetup& setup) {
    const auto rho_a = partial_trace(rho, {setup.dim(), dim_r}, {true, false});
    std::vector<double> p;
    for (const auto& m : setup.povm) p.push_back((m.matrix() * rho_a.matrix()).trace().real());
    return p;
}

/// Post-measurement pure state of one protocol, stored as one branch per
/// accepted outcome string (x_1, y_1, ..., x_N, y_N), mixed radix with x_1
/// most significant. Branches are normalized jointly.
class ProtocolState {
public:
    ProtocolState(TensorLayout layout, std::vector<std::size_t> radices,
                  std::vector<Vector> branches, double norm_sq)
        : layout_(layout),
          radices_(std::move(radices)),
          branches_(std::move(branches)),
          norm_sq_(norm_sq) {}

    [[nodiscard]] const TensorLayout& layout() const { return layout_; }
    [[nodiscard]] const std::vector<Vector>& branches() const { return branches_; }
    [[nodiscard]] const std::vector<std::size_t>& outcome_radices() const { return radices_; }
    /// <Psi| O^dagger O |Psi> before normalization.
    [[nodiscard]] double acceptance_probability() const { return norm_sq_; }

    /// <this|other>; both must come from the same layout and setups.
    [[nodiscard]] Complex overlap(const ProtocolState& other) const {
        if (branches_.size() != other.branches_.size()) {
            throw DimensionMismatch("ProtocolState::overlap: branch structure differs");
        }
        Complex s = 0.0;
        for (std::size_t i = 0; i < branches_.size(); ++i) s += branches_[i].dot(other.branches_[i]);
        return s;
    }

    /// rho_{X^N Y^N E}: block diagonal in the outcome string, each block the
    /// E-marginal of its branch.
    [[nodiscard]] DenseOperator reduced_xye() const {
        const auto de = static_cast<Eigen::Index>(layout_.dim_e);
        const auto n_br = static_cast<Eigen::Index>(branches_.size());
        Matrix out = Matrix::Zero(n_br * de, n_br * de);
        for (Eigen::Index b = 0; b < n_br; ++b) {
            const auto& v = branches_[static_cast<std::size_t>(b)];
            // Row-major flat index = ab * dim_e + e, i.e. column-major (dim_e x dim_ab).
            Eigen::Map<const Matrix> m(v.data(), de, v.size() / de);
            out.block(b * de, b * de, de, de) = m * m.adjoint();
        }
        return DenseOperator(std::move(out));
    }

    /// Full vector on X (x) Q_X (x) Y (x) Q_Y (x) A (x) B (x) E for N = 1.
    [[nodiscard]] Vector dilated_vector() const {
        if (layout_.n_systems != 1) {
            throw DomainError("dilated_vector: explicit dilation is only built for N = 1");
        }
        const std::size_t ka = radices_[0];
        const std::size_t kb = radices_[1];
        const std::size_t rest = layout_.total_dim();
        Vector out = Vector::Zero(static_cast<Eigen::Index>(ka * ka * kb * kb * rest));
        for (std::size_t x = 0; x < ka; ++x) {
            for (std::size_t y = 0; y < kb; ++y) {
                const std::size_t reg = ((x * ka + x) * kb + y) * kb + y;
                out.segment(static_cast<Eigen::Index>(reg * rest), static_cast<Eigen::Index>(rest)) =
                    branches_[x * kb + y];
            }
        }
        return out;
    }

private:
    TensorLayout layout_;
    std::vector<std::size_t> radices_;
    std::vector<Vector> branches_;
    double norm_sq_;
};

namespace detail {

inline const MeasurementSetup& setup_for(const std::vector<MeasurementSetup>& setups,
                                         std::size_t k) {
    return setups.size() == 1 ? setups.front() : setups.at(k);
}

inline void check_setups(const std::vector<MeasurementSetup>& setups, std::size_t n,
                         std::size_t dim, const char* side) {
    if (setups.size() != 1 && setups.size() != n) {
        throw DimensionMismatch(std::string("protocol: need 1 or N setups for side ") + side);
    }
    for (const auto& s : setups) {
        if (s.dim() != dim) {
            throw DimensionMismatch(std::string("protocol: setup dimension mismatch on side ") +
                                    side);
        }
        s.validate();
        if (s.accepted.empty()) {
            throw DomainError(std::string("protocol: no accepted outcomes on side ") + side);
        }
    }
}

}  // namespace detail

/// Applies O_{A^N} O_{B^N} (after the filters when `filter_on`) to psi and
/// normalizes. `setups_a` / `setups_b` hold one setup per system, or a single
/// setup used for every system.
inline ProtocolState build_protocol_states(const PureState& psi, const TensorLayout& layout,
                                           const std::vector<MeasurementSetup>& setups_a,
                                           const std::vector<MeasurementSetup>& setups_b,
                                           bool filter_on,
                                           std::size_t budget = kDefaultTensorBudget) {
    layout.validate(budget);
    if (psi.dim() != layout.total_dim()) {
        throw DimensionMismatch("build_protocol_states: psi does not match the layout");
    }
    detail::check_setups(setups_a, layout.n_systems, layout.dim_a, "A");
    detail::check_setups(setups_b, layout.n_systems, layout.dim_b, "B");
    const auto dims = layout.site_dims();

    Vector start = psi.amplitudes();
    if (filter_on) {
        for (std::size_t k = 0; k < layout.n_systems; ++k) {
            apply_local(start, dims, layout.site_a(k),
                        detail::setup_for(setups_a, k).filter_or_identity().matrix());
            apply_local(start, dims, layout.site_b(k),
                        detail::setup_for(setups_b, k).filter_or_identity().matrix());
        }
    }

    // Kraus operators per received site, in site order A_1, B_1, ...
    std::vector<std::vector<Matrix>> kraus;
    std::vector<std::size_t> radices;
    for (std::size_t k = 0; k < layout.n_systems; ++k) {
        for (const auto* setups : {&setups_a, &setups_b}) {
            const auto& s = detail::setup_for(*setups, k);
            std::vector<Matrix> ops;
            for (const auto x : s.accepted) ops.push_back(psd_sqrt(s.povm[x]).matrix());
            radices.push_back(ops.size());
            kraus.push_back(std::move(ops));
        }
    }

    // Depth-first expansion sharing prefixes; leaves arrive in mixed-radix order.
    std::vector<Vector> branches;
    std::function<void(std::size_t, const Vector&)> expand = [&](std::size_t site,
                                                                   const Vector& v) {
        if (site == kraus.size()) {
            branches.push_back(v);
            return;
        }
        for (const auto& op : kraus[site]) {
            Vector w = v;
            apply_local(w, dims, site, op);
            expand(site + 1, w);
        }
    };
    expand(0, start);

    double norm_sq = 0.0;
    for (const auto& b : branches) norm_sq += b.squaredNorm();
    if (!(std::sqrt(norm_sq) > 1e-14)) {
        throw DegenerateError("build_protocol_states: accepted outcomes annihilate the state");
    }
    const double scale = 1.0 / std::sqrt(norm_sq);
    for (auto& b : branches) b *= scale;
    return ProtocolState(layout, std::move(radices), std::move(branches), norm_sq);
}

/// |beta| = sqrt( tr[D^{(x)N} Pbar rho Pbar] / tr[D^{(x)N} rho] ) with
/// D = dtilde_a (x) dtilde_b and Pbar the complement of (filter_a (x) filter_b)^{(x)N}.
inline double compute_beta(const DenseOperator& rho, const TensorLayout& layout,
                           const DenseOperator& dtilde_a, const DenseOperator& dtilde_b,
                           const DenseOperator& filter_a, const DenseOperator& filter_b) {
    layout.validate();
    if (rho.dim() != layout.total_dim()) {
        throw DimensionMismatch("compute_beta: rho does not match the layout");
    }
    const Matrix& r = rho.matrix();
    const Matrix d_rho = apply_each_left(r, layout, dtilde_a.matrix(), dtilde_b.matrix());
    const double den = d_rho.trace().real();
    if (!(den > 1e-14)) {
        throw DegenerateError("compute_beta: acceptance probability tr[D rho] is ~0");
    }
    const Matrix p_rho = apply_each_left(r, layout, filter_a.matrix(), filter_b.matrix());
    const Matrix p_rho_p =
        apply_each_left(p_rho.adjoint(), layout, filter_a.matrix(), filter_b.matrix());
    const Matrix comp = r - p_rho - p_rho.adjoint() + p_rho_p;
    const double num =
        apply_each_left(comp, layout, dtilde_a.matrix(), dtilde_b.matrix()).trace().real();
    return std::sqrt(std::max(0.0, num) / den);
}

/// Pure-state form of compute_beta; avoids materializing the density matrix.
inline double compute_beta(const PureState& psi, const TensorLayout& layout,
                           const DenseOperator& dtilde_a, const DenseOperator& dtilde_b,
                           const DenseOperator& filter_a, const DenseOperator& filter_b) {
    layout.validate();
    if (psi.dim() != layout.total_dim()) {
        throw DimensionMismatch("compute_beta: psi does not match the layout");
    }
    const Vector& v = psi.amplitudes();
    Vector dv = v;
    apply_each(dv, layout, dtilde_a.matrix(), dtilde_b.matrix());
    const double den = v.dot(dv).real();
    if (!(den > 1e-14)) {
        throw DegenerateError("compute_beta: acceptance probability tr[D rho] is ~0");
    }
    Vector pv = v;
    apply_each(pv, layout, filter_a.matrix(), filter_b.matrix());
    const Vector comp = v - pv;
    Vector dcomp = comp;
    apply_each(dcomp, layout, dtilde_a.matrix(), dtilde_b.matrix());
    const double num = comp.dot(dcomp).real();
    return std::sqrt(std::max(0.0, num) / den);
}

}  // namespace qkdim::hilbert
