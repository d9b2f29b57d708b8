#pragma once

// Brute-force side of the filter bound: for a state in the complement of
// (P_A (x) P_B)^{(x)N},
//   <Psi|(D_A (x) D_B)^{(x)N}|Psi> <= N [ sum_{i>=0, j>=d_A} |<i|D_A|j>|
//                                        + sum_{i>=0, j>=d_B} |<i|D_B|j>| ].

#include <cmath>
#include <cstddef>

#include "qkdim/errors.hpp"
#include "qkdim/hilbert/linalg.hpp"
#include "qkdim/hilbert/tensor.hpp"

namespace qkdim::hilbert {

/// sum over all rows i and columns j >= cutoff of |D_ij|.
inline double offdiag_abs_sum(const DenseOperator& d, std::size_t cutoff) {
    double s = 0.0;
    for (std::size_t j = cutoff; j < d.dim(); ++j)
        for (std::size_t i = 0; i < d.dim(); ++i) s += std::abs(d(i, j));
    return s;
}

inline double theorem1_rhs(const DenseOperator& dtilde_a, const DenseOperator& dtilde_b,
                           std::size_t cutoff_a, std::size_t cutoff_b, std::size_t n_systems) {
    return static_cast<double>(n_systems) *
           (offdiag_abs_sum(dtilde_a, cutoff_a) + offdiag_abs_sum(dtilde_b, cutoff_b));
}

/// <psi|(D_A (x) D_B)^{(x)N}|psi>; psi must lie in the filter complement.
inline double theorem1_lhs(const PureState& psi, const TensorLayout& layout,
                           const DenseOperator& dtilde_a, const DenseOperator& dtilde_b,
                           std::size_t cutoff_a, std::size_t cutoff_b,
                           double membership_tol = 1e-10) {
    layout.validate();
    if (psi.dim() != layout.total_dim()) {
        throw DimensionMismatch("theorem1_lhs: psi does not match the layout");
    }
    Vector inside = psi.amplitudes();
    apply_each(inside, layout, DenseOperator::basis_projector(layout.dim_a, cutoff_a).matrix(),
               DenseOperator::basis_projector(layout.dim_b, cutoff_b).matrix());
    if (inside.norm() > membership_tol) {
        throw DomainError("theorem1_lhs: state has weight inside the filter range");
    }
    Vector dv = psi.amplitudes();
    apply_each(dv, layout, dtilde_a.matrix(), dtilde_b.matrix());
    return std::max(0.0, psi.amplitudes().dot(dv).real());
}

struct LemmaCheck {
    double lhs = 0.0;    // |<psi|M|phi>|
    double rhs = 0.0;    // sqrt(sum_i a_i^2 |<psi|v_i>|^2)
    double outer = 0.0;  // sqrt(sum_i |<psi|v_i>|^2)
    bool holds = false;  // lhs <= rhs <= outer <= 1 within 1e-10
};

/// Cauchy-Schwarz step of the proof: with M = sum_i a_i |v_i><v_i|,
/// |<psi|M|phi>| <= sqrt(sum a_i^2 |<psi|v_i>|^2) <= sqrt(sum |<psi|v_i>|^2) <= 1.
inline LemmaCheck cauchy_schwarz_lemma_check(const DenseOperator& m, const PureState& psi,
                                             const PureState& phi, double tol = 1e-10) {
    if (m.dim() != psi.dim() || m.dim() != phi.dim()) {
        throw DimensionMismatch("cauchy_schwarz_lemma_check: dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m.matrix() + m.matrix().adjoint()));
    const Eigen::VectorXd& a = es.eigenvalues();
    if (a.maxCoeff() > 1.0 + tol) {
        throw DomainError("cauchy_schwarz_lemma_check: eigenvalue above 1");
    }
    if (a.minCoeff() < -tol) {
        throw DomainError("cauchy_schwarz_lemma_check: operator is not PSD");
    }
    const Vector proj = es.eigenvectors().adjoint() * psi.amplitudes();  // <v_i|psi>
    LemmaCheck out;
    out.lhs = std::abs(psi.amplitudes().dot(m.matrix() * phi.amplitudes()));
    double weighted = 0.0;
    double plain = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        weighted += a(i) * a(i) * std::norm(proj(i));
        plain += std::norm(proj(i));
    }
    out.rhs = std::sqrt(weighted);
    out.outer = std::sqrt(plain);
    out.holds = out.lhs <= out.rhs + tol && out.rhs <= out.outer + tol && out.outer <= 1.0 + tol;
    return out;
}

}  // namespace qkdim::hilbert
