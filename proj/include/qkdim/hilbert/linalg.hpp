#pragma once

// Dense operators and state vectors on small finite Hilbert spaces.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qkdim/errors.hpp"

namespace qkdim::hilbert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

/// dim x dim complex matrix. Density matrices, POVM elements and projectors
/// are all DenseOperators; the validate_* members check the relevant role.
class DenseOperator {
public:
    DenseOperator() = default;
    explicit DenseOperator(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw DimensionMismatch("DenseOperator: matrix must be square and non-empty");
        }
    }

    static DenseOperator identity(std::size_t dim) {
        return DenseOperator(Matrix::Identity(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim)));
    }
    static DenseOperator zero(std::size_t dim) {
        return DenseOperator(Matrix::Zero(static_cast<Eigen::Index>(dim),
                                          static_cast<Eigen::Index>(dim)));
    }
    /// Projector onto the first `keep` basis vectors.
    static DenseOperator basis_projector(std::size_t dim, std::size_t keep) {
        Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < std::min(keep, dim); ++i) {
            p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
        }
        return DenseOperator(std::move(p));
    }

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    [[nodiscard]] const Matrix& matrix() const { return m_; }
    [[nodiscard]] Complex operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    [[nodiscard]] Complex trace() const { return m_.trace(); }

    [[nodiscard]] bool is_hermitian(double tol = kHermitianTol) const {
        return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
    }

    /// Eigenvalues in ascending order; requires a Hermitian operator.
    [[nodiscard]] Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(), Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    void validate_density(double tol = kPsdTol) const {
        if (!is_hermitian(std::max(tol, kHermitianTol))) {
            throw DomainError("density matrix is not Hermitian");
        }
        if (std::abs(trace() - Complex(1.0)) > tol) {
            throw DomainError("density matrix does not have unit trace");
        }
        if (eigenvalues().minCoeff() < -tol) {
            throw DomainError("density matrix is not positive semidefinite");
        }
    }

    void validate_povm_element(double tol = kPsdTol) const {
        if (!is_hermitian(std::max(tol, kHermitianTol))) {
            throw DomainError("POVM element is not Hermitian");
        }
        const auto ev = eigenvalues();
        if (ev.minCoeff() < -tol || ev.maxCoeff() > 1.0 + tol) {
            throw DomainError("POVM element spectrum leaves [0, 1]");
        }
    }

    [[nodiscard]] bool is_projector(double tol = kPsdTol) const {
        return is_hermitian(tol) && (m_ * m_ - m_).cwiseAbs().maxCoeff() <= tol;
    }

    DenseOperator operator+(const DenseOperator& o) const { return DenseOperator(m_ + o.m_); }
    DenseOperator operator-(const DenseOperator& o) const { return DenseOperator(m_ - o.m_); }

private:
    [[nodiscard]] Matrix hermitian_part() const { return 0.5 * (m_ + m_.adjoint()); }

    Matrix m_;
};

/// Unit vector.
class PureState {
public:
    PureState() = default;
    explicit PureState(Vector v, double tol = 1e-12) : v_(std::move(v)) {
        if (v_.size() == 0) {
            throw DimensionMismatch("PureState: empty amplitude vector");
        }
        if (std::abs(v_.norm() - 1.0) > tol) {
            throw DomainError("PureState: amplitudes are not normalized");
        }
    }
    /// Normalizes `v`; fails if its norm is below `min_norm`.
    static PureState normalized(const Vector& v, double min_norm = 1e-14) {
        const double n = v.norm();
        if (!(n > min_norm)) {
            throw DegenerateError("PureState: cannot normalize a (near-)zero vector");
        }
        return PureState(v / n);
    }

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }
    [[nodiscard]] const Vector& amplitudes() const { return v_; }

    [[nodiscard]] DenseOperator projector() const {
        return DenseOperator(v_ * v_.adjoint());
    }

private:
    Vector v_;
};

/// Principal square root of a PSD operator; eigenvalues in [-clamp, 0) are
/// treated as zero, anything more negative is an error.
inline DenseOperator psd_sqrt(const DenseOperator& op, double clamp = 1e-12) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (op.matrix() + op.matrix().adjoint()));
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -std::max(clamp, kPsdTol)) {
        throw DomainError("psd_sqrt: operator is not positive semidefinite");
    }
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
    }
    const Matrix& u = es.eigenvectors();
    return DenseOperator(u * ev.cast<Complex>().asDiagonal() * u.adjoint());
}

/// Trace norm of a - b: sum of |eigenvalues|. Ranges over [0, 2] for states.
inline double trace_distance(const DenseOperator& a, const DenseOperator& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("trace_distance: dimension mismatch");
    }
    const Matrix diff = a.matrix() - b.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

/// 2 sqrt(1 - |<p1|p2>|^2), the trace distance of the two projectors.
inline double pure_state_distance(const PureState& p1, const PureState& p2) {
    if (p1.dim() != p2.dim()) {
        throw DimensionMismatch("pure_state_distance: dimension mismatch");
    }
    // sqrt(1 - |<a|b>|^2) is the norm of b's component orthogonal to a; taking
    // it directly avoids the cancellation in 1 - |<a|b>|^2 near coincidence.
    const auto& a = p1.amplitudes();
    const auto& b = p2.amplitudes();
    const Vector orth = b - a * a.dot(b);
    return 2.0 * std::min(1.0, orth.norm());
}

/// Partial trace of an operator on a tensor product with site dimensions
/// `dims` (site 0 most significant), keeping the sites flagged in `keep`.
inline DenseOperator partial_trace(const DenseOperator& op, const std::vector<std::size_t>& dims,
                                   const std::vector<bool>& keep) {
    if (dims.size() != keep.size()) {
        throw DimensionMismatch("partial_trace: dims/keep size mismatch");
    }
    std::size_t total = 1;
    std::size_t kept = 1;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        total *= dims[s];
        if (keep[s]) kept *= dims[s];
    }
    if (total != op.dim()) {
        throw DimensionMismatch("partial_trace: dims do not multiply to the operator dimension");
    }
    // Split each flat index into (kept index, traced index).
    std::vector<std::size_t> kept_of(total);
    std::vector<std::size_t> traced_of(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        std::size_t k = 0;
        std::size_t t = 0;
        std::size_t kmul = 1;
        std::size_t tmul = 1;
        for (std::size_t s = dims.size(); s-- > 0;) {
            const std::size_t digit = rem % dims[s];
            rem /= dims[s];
            if (keep[s]) {
                k += digit * kmul;
                kmul *= dims[s];
            } else {
                t += digit * tmul;
                tmul *= dims[s];
            }
        }
        kept_of[idx] = k;
        traced_of[idx] = t;
    }
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(kept));
    const Matrix& m = op.matrix();
    for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t j = 0; j < total; ++j) {
            if (traced_of[i] == traced_of[j]) {
                out(static_cast<Eigen::Index>(kept_of[i]), static_cast<Eigen::Index>(kept_of[j])) +=
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
    }
    return DenseOperator(std::move(out));
}

}  // namespace qkdim::hilbert
