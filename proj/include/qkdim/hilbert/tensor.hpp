#pragma once

// Layout of (A (x) B)^{(x) N} (x) E and local operator application on it.

#include <cstddef>
#include <string>
#include <vector>

#include "qkdim/errors.hpp"
#include "qkdim/hilbert/linalg.hpp"

namespace qkdim::hilbert {

inline constexpr std::size_t kDefaultTensorBudget = 4096;

/// Sites are ordered A_1, B_1, A_2, B_2, ..., A_N, B_N, E with site 0 the
/// most significant digit of the flat index.
struct TensorLayout {
    std::size_t n_systems = 1;
    std::size_t dim_a = 2;
    std::size_t dim_b = 2;
    std::size_t dim_e = 1;

    [[nodiscard]] std::size_t site_count() const { return 2 * n_systems + 1; }
    [[nodiscard]] std::size_t site_a(std::size_t k) const { return 2 * k; }
    [[nodiscard]] std::size_t site_b(std::size_t k) const { return 2 * k + 1; }
    [[nodiscard]] std::size_t site_e() const { return 2 * n_systems; }

    [[nodiscard]] std::vector<std::size_t> site_dims() const {
        std::vector<std::size_t> dims;
        dims.reserve(site_count());
        for (std::size_t k = 0; k < n_systems; ++k) {
            dims.push_back(dim_a);
            dims.push_back(dim_b);
        }
        dims.push_back(dim_e);
        return dims;
    }

    [[nodiscard]] std::size_t total_dim() const {
        std::size_t t = dim_e;
        for (std::size_t k = 0; k < n_systems; ++k) t *= dim_a * dim_b;
        return t;
    }

    void validate(std::size_t budget = kDefaultTensorBudget) const {
        if (n_systems < 1 || dim_a < 1 || dim_b < 1 || dim_e < 1) {
            throw DomainError("TensorLayout: all dimensions and N must be >= 1");
        }
        // Overflow-safe budget check.
        std::size_t t = dim_e;
        for (std::size_t k = 0; k < n_systems; ++k) {
            t *= dim_a * dim_b;
            if (t > budget) {
                throw BudgetExceeded("tensor space exceeds the simulation budget of " +
                                     std::to_string(budget));
            }
        }
        if (t > budget) {
            throw BudgetExceeded("tensor space exceeds the simulation budget of " +
                                 std::to_string(budget));
        }
    }
};

/// v <- (I (x) ... (x) op_site (x) ... (x) I) v.
inline void apply_local(Vector& v, const std::vector<std::size_t>& dims, std::size_t site,
                        const Matrix& op) {
    std::size_t outer = 1;
    std::size_t inner = 1;
    for (std::size_t s = 0; s < site; ++s) outer *= dims[s];
    for (std::size_t s = site + 1; s < dims.size(); ++s) inner *= dims[s];
    const auto d = static_cast<Eigen::Index>(dims[site]);
    if (op.rows() != d || op.cols() != d) {
        throw DimensionMismatch("apply_local: operator does not match the site dimension");
    }
    if (static_cast<std::size_t>(v.size()) != outer * dims[site] * inner) {
        throw DimensionMismatch("apply_local: vector does not match the layout");
    }
    const auto in = static_cast<Eigen::Index>(inner);
    const Matrix op_t = op.transpose();
    for (std::size_t o = 0; o < outer; ++o) {
        // Column-major view: block(i, j) = v[o*d*inner + j*inner + i].
        Eigen::Map<Matrix> block(v.data() + static_cast<Eigen::Index>(o) * d * in, in, d);
        block = (block * op_t).eval();
    }
}

/// Applies op_a on every A site and op_b on every B site.
inline void apply_each(Vector& v, const TensorLayout& layout, const Matrix& op_a,
                       const Matrix& op_b) {
    const auto dims = layout.site_dims();
    for (std::size_t k = 0; k < layout.n_systems; ++k) {
        apply_local(v, dims, layout.site_a(k), op_a);
        apply_local(v, dims, layout.site_b(k), op_b);
    }
}

/// Applies op_a on every A site and op_b on every B site to each column of m.
inline Matrix apply_each_left(Matrix m, const TensorLayout& layout, const Matrix& op_a,
                              const Matrix& op_b) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Vector col = m.col(c);
        apply_each(col, layout, op_a, op_b);
        m.col(c) = col;
    }
    return m;
}

}  // namespace qkdim::hilbert
