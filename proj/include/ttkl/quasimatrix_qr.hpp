#pragma once

// QR factorizations of quasimatrices. A FunctionMatrix with P rows is read as a
// quasimatrix whose columns are vector-valued functions, so that
// <M_i, M_j> = sum_r integral M(r, i) M(r, j). A 1 x n matrix is the ordinary
// case; a P x n matrix is the same as its rows joined onto [0, P].

#include "ttkl/function_matrix.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace ttkl {

enum class QrMethod { Householder, Cholesky };

struct QrFactors {
    FunctionMatrix q;                          ///< P x k, orthonormal columns
    Eigen::MatrixXd r;                         ///< k x n, upper triangular (trapezoidal)
    std::optional<std::size_t> rank_deficient; ///< first column whose diagonal collapsed
};

inline constexpr double kRankDeficiencyTol = 1e-14;

namespace detail {

// Weighted discretization: row block b holds sqrt(w_p) * M(b, j)(x_p) on a
// Chebyshev grid that integrates products of row-b entries exactly.
struct QrGrid {
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> offsets;
    std::size_t total = 0;
};

inline QrGrid qr_grid(const FunctionMatrix& m) {
    QrGrid g;
    for (std::size_t b = 0; b < m.rows(); ++b) {
        const std::size_t n = product_grid_size(m.row_max_length(b), m.row_max_length(b));
        g.offsets.push_back(g.total);
        g.sizes.push_back(n);
        g.total += n;
    }
    // a tall discretization keeps the thin Householder factor square in R
    if (g.total < m.cols() && !g.sizes.empty()) {
        const std::size_t extra = m.cols() - g.total;
        g.sizes.back() += extra;
        g.total += extra;
    }
    return g;
}

inline Eigen::MatrixXd weighted_samples(const FunctionMatrix& m, const QrGrid& g) {
    const double scale = std::sqrt(0.5 * m.domain().length());
    Eigen::MatrixXd a(g.total, m.cols());
    for (std::size_t b = 0; b < m.rows(); ++b) {
        const auto& w = cheb::cc_weights(g.sizes[b]);
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const auto v = m(b, j).values_on_grid(g.sizes[b]);
            for (std::size_t p = 0; p < g.sizes[b]; ++p)
                a(static_cast<Eigen::Index>(g.offsets[b] + p), static_cast<Eigen::Index>(j)) = scale * std::sqrt(w[p]) * v[p];
        }
    }
    return a;
}

inline std::optional<std::size_t> first_collapsed_diagonal(const Eigen::MatrixXd& r, double rel_tol) {
    const Eigen::Index k = std::min(r.rows(), r.cols());
    double max_diag = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) max_diag = std::max(max_diag, std::abs(r(i, i)));
    for (Eigen::Index i = 0; i < k; ++i) {
        if (!(std::abs(r(i, i)) > rel_tol * max_diag)) return static_cast<std::size_t>(i);
    }
    return std::nullopt;
}

} // namespace detail

/// Householder triangularization of the weighted Chebyshev discretization.
/// Diagonal of R is made non-negative.
inline QrFactors qr_householder(const FunctionMatrix& m) {
    const std::size_t n = m.cols();
    const auto grid = detail::qr_grid(m);
    const Eigen::MatrixXd a = detail::weighted_samples(m, grid);
    Eigen::HouseholderQR<Eigen::MatrixXd> hqr(a);
    Eigen::MatrixXd q = hqr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), static_cast<Eigen::Index>(n));
    Eigen::MatrixXd r = hqr.matrixQR().topRows(static_cast<Eigen::Index>(n)).triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        if (r(i, i) < 0.0) {
            r.row(i) *= -1.0;
            q.col(i) *= -1.0;
        }
    }

    const double scale = std::sqrt(0.5 * m.domain().length());
    std::vector<AdaptiveFunction> entries;
    entries.reserve(m.rows() * n);
    for (std::size_t b = 0; b < m.rows(); ++b) {
        const auto& w = cheb::cc_weights(grid.sizes[b]);
        const std::size_t keep = m.row_max_length(b);
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> v(grid.sizes[b]);
            for (std::size_t p = 0; p < grid.sizes[b]; ++p)
                v[p] = q(static_cast<Eigen::Index>(grid.offsets[b] + p), static_cast<Eigen::Index>(j)) / (scale * std::sqrt(w[p]));
            auto c = cheb::values_to_coeffs(v);
            // span of the inputs has degree below `keep`; the rest is rounding
            if (c.size() > keep) c.resize(keep);
            entries.push_back(AdaptiveFunction::from_raw(m.domain(), std::move(c)));
        }
    }
    return {FunctionMatrix(m.rows(), n, std::move(entries)), r,
            detail::first_collapsed_diagonal(r, kRankDeficiencyTol)};
}

/// Cholesky factorization of the column Gram matrix, Q = M R^{-1} at coefficient level.
/// Valid while the Gram condition number stays below ~1e12. On collapse at column
/// k the factorization is truncated to k columns: Q is P x k and R is k x n.
inline QrFactors qr_cholesky(const FunctionMatrix& m) {
    const Eigen::Index n = static_cast<Eigen::Index>(m.cols());
    const Eigen::MatrixXd gram = column_gram(m);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index k = 0;
    double max_pivot = 0.0;
    std::optional<std::size_t> deficient;
    // row-oriented Cholesky so that a collapse leaves usable leading rows
    for (; k < n; ++k) {
        double d = gram(k, k) - r.col(k).head(k).squaredNorm();
        max_pivot = std::max(max_pivot, d);
        // squared diagonal against squared threshold
        if (!(d > kRankDeficiencyTol * max_pivot) || !(d > 0.0)) {
            deficient = static_cast<std::size_t>(k);
            break;
        }
        r(k, k) = std::sqrt(d);
        for (Eigen::Index j = k + 1; j < n; ++j)
            r(k, j) = (gram(k, j) - r.col(k).head(k).dot(r.col(j).head(k))) / r(k, k);
    }
    const Eigen::Index rank = k;
    Eigen::MatrixXd rk = r.topRows(rank);
    // Q = M[:, 0:rank] R11^{-1}
    Eigen::MatrixXd r11_inv = rk.leftCols(rank).triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(rank, rank));
    FunctionMatrix q = multiply(m.columns(0, static_cast<std::size_t>(rank)), r11_inv);
    return {std::move(q), std::move(rk), deficient};
}

inline QrFactors qr(const FunctionMatrix& m, QrMethod method) {
    return method == QrMethod::Householder ? qr_householder(m) : qr_cholesky(m);
}

} // namespace ttkl
