#pragma once

#include "ttkl/adaptive_function.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace ttkl {

/// Rectangular array of AdaptiveFunction entries over one shared domain (a "chebmatrix").
class FunctionMatrix {
public:
    FunctionMatrix() = default;

    FunctionMatrix(std::size_t rows, std::size_t cols, Interval domain = kUnitInterval)
        : rows_(rows), cols_(cols), domain_(domain),
          entries_(rows * cols, AdaptiveFunction::constant(domain, 0.0)) {}

    FunctionMatrix(std::size_t rows, std::size_t cols, std::vector<AdaptiveFunction> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (entries_.size() != rows_ * cols_) {
            throw ShapeMismatch("function matrix of shape " + std::to_string(rows_) + "x"
                                + std::to_string(cols_) + " built from "
                                + std::to_string(entries_.size()) + " entries");
        }
        if (!entries_.empty()) domain_ = entries_.front().domain();
        for (const auto& e : entries_) {
            if (!(e.domain() == domain_)) throw DomainMismatch("function matrix entries on different domains");
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const Interval& domain() const { return domain_; }

    const AdaptiveFunction& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    void set(std::size_t i, std::size_t j, AdaptiveFunction f) {
        if (!(f.domain() == domain_)) throw DomainMismatch("entry domain differs from matrix domain");
        entries_[i * cols_ + j] = std::move(f);
    }

    const std::vector<AdaptiveFunction>& entries() const { return entries_; }

    std::size_t max_length() const {
        std::size_t n = 1;
        for (const auto& e : entries_) n = std::max(n, e.length());
        return n;
    }

    std::size_t row_max_length(std::size_t i) const {
        std::size_t n = 1;
        for (std::size_t j = 0; j < cols_; ++j) n = std::max(n, (*this)(i, j).length());
        return n;
    }

    Eigen::MatrixXd operator()(double x) const {
        Eigen::MatrixXd m(rows_, cols_);
        const double t = domain_.to_reference(x);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(i, j) = cheb::clenshaw((*this)(i, j).coeffs(), t);
        return m;
    }

    /// Values at the n Chebyshev points of the domain, one matrix per point.
    std::vector<Eigen::MatrixXd> grid_values(std::size_t n) const {
        std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd(rows_, cols_));
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                const auto v = (*this)(i, j).values_on_grid(n);
                for (std::size_t p = 0; p < n; ++p) out[p](i, j) = v[p];
            }
        }
        return out;
    }

    FunctionMatrix transpose() const {
        FunctionMatrix t(cols_, rows_, domain_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t.entries_[j * rows_ + i] = (*this)(i, j);
        return t;
    }

    /// Column j as a rows x 1 matrix.
    FunctionMatrix column(std::size_t j) const {
        FunctionMatrix c(rows_, 1, domain_);
        for (std::size_t i = 0; i < rows_; ++i) c.entries_[i] = (*this)(i, j);
        return c;
    }

    /// Columns [first, first + count).
    FunctionMatrix columns(std::size_t first, std::size_t count) const {
        FunctionMatrix c(rows_, count, domain_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < count; ++j) c.entries_[i * count + j] = (*this)(i, first + j);
        return c;
    }

    /// Entrywise integrals.
    Eigen::MatrixXd integral() const {
        Eigen::MatrixXd m(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(i, j) = integrate((*this)(i, j));
        return m;
    }

    FunctionMatrix with_domain(Interval domain) const {
        FunctionMatrix m = *this;
        m.domain_ = domain;
        for (auto& e : m.entries_) e = e.with_domain(domain);
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Interval domain_ = kUnitInterval;
    std::vector<AdaptiveFunction> entries_;
};

/// Builds a rows x cols FunctionMatrix from a sampler writing row-major values at x.
template <class Sampler>
FunctionMatrix approximate_matrix(Sampler&& sample, std::size_t rows, std::size_t cols,
                                  Interval domain = kUnitInterval, double tol = kDefaultChebTol) {
    return FunctionMatrix(rows, cols, approximate_many(std::forward<Sampler>(sample), rows * cols, domain, tol));
}

/// C * M with a constant matrix C, exact at coefficient level.
inline FunctionMatrix multiply(const Eigen::MatrixXd& c, const FunctionMatrix& m) {
    if (static_cast<std::size_t>(c.cols()) != m.rows()) throw ShapeMismatch("constant * function matrix: inner dimensions differ");
    std::vector<AdaptiveFunction> out;
    out.reserve(c.rows() * m.cols());
    std::vector<const AdaptiveFunction*> column(m.rows());
    std::vector<double> a(m.rows());
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            for (std::size_t k = 0; k < m.rows(); ++k) {
                column[k] = &m(k, j);
                a[k] = c(i, static_cast<Eigen::Index>(k));
            }
            out.push_back(linear_combination(a, column).with_domain(m.domain()));
        }
    }
    return FunctionMatrix(static_cast<std::size_t>(c.rows()), m.cols(), std::move(out));
}

/// M * C with a constant matrix C, exact at coefficient level.
inline FunctionMatrix multiply(const FunctionMatrix& m, const Eigen::MatrixXd& c) {
    if (m.cols() != static_cast<std::size_t>(c.rows())) throw ShapeMismatch("function matrix * constant: inner dimensions differ");
    std::vector<AdaptiveFunction> out;
    out.reserve(m.rows() * c.cols());
    std::vector<const AdaptiveFunction*> row(m.cols());
    std::vector<double> a(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t k = 0; k < m.cols(); ++k) row[k] = &m(i, k);
        for (Eigen::Index j = 0; j < c.cols(); ++j) {
            for (std::size_t k = 0; k < m.cols(); ++k) a[k] = c(static_cast<Eigen::Index>(k), j);
            out.push_back(linear_combination(a, row).with_domain(m.domain()));
        }
    }
    return FunctionMatrix(m.rows(), static_cast<std::size_t>(c.cols()), std::move(out));
}

/// integral of A(x) B(x) over the shared domain, exact for the stored series.
inline Eigen::MatrixXd integrate_product(const FunctionMatrix& a, const FunctionMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("integrate_product: inner dimensions differ");
    if (!(a.domain() == b.domain())) throw DomainMismatch("integrate_product: different domains");
    const std::size_t n = product_grid_size(a.max_length(), b.max_length());
    const auto va = a.grid_values(n);
    const auto vb = b.grid_values(n);
    const auto& w = cheb::cc_weights(n);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(a.rows(), b.cols());
    for (std::size_t p = 0; p < n; ++p) s.noalias() += w[p] * (va[p] * vb[p]);
    return 0.5 * a.domain().length() * s;
}

/// Gram matrix of the columns, each column treated as a vector-valued function:
/// G(i, j) = sum_rows integral M(r, i) M(r, j).
inline Eigen::MatrixXd column_gram(const FunctionMatrix& m) {
    return integrate_product(m.transpose(), m);
}

// ---------------------------------------------------------------------------
// Joined supports

enum class JoinAxis { Rows, Cols };

/// A function matrix whose pieces are concatenated on [0, blocks] by unit affine shifts.
///
/// Joining rows turns an r x c matrix into a 1 x c matrix of functions on [0, r];
/// joining columns turns it into an r x 1 matrix on [0, c]. Piece j occupies
/// [j - 1, j] (1-based); the right end of the last piece belongs to it.
class JoinedMatrix {
public:
    JoinedMatrix(FunctionMatrix blocks, JoinAxis axis) : blocks_(std::move(blocks)), axis_(axis) {}

    const FunctionMatrix& blocks() const { return blocks_; }
    JoinAxis axis() const { return axis_; }
    std::size_t block_count() const { return axis_ == JoinAxis::Rows ? blocks_.rows() : blocks_.cols(); }
    std::size_t rows() const { return axis_ == JoinAxis::Rows ? 1 : blocks_.rows(); }
    std::size_t cols() const { return axis_ == JoinAxis::Rows ? blocks_.cols() : 1; }
    Interval domain() const { return {0.0, static_cast<double>(block_count())}; }

    double operator()(std::size_t i, std::size_t j, double x) const {
        const auto [block, t] = locate(x);
        const auto& piece = axis_ == JoinAxis::Rows ? blocks_(block, j) : blocks_(i, block);
        return piece(blocks_.domain().from_reference(2.0 * t - 1.0));
    }

    Eigen::MatrixXd operator()(double x) const {
        Eigen::MatrixXd m(rows(), cols());
        for (std::size_t i = 0; i < rows(); ++i)
            for (std::size_t j = 0; j < cols(); ++j) m(i, j) = (*this)(i, j, x);
        return m;
    }

private:
    std::pair<std::size_t, double> locate(double x) const {
        const std::size_t nb = block_count();
        double f = std::floor(x);
        if (f < 0.0) f = 0.0;
        std::size_t b = static_cast<std::size_t>(f);
        if (b >= nb) b = nb - 1;
        return {b, x - static_cast<double>(b)};
    }

    FunctionMatrix blocks_;
    JoinAxis axis_;
};

inline JoinedMatrix join_supports(const FunctionMatrix& m, JoinAxis axis = JoinAxis::Rows) {
    return JoinedMatrix(m.with_domain(kUnitInterval), axis);
}

/// Splits a joined matrix back into `blocks` pieces, each re-parameterized to [0, 1].
inline FunctionMatrix disjoin_supports(const JoinedMatrix& joined, std::size_t blocks) {
    if (blocks != joined.block_count()) {
        throw BlockMismatch("cannot split a support of length " + std::to_string(joined.block_count())
                            + " into " + std::to_string(blocks) + " unit blocks");
    }
    return joined.blocks();
}

/// Inner product of joined columns j1 and j2 (rows joined): sum of per-block inner products.
inline double joined_inner_product(const JoinedMatrix& joined, std::size_t j1, std::size_t j2) {
    if (joined.axis() != JoinAxis::Rows) throw ShapeMismatch("joined inner product expects joined rows");
    double s = 0.0;
    for (std::size_t b = 0; b < joined.block_count(); ++b)
        s += inner_product(joined.blocks()(b, j1), joined.blocks()(b, j2));
    return s;
}

} // namespace ttkl
