#pragma once

// Third cumulant of the latent factors in contracted-core form, its HOSVD
// compression, and the final expansion.

#include "ttkl/klmodes.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ttkl {

/// Dense third-order tensor, index (a, j, c) stored with c fastest.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t d0, std::size_t d1, std::size_t d2) : d_{d0, d1, d2}, data_(d0 * d1 * d2, 0.0) {}

    std::size_t dim(std::size_t k) const { return d_[k]; }
    double& operator()(std::size_t a, std::size_t j, std::size_t c) { return data_[(a * d_[1] + j) * d_[2] + c]; }
    double operator()(std::size_t a, std::size_t j, std::size_t c) const { return data_[(a * d_[1] + j) * d_[2] + c]; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    /// Lateral slice (:, j, :) as a d0 x d2 matrix.
    Eigen::MatrixXd slice(std::size_t j) const {
        Eigen::MatrixXd s(static_cast<Eigen::Index>(d_[0]), static_cast<Eigen::Index>(d_[2]));
        for (std::size_t a = 0; a < d_[0]; ++a)
            for (std::size_t c = 0; c < d_[2]; ++c) s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = (*this)(a, j, c);
        return s;
    }
    void set_slice(std::size_t j, const Eigen::MatrixXd& s) {
        for (std::size_t a = 0; a < d_[0]; ++a)
            for (std::size_t c = 0; c < d_[2]; ++c) (*this)(a, j, c) = s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
    }

    double frobenius() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

private:
    std::array<std::size_t, 3> d_{0, 0, 0};
    std::vector<double> data_;
};

/// Cores A_1, A_2, A_3 with C3 = A_1 x^1 A_2 x^1 A_3.
struct LatentCumulant3 {
    std::array<Tensor3, 3> cores;

    std::size_t latent() const { return cores[0].dim(1); }

    /// Dense n x n x n expansion (small n only).
    Tensor3 dense() const {
        const std::size_t n = latent();
        Tensor3 t(n, n, n);
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::RowVectorXd a = cores[0].slice(i);
            for (std::size_t j = 0; j < n; ++j) {
                const Eigen::RowVectorXd ab = a * cores[1].slice(j);
                for (std::size_t k = 0; k < n; ++k) t(i, j, k) = (ab * cores[2].slice(k))(0);
            }
        }
        return t;
    }
};

/// Compressed basis and the spectra it was chosen from.
struct Compression {
    Eigen::MatrixXd u3;      ///< latent x n
    Eigen::MatrixXd u;       ///< full eigenbasis of the mode-1 Gram matrix
    double tol3 = 0.0;
    Eigen::VectorXd lambda2; ///< latent covariance spectrum
    Eigen::VectorXd lambda3; ///< mode-1 singular values, descending

    std::size_t retained() const { return static_cast<std::size_t>(u3.cols()); }
};

enum class SpectrumRatio {
    Projected, ///< ||U3^T diag(l3) U3||_F / ||U^T diag(l3) U||_F with diag(l3) in the latent basis
    Energy,    ///< ||l3(1:n)||_2 / ||l3||_2
};

namespace detail {

// Quadrature grid on [0,1] exact for products of series of the given lengths.
inline std::vector<double> product_weights(std::size_t n) {
    std::vector<double> w = cheb::cc_weights(n);
    for (double& v : w) v *= 0.5;
    return w;
}

// One projection level: T_new(:, j, :) = int sum_b phi(b, j)(x) T(:, b, :) G(x) dx.
inline Tensor3 project_level(const Tensor3& t, const FunctionMatrix& phi, const FunctionMatrix& core) {
    const std::size_t rl = t.dim(0), nb = t.dim(1), rm = t.dim(2);
    if (phi.rows() != nb || core.rows() != rm) throw ShapeMismatch("projection level shapes disagree");
    const std::size_t nj = phi.cols(), rr = core.cols();
    const std::size_t np = product_grid_size(phi.max_length(), core.max_length());
    const auto pv = phi.grid_values(np);
    const auto gv = core.grid_values(np);
    const auto w = product_weights(np);
    // rows (b, a), columns m
    Eigen::MatrixXd tm(static_cast<Eigen::Index>(nb * rl), static_cast<Eigen::Index>(rm));
    for (std::size_t a = 0; a < rl; ++a)
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t m = 0; m < rm; ++m) tm(static_cast<Eigen::Index>(b * rl + a), static_cast<Eigen::Index>(m)) = t(a, b, m);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nj * rl), static_cast<Eigen::Index>(rr));
    for (std::size_t p = 0; p < np; ++p) {
        const Eigen::MatrixXd y = tm * gv[p]; // (b, a) x c
        for (std::size_t j = 0; j < nj; ++j)
            for (std::size_t b = 0; b < nb; ++b) {
                const double c = w[p] * pv[p](static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
                if (c == 0.0) continue;
                acc.middleRows(static_cast<Eigen::Index>(j * rl), static_cast<Eigen::Index>(rl)).noalias() +=
                    c * y.middleRows(static_cast<Eigen::Index>(b * rl), static_cast<Eigen::Index>(rl));
            }
    }
    Tensor3 out(rl, nj, rr);
    for (std::size_t a = 0; a < rl; ++a)
        for (std::size_t j = 0; j < nj; ++j)
            for (std::size_t c = 0; c < rr; ++c) out(a, j, c) = acc(static_cast<Eigen::Index>(j * rl + a), static_cast<Eigen::Index>(c));
    return out;
}

} // namespace detail

/// Latent-factor cores from a blocked third-cumulant train (3m cores) and orthonormal modes.
inline LatentCumulant3 project_third_cumulant(const FunctionTrain& train3, const DirectionalModes& modes) {
    const std::size_t m = modes.m;
    if (train3.dim() != 3 * m) throw ShapeMismatch("third cumulant train must have 3m cores");
    LatentCumulant3 lc;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t rl = train3.core(m * i).rows();
        // identity seed: T(a, 0, a') = delta(a, a')
        Tensor3 t(rl, 1, rl);
        for (std::size_t a = 0; a < rl; ++a) t(a, 0, a) = 1.0;
        t = detail::project_level(t, modes.f, train3.core(m * i));
        if (m > 1) t = detail::project_level(t, *modes.g, train3.core(m * i + 1));
        if (m > 2) t = detail::project_level(t, *modes.h, train3.core(m * i + 2));
        lc.cores[i] = std::move(t);
    }
    return lc;
}

/// C3_(1) C3_(1)^T by the decoupled nested sums over the cores.
inline Eigen::MatrixXd gram_mode1(const LatentCumulant3& lc) {
    const auto& a1 = lc.cores[0];
    const auto& a2 = lc.cores[1];
    const auto& a3 = lc.cores[2];
    const std::size_t n = lc.latent();
    Eigen::MatrixXd w3 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a3.dim(0)), static_cast<Eigen::Index>(a3.dim(0)));
    for (std::size_t k = 0; k < a3.dim(1); ++k) {
        const Eigen::MatrixXd s = a3.slice(k);
        w3.noalias() += s * s.transpose();
    }
    Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a2.dim(0)), static_cast<Eigen::Index>(a2.dim(0)));
    for (std::size_t j = 0; j < a2.dim(1); ++j) {
        const Eigen::MatrixXd s = a2.slice(j);
        w2.noalias() += s * w3 * s.transpose();
    }
    Eigen::MatrixXd a1u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(a1.dim(2)));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < a1.dim(2); ++c) a1u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = a1(0, j, c);
    const Eigen::MatrixXd g = a1u * w2 * a1u.transpose();
    return 0.5 * (g + g.transpose());
}

/// Smallest n whose leading HOSVD basis keeps both spectra above tol3.
inline Compression hosvd_truncate(const Eigen::MatrixXd& gram, const Eigen::VectorXd& lambda2, double tol3,
                                  SpectrumRatio ratio = SpectrumRatio::Energy) {
    if (!(tol3 > 0.0 && tol3 < 1.0)) throw ConfigError("tol3 must lie in (0, 1)");
    if (gram.rows() != lambda2.size()) throw ShapeMismatch("gram and lambda2 sizes differ");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    Compression c;
    c.tol3 = tol3;
    c.lambda2 = lambda2;
    c.u = es.eigenvectors().rowwise().reverse();
    c.lambda3 = es.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Index total = gram.rows();
    const double l2_norm = lambda2.norm();
    const Eigen::MatrixXd l3_full = c.u.transpose() * c.lambda3.asDiagonal() * c.u;
    const double l3_norm = ratio == SpectrumRatio::Projected ? l3_full.norm() : c.lambda3.norm();
    for (Eigen::Index n = 1; n <= total; ++n) {
        const Eigen::MatrixXd u3 = c.u.leftCols(n);
        const double r1 = (u3.transpose() * lambda2.asDiagonal() * u3).norm() / l2_norm;
        const double r2 = ratio == SpectrumRatio::Projected
                              ? (u3.transpose() * c.lambda3.asDiagonal() * u3).norm() / l3_norm
                              : c.lambda3.head(n).norm() / l3_norm;
        if (std::min(r1, r2) > tol3) {
            c.u3 = u3;
            return c;
        }
    }
    throw NoneRetained("no basis size satisfies tol3 = " + std::to_string(tol3));
}

/// A'(a, :, c) = A(a, :, c) U3 for each core.
inline LatentCumulant3 transform_cores(const LatentCumulant3& lc, const Eigen::MatrixXd& u3) {
    LatentCumulant3 out;
    if (static_cast<std::size_t>(u3.rows()) != lc.latent()) throw ShapeMismatch("U3 rows differ from latent count");
    const std::size_t n = static_cast<std::size_t>(u3.cols());
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& a = lc.cores[i];
        Tensor3 t(a.dim(0), n, a.dim(2));
        for (std::size_t r = 0; r < a.dim(0); ++r)
            for (std::size_t c = 0; c < a.dim(2); ++c)
                for (std::size_t j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t b = 0; b < a.dim(1); ++b) s += a(r, b, c) * u3(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
                    t(r, j, c) = s;
                }
        out.cores[i] = std::move(t);
    }
    return out;
}

/// Dense T x_1 M^T x_2 M^T x_3 M^T.
inline Tensor3 three_mode_product(const Tensor3& t, const Eigen::MatrixXd& m) {
    const std::size_t n = t.dim(0), k = static_cast<std::size_t>(m.cols());
    auto step = [&](const Tensor3& in, std::size_t mode) {
        std::array<std::size_t, 3> d{in.dim(0), in.dim(1), in.dim(2)};
        d[mode] = k;
        Tensor3 out(d[0], d[1], d[2]);
        for (std::size_t a = 0; a < d[0]; ++a)
            for (std::size_t b = 0; b < d[1]; ++b)
                for (std::size_t c = 0; c < d[2]; ++c) {
                    double s = 0.0;
                    for (std::size_t q = 0; q < n; ++q) {
                        const std::array<std::size_t, 3> idx{mode == 0 ? q : a, mode == 1 ? q : b, mode == 2 ? q : c};
                        const std::size_t col = mode == 0 ? a : mode == 1 ? b : c;
                        s += in(idx[0], idx[1], idx[2]) * m(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(col));
                    }
                    out(a, b, c) = s;
                }
        return out;
    };
    return step(step(step(t, 0), 1), 2);
}

/// Largest deviation of a dense tensor from its index permutations.
inline double supersymmetry_defect(const Tensor3& t) {
    const std::size_t n = t.dim(0);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                const double v = t(i, j, k);
                for (double w : {t(i, k, j), t(j, i, k), t(j, k, i), t(k, i, j), t(k, j, i)}) d = std::max(d, std::abs(v - w));
            }
    return d;
}

/// Composite modes, latent covariance and compressed third cumulant.
struct FinalExpansion {
    DirectionalModes modes;
    Eigen::MatrixXd u3;                  ///< identity when uncompressed
    Eigen::VectorXd lambda2;
    Eigen::MatrixXd cum2;                ///< U3^T diag(lambda2) U3
    std::optional<LatentCumulant3> cum3; ///< compressed cores
    Eigen::VectorXd lambda3;

    std::size_t latent() const { return static_cast<std::size_t>(u3.cols()); }

    /// F(xi) = f g h U3
    Eigen::RowVectorXd row(std::span<const double> xi) const { return modes.row(xi) * u3; }
};

inline FinalExpansion assemble_final(const DirectionalModes& modes, const std::optional<Compression>& compression,
                                     const std::optional<LatentCumulant3>& lc) {
    FinalExpansion fe;
    fe.modes = modes;
    fe.lambda2 = modes.eigenvalues();
    const Eigen::Index n = fe.lambda2.size();
    fe.u3 = compression ? compression->u3 : Eigen::MatrixXd::Identity(n, n);
    if (compression) fe.lambda3 = compression->lambda3;
    fe.cum2 = fe.u3.transpose() * fe.lambda2.asDiagonal() * fe.u3;
    fe.cum2 = 0.5 * (fe.cum2 + fe.cum2.transpose()).eval();
    if (lc) fe.cum3 = compression ? transform_cores(*lc, fe.u3) : *lc;
    return fe;
}

/// F(p) Cum2 F(q)^T
inline double eval_cumulant2_reduced(const FinalExpansion& fe, std::span<const double> p, std::span<const double> q) {
    return (fe.row(p) * fe.cum2 * fe.row(q).transpose())(0);
}

/// Contracted cores hit with F at each point, chained left to right.
inline double eval_cumulant3_reduced(const FinalExpansion& fe, std::span<const double> p1, std::span<const double> p2,
                                     std::span<const double> p3) {
    if (!fe.cum3) return 0.0;
    const std::array<Eigen::RowVectorXd, 3> v{fe.row(p1), fe.row(p2), fe.row(p3)};
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Ones(1);
    for (std::size_t i = 0; i < 3; ++i) {
        const Tensor3& a = fe.cum3->cores[i];
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.dim(0)), static_cast<Eigen::Index>(a.dim(2)));
        for (std::size_t r = 0; r < a.dim(0); ++r)
            for (std::size_t j = 0; j < a.dim(1); ++j) {
                const double w = v[i](static_cast<Eigen::Index>(j));
                for (std::size_t c = 0; c < a.dim(2); ++c) s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += w * a(r, j, c);
            }
        acc = acc * s;
    }
    return acc(0);
}

} // namespace ttkl
