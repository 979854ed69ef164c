#pragma once

// Directional Karhunen-Loeve modes from a mirrored covariance train.

#include "ttkl/quasimatrix_qr.hpp"
#include "ttkl/ttcross.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ttkl {

/// Kernel K(s, t) = left(s) * right(t), left P x r and right r x P.
struct KernelFactors {
    FunctionMatrix left;
    FunctionMatrix right;
};

struct EigenPairs {
    Eigen::VectorXd values; ///< descending
    FunctionMatrix modes;   ///< P x n, orthonormal columns
};

struct ModeOptions {
    QrMethod qr = QrMethod::Householder;
    double drop_tol = 1e-13;  ///< relative to the largest eigenvalue
    double energy_eps = 0.0;  ///< keep the smallest leading set with mass >= 1 - energy_eps; 0 disables
};

struct DirectionalModes {
    std::size_t m = 1;
    FunctionMatrix f;                 ///< 1 x n1
    std::optional<FunctionMatrix> g;  ///< n1 x n2
    std::optional<FunctionMatrix> h;  ///< n2 x n3
    Eigen::VectorXd eig_f, eig_g, eig_h;

    std::size_t count() const { return m == 1 ? f.cols() : m == 2 ? g->cols() : h->cols(); }
    const Eigen::VectorXd& eigenvalues() const { return m == 1 ? eig_f : m == 2 ? eig_g : eig_h; }

    /// Keeps the first n product modes (the last direction is cut).
    DirectionalModes truncated(std::size_t n) const {
        DirectionalModes d = *this;
        const Eigen::Index k = static_cast<Eigen::Index>(std::min(n, count()));
        if (m == 1) {
            d.f = f.columns(0, static_cast<std::size_t>(k));
            d.eig_f = eig_f.head(k).eval();
        } else if (m == 2) {
            d.g = g->columns(0, static_cast<std::size_t>(k));
            d.eig_g = eig_g.head(k).eval();
        } else {
            d.h = h->columns(0, static_cast<std::size_t>(k));
            d.eig_h = eig_h.head(k).eval();
        }
        return d;
    }

    /// F(xi) = f(xi) g(eta) h(zeta), a row of count() product modes.
    Eigen::RowVectorXd row(std::span<const double> xi) const {
        Eigen::RowVectorXd v = f(xi[0]);
        if (m > 1) v = v * (*g)(xi[1]);
        if (m > 2) v = v * (*h)(xi[2]);
        return v;
    }
};

namespace detail {

// Flip each column so that its largest-magnitude sample is positive.
inline FunctionMatrix fix_signs(const FunctionMatrix& modes) {
    const std::size_t n = std::max<std::size_t>(129, modes.max_length() + 1);
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(modes.cols()), static_cast<Eigen::Index>(modes.cols()));
    for (std::size_t j = 0; j < modes.cols(); ++j) {
        double best = 0.0;
        for (std::size_t i = 0; i < modes.rows(); ++i)
            for (double v : modes(i, j).values_on_grid(n))
                if (std::abs(v) > std::abs(best)) best = v;
        if (best < 0.0) s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = -1.0;
    }
    return multiply(modes, s);
}

} // namespace detail

/// Eigenpairs of a separable kernel via two quasimatrix QRs and an SVD of the small core.
inline EigenPairs eigpairs_bivariate(const KernelFactors& kf, const ModeOptions& opt = {}) {
    if (kf.left.cols() != kf.right.rows() || kf.left.rows() != kf.right.cols())
        throw ShapeMismatch("kernel factors do not conform");
    const QrFactors ql = qr(kf.left, opt.qr);
    const QrFactors qrr = qr(kf.right.transpose(), opt.qr);
    const Eigen::MatrixXd core = ql.r * qrr.r.transpose();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(core, Eigen::ComputeThinU);
    const Eigen::VectorXd s = svd.singularValues();
    std::size_t keep = 0;
    const double smax = s.size() > 0 ? s(0) : 0.0;
    while (keep < static_cast<std::size_t>(s.size()) && s(static_cast<Eigen::Index>(keep)) >= opt.drop_tol * smax && smax > 0.0) ++keep;
    if (opt.energy_eps > 0.0 && keep > 0) {
        const double total = s.head(static_cast<Eigen::Index>(keep)).sum();
        double acc = 0.0;
        std::size_t k = 0;
        while (k < keep && acc < (1.0 - opt.energy_eps) * total) acc += s(static_cast<Eigen::Index>(k++));
        keep = k;
    }
    if (keep == 0) throw NoneRetained("kernel has no eigenvalue above the drop tolerance");
    const Eigen::MatrixXd u = svd.matrixU().leftCols(static_cast<Eigen::Index>(keep));
    return {s.head(static_cast<Eigen::Index>(keep)), detail::fix_signs(multiply(ql.q, u))};
}

/// xi-kernel of a 2-core train: M1 = G1, M2 = G2.
inline KernelFactors marginal_kernel_1d(const FunctionTrain& t) {
    if (t.dim() != 2) throw ShapeMismatch("expected a two-core train");
    return {t.core(0), t.core(1)};
}

/// M1 = G1 * int G2 G3, M2 = G4.
inline KernelFactors marginal_kernel_2d(const FunctionTrain& t) {
    if (t.dim() != 4) throw ShapeMismatch("expected a four-core mirrored train");
    return {multiply(t.core(0), integrate_product(t.core(1), t.core(2))), t.core(3)};
}

/// M3 = (int f^T G1) G2, M4 = G3 (int G4 f).
inline KernelFactors second_kernel_2d(const FunctionTrain& t, const FunctionMatrix& f) {
    if (t.dim() != 4) throw ShapeMismatch("expected a four-core mirrored train");
    const Eigen::MatrixXd l = integrate_product(f.transpose(), t.core(0));
    const Eigen::MatrixXd r = integrate_product(t.core(3), f);
    return {multiply(l, t.core(1)), multiply(t.core(2), r)};
}

/// M1 = G1 int G2 (int G3 G4) G5, M2 = G6.
inline KernelFactors marginal_kernel_3d(const FunctionTrain& t) {
    if (t.dim() != 6) throw ShapeMismatch("expected a six-core mirrored train");
    const Eigen::MatrixXd w34 = integrate_product(t.core(2), t.core(3));
    const Eigen::MatrixXd w = integrate_product(multiply(t.core(1), w34), t.core(4));
    return {multiply(t.core(0), w), t.core(5)};
}

inline DirectionalModes modes_1d(const FunctionTrain& t, const ModeOptions& opt = {}) {
    auto ep = eigpairs_bivariate(marginal_kernel_1d(t), opt);
    DirectionalModes d;
    d.m = 1;
    d.f = std::move(ep.modes);
    d.eig_f = std::move(ep.values);
    return d;
}

inline DirectionalModes modes_2d(const FunctionTrain& t, const ModeOptions& opt = {}) {
    DirectionalModes d;
    d.m = 2;
    auto ef = eigpairs_bivariate(marginal_kernel_2d(t), opt);
    d.f = std::move(ef.modes);
    d.eig_f = std::move(ef.values);
    // an n1-row factor is the joined quasimatrix on [0, n1]; its modes come back in n1 blocks
    auto eg = eigpairs_bivariate(second_kernel_2d(t, d.f), opt);
    d.g = disjoin_supports(join_supports(eg.modes, JoinAxis::Rows), d.f.cols());
    d.eig_g = std::move(eg.values);
    return d;
}

inline DirectionalModes modes_3d(const FunctionTrain& t, const ModeOptions& opt = {}) {
    DirectionalModes d;
    d.m = 3;
    auto ef = eigpairs_bivariate(marginal_kernel_3d(t), opt);
    d.f = std::move(ef.modes);
    d.eig_f = std::move(ef.values);

    const Eigen::MatrixXd l1 = integrate_product(d.f.transpose(), t.core(0)); // n1 x r1
    const Eigen::MatrixXd r1 = integrate_product(t.core(5), d.f);             // r5 x n1
    const Eigen::MatrixXd w34 = integrate_product(t.core(2), t.core(3));      // r2 x r4
    const FunctionMatrix l1g2 = multiply(l1, t.core(1));                       // n1 x r2
    const FunctionMatrix g5r1 = multiply(t.core(4), r1);                       // r4 x n1
    auto eg = eigpairs_bivariate({multiply(l1g2, w34), g5r1}, opt);
    d.g = disjoin_supports(join_supports(eg.modes, JoinAxis::Rows), d.f.cols());
    d.eig_g = std::move(eg.values);

    const Eigen::MatrixXd l2 = integrate_product(d.g->transpose(), l1g2); // n2 x r2
    const Eigen::MatrixXd r2 = integrate_product(g5r1, *d.g);             // r4 x n2
    auto eh = eigpairs_bivariate({multiply(l2, t.core(2)), multiply(t.core(3), r2)}, opt);
    d.h = disjoin_supports(join_supports(eh.modes, JoinAxis::Rows), d.g->cols());
    d.eig_h = std::move(eh.values);
    return d;
}

/// Dispatch on the parametric dimension m = a / 2.
inline DirectionalModes compute_modes(const FunctionTrain& t, const ModeOptions& opt = {}) {
    switch (t.dim()) {
    case 2: return modes_1d(t, opt);
    case 4: return modes_2d(t, opt);
    case 6: return modes_3d(t, opt);
    default: throw ShapeMismatch("covariance train must have 2, 4 or 6 cores");
    }
}

/// sum_k lambda_k F_k(p) F_k(q) with the last direction's eigenvalues.
inline double reconstruct_covariance(const DirectionalModes& modes, const Eigen::VectorXd& eigenvalues,
                                     std::span<const double> p, std::span<const double> q) {
    const Eigen::RowVectorXd fp = modes.row(p), fq = modes.row(q);
    return (fp.array() * eigenvalues.transpose().array() * fq.array()).sum();
}

/// Gram matrix of the product modes on [0,1]^m; identity for orthonormal modes.
inline Eigen::MatrixXd product_mode_gram(const DirectionalModes& modes) {
    Eigen::MatrixXd gf = column_gram(modes.f);
    if (modes.m == 1) return gf;
    // <f g_i, f g_j> = sum_ab g_ai g_bj <f_a, f_b>
    const Eigen::MatrixXd gg = integrate_product(modes.g->transpose(), multiply(gf, *modes.g));
    if (modes.m == 2) return gg;
    return integrate_product(modes.h->transpose(), multiply(gg, *modes.h));
}

} // namespace ttkl
