#pragma once

// Global random tests and brute-force reference solvers.

#include "ttkl/cumulant.hpp"
#include "ttkl/error.hpp"
#include "ttkl/kernels.hpp"
#include "ttkl/qmc.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <utility>
#include <span>
#include <string>
#include <vector>

namespace ttkl {

struct ErrorReport {
    std::string metric;
    std::size_t n = 0;
    double value = 0.0;
    std::uint64_t seed = 0;
    double seconds = 0.0;
};

using PointFunction = std::function<double(std::span<const double>)>;

/// Relative RMS discrepancy over N scrambled Halton points of [0,1]^a.
inline ErrorReport global_relative_error(const PointFunction& reference, const PointFunction& approx, std::size_t a,
                                         std::size_t n, std::uint64_t seed, std::string metric = "eps_g") {
    const auto t0 = std::chrono::steady_clock::now();
    const qmc::Halton h(a, qmc::mix_seed(seed, 0x7e57));
    std::vector<double> u(a);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        h.point(i, u.data());
        const double r = reference(u);
        const double d = r - approx(u);
        num += d * d;
        den += r * r;
    }
    if (den == 0.0) throw ZeroReference("reference vanishes at every test point");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(metric), n, std::sqrt(num / den), seed, secs};
}

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0,1] by Newton iteration on P_n.
inline Quadrature gauss_legendre(std::size_t n) {
    Quadrature q{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.nodes[i] = 0.5 * (1.0 - x);
        q.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        q.weights[i] = q.weights[n - 1 - i] = 0.5 * w;
    }
    return q;
}

/// Kernel of two parametric points, each of length m.
using BivariateKernel = std::function<double(std::span<const double>, std::span<const double>)>;

struct NystromResult {
    std::size_t m = 1;
    Eigen::VectorXd values;      ///< descending
    Eigen::MatrixXd nodes;       ///< points x m
    Eigen::VectorXd weights;
    Eigen::MatrixXd vectors;     ///< nodal eigenfunction values, sum_j w_j v_j^2 = 1
    BivariateKernel kernel;

    /// Nystrom extension of eigenfunction k to an arbitrary point.
    double eigenfunction(std::size_t k, std::span<const double> x) const {
        double s = 0.0;
        for (Eigen::Index j = 0; j < nodes.rows(); ++j) {
            std::vector<double> y(m);
            for (std::size_t d = 0; d < m; ++d) y[d] = nodes(j, static_cast<Eigen::Index>(d));
            s += weights(j) * kernel(x, y) * vectors(j, static_cast<Eigen::Index>(k));
        }
        return s / values(static_cast<Eigen::Index>(k));
    }
};

/// Gauss-Legendre tensor-grid Nystrom discretization of the integral eigenproblem on [0,1]^m.
inline NystromResult nystrom_oracle(const BivariateKernel& kernel, std::size_t m, std::size_t order) {
    const Quadrature q = gauss_legendre(order);
    std::size_t total = 1;
    for (std::size_t d = 0; d < m; ++d) total *= order;
    NystromResult r;
    r.m = m;
    r.kernel = kernel;
    r.nodes.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(m));
    r.weights.resize(static_cast<Eigen::Index>(total));
    for (std::size_t p = 0; p < total; ++p) {
        std::size_t rest = p;
        double w = 1.0;
        for (std::size_t d = 0; d < m; ++d) {
            const std::size_t i = rest % order;
            rest /= order;
            r.nodes(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(d)) = q.nodes[i];
            w *= q.weights[i];
        }
        r.weights(static_cast<Eigen::Index>(p)) = w;
    }
    const Eigen::VectorXd sw = r.weights.cwiseSqrt();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    std::vector<double> x(m), y(m);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (std::size_t d = 0; d < m; ++d) x[d] = r.nodes(i, static_cast<Eigen::Index>(d));
        for (Eigen::Index j = 0; j <= i; ++j) {
            for (std::size_t d = 0; d < m; ++d) y[d] = r.nodes(j, static_cast<Eigen::Index>(d));
            const double v = sw(i) * kernel(x, y) * sw(j);
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::Index n = a.rows();
    r.values = es.eigenvalues().reverse();
    r.vectors = es.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < n; ++j) r.vectors.row(j) /= sw(j);
    return r;
}

/// Tensor Gauss grid on [0,1]^m: points x m nodes and product weights.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> tensor_grid(std::size_t m, std::size_t order) {
    const Quadrature q = gauss_legendre(order);
    std::size_t total = 1;
    for (std::size_t d = 0; d < m; ++d) total *= order;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(m));
    Eigen::VectorXd w(static_cast<Eigen::Index>(total));
    for (std::size_t p = 0; p < total; ++p) {
        std::size_t rest = p;
        double wp = 1.0;
        for (std::size_t d = 0; d < m; ++d) {
            x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(d)) = q.nodes[rest % order];
            wp *= q.weights[rest % order];
            rest /= order;
        }
        w(static_cast<Eigen::Index>(p)) = wp;
    }
    return {x, w};
}

/// Projection of an analytic third cumulant on the product modes by tensorized Gauss
/// quadrature, doubling the order until two successive results agree.
inline Tensor3 dense_cumulant3_oracle(const ParametricKernel& c3, const DirectionalModes& modes, std::size_t order = 8,
                                      double rel_tol = 1e-6, std::size_t max_evaluations = 200'000'000) {
    const std::size_t m = modes.m, n = modes.count();
    if (c3.kernel().order != 3) throw ConfigError("oracle needs a three-point kernel");
    std::optional<Tensor3> previous;
    for (std::size_t q = order;; q *= 2) {
        const auto [x, w] = tensor_grid(m, q);
        const Eigen::Index np = x.rows();
        if (static_cast<double>(np) * np * np > static_cast<double>(max_evaluations))
            throw QuadratureNotConverged("quadrature order " + std::to_string(q) + " exceeds the evaluation budget");
        std::vector<Point3> phys(static_cast<std::size_t>(np));
        Eigen::MatrixXd fw(np, static_cast<Eigen::Index>(n));
        std::vector<double> xi(m);
        for (Eigen::Index p = 0; p < np; ++p) {
            for (std::size_t d = 0; d < m; ++d) xi[d] = x(p, static_cast<Eigen::Index>(d));
            phys[static_cast<std::size_t>(p)] = c3.geometry().map(xi.data());
            fw.row(p) = w(p) * modes.row(xi);
        }
        Tensor3 t(n, n, n);
        Eigen::MatrixXd slab(np, np);
        for (Eigen::Index p3 = 0; p3 < np; ++p3) {
            for (Eigen::Index p1 = 0; p1 < np; ++p1)
                for (Eigen::Index p2 = 0; p2 <= p1; ++p2) {
                    const Point3 pts[3] = {phys[static_cast<std::size_t>(p1)], phys[static_cast<std::size_t>(p2)], phys[static_cast<std::size_t>(p3)]};
                    slab(p1, p2) = slab(p2, p1) = c3.kernel()(std::span<const Point3>(pts, 3));
                }
            const Eigen::MatrixXd ij = fw.transpose() * slab * fw;
            for (std::size_t k = 0; k < n; ++k) {
                const double c = fw(p3, static_cast<Eigen::Index>(k));
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) t(i, j, k) += c * ij(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
        if (previous) {
            double diff = 0.0, scale = 0.0;
            for (std::size_t e = 0; e < t.data().size(); ++e) {
                diff = std::max(diff, std::abs(t.data()[e] - previous->data()[e]));
                scale = std::max(scale, std::abs(t.data()[e]));
            }
            if (diff <= rel_tol * scale) return t;
        }
        previous = std::move(t);
    }
}

/// Relative RMS error of the reduced second or third cumulant against the parametric reference.
inline ErrorReport final_cumulant_error(const FinalExpansion& fe, std::size_t order, const PointFunction& reference,
                                        std::size_t n, std::uint64_t seed) {
    const std::size_t m = fe.modes.m;
    if (order != 2 && order != 3) throw ConfigError("final cumulant error is defined for orders 2 and 3");
    PointFunction approx;
    if (order == 2)
        approx = [&fe, m](std::span<const double> u) { return eval_cumulant2_reduced(fe, u.first(m), u.subspan(m, m)); };
    else
        approx = [&fe, m](std::span<const double> u) { return eval_cumulant3_reduced(fe, u.first(m), u.subspan(m, m), u.subspan(2 * m, m)); };
    return global_relative_error(reference, approx, order * m, n, seed, order == 2 ? "eps_gf2" : "eps_gf3");
}

} // namespace ttkl
