#pragma once

// Physical cumulant kernels and their pullback to the parametric cube.

#include "ttkl/error.hpp"
#include "ttkl/nurbs.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ttkl {

/// K-point physical kernel C(x_1, ..., x_K).
struct Kernel {
    std::string name;
    std::size_t order = 2;
    std::function<double(std::span<const Point3>)> eval;

    double operator()(std::span<const Point3> x) const { return eval(x); }
};

namespace kernels {

/// sum_k lambda_k prod_j f_k(x_j) with lambda_k = 4/(pi^2 (2k-1)^2), f_k(x) = sqrt(2) sin((2k-1) pi x / 2).
inline Kernel spectral_series(std::size_t order, std::size_t terms = 80) {
    if (order < 2) throw ConfigError("spectral series needs order >= 2");
    Kernel k;
    k.name = "spectral-series";
    k.order = order;
    k.eval = [order, terms](std::span<const Point3> x) {
        // sin((2k-1) theta) advanced by rotation through 2 theta
        double s[8], c[8], s2[8], c2[8];
        for (std::size_t j = 0; j < order; ++j) {
            const double theta = 0.5 * std::numbers::pi * x[j][0];
            s[j] = std::sin(theta);
            c[j] = std::cos(theta);
            s2[j] = std::sin(2.0 * theta);
            c2[j] = std::cos(2.0 * theta);
        }
        const double root2 = std::sqrt(2.0);
        double total = 0.0;
        for (std::size_t t = 1; t <= terms; ++t) {
            const double w = (2.0 * t - 1.0) * std::numbers::pi;
            double term = 4.0 / (w * w);
            for (std::size_t j = 0; j < order; ++j) {
                term *= root2 * s[j];
                const double sn = s[j] * c2[j] + c[j] * s2[j];
                c[j] = c[j] * c2[j] - s[j] * s2[j];
                s[j] = sn;
            }
            total += term;
        }
        return total;
    };
    return k;
}

inline double squared_distance(const Point3& a, const Point3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

/// sigma2 exp(-|x - y|^2 / (b L)^2)
inline Kernel squared_exponential(double sigma2 = 1.0, double b = 1.0, double L = 1.0) {
    if (!(sigma2 > 0.0 && b > 0.0 && L > 0.0)) throw ConfigError("squared exponential parameters must be positive");
    const double inv = 1.0 / ((b * L) * (b * L));
    return {"squared-exponential", 2, [sigma2, inv](std::span<const Point3> x) {
                return sigma2 * std::exp(-squared_distance(x[0], x[1]) * inv);
            }};
}

/// sigma3 exp(-(|x - y|^2 + |x - z|^2 + |y - z|^2) / (b L)^2)
inline Kernel triple_exponential(double sigma3 = 1.0, double b = 1.0, double L = 1.0) {
    if (!(sigma3 > 0.0 && b > 0.0 && L > 0.0)) throw ConfigError("triple exponential parameters must be positive");
    const double inv = 1.0 / ((b * L) * (b * L));
    return {"triple-exponential", 3, [sigma3, inv](std::span<const Point3> x) {
                const double s = squared_distance(x[0], x[1]) + squared_distance(x[0], x[2]) + squared_distance(x[1], x[2]);
                return sigma3 * std::exp(-s * inv);
            }};
}

} // namespace kernels

/// Position of each train variable: which of the K points and which parametric direction.
struct VariableOrdering {
    struct Slot {
        std::size_t point;
        std::size_t dir;
    };
    std::size_t m = 1;
    std::size_t order = 2;
    std::vector<Slot> slots;

    std::size_t size() const { return slots.size(); }

    /// (xi, eta, zeta, zeta', eta', xi') style ordering for covariance kernels.
    static VariableOrdering mirrored(std::size_t m) {
        VariableOrdering o{m, 2, {}};
        for (std::size_t d = 0; d < m; ++d) o.slots.push_back({0, d});
        for (std::size_t d = m; d-- > 0;) o.slots.push_back({1, d});
        return o;
    }

    /// (xi, eta, zeta, xi', eta', zeta', ...) blocks, one per point.
    static VariableOrdering blocked(std::size_t m, std::size_t order) {
        VariableOrdering o{m, order, {}};
        for (std::size_t p = 0; p < order; ++p)
            for (std::size_t d = 0; d < m; ++d) o.slots.push_back({p, d});
        return o;
    }
};

/// C~(u) = C(x(xi_1), ..., x(xi_K)) with u laid out by the ordering.
class ParametricKernel {
public:
    ParametricKernel(std::shared_ptr<const NurbsGeometry> geometry, Kernel kernel, VariableOrdering ordering)
        : geometry_(std::move(geometry)), kernel_(std::move(kernel)), ordering_(std::move(ordering)) {
        if (ordering_.order != kernel_.order) throw ConfigError("ordering and kernel disagree on the number of points");
        if (ordering_.m != geometry_->param_dim()) throw ConfigError("ordering and geometry disagree on the parametric dimension");
        if (kernel_.order > 8) throw ConfigError("kernel order above 8 is not supported");
    }

    std::size_t dim() const { return ordering_.size(); }
    const VariableOrdering& ordering() const { return ordering_; }
    const NurbsGeometry& geometry() const { return *geometry_; }
    const Kernel& kernel() const { return kernel_; }

    double operator()(const double* u) const {
        double xi[8][3] = {};
        for (std::size_t v = 0; v < ordering_.size(); ++v) xi[ordering_.slots[v].point][ordering_.slots[v].dir] = u[v];
        Point3 x[8];
        for (std::size_t p = 0; p < kernel_.order; ++p) x[p] = geometry_->map(xi[p]);
        return kernel_(std::span<const Point3>(x, kernel_.order));
    }

    double operator()(std::span<const double> u) const { return (*this)(u.data()); }

    /// Evaluate at parametric points given one per kernel argument (each of length m).
    double at_points(std::span<const double* const> xi) const {
        Point3 x[8];
        for (std::size_t p = 0; p < kernel_.order; ++p) x[p] = geometry_->map(xi[p]);
        return kernel_(std::span<const Point3>(x, kernel_.order));
    }

private:
    std::shared_ptr<const NurbsGeometry> geometry_;
    Kernel kernel_;
    VariableOrdering ordering_;
};

} // namespace ttkl
