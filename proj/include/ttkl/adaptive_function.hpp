#pragma once

#include "ttkl/chebyshev.hpp"
#include "ttkl/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ttkl {

/// Closed real interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
    double to_reference(double x) const { return (2.0 * x - lo - hi) / (hi - lo); }
    double from_reference(double t) const { return 0.5 * (hi - lo) * t + 0.5 * (hi + lo); }

    friend bool operator==(const Interval&, const Interval&) = default;
};

inline constexpr Interval kUnitInterval{0.0, 1.0};

/// Default relative tolerance of adaptive construction.
inline constexpr double kDefaultChebTol = 1e-14;

/// Smallest and largest sample counts of adaptive construction (2^4+1 ... 2^13+1).
inline constexpr std::size_t kMinSamples = 17;
inline constexpr std::size_t kMaxSamples = 8193;

/// Univariate function on an interval stored as a Chebyshev series.
class AdaptiveFunction {
public:
    AdaptiveFunction() : coeffs_{0.0} {}

    /// Takes ownership of `coeffs`; trailing entries below trim_tol * max|c| are dropped.
    static AdaptiveFunction from_coeffs(Interval domain, std::vector<double> coeffs,
                                        double trim_tol = kDefaultChebTol) {
        AdaptiveFunction f;
        f.domain_ = domain;
        f.coeffs_ = std::move(coeffs);
        f.trim(trim_tol);
        return f;
    }

    /// Exact coefficients, no trimming.
    static AdaptiveFunction from_raw(Interval domain, std::vector<double> coeffs) {
        AdaptiveFunction f;
        f.domain_ = domain;
        f.coeffs_ = std::move(coeffs);
        if (f.coeffs_.empty()) f.coeffs_.push_back(0.0);
        return f;
    }

    static AdaptiveFunction constant(Interval domain, double value) {
        return from_raw(domain, {value});
    }

    const Interval& domain() const { return domain_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    std::size_t length() const { return coeffs_.size(); }

    double operator()(double x) const {
        return cheb::clenshaw(coeffs_, domain_.to_reference(x));
    }

    /// Values at the n second-kind Chebyshev points of the domain.
    std::vector<double> values_on_grid(std::size_t n) const {
        return cheb::coeffs_to_values(coeffs_, n);
    }

    double vscale() const {
        double m = 0.0;
        for (double c : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }

    AdaptiveFunction with_domain(Interval domain) const {
        AdaptiveFunction f = *this;
        f.domain_ = domain;
        return f;
    }

private:
    void trim(double tol) {
        if (coeffs_.empty()) {
            coeffs_.push_back(0.0);
            return;
        }
        const double cutoff = tol * vscale();
        std::size_t n = coeffs_.size();
        while (n > 1 && std::abs(coeffs_[n - 1]) <= cutoff) --n;
        coeffs_.resize(n);
    }

    Interval domain_ = kUnitInterval;
    std::vector<double> coeffs_;
};

namespace detail {

inline std::vector<double> mapped_points(std::size_t n, Interval domain) {
    std::vector<double> x = cheb::points(n);
    for (double& v : x) v = domain.from_reference(v);
    // pin endpoints exactly
    x.front() = domain.lo;
    x.back() = domain.hi;
    return x;
}

inline double tail_max(std::span<const double> c) {
    double m = 0.0;
    for (std::size_t k = c.size() / 2; k < c.size(); ++k) m = std::max(m, std::abs(c[k]));
    return m;
}

} // namespace detail

/// Adaptively samples several functions on a shared Chebyshev grid.
///
/// `sample(x, out)` writes the values of all `count` functions at x into out.
/// Grids of 2^k+1 points are tried for k = 4..13; the grid is accepted when for
/// every function the upper half of its coefficients is below tol times the
/// largest coefficient over all functions. Samples are reused across levels.
template <class Sampler>
std::vector<AdaptiveFunction> approximate_many(Sampler&& sample, std::size_t count, Interval domain,
                                               double tol = kDefaultChebTol,
                                               std::size_t max_samples = kMaxSamples) {
    if (count == 0) return {};
    std::vector<std::vector<double>> values(count); // ascending-point values per function
    std::vector<double> out(count);
    std::size_t n = 0;
    for (std::size_t target = kMinSamples; target <= max_samples; target = 2 * target - 1) {
        const std::vector<double> x = detail::mapped_points(target, domain);
        std::vector<std::vector<double>> next(count, std::vector<double>(target));
        for (std::size_t j = 0; j < target; ++j) {
            if (n > 0 && j % 2 == 0) {
                for (std::size_t e = 0; e < count; ++e) next[e][j] = values[e][j / 2];
                continue;
            }
            sample(x[j], std::span<double>(out));
            for (std::size_t e = 0; e < count; ++e) next[e][j] = out[e];
        }
        values = std::move(next);
        n = target;

        std::vector<std::vector<double>> coeffs(count);
        double vscale = 0.0;
        for (std::size_t e = 0; e < count; ++e) {
            coeffs[e] = cheb::values_to_coeffs(values[e]);
            for (double c : coeffs[e]) vscale = std::max(vscale, std::abs(c));
        }
        for (std::size_t e = 0; e < count; ++e) {
            for (double v : values[e]) {
                if (!std::isfinite(v)) throw NonConvergent("non-finite sample during construction");
            }
        }
        bool converged = true;
        for (std::size_t e = 0; e < count && converged; ++e) {
            converged = detail::tail_max(coeffs[e]) <= tol * vscale;
        }
        if (converged || vscale == 0.0) {
            std::vector<AdaptiveFunction> result;
            result.reserve(count);
            const double cutoff = tol * vscale;
            for (auto& c : coeffs) {
                std::size_t len = c.size();
                while (len > 1 && std::abs(c[len - 1]) <= cutoff) --len;
                c.resize(len);
                result.push_back(AdaptiveFunction::from_raw(domain, std::move(c)));
            }
            return result;
        }
    }
    throw NonConvergent("coefficients did not decay below " + std::to_string(tol) + " with "
                        + std::to_string(max_samples) + " samples");
}

/// Adaptive Chebyshev approximation of a scalar function on `domain`.
template <class F>
AdaptiveFunction approximate(F&& f, Interval domain = kUnitInterval, double tol = kDefaultChebTol) {
    if (!(tol >= 1e-15)) throw NonConvergent("tolerance below 1e-15 is not resolvable");
    auto sampler = [&f](double x, std::span<double> out) { out[0] = f(x); };
    return std::move(approximate_many(sampler, 1, domain, tol).front());
}

/// Integral over the domain.
inline double integrate(const AdaptiveFunction& g) {
    return 0.5 * g.domain().length() * cheb::integrate_series(g.coeffs());
}

/// Clenshaw-Curtis grid size that integrates a product of series of the given lengths exactly.
inline std::size_t product_grid_size(std::size_t len_a, std::size_t len_b) {
    return std::max<std::size_t>(len_a + len_b, 2);
}

/// L2 inner product over the shared domain.
inline double inner_product(const AdaptiveFunction& g1, const AdaptiveFunction& g2) {
    if (!(g1.domain() == g2.domain())) throw DomainMismatch("inner product of functions on different domains");
    const std::size_t n = product_grid_size(g1.length(), g2.length());
    const auto v1 = g1.values_on_grid(n);
    const auto v2 = g2.values_on_grid(n);
    const auto& w = cheb::cc_weights(n);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w[j] * v1[j] * v2[j];
    return 0.5 * g1.domain().length() * s;
}

/// Linear combination sum_k a_k f_k at coefficient level (functions share a domain).
inline AdaptiveFunction linear_combination(std::span<const double> a,
                                           std::span<const AdaptiveFunction* const> f) {
    std::size_t len = 1;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (a[k] != 0.0) len = std::max(len, f[k]->length());
    }
    std::vector<double> c(len, 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (a[k] == 0.0) continue;
        const auto& fc = f[k]->coeffs();
        for (std::size_t i = 0; i < fc.size(); ++i) c[i] += a[k] * fc[i];
    }
    return AdaptiveFunction::from_raw(f.empty() ? kUnitInterval : f[0]->domain(), std::move(c));
}

} // namespace ttkl
