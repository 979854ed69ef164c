#pragma once

// Chebyshev technology on [-1, 1]: second-kind points, the DCT-I pair between
// point values and coefficients, Clenshaw-Curtis weights and Clenshaw evaluation.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace ttkl::cheb {

namespace detail {

class Dct1Plans {
public:
    static Dct1Plans& instance() {
        static Dct1Plans plans;
        return plans;
    }

    // fftw_execute_r2r on an unaligned plan is thread-safe; planning is not.
    fftw_plan get(std::size_t n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<double> scratch(n);
        fftw_plan plan = fftw_plan_r2r_1d(static_cast<int>(n), scratch.data(), scratch.data(),
                                          FFTW_REDFT00, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(n, plan);
        return plan;
    }

    ~Dct1Plans() {
        for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    Dct1Plans() = default;
    std::mutex mutex_;
    std::map<std::size_t, fftw_plan> plans_;
};

// In-place DCT-I: y_k = x_0 + (-1)^k x_{n-1} + 2 sum_{j=1}^{n-2} x_j cos(pi j k / (n-1)).
inline void dct1(std::vector<double>& x) {
    if (x.size() < 2) return;
    fftw_execute_r2r(Dct1Plans::instance().get(x.size()), x.data(), x.data());
}

} // namespace detail

/// Second-kind Chebyshev points on [-1, 1], ascending: x_j = -cos(j pi / (n-1)).
inline std::vector<double> points(std::size_t n) {
    if (n == 1) return {0.0};
    std::vector<double> x(n);
    const double h = std::numbers::pi / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        // sin form is symmetric to machine precision
        x[j] = std::sin(static_cast<double>(2 * static_cast<long>(j) - static_cast<long>(n - 1)) * h / 2.0);
    }
    return x;
}

/// Chebyshev coefficients of the interpolant through values at points(n).
inline std::vector<double> values_to_coeffs(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 1) return {values[0]};
    std::vector<double> work(values.rbegin(), values.rend()); // descending points
    detail::dct1(work);
    const double scale = 1.0 / static_cast<double>(n - 1);
    for (double& c : work) c *= scale;
    work.front() *= 0.5;
    work.back() *= 0.5;
    return work;
}

/// Values at points(n) of the Chebyshev series `coeffs` (truncated or zero-padded to n terms).
inline std::vector<double> coeffs_to_values(std::span<const double> coeffs, std::size_t n) {
    if (n == 1) {
        double s = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); k += 2) s += (k % 4 == 0 ? 1.0 : -1.0) * coeffs[k];
        return {s};
    }
    if (coeffs.size() > n) {
        // aliasing onto n points: T_k at cos(j pi/(n-1)) folds with period 2(n-1)
        std::vector<double> folded(n, 0.0);
        const std::size_t period = 2 * (n - 1);
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            std::size_t r = k % period;
            if (r > n - 1) r = period - r;
            folded[r] += coeffs[k];
        }
        return coeffs_to_values(folded, n);
    }
    std::vector<double> work(n, 0.0);
    std::copy(coeffs.begin(), coeffs.end(), work.begin());
    for (std::size_t k = 1; k + 1 < n; ++k) work[k] *= 0.5;
    detail::dct1(work);
    std::reverse(work.begin(), work.end());
    return work;
}

/// Clenshaw-Curtis weights for points(n) on [-1, 1].
inline const std::vector<double>& cc_weights(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<std::vector<double>>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (slot) return *slot;
    auto w = std::make_unique<std::vector<double>>(n, 0.0);
    if (n == 1) {
        (*w)[0] = 2.0;
    } else {
        // w = V^T m with m_k = int T_k; computed through the DCT-I of the moments
        const std::size_t deg = n - 1;
        std::vector<double> moments(n, 0.0);
        for (std::size_t k = 0; k < n; k += 2) moments[k] = 2.0 / (1.0 - static_cast<double>(k * k));
        // w_j = (c_j / deg) * sum''_k m_k cos(jk pi/deg), halves at k = 0, deg
        std::vector<double> work = moments;
        detail::dct1(work);
        for (std::size_t j = 0; j < n; ++j) {
            double v = work[j] / static_cast<double>(deg);
            if (j == 0 || j == deg) v *= 0.5;
            (*w)[j] = v;
        }
        std::reverse(w->begin(), w->end());
    }
    slot = std::move(w);
    return *slot;
}

/// Evaluates sum_k c_k T_k(t) for t in [-1, 1].
inline double clenshaw(std::span<const double> c, double t) {
    double b1 = 0.0, b2 = 0.0;
    const double t2 = 2.0 * t;
    for (std::size_t k = c.size(); k-- > 1;) {
        const double b0 = c[k] + t2 * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return (c.empty() ? 0.0 : c[0]) + t * b1 - b2;
}

/// Exact integral over [-1, 1] of a Chebyshev series.
inline double integrate_series(std::span<const double> c) {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); k += 2) s += c[k] * 2.0 / (1.0 - static_cast<double>(k * k));
    return s;
}

} // namespace ttkl::cheb
