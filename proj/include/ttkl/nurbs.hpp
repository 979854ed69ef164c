#pragma once

// Tensor-product NURBS maps from [0,1]^m to R^d, m <= d <= 3.

#include "ttkl/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ttkl {

using Point3 = std::array<double, 3>;

/// Cox-de Boor recursion for N_i^p(xi) with 1-based i and 0/0 = 0. xi = 1 belongs to the last nonempty span.
inline double bspline_basis(const std::vector<double>& knots, int p, int i, double xi) {
    const int n = static_cast<int>(knots.size()) - p - 1;
    if (i < 1 || i > n || p < 0) throw IndexOutOfRange("basis index " + std::to_string(i) + " outside [1, " + std::to_string(n) + "]");
    // 0-based recursion on knots t[j]
    std::function<double(int, int)> rec = [&](int j, int q) -> double {
        const auto& t = knots;
        if (q == 0) {
            if (t[j] <= xi && xi < t[j + 1]) return 1.0;
            // right endpoint: last span with t[j] < t[j+1] == back
            if (xi == t.back() && t[j] < t[j + 1] && t[j + 1] == t.back()) return 1.0;
            return 0.0;
        }
        double v = 0.0;
        const double d1 = t[j + q] - t[j];
        const double d2 = t[j + q + 1] - t[j + 1];
        if (d1 > 0.0) v += (xi - t[j]) / d1 * rec(j, q - 1);
        if (d2 > 0.0) v += (t[j + q + 1] - xi) / d2 * rec(j + 1, q - 1);
        return v;
    };
    return rec(i - 1, p);
}

namespace detail {

// 0-based span index s with t[s] <= xi < t[s+1]; xi at the right end clamps to the last nonempty span.
inline int find_span(const std::vector<double>& t, int p, double xi) {
    const int n = static_cast<int>(t.size()) - p - 1;
    if (xi >= t[n]) {
        int s = n - 1;
        while (s > p && t[s] == t[s + 1]) --s;
        return s;
    }
    if (xi <= t[p]) {
        int s = p;
        while (s < n - 1 && t[s + 1] <= xi) ++s;
        return s;
    }
    int lo = p, hi = n;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (xi < t[mid]) hi = mid;
        else lo = mid;
    }
    return lo;
}

// Nonzero basis values N_{s-p..s}^p(xi) by the triangular table.
inline void basis_funs(const std::vector<double>& t, int p, int s, double xi, double* out) {
    double left[8], right[8];
    out[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = xi - t[s + 1 - j];
        right[j] = t[s + j] - xi;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double temp = denom != 0.0 ? out[r] / denom : 0.0;
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

} // namespace detail

/// Control points and weights are stored with the first parametric index fastest.
class NurbsGeometry {
public:
    NurbsGeometry(std::size_t phys_dim, std::vector<int> degrees, std::vector<std::vector<double>> knots,
                  std::vector<Point3> control_points, std::vector<double> weights)
        : d_(phys_dim), degrees_(std::move(degrees)), knots_(std::move(knots)),
          control_(std::move(control_points)), weights_(std::move(weights)) {
        validate();
    }

    std::size_t param_dim() const { return degrees_.size(); }
    std::size_t phys_dim() const { return d_; }
    const std::vector<int>& degrees() const { return degrees_; }
    const std::vector<std::vector<double>>& knots() const { return knots_; }
    const std::vector<Point3>& control_points() const { return control_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t control_count(std::size_t dir) const { return knots_[dir].size() - degrees_[dir] - 1; }

    /// x(xi); unused physical coordinates are zero.
    Point3 map(const double* xi) const {
        const std::size_t m = param_dim();
        double vals[3][8];
        int first[3] = {0, 0, 0}, count[3] = {1, 1, 1};
        for (std::size_t k = 0; k < m; ++k) {
            const int p = degrees_[k];
            const double x = std::clamp(xi[k], 0.0, 1.0);
            const int s = detail::find_span(knots_[k], p, x);
            detail::basis_funs(knots_[k], p, s, x, vals[k]);
            first[k] = s - p;
            count[k] = p + 1;
        }
        for (std::size_t k = m; k < 3; ++k) vals[k][0] = 1.0;
        const std::size_t n0 = control_count(0);
        const std::size_t n1 = m > 1 ? control_count(1) : 1;
        double acc[3] = {0.0, 0.0, 0.0}, wsum = 0.0;
        for (int c = 0; c < count[2]; ++c)
            for (int b = 0; b < count[1]; ++b)
                for (int a = 0; a < count[0]; ++a) {
                    const std::size_t idx = static_cast<std::size_t>(first[0] + a)
                                            + n0 * (static_cast<std::size_t>(first[1] + b) + n1 * static_cast<std::size_t>(first[2] + c));
                    const double nw = vals[0][a] * vals[1][b] * vals[2][c] * weights_[idx];
                    wsum += nw;
                    for (int q = 0; q < 3; ++q) acc[q] += nw * control_[idx][q];
                }
        return {acc[0] / wsum, acc[1] / wsum, acc[2] / wsum};
    }

    Point3 map(std::span<const double> xi) const { return map(xi.data()); }

    /// Rational basis values R_I(xi) on the full control grid (testing and inspection).
    std::vector<double> rational_basis(const double* xi) const {
        std::vector<double> r(weights_.size(), 0.0);
        double wsum = 0.0;
        const std::size_t m = param_dim();
        const std::size_t n0 = control_count(0);
        const std::size_t n1 = m > 1 ? control_count(1) : 1;
        for (std::size_t idx = 0; idx < r.size(); ++idx) {
            const int i = static_cast<int>(idx % n0) + 1;
            const int j = static_cast<int>((idx / n0) % n1) + 1;
            const int k = static_cast<int>(idx / (n0 * n1)) + 1;
            double v = bspline_basis(knots_[0], degrees_[0], i, xi[0]);
            if (m > 1) v *= bspline_basis(knots_[1], degrees_[1], j, xi[1]);
            if (m > 2) v *= bspline_basis(knots_[2], degrees_[2], k, xi[2]);
            r[idx] = v * weights_[idx];
            wsum += r[idx];
        }
        for (double& v : r) v /= wsum;
        return r;
    }

private:
    void validate() const {
        const std::size_t m = degrees_.size();
        if (m < 1 || m > 3) throw InvalidGeometry("parametric dimension must be 1, 2 or 3");
        if (d_ < m || d_ > 3) throw InvalidGeometry("physical dimension must satisfy m <= d <= 3");
        if (knots_.size() != m) throw InvalidGeometry("need one knot vector per parametric direction");
        std::size_t total = 1;
        for (std::size_t k = 0; k < m; ++k) {
            const auto& t = knots_[k];
            if (degrees_[k] < 0 || degrees_[k] > 7) throw InvalidGeometry("degree out of range");
            if (t.size() < static_cast<std::size_t>(2 * degrees_[k] + 2)) throw InvalidGeometry("knot vector too short");
            if (t.front() != 0.0 || t.back() != 1.0) throw InvalidGeometry("knot vectors must start at 0 and end at 1");
            for (std::size_t i = 1; i < t.size(); ++i)
                if (t[i] < t[i - 1]) throw InvalidGeometry("knot vector is decreasing");
            total *= control_count(k);
        }
        if (control_.size() != total) throw InvalidGeometry("control grid has " + std::to_string(control_.size()) + " points, knots imply " + std::to_string(total));
        if (weights_.size() != total) throw InvalidGeometry("weight grid does not match control grid");
        for (double w : weights_)
            if (!(w > 0.0)) throw InvalidGeometry("weights must be positive");
    }

    std::size_t d_;
    std::vector<int> degrees_;
    std::vector<std::vector<double>> knots_;
    std::vector<Point3> control_;
    std::vector<double> weights_;
};

namespace geometries {

inline NurbsGeometry unit_interval() {
    return NurbsGeometry(1, {1}, {{0, 0, 1, 1}}, {Point3{0, 0, 0}, Point3{1, 0, 0}}, {1, 1});
}

inline NurbsGeometry bilinear_surface() {
    return NurbsGeometry(3, {1, 1}, {{0, 0, 1, 1}, {0, 0, 1, 1}},
                         {Point3{-0.5, -0.5, 0}, Point3{-0.5, 0.5, 1}, Point3{0.5, -0.5, 1}, Point3{0.5, 0.5, 0}},
                         {1, 1, 1, 1});
}

inline NurbsGeometry hemispherical_shell(double inner = 1.0, double outer = 1.2) {
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<Point3> cp;
    std::vector<double> w;
    // (j, k) pattern on the unit sphere octant with weights, then radial index i fastest
    const Point3 unit[3][3] = {{{1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{1, 0, 1}, {1, 1, 1}, {0, 1, 1}}, {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}}};
    const double wt[3][3] = {{1, s, 1}, {s, 0.5, s}, {1, s, 1}};
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
            for (double r : {inner, outer}) {
                const Point3& u = unit[k][j];
                cp.push_back({r * u[0], r * u[1], r * u[2]});
                w.push_back(wt[k][j]);
            }
    return NurbsGeometry(3, {1, 2, 2}, {{0, 0, 1, 1}, {0, 0, 0, 1, 1, 1}, {0, 0, 0, 1, 1, 1}}, std::move(cp), std::move(w));
}

} // namespace geometries

} // namespace ttkl
