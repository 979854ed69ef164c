#pragma once

// Adaptive tensor-train cross approximation of functions on [0,1]^a with
// Chebyshev-represented cores.

#include "ttkl/error.hpp"
#include "ttkl/function_matrix.hpp"
#include "ttkl/qmc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ttkl {

using Target = std::function<double(std::span<const double>)>;

struct CrossConfig {
    std::size_t maxswp = 1000; ///< half-sweep cap
    double tol = 1e-6;
    std::size_t m0 = 1000;
    std::size_t mk = 800;
    std::uint64_t seed = 1;
    double fiber_tol = 1e-13;
    double max_condition = 1e13;

    void check() const {
        if (maxswp < 1 || m0 < 1 || mk < 1) throw ConfigError("cross counts must be at least 1");
        if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("cross tol must lie in (0, 1)");
    }
};

struct Pivot {
    std::size_t dimension; ///< 1-based k
    std::vector<double> point;
    double error;
};

struct CrossDiagnostics {
    Eigen::MatrixXd errdm;                 ///< (a-1) x recorded half-sweeps
    std::size_t sweeps_used = 0;
    std::vector<Pivot> pivot_history;      ///< initial pivot first, with error |G(u0)|
    std::vector<std::size_t> singular_dims; ///< dimensions frozen after a rejected pivot
    std::uint64_t evaluations = 0;
    bool converged = false;
};

class NotConverged : public Error {
public:
    NotConverged(std::string what, CrossDiagnostics diagnostics)
        : Error(std::move(what)), diagnostics_(std::move(diagnostics)) {}
    const CrossDiagnostics& diagnostics() const { return diagnostics_; }

private:
    CrossDiagnostics diagnostics_;
};

/// Product of matrix-valued cores G_1(u_1) ... G_a(u_a).
class FunctionTrain {
public:
    FunctionTrain() = default;
    explicit FunctionTrain(std::vector<FunctionMatrix> cores) : cores_(std::move(cores)) {
        if (cores_.empty()) throw ShapeMismatch("a train needs at least one core");
        if (cores_.front().rows() != 1 || cores_.back().cols() != 1) throw ShapeMismatch("boundary ranks must be 1");
        for (std::size_t k = 1; k < cores_.size(); ++k)
            if (cores_[k - 1].cols() != cores_[k].rows()) throw ShapeMismatch("adjacent cores do not chain");
    }

    std::size_t dim() const { return cores_.size(); }
    const std::vector<FunctionMatrix>& cores() const { return cores_; }
    const FunctionMatrix& core(std::size_t k) const { return cores_[k]; }

    /// (r_1, ..., r_{a-1})
    std::vector<std::size_t> ranks() const {
        std::vector<std::size_t> r;
        for (std::size_t k = 0; k + 1 < cores_.size(); ++k) r.push_back(cores_[k].cols());
        return r;
    }

    double operator()(std::span<const double> u) const {
        Eigen::RowVectorXd v = cores_[0](u[0]);
        for (std::size_t k = 1; k < cores_.size(); ++k) v = v * cores_[k](u[k]);
        return v(0);
    }

private:
    std::vector<FunctionMatrix> cores_;
};

/// Nested prefix/suffix sets. left(k) holds r_k points of length k, right(k) r_k points of length a-k.
class InterpolationSets {
public:
    InterpolationSets() = default;
    explicit InterpolationSets(std::size_t a) : a_(a), left_(a), right_(a) {}

    std::size_t dim() const { return a_; }
    std::size_t rank(std::size_t k) const { return (k == 0 || k == a_) ? 1 : left_[k].size() / k; }

    std::span<const double> left(std::size_t k, std::size_t i) const {
        if (k == 0) return {};
        return {left_[k].data() + i * k, k};
    }
    std::span<const double> right(std::size_t k, std::size_t j) const {
        if (k == a_) return {};
        return {right_[k].data() + j * (a_ - k), a_ - k};
    }

    void append(std::size_t k, std::span<const double> prefix, std::span<const double> suffix) {
        left_[k].insert(left_[k].end(), prefix.begin(), prefix.end());
        right_[k].insert(right_[k].end(), suffix.begin(), suffix.end());
    }
    void pop(std::size_t k) {
        left_[k].resize(left_[k].size() - k);
        right_[k].resize(right_[k].size() - (a_ - k));
    }

    /// Every left(k) point extends a left(k-1) point and every right(k) point extends a right(k+1) point.
    bool nested() const {
        for (std::size_t k = 2; k < a_; ++k) {
            for (std::size_t i = 0; i < rank(k); ++i) {
                const auto p = left(k, i);
                bool found = false;
                for (std::size_t q = 0; q < rank(k - 1) && !found; ++q)
                    found = std::equal(p.begin(), p.end() - 1, left(k - 1, q).begin());
                if (!found) return false;
            }
        }
        for (std::size_t k = 1; k + 1 < a_; ++k) {
            for (std::size_t j = 0; j < rank(k); ++j) {
                const auto s = right(k, j);
                bool found = false;
                for (std::size_t q = 0; q < rank(k + 1) && !found; ++q)
                    found = std::equal(s.begin() + 1, s.end(), right(k + 1, q).begin());
                if (!found) return false;
            }
        }
        return true;
    }

private:
    std::size_t a_ = 0;
    std::vector<std::vector<double>> left_;
    std::vector<std::vector<double>> right_;
};

/// argmax |G| over the first m0 scrambled Halton points; ties keep the first.
inline std::vector<double> initial_pivot(const Target& g, std::size_t a, std::size_t m0, std::uint64_t seed) {
    const qmc::Halton h(a, qmc::mix_seed(seed, 0));
    std::vector<double> u(a), best;
    double best_val = 0.0;
    for (std::size_t i = 0; i < m0; ++i) {
        h.point(i, u.data());
        const double v = std::abs(g(u));
        if (v > best_val) {
            best_val = v;
            best = u;
        }
    }
    if (best.empty()) throw AllZero("all " + std::to_string(m0) + " initial samples are zero");
    return best;
}

/// State of Algorithms 1-3: interpolation sets plus factorized cross matrices.
class CrossApproximation {
public:
    CrossApproximation(Target g, std::size_t a, CrossConfig config)
        : g_(std::move(g)), a_(a), config_(config), sets_(a), cross_(a) {
        config_.check();
        if (a_ < 2) throw ConfigError("cross approximation needs at least two variables");
        u_.resize(a_);
    }

    std::size_t dim() const { return a_; }
    const InterpolationSets& sets() const { return sets_; }
    const CrossConfig& config() const { return config_; }
    CrossDiagnostics& diagnostics() { return diag_; }
    const CrossDiagnostics& diagnostics() const { return diag_; }

    /// Seeds every pair of sets with the split of the initial pivot.
    void initialize() {
        const auto u0 = initial_pivot(g_, a_, config_.m0, config_.seed);
        diag_.evaluations += config_.m0;
        for (std::size_t k = 1; k < a_; ++k) {
            sets_.append(k, std::span<const double>(u0).first(k), std::span<const double>(u0).subspan(k));
            cross_[k] = Eigen::MatrixXd::Constant(1, 1, eval(u0));
        }
        diag_.pivot_history.push_back({0, u0, std::abs(eval(u0))});
    }

    /// One interpolation set expansion at dimension k (1-based). Returns the residual maximum.
    /// Throws SingularCrossMatrix after reverting when the enlarged cross matrix is numerically singular.
    double expand(std::size_t k) {
        const std::size_t r_prev = sets_.rank(k - 1);
        const std::size_t r_next = sets_.rank(k + 1);
        const std::size_t r = sets_.rank(k);
        const std::size_t mk = config_.mk;
        const qmc::Halton h(2, qmc::mix_seed(config_.seed, ++calls_));

        Eigen::MatrixXd js(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(mk)); // G(x, right_k)^T per sample
        Eigen::MatrixXd jt(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(mk)); // G(left_k, y) per sample
        Eigen::VectorXd gst(static_cast<Eigen::Index>(mk));
        std::vector<double> prefixes(mk * k), suffixes(mk * (a_ - k));
        for (std::size_t s = 0; s < mk; ++s) {
            double q[2];
            h.point(s, q);
            double* x = prefixes.data() + s * k;
            double* y = suffixes.data() + s * (a_ - k);
            decode(q[0], r_prev, k - 1, true, x);
            decode(q[1], r_next, k + 1, false, y);
            const std::span<const double> xs(x, k), ys(y, a_ - k);
            gst(static_cast<Eigen::Index>(s)) = eval(xs, ys);
            for (std::size_t c = 0; c < r; ++c) {
                js(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s)) = eval(xs, sets_.right(k, c));
                jt(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s)) = eval(sets_.left(k, c), ys);
            }
        }
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(cross_[k]);
        const Eigen::MatrixXd z = lu.solve(jt);
        Eigen::Index best = 0;
        double errmax = -1.0;
        for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(mk); ++s) {
            const double res = std::abs(gst(s) - js.col(s).dot(z.col(s)));
            if (res > errmax) {
                errmax = res;
                best = s;
            }
        }
        if (errmax < config_.tol) return errmax;

        // grow the cross matrix from values already in hand
        const Eigen::Index n = static_cast<Eigen::Index>(r);
        Eigen::MatrixXd grown(n + 1, n + 1);
        grown.topLeftCorner(n, n) = cross_[k];
        grown.block(n, 0, 1, n) = js.col(best).transpose();
        grown.block(0, n, n, 1) = jt.col(best);
        grown(n, n) = gst(best);
        const Eigen::PartialPivLU<Eigen::MatrixXd> grown_lu(grown);
        const double rcond = grown_lu.rcond();
        if (!(rcond * config_.max_condition > 1.0)) throw SingularCrossMatrix(k, rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
        cross_[k] = std::move(grown);
        const std::span<const double> x(prefixes.data() + best * k, k), y(suffixes.data() + best * (a_ - k), a_ - k);
        sets_.append(k, x, y);
        std::vector<double> point(x.begin(), x.end());
        point.insert(point.end(), y.begin(), y.end());
        diag_.pivot_history.push_back({k, std::move(point), errmax});
        return errmax;
    }

    /// Cores k = 1..a per the fiber formulas, each fiber matrix right-multiplied by the inverse cross matrix.
    FunctionTrain extract_cores() {
        std::vector<FunctionMatrix> cores;
        for (std::size_t k = 1; k <= a_; ++k) {
            const std::size_t rows = sets_.rank(k - 1);
            const std::size_t cols = sets_.rank(k);
            std::vector<double> buf(a_);
            auto sampler = [&](double x, std::span<double> out) {
                for (std::size_t i = 0; i < rows; ++i) {
                    const auto p = sets_.left(k - 1, i);
                    std::copy(p.begin(), p.end(), buf.begin());
                    buf[k - 1] = x;
                    for (std::size_t c = 0; c < cols; ++c) {
                        const auto s = sets_.right(k, c);
                        std::copy(s.begin(), s.end(), buf.begin() + static_cast<std::ptrdiff_t>(k));
                        out[i * cols + c] = g_(buf);
                    }
                }
                diag_.evaluations += rows * cols;
            };
            FunctionMatrix fiber = approximate_matrix(sampler, rows, cols, kUnitInterval, config_.fiber_tol);
            cores.push_back(k < a_ ? right_solve(fiber, cross_[k]) : std::move(fiber));
        }
        return FunctionTrain(std::move(cores));
    }

    const Eigen::MatrixXd& cross_matrix(std::size_t k) const { return cross_[k]; }

private:
    // Map q in [0,1) to a point of [0, r] and decode block and fraction into coordinates.
    void decode(double q, std::size_t blocks, std::size_t set_k, bool is_prefix, double* out) const {
        const double s = q * static_cast<double>(blocks);
        std::size_t i = static_cast<std::size_t>(std::floor(s));
        if (i >= blocks) i = blocks - 1;
        const double frac = s - static_cast<double>(i);
        if (is_prefix) {
            const auto p = sets_.left(set_k, i);
            std::copy(p.begin(), p.end(), out);
            out[p.size()] = frac;
        } else {
            out[0] = frac;
            const auto t = sets_.right(set_k, i);
            std::copy(t.begin(), t.end(), out + 1);
        }
    }

    double eval(std::span<const double> u) {
        ++diag_.evaluations;
        return g_(u);
    }
    double eval(std::span<const double> x, std::span<const double> y) {
        std::copy(x.begin(), x.end(), u_.begin());
        std::copy(y.begin(), y.end(), u_.begin() + static_cast<std::ptrdiff_t>(x.size()));
        return eval(u_);
    }

    // F P^{-1} coefficient by coefficient: X^T = P^{-T} F^T.
    static FunctionMatrix right_solve(const FunctionMatrix& f, const Eigen::MatrixXd& p) {
        const std::size_t rows = f.rows(), r = f.cols(), len = f.max_length();
        Eigen::MatrixXd ct = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(rows * len));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t c = 0; c < r; ++c) {
                const auto& co = f(i, c).coeffs();
                for (std::size_t l = 0; l < co.size(); ++l) ct(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l * rows + i)) = co[l];
            }
        const Eigen::MatrixXd xt = Eigen::PartialPivLU<Eigen::MatrixXd>(p).transpose().solve(ct);
        const double cutoff = 1e-16 * xt.cwiseAbs().maxCoeff();
        std::vector<AdaptiveFunction> entries;
        entries.reserve(rows * r);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t c = 0; c < r; ++c) {
                std::vector<double> co(len);
                for (std::size_t l = 0; l < len; ++l) co[l] = xt(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l * rows + i));
                while (co.size() > 1 && std::abs(co.back()) <= cutoff) co.pop_back();
                entries.push_back(AdaptiveFunction::from_raw(f.domain(), std::move(co)));
            }
        return FunctionMatrix(rows, r, std::move(entries));
    }

    Target g_;
    std::size_t a_;
    CrossConfig config_;
    InterpolationSets sets_;
    std::vector<Eigen::MatrixXd> cross_;
    CrossDiagnostics diag_;
    std::vector<double> u_;
    std::uint64_t calls_ = 0;
};

struct CrossResult {
    FunctionTrain train;
    InterpolationSets sets;
    CrossDiagnostics diagnostics;
};

namespace detail {

inline void record(Eigen::MatrixXd& errdm, const std::vector<double>& errd) {
    const Eigen::Index col = errdm.cols();
    errdm.conservativeResize(static_cast<Eigen::Index>(errd.size()), col + 1);
    for (std::size_t k = 0; k < errd.size(); ++k) errdm(static_cast<Eigen::Index>(k), col) = errd[k];
}

inline double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

} // namespace detail

/// Alternating half-sweeps of interpolation set expansion; a >= 3.
inline CrossResult cross_decompose(const Target& g, std::size_t a, const CrossConfig& config) {
    CrossApproximation cross(g, a, config);
    cross.initialize();
    auto& diag = cross.diagnostics();
    std::vector<double> errd(a - 1, 1.0);
    auto visit = [&](std::size_t k) {
        if (errd[k - 1] < config.tol) return;
        try {
            errd[k - 1] = cross.expand(k);
        } catch (const SingularCrossMatrix&) {
            errd[k - 1] = 0.0;
            diag.singular_dims.push_back(k);
        }
    };
    std::size_t s = 0;
    while (s < config.maxswp) {
        ++s;
        for (std::size_t k = 1; k < a; ++k) visit(k);
        detail::record(diag.errdm, errd);
        if (detail::max_of(errd) < config.tol) break;
        if (s >= config.maxswp) break;
        ++s;
        for (std::size_t k = a; k >= 2; --k) visit(k - 1);
        detail::record(diag.errdm, errd);
        if (detail::max_of(errd) < config.tol) break;
    }
    diag.sweeps_used = s;
    diag.converged = detail::max_of(errd) < config.tol;
    if (!diag.converged)
        throw NotConverged("cross approximation did not reach tol after " + std::to_string(s) + " half-sweeps", diag);
    FunctionTrain train = cross.extract_cores();
    return {std::move(train), cross.sets(), cross.diagnostics()};
}

/// Rank-revealing cross of a bivariate function.
inline CrossResult cross_decompose_bivariate(const Target& g, const CrossConfig& config) {
    CrossApproximation cross(g, 2, config);
    cross.initialize();
    auto& diag = cross.diagnostics();
    std::vector<double> errd(1, 1.0);
    std::size_t s = 0;
    for (s = 1; s <= config.maxswp; ++s) {
        try {
            errd[0] = cross.expand(1);
        } catch (const SingularCrossMatrix&) {
            errd[0] = 0.0;
            diag.singular_dims.push_back(1);
        }
        detail::record(diag.errdm, errd);
        if (errd[0] < config.tol) break;
    }
    diag.sweeps_used = std::min(s, config.maxswp);
    diag.converged = errd[0] < config.tol;
    if (!diag.converged) throw NotConverged("bivariate cross did not reach tol", diag);
    FunctionTrain train = cross.extract_cores();
    return {std::move(train), cross.sets(), cross.diagnostics()};
}

} // namespace ttkl
