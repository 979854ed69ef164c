#pragma once

// Scrambled Halton points. Each run draws one random digit permutation per
// prime base from the seed; the same seed reproduces the same point set.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace ttkl::qmc {

inline std::vector<std::uint32_t> first_primes(std::size_t count) {
    std::vector<std::uint32_t> primes;
    for (std::uint32_t c = 2; primes.size() < count; ++c) {
        bool prime = true;
        for (std::uint32_t p : primes) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) primes.push_back(c);
    }
    return primes;
}

class Halton {
public:
    /// Unscrambled sequence (identity digit permutations).
    explicit Halton(std::size_t dim) : bases_(first_primes(dim)), perms_(dim) {
        for (std::size_t d = 0; d < dim; ++d) {
            perms_[d].resize(bases_[d]);
            std::iota(perms_[d].begin(), perms_[d].end(), 0u);
        }
    }

    Halton(std::size_t dim, std::uint64_t seed) : Halton(dim) {
        std::mt19937_64 rng(seed);
        for (auto& p : perms_) std::shuffle(p.begin(), p.end(), rng);
    }

    std::size_t dim() const { return bases_.size(); }

    /// Coordinate d of point `index` (index 0 is the first point, i.e. radical inverse of 1).
    double coordinate(std::uint64_t index, std::size_t d) const {
        const std::uint32_t b = bases_[d];
        const auto& perm = perms_[d];
        // digits are summed as an integer below 2^52 so bin edges stay exact
        std::uint64_t n = index + 1, acc = 0, denom = 1;
        while (denom <= (std::uint64_t{1} << 52) / b) {
            acc = acc * b + perm[n % b];
            n /= b;
            denom *= b;
        }
        return static_cast<double>(acc) / static_cast<double>(denom);
    }

    void point(std::uint64_t index, double* out) const {
        for (std::size_t d = 0; d < dim(); ++d) out[d] = coordinate(index, d);
    }

    /// count x dim matrix of consecutive points.
    Eigen::MatrixXd points(std::size_t count) const {
        Eigen::MatrixXd p(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim()));
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t d = 0; d < dim(); ++d) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = coordinate(i, d);
        return p;
    }

private:
    std::vector<std::uint32_t> bases_;
    std::vector<std::vector<std::uint32_t>> perms_;
};

/// Derive an independent stream seed from a run seed and a call counter.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace ttkl::qmc
