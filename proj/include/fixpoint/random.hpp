#pragma once

// Reproducible randomness. Every random quantity in a run is drawn from a
// stream derived from one 64-bit seed:
//
//   child(seed, k) = splitmix64(seed + 0x9E3779B97F4A7C15 * (k + 1))
//
// Streams are std::mt19937_64 engines seeded with the derived value, so two
// consumers never share state and adding a consumer does not perturb others.

#include "fixpoint/hilbert.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace fixpoint {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t k) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ull * (k + 1));
}

/// FNV-1a, used to turn stream labels into stream indices.
inline std::uint64_t label_hash(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    Rng split(std::uint64_t k) const { return Rng(child_seed(seed_, k)); }
    Rng split(std::string_view label) const { return Rng(child_seed(seed_, label_hash(label))); }

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    Vector gaussian(Eigen::Index d, double scale = 1.0) {
        Vector v(d);
        for (Eigen::Index i = 0; i < d; ++i) v[i] = scale * normal();
        return v;
    }

    /// d x k matrix with orthonormal columns spanning a uniformly random
    /// k-dimensional subspace.
    Matrix orthonormal(Eigen::Index d, Eigen::Index k) {
        Matrix g(d, k);
        for (Eigen::Index j = 0; j < k; ++j) g.col(j) = gaussian(d);
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ() * Matrix::Identity(d, k);
        const Matrix& r = qr.matrixQR();
        for (Eigen::Index j = 0; j < k; ++j) {
            if (r(j, j) < 0.0) q.col(j) = -q.col(j);
        }
        return q;
    }

    /// Uniformly random orthogonal d x d matrix.
    Matrix orthogonal(Eigen::Index d) { return orthonormal(d, d); }

    /// Orthogonal d x d matrix without eigenvalue 1: random 2x2 rotations by
    /// angles in [0.2, pi - 0.2] in a random basis, and -1 on the last axis
    /// when d is odd.
    Matrix rotation_without_fixed_points(Eigen::Index d) {
        const double pi = std::acos(-1.0);
        Matrix blocks = Matrix::Zero(d, d);
        Eigen::Index i = 0;
        for (; i + 1 < d; i += 2) {
            const double a = uniform(0.2, pi - 0.2);
            blocks(i, i) = std::cos(a);
            blocks(i, i + 1) = -std::sin(a);
            blocks(i + 1, i) = std::sin(a);
            blocks(i + 1, i + 1) = std::cos(a);
        }
        if (i < d) blocks(i, i) = -1.0;
        const Matrix q = orthogonal(d);
        return q * blocks * q.transpose();
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace fixpoint
