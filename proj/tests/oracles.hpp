#pragma once

// Test-side oracles that share no code with the library: exact small QPs by
// active-set enumeration, explicit matrix closed forms and plain grids.

#include "fixpoint/hilbert.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using fixpoint::Matrix;
using fixpoint::Vector;

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

/// argmin ||z - x0|| subject to a z <= b, by trying every active set and
/// keeping the KKT point. Only for a handful of rows.
inline std::optional<Vector> qp_enumerate(const Vector& x0, const Matrix& a, const Vector& b,
                                          double tol = 1e-9) {
    const auto m = a.rows();
    std::optional<Vector> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (long mask = 0; mask < (1L << m); ++mask) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (mask & (1L << i)) rows.push_back(i);
        }
        Vector z = x0;
        Vector lambda;
        if (!rows.empty()) {
            Matrix as(static_cast<Eigen::Index>(rows.size()), a.cols());
            Vector bs(as.rows());
            for (std::size_t k = 0; k < rows.size(); ++k) {
                as.row(static_cast<Eigen::Index>(k)) = a.row(rows[k]);
                bs[static_cast<Eigen::Index>(k)] = b[rows[k]];
            }
            const Matrix g = as * as.transpose();
            lambda = g.completeOrthogonalDecomposition().solve(as * x0 - bs);
            z = x0 - as.transpose() * lambda;
            if ((as * z - bs).cwiseAbs().maxCoeff() > tol * (1.0 + bs.cwiseAbs().maxCoeff())) continue;
            if (lambda.minCoeff() < -tol) continue;
        }
        if (((a * z - b).array() > tol * (1.0 + b.cwiseAbs().maxCoeff())).any()) continue;
        const double dist = (z - x0).norm();
        if (dist < best_dist) {
            best_dist = dist;
            best = z;
        }
    }
    return best;
}

/// Same, for half-spaces given as {z : <z, n> <= c}.
inline std::optional<Vector> qp_enumerate(const Vector& x0, const std::vector<fixpoint::HalfSpace>& hs,
                                          double tol = 1e-9) {
    Matrix a(static_cast<Eigen::Index>(hs.size()), x0.size());
    Vector b(a.rows());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        a.row(static_cast<Eigen::Index>(i)) = hs[i].normal.transpose();
        b[static_cast<Eigen::Index>(i)] = hs[i].offset;
    }
    return qp_enumerate(x0, a, b, tol);
}

/// Orthogonal projector onto span(basis) through a least-squares solve,
/// without assuming orthonormal columns.
inline Matrix span_projector(const Matrix& basis) {
    if (basis.cols() == 0) return Matrix::Zero(basis.rows(), basis.rows());
    const Matrix g = basis.transpose() * basis;
    return basis * g.ldlt().solve(basis.transpose());
}

/// Closest point to x0 among points on a circle of radius r around c,
/// sampled at `k` angles (d = 2 only).
inline Vector circle_grid_min(const Vector& x0, const Vector& c, double r, int k) {
    Vector best = c;
    double best_dist = std::numeric_limits<double>::infinity();
    const double pi = std::acos(-1.0);
    for (int i = 0; i < k; ++i) {
        const double th = 2.0 * pi * i / k;
        Vector z = c + r * vec({std::cos(th), std::sin(th)});
        const double dist = (z - x0).norm();
        if (dist < best_dist) {
            best_dist = dist;
            best = z;
        }
    }
    return best;
}

/// Composite Simpson rule with n (even) panels, for scalar integrands.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace oracle
