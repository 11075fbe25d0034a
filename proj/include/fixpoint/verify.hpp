#pragma once

// Independent oracles and property checkers. Nothing here is used to steer
// an iteration; these functions only look at operators and finished traces.

#include "fixpoint/algorithms.hpp"
#include "fixpoint/hilbert.hpp"
#include "fixpoint/operators.hpp"
#include "fixpoint/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixpoint::verify {

// ---------------------------------------------------------------------------
// Closed-form fixed-point sets

/// Intersection of linear subspaces through 0, each given by a d x k matrix
/// of orthonormal columns. The intersection is the null space of the stacked
/// complement projectors (I - U U^T), read off a full SVD.
inline FixedPointSet oracle_subspace_intersection(const std::vector<Matrix>& bases) {
    if (bases.empty()) throw std::invalid_argument("oracle_subspace_intersection: no subspaces");
    const Eigen::Index d = bases.front().rows();
    Matrix stacked(d * static_cast<Eigen::Index>(bases.size()), d);
    for (std::size_t i = 0; i < bases.size(); ++i) {
        if (bases[i].rows() != d) {
            throw std::invalid_argument("oracle_subspace_intersection: dimension mismatch");
        }
        const Matrix& u = bases[i];
        stacked.block(static_cast<Eigen::Index>(i) * d, 0, d, d) =
            Matrix::Identity(d, d) - u * u.transpose();
    }
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double tol = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
    std::vector<Eigen::Index> null_cols;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double s = j < sv.size() ? sv[j] : 0.0;
        if (s <= tol) null_cols.push_back(j);
    }
    Matrix basis(d, static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t k = 0; k < null_cols.size(); ++k) basis.col(k) = svd.matrixV().col(null_cols[k]);
    return FixedPointSet::subspace(std::move(basis));
}

/// Intersection of affine sets b_i + span(U_i): solutions of
/// (I - U_i U_i^T)(z - b_i) = 0 for every i. Returns nullopt when the
/// stacked system is inconsistent (empty intersection).
inline std::optional<FixedPointSet> oracle_affine_intersection(const std::vector<FixedPointSet>& sets) {
    if (sets.empty()) throw std::invalid_argument("oracle_affine_intersection: no sets");
    const Eigen::Index d = sets.front().dim();
    const auto m = static_cast<Eigen::Index>(sets.size());
    Matrix a(d * m, d);
    Vector c(d * m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto* aff = sets[static_cast<std::size_t>(i)].as_affine();
        if (!aff) throw std::invalid_argument("oracle_affine_intersection: set has no affine description");
        if (aff->basepoint.size() != d) throw std::invalid_argument("oracle_affine_intersection: dimension mismatch");
        const Matrix comp = Matrix::Identity(d, d) - aff->basis * aff->basis.transpose();
        a.block(i * d, 0, d, d) = comp;
        c.segment(i * d, d) = comp * aff->basepoint;
    }
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double tol = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
    svd.setThreshold(tol / std::max(1.0, sv.size() ? sv[0] : 0.0));
    const Vector z = svd.solve(c);
    if ((a * z - c).norm() > 1e-9 * (1.0 + c.norm())) return std::nullopt;
    std::vector<Eigen::Index> null_cols;
    for (Eigen::Index j = 0; j < d; ++j) {
        if ((j < sv.size() ? sv[j] : 0.0) <= tol) null_cols.push_back(j);
    }
    Matrix basis(d, static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t k = 0; k < null_cols.size(); ++k) basis.col(k) = svd.matrixV().col(null_cols[k]);
    // Minimum-norm solution is orthogonal to the null space already.
    return FixedPointSet::affine(z, std::move(basis));
}

/// Orthonormal basis of the common fixed set {x : S(t) x = x for all t}.
inline Matrix semigroup_fixed_basis(const Semigroup& s) {
    const Eigen::Index d = s.dim();
    if (const auto* lin = std::get_if<LinearPSDGenerator>(&s.generator())) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (lin->a + lin->a.transpose()));
        std::vector<Eigen::Index> ker;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (eig.eigenvalues()[i] <= 1e-10) ker.push_back(i);
        }
        Matrix b(d, static_cast<Eigen::Index>(ker.size()));
        for (std::size_t k = 0; k < ker.size(); ++k) b.col(k) = eig.eigenvectors().col(ker[k]);
        return b;
    }
    if (const auto* rot = std::get_if<RotationGenerator>(&s.generator())) {
        std::vector<Eigen::Index> coords;
        const auto blocks = static_cast<Eigen::Index>(rot->rates.size());
        for (Eigen::Index b = 0; b < blocks; ++b) {
            if (rot->rates[b] == 0.0) {
                coords.push_back(2 * b);
                coords.push_back(2 * b + 1);
            }
        }
        for (Eigen::Index i = 2 * blocks; i < d; ++i) coords.push_back(i);
        Matrix b = Matrix::Zero(d, static_cast<Eigen::Index>(coords.size()));
        for (std::size_t k = 0; k < coords.size(); ++k) b(coords[k], k) = 1.0;
        return b;
    }
    throw std::invalid_argument("oracle_semigroup_fixset: custom semigroups have no closed-form fixed set");
}

inline FixedPointSet oracle_semigroup_fixset(const Semigroup& s) {
    return FixedPointSet::subspace(semigroup_fixed_basis(s));
}

// ---------------------------------------------------------------------------
// Brute-force projection (d <= 3)

namespace detail {

/// Three nested grids around `seed`: spacing radius/10 over the search box,
/// then radius/100 and radius/1000 in windows of two coarse spacings around
/// the running best. `accept(z, h)` decides feasibility at spacing h.
inline Vector grid_refine(const Vector& x0, const std::function<bool(const Vector&, double)>& accept,
                          const Vector& seed, double radius) {
    const Eigen::Index d = x0.size();
    if (d < 1 || d > 3) throw std::invalid_argument("brute_force_projection: dimension must be 1..3");
    require_same_dim(x0, seed, "brute_force_projection");
    if (!(radius > 0.0)) throw std::invalid_argument("brute_force_projection: radius must be positive");

    Vector center = seed;
    double h = radius / 10.0;
    int half = 10;
    std::optional<Vector> best;
    for (int level = 0; level < 3; ++level) {
        // Re-rank at every level: a thickened acceptance test shrinks with h.
        best.reset();
        double best_dist = std::numeric_limits<double>::infinity();
        std::vector<int> idx(static_cast<std::size_t>(d), -half);
        Vector z(d);
        for (;;) {
            for (Eigen::Index i = 0; i < d; ++i) z[i] = center[i] + h * idx[static_cast<std::size_t>(i)];
            const double dist = (z - x0).squaredNorm();
            if (dist < best_dist && accept(z, h)) {
                best_dist = dist;
                best = z;
            }
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] > half) idx[k++] = -half;
            if (k == idx.size()) break;
        }
        if (!best) throw std::runtime_error("brute_force_projection: no feasible grid point");
        center = *best;
        half = 20;
        h /= 10.0;
    }
    return *best;
}

}  // namespace detail

/// Best feasible grid point after three refinement levels (final spacing
/// radius/1000). For sets with interior, used in tests with d <= 3.
inline Vector brute_force_projection(const Vector& x0, const std::function<bool(const Vector&)>& member,
                                     const Vector& seed, double radius) {
    if (member(x0)) return x0;
    return detail::grid_refine(x0, [&](const Vector& z, double) { return member(z); }, seed, radius);
}

/// Variant for thin sets (affine subspaces): a grid point is accepted when
/// its distance to the set is at most half a grid diagonal at the current
/// spacing, so the coarse levels can see the set at all.
inline Vector brute_force_projection_thin(const Vector& x0,
                                          const std::function<double(const Vector&)>& distance,
                                          const Vector& seed, double radius) {
    const double half_diag = 0.5 * std::sqrt(static_cast<double>(x0.size()));
    return detail::grid_refine(
        x0, [&](const Vector& z, double h) { return distance(z) <= half_diag * h; }, seed, radius);
}

// ---------------------------------------------------------------------------
// Operator checks

inline Vector sample_point(Rng& rng, Eigen::Index d, double scale = 3.0) { return rng.gaussian(d, scale); }

struct CheckReport {
    bool passed = true;
    double max_violation = -std::numeric_limits<double>::infinity();
    std::size_t samples = 0;
    std::string detail;

    void record(double v, double tol) {
        ++samples;
        max_violation = std::max(max_violation, v);
        if (v > tol) passed = false;
    }
};

/// Fix(T) ⊂ H(x, Tx): <p - Tx, x - Tx> <= 1e-9 (1 + ||x||^2 + ||p||^2) for
/// random x and each supplied fixed point p.
inline CheckReport check_tc_class(const Mapping& t, const std::vector<Vector>& fixed_samples,
                                  std::size_t trials, Rng& rng, double tol = 1e-9) {
    CheckReport rep;
    for (const auto& p : fixed_samples) {
        if ((t(p) - p).norm() > 1e-10 * (1.0 + p.norm())) {
            throw std::invalid_argument("check_tc_class: sample is not a fixed point");
        }
    }
    for (std::size_t i = 0; i < trials; ++i) {
        const Vector x = sample_point(rng, t.dim());
        const Vector tx = t(x);
        for (const auto& p : fixed_samples) {
            const double v = (p - tx).dot(x - tx) / (1.0 + x.squaredNorm() + p.squaredNorm());
            rep.record(v, tol);
        }
    }
    return rep;
}

/// ||Tx - Ty|| <= ||x - y|| + tol on random pairs.
inline CheckReport check_nonexpansive(const Mapping& t, std::size_t trials, Rng& rng, double tol = 1e-9) {
    CheckReport rep;
    for (std::size_t i = 0; i < trials; ++i) {
        const Vector x = sample_point(rng, t.dim());
        const Vector y = sample_point(rng, t.dim());
        rep.record((t(x) - t(y)).norm() - (x - y).norm(), tol);
    }
    return rep;
}

/// ||Tx - Ty||^2 <= <x - y, Tx - Ty> + tol on random pairs.
inline CheckReport check_firmly_nonexpansive(const Mapping& t, std::size_t trials, Rng& rng,
                                             double tol = 1e-9) {
    CheckReport rep;
    for (std::size_t i = 0; i < trials; ++i) {
        const Vector x = sample_point(rng, t.dim());
        const Vector y = sample_point(rng, t.dim());
        const Vector dt = t(x) - t(y);
        rep.record(dt.squaredNorm() - (x - y).dot(dt), tol);
    }
    return rep;
}

/// 4 <z - Tx, x - Tx> = ||Rx - z||^2 - ||x - z||^2 for T = halve(R), checked
/// relative to 1 + ||x||^2 + ||z||^2.
inline CheckReport check_halving_identity(const Mapping& r, std::size_t trials, Rng& rng,
                                          double tol = 1e-8) {
    CheckReport rep;
    const Mapping t = halve(r);
    for (std::size_t i = 0; i < trials; ++i) {
        const Vector x = sample_point(rng, r.dim());
        const Vector z = sample_point(rng, r.dim());
        const Vector tx = t(x);
        const double lhs = 4.0 * (z - tx).dot(x - tx);
        const double rhs = (r(x) - z).squaredNorm() - (x - z).squaredNorm();
        rep.record(std::abs(lhs - rhs) / (1.0 + x.squaredNorm() + z.squaredNorm()), tol);
    }
    return rep;
}

struct LemmaReport {
    CheckReport averaged;       ///< b(1-b)||x - Tx||^2 <= 2(||x-p|| - ||T_b x - p||)||x-p||
    CheckReport composed;       ///< b(1-b)||x - Tx||^2 <= 2||x - S T_b x|| ||x-p||
    CheckReport triangle;       ///< ||x - Sx|| <= ||x - S T_b x|| + ||Tx - x||
    bool passed() const { return averaged.passed && composed.passed && triangle.passed; }
};

/// Evaluates the three averaged-operator inequalities at random x, p in F
/// and beta drawn from `betas` (each in the open interval (0, 1)).
inline LemmaReport lemma_battery(const Mapping& t, const Mapping& s, const FixedPointSet& f,
                                 const std::vector<double>& betas, std::size_t trials, Rng& rng,
                                 double tol = 1e-8) {
    if (betas.empty()) throw std::invalid_argument("lemma_battery: no beta values");
    for (double b : betas) {
        if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("lemma_battery: beta must lie in (0, 1)");
    }
    if (t.dim() != s.dim() || t.dim() != f.dim()) throw std::invalid_argument("lemma_battery: dimension mismatch");
    const bool s_nonexpansive = is_nonexpansive(s.declared_class());
    LemmaReport rep;
    for (std::size_t i = 0; i < trials; ++i) {
        const double b = betas[i % betas.size()];
        const Vector x = sample_point(rng, t.dim());
        const Vector p = f.project(sample_point(rng, t.dim()));
        const Vector tx = t(x);
        const Vector tbx = b * x + (1.0 - b) * tx;
        const Vector stbx = s(tbx);
        const double scale = 1.0 + x.squaredNorm() + p.squaredNorm();
        const double lhs = b * (1.0 - b) * (x - tx).squaredNorm();
        const double xp = (x - p).norm();
        rep.averaged.record((lhs - 2.0 * (xp - (tbx - p).norm()) * xp) / scale, tol);
        rep.composed.record((lhs - 2.0 * (x - stbx).norm() * xp) / scale, tol);
        if (s_nonexpansive) {
            rep.triangle.record(((x - s(x)).norm() - (x - stbx).norm() - (tx - x).norm()) / scale, tol);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Semigroup axioms

/// Composite 8-point Gauss-Legendre rule, independent of the adaptive
/// Simpson fallback used for custom semigroups.
inline Vector gauss_legendre(const std::function<Vector(double)>& f, double a, double b,
                             int panels = 64) {
    static const double nodes[] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                   0.9602898564975363};
    static const double weights[] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                     0.1012285362903763};
    const double h = (b - a) / panels;
    Vector acc = Vector::Zero(f(a).size());
    for (int k = 0; k < panels; ++k) {
        const double mid = a + (k + 0.5) * h;
        for (int i = 0; i < 4; ++i) {
            const double off = 0.5 * h * nodes[i];
            acc += weights[i] * (f(mid - off) + f(mid + off));
        }
    }
    return 0.5 * h * acc;
}

struct SemigroupReport {
    CheckReport identity_at_zero;
    CheckReport composition;
    CheckReport nonexpansive;
    CheckReport cesaro_quadrature;
    bool passed() const {
        return identity_at_zero.passed && composition.passed && nonexpansive.passed &&
               cesaro_quadrature.passed;
    }
};

inline SemigroupReport check_semigroup_axioms(const Semigroup& s, std::size_t trials, Rng& rng) {
    SemigroupReport rep;
    const auto d = s.dim();
    const Mapping id = s.at(0.0);
    for (std::size_t i = 0; i < trials; ++i) {
        const Vector x = sample_point(rng, d);
        const Vector y = sample_point(rng, d);
        const double t1 = rng.uniform(0.0, 3.0);
        const double t2 = rng.uniform(0.0, 3.0);
        rep.identity_at_zero.record((id(x) - x).norm() / (1.0 + x.norm()), 1e-12);
        const Vector lhs = s.at(t1 + t2)(x);
        const Vector rhs = s.at(t1)(s.at(t2)(x));
        rep.composition.record((lhs - rhs).norm() / (1.0 + x.norm()), 1e-10);
        const Mapping st = s.at(t1);
        rep.nonexpansive.record((st(x) - st(y)).norm() - (x - y).norm(), 1e-9);
    }
    const std::size_t quad_trials = std::max<std::size_t>(1, trials / 10);
    for (std::size_t i = 0; i < quad_trials; ++i) {
        const Vector x = sample_point(rng, d);
        const double t = rng.uniform(0.1, 5.0);
        const Vector exact = s.cesaro(t)(x);
        const Vector quad = gauss_legendre([&](double u) { return s.at(u)(x); }, 0.0, t) / t;
        rep.cesaro_quadrature.record((exact - quad).norm() / (1.0 + x.norm()), 1e-8);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Built-in nonexpansive zoo: every member fixes the common affine set F.

struct Zoo {
    FixedPointSet common;  ///< F, contained in Fix of every member
    std::vector<Mapping> members;
};

/// Builds the zoo in R^d around a random affine set of dimension k < d.
inline Zoo operator_zoo(Eigen::Index d, Eigen::Index k, Rng& rng) {
    if (d < 2 || k < 0 || k >= d) throw std::invalid_argument("operator_zoo: need 0 <= k < d, d >= 2");
    const Vector c = rng.gaussian(d);
    const Matrix q = rng.orthogonal(d);
    const Matrix b = q.leftCols(k);
    const Matrix w = q.rightCols(d - k);
    const Matrix pf = b * b.transpose();
    Zoo zoo{FixedPointSet::affine(c, b), {}};
    auto known = zoo.common;

    // Projection and reflection across c + span(b, one extra direction).
    Matrix vb(d, k + 1);
    vb << b, w.col(0);
    zoo.members.push_back(maps::projection(c, vb));
    zoo.members.push_back(maps::reflection(c, vb));

    const Matrix g = rng.rotation_without_fixed_points(d - k);
    zoo.members.push_back(maps::affine_about(c, pf + w * g * w.transpose(),
                                             OperatorClass::Nonexpansive, known, "rotation"));
    const double gamma = rng.uniform(0.0, 0.95);
    zoo.members.push_back(maps::affine_about(c, pf + gamma * w * g * w.transpose(),
                                             OperatorClass::Nonexpansive, known, "contraction"));
    zoo.members.push_back(maps::affine_about(c, pf - w * w.transpose(), OperatorClass::Nonexpansive,
                                             known, "point_reflection"));

    Vector decay(d - k);
    const double t = rng.uniform(0.1, 2.0);
    for (Eigen::Index i = 0; i < decay.size(); ++i) decay[i] = std::exp(-t * rng.uniform(0.2, 2.0));
    zoo.members.push_back(maps::affine_about(c, pf + w * decay.asDiagonal() * w.transpose(),
                                             OperatorClass::FirmlyNonexpansive, known,
                                             "heat_semigroup"));
    return zoo;
}

// ---------------------------------------------------------------------------
// Orbit diagnostics

struct CoherenceReport {
    std::string orbit_source;
    double sum_squared_steps = 0.0;
    double sum_squared_residuals = 0.0;
    Vector cluster_estimate;
    std::vector<double> cluster_residuals;  ///< ||z* - T z*|| per probe
    bool residuals_decayed = false;
    bool coherent_evidence = false;
};

/// Points averaged for the cluster estimate: the final 10%, at least 10.
/// Traces shorter than 10 use only their last iterate.
inline std::size_t cluster_tail_length(std::size_t steps) {
    if (steps < 10) return 1;
    return std::max<std::size_t>(10, steps / 10);
}

/// Steps scanned by the cascade check: the final 10%, at least one.
inline std::size_t tail_length(std::size_t steps) {
    return std::min(steps, std::max<std::size_t>(1, steps / 10));
}

inline CoherenceReport check_nst_on_orbit(const IterationTrace& trace, const std::vector<Mapping>& probes,
                                          double tol = 1e-6) {
    if (trace.steps.empty()) throw std::invalid_argument("check_nst_on_orbit: empty trace");
    CoherenceReport rep;
    rep.orbit_source = trace.algorithm;
    rep.sum_squared_steps = trace.sum_squared_steps();
    rep.sum_squared_residuals = trace.sum_squared_residuals();
    const std::size_t m = cluster_tail_length(trace.steps.size());
    rep.cluster_estimate = Vector::Zero(trace.x0.size());
    double tail_residual = 0.0;
    for (std::size_t i = trace.steps.size() - m; i < trace.steps.size(); ++i) {
        rep.cluster_estimate += trace.steps[i].x;
        tail_residual = std::max(tail_residual, trace.steps[i].residual);
    }
    rep.cluster_estimate /= static_cast<double>(m);
    bool all_small = true;
    for (const auto& t : probes) {
        const double r = (rep.cluster_estimate - t(rep.cluster_estimate)).norm();
        rep.cluster_residuals.push_back(r);
        all_small = all_small && r < tol;
    }
    rep.residuals_decayed = tail_residual < tol;
    const bool finite = std::isfinite(rep.sum_squared_steps) && std::isfinite(rep.sum_squared_residuals);
    rep.coherent_evidence = finite && rep.residuals_decayed && all_small;
    return rep;
}

struct CascadeReport {
    std::vector<double> tail_max;  ///< per level k: max over the tail of ||x_n - T^(k)_n x_n||
    std::vector<bool> decayed;
    bool all_decayed() const {
        return std::all_of(decayed.begin(), decayed.end(), [](bool b) { return b; });
    }
};

inline CascadeReport check_gamma_cascade(const IterationTrace& trace, const GammaTower& tower,
                                         double tol = 1e-5) {
    if (trace.steps.empty()) throw std::invalid_argument("check_gamma_cascade: empty trace");
    if (trace.x0.size() != tower.dim()) throw std::invalid_argument("check_gamma_cascade: tower/trace dimension mismatch");
    CascadeReport rep;
    rep.tail_max.assign(tower.levels(), 0.0);
    const std::size_t m = tail_length(trace.steps.size());
    for (std::size_t i = trace.steps.size() - m; i < trace.steps.size(); ++i) {
        const auto& st = trace.steps[i];
        for (std::size_t k = 0; k < tower.levels(); ++k) {
            const double r = (st.x - tower.level_map(k, st.n)(st.x)).norm();
            rep.tail_max[k] = std::max(rep.tail_max[k], r);
        }
    }
    for (double v : rep.tail_max) rep.decayed.push_back(v < tol);
    return rep;
}

// ---------------------------------------------------------------------------
// Projector agreement with the brute-force oracle

//
// A grid point can sit far from the true projection along the boundary while
// being almost as close to x0, so agreement is judged on two facts that do
// not depend on where the grid happens to land:
//   | ||x0 - bf|| - ||x0 - P x0|| | <= 2 h                (distance value)
//   ||bf - P x0||^2 <= ||bf - x0||^2 - ||P x0 - x0||^2 + eps
// The second one is the strong-convexity inequality that holds for every
// feasible bf exactly when P x0 is the metric projection.

struct ProjectorAgreement {
    std::size_t instances = 0;
    std::size_t failures = 0;
    double worst_gap_ratio = 0.0;       ///< worst distance gap / grid resolution
    double worst_convexity_excess = 0.0;
    std::vector<std::string> failed;
    bool passed() const { return failures == 0; }

    void record(const std::string& what, const Vector& x0, const Vector& exact, const Vector& bf,
                double resolution, bool check_convexity, bool exact_feasible) {
        ++instances;
        const double gap = std::abs((bf - x0).norm() - (exact - x0).norm());
        const double excess = (bf - exact).squaredNorm() - (bf - x0).squaredNorm() +
                              (exact - x0).squaredNorm();
        worst_gap_ratio = std::max(worst_gap_ratio, gap / resolution);
        if (check_convexity) worst_convexity_excess = std::max(worst_convexity_excess, excess);
        const bool ok = exact_feasible && gap <= 2.0 * resolution &&
                        (!check_convexity || excess <= 1e-9 * (1.0 + x0.squaredNorm()));
        if (!ok) {
            ++failures;
            failed.push_back(what);
        }
    }
};

/// Random instances in dimensions 1..3 of every exact projector: ball, box,
/// affine subspace, single half-space, two half-spaces and a three-cut
/// polyhedron, each compared with brute_force_projection.
inline ProjectorAgreement check_projectors_vs_brute_force(std::size_t instances, Rng& rng) {
    ProjectorAgreement rep;
    for (std::size_t i = 0; i < instances; ++i) {
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(i % 3);
        const Vector x0 = rng.gaussian(d, 3.0);
        const Vector center = rng.gaussian(d);
        // Set sizes scale with the search radius so the coarse grid sees them.
        const double radius = (x0 - center).norm() + 1.0;
        const double h = radius / 1000.0;
        const std::string tag = " #" + std::to_string(i) + " d=" + std::to_string(d);

        auto run_set = [&](const std::string& what, const ConvexSet& c, bool thin) {
            const Vector exact = project_convex(x0, c);
            const Vector bf =
                thin ? brute_force_projection_thin(
                           x0, [&](const Vector& z) { return (project_convex(z, c) - z).norm(); }, x0, radius)
                     : brute_force_projection(x0, [&](const Vector& z) { return c.contains(z, 0.0); }, x0,
                                              radius);
            rep.record(what + tag, x0, exact, bf, h, !thin, c.contains(exact, 1e-9));
        };

        switch (i % 6) {
            case 0:
                run_set("ball", ConvexSet::ball(center, radius * rng.uniform(0.15, 0.6)), false);
                break;
            case 1: {
                Vector half(d);
                for (Eigen::Index k = 0; k < d; ++k) half[k] = radius * rng.uniform(0.15, 0.6);
                run_set("box", ConvexSet::box(center - half, center + half), false);
                break;
            }
            case 2: {
                const Eigen::Index k = d == 1 ? 0 : 1 + static_cast<Eigen::Index>(rng.uniform(0.0, 1.0) * (d - 1));
                run_set("affine", ConvexSet::affine(center, rng.orthonormal(d, k)), true);
                break;
            }
            default: {
                // One to three cuts, all keeping a ball of radius 0.2 * radius
                // around `center` feasible.
                const std::size_t cuts = i % 6 - 2;
                std::vector<HalfSpace> hs;
                for (std::size_t k = 0; k < cuts; ++k) {
                    const Vector n = rng.gaussian(d);
                    hs.push_back(HalfSpace{n, n.dot(center) + n.norm() * radius * rng.uniform(0.2, 0.5), false});
                }
                auto member = [&](const Vector& z) {
                    return std::all_of(hs.begin(), hs.end(), [&](const HalfSpace& hh) { return hh.excess(z) <= 0.0; });
                };
                Vector exact;
                std::string what;
                if (cuts == 1) {
                    exact = project_halfspace(x0, hs[0]);
                    what = "halfspace";
                } else if (cuts == 2) {
                    exact = *project_two_halfspaces(x0, hs[0], hs[1]);
                    what = "two_halfspaces";
                } else {
                    PolyhedralAccumulator acc(ConvexSet::whole(d));
                    for (const auto& hh : hs) acc.append(hh);
                    exact = *project_polyhedron(x0, acc);
                    what = "polyhedron";
                }
                const bool feasible = std::all_of(hs.begin(), hs.end(), [&](const HalfSpace& hh) {
                    return hh.contains(exact, 1e-9);
                });
                rep.record(what + tag, x0, exact, brute_force_projection(x0, member, x0, radius), h,
                           true, feasible);
            }
        }
    }
    return rep;
}

struct IterativeAgreement {
    CheckReport dykstra;     ///< Dykstra vs the two-constraint KKT enumeration
    CheckReport active_set;  ///< active-set projector vs the same
    bool passed() const { return dykstra.passed && active_set.passed; }
};

/// Random pairs of half-spaces in dimensions 2..5 whose normals satisfy
/// |cos| <= 0.99, so the intersection is nonempty and Dykstra's linear rate
/// stays usable: the iterative polyhedral projectors must match
/// project_two_halfspaces to tol (1 + ||x0||).
inline IterativeAgreement check_polyhedral_vs_kkt(std::size_t instances, Rng& rng, double tol = 1e-8) {
    IterativeAgreement rep;
    for (std::size_t i = 0; i < instances; ++i) {
        const Eigen::Index d = 2 + static_cast<Eigen::Index>(i % 4);
        const Vector x0 = rng.gaussian(d, 3.0);
        std::vector<HalfSpace> hs;
        while (hs.size() < 2) {
            const Vector n = rng.gaussian(d);
            if (!hs.empty() && std::abs(n.normalized().dot(hs[0].normal.normalized())) > 0.99) continue;
            hs.push_back(HalfSpace{n, rng.uniform(-2.0, 2.0) * n.norm(), false});
        }
        const auto exact = project_two_halfspaces(x0, hs[0], hs[1]);
        if (!exact) {
            rep.dykstra.record(std::numeric_limits<double>::infinity(), tol);
            continue;
        }
        PolyhedralAccumulator acc(ConvexSet::whole(d));
        acc.append(hs[0]);
        acc.append(hs[1]);
        const double scale = 1.0 + x0.norm();
        const auto dyk = project_polyhedron_dykstra(x0, acc);
        rep.dykstra.record(dyk ? (*dyk - *exact).norm() / scale : std::numeric_limits<double>::infinity(), tol);
        PolyhedralProjector proj(x0);
        proj.add(hs[0]);
        proj.add(hs[1]);
        const auto as = proj.solve();
        rep.active_set.record(as ? (*as - *exact).norm() / scale : std::numeric_limits<double>::infinity(), tol);
    }
    return rep;
}

}  // namespace fixpoint::verify
