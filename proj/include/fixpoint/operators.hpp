#pragma once

// Operator constructions: mappings with declared regularity, the halving
// wrapper (R + Id)/2, relaxations, the N-level Gamma recursion, nonexpansive
// semigroups with their Cesàro averages, and the alpha / time schedules that
// drive them.

#include "fixpoint/hilbert.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fixpoint {

// ---------------------------------------------------------------------------
// Fixed-point sets

/// A set with an exact metric projection. Used both for known fixed points of
/// a mapping and for closed-form oracles of F.
class FixedPointSet {
public:
    struct Affine {
        Vector basepoint;
        Matrix basis;  ///< orthonormal columns; zero columns means a single point
    };
    struct Explicit {
        Eigen::Index dim;
        std::function<Vector(const Vector&)> project;
    };

    static FixedPointSet affine(Vector basepoint, Matrix basis) {
        if (basis.rows() != basepoint.size()) {
            throw std::invalid_argument("FixedPointSet::affine: basis rows must equal dimension");
        }
        return FixedPointSet(Affine{std::move(basepoint), std::move(basis)});
    }
    /// Linear subspace through the origin spanned by orthonormal columns.
    static FixedPointSet subspace(Matrix basis) {
        const auto d = basis.rows();
        return affine(Vector::Zero(d), std::move(basis));
    }
    static FixedPointSet singleton(Vector p) {
        const auto d = p.size();
        return affine(std::move(p), Matrix(d, 0));
    }
    static FixedPointSet whole(Eigen::Index d) { return subspace(Matrix::Identity(d, d)); }
    static FixedPointSet explicit_set(Eigen::Index d, std::function<Vector(const Vector&)> proj) {
        return FixedPointSet(Explicit{d, std::move(proj)});
    }

    Eigen::Index dim() const {
        if (const auto* a = std::get_if<Affine>(&kind_)) return a->basepoint.size();
        return std::get<Explicit>(kind_).dim;
    }

    const Affine* as_affine() const { return std::get_if<Affine>(&kind_); }
    bool is_singleton() const { return as_affine() && as_affine()->basis.cols() == 0; }

    Vector project(const Vector& x) const {
        if (x.size() != dim()) throw std::invalid_argument("FixedPointSet::project: dimension mismatch");
        if (const auto* a = as_affine()) {
            if (a->basis.cols() == 0) return a->basepoint;
            return a->basepoint + a->basis * (a->basis.transpose() * (x - a->basepoint));
        }
        return std::get<Explicit>(kind_).project(x);
    }

    bool contains(const Vector& x, double tol = 1e-9) const {
        return (project(x) - x).norm() <= tol;
    }

private:
    explicit FixedPointSet(std::variant<Affine, Explicit> k) : kind_(std::move(k)) {}
    std::variant<Affine, Explicit> kind_;
};

// ---------------------------------------------------------------------------
// Mappings

enum class OperatorClass { Nonexpansive, QuasiNonexpansive, FirmlyNonexpansive, TCclass };

inline const char* to_string(OperatorClass c) {
    switch (c) {
        case OperatorClass::Nonexpansive: return "nonexpansive";
        case OperatorClass::QuasiNonexpansive: return "quasi-nonexpansive";
        case OperatorClass::FirmlyNonexpansive: return "firmly-nonexpansive";
        case OperatorClass::TCclass: return "tc-class";
    }
    return "?";
}

/// Nonexpansive in the Lipschitz sense (firmly nonexpansive included).
inline bool is_nonexpansive(OperatorClass c) {
    return c == OperatorClass::Nonexpansive || c == OperatorClass::FirmlyNonexpansive;
}

/// Weakest class satisfied by a map of class a and a map of class b.
inline OperatorClass common_class(OperatorClass a, OperatorClass b) {
    using C = OperatorClass;
    if (a == b) return a;
    auto firm_or_tc = [](C c) { return c == C::FirmlyNonexpansive || c == C::TCclass; };
    if (firm_or_tc(a) && firm_or_tc(b)) return C::TCclass;
    if (is_nonexpansive(a) && is_nonexpansive(b)) return C::Nonexpansive;
    return C::QuasiNonexpansive;
}

class Mapping {
public:
    using Fn = std::function<Vector(const Vector&)>;

    Mapping(Fn fn, Eigen::Index dim, OperatorClass cls,
            std::optional<FixedPointSet> known_fixed = std::nullopt, std::string name = {})
        : fn_(std::move(fn)), dim_(dim), cls_(cls), fixed_(std::move(known_fixed)),
          name_(std::move(name)) {
        if (!fn_) throw std::invalid_argument("Mapping: empty function");
        if (fixed_ && fixed_->dim() != dim_) {
            throw std::invalid_argument("Mapping: fixed-point set dimension mismatch");
        }
    }

    Vector operator()(const Vector& x) const {
        if (x.size() != dim_) {
            throw std::invalid_argument("Mapping '" + name_ + "': dimension mismatch");
        }
        return fn_(x);
    }

    Eigen::Index dim() const { return dim_; }
    OperatorClass declared_class() const { return cls_; }
    /// A subset of Fix(T) known in closed form (not necessarily all of it).
    const std::optional<FixedPointSet>& known_fixed_points() const { return fixed_; }
    const std::string& name() const { return name_; }

private:
    Fn fn_;
    Eigen::Index dim_;
    OperatorClass cls_;
    std::optional<FixedPointSet> fixed_;
    std::string name_;
};

namespace maps {

inline Mapping identity(Eigen::Index d) {
    return Mapping([](const Vector& x) { return x; }, d, OperatorClass::FirmlyNonexpansive,
                   FixedPointSet::whole(d), "identity");
}

/// x -> M x; the caller declares the class.
inline Mapping linear(Matrix m, OperatorClass cls, std::optional<FixedPointSet> fixed = std::nullopt,
                      std::string name = "linear") {
    if (m.rows() != m.cols()) throw std::invalid_argument("maps::linear: matrix must be square");
    const auto d = m.rows();
    return Mapping([m = std::move(m)](const Vector& x) -> Vector { return m * x; }, d, cls,
                   std::move(fixed), std::move(name));
}

/// x -> c + M (x - c).
inline Mapping affine_about(Vector c, Matrix m, OperatorClass cls,
                            std::optional<FixedPointSet> fixed = std::nullopt,
                            std::string name = "affine") {
    if (m.rows() != m.cols() || m.rows() != c.size()) {
        throw std::invalid_argument("maps::affine_about: shape mismatch");
    }
    const auto d = c.size();
    return Mapping([c = std::move(c), m = std::move(m)](const Vector& x) -> Vector {
        return c + m * (x - c);
    }, d, cls, std::move(fixed), std::move(name));
}

/// Orthogonal projection onto basepoint + span(basis).
inline Mapping projection(Vector basepoint, Matrix basis) {
    const auto d = basepoint.size();
    auto fixed = FixedPointSet::affine(basepoint, basis);
    return Mapping([set = fixed](const Vector& x) { return set.project(x); }, d,
                   OperatorClass::FirmlyNonexpansive, fixed, "projection");
}

inline Mapping projection(const ConvexSet& c) {
    return Mapping([c](const Vector& x) { return project_convex(x, c); }, c.dim(),
                   OperatorClass::FirmlyNonexpansive, std::nullopt, "projection:" + c.name());
}

/// Reflection 2P - Id across basepoint + span(basis).
inline Mapping reflection(Vector basepoint, Matrix basis) {
    const auto d = basepoint.size();
    auto fixed = FixedPointSet::affine(basepoint, basis);
    return Mapping([set = fixed](const Vector& x) -> Vector { return 2.0 * set.project(x) - x; }, d,
                   OperatorClass::Nonexpansive, fixed, "reflection");
}

/// x -> p, Fix = {p}.
inline Mapping constant(Vector p) {
    const auto d = p.size();
    auto fixed = FixedPointSet::singleton(p);
    return Mapping([p = std::move(p)](const Vector&) { return p; }, d,
                   OperatorClass::Nonexpansive, fixed, "constant");
}

/// x -> factor * x. Nonexpansive only for |factor| <= 1; larger factors are
/// declared quasi-nonexpansive so that checkers can catch the lie.
inline Mapping scale(double factor, Eigen::Index d) {
    const auto cls = std::abs(factor) <= 1.0 ? OperatorClass::Nonexpansive
                                             : OperatorClass::QuasiNonexpansive;
    std::optional<FixedPointSet> fixed;
    if (factor == 1.0) fixed = FixedPointSet::whole(d);
    else fixed = FixedPointSet::singleton(Vector::Zero(d));
    return Mapping([factor](const Vector& x) -> Vector { return factor * x; }, d, cls, fixed,
                   "scale");
}

inline Mapping compose(const Mapping& outer, const Mapping& inner_map) {
    if (outer.dim() != inner_map.dim()) throw std::invalid_argument("maps::compose: dimension mismatch");
    const bool ne = is_nonexpansive(outer.declared_class()) &&
                    is_nonexpansive(inner_map.declared_class());
    return Mapping([outer, inner_map](const Vector& x) { return outer(inner_map(x)); },
                   outer.dim(),
                   ne ? OperatorClass::Nonexpansive : OperatorClass::QuasiNonexpansive,
                   std::nullopt, outer.name() + "∘" + inner_map.name());
}

}  // namespace maps

/// T = (R + Id)/2. Fix(T) = Fix(R). Firmly nonexpansive when R is
/// nonexpansive, T_C-class when R is only quasi-nonexpansive.
inline Mapping halve(const Mapping& r) {
    const auto cls = is_nonexpansive(r.declared_class()) ? OperatorClass::FirmlyNonexpansive
                                                         : OperatorClass::TCclass;
    return Mapping([r](const Vector& x) -> Vector { return 0.5 * (r(x) + x); }, r.dim(), cls,
                   r.known_fixed_points(), "halve(" + r.name() + ")");
}

// ---------------------------------------------------------------------------
// Families n -> T_n

class OperatorFamily {
public:
    using Fn = std::function<Mapping(std::size_t)>;

    OperatorFamily(Fn at, Eigen::Index dim, OperatorClass cls, std::string description)
        : at_(std::move(at)), dim_(dim), cls_(cls), description_(std::move(description)) {}

    Mapping at(std::size_t n) const {
        Mapping m = at_(n);
        if (m.dim() != dim_) throw std::logic_error("OperatorFamily: member dimension changed");
        return m;
    }
    Mapping operator[](std::size_t n) const { return at(n); }

    Eigen::Index dim() const { return dim_; }
    OperatorClass declared_class() const { return cls_; }
    const std::string& description() const { return description_; }

    static OperatorFamily constant(Mapping m) {
        const auto d = m.dim();
        const auto cls = m.declared_class();
        std::string desc = "constant(" + m.name() + ")";
        return OperatorFamily([m = std::move(m)](std::size_t) { return m; }, d, cls, std::move(desc));
    }

    /// n -> members[n mod k].
    static OperatorFamily cyclic(std::vector<Mapping> members) {
        if (members.empty()) throw std::invalid_argument("OperatorFamily::cyclic: no members");
        const auto d = members.front().dim();
        auto cls = members.front().declared_class();
        for (const auto& m : members) {
            if (m.dim() != d) throw std::invalid_argument("OperatorFamily::cyclic: members must share dimension");
            cls = common_class(cls, m.declared_class());
        }
        return OperatorFamily(
            [members = std::move(members)](std::size_t n) { return members[n % members.size()]; },
            d, cls, "cyclic");
    }

private:
    Fn at_;
    Eigen::Index dim_;
    OperatorClass cls_;
    std::string description_;
};

/// n -> halve(R_n).
inline OperatorFamily halve(const OperatorFamily& r) {
    const auto cls = is_nonexpansive(r.declared_class()) ? OperatorClass::FirmlyNonexpansive
                                                         : OperatorClass::TCclass;
    return OperatorFamily([r](std::size_t n) { return halve(r.at(n)); }, r.dim(), cls,
                          "halve(" + r.description() + ")");
}

/// T'_n x = x + lambda_n (T x - x) with lambda_n in [delta, 1], delta in (0, 1].
/// A lambda outside the range throws when the member is requested.
inline OperatorFamily relax(const Mapping& t, std::function<double(std::size_t)> lambda,
                            double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("relax: delta must lie in (0, 1]");
    return OperatorFamily(
        [t, lambda = std::move(lambda), delta](std::size_t n) {
            const double l = lambda(n);
            if (!(l >= delta && l <= 1.0)) {
                throw std::invalid_argument("relax: lambda_" + std::to_string(n) + " = " +
                                            std::to_string(l) + " outside [delta, 1]");
            }
            return Mapping([t, l](const Vector& x) -> Vector { return x + l * (t(x) - x); }, t.dim(),
                           t.declared_class(), t.known_fixed_points(), "relax(" + t.name() + ")");
        },
        t.dim(), t.declared_class(), "relax(" + t.name() + ")");
}

// ---------------------------------------------------------------------------
// Gamma recursion
//
//   G^(N+1)_n x = x
//   G^(j)_n x   = alpha^(j)_n x + (1 - alpha^(j)_n) T^(j)_n G^(j+1)_n x

/// Per-level relaxation parameters. Level 1 may take values in [0, b); the
/// deeper levels must stay inside (a, b) with 0 < a < b < 1.
class AlphaSchedule {
public:
    using Fn = std::function<double(std::size_t)>;

    AlphaSchedule(std::vector<Fn> levels, double a, double b)
        : levels_(std::move(levels)), a_(a), b_(b) {
        if (!(0.0 < a_ && a_ < b_ && b_ < 1.0)) {
            throw std::invalid_argument("AlphaSchedule: bounds must satisfy 0 < a < b < 1");
        }
        if (levels_.empty()) throw std::invalid_argument("AlphaSchedule: no levels");
    }

    static AlphaSchedule constant(const std::vector<double>& values, double a = 0.1, double b = 0.9) {
        std::vector<Fn> fns;
        for (double v : values) fns.emplace_back([v](std::size_t) { return v; });
        return AlphaSchedule(std::move(fns), a, b);
    }

    std::size_t levels() const { return levels_.size(); }
    double a() const { return a_; }
    double b() const { return b_; }

    /// alpha^(level+1)_n, level counted from 0.
    double value(std::size_t level, std::size_t n) const { return levels_.at(level)(n); }

    /// Checks the bounds on the first `prefix` indices; throws on violation.
    void validate(std::size_t prefix = 1000) const {
        for (std::size_t j = 0; j < levels_.size(); ++j) {
            for (std::size_t n = 0; n < prefix; ++n) {
                const double v = levels_[j](n);
                const bool ok = j == 0 ? (v >= 0.0 && v < b_) : (v > a_ && v < b_);
                if (!ok) {
                    throw std::invalid_argument("AlphaSchedule: alpha^(" + std::to_string(j + 1) +
                                                ")_" + std::to_string(n) + " = " +
                                                std::to_string(v) + " violates the bounds");
                }
            }
        }
    }

private:
    std::vector<Fn> levels_;
    double a_;
    double b_;
};

class GammaTower {
public:
    GammaTower(std::vector<OperatorFamily> levels, AlphaSchedule alphas)
        : levels_(std::move(levels)), alphas_(std::move(alphas)) {
        if (levels_.empty()) throw std::invalid_argument("gamma_tower: no levels");
        if (levels_.size() != alphas_.levels()) {
            throw std::invalid_argument("gamma_tower: " + std::to_string(levels_.size()) +
                                        " families but " + std::to_string(alphas_.levels()) +
                                        " alpha levels");
        }
        const auto d = levels_.front().dim();
        for (const auto& f : levels_) {
            if (f.dim() != d) throw std::invalid_argument("gamma_tower: dimension mismatch");
            if (!is_nonexpansive(f.declared_class())) {
                throw std::invalid_argument("gamma_tower: level family '" + f.description() +
                                            "' is not declared nonexpansive");
            }
        }
        alphas_.validate();
    }

    std::size_t levels() const { return levels_.size(); }
    Eigen::Index dim() const { return levels_.front().dim(); }
    const AlphaSchedule& alphas() const { return alphas_; }

    /// T^(level+1)_n.
    Mapping level_map(std::size_t level, std::size_t n) const { return levels_.at(level).at(n); }

    /// G^(level+1)_n, level counted from 0; level == levels() gives Id.
    Mapping gamma(std::size_t level, std::size_t n) const {
        if (level > levels_.size()) throw std::out_of_range("GammaTower::gamma: level");
        std::vector<Mapping> ts;
        std::vector<double> as;
        for (std::size_t j = level; j < levels_.size(); ++j) {
            ts.push_back(levels_[j].at(n));
            as.push_back(alphas_.value(j, n));
        }
        return Mapping(
            [ts = std::move(ts), as = std::move(as)](const Vector& x) -> Vector {
                Vector y = x;
                for (std::size_t k = ts.size(); k-- > 0;) {
                    y = as[k] * x + (1.0 - as[k]) * ts[k](y);
                }
                return y;
            },
            dim(), OperatorClass::Nonexpansive, std::nullopt,
            "gamma" + std::to_string(level + 1));
    }

    /// n -> G^(1)_n, the R_n fed to the drivers.
    OperatorFamily family() const {
        auto self = *this;
        return OperatorFamily([self](std::size_t n) { return self.gamma(0, n); }, dim(),
                              OperatorClass::Nonexpansive,
                              "gamma_tower(N=" + std::to_string(levels_.size()) + ")");
    }

private:
    std::vector<OperatorFamily> levels_;
    AlphaSchedule alphas_;
};

inline GammaTower gamma_tower(std::vector<OperatorFamily> families, AlphaSchedule alphas) {
    return GammaTower(std::move(families), std::move(alphas));
}

// ---------------------------------------------------------------------------
// Quadrature (fallback for Cesàro averages of custom semigroups)

namespace detail {

inline Vector simpson_step(const std::function<Vector(double)>& f, double a, double b,
                           const Vector& fa, const Vector& fm, const Vector& fb, const Vector& whole,
                           double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const Vector flm = f(lm);
    const Vector frm = f(rm);
    const Vector left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Vector right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const Vector delta = left + right - whole;
    if (depth <= 0 || delta.lpNorm<Eigen::Infinity>() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integral of a vector-valued function over [a, b].
inline Vector adaptive_simpson(const std::function<Vector(double)>& f, double a, double b,
                               double tol = 1e-10, int max_depth = 40) {
    const Vector fa = f(a);
    const Vector fb = f(b);
    const Vector fm = f(0.5 * (a + b));
    const Vector whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// ---------------------------------------------------------------------------
// Nonexpansive semigroups

/// e^{-tA} for symmetric positive semidefinite A.
struct LinearPSDGenerator {
    Matrix a;
    Vector eigenvalues;   ///< clamped to >= 0
    Matrix eigenvectors;  ///< orthonormal columns
};

/// Block-diagonal rotations: block i turns coordinates (2i, 2i+1) at
/// rates[i] radians per unit time; the trailing fixed_dims coordinates are
/// left alone.
struct RotationGenerator {
    std::vector<double> rates;
    Eigen::Index fixed_dims = 0;
};

struct CustomGenerator {};

using GeneratorInfo = std::variant<LinearPSDGenerator, RotationGenerator, CustomGenerator>;

class Semigroup {
public:
    using MapAt = std::function<Mapping(double)>;

    Semigroup(Eigen::Index dim, MapAt at, MapAt cesaro, GeneratorInfo info, std::string name)
        : dim_(dim), at_(std::move(at)), cesaro_(std::move(cesaro)), info_(std::move(info)),
          name_(std::move(name)) {}

    Mapping at(double t) const {
        if (!(t >= 0.0)) throw std::invalid_argument("Semigroup::at: t must be >= 0");
        return at_(t);
    }

    /// (1/t) ∫_0^t T(s) x ds.
    Mapping cesaro(double t) const {
        if (!(t > 0.0)) throw std::invalid_argument("Semigroup::cesaro: t must be > 0");
        return cesaro_(t);
    }

    Eigen::Index dim() const { return dim_; }
    const GeneratorInfo& generator() const { return info_; }
    const std::string& name() const { return name_; }

private:
    Eigen::Index dim_;
    MapAt at_;
    MapAt cesaro_;
    GeneratorInfo info_;
    std::string name_;
};

/// (1 - e^{-s}) / s, continuous at 0.
inline double cesaro_filter(double lambda, double t) {
    const double s = lambda * t;
    if (s == 0.0) return 1.0;
    if (std::abs(s) < 1e-8) return 1.0 - 0.5 * s;
    return -std::expm1(-s) / s;
}

inline Semigroup semigroup_linear_psd(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw std::invalid_argument("semigroup_linear_psd: matrix must be square and non-empty");
    }
    if (!a.allFinite()) throw std::invalid_argument("semigroup_linear_psd: non-finite entry");
    const double scale = 1.0 + a.norm();
    if ((a - a.transpose()).norm() > 1e-12 * scale) {
        throw std::invalid_argument("semigroup_linear_psd: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
    Vector lambda = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < -1e-10) {
            throw std::invalid_argument("semigroup_linear_psd: matrix is indefinite (eigenvalue " +
                                        std::to_string(lambda[i]) + ")");
        }
        if (lambda[i] < 0.0) lambda[i] = 0.0;
    }
    const Matrix v = eig.eigenvectors();
    const auto d = a.rows();

    std::vector<Eigen::Index> kernel;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (lambda[i] <= 1e-10) kernel.push_back(i);
    }
    Matrix kbasis(d, static_cast<Eigen::Index>(kernel.size()));
    for (std::size_t k = 0; k < kernel.size(); ++k) kbasis.col(k) = v.col(kernel[k]);
    const auto kernel_set = FixedPointSet::subspace(kbasis);

    auto filtered = [v, lambda, kernel_set, d](auto&& filter, OperatorClass cls, std::string name) {
        Vector diag(d);
        for (Eigen::Index i = 0; i < d; ++i) diag[i] = filter(lambda[i]);
        Matrix m = v * diag.asDiagonal() * v.transpose();
        return maps::linear(std::move(m), cls, kernel_set, std::move(name));
    };

    Semigroup::MapAt at = [filtered](double t) {
        return filtered([t](double l) { return std::exp(-t * l); }, OperatorClass::FirmlyNonexpansive,
                        "exp(-tA)");
    };
    Semigroup::MapAt ces = [filtered](double t) {
        return filtered([t](double l) { return cesaro_filter(l, t); },
                        OperatorClass::FirmlyNonexpansive, "cesaro(exp(-tA))");
    };
    return Semigroup(d, std::move(at), std::move(ces), LinearPSDGenerator{a, lambda, v},
                     "linear_psd");
}

inline Semigroup semigroup_rotation(std::vector<double> rates, Eigen::Index fixed_dims) {
    if (fixed_dims < 0) throw std::invalid_argument("semigroup_rotation: fixed_dims must be >= 0");
    const auto blocks = static_cast<Eigen::Index>(rates.size());
    const auto d = 2 * blocks + fixed_dims;
    if (d < 1) throw std::invalid_argument("semigroup_rotation: empty space");
    for (double r : rates) {
        if (!std::isfinite(r)) throw std::invalid_argument("semigroup_rotation: non-finite rate");
    }

    // Fixed for every t > 0: the trailing coordinates plus any block that
    // does not turn.
    std::vector<Eigen::Index> fixed_coords;
    for (Eigen::Index b = 0; b < blocks; ++b) {
        if (rates[b] == 0.0) {
            fixed_coords.push_back(2 * b);
            fixed_coords.push_back(2 * b + 1);
        }
    }
    for (Eigen::Index i = 2 * blocks; i < d; ++i) fixed_coords.push_back(i);
    Matrix fbasis = Matrix::Zero(d, static_cast<Eigen::Index>(fixed_coords.size()));
    for (std::size_t k = 0; k < fixed_coords.size(); ++k) fbasis(fixed_coords[k], k) = 1.0;
    const auto fixed_set = FixedPointSet::subspace(fbasis);

    auto block_matrix = [rates, d, blocks](auto&& block) {
        Matrix m = Matrix::Identity(d, d);
        for (Eigen::Index b = 0; b < blocks; ++b) {
            m.block<2, 2>(2 * b, 2 * b) = block(rates[b]);
        }
        return m;
    };

    Semigroup::MapAt at = [block_matrix, fixed_set](double t) {
        Matrix m = block_matrix([t](double rate) {
            const double th = rate * t;
            Eigen::Matrix2d r;
            r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
            return r;
        });
        return maps::linear(std::move(m), OperatorClass::Nonexpansive, fixed_set, "rotation");
    };
    Semigroup::MapAt ces = [block_matrix, fixed_set](double t) {
        Matrix m = block_matrix([t](double rate) {
            const double th = rate * t;
            double s;  // sin(th)/th
            double c;  // (1 - cos(th))/th
            if (std::abs(th) < 1e-6) {
                s = 1.0 - th * th / 6.0;
                c = 0.5 * th - th * th * th / 24.0;
            } else {
                s = std::sin(th) / th;
                c = (1.0 - std::cos(th)) / th;
            }
            Eigen::Matrix2d r;
            r << s, -c, c, s;
            return r;
        });
        return maps::linear(std::move(m), OperatorClass::Nonexpansive, fixed_set, "cesaro(rotation)");
    };
    return Semigroup(d, std::move(at), std::move(ces),
                     RotationGenerator{std::move(rates), fixed_dims}, "rotation");
}

/// Semigroup from a user-supplied T(t). Cesàro averages fall back to
/// adaptive Simpson quadrature at tolerance 1e-10.
inline Semigroup semigroup_custom(Eigen::Index d, std::function<Vector(double, const Vector&)> flow,
                                  std::string name = "custom") {
    auto shared = std::make_shared<std::function<Vector(double, const Vector&)>>(std::move(flow));
    Semigroup::MapAt at = [shared, d](double t) {
        return Mapping([shared, t](const Vector& x) { return (*shared)(t, x); }, d,
                       OperatorClass::Nonexpansive, std::nullopt, "custom");
    };
    Semigroup::MapAt ces = [shared, d](double t) {
        return Mapping(
            [shared, t](const Vector& x) -> Vector {
                const auto orbit = [&](double s) { return (*shared)(s, x); };
                return adaptive_simpson(orbit, 0.0, t, 1e-10) / t;
            },
            d, OperatorClass::Nonexpansive, std::nullopt, "cesaro(custom)");
    };
    return Semigroup(d, std::move(at), std::move(ces), CustomGenerator{}, std::move(name));
}

// ---------------------------------------------------------------------------
// Time schedules

class TimeSchedule {
public:
    enum class Kind { TriangularSweep, Divergent, Custom };

    /// Blocks k = 1, 2, ... each walking 0 -> 1 -> 0 in steps of 1/k.
    static TimeSchedule triangular_sweep() { return TimeSchedule(Kind::TriangularSweep); }
    /// t_n = rate * (n + 1).
    static TimeSchedule divergent(double rate = 1.0) {
        if (!(rate > 0.0)) throw std::invalid_argument("TimeSchedule::divergent: rate must be > 0");
        TimeSchedule s(Kind::Divergent);
        s.rate_ = rate;
        return s;
    }
    static TimeSchedule custom(std::vector<double> times) {
        if (times.empty()) throw std::invalid_argument("TimeSchedule::custom: empty list");
        TimeSchedule s(Kind::Custom);
        s.times_ = std::move(times);
        return s;
    }

    Kind kind() const { return kind_; }

    double at(std::size_t n) const {
        switch (kind_) {
            case Kind::TriangularSweep: {
                // Block k covers indices [(k-1)k, k(k+1)).
                std::size_t k = static_cast<std::size_t>(
                    (std::sqrt(4.0 * static_cast<double>(n) + 1.0) + 1.0) / 2.0);
                while ((k - 1) * k > n) --k;
                while (k * (k + 1) <= n) ++k;
                const std::size_t i = n - (k - 1) * k;
                const double kk = static_cast<double>(k);
                return i <= k ? static_cast<double>(i) / kk : static_cast<double>(2 * k - i) / kk;
            }
            case Kind::Divergent:
                return rate_ * static_cast<double>(n + 1);
            case Kind::Custom:
                if (n >= times_.size()) {
                    throw std::out_of_range("TimeSchedule: custom schedule exhausted at n = " +
                                            std::to_string(n));
                }
                return times_[n];
        }
        return 0.0;
    }

    std::vector<double> prefix(std::size_t count) const {
        std::vector<double> out;
        out.reserve(count);
        for (std::size_t n = 0; n < count; ++n) out.push_back(at(n));
        return out;
    }

    /// Empirical check of liminf t_n = 0, limsup t_n > 0, t_{n+1} - t_n -> 0
    /// on a finite prefix. Throws with the failing condition.
    void check_h2(std::size_t prefix_len = 4096) const {
        if (kind_ == Kind::TriangularSweep) return;
        if (kind_ == Kind::Divergent) {
            throw std::invalid_argument("time schedule: divergent schedule has liminf t_n > 0");
        }
        const auto t = prefix(std::min(prefix_len, times_.size()));
        if (t.size() < 8) throw std::invalid_argument("time schedule: custom list too short for H2 check");
        for (double v : t) {
            if (!(v >= 0.0)) throw std::invalid_argument("time schedule: negative time");
        }
        const std::size_t q = t.size() / 4;
        double tail_min = t.back(), tail_max = t.back(), tail_jump = 0.0, head_jump = 0.0;
        for (std::size_t n = t.size() - q; n < t.size(); ++n) {
            tail_min = std::min(tail_min, t[n]);
            tail_max = std::max(tail_max, t[n]);
            if (n > 0) tail_jump = std::max(tail_jump, std::abs(t[n] - t[n - 1]));
        }
        for (std::size_t n = 1; n <= q; ++n) head_jump = std::max(head_jump, std::abs(t[n] - t[n - 1]));
        if (tail_min > 1e-12) throw std::invalid_argument("time schedule: tail never returns to 0");
        if (!(tail_max > 0.0)) throw std::invalid_argument("time schedule: limsup t_n is 0");
        if (tail_jump > head_jump && tail_jump > 0.0) {
            throw std::invalid_argument("time schedule: increments do not shrink");
        }
    }

    /// Positive times, required for Cesàro averages.
    void check_positive(std::size_t prefix_len = 4096) const {
        if (kind_ == Kind::TriangularSweep) {
            throw std::invalid_argument("time schedule: triangular sweep contains t = 0");
        }
        if (kind_ == Kind::Custom) {
            for (double v : prefix(std::min(prefix_len, times_.size()))) {
                if (!(v > 0.0)) throw std::invalid_argument("time schedule: nonpositive time");
            }
        }
    }

private:
    explicit TimeSchedule(Kind k) : kind_(k) {}
    Kind kind_;
    double rate_ = 1.0;
    std::vector<double> times_;
};

/// n -> S.at(t_n).
inline OperatorFamily semigroup_family_at_times(const Semigroup& s, const TimeSchedule& sched) {
    sched.check_h2();
    return OperatorFamily([s, sched](std::size_t n) { return s.at(sched.at(n)); }, s.dim(),
                          OperatorClass::Nonexpansive, "semigroup_at_times(" + s.name() + ")");
}

/// n -> (1/t_n) ∫_0^{t_n} S(s) ds.
inline OperatorFamily cesaro_family(const Semigroup& s, const TimeSchedule& sched) {
    sched.check_positive();
    return OperatorFamily([s, sched](std::size_t n) { return s.cesaro(sched.at(n)); }, s.dim(),
                          OperatorClass::Nonexpansive, "cesaro(" + s.name() + ")");
}

}  // namespace fixpoint
