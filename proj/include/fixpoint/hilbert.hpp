#pragma once

// Finite-dimensional Hilbert space primitives: half-spaces, built-in convex
// sets and the exact / iterative projectors onto them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fixpoint {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void require_same_dim(const Vector& a, const Vector& b, const char* where) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
}

inline void require_finite(const Vector& a, const char* where) {
    if (!a.allFinite()) {
        throw std::invalid_argument(std::string(where) + ": non-finite coordinate");
    }
}

inline double inner(const Vector& a, const Vector& b) {
    require_same_dim(a, b, "inner");
    return a.dot(b);
}

// ---------------------------------------------------------------------------
// Half-spaces

/// Closed half-space {z : <z, normal> <= offset}. The whole space is carried
/// as an explicit flag so that H(x, x) never produces a zero normal.
struct HalfSpace {
    Vector normal;
    double offset = 0.0;
    bool whole_space = false;

    static HalfSpace whole(Eigen::Index dim) {
        return HalfSpace{Vector::Zero(dim), 0.0, true};
    }

    Eigen::Index dim() const { return normal.size(); }

    /// Signed excess <z, normal> - offset; positive means z is outside.
    double excess(const Vector& z) const {
        if (whole_space) return -std::numeric_limits<double>::infinity();
        return normal.dot(z) - offset;
    }

    /// Euclidean distance from z to the half-space (0 when inside).
    double distance(const Vector& z) const {
        if (whole_space) return 0.0;
        return std::max(0.0, excess(z)) / normal.norm();
    }

    bool contains(const Vector& z, double tol = 0.0) const {
        return whole_space || distance(z) <= tol;
    }
};

/// H(x, y) = {z : <z - y, x - y> <= 0}; the whole space when x == y.
inline HalfSpace halfspace_from_pair(const Vector& x, const Vector& y) {
    require_same_dim(x, y, "halfspace_from_pair");
    Vector normal = x - y;
    if (normal.isZero(0.0)) return HalfSpace::whole(x.size());
    const double offset = y.dot(normal);
    return HalfSpace{std::move(normal), offset, false};
}

inline Vector project_halfspace(const Vector& w, const HalfSpace& h) {
    if (h.whole_space) return w;
    require_same_dim(w, h.normal, "project_halfspace");
    const double nn = h.normal.squaredNorm();
    if (nn == 0.0) {
        throw std::invalid_argument("project_halfspace: zero normal without whole-space flag");
    }
    const double ex = h.normal.dot(w) - h.offset;
    if (ex <= 0.0) return w;
    return w - (ex / nn) * h.normal;
}

/// Exact projection of x0 onto h1 ∩ h2 by KKT case enumeration.
/// Returns nullopt when the intersection is empty.
inline std::optional<Vector> project_two_halfspaces(const Vector& x0, const HalfSpace& h1,
                                                    const HalfSpace& h2) {
    if (h1.whole_space && h2.whole_space) return x0;
    if (h1.whole_space) return project_halfspace(x0, h2);
    if (h2.whole_space) return project_halfspace(x0, h1);
    require_same_dim(x0, h1.normal, "project_two_halfspaces");
    require_same_dim(x0, h2.normal, "project_two_halfspaces");

    const double scale = 1.0 + x0.norm();
    const double feas_tol = 1e-12 * scale;

    const double e1 = h1.excess(x0);
    const double e2 = h2.excess(x0);
    if (e1 <= 0.0 && e2 <= 0.0) return x0;

    // One active constraint: the projection onto a superset that lands in
    // the intersection is the answer.
    if (e1 > 0.0) {
        Vector p1 = project_halfspace(x0, h1);
        if (h2.distance(p1) <= feas_tol) return p1;
    }
    if (e2 > 0.0) {
        Vector p2 = project_halfspace(x0, h2);
        if (h1.distance(p2) <= feas_tol) return p2;
    }

    const Vector& a1 = h1.normal;
    const Vector& a2 = h2.normal;
    const double g11 = a1.squaredNorm();
    const double g22 = a2.squaredNorm();
    const double g12 = a1.dot(a2);

    // Both active. Orthogonalize a2 against a1 so that nearly parallel
    // normals keep their separating component instead of losing it in
    // g11*g22 - g12^2.
    const Vector perp = a2 - (g12 / g11) * a1;
    const double perp_norm = perp.norm();
    if (perp_norm > 1e-14 * std::sqrt(g22)) {
        const double l2 = (e2 - (g12 / g11) * e1) / (perp_norm * perp_norm);
        const double l1 = e1 / g11 - l2 * g12 / g11;
        if (l1 >= 0.0 && l2 >= 0.0) return Vector(x0 - (e1 / g11) * a1 - l2 * perp);
        // Only reachable through rounding; fall back to the less violated
        // single-constraint candidate.
        Vector p1 = project_halfspace(x0, h1);
        Vector p2 = project_halfspace(x0, h2);
        return h2.distance(p1) <= h1.distance(p2) ? p1 : p2;
    }

    // Parallel normals.
    const double n1 = std::sqrt(g11);
    const double n2 = std::sqrt(g22);
    if (g12 > 0.0) {
        // Same orientation: the tighter constraint wins.
        return h1.offset / n1 <= h2.offset / n2 ? project_halfspace(x0, h1)
                                                : project_halfspace(x0, h2);
    }
    // Opposite orientation: a slab, empty when the offsets contradict.
    if (h1.offset / n1 + h2.offset / n2 < -feas_tol) return std::nullopt;
    Vector p = e1 > 0.0 ? project_halfspace(x0, h1) : project_halfspace(x0, h2);
    return p;
}

// ---------------------------------------------------------------------------
// Exact projection onto a polyhedron given by linear constraints.
//
// Dual active-set method (Goldfarb-Idnani specialised to the identity
// Hessian). The state after a solve is dual feasible for any superset of
// constraints, so adding cuts and calling solve() again resumes from the
// previous optimum instead of starting over.

class PolyhedralProjector {
public:
    explicit PolyhedralProjector(Vector x0, double tol = 1e-12, std::size_t max_steps = 100000)
        : x0_(std::move(x0)), x_(x0_), tol_(tol), max_steps_(max_steps) {
        require_finite(x0_, "PolyhedralProjector");
    }

    Eigen::Index dim() const { return x0_.size(); }
    const Vector& start() const { return x0_; }
    std::size_t constraint_count() const { return rows_.size(); }
    std::size_t active_count() const { return active_.size(); }
    bool infeasible() const { return infeasible_; }

    /// Adds <a, z> <= c. Whole-space half-spaces are ignored.
    void add(const HalfSpace& h) {
        if (h.whole_space) return;
        require_same_dim(x0_, h.normal, "PolyhedralProjector::add");
        add_row(h.normal, h.offset, false);
    }

    /// Adds <a, z> = c.
    void add_equality(const Vector& a, double c) {
        require_same_dim(x0_, a, "PolyhedralProjector::add_equality");
        add_row(a, c, true);
    }

    /// Projection of x0 onto everything added so far; nullopt when empty.
    std::optional<Vector> solve() {
        if (infeasible_) return std::nullopt;
        std::size_t steps = 0;
        for (;;) {
            const auto p = most_violated();
            if (!p) return x_;
            if (!add_active(*p, steps)) {
                infeasible_ = true;
                return std::nullopt;
            }
        }
    }

private:
    struct Row {
        Vector a;
        double c;
        double norm;
        bool equality;
        bool active = false;
    };

    void add_row(const Vector& a, double c, bool equality) {
        const double n = a.norm();
        if (n == 0.0) {
            // 0 <= c (or 0 == c): either vacuous or contradictory.
            if (equality ? std::abs(c) > tol_ : c < -tol_) infeasible_ = true;
            return;
        }
        rows_.push_back(Row{a, c, n, equality});
    }

    double threshold() const { return tol_ * (1.0 + x_.norm()); }

    std::optional<std::size_t> most_violated() {
        double worst = threshold();
        std::optional<std::size_t> arg;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            Row& r = rows_[i];
            if (r.active) continue;
            double v = (r.a.dot(x_) - r.c) / r.norm;
            if (r.equality && v < 0.0) v = -v;
            if (v > worst) {
                worst = v;
                arg = i;
            }
        }
        if (arg && rows_[*arg].equality && rows_[*arg].a.dot(x_) < rows_[*arg].c) {
            // Orient the equality so that it is "violated from above".
            rows_[*arg].a = -rows_[*arg].a;
            rows_[*arg].c = -rows_[*arg].c;
        }
        return arg;
    }

    bool add_active(std::size_t p, std::size_t& steps) {
        const Vector& ap = rows_[p].a;
        double lambda_p = 0.0;
        for (;;) {
            if (++steps > max_steps_) {
                throw std::runtime_error("PolyhedralProjector: step limit exceeded");
            }
            const auto q = static_cast<Eigen::Index>(active_.size());
            Vector r(q);
            Vector z = ap;
            if (q > 0) {
                Matrix n(dim(), q);
                for (Eigen::Index j = 0; j < q; ++j) n.col(j) = rows_[active_[j]].a;
                r = n.colPivHouseholderQr().solve(ap);
                z = ap - n * r;
            }
            const double excess = ap.dot(x_) - rows_[p].c;
            if (excess <= 0.0) return true;  // satisfied by rounding after partial steps

            const double zz = z.squaredNorm();
            const bool dependent = std::sqrt(zz) <= 1e-10 * rows_[p].norm;
            const double t_full = dependent ? std::numeric_limits<double>::infinity() : excess / zz;

            double t_partial = std::numeric_limits<double>::infinity();
            Eigen::Index drop = -1;
            for (Eigen::Index j = 0; j < q; ++j) {
                if (rows_[active_[j]].equality) continue;
                if (r[j] > 1e-14) {
                    const double t = lambda_[j] / r[j];
                    if (t < t_partial) {
                        t_partial = t;
                        drop = j;
                    }
                }
            }

            const double t = std::min(t_full, t_partial);
            if (!std::isfinite(t)) return false;

            x_ -= t * z;
            if (q > 0) lambda_ -= t * r;
            lambda_p += t;

            if (t_full <= t_partial) {
                active_.push_back(p);
                rows_[p].active = true;
                lambda_.conservativeResize(q + 1);
                lambda_[q] = lambda_p;
                return true;
            }
            rows_[active_[drop]].active = false;
            active_.erase(active_.begin() + drop);
            Vector shrunk(q - 1);
            for (Eigen::Index j = 0, k = 0; j < q; ++j) {
                if (j != drop) shrunk[k++] = lambda_[j];
            }
            lambda_ = std::move(shrunk);
        }
    }

    Vector x0_;
    Vector x_;
    double tol_;
    std::size_t max_steps_;
    std::vector<Row> rows_;
    std::vector<std::size_t> active_;
    Vector lambda_;
    bool infeasible_ = false;
};

// ---------------------------------------------------------------------------
// Built-in convex sets

struct WholeSpace {
    Eigen::Index dim;
};
struct Ball {
    Vector center;
    double radius;
};
struct Box {
    Vector lower;
    Vector upper;
};
/// basepoint + span(columns of basis); basis columns orthonormal.
struct AffineSubspace {
    Vector basepoint;
    Matrix basis;
};
struct HalfSpaceList {
    std::vector<HalfSpace> list;
};

class ConvexSet {
public:
    using Kind = std::variant<WholeSpace, Ball, Box, AffineSubspace, HalfSpaceList>;

    static ConvexSet whole(Eigen::Index dim) {
        if (dim < 1) throw std::invalid_argument("ConvexSet: dimension must be >= 1");
        return ConvexSet(WholeSpace{dim});
    }

    static ConvexSet ball(Vector center, double radius) {
        require_finite(center, "ConvexSet::ball");
        if (!(radius > 0.0) || !std::isfinite(radius)) {
            throw std::invalid_argument("ConvexSet::ball: radius must be positive");
        }
        return ConvexSet(Ball{std::move(center), radius});
    }

    static ConvexSet box(Vector lower, Vector upper) {
        require_same_dim(lower, upper, "ConvexSet::box");
        if ((lower.array() > upper.array()).any() || lower.hasNaN() || upper.hasNaN()) {
            throw std::invalid_argument("ConvexSet::box: lower must be <= upper");
        }
        return ConvexSet(Box{std::move(lower), std::move(upper)});
    }

    static ConvexSet affine(Vector basepoint, Matrix basis) {
        require_finite(basepoint, "ConvexSet::affine");
        if (basis.rows() != basepoint.size()) {
            throw std::invalid_argument("ConvexSet::affine: basis rows must equal dimension");
        }
        const Matrix gram = basis.transpose() * basis;
        if (!gram.isApprox(Matrix::Identity(basis.cols(), basis.cols()), 1e-10) &&
            basis.cols() > 0) {
            throw std::invalid_argument("ConvexSet::affine: basis must be orthonormal");
        }
        return ConvexSet(AffineSubspace{std::move(basepoint), std::move(basis)});
    }

    static ConvexSet halfspaces(std::vector<HalfSpace> list, Eigen::Index dim) {
        for (const auto& h : list) {
            if (!h.whole_space && h.dim() != dim) {
                throw std::invalid_argument("ConvexSet::halfspaces: dimension mismatch");
            }
            if (!h.whole_space && h.normal.isZero(0.0)) {
                throw std::invalid_argument("ConvexSet::halfspaces: zero normal");
            }
        }
        ConvexSet s(HalfSpaceList{std::move(list)});
        s.dim_ = dim;
        return s;
    }

    const Kind& kind() const { return kind_; }
    Eigen::Index dim() const { return dim_; }
    bool is_whole_space() const { return std::holds_alternative<WholeSpace>(kind_); }

    /// Distance-to-set based membership.
    bool contains(const Vector& z, double tol = 1e-9) const;

    std::string name() const {
        static const char* names[] = {"whole", "ball", "box", "affine", "halfspaces"};
        return names[kind_.index()];
    }

private:
    explicit ConvexSet(Kind k) : kind_(std::move(k)) {
        dim_ = std::visit(
            [](const auto& s) -> Eigen::Index {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, WholeSpace>) return s.dim;
                else if constexpr (std::is_same_v<T, Ball>) return s.center.size();
                else if constexpr (std::is_same_v<T, Box>) return s.lower.size();
                else if constexpr (std::is_same_v<T, AffineSubspace>) return s.basepoint.size();
                else return 0;
            },
            kind_);
    }

    Kind kind_;
    Eigen::Index dim_ = 0;
};

/// Linear description of a polyhedral set, used to seed the active-set
/// projector. Returns nullopt for sets that are not polyhedral (balls).
struct LinearConstraints {
    std::vector<HalfSpace> inequalities;
    std::vector<std::pair<Vector, double>> equalities;
};

inline std::optional<LinearConstraints> linear_constraints(const ConvexSet& c) {
    LinearConstraints out;
    const Eigen::Index d = c.dim();
    if (std::holds_alternative<WholeSpace>(c.kind())) return out;
    if (std::holds_alternative<Ball>(c.kind())) return std::nullopt;
    if (const auto* b = std::get_if<Box>(&c.kind())) {
        for (Eigen::Index i = 0; i < d; ++i) {
            if (std::isfinite(b->upper[i])) {
                out.inequalities.push_back(HalfSpace{Vector::Unit(d, i), b->upper[i], false});
            }
            if (std::isfinite(b->lower[i])) {
                out.inequalities.push_back(HalfSpace{-Vector::Unit(d, i), -b->lower[i], false});
            }
        }
        return out;
    }
    if (const auto* a = std::get_if<AffineSubspace>(&c.kind())) {
        const Eigen::Index k = a->basis.cols();
        Matrix complement;
        if (k == 0) {
            complement = Matrix::Identity(d, d);
        } else {
            Eigen::HouseholderQR<Matrix> qr(a->basis);
            const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
            complement = q.rightCols(d - k);
        }
        for (Eigen::Index j = 0; j < complement.cols(); ++j) {
            const Vector w = complement.col(j);
            out.equalities.emplace_back(w, w.dot(a->basepoint));
        }
        return out;
    }
    out.inequalities = std::get<HalfSpaceList>(c.kind()).list;
    return out;
}

/// Exact projection onto a built-in set. Half-space lists with more than one
/// member go through the active-set projector; an empty list intersection
/// throws std::domain_error.
inline Vector project_convex(const Vector& w, const ConvexSet& c) {
    if (w.size() != c.dim()) throw std::invalid_argument("project_convex: dimension mismatch");
    return std::visit(
        [&](const auto& s) -> Vector {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, WholeSpace>) {
                return w;
            } else if constexpr (std::is_same_v<T, Ball>) {
                const Vector diff = w - s.center;
                const double n = diff.norm();
                if (n <= s.radius) return w;
                return s.center + (s.radius / n) * diff;
            } else if constexpr (std::is_same_v<T, Box>) {
                return w.cwiseMax(s.lower).cwiseMin(s.upper);
            } else if constexpr (std::is_same_v<T, AffineSubspace>) {
                const Vector rel = w - s.basepoint;
                return s.basepoint + s.basis * (s.basis.transpose() * rel);
            } else {
                if (s.list.empty()) return w;
                if (s.list.size() == 1) return project_halfspace(w, s.list.front());
                if (s.list.size() == 2) {
                    auto p = project_two_halfspaces(w, s.list[0], s.list[1]);
                    if (!p) throw std::domain_error("project_convex: empty half-space intersection");
                    return *p;
                }
                PolyhedralProjector proj(w);
                for (const auto& h : s.list) proj.add(h);
                auto p = proj.solve();
                if (!p) throw std::domain_error("project_convex: empty half-space intersection");
                return *p;
            }
        },
        c.kind());
}

inline bool ConvexSet::contains(const Vector& z, double tol) const {
    if (const auto* hl = std::get_if<HalfSpaceList>(&kind_)) {
        return std::all_of(hl->list.begin(), hl->list.end(),
                           [&](const HalfSpace& h) { return h.contains(z, tol); });
    }
    return (project_convex(z, *this) - z).norm() <= tol;
}

// ---------------------------------------------------------------------------
// Dykstra's cyclic projection scheme

struct DykstraResult {
    Vector x;
    std::size_t cycles = 0;
    bool converged = false;
    double max_distance = 0.0;  ///< largest distance from x to a member set
};

using Projector = std::function<Vector(const Vector&)>;

/// Metric projection of x0 onto the intersection of the sets behind
/// `projectors`. Stops when one full cycle moves the iterate less than tol.
inline DykstraResult dykstra(const Vector& x0, const std::vector<Projector>& projectors,
                             double tol, std::size_t max_cycles) {
    DykstraResult res;
    res.x = x0;
    if (projectors.empty()) {
        res.converged = true;
        return res;
    }
    std::vector<Vector> increments(projectors.size(), Vector::Zero(x0.size()));
    Vector prev = x0;
    for (res.cycles = 1; res.cycles <= max_cycles; ++res.cycles) {
        for (std::size_t i = 0; i < projectors.size(); ++i) {
            const Vector shifted = res.x + increments[i];
            Vector y = projectors[i](shifted);
            increments[i] = shifted - y;
            res.x = std::move(y);
        }
        const double change = (res.x - prev).norm();
        prev = res.x;
        if (change < tol) {
            res.converged = true;
            break;
        }
    }
    res.cycles = std::min(res.cycles, max_cycles);
    for (const auto& p : projectors) {
        res.max_distance = std::max(res.max_distance, (p(res.x) - res.x).norm());
    }
    return res;
}

// ---------------------------------------------------------------------------
// Nested polyhedral regions C_n = base ∩ cuts

class PolyhedralAccumulator {
public:
    explicit PolyhedralAccumulator(ConvexSet base) : base_(std::move(base)) {}

    const ConvexSet& base() const { return base_; }
    const std::vector<HalfSpace>& cuts() const { return cuts_; }
    const std::optional<Vector>& feasible_witness() const { return witness_; }
    Eigen::Index dim() const { return base_.dim(); }

    /// Appends a cut; whole-space cuts are skipped. Returns true when stored.
    bool append(const HalfSpace& h) {
        if (h.whole_space) return false;
        if (h.dim() != dim()) throw std::invalid_argument("PolyhedralAccumulator: dimension mismatch");
        cuts_.push_back(h);
        if (witness_ && !h.contains(*witness_, 1e-9)) witness_.reset();
        return true;
    }

    /// Records a point known to lie in the region. Rejected if it does not.
    bool set_witness(const Vector& w, double tol = 1e-9) {
        if (!contains(w, tol)) return false;
        witness_ = w;
        return true;
    }

    bool contains(const Vector& z, double tol = 1e-9) const {
        if (!base_.contains(z, tol)) return false;
        return std::all_of(cuts_.begin(), cuts_.end(),
                           [&](const HalfSpace& h) { return h.contains(z, tol); });
    }

private:
    ConvexSet base_;
    std::vector<HalfSpace> cuts_;
    std::optional<Vector> witness_;
};

/// Certified infeasibility: two cuts with opposite normals whose offsets
/// leave an empty slab.
inline bool has_contradictory_parallel_cuts(const std::vector<HalfSpace>& cuts, double tol) {
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const double ni = cuts[i].normal.norm();
        for (std::size_t j = i + 1; j < cuts.size(); ++j) {
            const double nj = cuts[j].normal.norm();
            const double cosine = cuts[i].normal.dot(cuts[j].normal) / (ni * nj);
            if (cosine <= -1.0 + 1e-12 && cuts[i].offset / ni + cuts[j].offset / nj < -tol) {
                return true;
            }
        }
    }
    return false;
}

inline double separation_threshold(double tol, const Vector& x0) {
    return std::max(1e-6, 1e3 * tol) * (1.0 + x0.norm());
}

/// Projection onto base ∩ cuts by Dykstra's scheme over the base projector
/// and one projector per cut.
inline std::optional<Vector> project_polyhedron_dykstra(const Vector& x0,
                                                        const PolyhedralAccumulator& acc,
                                                        double tol = 1e-12,
                                                        std::size_t max_inner = 100000) {
    if (!(tol > 0.0)) throw std::invalid_argument("project_polyhedron: tol must be positive");
    if (!acc.feasible_witness() && has_contradictory_parallel_cuts(acc.cuts(), tol)) {
        return std::nullopt;
    }
    std::vector<Projector> projectors;
    if (!acc.base().is_whole_space()) {
        projectors.emplace_back([&acc](const Vector& v) { return project_convex(v, acc.base()); });
    }
    for (const auto& h : acc.cuts()) {
        projectors.emplace_back([&h](const Vector& v) { return project_halfspace(v, h); });
    }
    const DykstraResult res = dykstra(x0, projectors, tol, max_inner);
    if (res.max_distance > separation_threshold(tol, x0) && !acc.feasible_witness()) {
        return std::nullopt;
    }
    return res.x;
}

/// Metric projection of x0 onto base ∩ cuts.
///
/// Fast paths: no cuts projects onto the base; one or two cuts over the whole
/// space use the exact KKT enumeration. Polyhedral bases (whole space, box,
/// affine subspace, half-space list) are solved exactly by the active-set
/// projector; a ball base falls back to Dykstra. nullopt means the region is
/// empty.
inline std::optional<Vector> project_polyhedron(const Vector& x0, const PolyhedralAccumulator& acc,
                                                double tol = 1e-12,
                                                std::size_t max_inner = 100000) {
    if (!(tol > 0.0)) throw std::invalid_argument("project_polyhedron: tol must be positive");
    require_finite(x0, "project_polyhedron");
    const auto& cuts = acc.cuts();
    if (cuts.empty()) {
        try {
            return project_convex(x0, acc.base());
        } catch (const std::domain_error&) {
            return std::nullopt;
        }
    }
    if (acc.base().is_whole_space() && cuts.size() == 1) return project_halfspace(x0, cuts[0]);
    if (acc.base().is_whole_space() && cuts.size() == 2) {
        return project_two_halfspaces(x0, cuts[0], cuts[1]);
    }
    if (auto lin = linear_constraints(acc.base())) {
        PolyhedralProjector proj(x0, tol, max_inner);
        for (const auto& [a, c] : lin->equalities) proj.add_equality(a, c);
        for (const auto& h : lin->inequalities) proj.add(h);
        for (const auto& h : cuts) proj.add(h);
        return proj.solve();
    }
    return project_polyhedron_dykstra(x0, acc, tol, max_inner);
}

}  // namespace fixpoint
