#pragma once

// Iteration drivers: the Haugazeau / T_C-class step x_{n+1} = Q_C(x_0, x_n, T_n x_n),
// the CQ method, and the shrinking projection method, all recording full
// traces so that the convergence-theory invariants can be checked afterwards.

#include "fixpoint/hilbert.hpp"
#include "fixpoint/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fixpoint {

struct RunConfig {
    std::size_t max_iter = 100000;
    double residual_tol = 1e-8;  ///< converged when ||x_n - T_n x_n|| < residual_tol
    double step_tol = 1e-12;     ///< converged when ||x_{n+1} - x_n|| < step_tol
    double norm_cap = 1e8;       ///< divergent when ||x_n - x_0|| > norm_cap
    double proj_tol = 1e-12;
    std::size_t proj_max_inner = 100000;
    /// Number of consecutive steps that must satisfy a stopping test. Families
    /// that contain the identity at isolated indices (t_n = 0 in a time sweep)
    /// need 2.
    std::size_t converge_window = 1;

    void validate() const {
        if (max_iter < 1) throw std::invalid_argument("RunConfig: max_iter must be >= 1");
        if (!(residual_tol > 0.0) || !(step_tol > 0.0) || !(norm_cap > 0.0) || !(proj_tol > 0.0)) {
            throw std::invalid_argument("RunConfig: tolerances must be positive");
        }
        if (proj_max_inner < 1) throw std::invalid_argument("RunConfig: proj_max_inner must be >= 1");
        if (converge_window < 1) throw std::invalid_argument("RunConfig: converge_window must be >= 1");
    }
};

struct TraceStep {
    std::size_t n = 0;
    Vector x;
    Vector tx;
    double dist_from_start = 0.0;
    double residual = 0.0;
    std::optional<double> step_norm;  ///< ||x_{n+1} - x_n||, absent on the last step
    std::size_t cut_count = 0;
};

struct Outcome {
    enum class Kind { Converged, Terminated, Divergent, MaxIterReached };
    Kind kind = Kind::MaxIterReached;
    Vector point;
    std::size_t n = 0;
    std::string evidence;
};

inline const char* to_string(Outcome::Kind k) {
    switch (k) {
        case Outcome::Kind::Converged: return "converged";
        case Outcome::Kind::Terminated: return "terminated";
        case Outcome::Kind::Divergent: return "divergent";
        case Outcome::Kind::MaxIterReached: return "max_iter";
    }
    return "?";
}

struct IterationTrace {
    std::string algorithm;
    Vector x0;
    std::vector<TraceStep> steps;
    Outcome outcome;

    double sum_squared_steps() const {
        double s = 0.0;
        for (const auto& st : steps) {
            if (st.step_norm) s += *st.step_norm * *st.step_norm;
        }
        return s;
    }
    double sum_squared_residuals() const {
        double s = 0.0;
        for (const auto& st : steps) s += st.residual * st.residual;
        return s;
    }
};

struct Problem {
    ConvexSet c;
    Vector x0;
    OperatorFamily family;  ///< the T_n, already in T_C-class form
    std::optional<FixedPointSet> oracle;
    bool x0_projected = false;  ///< x0 was moved onto C at construction
};

/// Builds a Problem, projecting x0 onto C when it lies outside.
inline Problem make_problem(ConvexSet c, Vector x0, OperatorFamily family,
                            std::optional<FixedPointSet> oracle = std::nullopt) {
    require_finite(x0, "make_problem");
    if (x0.size() != c.dim() || family.dim() != c.dim()) {
        throw std::invalid_argument("make_problem: dimension mismatch between C, x0 and family");
    }
    if (oracle && oracle->dim() != c.dim()) {
        throw std::invalid_argument("make_problem: oracle dimension mismatch");
    }
    bool moved = false;
    if (!c.contains(x0, 0.0)) {
        x0 = project_convex(x0, c);
        moved = true;
    }
    return Problem{std::move(c), std::move(x0), std::move(family), std::move(oracle), moved};
}

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

/// Produces x_{n+1} from (n, x_n, T_n x_n); nullopt when the feasible region
/// became empty. Also reports the current number of stored cuts.
using NextIterate =
    std::function<std::optional<Vector>(std::size_t, const Vector&, const Vector&, std::size_t&)>;
using Evaluate = std::function<Vector(std::size_t, const Vector&)>;

inline IterationTrace drive(std::string name, const Vector& x0, const RunConfig& cfg,
                            const Evaluate& evaluate, const NextIterate& next) {
    cfg.validate();
    IterationTrace trace;
    trace.algorithm = std::move(name);
    trace.x0 = x0;

    auto finish = [&](Outcome::Kind k, Vector p, std::size_t n, std::string why) {
        trace.outcome = Outcome{k, std::move(p), n, std::move(why)};
        return trace;
    };

    Vector x = x0;
    std::size_t quiet_residual = 0;
    std::size_t quiet_step = 0;
    std::size_t cuts = 0;
    for (std::size_t n = 0; n < cfg.max_iter; ++n) {
        TraceStep st;
        st.n = n;
        st.x = x;
        st.tx = evaluate(n, x);
        st.dist_from_start = (x - x0).norm();
        st.residual = (x - st.tx).norm();
        st.cut_count = cuts;
        trace.steps.push_back(st);
        TraceStep& cur = trace.steps.back();

        if (!x.allFinite() || !cur.tx.allFinite()) {
            return finish(Outcome::Kind::Divergent, x, n, "non-finite iterate");
        }
        if (cur.dist_from_start > cfg.norm_cap) {
            return finish(Outcome::Kind::Divergent, x, n,
                          "||x_n - x_0|| = " + sci(cur.dist_from_start) +
                              " exceeds norm cap");
        }
        quiet_residual = cur.residual < cfg.residual_tol ? quiet_residual + 1 : 0;
        if (quiet_residual >= cfg.converge_window) {
            return finish(Outcome::Kind::Converged, x, n,
                          "residual " + sci(cur.residual) + " below tolerance");
        }

        auto nx = next(n, x, cur.tx, cuts);
        cur.cut_count = cuts;
        if (!nx) {
            return finish(Outcome::Kind::Terminated, x, n, "empty feasible region at step " +
                                                              std::to_string(n));
        }
        const double step = (*nx - x).norm();
        cur.step_norm = step;
        quiet_step = step < cfg.step_tol ? quiet_step + 1 : 0;
        if (quiet_step >= cfg.converge_window) {
            return finish(Outcome::Kind::Converged, x, n,
                          "step " + sci(step) + " below tolerance");
        }
        x = std::move(*nx);
    }
    return finish(Outcome::Kind::MaxIterReached, x, cfg.max_iter, "iteration budget exhausted");
}

inline std::optional<Vector> project_with_set(const Vector& x0, const ConvexSet& c,
                                              const HalfSpace& h1, const HalfSpace& h2,
                                              const RunConfig& cfg) {
    if (c.is_whole_space()) return project_two_halfspaces(x0, h1, h2);
    PolyhedralAccumulator acc(c);
    acc.append(h1);
    acc.append(h2);
    return project_polyhedron(x0, acc, cfg.proj_tol, cfg.proj_max_inner);
}

}  // namespace detail

/// x_{n+1} = projection of x_0 onto C ∩ H(x_0, x_n) ∩ H(x_n, T_n x_n).
inline IterationTrace run_haugazeau(const Problem& p, const RunConfig& cfg) {
    const auto cls = p.family.declared_class();
    if (cls != OperatorClass::TCclass && cls != OperatorClass::FirmlyNonexpansive) {
        throw std::invalid_argument("run_haugazeau: family must be T_C-class or firmly nonexpansive");
    }
    const Vector& x0 = p.x0;
    return detail::drive(
        "haugazeau", x0, cfg,
        [&](std::size_t n, const Vector& x) { return p.family.at(n)(x); },
        [&](std::size_t, const Vector& x, const Vector& tx, std::size_t&) -> std::optional<Vector> {
            if (p.c.is_whole_space()) {
                // Solved in coordinates centred at x_n: both cuts pass within
                // ||x_n - T_n x_n|| of the origin, so no offset cancels.
                const Vector u0 = x0 - x;
                auto u = project_two_halfspaces(u0, halfspace_from_pair(u0, Vector::Zero(x.size())),
                                                halfspace_from_pair(Vector::Zero(x.size()), tx - x));
                if (!u) return std::nullopt;
                return Vector(x + *u);
            }
            return detail::project_with_set(x0, p.c, halfspace_from_pair(x0, x),
                                            halfspace_from_pair(x, tx), cfg);
        });
}

/// CQ method with y_n = R_n x_n:
///   C_n = {z ∈ C : ||y_n - z|| <= ||x_n - z||},
///   D_n = {z ∈ C : <x_n - z, x_0 - x_n> >= 0},
///   x_{n+1} = P_{C_n ∩ D_n} x_0.
/// The trace records T_n x_n = (x_n + y_n)/2 so its residuals are comparable
/// with the Haugazeau run on halve(R_n).
inline IterationTrace run_cq(const Problem& p, const OperatorFamily& r_family, const RunConfig& cfg) {
    if (r_family.dim() != p.c.dim()) throw std::invalid_argument("run_cq: dimension mismatch");
    if (r_family.declared_class() == OperatorClass::TCclass) {
        throw std::invalid_argument("run_cq: R_n must be (quasi-)nonexpansive, not a T_C-class wrapper");
    }
    const Vector& x0 = p.x0;
    const Eigen::Index d = x0.size();

    // ||y - z||^2 <= ||x - z||^2  <=>  <z - (x + y)/2, x - y> <= 0
    auto c_n = [d](const Vector& x, const Vector& y) {
        Vector normal = x - y;
        if (normal.isZero(0.0)) return HalfSpace::whole(d);
        const double offset = (0.5 * (x + y)).dot(normal);
        return HalfSpace{std::move(normal), offset, false};
    };
    // <x_n - z, x_0 - x_n> >= 0  <=>  <z, x_0 - x_n> <= <x_n, x_0 - x_n>
    auto d_n = [d](const Vector& x0, const Vector& x) {
        Vector normal = x0 - x;
        if (normal.isZero(0.0)) return HalfSpace::whole(d);
        const double offset = x.dot(normal);
        return HalfSpace{std::move(normal), offset, false};
    };

    // y_n is kept from the residual evaluation so the cuts use R_n x_n itself.
    Vector y;
    return detail::drive(
        "cq", x0, cfg,
        [&](std::size_t n, const Vector& x) -> Vector {
            y = r_family.at(n)(x);
            return 0.5 * (x + y);
        },
        [&](std::size_t, const Vector& x, const Vector&, std::size_t&) -> std::optional<Vector> {
            if (p.c.is_whole_space()) {
                const Vector zero = Vector::Zero(d);
                const Vector u0 = x0 - x;
                auto u = project_two_halfspaces(u0, d_n(u0, zero), c_n(zero, y - x));
                if (!u) return std::nullopt;
                return Vector(x + *u);
            }
            return detail::project_with_set(x0, p.c, d_n(x0, x), c_n(x, y), cfg);
        });
}

/// Shrinking projection: C_{n+1} = C_n ∩ H(x_n, T_n x_n), x_{n+1} = P_{C_{n+1}} x_0.
/// Polyhedral C keeps a warm-started active-set projector across steps;
/// otherwise each step re-projects with Dykstra.
inline IterationTrace run_shrinking(const Problem& p, const RunConfig& cfg) {
    const auto cls = p.family.declared_class();
    if (cls != OperatorClass::TCclass && cls != OperatorClass::FirmlyNonexpansive) {
        throw std::invalid_argument("run_shrinking: family must be T_C-class or firmly nonexpansive");
    }
    const Vector& x0 = p.x0;
    PolyhedralAccumulator acc(p.c);
    std::optional<PolyhedralProjector> warm;
    if (auto lin = linear_constraints(p.c)) {
        warm.emplace(x0, cfg.proj_tol, cfg.proj_max_inner);
        for (const auto& [a, c] : lin->equalities) warm->add_equality(a, c);
        for (const auto& h : lin->inequalities) warm->add(h);
    }
    return detail::drive(
        "shrinking", x0, cfg,
        [&](std::size_t n, const Vector& x) { return p.family.at(n)(x); },
        [&](std::size_t, const Vector& x, const Vector& tx, std::size_t& cuts) -> std::optional<Vector> {
            const HalfSpace cut = halfspace_from_pair(x, tx);
            const bool stored = acc.append(cut);
            cuts = acc.cuts().size();
            if (warm) {
                if (stored) warm->add(cut);
                return warm->solve();
            }
            return project_polyhedron(x0, acc, cfg.proj_tol, cfg.proj_max_inner);
        });
}

// ---------------------------------------------------------------------------
// Outcome classification and trace invariants

struct InvariantTolerances {
    double monotone = 1e-10;
    double distance_bound = 1e-8;
    double summability = 1e-6;
    double per_step = 1e-9;
    double membership = 1e-9;
    double early_stop = 1e-9;
    double oracle_error = 1e-6;
};

struct OutcomeReport {
    Outcome::Kind kind = Outcome::Kind::MaxIterReached;
    std::optional<double> error_vs_oracle;  ///< ||x* - P_F x_0|| when an oracle exists
    std::optional<double> oracle_distance;  ///< ||x_0 - P_F x_0||
    bool error_ok = true;
    bool limit_bound_ok = true;
    bool monotone_ok = true;
    bool distance_bound_ok = true;
    bool summability_ok = true;
    bool per_step_ok = true;
    bool membership_ok = true;
    bool early_stop_ok = true;
    double sum_squared_steps = 0.0;
    double sum_squared_residuals = 0.0;
    std::vector<std::string> violations;

    bool invariants_ok() const {
        return error_ok && limit_bound_ok && monotone_ok && distance_bound_ok && summability_ok &&
               per_step_ok && membership_ok && early_stop_ok;
    }
};

/// Checks the per-step facts that every orbit must satisfy and, when an
/// oracle is available, the distance bounds and the final error.
inline OutcomeReport classify_outcome(const IterationTrace& trace,
                                      const std::optional<FixedPointSet>& oracle,
                                      const InvariantTolerances& tol = {}) {
    OutcomeReport rep;
    rep.kind = trace.outcome.kind;
    rep.sum_squared_steps = trace.sum_squared_steps();
    rep.sum_squared_residuals = trace.sum_squared_residuals();
    const auto& steps = trace.steps;
    auto flag = [&](bool& slot, std::string msg) {
        if (slot) rep.violations.push_back(std::move(msg));
        slot = false;
    };

    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
        if (steps[i + 1].dist_from_start < steps[i].dist_from_start - tol.monotone) {
            flag(rep.monotone_ok, "distance from x0 decreased at n = " + std::to_string(i + 1));
        }
    }

    // Per-step inequality and membership of x_{n+1} in H(x_n, T_n x_n)
    // (and in H(x_0, x_n) for the two-half-space drivers).
    // Traces re-read without stored vectors only support the scalar checks.
    const bool vectors = std::all_of(steps.begin(), steps.end(), [&](const TraceStep& s) {
        return s.x.size() == trace.x0.size() && s.tx.size() == trace.x0.size();
    });
    const bool two_cut = trace.algorithm == "haugazeau" || trace.algorithm == "cq";
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
        const auto& s = steps[i];
        if (!s.step_norm) continue;
        if ((*s.step_norm) * (*s.step_norm) < s.residual * s.residual - tol.per_step) {
            flag(rep.per_step_ok, "||x_{n+1} - x_n||^2 < ||x_n - T_n x_n||^2 at n = " +
                                      std::to_string(i));
        }
        if (!vectors) continue;
        const Vector& next = steps[i + 1].x;
        const double scale = 1.0 + next.norm();
        if (!halfspace_from_pair(s.x, s.tx).contains(next, tol.membership * scale)) {
            flag(rep.membership_ok, "x_{n+1} outside H(x_n, T_n x_n) at n = " + std::to_string(i));
        }
        if (two_cut && !halfspace_from_pair(trace.x0, s.x).contains(next, tol.membership * scale)) {
            flag(rep.membership_ok, "x_{n+1} outside H(x_0, x_n) at n = " + std::to_string(i));
        }
    }
    if (vectors && trace.algorithm == "shrinking" && steps.size() > 1) {
        // x_{n+1} must satisfy every accumulated cut.
        std::vector<HalfSpace> cuts;
        for (std::size_t i = 0; i + 1 < steps.size() && rep.membership_ok; ++i) {
            if (!steps[i].step_norm) break;
            const HalfSpace h = halfspace_from_pair(steps[i].x, steps[i].tx);
            if (!h.whole_space) cuts.push_back(h);
            const Vector& next = steps[i + 1].x;
            const double slack = tol.membership * (1.0 + next.norm());
            for (const auto& c : cuts) {
                if (!c.contains(next, slack)) {
                    flag(rep.membership_ok, "x_{n+1} violates an accumulated cut at n = " +
                                                std::to_string(i));
                    break;
                }
            }
        }
    }

    // Early-stop soundness: returning to x0 means x0 was fixed by an earlier T_k.
    for (std::size_t n = 1; n < steps.size(); ++n) {
        if (steps[n].dist_from_start != 0.0) continue;
        bool witnessed = false;
        for (std::size_t k = 0; k < n; ++k) witnessed = witnessed || steps[k].residual <= tol.early_stop;
        if (!witnessed) flag(rep.early_stop_ok, "x_n = x_0 without a fixed T_k at n = " + std::to_string(n));
    }

    if (oracle) {
        const Vector pf = oracle->project(trace.x0);
        const double bound = (trace.x0 - pf).norm();
        rep.oracle_distance = bound;
        for (const auto& s : steps) {
            if (s.dist_from_start > bound + tol.distance_bound) {
                flag(rep.distance_bound_ok, "||x_n - x_0|| exceeds ||x_0 - P_F x_0|| at n = " +
                                                std::to_string(s.n));
                break;
            }
        }
        const double cap = (bound + tol.summability) * (bound + tol.summability);
        if (rep.sum_squared_steps > cap || rep.sum_squared_residuals > cap) {
            flag(rep.summability_ok, "partial sums exceed (||x_0 - P_F x_0|| + tol)^2");
        }
        if (!steps.empty() && steps.back().dist_from_start > bound + tol.oracle_error) {
            flag(rep.limit_bound_ok, "final ||x_0 - x_n|| exceeds ||x_0 - P_F x_0||");
        }
        if (trace.outcome.point.size() == pf.size()) {
            rep.error_vs_oracle = (trace.outcome.point - pf).norm();
        }
        if (trace.outcome.kind == Outcome::Kind::Converged && rep.error_vs_oracle) {
            if (*rep.error_vs_oracle > tol.oracle_error) {
                flag(rep.error_ok, "limit differs from P_F x_0 by " + detail::sci(*rep.error_vs_oracle));
            }
        }
    }
    return rep;
}

}  // namespace fixpoint
