#include "fixpoint/algorithms.hpp"
#include "fixpoint/random.hpp"
#include "fixpoint/verify.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fixpoint;
using oracle::vec;

namespace {

Problem whole_problem(const Mapping& r, Vector x0, std::optional<FixedPointSet> oracle = std::nullopt) {
    const auto d = x0.size();
    return make_problem(ConvexSet::whole(d), std::move(x0), halve(OperatorFamily::constant(r)), std::move(oracle));
}

// Nonexpansive affine map about c fixing exactly c + span(b): identity on
// span(b), an orthogonal map without eigenvalue 1 times gamma elsewhere.
Mapping random_affine(Rng& rng, Eigen::Index d, Eigen::Index k, double gamma, FixedPointSet* fixed) {
    const Vector c = rng.gaussian(d);
    const Matrix q = rng.orthogonal(d);
    const Matrix b = q.leftCols(k), w = q.rightCols(d - k);
    const Matrix m = b * b.transpose() + gamma * w * rng.rotation_without_fixed_points(d - k) * w.transpose();
    *fixed = FixedPointSet::affine(c, b);
    return maps::affine_about(c, m, OperatorClass::Nonexpansive, *fixed, "affine");
}

void expect_all_invariants(const IterationTrace& t, const std::optional<FixedPointSet>& oracle) {
    const auto rep = classify_outcome(t, oracle);
    EXPECT_TRUE(rep.monotone_ok) << t.algorithm;
    EXPECT_TRUE(rep.distance_bound_ok) << t.algorithm;
    EXPECT_TRUE(rep.summability_ok) << t.algorithm;
    EXPECT_TRUE(rep.per_step_ok) << t.algorithm;
    EXPECT_TRUE(rep.membership_ok) << t.algorithm;
    EXPECT_TRUE(rep.early_stop_ok) << t.algorithm;
    for (const auto& v : rep.violations) ADD_FAILURE() << t.algorithm << ": " << v;
}

}  // namespace

TEST(Haugazeau, IdentityConvergesAtStart) {
    const Vector x0 = vec({1, 2, 3});
    const auto t = run_haugazeau(whole_problem(maps::identity(3), x0), RunConfig{});
    EXPECT_EQ(t.outcome.kind, Outcome::Kind::Converged);
    EXPECT_EQ(t.outcome.n, 0u);
    EXPECT_EQ(t.outcome.point, x0);
}

TEST(Haugazeau, ZeroMapReachesOriginInOneStep) {
    const Vector x0 = vec({4, -3});
    const auto p = whole_problem(maps::scale(-1.0, 2), x0, FixedPointSet::singleton(Vector::Zero(2)));
    const auto t = run_haugazeau(p, RunConfig{});
    ASSERT_GE(t.steps.size(), 2u);
    EXPECT_LT(t.steps[1].x.norm(), 1e-15);
    EXPECT_EQ(t.outcome.kind, Outcome::Kind::Converged);
    EXPECT_LT(t.outcome.point.norm(), 1e-15);
    const auto rep = classify_outcome(t, p.oracle);
    ASSERT_TRUE(rep.error_vs_oracle);
    EXPECT_LT(*rep.error_vs_oracle, 1e-15);
}

TEST(Haugazeau, ReflectionConvergesToLineProjection) {
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        const double angle = rng.uniform(0.0, 3.0);
        const Matrix b = vec({std::cos(angle), std::sin(angle)});
        const Vector x0 = rng.gaussian(2, 3.0);
        const auto p = whole_problem(maps::reflection(Vector::Zero(2), b), x0, FixedPointSet::subspace(b));
        const auto t = run_haugazeau(p, RunConfig{});
        EXPECT_EQ(t.outcome.kind, Outcome::Kind::Converged);
        const Vector pl = oracle::span_projector(b) * x0;
        EXPECT_LT((t.outcome.point - pl).norm(), 1e-6);
        const auto rep = classify_outcome(t, p.oracle);
        EXPECT_TRUE(rep.invariants_ok());
        EXPECT_LT(*rep.error_vs_oracle, 1e-6);
    }
}

TEST(Haugazeau, RejectsNonTcFamily) {
    // -Id is nonexpansive but not firmly nonexpansive.
    auto p = make_problem(ConvexSet::whole(2), vec({1, 1}), OperatorFamily::constant(maps::scale(-1.0, 2)));
    EXPECT_THROW(run_haugazeau(p, RunConfig{}), std::invalid_argument);
    EXPECT_THROW(run_shrinking(p, RunConfig{}), std::invalid_argument);
}

TEST(Cq, IdentityKeepsStart) {
    const Vector x0 = vec({1, -1, 2});
    const auto p = whole_problem(maps::identity(3), x0);
    const auto t = run_cq(p, OperatorFamily::constant(maps::identity(3)), RunConfig{});
    for (const auto& s : t.steps) EXPECT_EQ(s.x, x0);
    EXPECT_EQ(t.outcome.kind, Outcome::Kind::Converged);
}

TEST(Cq, MinusIdentityFirstStepIsOrigin) {
    const Vector x0 = vec({2, 5});
    const auto r = maps::scale(-1.0, 2);
    const auto p = whole_problem(r, x0);
    const auto t = run_cq(p, OperatorFamily::constant(r), RunConfig{});
    ASSERT_GE(t.steps.size(), 2u);
    EXPECT_LT(t.steps[1].x.norm(), 1e-15);
    // C_0 = {<z, x0> <= 0}: the origin is its projection of x0.
    EXPECT_LT(std::abs(t.steps[1].x.dot(x0)), 1e-15);
}

TEST(Cq, AgreesWithHaugazeauOnRandomAffineMaps) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = 4 + trial % 5;
        FixedPointSet f = FixedPointSet::whole(d);
        const Mapping r = random_affine(rng, d, 1 + trial % 2, trial % 3 == 0 ? 1.0 : 0.9, &f);
        const Vector x0 = rng.gaussian(d, 3.0);
        const auto p = whole_problem(r, x0, f);
        RunConfig cfg;
        cfg.max_iter = 50;
        cfg.residual_tol = 1e-300;
        cfg.step_tol = 1e-300;
        const auto h = run_haugazeau(p, cfg);
        const auto c = run_cq(p, OperatorFamily::constant(r), cfg);
        // Affine maps can stop early with an exact zero step.
        ASSERT_EQ(h.steps.size(), c.steps.size()) << "trial " << trial;
        ASSERT_EQ(h.outcome.kind, c.outcome.kind);
        for (std::size_t n = 0; n < h.steps.size(); ++n) {
            ASSERT_LT((h.steps[n].x - c.steps[n].x).norm(), 1e-8) << "trial " << trial << " n " << n;
        }
    }
}

TEST(Shrinking, IdentityAddsNoCuts) {
    const Vector x0 = vec({0.5, 0.5});
    const auto t = run_shrinking(whole_problem(maps::identity(2), x0), RunConfig{});
    EXPECT_EQ(t.outcome.kind, Outcome::Kind::Converged);
    for (const auto& s : t.steps) {
        EXPECT_EQ(s.cut_count, 0u);
        EXPECT_EQ(s.x, x0);
    }
}

TEST(Shrinking, ZeroMapCutsThroughOrigin) {
    // T = halve(-Id) = 0: H(x0, 0) = {<z, x0> <= 0} and x1 = 0.
    const Vector x0 = vec({3});
    const auto t = run_shrinking(whole_problem(maps::scale(-1.0, 1), x0), RunConfig{});
    ASSERT_GE(t.steps.size(), 2u);
    EXPECT_LT(std::abs(t.steps[1].x[0]), 1e-15);
    EXPECT_EQ(t.outcome.kind, Outcome::Kind::Converged);
}

TEST(Shrinking, HalvingMapHandExpansionInOneDimension) {
    // T x = x/2 (the averaged zero constant): the cut at x_n is {z <= x_n/2},
    // so x_n = x0 / 2^n.
    const double a = 5.0;
    const auto p = whole_problem(maps::constant(vec({0})), vec({a}), FixedPointSet::singleton(vec({0})));
    RunConfig cfg;
    cfg.max_iter = 40;
    const auto t = run_shrinking(p, cfg);
    for (std::size_t n = 0; n < t.steps.size(); ++n) {
        EXPECT_NEAR(t.steps[n].x[0], a * std::ldexp(1.0, -static_cast<int>(n)), 1e-15 * a) << "n = " << n;
    }
    EXPECT_LT(std::abs(t.outcome.point[0]), 2 * cfg.residual_tol);
    expect_all_invariants(t, p.oracle);
}

TEST(Shrinking, AlternatingConstantMapsNeverConverge) {
    const Vector a = vec({1, 0}), b = vec({-1, 0});
    const auto fam = halve(OperatorFamily::cyclic({maps::constant(a), maps::constant(b)}));
    for (const Vector& x0 : {vec({0, 0}), vec({3, 2}), vec({-0.2, 7})}) {
        const auto p = make_problem(ConvexSet::whole(2), x0, fam);
        RunConfig cfg;
        cfg.max_iter = 2000;
        for (const auto& t : {run_shrinking(p, cfg), run_haugazeau(p, cfg),
                              run_cq(p, OperatorFamily::cyclic({maps::constant(a), maps::constant(b)}), cfg)}) {
            EXPECT_NE(t.outcome.kind, Outcome::Kind::Converged) << t.algorithm;
            EXPECT_NE(t.outcome.kind, Outcome::Kind::MaxIterReached) << t.algorithm;
            for (const auto& s : t.steps) {
                // No point is fixed by both maps, so no step reports a small
                // residual against both.
                const double r0 = (s.x - 0.5 * (s.x + a)).norm(), r1 = (s.x - 0.5 * (s.x + b)).norm();
                EXPECT_GT(std::max(r0, r1), 0.25) << t.algorithm;
            }
        }
    }
}

TEST(Outcome, TranslationIsDivergentOrTerminated) {
    // x -> x + v is nonexpansive without fixed points.
    const Vector v = vec({1, 0.5});
    const Mapping shift([v](const Vector& x) -> Vector { return x + v; }, 2, OperatorClass::Nonexpansive,
                        std::nullopt, "shift");
    const auto p = whole_problem(shift, vec({0, 0}));
    RunConfig cfg;
    cfg.max_iter = 5000;
    cfg.norm_cap = 50.0;
    for (const auto& t : {run_haugazeau(p, cfg), run_shrinking(p, cfg)}) {
        EXPECT_TRUE(t.outcome.kind == Outcome::Kind::Divergent || t.outcome.kind == Outcome::Kind::Terminated)
            << t.algorithm << " " << to_string(t.outcome.kind);
        EXPECT_FALSE(t.outcome.evidence.empty());
    }
}

TEST(Outcome, ClassifyFlagsCorruptedTrace) {
    Rng rng(3);
    FixedPointSet f = FixedPointSet::whole(4);
    const Mapping r = random_affine(rng, 4, 1, 0.9, &f);
    const auto p = whole_problem(r, rng.gaussian(4, 3.0), f);
    auto t = run_haugazeau(p, RunConfig{});
    ASSERT_TRUE(classify_outcome(t, p.oracle).invariants_ok());
    ASSERT_GE(t.steps.size(), 3u);
    t.steps[2].dist_from_start = 0.5 * t.steps[1].dist_from_start;
    const auto rep = classify_outcome(t, p.oracle);
    EXPECT_FALSE(rep.monotone_ok);
    EXPECT_FALSE(rep.invariants_ok());
    EXPECT_FALSE(rep.violations.empty());
}

TEST(Outcome, ClassifyFlagsFalseLimit) {
    const Matrix b = vec({1, 0});
    const auto p = whole_problem(maps::reflection(Vector::Zero(2), b), vec({1, 2}), FixedPointSet::subspace(b));
    auto t = run_haugazeau(p, RunConfig{});
    t.outcome.point = vec({5, 0});
    const auto rep = classify_outcome(t, p.oracle);
    EXPECT_FALSE(rep.error_ok);
    EXPECT_NEAR(*rep.error_vs_oracle, 4.0, 1e-12);
}

TEST(Outcome, EarlyStopSoundness) {
    // T_0 = Id makes x_1 = x_0; the check must find the witness k = 0.
    const Vector x0 = vec({2, 1});
    std::vector<Mapping> members{maps::identity(2), maps::projection(Vector::Zero(2), vec({1, 0}))};
    const auto p = make_problem(ConvexSet::whole(2), x0, halve(OperatorFamily::cyclic(members)));
    RunConfig cfg;
    cfg.converge_window = 2;
    const auto t = run_haugazeau(p, cfg);
    ASSERT_GE(t.steps.size(), 2u);
    EXPECT_EQ(t.steps[1].x, x0);
    EXPECT_TRUE(classify_outcome(t, std::nullopt).early_stop_ok);

    auto bad = t;
    bad.steps[0].residual = 1.0;
    EXPECT_FALSE(classify_outcome(bad, std::nullopt).early_stop_ok);
}

TEST(Invariants, HoldOnRandomZooFamilies) {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index d = 3 + trial % 3;
        const auto zoo = verify::operator_zoo(d, 1, rng);
        const auto fam = halve(OperatorFamily::cyclic(zoo.members));
        const Vector x0 = rng.gaussian(d, 3.0);
        const auto p = make_problem(ConvexSet::whole(d), x0, fam, zoo.common);
        RunConfig cfg;
        cfg.max_iter = 3000;
        expect_all_invariants(run_haugazeau(p, cfg), p.oracle);
        expect_all_invariants(run_shrinking(p, cfg), p.oracle);
        expect_all_invariants(run_cq(p, OperatorFamily::cyclic(zoo.members), cfg), p.oracle);
    }
}

TEST(ConstrainedSet, BallIntersectsFixedLine) {
    // F = line through c along u; C = ball around the origin. P_{F ∩ C} x0
    // clamps the line parameter of P_F x0 to the chord.
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::Index d = 3;
        const Vector c = 0.5 * rng.gaussian(d);
        const Matrix u = rng.orthonormal(d, 1);
        const Mapping r = maps::reflection(c, u);
        const double radius = 1.5;
        const auto ball = ConvexSet::ball(Vector::Zero(d), radius);
        const Vector x0 = project_convex(rng.gaussian(d, 3.0), ball);
        const auto p = make_problem(ball, x0, halve(OperatorFamily::constant(r)));
        RunConfig cfg;
        cfg.max_iter = 20000;
        cfg.residual_tol = 1e-9;
        const Vector dir = u.col(0);
        const double mid = -c.dot(dir);
        const Vector foot = c + mid * dir;
        if (foot.norm() > radius - 0.2) continue;
        const double half_chord = std::sqrt(radius * radius - foot.squaredNorm());
        const double s = std::clamp((x0 - c).dot(dir), mid - half_chord, mid + half_chord);
        const Vector expected = c + s * dir;
        const bool clamped = std::abs(s - (x0 - c).dot(dir)) > 0.0;
        const auto sh = run_shrinking(p, cfg);
        EXPECT_EQ(sh.outcome.kind, Outcome::Kind::Converged);
        EXPECT_LT((sh.outcome.point - expected).norm(), 1e-6);
        // At a chord endpoint Haugazeau creeps along the sphere.
        const auto hg = run_haugazeau(p, cfg);
        if (!clamped) {
            EXPECT_EQ(hg.outcome.kind, Outcome::Kind::Converged);
        }
        EXPECT_LT((hg.outcome.point - expected).norm(), clamped ? 1e-5 : 1e-6);
        for (const auto* t : {&sh, &hg}) EXPECT_LE(t->outcome.point.norm(), radius + 1e-9);
    }
}

TEST(ConstrainedSet, BoxWithShrinkingAndCq) {
    Rng rng(6);
    const Eigen::Index d = 3;
    const auto box = ConvexSet::box(-Vector::Ones(d), Vector::Ones(d));
    const Matrix q = rng.orthogonal(d);
    const Matrix b = q.leftCols(2);
    const Mapping r = maps::projection(Vector::Zero(d), b);
    const Vector x0 = vec({0.9, -0.8, 0.7});
    const auto p = make_problem(box, x0, halve(OperatorFamily::constant(r)));
    RunConfig cfg;
    cfg.max_iter = 5000;
    const auto s = run_shrinking(p, cfg);
    const auto c = run_cq(p, OperatorFamily::constant(r), cfg);
    ASSERT_EQ(s.outcome.kind, Outcome::Kind::Converged);
    ASSERT_EQ(c.outcome.kind, Outcome::Kind::Converged);
    // Oracle: the plane span(b) inside the box, by QP enumeration over the
    // box rows plus the plane as two opposite inequalities.
    const Vector nrm = q.col(2);
    std::vector<HalfSpace> rows{{nrm, 0.0, false}, {-nrm, 0.0, false}};
    for (Eigen::Index k = 0; k < d; ++k) {
        rows.push_back({Vector::Unit(d, k), 1.0, false});
        rows.push_back({-Vector::Unit(d, k), 1.0, false});
    }
    const auto qp = oracle::qp_enumerate(x0, rows);
    ASSERT_TRUE(qp);
    EXPECT_LT((s.outcome.point - *qp).norm(), 1e-6);
    EXPECT_LT((c.outcome.point - *qp).norm(), 1e-6);
}

TEST(Problem, StartOutsideSetIsProjected) {
    const auto ball = ConvexSet::ball(Vector::Zero(2), 1.0);
    const auto p = make_problem(ball, vec({3, 4}), halve(OperatorFamily::constant(maps::identity(2))));
    EXPECT_TRUE(p.x0_projected);
    EXPECT_LT((p.x0 - vec({0.6, 0.8})).norm(), 1e-15);
    EXPECT_THROW(make_problem(ball, vec({1, 2, 3}), halve(OperatorFamily::constant(maps::identity(2)))),
                 std::invalid_argument);
}

TEST(RunConfig, RejectsNonPositiveTolerances) {
    RunConfig cfg;
    cfg.residual_tol = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    RunConfig cfg2;
    cfg2.max_iter = 0;
    EXPECT_THROW(cfg2.validate(), std::invalid_argument);
}

TEST(Determinism, IdenticalInputsGiveIdenticalTraces) {
    Rng rng(7);
    const auto zoo = verify::operator_zoo(4, 1, rng);
    const auto fam = halve(OperatorFamily::cyclic(zoo.members));
    const auto p = make_problem(ConvexSet::whole(4), rng.gaussian(4, 3.0), fam, zoo.common);
    RunConfig cfg;
    cfg.max_iter = 500;
    const auto a = run_shrinking(p, cfg), b = run_shrinking(p, cfg);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t n = 0; n < a.steps.size(); ++n) EXPECT_EQ(a.steps[n].x, b.steps[n].x);
}
