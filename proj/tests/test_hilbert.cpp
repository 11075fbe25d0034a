#include "fixpoint/hilbert.hpp"
#include "fixpoint/random.hpp"
#include "fixpoint/verify.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace fixpoint;
using oracle::vec;

namespace {

HalfSpace hs(Vector n, double c) { return HalfSpace{std::move(n), c, false}; }

std::vector<ConvexSet> sample_sets(Rng& rng, Eigen::Index d) {
    std::vector<ConvexSet> out;
    out.push_back(ConvexSet::whole(d));
    out.push_back(ConvexSet::ball(rng.gaussian(d), rng.uniform(0.5, 2.0)));
    const Vector lo = rng.gaussian(d);
    out.push_back(ConvexSet::box(lo, lo + Vector::Constant(d, rng.uniform(0.5, 2.0))));
    out.push_back(ConvexSet::affine(rng.gaussian(d), rng.orthonormal(d, d - 1)));
    std::vector<HalfSpace> list;
    for (int i = 0; i < 4; ++i) list.push_back(hs(rng.gaussian(d), rng.uniform(0.5, 2.0)));
    out.push_back(ConvexSet::halfspaces(list, d));
    return out;
}

// A member of C, drawn by projecting a random point (exact for every kind)
// and mixing with another member.
Vector sample_member(const ConvexSet& c, Rng& rng) {
    const Vector a = project_convex(rng.gaussian(c.dim(), 3.0), c);
    const Vector b = project_convex(rng.gaussian(c.dim(), 3.0), c);
    const double t = rng.uniform(0.0, 1.0);
    return t * a + (1.0 - t) * b;
}

}  // namespace

TEST(Inner, HandArithmetic) {
    EXPECT_DOUBLE_EQ(inner(vec({1, 0}), vec({0, 1})), 0.0);
    EXPECT_DOUBLE_EQ(inner(vec({1, 2}), vec({3, 4})), 11.0);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const Vector a = rng.gaussian(4);
        EXPECT_GE(inner(a, a), 0.0);
        EXPECT_NEAR(inner(a, a), a.squaredNorm(), 1e-12);
    }
}

TEST(Inner, DimensionMismatchThrows) {
    EXPECT_THROW(inner(vec({1, 2}), vec({1, 2, 3})), std::invalid_argument);
}

TEST(HalfSpaceFromPair, ExpandsToHalfPlaneOnGrid) {
    const HalfSpace h = halfspace_from_pair(vec({2, 0}), vec({1, 0}));
    ASSERT_FALSE(h.whole_space);
    // <z - (1,0), (1,0)> <= 0  <=>  z1 <= 1
    for (double z1 = -3.0; z1 <= 3.0; z1 += 0.25) {
        for (double z2 = -3.0; z2 <= 3.0; z2 += 0.5) {
            EXPECT_EQ(h.contains(vec({z1, z2})), z1 <= 1.0) << z1 << "," << z2;
        }
    }
}

TEST(HalfSpaceFromPair, EqualPointsGiveWholeSpace) {
    const HalfSpace h = halfspace_from_pair(vec({3, 7}), vec({3, 7}));
    EXPECT_TRUE(h.whole_space);
    EXPECT_TRUE(h.contains(vec({1e6, -1e6})));
    EXPECT_EQ(project_halfspace(vec({5, 5}), h), vec({5, 5}));
}

TEST(HalfSpaceFromPair, SecondPointOnBoundary) {
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const Vector x = rng.gaussian(3), y = rng.gaussian(3);
        const HalfSpace h = halfspace_from_pair(x, y);
        EXPECT_NEAR(h.excess(y), 0.0, 1e-12 * (1.0 + y.squaredNorm() + x.squaredNorm()));
        EXPECT_TRUE(h.contains(y, 1e-12));
    }
}

TEST(ProjectHalfSpace, InfeasiblePointAgreesWithKkt) {
    const HalfSpace h = hs(vec({1, 0}), 1.0);
    const Vector p = project_halfspace(vec({3, 4}), h);
    const auto q = oracle::qp_enumerate(vec({3, 4}), {h});
    ASSERT_TRUE(q);
    EXPECT_LT((p - vec({1, 4})).norm(), 1e-14);
    EXPECT_LT((p - *q).norm(), 1e-12);
    EXPECT_NEAR(h.excess(p), 0.0, 1e-14);
}

TEST(ProjectHalfSpace, FeasiblePointUnchanged) {
    const Vector w = vec({-2, 9});
    EXPECT_EQ(project_halfspace(w, hs(vec({1, 0}), 1.0)), w);
}

TEST(ProjectHalfSpace, ProjectingXOntoHxyGivesY) {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const Vector x = rng.gaussian(4), y = rng.gaussian(4);
        EXPECT_LT((project_halfspace(x, halfspace_from_pair(x, y)) - y).norm(), 1e-12 * (1.0 + x.norm()));
    }
}

TEST(ProjectHalfSpace, ZeroNormalWithoutFlagThrows) {
    EXPECT_THROW(project_halfspace(vec({1, 1}), hs(vec({0, 0}), 1.0)), std::invalid_argument);
}

TEST(ProjectTwoHalfSpaces, FeasiblePointReturned) {
    const auto p = project_two_halfspaces(vec({-1, -2}), hs(vec({1, 0}), 0.0), hs(vec({0, 1}), 0.0));
    ASSERT_TRUE(p);
    EXPECT_EQ(*p, vec({-1, -2}));
}

TEST(ProjectTwoHalfSpaces, DegenerateFirstCutGivesY) {
    const Vector x = vec({2, -1, 4}), y = vec({0.5, 0.5, 1});
    const auto p = project_two_halfspaces(x, halfspace_from_pair(x, x), halfspace_from_pair(x, y));
    ASSERT_TRUE(p);
    EXPECT_LT((*p - y).norm(), 1e-14);
}

TEST(ProjectTwoHalfSpaces, QuadrantCornerAgreesWithOracles) {
    const HalfSpace h1 = hs(vec({1, 0}), 0.0), h2 = hs(vec({0, 1}), 0.0);
    const Vector x0 = vec({1, 1});
    const auto p = project_two_halfspaces(x0, h1, h2);
    ASSERT_TRUE(p);
    EXPECT_LT(p->norm(), 1e-14);
    const auto q = oracle::qp_enumerate(x0, {h1, h2});
    ASSERT_TRUE(q);
    EXPECT_LT((*p - *q).norm(), 1e-12);
    const Vector bf = verify::brute_force_projection(
        x0, [&](const Vector& z) { return h1.contains(z) && h2.contains(z); }, x0, 2.0);
    EXPECT_LT((bf - *p).norm(), 2.0 * 2.0 / 1000.0 * std::sqrt(2.0));
}

TEST(ProjectTwoHalfSpaces, RandomInstancesMatchEnumeration) {
    Rng rng(4);
    int feasible = 0;
    for (int i = 0; i < 500; ++i) {
        const Eigen::Index d = 2 + i % 4;
        const HalfSpace h1 = hs(rng.gaussian(d), rng.uniform(-2.0, 2.0));
        const HalfSpace h2 = hs(rng.gaussian(d), rng.uniform(-2.0, 2.0));
        const Vector x0 = rng.gaussian(d, 3.0);
        const auto p = project_two_halfspaces(x0, h1, h2);
        const auto q = oracle::qp_enumerate(x0, {h1, h2});
        ASSERT_EQ(p.has_value(), q.has_value());
        if (!p) continue;
        ++feasible;
        EXPECT_LT((*p - *q).norm(), 1e-9 * (1.0 + x0.norm())) << "instance " << i;
    }
    EXPECT_GT(feasible, 400);
}

TEST(ProjectTwoHalfSpaces, NearlyParallelNormalsStayFeasible) {
    // Normals 1e-9 rad apart: the Gram determinant is below rounding, the
    // separating component is not.
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const Vector a = rng.gaussian(5);
        const Vector e = rng.gaussian(5);
        const Vector b = a + 1e-9 * a.norm() * (e - e.dot(a) / a.squaredNorm() * a).normalized();
        const HalfSpace h1 = hs(a, 0.0), h2 = hs(b, 1e-10);
        const Vector x0 = rng.gaussian(5, 3.0);
        const auto p = project_two_halfspaces(x0, h1, h2);
        ASSERT_TRUE(p);
        EXPECT_LE(h1.distance(*p), 1e-9 * (1.0 + x0.norm()));
        EXPECT_LE(h2.distance(*p), 1e-9 * (1.0 + x0.norm()));
        // Optimality: no feasible point sampled nearby is closer.
        for (int k = 0; k < 20; ++k) {
            const Vector c = project_two_halfspaces(rng.gaussian(5, 3.0), h1, h2).value();
            EXPECT_LE((x0 - *p).dot(c - *p), 1e-7 * (1.0 + x0.squaredNorm() + c.squaredNorm()));
        }
    }
}

TEST(ProjectTwoHalfSpaces, ContradictorySlabIsInfeasible) {
    const auto p = project_two_halfspaces(vec({0, 0}), hs(vec({1, 0}), -1.0), hs(vec({-1, 0}), -1.0));
    EXPECT_FALSE(p);
}

TEST(ProjectTwoHalfSpaces, ParallelSameOrientationTakesTighter) {
    const auto p = project_two_halfspaces(vec({5, 2}), hs(vec({1, 0}), 3.0), hs(vec({2, 0}), 2.0));
    ASSERT_TRUE(p);
    EXPECT_LT((*p - vec({1, 2})).norm(), 1e-14);
}

TEST(ProjectPolyhedron, NoCutsIsBaseProjection) {
    const Vector x0 = vec({3, -1});
    EXPECT_EQ(project_polyhedron(x0, PolyhedralAccumulator(ConvexSet::whole(2))).value(), x0);
    const auto ball = ConvexSet::ball(Vector::Zero(2), 1.0);
    EXPECT_LT((project_polyhedron(x0, PolyhedralAccumulator(ball)).value() - x0 / x0.norm()).norm(), 1e-14);
}

TEST(ProjectPolyhedron, TwoBoxCutsFromThreeThree) {
    PolyhedralAccumulator acc(ConvexSet::whole(2));
    acc.append(hs(vec({1, 0}), 1.0));
    acc.append(hs(vec({0, 1}), 1.0));
    const Vector x0 = vec({3, 3});
    const auto p = project_polyhedron(x0, acc);
    const auto dk = project_polyhedron_dykstra(x0, acc);
    const auto q = oracle::qp_enumerate(x0, acc.cuts());
    ASSERT_TRUE(p && dk && q);
    EXPECT_LT((*p - vec({1, 1})).norm(), 1e-12);
    EXPECT_LT((*dk - *q).norm(), 1e-10);
}

TEST(ProjectPolyhedron, ContradictoryParallelCutsAreInfeasible) {
    PolyhedralAccumulator acc(ConvexSet::whole(2));
    acc.append(hs(vec({1, 0}), -1.0));
    acc.append(hs(vec({-1, 0}), -1.0));
    EXPECT_FALSE(project_polyhedron(vec({0, 0}), acc));
    EXPECT_FALSE(project_polyhedron_dykstra(vec({0, 0}), acc));
    EXPECT_TRUE(has_contradictory_parallel_cuts(acc.cuts(), 1e-12));
}

TEST(ProjectPolyhedron, ManyCutsMatchEnumeration) {
    Rng rng(6);
    int feasible = 0;
    for (int i = 0; i < 200; ++i) {
        const Eigen::Index d = 2 + i % 3;
        PolyhedralAccumulator acc(ConvexSet::whole(d));
        const int m = 3 + i % 4;
        for (int k = 0; k < m; ++k) acc.append(hs(rng.gaussian(d), rng.uniform(-1.0, 2.0)));
        const Vector x0 = rng.gaussian(d, 3.0);
        const auto p = project_polyhedron(x0, acc);
        const auto q = oracle::qp_enumerate(x0, acc.cuts());
        ASSERT_EQ(p.has_value(), q.has_value()) << "instance " << i;
        if (!p) continue;
        ++feasible;
        EXPECT_LT((*p - *q).norm(), 1e-8 * (1.0 + x0.norm())) << "instance " << i;
    }
    EXPECT_GT(feasible, 100);
}

TEST(ProjectPolyhedron, BoxAndAffineBasesMatchEnumeration) {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const Eigen::Index d = 3;
        const Vector lo = -Vector::Ones(d) - rng.gaussian(d).cwiseAbs();
        const Vector hi = Vector::Ones(d) + rng.gaussian(d).cwiseAbs();
        PolyhedralAccumulator acc(ConvexSet::box(lo, hi));
        acc.append(hs(rng.gaussian(d), rng.uniform(0.0, 1.0)));
        acc.append(hs(rng.gaussian(d), rng.uniform(0.0, 1.0)));
        const Vector x0 = rng.gaussian(d, 3.0);
        std::vector<HalfSpace> all = acc.cuts();
        for (Eigen::Index k = 0; k < d; ++k) {
            all.push_back(hs(Vector::Unit(d, k), hi[k]));
            all.push_back(hs(-Vector::Unit(d, k), -lo[k]));
        }
        const auto q = oracle::qp_enumerate(x0, all);
        const auto p = project_polyhedron(x0, acc);
        ASSERT_TRUE(p && q);
        EXPECT_LT((*p - *q).norm(), 1e-8 * (1.0 + x0.norm()));
    }
}

TEST(ProjectPolyhedron, BallBaseUsesDykstraAndIsOptimal) {
    Rng rng(8);
    for (int i = 0; i < 40; ++i) {
        const auto ball = ConvexSet::ball(Vector::Zero(2), 1.5);
        PolyhedralAccumulator acc(ball);
        const HalfSpace cut = hs(rng.gaussian(2), rng.uniform(0.0, 1.0));
        acc.append(cut);
        const Vector x0 = rng.gaussian(2, 3.0);
        const auto p = project_polyhedron(x0, acc);
        ASSERT_TRUE(p);
        // The minimizer is x0, the radial point, the foot on the line, or one
        // of the two circle/line intersections.
        const Vector n = cut.normal / cut.normal.norm();
        const double off = cut.offset / cut.normal.norm();
        std::vector<Vector> cand{x0, 1.5 * x0 / x0.norm(), x0 - (n.dot(x0) - off) * n};
        const Vector tangent = vec({-n[1], n[0]});
        if (off * off <= 1.5 * 1.5) {
            const double s = std::sqrt(1.5 * 1.5 - off * off);
            cand.push_back(off * n + s * tangent);
            cand.push_back(off * n - s * tangent);
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& z : cand) {
            if (z.norm() <= 1.5 + 1e-12 && cut.distance(z) <= 1e-12) best = std::min(best, (z - x0).norm());
        }
        EXPECT_NEAR((*p - x0).norm(), best, 1e-8) << "instance " << i;
        EXPECT_TRUE(acc.contains(*p, 1e-8));
    }
}

TEST(ProjectPolyhedron, TwoHalfSpacesAgreeWithDykstra) {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Index d = 2 + i % 3;
        const Vector n1 = rng.gaussian(d), n2 = rng.gaussian(d);
        if (std::abs(n1.dot(n2)) > 0.99 * n1.norm() * n2.norm()) continue;
        PolyhedralAccumulator acc(ConvexSet::whole(d));
        acc.append(hs(n1, rng.uniform(-1.0, 1.0)));
        acc.append(hs(n2, rng.uniform(-1.0, 1.0)));
        const Vector x0 = rng.gaussian(d, 3.0);
        const auto exact = project_two_halfspaces(x0, acc.cuts()[0], acc.cuts()[1]);
        const auto dk = project_polyhedron_dykstra(x0, acc);
        ASSERT_TRUE(exact && dk);
        EXPECT_LT((*exact - *dk).norm(), 1e-8 * (1.0 + x0.norm()));
    }
}

TEST(ProjectPolyhedron, DistanceNondecreasingAsCutsAccumulate) {
    Rng rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index d = 3;
        const Vector x0 = rng.gaussian(d, 3.0);
        PolyhedralAccumulator acc(ConvexSet::whole(d));
        double prev = 0.0;
        for (int k = 0; k < 8; ++k) {
            // Cuts keep the origin feasible.
            acc.append(hs(rng.gaussian(d), rng.uniform(0.1, 1.0)));
            const auto p = project_polyhedron(x0, acc);
            ASSERT_TRUE(p);
            const double dist = (*p - x0).norm();
            EXPECT_GE(dist, prev - 1e-10);
            prev = dist;
        }
    }
}

TEST(PolyhedralAccumulator, WitnessAndSkippedWholeSpaceCuts) {
    PolyhedralAccumulator acc(ConvexSet::whole(2));
    EXPECT_FALSE(acc.append(HalfSpace::whole(2)));
    EXPECT_TRUE(acc.cuts().empty());
    EXPECT_TRUE(acc.append(hs(vec({1, 0}), 1.0)));
    EXPECT_TRUE(acc.set_witness(vec({0, 0})));
    EXPECT_FALSE(acc.set_witness(vec({2, 0})));
    acc.append(hs(vec({-1, 0}), -0.5));
    EXPECT_FALSE(acc.feasible_witness());
    EXPECT_THROW(acc.append(hs(vec({1, 0, 0}), 0.0)), std::invalid_argument);
}

TEST(ProjectConvex, BallRadialScalingMatchesCircleGrid) {
    const auto ball = ConvexSet::ball(Vector::Zero(2), 1.0);
    const Vector p = project_convex(vec({3, 4}), ball);
    EXPECT_LT((p - vec({0.6, 0.8})).norm(), 1e-15);
    const Vector g = oracle::circle_grid_min(vec({3, 4}), Vector::Zero(2), 1.0, 200000);
    EXPECT_LT((p - g).norm(), 1e-4);
}

TEST(ProjectConvex, XAxisOrthogonalDecomposition) {
    const Matrix basis = vec({1, 0});
    const auto axis = ConvexSet::affine(Vector::Zero(2), basis);
    const Vector w = vec({2, 5});
    const Vector p = project_convex(w, axis);
    const Vector expected = oracle::span_projector(basis) * w;
    EXPECT_LT((p - vec({2, 0})).norm(), 1e-15);
    EXPECT_LT((p - expected).norm(), 1e-14);
    EXPECT_NEAR((w - p).dot(basis.col(0)), 0.0, 1e-14);
}

TEST(ProjectConvex, BoxClampsCoordinates) {
    const auto box = ConvexSet::box(vec({0, 0, 0}), vec({1, 2, 3}));
    EXPECT_LT((project_convex(vec({-1, 5, 1.5}), box) - vec({0, 2, 1.5})).norm(), 1e-15);
}

TEST(ProjectConvex, MembersAreFixed) {
    Rng rng(11);
    for (const auto& c : sample_sets(rng, 3)) {
        for (int i = 0; i < 20; ++i) {
            const Vector m = sample_member(c, rng);
            EXPECT_LT((project_convex(m, c) - m).norm(), 1e-9) << c.name();
        }
    }
}

TEST(ProjectConvex, CharacterizationIdempotenceFirmness) {
    Rng rng(12);
    for (Eigen::Index d = 2; d <= 4; ++d) {
        for (const auto& c : sample_sets(rng, d)) {
            for (int i = 0; i < 100; ++i) {
                const Vector w = rng.gaussian(d, 3.0);
                const Vector p = project_convex(w, c);
                EXPECT_LT((project_convex(p, c) - p).norm(), 1e-12 * (1.0 + p.norm())) << c.name();
                for (int k = 0; k < 5; ++k) {
                    const Vector m = sample_member(c, rng);
                    EXPECT_LE((w - p).dot(m - p), 1e-9 * (1.0 + w.squaredNorm() + m.squaredNorm())) << c.name();
                }
                const Vector u = rng.gaussian(d, 3.0);
                const Vector pu = project_convex(u, c);
                EXPECT_LE((p - pu).squaredNorm(), (w - u).dot(p - pu) + 1e-9) << c.name();
            }
        }
    }
}

TEST(ProjectConvex, InvalidParametersThrow) {
    EXPECT_THROW(ConvexSet::ball(vec({0, 0}), -1.0), std::invalid_argument);
    EXPECT_THROW(ConvexSet::box(vec({1, 0}), vec({0, 1})), std::invalid_argument);
    Matrix skew(2, 1);
    skew << 1.0, 1.0;
    EXPECT_THROW(ConvexSet::affine(vec({0, 0}), skew), std::invalid_argument);
}

TEST(Dykstra, BallAndHalfPlaneIntersection) {
    const Vector c = vec({0, 0});
    const HalfSpace h = hs(vec({1, 1}), 0.5);
    const Vector x0 = vec({2, 1.5});
    const DykstraResult r = dykstra(
        x0, {[&](const Vector& v) { return project_convex(v, ConvexSet::ball(c, 1.0)); },
             [&](const Vector& v) { return project_halfspace(v, h); }},
        1e-13, 100000);
    ASSERT_TRUE(r.converged);
    const Vector bf = verify::brute_force_projection(
        x0, [&](const Vector& z) { return z.norm() <= 1.0 && h.contains(z); }, c, 3.0);
    EXPECT_LE(std::abs((bf - x0).norm() - (r.x - x0).norm()), 2.0 * 3.0 / 1000.0);
    EXPECT_LE(r.max_distance, 1e-10);
}
