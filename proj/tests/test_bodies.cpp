#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "sepopt/bodies.hpp"
#include "test_support.hpp"

using namespace sepopt;
using sepopt::testing::quad_body;
using sepopt::testing::quad_point;
using sepopt::testing::vec;

namespace {

std::vector<Vector> vertices_of(const BodySpec& b) { return std::get<VertexPolytope>(b.shape).vertices; }

Vector random_convex_combination(Rng& rng, const std::vector<Vector>& vertices) {
    Vector x = Vector::Zero(vertices.front().size());
    double total = 0.0;
    for (const auto& v : vertices) {
        const double w = -std::log(1.0 - rng.uniform());
        x += w * v;
        total += w;
    }
    return x / total;
}

}  // namespace

TEST(Support, BallScalesUnitDirection) {
    const auto s = support(sepopt::testing::unit_ball(2), vec({3, 4}));
    EXPECT_NEAR(s.maximizer[0], 0.6, 1e-15);
    EXPECT_NEAR(s.maximizer[1], 0.8, 1e-15);
    EXPECT_NEAR(s.value, 5.0, 1e-15);
}

TEST(Support, QuadPolytope) {
    const auto s = support(quad_body(), quad_point());
    EXPECT_EQ(s.maximizer, vec({-1, 0}));
    EXPECT_DOUBLE_EQ(s.value, 7.0 / 8.0);
}

TEST(Support, TiesGoToLowestIndex) {
    const auto s = support(quad_body(), vec({0, 1}));
    EXPECT_EQ(s.maximizer, vec({0, 1}));
    EXPECT_DOUBLE_EQ(s.value, 1.0);
}

TEST(Support, RejectsZeroAndWrongDimension) {
    try {
        support(quad_body(), vec({0, 0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroDirection);
    }
    try {
        support(quad_body(), vec({1, 0, 0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(Support, AffineImageComposesOracles) {
    // Ellipse {A y + t : ||y|| <= 1}: support(c) = ||A^T c|| + c^T t.
    auto base = std::make_shared<BodySpec>(sepopt::testing::unit_ball(2));
    Matrix a(2, 2);
    a << 2, 1, 0, 1;
    const Vector t = vec({0.1, -0.2});
    BodySpec ellipse{2, AffineImage{base, a, t}, 3.0, 0.5};
    validate(ellipse);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const Vector c = rng.normal_vector(2);
        const auto s = support(ellipse, c);
        EXPECT_NEAR(s.value, (a.transpose() * c).norm() + c.dot(t), 1e-12);
        EXPECT_NEAR(c.dot(s.maximizer), s.value, 1e-12);
        // maximizer lies on the ellipse boundary
        EXPECT_NEAR((a.inverse() * (s.maximizer - t)).norm(), 1.0, 1e-12);
    }
}

TEST(Validate, CatchesMalformedBodies) {
    auto b = quad_body();
    EXPECT_NO_THROW(validate(b));
    b.inner_radius = 10.0;
    EXPECT_THROW(validate(b), Error);
    b = quad_body();
    b.outer_radius = 1.0;  // vertex (1,-2) is outside
    EXPECT_THROW(validate(b), Error);
    b = quad_body();
    std::get<VertexPolytope>(b.shape).vertices.push_back(vec({1, 2, 3}));
    EXPECT_THROW(validate(b), Error);
    b.shape = VertexPolytope{};
    EXPECT_THROW(validate(b), Error);
}

TEST(Distance, InteriorPointIsZero) {
    const auto r = distance_to_body(quad_body(), vec({-0.5, 0.5}));
    EXPECT_EQ(r.distance, 0.0);
}

TEST(Distance, BallRadialProjection) {
    const auto r = distance_to_body(sepopt::testing::unit_ball(2), vec({2, 0}), 1e-10);
    EXPECT_NEAR(r.distance, 1.0, 1e-10);
    EXPECT_NEAR(r.witness[0], 1.0, 1e-5);
    EXPECT_NEAR(r.witness[1], 0.0, 1e-5);
}

TEST(Distance, QuadPointMatchesEdgeDistance) {
    // nearest edge is (-1,0)-(1,-2), i.e. x + y = -1: distance 0.625 / sqrt(2)
    const auto r = distance_to_body(quad_body(), quad_point(), 1e-12);
    const double expected = sepopt::testing::segment_distance(vec({-1, 0}), vec({1, -2}), quad_point());
    EXPECT_NEAR(expected, 0.625 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(r.distance, expected, 1e-12);
    EXPECT_NEAR((r.witness - quad_point()).norm(), r.distance, 1e-12);
}

TEST(Distance, AgreesWithProjectedGradientReference) {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 4;
        const auto inst = random_instance(n, n + 3, 100 + trial, {QuerySide::Outside, 0.05 + 0.01 * trial});
        const double tolerance = 1e-9;
        const auto r = distance_to_body(inst.body, inst.query, tolerance);
        const double ref = sepopt::testing::reference_distance(vertices_of(inst.body), inst.query, 20000);
        EXPECT_NEAR(r.distance, ref, 1e-6) << "trial " << trial;
    }
}

TEST(Distance, ConvexCombinationsAreInside) {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 5;
        const auto inst = random_instance(n, n + 4, 300 + trial, {QuerySide::Outside, 0.1});
        const Vector x = random_convex_combination(rng, vertices_of(inst.body));
        EXPECT_EQ(distance_to_body(inst.body, x, 1e-10).distance, 0.0);
    }
}

TEST(Distance, TriangleConsistency) {
    Rng rng(9);
    const double tolerance = 1e-9;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 4;
        const auto inst = random_instance(n, 2 * n + 1, 500 + trial, {QuerySide::Outside, 0.1});
        const Vector p = rng.normal_vector(n) * 1.5;
        const Vector q = p + rng.normal_vector(n) * 0.3;
        const double dp = distance_to_body(inst.body, p, tolerance).distance;
        const double dq = distance_to_body(inst.body, q, tolerance).distance;
        EXPECT_LE(std::abs(dp - dq), (p - q).norm() + 2 * tolerance);
    }
}

TEST(Polar, QuadMembership) {
    const auto b = quad_body();
    EXPECT_EQ(polar_membership(b, vec({3, 1})).answer, PolarAnswer::Inside);
    const auto out = polar_membership(b, vec({0, 2}));
    ASSERT_EQ(out.answer, PolarAnswer::Outside);
    EXPECT_EQ(*out.separator, vec({0, 1}));
    EXPECT_GT(out.separator->dot(vec({0, 2})), 1.0);
    EXPECT_EQ(polar_membership(b, vec({0, 0})).answer, PolarAnswer::Inside);
}

TEST(Polar, QuadDualityPair) {
    const auto k = quad_body();
    for (const auto& y : sepopt::testing::quad_polar_vertices()) EXPECT_NEAR(support(k, y).value, 1.0, 1e-12);

    BodySpec polar{2, VertexPolytope{sepopt::testing::quad_polar_vertices()}, std::sqrt(10.0), 0.1};
    for (const auto& x : vertices_of(k)) EXPECT_NEAR(support(polar, x).value, 1.0, 1e-12);
}

TEST(Facets, QuadInnerRadius) {
    const auto facets = polytope_facets(vertices_of(quad_body()));
    ASSERT_TRUE(facets.has_value());
    EXPECT_EQ(facets->size(), 4u);
    double inner = 1e9;
    for (const auto& f : *facets) inner = std::min(inner, f.offset);
    EXPECT_NEAR(inner, 1.0 / std::sqrt(10.0), 1e-12);
    EXPECT_NEAR(*inner_margin(quad_body(), vec({-0.5, 0.5})), 0.5, 1e-12);
}

TEST(RandomInstance, OutsideMarginHonored) {
    const auto inst = random_instance(2, 4, 7, {QuerySide::Outside, 0.2});
    validate(inst.body);
    const double ref = sepopt::testing::reference_distance(vertices_of(inst.body), inst.query);
    EXPECT_GE(ref, 0.2 - 1e-9);
}

TEST(RandomInstance, InsideBallHonored) {
    const auto inst = random_instance(3, 8, 1, {QuerySide::Inside, 0.1});
    validate(inst.body);
    Rng rng(77);
    for (int i = 0; i < 2000; ++i) {
        const Vector u = rng.unit_vector(3);
        EXPECT_GE(support(inst.body, u).value - u.dot(inst.query), 0.1 - 1e-12);
    }
}

TEST(RandomInstance, DeterministicInSeed) {
    const auto a = random_instance(4, 9, 42, {QuerySide::Outside, 0.1});
    const auto b = random_instance(4, 9, 42, {QuerySide::Outside, 0.1});
    EXPECT_EQ(a.query, b.query);
    EXPECT_EQ(vertices_of(a.body), vertices_of(b.body));
    EXPECT_EQ(a.body.inner_radius, b.body.inner_radius);
    const auto c = random_instance(4, 9, 43, {QuerySide::Outside, 0.1});
    EXPECT_NE(a.query, c.query);
}

TEST(RandomInstance, RejectsBadShapes) {
    EXPECT_THROW(random_instance(1, 4, 0, {}), Error);
    EXPECT_THROW(random_instance(3, 3, 0, {}), Error);
}

// Property: support values are the vertex maximum and dominate every convex
// combination; the stored inner ball is respected.
TEST(SupportProperties, RandomBodies) {
    Rng rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + trial % 5;
        const auto inst = random_instance(n, n + 1 + trial % 6, static_cast<std::uint64_t>(trial), {QuerySide::Outside, 0.1});
        const auto& vs = vertices_of(inst.body);
        const Vector c = rng.normal_vector(n);
        const auto s = support(inst.body, c);
        double best = -1e300;
        for (const auto& v : vs) best = std::max(best, c.dot(v));
        EXPECT_EQ(s.value, best);
        EXPECT_EQ(c.dot(s.maximizer), s.value);

        const Vector x = random_convex_combination(rng, vs);
        EXPECT_LE(c.dot(x), s.value + 1e-12);

        const Vector u = rng.unit_vector(n);
        EXPECT_GE(support(inst.body, u).value, inst.body.inner_radius - 1e-9);
    }
}
