#include <wsemb/admissibility.hpp>
#include <wsemb/expression.hpp>
#include <wsemb/profile.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace wsemb;

TEST(Expression, ArithmeticAndFunctions) {
    Expression e("2 + 3*x^2 - |y|", {"x", "y"});
    EXPECT_DOUBLE_EQ(e({2.0, -1.5}), 12.5);
    Expression f("pow(x, 0.5) * exp(0) + log(e) + sin(pi/2)", {"x"});
    EXPECT_NEAR(f({4.0}), 4.0, 1e-15);
    EXPECT_THROW(Expression("x +", {"x"}), ExpressionError);
    EXPECT_THROW(Expression("q", {"x"}), ExpressionError);
}

TEST(Expression, PowerIsRightAssociative) {
    Expression e("2^3^2", {});
    EXPECT_DOUBLE_EQ(e({}), 512.0);
    Expression u("-x^2", {"x"});
    EXPECT_DOUBLE_EQ(u({3.0}), -9.0);
}

TEST(Extended, MarkerIsDistinct) {
    Extended inf = Extended::infinity();
    EXPECT_TRUE(inf.is_infinite());
    EXPECT_THROW(inf.value(), std::logic_error);
    EXPECT_EQ(inf.str(), "inf");
    EXPECT_FALSE(Extended(1e308) == inf);
}

TEST(Rules, DivergenceAndLimit) {
    EXPECT_TRUE(divergence_rule({1, 1, 1, 1}));
    EXPECT_FALSE(divergence_rule({1, 0.5, 0.25, 0.125}));
    EXPECT_FALSE(divergence_rule({1, 1, 1}));
    EXPECT_TRUE(divergence_rule({1, 2, 4, 8}));
    EXPECT_TRUE(divergence_rule({1, 2, 8, 64}));
    EXPECT_FALSE(divergence_rule({1e-9, 1e-3, 0.1, 0.3}));
    EXPECT_TRUE(tends_to_zero({1, 0.1, 0.01, 0.001, 1e-4}));
    EXPECT_FALSE(tends_to_zero({1, 0.9, 0.8, 0.7}));
}

TEST(Profile, ClosedFormsAndInverse) {
    auto f = Profile::power(2.0, 3.0);
    EXPECT_DOUBLE_EQ(f(2.0), 16.0);
    EXPECT_NEAR(f.derivative(2.0), 24.0, 1e-12);
    EXPECT_NEAR(f.inverse(16.0, 0.0, 10.0), 2.0, 1e-12);
    auto g = Profile::log_power(1.0, 0.5);
    EXPECT_NEAR(g(std::exp(-4.0)), 2.0, 1e-14);
    auto h = Profile::expression("r*(2 + sin(1/r))");
    EXPECT_NEAR(h(0.5), 0.5 * (2 + std::sin(2.0)), 1e-15);
}

TEST(Domain, MembershipAndDistance) {
    auto I = Domain::interval(0, 1);
    EXPECT_TRUE(I.contains(Point{0.5}));
    EXPECT_FALSE(I.contains(Point{1.0}));
    EXPECT_NEAR(I.boundary_distance(Point{0.9}), 0.1, 1e-15);
    EXPECT_NEAR(I.boundary_distance(Point{0.9}, Faces::Lower), 0.9, 1e-15);
    auto B = Domain::ball(Point{0, 0}, 2);
    EXPECT_NEAR(B.boundary_distance(Point{1, 0}), 1.0, 1e-15);
    EXPECT_THROW(Domain::interval(1, 0), DomainError);
    EXPECT_THROW(Domain::ball(Point{0, 0}, 0), DomainError);
    EXPECT_THROW(Domain::full_space(2, -1), DomainError);
    EXPECT_TRUE(Domain::full_space(3).is_full_space());
}

TEST(Domain, SmoothDistanceIsValidated) {
    Box bounds{Point{-2, -2}, Point{2, 2}};
    EXPECT_NO_THROW(Domain(BoundedSmooth{2, Expression("1 - sqrt(x^2+y^2)", {"x", "y", "z"}), 0.5, bounds}));
    // twice the true distance overshoots the complement
    EXPECT_THROW(Domain(BoundedSmooth{2, Expression("2*(1 - sqrt(x^2+y^2))", {"x", "y", "z"}), 0.5, bounds}),
                 DomainError);
}

TEST(EvaluateWeight, Examples) {
    auto I = Domain::interval(0, 1);
    EXPECT_EQ(evaluate_weight(Weight::constant(1), I, Point{0.3}).value(), 1.0);
    auto w = Weight::boundary_profile(Profile::power(1, 2));
    EXPECT_NEAR(evaluate_weight(w, I, Point{0.9}).value(), 0.01, 1e-15);
    auto e = Weight::expression("(log(1/x))^0.5");
    EXPECT_NEAR(evaluate_weight(e, I, Point{std::exp(-1.0)}).value(), 1.0, 1e-15);
    EXPECT_THROW(evaluate_weight(w, I, Point{1.5}), DomainError);
}

TEST(EvaluateWeight, DeclaredSetsOverride) {
    auto I = Domain::interval(-1, 1);
    auto w = Weight::expression("|x|^(-1)").with_infinity_set({Point{0.0}});
    EXPECT_TRUE(evaluate_weight(w, I, Point{0.0}).is_infinite());
    auto z = Weight::expression("x^2").with_zero_set({Point{0.0}});
    EXPECT_EQ(evaluate_weight(z, I, Point{0.0}).value(), 0.0);
}

TEST(EvaluateWeight, PositiveFiniteOffDeclaredSets) {
    auto I = Domain::interval(0, 1);
    const Weight ws[] = {Weight::boundary_profile(Profile::power(1, -0.5)), Weight::expression("x^3 + 1"),
                         Weight::radial(Profile::gaussian(1, 1))};
    for (const auto& w : ws)
        for (int k = 1; k < 200; ++k) {
            const double v = evaluate_weight(w, I, Point{k / 200.0}).value();
            EXPECT_GT(v, 0.0);
            EXPECT_TRUE(std::isfinite(v));
        }
}

TEST(Admissibility, Examples) {
    auto I = Domain::interval(0, 1);
    for (double a : {-3.0, -0.5, 0.5, 2.0, 7.0}) {
        auto r = admissibility_check(Weight::boundary_profile(Profile::power(1, a), Faces::Lower), I, 2.0);
        EXPECT_TRUE(r.holds) << a;
        EXPECT_EQ(r.condition, AdmissibilityCondition::L1loc);
    }
    auto bad = admissibility_check(Weight::expression("|x - 0.5|^2"), I, 2.0);
    EXPECT_FALSE(bad.holds);
    EXPECT_NEAR(bad.witness.center[0], 0.5, 1e-9);
    EXPECT_TRUE(bad.witness.estimate.is_infinite());
    auto one = admissibility_check(Weight::expression("x"), I, 1.0);
    EXPECT_TRUE(one.holds);
    EXPECT_EQ(one.condition, AdmissibilityCondition::EssSup);
}

TEST(Admissibility, RapidDecayDoesNotOverflow) {
    // 1/w = e^{|x|^2} overflows a double far out, yet it is continuous
    const Weight g = Weight::radial(Profile::gaussian(1, 1));
    for (int n : {1, 2})
        for (double p : {1.0, 2.0, 3.0}) {
            const auto r = admissibility_check(g, Domain::full_space(n), p);
            EXPECT_TRUE(r.holds) << n << " " << p;
            EXPECT_GT(r.balls_checked, 0);
        }
    const auto e = admissibility_check(Weight::expression("exp(-x^2) * |x - 3|^2"), Domain::real_line(), 2.0);
    EXPECT_FALSE(e.holds);
    EXPECT_LE(std::fabs(e.witness.center[0] - 3.0), e.witness.radius);
}

TEST(Admissibility, OffGridMinimumIsFound) {
    // minimum at an irrational point, not on the sampling grid
    const double c = 1.0 / std::sqrt(2.0);
    auto w = Weight::expression("|x - 0.70710678118654752|^1.5");
    EXPECT_FALSE(admissibility_check(w, Domain::interval(0, 1), 2.0).holds);
    EXPECT_FALSE(admissibility_check(w, Domain::interval(0, 1), 1.0).holds);
    // |x-c|^0.5 to the power -1 is integrable
    EXPECT_TRUE(admissibility_check(Weight::expression("|x - 0.70710678118654752|^0.5"), Domain::interval(0, 1), 2.0)
                    .holds);
    (void)c;
}

TEST(Admissibility, TwoDimensionalPointZero) {
    auto D = Domain::ball(Point{0, 0}, 1);
    // |x|^{-2} is not integrable in the plane, |x|^{-1} is
    EXPECT_FALSE(admissibility_check(Weight::expression("norm^2"), D, 2.0).holds);
    EXPECT_TRUE(admissibility_check(Weight::expression("norm"), D, 2.0).holds);
}

TEST(CompactBounds, Examples) {
    auto I = Domain::interval(0, 1);
    auto b = assert_compact_bounds(Weight::constant(1), I, Box{Point{0.25}, Point{0.75}});
    EXPECT_EQ(b.m, 1.0);
    EXPECT_EQ(b.M, 1.0);
    auto sq = Weight::expression("x^2");
    auto c = assert_compact_bounds(sq, I, Box{Point{0.5}, Point{0.9}});
    EXPECT_NEAR(c.m, 0.25, 1e-15);
    EXPECT_NEAR(c.M, 0.81, 1e-15);
    try {
        assert_compact_bounds(sq, I, Box{Point{0.0}, Point{0.5}});
        FAIL() << "expected AssumptionViolation";
    } catch (const AssumptionViolation& e) {
        EXPECT_EQ(e.point[0], 0.0);
    }
}

TEST(Equivalence, AlphaBetaOrderAndSampling) {
    auto ref = Weight::expression("x");
    EXPECT_THROW(Weight::equivalent_to(ref, ref, 2.0, 1.0), DomainError);
    auto ok = Weight::equivalent_to(Weight::expression("x*(1.5 + 0.5*sin(10*x))"), ref, 1.0, 2.0);
    EXPECT_TRUE(check_equivalence_samples(ok, Domain::interval(0, 1)).empty());
    auto bad = Weight::equivalent_to(Weight::expression("x*(1.5 + 0.5*sin(10*x))"), ref, 1.2, 2.0);
    EXPECT_FALSE(check_equivalence_samples(bad, Domain::interval(0, 1)).empty());
}
