#include <wsemb/measure.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace wsemb;

namespace {
const double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST(WeightedMeasure, UnitSquare) {
    auto m = weighted_measure(Weight::constant(1), Domain::box(Point{0, 0}, Point{1, 1}), WholeDomain{});
    EXPECT_NEAR(m.value.value(), 1.0, 1e-10);
    EXPECT_TRUE(m.converged);
}

TEST(WeightedMeasure, IntegrableBoundarySingularity) {
    auto w = Weight::expression("x^(-0.5)");
    auto m = weighted_measure(w, Domain::interval(0, 1), WholeDomain{});
    ASSERT_TRUE(m.value.is_finite());
    EXPECT_NEAR(m.value.value(), 2.0, 1e-8);
    EXPECT_LE(m.error_bound, 1e-8);
}

TEST(WeightedMeasure, CertifiedDivergence) {
    auto m = weighted_measure(Weight::expression("1/x"), Domain::interval(0, 1), WholeDomain{});
    EXPECT_TRUE(m.value.is_infinite());
    EXPECT_TRUE(m.divergent());
    // barely divergent and barely convergent neighbours
    EXPECT_TRUE(weighted_measure(Weight::expression("x^(-1.05)"), Domain::interval(0, 1), WholeDomain{})
                    .value.is_infinite());
    auto c = weighted_measure(Weight::expression("x^(-0.9)"), Domain::interval(0, 1), WholeDomain{},
                              QuadratureOptions{1e-8, 1e-8});
    ASSERT_TRUE(c.value.is_finite());
    EXPECT_NEAR(c.value.value(), 10.0, 1e-6);
}

TEST(WeightedMeasure, InteriorSingularityViaDeclaredSet) {
    auto w = Weight::expression("|x - 0.3|^(-0.5)").with_infinity_set({Point{0.3}});
    auto m = weighted_measure(w, Domain::interval(0, 1), WholeDomain{});
    const double exact = 2.0 * std::sqrt(0.3) + 2.0 * std::sqrt(0.7);
    EXPECT_NEAR(m.value.value(), exact, 1e-8);
}

TEST(TailMeasure, GaussianOracle) {
    auto w = Weight::radial(Profile::gaussian(1, 1));
    auto R = Domain::real_line();
    EXPECT_NEAR(tail_measure(w, R, 0.0).value.value(), std::sqrt(kPi), 1e-9);
    for (double r : {0.5, 1.0, 2.0, 4.0}) {
        auto t = tail_measure(w, R, r);
        EXPECT_NEAR(t.value.value(), std::sqrt(kPi) * std::erfc(r), 1e-9) << r;
    }
}

TEST(TailMeasure, LebesgueTailIsInfinite) {
    for (int n = 1; n <= 3; ++n)
        EXPECT_TRUE(tail_measure(Weight::constant(1), Domain::full_space(n), 1.0).value.is_infinite()) << n;
}

TEST(TailMeasure, ExponentialGrowthDiverges) {
    auto w = Weight::radial(Profile::exponential(1, 0.5));
    EXPECT_TRUE(tail_measure(w, Domain::real_line(), 1.0).value.is_infinite());
}

TEST(TailMeasure, SlowDecayConverges) {
    // ∫_1^∞ x^{-2} dx on both sides = 2, beyond the default truncation radius
    auto w = Weight::radial(Profile::power(1, -2));
    auto t = tail_measure(w, Domain::real_line(), 1.0);
    ASSERT_TRUE(t.value.is_finite());
    EXPECT_NEAR(t.value.value(), 2.0, 1e-8);
}

TEST(ShellMeasure, LengthCount) {
    auto s = shell_measure(Weight::constant(1), Domain::real_line(), 2.0, 1.0);
    EXPECT_NEAR(s.value.value(), 2.0, 1e-12);
}

TEST(ShellMeasure, RadialInThreeDimensions) {
    // ∫_{1<|x|<2} e^{-|x|} dx = 4π ∫_1^2 s^2 e^{-s} ds
    auto w = Weight::radial(Profile::exponential(1, -1));
    const double F1 = -std::exp(-1.0) * (1 + 2 + 2), F2 = -std::exp(-2.0) * (4 + 4 + 2);
    auto s = shell_measure(w, Domain::full_space(3), 2.0, 1.0);
    EXPECT_NEAR(s.value.value(), 4 * kPi * (F2 - F1), 1e-9);
}

TEST(SurfaceArea, Examples) {
    auto a = weighted_surface_area(Weight::constant(1), Domain::full_space(2), 1.0);
    EXPECT_NEAR(a.value, 2 * kPi, 1e-12);
    EXPECT_EQ(a.method, SurfaceMethod::RadialClosedForm);
    auto b = weighted_surface_area(Weight::radial(Profile::exponential(1, -1)), Domain::real_line(), 3.0);
    EXPECT_NEAR(b.value, 2 * std::exp(-3.0), 1e-15);
    EXPECT_EQ(b.method, SurfaceMethod::BoundarySum1d);
    auto c = weighted_surface_area(Weight::radial(Profile::exponential(1, -1)), Domain::full_space(3), 2.0);
    EXPECT_NEAR(c.value, 4 * kPi * 4 * std::exp(-2.0), 1e-12);
}

TEST(SurfaceArea, OutsideDomainFlag) {
    auto a = weighted_surface_area(Weight::constant(1), Domain::interval(0, 1), 3.0);
    EXPECT_EQ(a.value, 0.0);
    EXPECT_TRUE(a.outside_domain);
}

TEST(SurfaceArea, LatticeShellAgreesWithClosedForm) {
    auto w = Weight::radial(Profile::gaussian(1, 1));
    for (int n : {2, 3}) {
        auto closed = weighted_surface_area(w, Domain::full_space(n), 1.3);
        auto quad = weighted_surface_area(w, Domain::full_space(n), 1.3, {}, true);
        EXPECT_EQ(quad.method, SurfaceMethod::LatticeShellNd);
        EXPECT_NEAR(quad.value, closed.value, 5e-9) << n;
    }
}

TEST(SobolevNorms, Examples) {
    auto I = Domain::interval(0, 1);
    auto one = sobolev_norms(TestFunction::from_expression("1"), Weight::constant(1), I, 2.0);
    EXPECT_NEAR(one.lp_norm.value(), 1.0, 1e-10);
    EXPECT_NEAR(one.seminorm.value(), 0.0, 1e-10);
    auto x1 = sobolev_norms(TestFunction::from_expression("x"), Weight::constant(1), I, 2.0);
    EXPECT_NEAR(x1.lp_norm.value(), 1 / std::sqrt(3.0), 1e-9);
    EXPECT_NEAR(x1.seminorm.value(), 1.0, 1e-9);
    auto xx = sobolev_norms(TestFunction::from_expression("x"), Weight::expression("x"), I, 2.0);
    EXPECT_NEAR(xx.lp_norm.value(), 0.5, 1e-9);
    EXPECT_NEAR(xx.seminorm.value(), 1 / std::sqrt(2.0), 1e-9);
}

TEST(SobolevNorms, SampledFunction) {
    std::vector<double> grid, vals;
    for (int k = 0; k <= 10; ++k) {
        grid.push_back(k / 10.0);
        vals.push_back(k / 10.0);
    }
    auto s = sobolev_norms(TestFunction::from_samples(grid, vals), Weight::constant(1), Domain::interval(0, 1), 2.0);
    EXPECT_NEAR(s.lp_norm.value(), 1 / std::sqrt(3.0), 1e-9);
    EXPECT_NEAR(s.seminorm.value(), 1.0, 1e-9);
}

TEST(MeasureProperties, AdditivityMonotonicityScaling) {
    auto w = Weight::expression("exp(x) * (1 + y^2)");
    auto D = Domain::box(Point{0, 0}, Point{2, 1});
    auto full = weighted_measure(w, D, BoxRegion{Point{0, 0}, Point{2, 1}}).value.value();
    auto left = weighted_measure(w, D, BoxRegion{Point{0, 0}, Point{0.7, 1}}).value.value();
    auto right = weighted_measure(w, D, BoxRegion{Point{0.7, 0}, Point{2, 1}}).value.value();
    EXPECT_NEAR(left + right, full, 2e-10);
    EXPECT_LE(left, full + 1e-10);
    EXPECT_NEAR(full, (std::exp(2.0) - 1) * (4.0 / 3.0), 1e-9);
    for (double c : {0.5, 3.0}) {
        auto m = weighted_measure(Weight::constant(c), D, BoxRegion{Point{0.1, 0.2}, Point{1.7, 0.9}});
        EXPECT_NEAR(m.value.value(), c * 1.6 * 0.7, 1e-10);
    }
}

TEST(MeasureProperties, BallInBoxAndPolarAgree) {
    // unit disk area by polar route vs masked box route
    auto w = Weight::constant(1);
    auto polar = weighted_measure(w, Domain::full_space(2), BallRegion{Point{0.2, 0.1}, 1.0});
    EXPECT_NEAR(polar.value.value(), kPi, 1e-9);
    auto D = Domain::ball(Point{0, 0}, 1);
    EXPECT_NEAR(weighted_measure(w, D, WholeDomain{}).value.value(), kPi, 1e-9);
    (void)kInf;
}

TEST(Quadrature, CellTraceCsv) {
    std::vector<CellRecord> cells;
    QuadratureOptions o;
    o.trace = &cells;
    integrate_1d([](double x) { return x * x; }, 0.0, 1.0, o);
    EXPECT_FALSE(cells.empty());
    std::ostringstream os;
    write_cells_csv(os, cells);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "dim,lo,hi,estimate,error");
}
