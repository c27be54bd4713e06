#include <wsemb/necessary.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace wsemb;

namespace {
const double kE = std::numbers::e;

// closed-form Gaussian mass of [a, b]
double gauss_mass(double a, double b) { return 0.5 * std::sqrt(std::numbers::pi) * (std::erf(b) - std::erf(a)); }

Tesselation unit_lattice(double h = 1.0) { return Tesselation{h, Point{0.0}}; }
}  // namespace

TEST(Lambda, Canonical) {
    EXPECT_DOUBLE_EQ(canonical_lambda(1), 0.25);
    EXPECT_DOUBLE_EQ(canonical_lambda(2), 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(canonical_lambda(3), 1.0 / 52.0);
}

TEST(Tesselation, FringeHasThreeToTheNMinusOneCubes) {
    Tesselation T{0.5, Point{0.0, 0.0}};
    EXPECT_EQ(T.fringe({0, 0, 0}).size(), 8u);
    Tesselation T3{0.5, Point{0.0, 0.0, 0.0}};
    EXPECT_EQ(T3.fringe({1, 2, 3}).size(), 26u);
}

TEST(ClassifyCube, ConstantWeight) {
    auto r = classify_cube(Weight::constant(1), Domain::real_line(), unit_lattice(), {0, 0, 0}, 0.25);
    EXPECT_NEAR(r.mu_H->value(), 1.0, 1e-12);
    EXPECT_NEAR(r.mu_F->value(), 2.0, 1e-12);
    EXPECT_EQ(r.classification, CubeClass::Fat);
}

TEST(ClassifyCube, ExponentialIsFatEverywhere) {
    auto w = Weight::expression("exp(x)");
    auto r = classify_cube(w, Domain::real_line(), unit_lattice(), {0, 0, 0}, 0.25);
    EXPECT_NEAR(r.mu_H->value(), kE - 1, 1e-9);
    EXPECT_NEAR(r.mu_F->value(), (1 - 1 / kE) + (kE * kE - kE), 1e-9);
    EXPECT_EQ(r.classification, CubeClass::Fat);
    for (long k : {-7L, -2L, 3L, 9L})
        EXPECT_EQ(classify_cube(w, Domain::real_line(), unit_lattice(), {k, 0, 0}, 0.25).classification,
                  CubeClass::Fat);
}

TEST(ClassifyCube, GaussianFarCubeIsThin) {
    auto w = Weight::radial(Profile::gaussian(1, 1));
    auto r = classify_cube(w, Domain::real_line(), unit_lattice(), {3, 0, 0}, 0.25);
    EXPECT_NEAR(r.mu_H->value() / gauss_mass(3, 4), 1.0, 1e-8);
    EXPECT_NEAR(r.mu_F->value() / (gauss_mass(2, 3) + gauss_mass(4, 5)), 1.0, 1e-8);
    EXPECT_EQ(r.classification, CubeClass::Thin);
}

TEST(ClassifyCube, LambdaMonotoneAndScaleInvariant) {
    auto w = Weight::expression("1 + x^2");
    auto D = Domain::real_line();
    for (long k = -4; k <= 4; ++k) {
        for (double l1 : {0.3, 0.5, 1.0}) {
            auto a = classify_cube(w, D, unit_lattice(), {k, 0, 0}, l1);
            auto b = classify_cube(w, D, unit_lattice(), {k, 0, 0}, 0.5 * l1);
            if (a.classification == CubeClass::Fat) {
                EXPECT_EQ(b.classification, CubeClass::Fat);
            }
        }
        for (double c : {0.01, 7.0})
            EXPECT_EQ(classify_cube(Weight::constant(c), D, unit_lattice(0.3), {k, 0, 0}, 0.4).classification,
                      classify_cube(Weight::constant(1), D, unit_lattice(0.3), {k, 0, 0}, 0.4).classification);
    }
}

TEST(FatCubeScan, ConstantWeightCertified) {
    auto s = fat_cube_scan(Weight::constant(1), Domain::real_line(), 1.0, 0.25, {4, 8, 16});
    ASSERT_EQ(s.windows.size(), 3u);
    EXPECT_EQ(s.windows[0].fat, 8);
    EXPECT_EQ(s.windows[1].fat, 16);
    EXPECT_EQ(s.windows[2].fat, 32);
    EXPECT_EQ(s.result.verdict, Verdict::NonCompactCertified);
}

TEST(FatCubeScan, GaussianSaturates) {
    auto s = fat_cube_scan(Weight::radial(Profile::gaussian(1, 1)), Domain::real_line(), 1.0, 0.25, {4, 8, 16});
    EXPECT_EQ(s.windows[0].fat, s.windows[2].fat);
    EXPECT_GT(s.windows[0].fat, 0);
    EXPECT_LE(s.windows[0].fat, 4);
    EXPECT_EQ(s.result.verdict, Verdict::Inconclusive);
    for (const auto& c : s.cubes) {
        const long k = c.index[0];
        if (c.classification == CubeClass::Fat) {
            EXPECT_LE(std::abs(k + 0.5), 2.0) << k;
        }
    }
}

TEST(FatCubeScan, BoundaryVanishingWeightFinite) {
    auto w = Weight::boundary_profile(Profile::power(1, 2), Faces::Lower);
    auto s = fat_cube_scan(w, Domain::interval(0, 1), 0.125, 0.25, {1, 2});
    EXPECT_EQ(s.windows[0].fat, s.windows[1].fat);
    EXPECT_LE(s.windows[0].fat, 8);
    EXPECT_EQ(s.result.verdict, Verdict::Inconclusive);
}

TEST(FatCubeScan, GrowthWithoutInvarianceIsOnlySupported) {
    auto s = fat_cube_scan(Weight::expression("exp(x)"), Domain::real_line(), 1.0, 0.25, {2, 4, 8});
    EXPECT_EQ(s.result.verdict, Verdict::NonCompactSupported);
    auto d = fat_cube_scan(Weight::expression("exp(x)").with_doubling(), Domain::real_line(), 1.0, 0.25, {2, 4, 8});
    EXPECT_EQ(d.result.verdict, Verdict::NonCompactCertified);
}

TEST(FatCubeScan, CsvExport) {
    auto s = fat_cube_scan(Weight::constant(1), Domain::real_line(), 1.0, 0.25, {2});
    std::ostringstream os;
    write_scan_csv(os, s);
    std::string header;
    std::getline(std::istringstream(os.str()), header);
    EXPECT_EQ(header, "i,j,k,mu_H,mu_F,class");
    EXPECT_NE(os.str().find(",fat"), std::string::npos);
}

TEST(FiniteVolume, Examples) {
    for (int n = 1; n <= 3; ++n) {
        auto r = finite_volume_check(Weight::constant(1), Domain::full_space(n));
        EXPECT_EQ(r.verdict, Verdict::NonCompactCertified) << n;
    }
    auto guard = finite_volume_check(Weight::boundary_profile(Profile::power(1, -2), Faces::Lower),
                                     Domain::interval(0, 1));
    EXPECT_EQ(guard.status, CheckStatus::Refused);
    EXPECT_EQ(guard.verdict, Verdict::Inconclusive);
    auto expr_guard = finite_volume_check(Weight::expression("x^(-2)"), Domain::interval(0, 1));
    EXPECT_EQ(expr_guard.status, CheckStatus::Refused);
    auto g = finite_volume_check(Weight::radial(Profile::gaussian(1, 1)), Domain::real_line());
    EXPECT_EQ(g.status, CheckStatus::Consistent);
    EXPECT_NEAR(g.get("volume"), std::sqrt(std::numbers::pi), 1e-9);
}

TEST(TailDecay, Examples) {
    auto H = Domain::half_line(0);
    const std::vector<double> grid{2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<RatioSample> s;
    auto e = tail_decay_check(Weight::expression("exp(-x)"), H, 1.0, 0.1, grid, &s);
    EXPECT_EQ(e.verdict, Verdict::NonCompactSupported);
    for (const auto& q : s) EXPECT_NEAR(q.ratio.value(), 1 / (kE - 1), 1e-8);
    auto g = tail_decay_check(Weight::expression("exp(-x^2)"), H, 1.0, 0.1, grid);
    EXPECT_EQ(g.status, CheckStatus::Consistent);
    auto c = tail_decay_check(Weight::constant(1), H, 1.0, 0.1, grid, &s);
    EXPECT_EQ(c.verdict, Verdict::NonCompactSupported);
    EXPECT_TRUE(s.back().ratio.is_infinite());
    EXPECT_EQ(tail_decay_check(Weight::constant(1), Domain::interval(0, 1), 1, 0.1, grid).status,
              CheckStatus::Inapplicable);
}

TEST(SurfaceRatio, Examples) {
    const std::vector<double> grid{4, 8, 12, 16, 24, 32, 48, 64};
    auto e = surface_ratio_limit(Weight::radial(Profile::exponential(1, -1)), Domain::real_line(), 1.0, grid);
    EXPECT_EQ(e.verdict, Verdict::NonCompactCertified);
    EXPECT_NEAR(e.get("limit_estimate"), std::exp(-1.0), 1e-9);
    auto g = surface_ratio_limit(Weight::radial(Profile::gaussian(1, 1)), Domain::full_space(2), 1.0,
                                 {1, 2, 3, 4, 5, 6, 7, 8});
    EXPECT_EQ(g.status, CheckStatus::Consistent);
    std::vector<SurfaceRatio> s;
    auto p = surface_ratio_limit(Weight::radial(Profile::shifted_power(1, -5)), Domain::real_line(), 1.0, grid, &s);
    EXPECT_EQ(p.verdict, Verdict::NonCompactCertified);
    EXPECT_NEAR(p.get("limit_estimate"), 1.0, 0.02);
    for (const auto& q : s) EXPECT_NEAR(q.ratio, std::pow((1 + q.r) / (2 + q.r), 5), 1e-12);
}

TEST(SurfaceRatio, IncreasingAreaIsInapplicable) {
    auto r = surface_ratio_limit(Weight::constant(1), Domain::full_space(2), 1.0, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(r.status, CheckStatus::Inapplicable);
}

TEST(SurfaceRatio, ExpressionWeightOnlySupported) {
    auto r = surface_ratio_limit(Weight::expression("exp(-x)"), Domain::half_line(0), 1.0, {4, 8, 12, 16, 24, 32});
    EXPECT_EQ(r.verdict, Verdict::NonCompactSupported);
}

TEST(ExponentialDecay, Examples) {
    auto H = Domain::half_line(0);
    const std::vector<double> grid{1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_EQ(exponential_decay_check(Weight::expression("exp(-x)"), H, {2}, grid).verdict,
              Verdict::NonCompactSupported);
    EXPECT_EQ(exponential_decay_check(Weight::expression("exp(-x^2)"), H, {1, 2, 4, 8}, grid).status,
              CheckStatus::Consistent);
    EXPECT_EQ(exponential_decay_check(Weight::constant(1), H, {1}, grid).verdict, Verdict::NonCompactSupported);
}

TEST(ThinChain, Examples) {
    auto e = thin_chain(Weight::expression("exp(x)"), Domain::real_line(), unit_lattice(), {0, 0, 0}, 10);
    EXPECT_EQ(e.stop, ChainStop::FatCube);
    EXPECT_EQ(e.terminated_at, 0u);
    EXPECT_DOUBLE_EQ(e.lambda, 0.25);
    auto c = thin_chain(Weight::constant(1), Domain::real_line(), unit_lattice(), {5, 0, 0}, 10);
    EXPECT_EQ(c.stop, ChainStop::FatCube);
    EXPECT_EQ(c.terminated_at, 0u);

    auto g = thin_chain(Weight::radial(Profile::gaussian(1, 1)), Domain::real_line(), unit_lattice(), {3, 0, 0}, 10);
    EXPECT_EQ(g.stop, ChainStop::FatCube);
    ASSERT_GE(g.cubes.size(), 2u);
    for (std::size_t j = 1; j < g.cubes.size(); ++j) {
        EXPECT_EQ(g.cubes[j][0], g.cubes[j - 1][0] - 1);  // steps toward the origin
        EXPECT_LE(g.masses[j - 1], 0.5 * g.masses[j] + 2e-10);
        EXPECT_NEAR(g.masses[j], gauss_mass(g.cubes[j][0], g.cubes[j][0] + 1), 1e-9);
    }
    EXPECT_LE(std::abs(g.cubes.back()[0] + 0.5), 1.5);
}

TEST(ThinChain, EmptyStart) {
    auto c = thin_chain(Weight::constant(1), Domain::interval(0, 1), unit_lattice(0.25), {10, 0, 0}, 5);
    EXPECT_EQ(c.stop, ChainStop::EmptyStart);
    EXPECT_TRUE(c.cubes.empty());
}
