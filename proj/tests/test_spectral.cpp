#include <wsemb/necessary.hpp>
#include <wsemb/spectral.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace wsemb;

namespace {

const double kPi = std::numbers::pi;
const Domain kUnit = Domain::interval(0, 1);
const Weight kHermite = Weight::radial(Profile::gaussian(1, 0.5));

}  // namespace

TEST(Assemble, ThreeNodeStencil) {
    const Discretization d = assemble(Weight::constant(1), kUnit, {3});
    const double h = 1.0 / 3.0;
    Eigen::MatrixXd A(d.A), B(d.B);
    Eigen::MatrixXd expectA(3, 3);
    expectA << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    EXPECT_LT((A - expectA / h).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((B - h * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assemble, ConstantsAreInTheNullSpace) {
    const Discretization d = assemble(Weight::expression("1 + x^2"), kUnit, {50});
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(d.A.rows());
    EXPECT_LT((d.A * one).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Assemble, MidpointCoefficient) {
    const Discretization d = assemble(Weight::expression("x"), kUnit, {10});
    const double h = 0.1;
    for (int i = 0; i + 1 < 10; ++i) EXPECT_NEAR(d.A.coeff(i, i + 1), -((i + 1) * h) / h, 1e-12);
}

TEST(Assemble, DegenerateMassAndFloor) {
    EXPECT_THROW(assemble(Weight::expression("0 * x"), kUnit, {10}), DomainError);
    const Discretization d = assemble(Weight::expression("exp(-400 * x)"), kUnit, {100, 8.0, 1e-12});
    EXPECT_GT(d.clamped, 0);
    for (double v : d.node_weights) EXPECT_GE(v, 1e-12 * d.node_weights.front());
}

TEST(Solve, UnitWeightNeumannSpectrum) {
    const Discretization d = assemble(Weight::constant(1), kUnit, {2000});
    const EigenSolution s = solve_k(d, 5);
    EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-8);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(s.eigenvalues[k], k * k * kPi * kPi, 0.005 * k * k * kPi * kPi);
    // eigenfunction of the first nonzero mode is proportional to cos(pi x)
    const Eigen::VectorXd v = s.vectors.col(1);
    Eigen::VectorXd c(v.size());
    for (int i = 0; i < v.size(); ++i) c[i] = std::cos(kPi * d.nodes[i][0]);
    const double corr = std::fabs(v.dot(c)) / (v.norm() * c.norm());
    EXPECT_GT(corr, 1 - 1e-6);
    for (double r : s.residuals) EXPECT_LE(r, 1e-10);
}

TEST(Solve, HermiteSpectrum) {
    for (int nodes : {2000, 4000}) {
        const Discretization d = assemble(kHermite, Domain::real_line(), {nodes, 8.0});
        const EigenSolution s = solve_k(d, 6);
        for (int k = 1; k <= 5; ++k) EXPECT_NEAR(s.eigenvalues[k], k, 0.01 * k) << nodes;
    }
}

TEST(Npc, UnitWeight) {
    const NPCResult r = compute_npcs(Weight::constant(1), kUnit, 3, {2000});
    EXPECT_NEAR(r.components[0].value, 1.0 / (kPi * kPi), 1e-5);
    EXPECT_NEAR(r.components[0].value, 0.101321, 1e-5);
    EXPECT_LE(r.gram_defect, 1e-8);
    EXPECT_LE(r.max_abs_mean, 1e-10);
    EXPECT_LE(r.max_rayleigh_gap, 1e-8);
}

TEST(Npc, HermiteFirstComponentIsLinear) {
    const NPCResult r = compute_npcs(kHermite, Domain::real_line(), 2, {2000, 8.0});
    EXPECT_NEAR(r.components[0].value, 1.0, 0.01);
    const Eigen::VectorXd& phi = r.components[0].phi;
    Eigen::VectorXd x(phi.size());
    for (int i = 0; i < phi.size(); ++i) x[i] = r.grid.nodes[i][0];
    const Eigen::VectorXd Bd = r.grid.B.diagonal();
    const double corr = std::fabs((phi.cwiseProduct(Bd)).dot(x)) /
                        std::sqrt(phi.cwiseProduct(Bd).dot(phi) * x.cwiseProduct(Bd).dot(x));
    EXPECT_GT(corr, 1 - 1e-4);
    EXPECT_LE(r.gram_defect, 1e-8);
    EXPECT_LE(r.max_abs_mean, 1e-10);
}

TEST(Npc, TwoDimensionalBox) {
    const Domain sq = Domain::box(Point{0.0, 0.0}, Point{1.0, 1.0});
    const NPCResult r = compute_npcs(Weight::constant(1), sq, 3, {60});
    EXPECT_NEAR(r.components[0].lambda, kPi * kPi, 0.01 * kPi * kPi);
    EXPECT_NEAR(r.components[1].lambda, kPi * kPi, 0.01 * kPi * kPi);
    EXPECT_NEAR(r.components[2].lambda, 2 * kPi * kPi, 0.01 * 2 * kPi * kPi);
    EXPECT_LE(r.gram_defect, 1e-8);
}

TEST(Npc, OrthonormalityProperty) {
    for (const Weight& w : {Weight::expression("1 + x"), Weight::expression("exp(x) * (2 + sin(5*x))"),
                            Weight::expression("x^2 + 0.1")}) {
        const NPCResult r = compute_npcs(w, kUnit, 4, {800});
        EXPECT_LE(r.gram_defect, 1e-8);
        EXPECT_LE(r.max_abs_mean, 1e-10);
        EXPECT_LE(r.max_rayleigh_gap, 1e-8);
    }
}

TEST(Solve, RefinementConvergesAtSecondOrder) {
    const Weight w = Weight::expression("1 + x");
    std::vector<double> lam;
    for (int n : {100, 200, 400}) lam.push_back(solve_k(assemble(w, kUnit, {n}), 3).eigenvalues[2]);
    const double ratio = (lam[0] - lam[1]) / (lam[1] - lam[2]);
    EXPECT_GT(ratio, 3.5);
    EXPECT_LT(ratio, 4.5);
}

TEST(Solve, TruncationMonotonicity) {
    const auto l6 = solve_k(assemble(kHermite, Domain::real_line(), {3000, 6.0}), 6).eigenvalues;
    const auto l10 = solve_k(assemble(kHermite, Domain::real_line(), {5000, 10.0}), 6).eigenvalues;
    for (int k = 0; k < 6; ++k) EXPECT_LE(l10[k], l6[k] + 1e-3);
}

TEST(Count, MatchesEigenvalues) {
    const Discretization d = assemble(Weight::constant(1), kUnit, {500});
    EXPECT_EQ(count_below(d, 50.0), 3);  // 0, pi^2, 4 pi^2
    EXPECT_EQ(count_below(d, 1.0), 1);
}

TEST(Probe, Examples) {
    const SpectralVerdict h = compactness_probe(kHermite, Domain::real_line(), {1500, 3000}, {6, 8, 12}, {4.5});
    EXPECT_EQ(h.classification, SpectralClass::DiscreteConsistent) << h.detail;
    for (const auto& e : h.table) EXPECT_EQ(e.count, 4);

    const SpectralVerdict u = compactness_probe(Weight::constant(1), kUnit, {500, 1000, 2000}, {}, {50.0});
    EXPECT_EQ(u.classification, SpectralClass::DiscreteConsistent);
    for (const auto& e : u.table) EXPECT_EQ(e.count, 2);

    const Weight lap = Weight::radial(Profile::exponential(1, -1));
    const SpectralVerdict e = compactness_probe(lap, Domain::real_line(), {2000, 4000}, {8, 16, 32}, {0.5, 1.0});
    EXPECT_EQ(e.classification, SpectralClass::EssentialSpectrumEvidence) << e.detail;
    const CheckResult nc = surface_ratio_limit(lap, Domain::real_line(), 1.0, {4, 8, 12, 16, 24, 32, 48, 64});
    EXPECT_TRUE(is_noncompact_side(nc.verdict));
}

TEST(Probe, NeedsTwoResolutions) {
    EXPECT_THROW(compactness_probe(Weight::constant(1), kUnit, {500}, {}, {10.0}), DomainError);
    EXPECT_THROW(compactness_probe(kHermite, Domain::real_line(), {500, 1000}, {8}, {10.0}), DomainError);
}

TEST(SpectralCsv, Headers) {
    std::ostringstream a, b;
    write_eigen_csv(a, {1.0, 2.0});
    EXPECT_EQ(a.str(), "k,lambda,npc\n1,1,1\n2,2,0.5\n");
    write_counting_csv(b, compactness_probe(Weight::constant(1), kUnit, {100, 200}, {}, {50.0}));
    EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "nodes,truncation,Lambda,count");
}
