#pragma once

#include <wsemb/core.hpp>
#include <wsemb/domain.hpp>
#include <wsemb/weight.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace wsemb {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Grid plan: cells per axis on the computational box; unbounded axes are
/// cut at +-truncation (or [a, a + truncation] on a half-line).
struct GridPlan {
    int nodes = 2000;
    double truncation = 8.0;
    double weight_floor = 1e-300;  // relative to the largest node weight
};

/// Cell-centered grid: nodes at cell centers, stiffness coefficients at
/// face midpoints, lumped mass at nodes.
struct Discretization {
    int dim = 1;
    Box box;
    int nx = 0, ny = 1;
    double hx = 0.0, hy = 1.0;
    std::vector<Point> nodes;
    std::vector<double> node_weights;  // after clamping
    int clamped = 0;
    SparseMatrix A, B;
};

namespace detail {

inline Box computational_box(const Domain& omega, double R) {
    if (omega.bounded()) return omega.bounding_box();
    if (omega.is_interval()) {
        const Interval I = omega.as_interval();
        const bool fa = std::isfinite(I.a), fb = std::isfinite(I.b);
        const double a = fa ? I.a : (fb ? I.b - R : -R);
        const double b = fb ? I.b : (fa ? I.a + R : R);
        return Box{Point{a}, Point{b}};
    }
    if (!omega.is_full_space()) throw DomainError("unbounded spectral domains must be intervals or the full space");
    Point lo(omega.dim()), hi(omega.dim());
    for (int i = 0; i < omega.dim(); ++i) lo[i] = -R, hi[i] = R;
    return Box{lo, hi};
}

// Faces share the node floor; a floored mass next to a raw face would
// create nearly decoupled spurious modes.
inline double face_weight(const Weight& w, const Domain& omega, const Point& x, double floor) {
    const double v = w.density(omega, x);
    if (!std::isfinite(v)) throw DomainError("weight is infinite at the grid face " + x.str());
    return std::max(v, floor);
}

}  // namespace detail

/// Stiffness form ∫ w ∇u·∇v (zero-flux boundary) and lumped mass ∫ w u v.
inline Discretization assemble(const Weight& w, const Domain& omega, const GridPlan& plan = {}) {
    const int n = omega.dim();
    if (n > 2) throw DomainError("spectral discretization supports dimensions 1 and 2");
    if (plan.nodes < 3) throw DomainError("spectral grid needs at least three cells per axis");
    if (n == 2 && plan.nodes > 200) throw DomainError("two-dimensional grids are limited to 200 cells per axis");
    Discretization d;
    d.dim = n;
    d.box = detail::computational_box(omega, plan.truncation);
    d.nx = plan.nodes;
    d.ny = n == 2 ? plan.nodes : 1;
    d.hx = (d.box.hi[0] - d.box.lo[0]) / d.nx;
    d.hy = n == 2 ? (d.box.hi[1] - d.box.lo[1]) / d.ny : 1.0;

    std::vector<int> index(static_cast<std::size_t>(d.nx) * d.ny, -1);
    auto center = [&](int i, int j) {
        Point p(n);
        p[0] = d.box.lo[0] + (i + 0.5) * d.hx;
        if (n == 2) p[1] = d.box.lo[1] + (j + 0.5) * d.hy;
        return p;
    };
    std::vector<double> raw;
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            const Point p = center(i, j);
            if (!omega.contains(p)) continue;
            index[static_cast<std::size_t>(j) * d.nx + i] = static_cast<int>(d.nodes.size());
            d.nodes.push_back(p);
            const double v = w.density(omega, p);
            if (!std::isfinite(v)) throw DomainError("weight is infinite at the grid node " + p.str());
            raw.push_back(v);
        }
    if (d.nodes.size() < 3) throw DomainError("fewer than three grid nodes fall inside the domain");
    const double wmax = *std::max_element(raw.begin(), raw.end());
    if (!(wmax > 0)) throw DomainError("degenerate mass: every node weight vanishes");
    const double floor = plan.weight_floor * wmax;
    d.node_weights = raw;
    for (double& v : d.node_weights)
        if (v < floor) v = floor, ++d.clamped;

    const int N = static_cast<int>(d.nodes.size());
    const double cell = d.hx * d.hy;
    std::vector<Eigen::Triplet<double>> ta, tb;
    std::vector<double> diag(N, 0.0);
    auto couple = [&](int a, int b, double coef) {
        ta.emplace_back(a, b, -coef);
        ta.emplace_back(b, a, -coef);
        diag[a] += coef;
        diag[b] += coef;
    };
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            const int a = index[static_cast<std::size_t>(j) * d.nx + i];
            if (a < 0) continue;
            if (i + 1 < d.nx) {
                const int b = index[static_cast<std::size_t>(j) * d.nx + i + 1];
                if (b >= 0) {
                    Point f = center(i, j);
                    f[0] += 0.5 * d.hx;
                    couple(a, b, detail::face_weight(w, omega, f, floor) * d.hy / d.hx);
                }
            }
            if (n == 2 && j + 1 < d.ny) {
                const int b = index[static_cast<std::size_t>(j + 1) * d.nx + i];
                if (b >= 0) {
                    Point f = center(i, j);
                    f[1] += 0.5 * d.hy;
                    couple(a, b, detail::face_weight(w, omega, f, floor) * d.hx / d.hy);
                }
            }
            tb.emplace_back(a, a, d.node_weights[a] * cell);
        }
    for (int a = 0; a < N; ++a) ta.emplace_back(a, a, diag[a]);
    d.A.resize(N, N);
    d.B.resize(N, N);
    d.A.setFromTriplets(ta.begin(), ta.end());
    d.B.setFromTriplets(tb.begin(), tb.end());
    return d;
}

struct EigenSolution {
    std::vector<double> eigenvalues;  // ascending
    Eigen::MatrixXd vectors;          // B-orthonormal columns
    std::vector<double> residuals;    // relative, see solve_k
    int iterations = 0;
    bool deflated = false;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iterations = 2000;
    double shift = 1.0;  // A + shift B is factorized
    std::uint64_t seed = 7;
};

namespace detail {

inline double row_sum_norm(const SparseMatrix& M) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(M.rows());
    for (int k = 0; k < M.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(M, k); it; ++it) s[it.row()] += std::fabs(it.value());
    return s.maxCoeff();
}

}  // namespace detail

/// k smallest eigenpairs of A u = lambda B u by shift-invert subspace
/// iteration with Rayleigh-Ritz. With `deflate` the iterates are kept
/// B-orthogonal to the constant vector (zero weighted mean). Residuals are
/// |A x - lambda B x| / ((|A| + |lambda| |B|) |x|).
inline EigenSolution solve_k(const Discretization& d, int k, bool deflate = false, const SolveOptions& opts = {}) {
    const int n = static_cast<int>(d.A.rows());
    if (k < 1) throw DomainError("k must be >= 1");
    if (k + (deflate ? 1 : 0) > n) throw DomainError("k exceeds the number of grid nodes");
    const int m = std::min(n - (deflate ? 1 : 0), std::max(2 * k + 8, k + 12));
    const SparseMatrix K = d.A + opts.shift * d.B;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(K);
    if (ldlt.info() != Eigen::Success) throw SolverError("factorization of A + shift B failed", 0.0);

    Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd Bd = d.B.diagonal();
    one /= std::sqrt(Bd.sum());
    auto project = [&](Eigen::MatrixXd& X) {
        if (!deflate) return;
        const Eigen::RowVectorXd c = (one.cwiseProduct(Bd)).transpose() * X;
        X -= one * c;
    };

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd X(n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = g(rng);
    project(X);

    const double nA = detail::row_sum_norm(d.A), nB = Bd.maxCoeff();
    EigenSolution sol;
    sol.deflated = deflate;
    double worst = 0.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        Eigen::MatrixXd Y = ldlt.solve(d.B * X);
        project(Y);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
        project(Q);
        const Eigen::MatrixXd AQ = d.A * Q, BQ = d.B * Q;
        Eigen::MatrixXd Ap = Q.transpose() * AQ, Bp = Q.transpose() * BQ;
        Ap = 0.5 * (Ap + Ap.transpose());
        Bp = 0.5 * (Bp + Bp.transpose());
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Ap, Bp);
        if (ges.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz step failed", 0.0);
        X = Q * ges.eigenvectors();
        worst = 0.0;
        sol.residuals.assign(k, 0.0);
        for (int j = 0; j < k; ++j) {
            const double lam = ges.eigenvalues()[j];
            const Eigen::VectorXd x = X.col(j);
            const double r = (d.A * x - lam * (d.B * x)).norm() / ((nA + std::fabs(lam) * nB) * x.norm());
            sol.residuals[j] = r;
            worst = std::max(worst, r);
        }
        sol.iterations = it;
        if (worst <= opts.tol) {
            sol.eigenvalues.assign(ges.eigenvalues().data(), ges.eigenvalues().data() + k);
            sol.vectors = X.leftCols(k);
            return sol;
        }
    }
    throw SolverError("subspace iteration did not converge", worst);
}

/// Number of generalized eigenvalues below Lambda from the inertia of
/// A - Lambda B (Sylvester). Includes the zero mode.
inline int count_below(const Discretization& d, double Lambda) {
    const SparseMatrix M = d.A - Lambda * d.B;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(M);
    if (ldlt.info() != Eigen::Success) throw SolverError("LDL^T of A - Lambda B failed", 0.0);
    const Eigen::VectorXd D = ldlt.vectorD();
    return static_cast<int>((D.array() < 0.0).count());
}

struct NPC {
    double lambda = 0.0;
    double value = 0.0;  // 1 / lambda
    Eigen::VectorXd phi;
};

struct NPCResult {
    Discretization grid;
    std::vector<NPC> components;
    double gram_defect = 0.0;    // max |G - I|, G the weighted Gram matrix
    double max_abs_mean = 0.0;   // largest weighted mean of a component
    double max_rayleigh_gap = 0.0;  // max |<Au,u>/<Bu,u> - lambda| / (1 + lambda)
    int iterations = 0;
};

/// First j Nonlinear Principal Components: zero-mean eigenvectors of the
/// discretized Rayleigh quotient, NPC value 1/lambda.
inline NPCResult compute_npcs(const Weight& w, const Domain& omega, int j, const GridPlan& plan = {},
                              const SolveOptions& opts = {}) {
    NPCResult res;
    res.grid = assemble(w, omega, plan);
    const EigenSolution sol = solve_k(res.grid, j, true, opts);
    res.iterations = sol.iterations;
    const Eigen::VectorXd Bd = res.grid.B.diagonal();
    const Eigen::MatrixXd G = sol.vectors.transpose() * (res.grid.B * sol.vectors);
    res.gram_defect = (G - Eigen::MatrixXd::Identity(j, j)).cwiseAbs().maxCoeff();
    for (int i = 0; i < j; ++i) {
        NPC c;
        c.lambda = sol.eigenvalues[i];
        c.value = 1.0 / c.lambda;
        c.phi = sol.vectors.col(i);
        const double mean = Bd.dot(c.phi) / Bd.sum();
        res.max_abs_mean = std::max(res.max_abs_mean, std::fabs(mean));
        const double rq = c.phi.dot(res.grid.A * c.phi) / c.phi.dot(res.grid.B * c.phi);
        res.max_rayleigh_gap = std::max(res.max_rayleigh_gap, std::fabs(rq - c.lambda) / (1.0 + c.lambda));
        res.components.push_back(std::move(c));
    }
    return res;
}

enum class SpectralClass { DiscreteConsistent, EssentialSpectrumEvidence, Unresolved };

inline const char* to_string(SpectralClass c) {
    switch (c) {
        case SpectralClass::DiscreteConsistent: return "DiscreteConsistent";
        case SpectralClass::EssentialSpectrumEvidence: return "EssentialSpectrumEvidence";
        case SpectralClass::Unresolved: return "Unresolved";
    }
    return "?";
}

struct CountingEntry {
    int nodes;
    double truncation;
    double Lambda;
    int count;  // eigenvalues below Lambda after removing the zero mode
};

struct SpectralVerdict {
    std::vector<CountingEntry> table;
    SpectralClass classification = SpectralClass::Unresolved;
    std::string detail;
    int clamped_nodes = 0;
};

/// Spectral discreteness probe. Counts must agree within one across the two
/// finest resolutions and, for unbounded domains, the two largest
/// truncations. Counts that keep growing with the truncation are taken as
/// evidence of essential spectrum.
inline SpectralVerdict compactness_probe(const Weight& w, const Domain& omega, std::vector<int> resolutions,
                                         std::vector<double> truncations, const std::vector<double>& Lambdas) {
    if (resolutions.size() < 2) throw DomainError("the spectral probe needs at least two resolutions");
    const bool bounded = omega.bounded();
    if (!bounded && truncations.size() < 2) throw DomainError("unbounded domains need at least two truncations");
    if (bounded) truncations = {truncations.empty() ? 0.0 : truncations.front()};
    if (Lambdas.empty()) throw DomainError("the spectral probe needs at least one Lambda");
    std::sort(resolutions.begin(), resolutions.end());
    std::sort(truncations.begin(), truncations.end());

    SpectralVerdict v;
    const std::size_t nr = resolutions.size(), nt = truncations.size();
    // counts[L][r][t]
    std::vector<std::vector<std::vector<int>>> counts(
        Lambdas.size(), std::vector<std::vector<int>>(nr, std::vector<int>(nt, 0)));
    try {
        for (std::size_t r = 0; r < nr; ++r)
            for (std::size_t t = 0; t < nt; ++t) {
                const Discretization d = assemble(w, omega, {resolutions[r], bounded ? 8.0 : truncations[t]});
                v.clamped_nodes = std::max(v.clamped_nodes, d.clamped);
                for (std::size_t L = 0; L < Lambdas.size(); ++L) {
                    const int c = std::max(0, count_below(d, Lambdas[L]) - 1);
                    counts[L][r][t] = c;
                    v.table.push_back({resolutions[r], truncations[t], Lambdas[L], c});
                }
            }
    } catch (const std::exception& e) {
        v.classification = SpectralClass::Unresolved;
        v.detail = std::string("solver failure: ") + e.what();
        return v;
    }

    bool stable = true, growing = false;
    for (std::size_t L = 0; L < Lambdas.size(); ++L) {
        const auto& c = counts[L];
        if (std::abs(c[nr - 1][nt - 1] - c[nr - 2][nt - 1]) > 1) stable = false;
        if (nt >= 2) {
            if (std::abs(c[nr - 1][nt - 1] - c[nr - 1][nt - 2]) > 1) stable = false;
            bool up = true;
            for (std::size_t t = 1; t < nt; ++t) up = up && c[nr - 1][t] > c[nr - 1][t - 1];
            if (up && c[nr - 1][nt - 1] - c[nr - 1][nt - 2] >= 2) growing = true;
        }
    }
    if (growing) {
        v.classification = SpectralClass::EssentialSpectrumEvidence;
        v.detail = "low eigenvalue counts grow with the truncation";
    } else if (stable) {
        v.classification = SpectralClass::DiscreteConsistent;
        v.detail = "counts stable across the finest resolutions" + std::string(bounded ? "" : " and largest truncations");
    } else {
        v.detail = "counts drift without a clear trend";
    }
    return v;
}

inline void write_eigen_csv(std::ostream& os, const std::vector<double>& eigenvalues) {
    os << "k,lambda,npc\n";
    os.precision(17);
    for (std::size_t k = 0; k < eigenvalues.size(); ++k)
        os << k + 1 << ',' << eigenvalues[k] << ',' << 1.0 / eigenvalues[k] << '\n';
}

inline void write_counting_csv(std::ostream& os, const SpectralVerdict& v) {
    os << "nodes,truncation,Lambda,count\n";
    os.precision(17);
    for (const auto& e : v.table) os << e.nodes << ',' << e.truncation << ',' << e.Lambda << ',' << e.count << '\n';
}

/// Node coordinates followed by one column per component.
inline void write_npc_csv(std::ostream& os, const NPCResult& r) {
    const int n = r.grid.dim;
    os << (n == 1 ? "x" : "x,y");
    for (std::size_t j = 0; j < r.components.size(); ++j) os << ",phi" << j + 1;
    os << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < r.grid.nodes.size(); ++i) {
        for (int c = 0; c < n; ++c) os << (c ? "," : "") << r.grid.nodes[i][c];
        for (const auto& comp : r.components) os << ',' << comp.phi[static_cast<int>(i)];
        os << '\n';
    }
}

}  // namespace wsemb
