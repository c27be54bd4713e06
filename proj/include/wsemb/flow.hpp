#pragma once

#include <wsemb/check.hpp>
#include <wsemb/core.hpp>
#include <wsemb/domain.hpp>
#include <wsemb/expression.hpp>
#include <wsemb/measure.hpp>
#include <wsemb/necessary.hpp>
#include <wsemb/profile.hpp>
#include <wsemb/weight.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace wsemb {

struct Hypothesis {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Coordinates of a subgraph point in the certificate's chart. Presets use
/// normalized charts (fiber or radius scaled to (0,1)) so that deep
/// truncations stay representable; determinants are always ambient.
using ChartPoint = std::vector<double>;

/// Flow Phi_t on the subgraph together with everything needed to check
/// the flow conditions on sampled truncations Omega_N.
struct FlowCertificate {
    std::string preset;
    std::string flow;        // readable formula for Phi
    std::string exhaustion;  // readable description of Omega_N
    std::string truncation_compactness;  // structural reason the embedding is compact on Omega*_N
    double c = 0.0;
    std::vector<double> N_grid;
    std::function<std::vector<ChartPoint>(double)> sample_omega_N;
    std::function<double(const ChartPoint&, double)> log_det;  // log det J Phi_t, NaN when det <= 0
    std::function<double(const ChartPoint&, double)> dphi_dt_norm;
    std::function<bool(const ChartPoint&, double)> in_flow_domain;  // (z,t) in U and Phi_t(z) in Omega_w
    std::function<ChartPoint(const ChartPoint&, double)> image;
    std::function<double(double, double)> closed_dN;  // d_N(t), empty when no closed form
    std::optional<double> closed_M;
    bool closed_form = false;         // det and d_N are exact formulas
    bool monotone_structure = false;  // injectivity follows from the flow's monotone structure
    std::vector<Hypothesis> hypotheses;
    std::vector<std::string> notes;
};

enum class ConditionStatus { Pass, Fail, Asserted };

inline const char* to_string(ConditionStatus s) {
    switch (s) {
        case ConditionStatus::Pass: return "pass";
        case ConditionStatus::Fail: return "fail";
        case ConditionStatus::Asserted: return "asserted";
    }
    return "?";
}

enum class CertificateOverall { CompactCertified, CompactSupported, NotEstablished, Failed };

inline const char* to_string(CertificateOverall o) {
    switch (o) {
        case CertificateOverall::CompactCertified: return "CompactCertified";
        case CertificateOverall::CompactSupported: return "CompactSupported";
        case CertificateOverall::NotEstablished: return "NotEstablished";
        case CertificateOverall::Failed: return "Failed";
    }
    return "?";
}

struct LimitSequence {
    std::vector<double> N, values;
    bool tends_to_zero = false;
};

struct FlowSample {
    double N, t;
    double dN;          // value used (closed form when available)
    double dN_sampled;  // sup over samples of 1/det
    double min_det;
    double dphi_dt_norm;  // sup over samples of |d/dt Phi|
};

struct CertificateResult {
    std::string preset;
    ConditionStatus exhaustion_compactness = ConditionStatus::Asserted;
    ConditionStatus flow_domain = ConditionStatus::Pass;
    ConditionStatus injectivity = ConditionStatus::Pass;
    ConditionStatus M_bound = ConditionStatus::Pass;
    double M_sampled = 0.0;
    std::optional<double> M_closed;
    ConditionStatus closed_form_consistency = ConditionStatus::Pass;
    double closed_form_discrepancy = 0.0;  // max |sampled - closed| of d_N
    LimitSequence dN_at_c, dN_integral;
    CertificateOverall overall = CertificateOverall::Failed;
    std::vector<Hypothesis> hypotheses;
    std::vector<std::string> failures, notes;
    std::vector<FlowSample> table;
    int samples = 0;

    Verdict verdict() const {
        switch (overall) {
            case CertificateOverall::CompactCertified: return Verdict::CompactCertified;
            case CertificateOverall::CompactSupported: return Verdict::CompactSupported;
            default: return Verdict::Inconclusive;
        }
    }
};

struct VerifyPlan {
    double t_ratio = 0.97857206208770013;  // 2^{-1/32}, geometric t-grid toward 0
    double t_floor = 1e-10;                // smallest t as a fraction of c
    double M_ceiling = 1e6;
    int collision_pairs = 4000;
    std::uint64_t seed = 20240611;
};

namespace detail {

inline std::vector<double> flow_t_grid(double c, const VerifyPlan& plan) {
    std::vector<double> t{0.0};
    std::vector<double> rev;
    for (double s = c; s >= plan.t_floor * c; s *= plan.t_ratio) rev.push_back(s);
    t.insert(t.end(), rev.rbegin(), rev.rend());
    return t;
}

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
    return s;
}

}  // namespace detail

/// Checks the flow conditions on every sampled truncation and assembles
/// the per-condition result.
inline CertificateResult adams_verify(const FlowCertificate& cert, const VerifyPlan& plan = {}) {
    if (!(cert.c > 0)) throw DomainError("flow horizon c must be > 0");
    if (cert.N_grid.size() < 4) throw DomainError("flow certificate needs at least four N values");
    CertificateResult res;
    res.preset = cert.preset;
    res.hypotheses = cert.hypotheses;
    res.notes = cert.notes;
    res.M_closed = cert.closed_M;
    for (const auto& h : cert.hypotheses)
        if (!h.passed) res.failures.push_back("hypothesis " + h.name + " failed: " + h.detail);

    const std::vector<double> t = detail::flow_t_grid(cert.c, plan);
    std::mt19937_64 rng(plan.seed);
    auto fail_once = [&](ConditionStatus& s, const std::string& msg) {
        if (s != ConditionStatus::Fail) res.failures.push_back(msg);
        s = ConditionStatus::Fail;
    };

    for (double N : cert.N_grid) {
        const std::vector<ChartPoint> pts = cert.sample_omega_N(N);
        if (pts.empty()) {
            fail_once(res.flow_domain, "no sample points in Omega_N for N = " + std::to_string(N));
            continue;
        }
        res.samples += static_cast<int>(pts.size());
        std::vector<double> used(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) {
            double sup_inv = 0.0, min_det = std::numeric_limits<double>::infinity(), dmax = 0.0;
            for (const auto& z : pts) {
                if (!cert.in_flow_domain(z, t[k]))
                    fail_once(res.flow_domain, "flow leaves U or the subgraph at N = " + std::to_string(N) +
                                                   ", t = " + std::to_string(t[k]));
                const double ld = cert.log_det(z, t[k]);
                if (std::isnan(ld) || ld == std::numeric_limits<double>::infinity() ||
                    ld == -std::numeric_limits<double>::infinity()) {
                    fail_once(res.injectivity, "det J Phi_t is not positive and finite at N = " + std::to_string(N) +
                                                   ", t = " + std::to_string(t[k]));
                    continue;
                }
                sup_inv = std::max(sup_inv, std::exp(-ld));
                min_det = std::min(min_det, std::exp(ld));
                const double d = cert.dphi_dt_norm(z, t[k]);
                dmax = std::isnan(d) ? std::numeric_limits<double>::infinity() : std::max(dmax, d);
            }
            double dN = sup_inv;
            if (cert.closed_dN) {
                dN = cert.closed_dN(N, t[k]);
                const double gap = std::fabs(sup_inv - dN);
                res.closed_form_discrepancy = std::max(res.closed_form_discrepancy, gap);
                if (sup_inv > dN * (1.0 + 1e-9) + 1e-300)
                    fail_once(res.closed_form_consistency,
                              "sampled d_N exceeds the closed form at N = " + std::to_string(N));
            }
            used[k] = dN;
            res.M_sampled = std::max(res.M_sampled, dmax);
            res.table.push_back({N, t[k], dN, sup_inv, min_det, dmax});
        }
        res.dN_at_c.N.push_back(N);
        res.dN_at_c.values.push_back(used.back());
        res.dN_integral.N.push_back(N);
        res.dN_integral.values.push_back(detail::trapezoid(t, used));

        if (!cert.monotone_structure && pts.size() >= 2) {
            std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
            const int pairs = plan.collision_pairs / static_cast<int>(cert.N_grid.size());
            for (int q = 0; q < pairs; ++q) {
                const std::size_t i = pick(rng), j = pick(rng);
                if (i == j) continue;
                double dz = 0.0;
                for (std::size_t m = 0; m < pts[i].size(); ++m) dz = std::max(dz, std::fabs(pts[i][m] - pts[j][m]));
                if (dz == 0.0) continue;
                for (double tt : {0.5 * cert.c, cert.c}) {
                    const ChartPoint a = cert.image(pts[i], tt), b = cert.image(pts[j], tt);
                    bool same = true;
                    for (std::size_t m = 0; m < a.size(); ++m) same = same && a[m] == b[m];
                    if (same) fail_once(res.injectivity, "two sample points collide under Phi_t");
                }
            }
        }
    }

    if (!(res.M_sampled <= plan.M_ceiling))
        fail_once(res.M_bound, "sampled |d/dt Phi| exceeds the ceiling " + std::to_string(plan.M_ceiling));
    if (cert.closed_M && res.M_sampled > *cert.closed_M * (1.0 + 1e-9))
        fail_once(res.M_bound, "sampled |d/dt Phi| exceeds the closed-form bound");

    res.dN_at_c.tends_to_zero = tends_to_zero(res.dN_at_c.values);
    res.dN_integral.tends_to_zero = tends_to_zero(res.dN_integral.values);

    const bool hard_fail = !res.failures.empty();
    if (hard_fail) res.overall = CertificateOverall::Failed;
    else if (res.dN_at_c.tends_to_zero && res.dN_integral.tends_to_zero)
        res.overall = cert.closed_form && cert.monotone_structure ? CertificateOverall::CompactCertified
                                                                  : CertificateOverall::CompactSupported;
    else res.overall = CertificateOverall::NotEstablished;
    return res;
}

/// Columns N,t,dN,det,dPhi_dt_norm; det is the smallest sampled determinant.
inline void write_flow_csv(std::ostream& os, const CertificateResult& r) {
    os << "N,t,dN,det,dPhi_dt_norm\n";
    os.precision(17);
    for (const auto& s : r.table)
        os << s.N << ',' << s.t << ',' << s.dN << ',' << s.min_det << ',' << s.dphi_dt_norm << '\n';
}

/// User flow on a one-dimensional base: x' and y' as expressions in x, y, t.
struct ExpressionFlowSpec {
    std::string x_map, y_map;
    double c = 0.5;
    std::vector<double> N_grid{2, 3, 4, 6, 8, 12, 16, 20, 24};
    enum class Exhaustion { High, NearBoundary } exhaustion = Exhaustion::High;
    int base_points = 48;  // x samples per N
};

/// Expression flows get finite-difference determinants and sampled
/// non-collision checks, so they can reach CompactSupported at most.
inline FlowCertificate expression_flow(const Weight& w, const Domain& omega, const ExpressionFlowSpec& spec) {
    if (omega.dim() != 1 || !omega.is_interval())
        throw DomainError("expression flows are supported on one-dimensional intervals");
    const Expression fx(spec.x_map, {"x", "y", "t"}), fy(spec.y_map, {"x", "y", "t"});
    FlowCertificate cert;
    cert.preset = "expression_flow";
    cert.flow = "(" + spec.x_map + ", " + spec.y_map + ")";
    cert.c = spec.c;
    cert.N_grid = spec.N_grid;
    cert.truncation_compactness = "declared by the caller";
    const bool high = spec.exhaustion == ExpressionFlowSpec::Exhaustion::High;
    cert.exhaustion = high ? "{N < y < w(x)}" : "{dist(x, boundary) <= 1/N}";

    const Interval I = omega.as_interval();
    auto weight_at = [w, omega](double x) { return w.density(omega, Point{x}); };
    auto map = [fx, fy](const ChartPoint& z, double t) {
        const double args[3] = {z[0], z[1], t};
        return ChartPoint{fx.eval(args), fy.eval(args)};
    };
    cert.image = map;

    const std::vector<double> bps = detail::singular_breakpoints(w);
    cert.sample_omega_N = [=](double N) {
        std::vector<double> xs;
        const bool fa = std::isfinite(I.a), fb = std::isfinite(I.b);
        const double mid = fa && fb ? 0.5 * (I.a + I.b) : (fa ? I.a + 1.0 : (fb ? I.b - 1.0 : 0.0));
        const double W = fa && fb ? 0.5 * (I.b - I.a) : 1.0;
        // stop well above the subnormal range so user maps keep headroom
        for (int k = 1; k <= 990; ++k) {
            const double d = W * std::ldexp(1.0, -k);
            if (fa) xs.push_back(I.a + d);
            if (fb) xs.push_back(I.b - d);
            for (double p : bps) {
                xs.push_back(p - d * (1.0 + std::fabs(p)));
                xs.push_back(p + d * (1.0 + std::fabs(p)));
            }
        }
        for (int k = 1; k < 64; ++k) xs.push_back(mid - W + 2.0 * W * k / 64.0);
        std::vector<double> keep;
        for (double x : xs) {
            if (!omega.contains(Point{x})) continue;
            if (high) {
                const double v = weight_at(x);
                if (std::isfinite(v) && v > N) keep.push_back(x);
            } else if (omega.boundary_distance(Point{x}) <= 1.0 / N) {
                keep.push_back(x);
            }
        }
        std::vector<ChartPoint> pts;
        if (keep.empty()) return pts;
        const std::size_t stride = std::max<std::size_t>(1, keep.size() / spec.base_points);
        for (std::size_t i = 0; i < keep.size(); i += stride) {
            const double x = keep[i], v = weight_at(x);
            for (double s : {1e-9, 0.25, 0.5, 0.75, 0.999}) {
                const double y = high ? N + s * (v - N) : s * v;
                if (y > 0 && y < v) pts.push_back({x, y});
            }
        }
        return pts;
    };

    cert.log_det = [map](const ChartPoint& z, double t) {
        double J[2][2];
        for (int j = 0; j < 2; ++j) {
            const double h = 1e-5 * (z[j] != 0.0 ? std::fabs(z[j]) : 1.0);
            ChartPoint a = z, b = z;
            a[j] += h;
            b[j] -= h;
            const ChartPoint pa = map(a, t), pb = map(b, t);
            for (int i = 0; i < 2; ++i) J[i][j] = (pa[i] - pb[i]) / (2.0 * h);
        }
        const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        return det > 0 ? std::log(det) : std::nan("");
    };
    cert.dphi_dt_norm = [map](const ChartPoint& z, double t) {
        const double h = 1e-5 * std::max(1.0, std::fabs(t));
        const ChartPoint a = map(z, t + h), b = map(z, t - h);
        return std::hypot((a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h));
    };
    cert.in_flow_domain = [map, omega, weight_at](const ChartPoint& z, double t) {
        const ChartPoint p = map(z, t);
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !omega.contains(Point{p[0]})) return false;
        return 0.0 < p[1] && p[1] < weight_at(p[0]);
    };
    cert.hypotheses.push_back({"flow_expressions_parse", true, "x' = " + spec.x_map + ", y' = " + spec.y_map});
    return cert;
}

namespace detail {

// r-grid on (0, hi]: uniform points plus dyadic layers toward 0.
inline std::vector<double> profile_grid(double hi, int layers = 60, int uniform = 2000) {
    std::vector<double> r;
    for (int k = layers; k >= 1; --k) r.push_back(hi * std::ldexp(1.0, -k));
    for (int k = 1; k <= uniform; ++k) r.push_back(hi * k / uniform);
    std::sort(r.begin(), r.end());
    return r;
}

inline Hypothesis check_positive(const Profile& f, const std::vector<double>& r) {
    for (double x : r) {
        // under- or overflow is fine as long as log f is defined
        const double v = f(x);
        if (!(v > 0) && !std::isfinite(f.log_at(x)))
            return {"positive", false, "f(" + std::to_string(x) + ") = " + std::to_string(v)};
    }
    return {"positive", true, "sampled on " + std::to_string(r.size()) + " points"};
}

// Closed-form monotonicity when known, otherwise sampled on the sorted grid.
inline Hypothesis check_monotone(const Profile& f, const std::vector<double>& r, bool increasing, bool strict,
                                 const std::string& name) {
    const Monotonicity m = f.monotonicity(r.front(), r.back());
    if (m != Monotonicity::Unknown) {
        const bool ok = increasing ? (m == Monotonicity::Increasing || (!strict && m == Monotonicity::Constant))
                                   : (m == Monotonicity::Decreasing || (!strict && m == Monotonicity::Constant));
        return {name, ok, "closed form"};
    }
    for (std::size_t k = 1; k < r.size(); ++k) {
        const double a = f(r[k - 1]), b = f(r[k]);
        const bool ok = increasing ? (strict ? b > a : b >= a * (1.0 - 1e-12))
                                   : (strict ? b < a : b <= a * (1.0 + 1e-12));
        if (!ok)
            return {name, false, "sampled violation between r = " + std::to_string(r[k - 1]) + " and " +
                                     std::to_string(r[k])};
    }
    return {name, true, "sampled on " + std::to_string(r.size()) + " points"};
}

inline void require(const Hypothesis& h, const std::string& hint = "") {
    if (!h.passed) throw PresetInapplicable(h.name, h.detail + hint);
}

inline std::vector<double> geometric_N(double first, double factor, int count) {
    std::vector<double> N;
    for (int k = 0; k < count; ++k) N.push_back(first * std::pow(factor, k));
    return N;
}

}  // namespace detail

/// Boundary-profile flow Phi(xi, r, y, t) = (xi, r + t, f(r+t)/f(r) y) in
/// the tubular chart, with chart points (r, s), s = y / f(r).
inline FlowCertificate preset_boundary_profile(const Profile& f, const Domain& omega) {
    const double a = omega.tubular_depth();
    if (!std::isfinite(a)) throw PresetInapplicable("bounded_domain", "the boundary-profile flow needs a bounded domain");
    const std::vector<double> grid = detail::profile_grid(a);
    FlowCertificate cert;
    cert.preset = "boundary_profile";
    cert.flow = "(xi, r + t, f(r+t)/f(r) y)";
    cert.exhaustion = "(V_w)_N = {0 < r <= 1/N}";
    cert.truncation_compactness = "cone property of the truncated subgraph";
    cert.c = 0.5 * a;

    Hypothesis pos = detail::check_positive(f, grid);
    detail::require(pos);
    Hypothesis mono = detail::check_monotone(f, grid, true, false, "nondecreasing");
    detail::require(mono, "; route through equivalence_reduce with a monotone reference");

    Hypothesis dbound{"bounded_derivative", true, ""};
    double fprime_sup = 0.0;
    if (f.kind() == ProfileKind::Power) {
        const double al = f.exponent();
        if (al >= 1.0) {
            fprime_sup = std::fabs(f.coef() * al * std::pow(a, al - 1.0));
            dbound.detail = "closed form, sup f' = " + std::to_string(fprime_sup);
        } else if (al > 0.0) {
            dbound = {"bounded_derivative", false, "f' = c a r^(a-1) diverges at 0+"};
        }
    } else {
        // dyadic layers toward 0: unbounded when the layer maxima keep growing
        std::vector<double> layers;
        for (int k = 0; k <= 60; ++k) {
            const double r = a * std::ldexp(1.0, -k);
            double m = 0.0;
            for (double q : {1.0, 0.875, 0.75, 0.625}) m = std::max(m, std::fabs(f.derivative(q * r)));
            layers.push_back(m);
            fprime_sup = std::max(fprime_sup, m);
        }
        for (double r : grid) fprime_sup = std::max(fprime_sup, std::fabs(f.derivative(r)));
        // unbounded: layer maxima still rising and more than doubled since layer 20
        bool rising = true;
        for (std::size_t k = layers.size() - 10; k < layers.size(); ++k) rising = rising && layers[k] > layers[k - 1];
        if (!std::isfinite(fprime_sup) || (rising && layers.back() > 2.0 * layers[20])) dbound = {"bounded_derivative", false, "sampled f' grows without bound toward 0"};
        else dbound.detail = "sampled sup f' = " + std::to_string(fprime_sup);
    }
    detail::require(dbound);

    Hypothesis vanish{"vanishes_at_0", false, ""};
    if (f.kind() == ProfileKind::Power) {
        vanish = {"vanishes_at_0", f.exponent() > 0.0, "closed form"};
    } else {
        std::vector<double> seq;
        for (int k = 0; k <= 1000; k += 50) seq.push_back(f(a * std::ldexp(1.0, -k)));
        vanish = {"vanishes_at_0", tends_to_zero(seq), "sampled f(a 2^-k), k <= 1000"};
    }
    detail::require(vanish);
    cert.hypotheses = {pos, mono, dbound, vanish};

    double N0 = 1.0;
    while (!(1.0 / N0 < 0.5 * a)) N0 *= 10.0;
    cert.N_grid = detail::geometric_N(N0, 10.0, 6);
    cert.sample_omega_N = [](double N) {
        std::vector<ChartPoint> pts;
        for (int k = 0; k <= 80; ++k) {
            const double r = std::ldexp(1.0 / N, 0) * std::pow(2.0, -k / 4.0);
            for (double s : {1e-6, 0.25, 0.5, 0.75, 1.0 - 1e-6}) pts.push_back({r, s});
        }
        return pts;
    };
    cert.log_det = [f](const ChartPoint& z, double t) { return f.log_shift_ratio(z[0], t); };
    cert.dphi_dt_norm = [f](const ChartPoint& z, double t) { return std::hypot(1.0, f.derivative(z[0] + t) * z[1]); };
    cert.in_flow_domain = [a](const ChartPoint& z, double t) {
        return z[0] + t > 0.0 && z[0] + t < a && z[1] > 0.0 && z[1] < 1.0;
    };
    cert.image = [](const ChartPoint& z, double t) { return ChartPoint{z[0] + t, z[1]}; };
    cert.monotone_structure = true;
    if (f.kind() == ProfileKind::Power) {
        cert.closed_form = true;
        cert.closed_dN = [f](double N, double t) { return std::exp(-f.log_shift_ratio(1.0 / N, t)); };
        cert.closed_M = std::sqrt(1.0 + fprime_sup * fprime_sup);
    }
    cert.notes.push_back("tangential coordinate xi is untouched by the flow; every boundary face uses the same chart");
    return cert;
}

/// Result of the radial preset: a certificate when the ratio condition
/// holds, the surface-ratio verdict when the ratio stays away from 0.
struct RadialOutcome {
    std::optional<FlowCertificate> certificate;
    std::optional<CheckResult> noncompact;
    std::vector<Hypothesis> hypotheses;
    std::vector<std::pair<double, double>> ratio_limits;  // (eps, lim g(s+eps)/g(s))
    bool ratio_closed_form = false;
};

/// Radial flow Phi(r, theta, y, t) = (r - t, theta, g(r-t)/g(r) y) on R^n,
/// chart points (r, s), s = y / g(r).
inline RadialOutcome preset_radial(const Profile& g, int n) {
    if (n < 1 || n > kMaxDim) throw DomainError("dimension must be 1..3");
    RadialOutcome out;
    std::vector<double> grid;
    for (int k = 0; k <= 4096; ++k) grid.push_back(64.0 * k / 4096.0);
    grid.front() = 0.0;
    Hypothesis pos = detail::check_positive(g, grid);
    detail::require(pos);
    Hypothesis mono = detail::check_monotone(g, grid, false, false, "nonincreasing");
    detail::require(mono);
    Hypothesis dbound{"bounded_derivative", true, ""};
    double gsup = 0.0;
    switch (g.kind()) {
        case ProfileKind::Gaussian: gsup = std::fabs(g.coef()) * std::sqrt(2.0 * g.exponent()) * std::exp(-0.5); break;
        case ProfileKind::Exp:
        case ProfileKind::ShiftedPower: gsup = std::fabs(g.coef() * g.exponent()); break;
        case ProfileKind::Power:
            if (g.exponent() != 0.0) dbound = {"bounded_derivative", false, "power profile is singular at r = 0"};
            break;
        default:
            for (double r : grid) gsup = std::max(gsup, std::fabs(g.derivative(r)));
            if (!std::isfinite(gsup) || gsup > 1e12) dbound = {"bounded_derivative", false, "sampled |g'| unbounded"};
    }
    if (dbound.passed) dbound.detail = "sup |g'| = " + std::to_string(gsup);
    detail::require(dbound);
    out.hypotheses = {pos, mono, dbound};

    bool holds = true, away = true;
    if (g.analytic() && g.ratio_limit_at_infinity(1.0)) {
        out.ratio_closed_form = true;
        for (double eps : {0.25, 0.5, 1.0, 2.0}) {
            const double L = *g.ratio_limit_at_infinity(eps);
            out.ratio_limits.emplace_back(eps, L);
            holds = holds && L == 0.0;
            away = away && L > 0.0;
        }
    } else {
        for (double eps : {0.25, 0.5, 1.0, 2.0}) {
            std::vector<double> seq;
            for (double s : {8.0, 16.0, 32.0, 64.0, 128.0, 256.0}) seq.push_back(std::exp(g.log_shift_ratio(s, eps)));
            out.ratio_limits.emplace_back(eps, seq.back());
            holds = holds && tends_to_zero(seq);
            away = away && seq.back() > 1e-3;
        }
    }
    if (!holds) {
        if (!away) throw PresetInapplicable("ratio_condition", "ratio g(s+eps)/g(s) neither tends to 0 nor stays away from 0");
        const Domain dom = n == 1 ? Domain::real_line() : Domain::full_space(n);
        const std::vector<double> radii = n == 1 ? std::vector<double>{4, 8, 12, 16, 24, 32, 48, 64}
                                                 : std::vector<double>{2, 3, 4, 6, 8, 12, 16, 24};
        out.noncompact = surface_ratio_limit(Weight::radial(g), dom, 1.0, radii);
        // growing sphere areas (n >= 2, slow decay): infinite volume decides instead
        if (out.noncompact->status != CheckStatus::Decided)
            out.noncompact = finite_volume_check(Weight::radial(g), dom);
        return out;
    }

    FlowCertificate cert;
    cert.preset = "radial";
    cert.flow = "(r - t, theta, g(r-t)/g(r) y)";
    cert.exhaustion = "{|x| >= N}";
    cert.truncation_compactness = "cone property of the bounded truncations";
    cert.c = 1.0;
    cert.N_grid = detail::geometric_N(2.0, 2.0, 12);
    cert.hypotheses = out.hypotheses;
    cert.hypotheses.push_back({"ratio_condition", true, out.ratio_closed_form ? "closed form" : "sampled trend"});
    const double m = n - 1.0;
    auto log_det = [g, m](double r, double t) { return m * std::log1p(-t / r) + g.log_shift_ratio(r, -t); };
    cert.sample_omega_N = [](double N) {
        std::vector<ChartPoint> pts;
        for (double q : {0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0})
            for (double s : {1e-6, 0.25, 0.5, 0.75, 1.0 - 1e-6}) pts.push_back({N * (1.0 + q), s});
        return pts;
    };
    cert.log_det = [log_det](const ChartPoint& z, double t) { return log_det(z[0], t); };
    cert.dphi_dt_norm = [g](const ChartPoint& z, double t) { return std::hypot(1.0, g.derivative(z[0] - t) * z[1]); };
    cert.in_flow_domain = [](const ChartPoint& z, double t) { return z[0] - t > 0.0 && z[1] > 0.0 && z[1] < 1.0; };
    cert.image = [](const ChartPoint& z, double t) { return ChartPoint{z[0] - t, z[1]}; };
    cert.monotone_structure = true;
    if (g.kind() == ProfileKind::Gaussian) {
        // log det increases in r, so the supremum of 1/det sits at r = N
        cert.closed_form = true;
        cert.closed_dN = [log_det](double N, double t) { return std::exp(-log_det(N, t)); };
        cert.closed_M = std::sqrt(1.0 + gsup * gsup);
    }
    out.certificate = std::move(cert);
    return out;
}

namespace detail {

// Shared construction for the two singular presets; `power` is 1 at a
// boundary and n at an interior point (det J Phi_t = lambda^power).
inline FlowCertificate singular_flow(const Profile& f, double delta, double power, const std::string& name) {
    const std::vector<double> grid = profile_grid(delta, 200, 2000);
    Hypothesis pos = check_positive(f, grid);
    require(pos);
    Hypothesis blow{"blows_up_at_0", false, ""};
    switch (f.kind()) {
        case ProfileKind::Power: blow = {"blows_up_at_0", f.exponent() < 0.0, "closed form"}; break;
        case ProfileKind::LogPower:
        case ProfileKind::ExpInverse: blow = {"blows_up_at_0", f.exponent() > 0.0, "closed form"}; break;
        case ProfileKind::Expr: {
            bool inc = true;
            double prev = f(0.5 * delta);
            for (int k = 2; k <= 1000; ++k) {
                const double v = f(delta * std::ldexp(1.0, -k));
                inc = inc && v > prev;
                prev = v;
            }
            blow = {"blows_up_at_0", inc && prev >= 10.0 * f(0.5 * delta), "sampled growth toward 0"};
            break;
        }
        default: blow = {"blows_up_at_0", false, "profile is bounded near 0"};
    }
    require(blow);
    Hypothesis mono = check_monotone(f, grid, false, true, "strictly_decreasing");
    require(mono);
    double inf_slope = std::numeric_limits<double>::infinity();
    for (double r : grid) inf_slope = std::min(inf_slope, std::fabs(f.derivative(r)));
    Hypothesis slope{"slope_bounded_below", inf_slope > 0.0, "C = " + std::to_string(1.0 / inf_slope)};
    require(slope);

    const double y_floor = f(delta);
    Hypothesis ratio{"inverse_ratio", true, ""};
    if (auto L = f.inverse_ratio_limit(1.0)) {
        for (double eps : {0.25, 0.5, 1.0, 2.0})
            if (*f.inverse_ratio_limit(eps) != 0.0)
                ratio = {"inverse_ratio", false,
                         "lim f^-1(y+eps)/f^-1(y) = " + std::to_string(*f.inverse_ratio_limit(eps)) + " for eps = " +
                             std::to_string(eps)};
        if (ratio.passed) ratio.detail = "closed form limit 0";
    } else if (f.kind() == ProfileKind::Expr) {
        std::vector<double> seq;
        for (int k = 1; k <= 8; ++k) {
            const double y = 2.0 * y_floor * std::pow(2.0, k);
            seq.push_back(std::exp(f.log_inverse(y + 1.0, 1e-300, delta) - f.log_inverse(y, 1e-300, delta)));
        }
        ratio = {"inverse_ratio", tends_to_zero(seq), "sampled trend"};
    } else {
        ratio = {"inverse_ratio", false, "no closed-form inverse ratio"};
    }
    if (!ratio.passed && f.kind() == ProfileKind::Power)
        ratio.detail += "; the flow does not apply to power singularities, whose compactness is settled in the "
                        "literature by other means";
    require(ratio);

    FlowCertificate cert;
    cert.preset = name;
    cert.exhaustion = "(V_w)_N = {y >= N}";
    cert.truncation_compactness = "cone property of the truncated subgraph";
    cert.c = 1.0;
    double N0 = 2.0;
    while (!(N0 - cert.c > y_floor * (1.0 + 1e-9))) N0 *= 2.0;
    cert.N_grid = geometric_N(N0, 2.0, 12);
    cert.hypotheses = {pos, blow, mono, slope, ratio};
    const double log_delta = std::log(delta);
    auto linv = [f, delta](double y) { return f.log_inverse(y, 1e-300, delta); };
    cert.sample_omega_N = [](double N) {
        std::vector<ChartPoint> pts;
        for (double q : {0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 3.0})
            for (double s : {1e-6, 0.25, 0.5, 0.75, 1.0 - 1e-6}) pts.push_back({s, N * (1.0 + q)});
        return pts;
    };
    cert.log_det = [f, delta, power](const ChartPoint& z, double t) {
        return power * f.log_inverse_shift(z[1], -t, 1e-300, delta);
    };
    cert.dphi_dt_norm = [f, delta](const ChartPoint& z, double t) {
        return std::hypot(1.0, z[0] * f.inverse_derivative_abs(z[1] - t, 1e-300, delta));
    };
    cert.in_flow_domain = [linv, log_delta](const ChartPoint& z, double t) {
        return z[1] - t > 0.0 && z[0] > 0.0 && z[0] < 1.0 && std::log(z[0]) + linv(z[1] - t) < log_delta;
    };
    cert.image = [](const ChartPoint& z, double t) { return ChartPoint{z[0], z[1] - t}; };
    cert.monotone_structure = true;
    if (f.kind() == ProfileKind::LogPower) {
        // log f^-1(y) - log f^-1(y - t) decreases in y for exponent < 1
        cert.closed_form = true;
        cert.closed_dN = [f, delta, power](double N, double t) {
            return std::exp(-power * f.log_inverse_shift(N, -t, 1e-300, delta));
        };
        cert.closed_M = std::hypot(1.0, f.inverse_derivative_abs(N0 - cert.c, 1e-300, delta));
    }
    cert.notes.push_back("chart points (sigma, y) with r = sigma f^-1(y)");
    cert.notes.push_back("slope constant recorded only: " + slope.detail);
    return cert;
}

}  // namespace detail

/// Flow (xi, f^-1(y-t)/f^-1(y) r, y - t) for weights blowing up at the boundary.
inline FlowCertificate preset_singular_boundary(const Profile& f, const Domain& omega) {
    const double a = omega.tubular_depth();
    if (!std::isfinite(a)) throw PresetInapplicable("bounded_domain", "the singular-boundary flow needs a bounded domain");
    FlowCertificate cert = detail::singular_flow(f, a, 1.0, "singular_boundary");
    cert.flow = "(xi, f^-1(y-t)/f^-1(y) r, y - t)";
    return cert;
}

/// Point version: x -> f^-1(y-t)/f^-1(y) x around `center`, det = lambda^n.
inline FlowCertificate preset_singular_point(const Profile& f, const Domain& omega, const Point& center) {
    if (!omega.contains(center)) throw DomainError("singular point must lie in the domain");
    double delta = 0.5 * omega.boundary_distance(center);
    if (!std::isfinite(delta)) delta = 0.5;
    FlowCertificate cert = detail::singular_flow(f, delta, omega.dim(), "singular_point");
    cert.flow = "(f^-1(y-t)/f^-1(y) x, y - t)";
    cert.notes.push_back("ball of radius " + std::to_string(delta) + " around " + center.str());
    return cert;
}

/// The log weight on (-1/2, 1/2): 1 for x <= 0, (log 1/x)^{1/2} for x > 0.
inline Weight log_example_weight() {
    return Weight::piecewise(0.0, Weight::constant(1.0), Weight::radial(Profile::log_power(1.0, 0.5)));
}

/// Flow (e^{-(y-t)^2 + y^2} x, y - t) on the part of the subgraph over
/// x > 0; chart points (sigma, y) with x = sigma e^{-y^2}.
inline FlowCertificate preset_log_example() {
    FlowCertificate cert;
    cert.preset = "log_example";
    cert.flow = "(e^{-(y-t)^2} / e^{-y^2} x, y - t)";
    cert.exhaustion = "(Omega+_w)_N = {N < y < w(x)}";
    cert.truncation_compactness = "cone property; the part over x < 0 has the cone property as well";
    cert.c = 0.5;
    cert.N_grid = detail::geometric_N(2.0, 2.0, 12);
    cert.hypotheses = {{"weight", true, "1 for x <= 0, (log 1/x)^{1/2} for x > 0 on (-1/2, 1/2)"}};
    cert.sample_omega_N = [](double N) {
        std::vector<ChartPoint> pts;
        for (double q : {0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0})
            for (double s : {1e-6, 0.25, 0.5, 0.75, 1.0 - 1e-6}) pts.push_back({s, N * (1.0 + q)});
        return pts;
    };
    cert.log_det = [](const ChartPoint& z, double t) { return t * (2.0 * z[1] - t); };
    cert.dphi_dt_norm = [](const ChartPoint& z, double t) {
        const double u = z[1] - t;
        return std::hypot(1.0, z[0] * 2.0 * u * std::exp(-u * u));
    };
    cert.in_flow_domain = [](const ChartPoint& z, double t) {
        const double u = z[1] - t;
        return u > 0.0 && z[0] > 0.0 && z[0] < 1.0 && std::log(z[0]) - u * u < std::log(0.5);
    };
    cert.image = [](const ChartPoint& z, double t) { return ChartPoint{z[0], z[1] - t}; };
    cert.closed_dN = [](double N, double t) { return std::exp(-t * (2.0 * N - t)); };
    cert.closed_M = std::sqrt(1.0 + 2.0 / std::exp(1.0));
    cert.closed_form = true;
    cert.monotone_structure = true;
    return cert;
}

}  // namespace wsemb
