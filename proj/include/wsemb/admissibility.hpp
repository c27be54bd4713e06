#pragma once

#include <wsemb/core.hpp>
#include <wsemb/domain.hpp>
#include <wsemb/measure.hpp>
#include <wsemb/quadrature.hpp>
#include <wsemb/weight.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace wsemb {

/// w(x) for x in Omega; DomainError outside.
inline Extended evaluate_weight(const Weight& w, const Domain& omega, const Point& x) {
    if (!omega.contains(x)) throw DomainError("point " + x.str() + " is outside " + omega.describe());
    return w.value(omega, x);
}

enum class AdmissibilityCondition { L1loc, EssSup };

inline const char* to_string(AdmissibilityCondition c) {
    return c == AdmissibilityCondition::L1loc ? "L1loc" : "ess_sup";
}

struct BallWitness {
    Point center;
    double radius = 0.0;
    Extended estimate;  // local integral (p > 1) or sampled sup of 1/w (p = 1)
};

struct AdmissibilityReport {
    double p = 2.0;
    AdmissibilityCondition condition = AdmissibilityCondition::L1loc;
    bool holds = true;
    BallWitness witness;
    int balls_checked = 0;
    int balls_skipped = 0;  // centers where the weight formula underflows
};

struct AdmissibilityOptions {
    int grid_points = 17;  // candidate centers per axis
    int shells = 48;       // dyadic shells toward each center (p = 1)
    QuadratureOptions quadrature{1e-8, 1e-8};
};

namespace detail {

// Candidate ball centers: an interior grid plus refined local minima of w
// and the declared zero set. Minima are where w^{-1/(p-1)} can blow up.
struct AdmissibilityCenters {
    std::vector<Point> grid, minima;
};

inline AdmissibilityCenters admissibility_centers(const Weight& w, const Domain& omega, int m) {
    const Box bb = omega.bounding_box();
    const int n = omega.dim();
    std::vector<Point> grid;
    int total = 1;
    for (int i = 0; i < n; ++i) total *= m;
    for (int k = 0; k < total; ++k) {
        Point x(n);
        int rem = k;
        for (int i = 0; i < n; ++i) {
            x[i] = bb.lo[i] + (rem % m + 0.5) / m * (bb.hi[i] - bb.lo[i]);
            rem /= m;
        }
        if (omega.contains(x) && !w.in_infinity_set(x)) grid.push_back(x);
    }
    std::vector<Point> minima;
    for (const auto& z : w.zero_set())
        if (omega.contains(z)) minima.push_back(z);
    // coordinate-wise golden-section refinement of grid local minima
    const double h0 = (bb.hi[0] - bb.lo[0]) / m;
    for (const auto& x : grid) {
        const double wx = w.density(omega, x);
        bool is_min = true;
        for (int i = 0; i < n && is_min; ++i)
            for (double sg : {-1.0, 1.0}) {
                Point y = x;
                y[i] += sg * h0;
                if (omega.contains(y) && w.density(omega, y) < wx) is_min = false;
            }
        if (!is_min) continue;
        Point c = x;
        bool interior = true;
        for (int sweep = 0; sweep < 2; ++sweep)
            for (int i = 0; i < n; ++i) {
                double lo = c[i] - h0, hi = c[i] + h0;
                auto f = [&](double t) {
                    Point y = c;
                    y[i] = t;
                    return omega.contains(y) ? w.density(omega, y) : std::numeric_limits<double>::infinity();
                };
                const double g = 0.5 * (std::sqrt(5.0) - 1.0);
                for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::fabs(lo)); ++it) {
                    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
                    if (f(a) <= f(b)) hi = b;
                    else lo = a;
                }
                c[i] = 0.5 * (lo + hi);
                // a minimum pinned to the bracket edge is not a local one
                if (std::fabs(c[i] - (x[i] - h0)) < 1e-9 * h0 || std::fabs(c[i] - (x[i] + h0)) < 1e-9 * h0)
                    interior = false;
            }
        if (interior && omega.contains(c) && omega.boundary_distance(c) > 1e-9 * h0) minima.push_back(c);
    }
    return {grid, minima};
}

inline constexpr double kUnderflow = 1e-200;

// w is representable at c +- d e_i for every axis i
inline bool isolated_dip(const Weight& w, const Domain& omega, const Point& c, double d) {
    for (int i = 0; i < c.dim(); ++i)
        for (double s : {-d, d}) {
            Point y = c;
            y[i] += s;
            if (!omega.contains(y) || !(w.density(omega, y) >= kUnderflow)) return false;
        }
    return true;
}

// largest radius keeping the closed ball inside Omega minus the infinity set
inline double admissible_radius(const Weight& w, const Domain& omega, const Point& c) {
    double r = 0.5 * omega.boundary_distance(c);
    if (!std::isfinite(r)) r = 1.0;
    for (const auto& q : w.infinity_set()) {
        const double d = distance(q, c);
        if (d <= 1e-14) return 0.0;
        r = std::min(r, 0.5 * d);
    }
    return r;
}

// 1/w is unbounded near the center if the log-increments of shell maxima
// stay positive and do not shrink (power-law growth).
inline bool shell_sup_unbounded(const std::vector<double>& sups) {
    for (double s : sups)
        if (std::isinf(s)) return true;
    const auto n = sups.size();
    if (n < 5) return false;
    double prev = std::log(sups[n - 3]) - std::log(sups[n - 4]);
    if (!(prev > 1e-12)) return false;
    for (std::size_t k = n - 2; k < n; ++k) {
        const double d = std::log(sups[k]) - std::log(sups[k - 1]);
        if (!(d > 1e-12) || d < 0.9 * prev) return false;
        prev = d;
    }
    return true;
}

}  // namespace detail

/// Local integrability of w^{-1/(p-1)} (p > 1) or local boundedness of 1/w
/// (p = 1) on a family of balls with closure in Omega minus the infinity set.
inline AdmissibilityReport admissibility_check(const Weight& w, const Domain& omega, double p,
                                               const AdmissibilityOptions& opts = {}) {
    if (!(p >= 1)) throw DomainError("p must be >= 1");
    AdmissibilityReport rep;
    rep.p = p;
    rep.condition = p > 1 ? AdmissibilityCondition::L1loc : AdmissibilityCondition::EssSup;
    const int n = omega.dim();
    double worst = -1.0;
    const auto cand = detail::admissibility_centers(w, omega, opts.grid_points);
    std::vector<Point> centers = cand.minima;
    centers.insert(centers.end(), cand.grid.begin(), cand.grid.end());
    for (const Point& c : centers) {
        const double rho = detail::admissible_radius(w, omega, c);
        if (!(rho > 0)) continue;
        // integrands are scaled by w(c) so e^{|x|^2}-type growth cannot
        // overflow; a tiny w(c) counts only as an isolated dip, otherwise the
        // center lies in an underflow region and its ball is skipped
        const double wc = w.density(omega, c);
        if (!w.in_zero_set(c) && wc < detail::kUnderflow && !detail::isolated_dip(w, omega, c, 0.5 * rho)) {
            ++rep.balls_skipped;
            continue;
        }
        const double scale = wc >= detail::kUnderflow && std::isfinite(wc) ? wc : 1.0;
        ++rep.balls_checked;
        Extended est;
        double log_scale_factor = 0.0;  // log of the factor undoing the scaling
        if (p > 1) {
            const double q = 1.0 / (p - 1.0);
            log_scale_factor = -q * std::log(scale);
            auto f = [&](const Point& x) {
                const double v = w.density(omega, x);
                return v > 0 ? std::pow(v / scale, -q) : std::numeric_limits<double>::infinity();
            };
            MeasureResult m;
            if (n == 1) {
                auto g = [&](double t) { return f(Point{t}); };
                std::vector<double> bps{c[0]};
                for (const auto& z : cand.minima) bps.push_back(z[0]);
                m = integrate_1d(g, c[0] - rho, c[0] + rho, opts.quadrature, bps);
            } else {
                m = integrate_region(f, Domain::full_space(n), BallRegion{c, rho}, opts.quadrature);
            }
            est = m.value;
        } else {
            // sampled sup of 1/w over dyadic shells toward the center
            std::vector<double> sups;
            double total = 0.0;
            for (int k = 0; k <= opts.shells; ++k) {
                const double s = rho * std::ldexp(1.0, -k);
                if (s < 1e-12 * (1.0 + c.norm())) break;
                double sup = 0.0;
                const int dirs = n == 1 ? 2 : 16;
                for (int d = 0; d < dirs; ++d)
                    for (double frac : {1.0, 0.75, 0.5}) {
                        Point u(n);
                        if (n == 1) u[0] = d == 0 ? 1.0 : -1.0;
                        else {
                            const double th = 2.0 * std::numbers::pi * d / dirs;
                            u[0] = std::cos(th);
                            u[1] = std::sin(th);
                            if (n == 3) {
                                u[2] = (d % 2 ? 0.5 : -0.5);
                                u = (1.0 / u.norm()) * u;
                            }
                        }
                        const double v = w.density(omega, c + (frac * s) * u);
                        sup = std::max(sup, v > 0 ? scale / v : std::numeric_limits<double>::infinity());
                    }
                sups.push_back(sup);
                total = std::max(total, sup);
            }
            log_scale_factor = -std::log(scale);
            total = std::max(total, wc > 0 ? scale / wc : std::numeric_limits<double>::infinity());
            est = (std::isinf(total) || detail::shell_sup_unbounded(sups)) ? Extended::infinity() : Extended(total);
        }
        if (est.is_infinite()) {
            rep.holds = false;
            rep.witness = {c, rho, est};
            return rep;
        }
        const double unscaled = est.value() * std::exp(log_scale_factor);
        if (std::isfinite(unscaled) && unscaled > worst) {
            worst = unscaled;
            rep.witness = {c, rho, Extended(unscaled)};
        }
    }
    return rep;
}

struct CompactBounds {
    double m, M;
    Point argmin, argmax;
};

/// Sampled (min, max) of w over the closed box K. Throws AssumptionViolation
/// at the first degenerate sample (<= 0 or the marker).
inline CompactBounds assert_compact_bounds(const Weight& w, const Domain& omega, const Box& K, int samples = 65) {
    const int n = K.lo.dim();
    if (n != omega.dim()) throw DomainError("compact box dimension does not match the domain");
    for (int i = 0; i < n; ++i)
        if (!(K.lo[i] <= K.hi[i])) throw DomainError("compact box requires lo <= hi");
    int total = 1;
    for (int i = 0; i < n; ++i) total *= samples;
    CompactBounds b{std::numeric_limits<double>::infinity(), 0.0, K.lo, K.lo};
    for (int k = 0; k < total; ++k) {
        Point x(n);
        int rem = k;
        for (int i = 0; i < n; ++i) {
            x[i] = K.lo[i] + (K.hi[i] - K.lo[i]) * (rem % samples) / (samples - 1);
            rem /= samples;
        }
        if (!omega.contains_closure(x)) throw DomainError("compact box leaves the domain at " + x.str());
        const Extended v = w.value(omega, x);
        if (v.is_infinite()) throw AssumptionViolation("weight is infinite outside the declared infinity set", x);
        if (!(v.value() > 0)) throw AssumptionViolation("weight vanishes outside the declared zero set", x);
        if (v.value() < b.m) b.m = v.value(), b.argmin = x;
        if (v.value() > b.M) b.M = v.value(), b.argmax = x;
    }
    return b;
}

struct EquivalenceViolation {
    Point at;
    double ratio;  // w / reference
};

/// Samples alpha * ref <= w <= beta * ref for an equivalent_to weight and
/// returns every violating point.
inline std::vector<EquivalenceViolation> check_equivalence_samples(const Weight& w, const Domain& omega,
                                                                   int samples = 257) {
    const auto* eq = std::get_if<Weight::EquivalentTo>(&w.data());
    if (!eq) throw DomainError("weight is not of the equivalent_to family");
    const Weight& actual = eq->actual_and_reference[0];
    const Weight& ref = eq->actual_and_reference[1];
    const Box bb = omega.bounding_box();
    const int n = omega.dim();
    const int m = n == 1 ? samples : (n == 2 ? 33 : 12);
    int total = 1;
    for (int i = 0; i < n; ++i) total *= m;
    std::vector<EquivalenceViolation> out;
    for (int k = 0; k < total; ++k) {
        Point x(n);
        int rem = k;
        for (int i = 0; i < n; ++i) {
            x[i] = bb.lo[i] + (rem % m + 0.5) / m * (bb.hi[i] - bb.lo[i]);
            rem /= m;
        }
        if (!omega.contains(x) || w.in_zero_set(x) || w.in_infinity_set(x)) continue;
        const double a = actual.density(omega, x), r = ref.density(omega, x);
        if (!(r > 0) || std::isinf(r) || std::isinf(a)) continue;
        const double ratio = a / r;
        if (ratio < eq->alpha * (1.0 - 1e-12) || ratio > eq->beta * (1.0 + 1e-12)) out.push_back({x, ratio});
    }
    return out;
}

}  // namespace wsemb
