#pragma once

#include <wsemb/core.hpp>
#include <wsemb/domain.hpp>
#include <wsemb/quadrature.hpp>
#include <wsemb/weight.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

namespace wsemb {

/// Regions U whose weighted measure mu_w(U ∩ Omega) can be requested.
/// Shells and tails are taken about the origin, as in the decay tests.
struct WholeDomain {};
struct BoxRegion { Point lo, hi; };
struct BallRegion { Point center; double radius; };
struct ShellRegion { double inner, outer; };  // inner <= |x| <= outer
struct TailRegion { double radius; };         // |x| > radius
using Region = std::variant<WholeDomain, BoxRegion, BallRegion, ShellRegion, TailRegion>;

/// Area of the unit sphere S^{n-1}: 2 (n=1), 2π (n=2), 4π (n=3).
inline double unit_sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace detail {

// interior points where the weight may be singular (1-d)
inline std::vector<double> singular_breakpoints(const Weight& w) {
    std::vector<double> b;
    for (const auto& p : w.zero_set()) b.push_back(p[0]);
    for (const auto& p : w.infinity_set()) b.push_back(p[0]);
    if (auto* pw = std::get_if<Weight::Piecewise>(&w.data())) b.push_back(pw->breakpoint);
    if (auto* ps = std::get_if<Weight::PointSingular>(&w.data())) b.push_back(ps->center[0]);
    return b;
}

inline std::pair<double, double> intersect(double a, double b, double c, double d) {
    return {std::max(a, c), std::min(b, d)};
}

// 1-d region as a union of intervals
inline std::vector<std::pair<double, double>> region_intervals_1d(const Region& U) {
    const double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        [&](const auto& u) -> std::vector<std::pair<double, double>> {
            using T = std::decay_t<decltype(u)>;
            if constexpr (std::is_same_v<T, WholeDomain>) return {{-inf, inf}};
            else if constexpr (std::is_same_v<T, BoxRegion>) return {{u.lo[0], u.hi[0]}};
            else if constexpr (std::is_same_v<T, BallRegion>)
                return {{u.center[0] - u.radius, u.center[0] + u.radius}};
            else if constexpr (std::is_same_v<T, ShellRegion>)
                return {{-u.outer, -u.inner}, {u.inner, u.outer}};
            else return {{-inf, -u.radius}, {u.radius, inf}};
        },
        U);
}

// ∫_{S^{n-1}} h(θ) dθ for n = 2, 3
template <class H>
double sphere_integral(const H& h, int n, const QuadratureOptions& o) {
    if (n == 2) {
        auto f = [&](double th) { return h(Point{std::cos(th), std::sin(th)}); };
        auto r = adaptive_gk(f, 0.0, 2.0 * std::numbers::pi, o.abs_tol * 1e-2, o.rel_tol, o.max_cells);
        return r.value.as_double();
    }
    auto f = [&](const Point& q) {
        const double phi = q[0], u = q[1];
        const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        return h(Point{s * std::cos(phi), s * std::sin(phi), u});
    };
    QuadratureOptions inner = o;
    inner.abs_tol = o.abs_tol * 1e-2;
    inner.trace = nullptr;
    try {
        return integrate_box(f, Point{0.0, -1.0}, Point{2.0 * std::numbers::pi, 1.0}, inner).value.as_double();
    } catch (const BudgetExceeded& e) {
        return e.best_estimate;
    }
}

}  // namespace detail

/// Integral of an integrand F over U ∩ Omega. `breakpoints` (1-d) mark
/// interior singular points.
template <class F>
MeasureResult integrate_region(const F& integrand, const Domain& omega, const Region& U,
                               const QuadratureOptions& opts, const std::vector<double>& breakpoints = {}) {
    QuadratureOptions o = opts;
    o.truncation_radius = omega.truncation_radius();
    const int n = omega.dim();
    if (n == 1) {
        const double inf = std::numeric_limits<double>::infinity();
        double a = -inf, b = inf;
        if (omega.is_interval()) {
            a = omega.as_interval().a;
            b = omega.as_interval().b;
        } else {
            const Box bb = omega.bounding_box();
            a = bb.lo[0];
            b = bb.hi[0];
        }
        auto g = [&](double x) {
            const Point p{x};
            if (!omega.is_interval() && !omega.contains(p)) return 0.0;
            return integrand(p);
        };
        MeasureResult total;
        total.value = Extended(0.0);
        total.converged = true;
        for (auto [l, u] : detail::region_intervals_1d(U)) {
            auto [lo, hi] = detail::intersect(l, u, a, b);
            if (!(hi > lo)) continue;
            MeasureResult part = integrate_1d(g, lo, hi, o, breakpoints);
            total.cells_used += part.cells_used;
            if (part.divergent()) {
                total.value = Extended::infinity();
                total.converged = false;
                return total;
            }
            total.value = Extended(total.value.value() + part.value.value());
            total.error_bound += part.error_bound;
        }
        return total;
    }

    const bool centered_ball_domain = [&] {
        if (auto* b = std::get_if<Ball>(&omega.shape())) return b->center.norm() == 0.0;
        return omega.is_full_space();
    }();
    auto in_omega = [&](const Point& x) { return omega.is_full_space() || omega.contains(x); };

    // polar route about `center` over radii [r0, r1]
    auto polar = [&](const Point& center, double r0, double r1) {
        if (centered_ball_domain && center.norm() == 0.0) {
            if (auto* b = std::get_if<Ball>(&omega.shape())) r1 = std::min(r1, b->radius);
        }
        auto radial = [&](double s) {
            if (s <= 0.0) return 0.0;
            auto h = [&](const Point& th) {
                const Point x = center + s * th;
                if (!in_omega(x)) return 0.0;
                return integrand(x);
            };
            return std::pow(s, n - 1) * detail::sphere_integral(h, n, o);
        };
        return integrate_1d(radial, r0, r1, o);
    };

    return std::visit(
        [&](const auto& u) -> MeasureResult {
            using T = std::decay_t<decltype(u)>;
            const double inf = std::numeric_limits<double>::infinity();
            if constexpr (std::is_same_v<T, WholeDomain>) {
                if (omega.is_full_space()) return polar(Point(n), 0.0, inf);
                if (auto* b = std::get_if<Ball>(&omega.shape())) return polar(b->center, 0.0, b->radius);
                const Box bb = omega.bounding_box();
                return integrate_region(integrand, omega, BoxRegion{bb.lo, bb.hi}, opts, breakpoints);
            } else if constexpr (std::is_same_v<T, BoxRegion>) {
                Point lo = u.lo, hi = u.hi;
                const bool boxy = omega.is_full_space() || std::holds_alternative<Box>(omega.shape());
                if (std::holds_alternative<Box>(omega.shape())) {
                    const Box& ob = std::get<Box>(omega.shape());
                    for (int i = 0; i < n; ++i) {
                        lo[i] = std::max(lo[i], ob.lo[i]);
                        hi[i] = std::min(hi[i], ob.hi[i]);
                    }
                }
                if (boxy) return integrate_box(integrand, lo, hi, o);
                auto masked = [&](const Point& x) { return omega.contains(x) ? integrand(x) : 0.0; };
                return integrate_box(masked, lo, hi, o);
            } else if constexpr (std::is_same_v<T, BallRegion>) {
                return polar(u.center, 0.0, u.radius);
            } else if constexpr (std::is_same_v<T, ShellRegion>) {
                return polar(Point(n), u.inner, u.outer);
            } else {
                return polar(Point(n), u.radius, inf);
            }
        },
        U);
}

/// mu_w(U ∩ Omega) by adaptive quadrature; the marker on certified
/// divergence. Throws BudgetExceeded when the tolerance is unreachable.
inline MeasureResult weighted_measure(const Weight& w, const Domain& omega, const Region& U,
                                      const QuadratureOptions& opts = {}) {
    const int n = omega.dim();
    // radial weights on balls/shells/tails about the origin reduce to 1-d
    if (n >= 2 && omega.is_full_space()) {
        if (auto g = w.radial_profile()) {
            auto radial_1d = [&](double r0, double r1) {
                QuadratureOptions o = opts;
                o.truncation_radius = omega.truncation_radius();
                const double c = unit_sphere_area(n);
                auto f = [&](double s) { return c * std::pow(s, n - 1) * (*g)(s); };
                return integrate_1d(f, r0, r1, o);
            };
            const double inf = std::numeric_limits<double>::infinity();
            if (std::holds_alternative<WholeDomain>(U)) return radial_1d(0.0, inf);
            if (auto* s = std::get_if<ShellRegion>(&U)) return radial_1d(s->inner, s->outer);
            if (auto* t = std::get_if<TailRegion>(&U)) return radial_1d(t->radius, inf);
            if (auto* b = std::get_if<BallRegion>(&U); b && b->center.norm() == 0.0)
                return radial_1d(0.0, b->radius);
        }
    }
    auto f = [&](const Point& x) { return w.density(omega, x); };
    return integrate_region(f, omega, U, opts, n == 1 ? detail::singular_breakpoints(w) : std::vector<double>{});
}

/// mu_w(Omega_r), Omega_r = {x in Omega : |x| > r}.
inline MeasureResult tail_measure(const Weight& w, const Domain& omega, double r,
                                  const QuadratureOptions& opts = {}) {
    if (!(r >= 0)) throw DomainError("tail radius must be >= 0");
    return weighted_measure(w, omega, TailRegion{r}, opts);
}

/// mu_w({x in Omega : r - eps <= |x| <= r}).
inline MeasureResult shell_measure(const Weight& w, const Domain& omega, double r, double eps,
                                   const QuadratureOptions& opts = {}) {
    if (!(eps > 0)) throw DomainError("shell width must be > 0");
    return weighted_measure(w, omega, ShellRegion{std::max(0.0, r - eps), r}, opts);
}

enum class SurfaceMethod { RadialClosedForm, BoundarySum1d, LatticeShellNd };

inline const char* to_string(SurfaceMethod m) {
    switch (m) {
        case SurfaceMethod::RadialClosedForm: return "radial_closed_form";
        case SurfaceMethod::BoundarySum1d: return "boundary_sum_1d";
        case SurfaceMethod::LatticeShellNd: return "lattice_shell_nd";
    }
    return "?";
}

struct SurfaceArea {
    double radius;
    double value;
    SurfaceMethod method;
    bool outside_domain = false;  // S_r ∩ Omega empty
};

/// Weighted area A_r of S_r = {x in Omega : |x| = r}.
inline SurfaceArea weighted_surface_area(const Weight& w, const Domain& omega, double r,
                                         const QuadratureOptions& opts = {}, bool force_quadrature = false) {
    if (!(r > 0)) throw DomainError("surface radius must be > 0");
    const int n = omega.dim();
    if (n == 1) {
        double v = 0.0;
        bool any = false;
        for (double x : {r, -r}) {
            const Point p{x};
            if (omega.contains(p)) {
                any = true;
                v += w.density(omega, p);
            }
        }
        return {r, v, SurfaceMethod::BoundarySum1d, !any};
    }
    if (!force_quadrature && omega.is_full_space())
        if (auto g = w.radial_profile())
            return {r, unit_sphere_area(n) * std::pow(r, n - 1) * (*g)(r), SurfaceMethod::RadialClosedForm, false};
    bool any = false;
    auto h = [&](const Point& th) {
        const Point x = r * th;
        if (!(omega.is_full_space() || omega.contains(x))) return 0.0;
        any = true;
        return w.density(omega, x);
    };
    const double v = std::pow(r, n - 1) * detail::sphere_integral(h, n, opts);
    return {r, v, SurfaceMethod::LatticeShellNd, !any};
}

/// Test function u with gradient, as consumed by the norm computations.
struct TestFunction {
    std::function<double(const Point&)> value;
    std::function<Point(const Point&)> gradient;
    std::vector<double> breakpoints;  // 1-d kinks (grid nodes of sampled u)

    /// u from an expression in x, y, z; gradient by central differences.
    static TestFunction from_expression(const std::string& src) {
        Expression e(src, {"x", "y", "z"});
        TestFunction t;
        t.value = [e](const Point& p) {
            const double a[3] = {p[0], p.dim() > 1 ? p[1] : 0.0, p.dim() > 2 ? p[2] : 0.0};
            return e.eval(a);
        };
        auto v = t.value;
        t.gradient = [v](const Point& p) {
            Point g(p.dim());
            for (int i = 0; i < p.dim(); ++i) {
                const double h = 1e-5 * std::max(1.0, std::fabs(p[i]));
                Point a = p, b = p;
                a[i] += h;
                b[i] -= h;
                g[i] = (v(a) - v(b)) / (2.0 * h);
            }
            return g;
        };
        return t;
    }

    /// u from 1-d grid samples: piecewise linear, gradient by one-sided
    /// differences within each grid cell.
    static TestFunction from_samples(std::vector<double> grid, std::vector<double> values) {
        if (grid.size() != values.size() || grid.size() < 2)
            throw DomainError("sampled function needs matching grid and values (>= 2)");
        TestFunction t;
        auto locate = [grid](double x) {
            std::size_t k = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), x) - grid.begin());
            return std::clamp<std::size_t>(k, 1, grid.size() - 1) - 1;
        };
        t.value = [grid, values, locate](const Point& p) {
            const std::size_t k = locate(p[0]);
            const double s = (p[0] - grid[k]) / (grid[k + 1] - grid[k]);
            return values[k] + s * (values[k + 1] - values[k]);
        };
        t.gradient = [grid, values, locate](const Point& p) {
            const std::size_t k = locate(p[0]);
            return Point{(values[k + 1] - values[k]) / (grid[k + 1] - grid[k])};
        };
        t.breakpoints = grid;
        return t;
    }
};

struct SobolevNorms {
    Extended lp_norm;   // ||u||_{L^p(Omega,w)}
    Extended seminorm;  // ||∇u||_{L^p(Omega,w)}
};

/// Weighted L^p norm and gradient seminorm through the measure engine.
inline SobolevNorms sobolev_norms(const TestFunction& u, const Weight& w, const Domain& omega, double p,
                                  const QuadratureOptions& opts = {}) {
    if (!(p >= 1)) throw DomainError("p must be >= 1");
    std::vector<double> bps;
    if (omega.dim() == 1) {
        bps = detail::singular_breakpoints(w);
        bps.insert(bps.end(), u.breakpoints.begin(), u.breakpoints.end());
    }
    auto f_val = [&](const Point& x) {
        const double wx = w.density(omega, x);
        return std::pow(std::fabs(u.value(x)), p) * wx;
    };
    auto f_grad = [&](const Point& x) {
        const double wx = w.density(omega, x);
        return std::pow(u.gradient(x).norm(), p) * wx;
    };
    auto root = [p](const MeasureResult& m) {
        return m.divergent() ? Extended::infinity() : Extended(std::pow(m.value.value(), 1.0 / p));
    };
    return {root(integrate_region(f_val, omega, WholeDomain{}, opts, bps)),
            root(integrate_region(f_grad, omega, WholeDomain{}, opts, bps))};
}

}  // namespace wsemb
