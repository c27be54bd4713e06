#pragma once

#include <wsemb/core.hpp>
#include <wsemb/expression.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>

namespace wsemb {

struct Interval {
    double a, b;  // either may be infinite
};
struct Box {
    Point lo, hi;
};
struct Ball {
    Point center;
    double radius;
};
struct FullSpace {
    int dim;
    double truncation_radius = kDefaultTruncationRadius;
};
/// Bounded domain given by a boundary-distance function r(x) (> 0 inside)
/// and a tubular depth a; `bounds` encloses the domain.
struct BoundedSmooth {
    int dim;
    Expression distance;  // variables x, y, z
    double tubular_depth;
    Box bounds;
};

/// Which boundary pieces a boundary distance refers to (intervals only).
enum class Faces { Lower, Upper, Both };

class Domain {
public:
    using Shape = std::variant<Interval, Box, Ball, FullSpace, BoundedSmooth>;

    explicit Domain(Shape s) : shape_(std::move(s)) { validate(); }

    static Domain interval(double a, double b) { return Domain(Interval{a, b}); }
    static Domain half_line(double a) {
        return Domain(Interval{a, std::numeric_limits<double>::infinity()});
    }
    static Domain real_line() {
        const double inf = std::numeric_limits<double>::infinity();
        return Domain(Interval{-inf, inf});
    }
    static Domain full_space(int n, double truncation = kDefaultTruncationRadius) {
        if (n == 1) {
            Domain d = real_line();
            d.truncation_ = truncation;
            return d;
        }
        return Domain(FullSpace{n, truncation});
    }
    static Domain box(Point lo, Point hi) { return Domain(Box{lo, hi}); }
    static Domain ball(Point c, double r) { return Domain(Ball{c, r}); }

    const Shape& shape() const { return shape_; }

    int dim() const {
        return std::visit(
            [](const auto& s) -> int {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Interval>) return 1;
                else if constexpr (std::is_same_v<T, Box>) return s.lo.dim();
                else if constexpr (std::is_same_v<T, Ball>) return s.center.dim();
                else return s.dim;
            },
            shape_);
    }

    bool is_interval() const { return std::holds_alternative<Interval>(shape_); }
    const Interval& as_interval() const { return std::get<Interval>(shape_); }

    bool bounded() const {
        if (auto* i = std::get_if<Interval>(&shape_)) return std::isfinite(i->a) && std::isfinite(i->b);
        return !std::holds_alternative<FullSpace>(shape_);
    }

    /// Omega = R^n.
    bool is_full_space() const {
        if (auto* i = std::get_if<Interval>(&shape_)) return std::isinf(i->a) && std::isinf(i->b);
        return std::holds_alternative<FullSpace>(shape_);
    }

    double truncation_radius() const {
        if (auto* f = std::get_if<FullSpace>(&shape_)) return f->truncation_radius;
        return truncation_;
    }
    Domain with_truncation(double R) const {
        Domain d = *this;
        if (auto* f = std::get_if<FullSpace>(&d.shape_)) f->truncation_radius = R;
        d.truncation_ = R;
        return d;
    }

    bool contains(const Point& x) const {
        if (x.dim() != dim()) return false;
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Interval>) return s.a < x[0] && x[0] < s.b;
                else if constexpr (std::is_same_v<T, Box>) {
                    for (int i = 0; i < x.dim(); ++i)
                        if (!(s.lo[i] < x[i] && x[i] < s.hi[i])) return false;
                    return true;
                } else if constexpr (std::is_same_v<T, Ball>) return distance(x, s.center) < s.radius;
                else if constexpr (std::is_same_v<T, FullSpace>) return true;
                else return eval_smooth(s, x) > 0.0;
            },
            shape_);
    }

    /// Closure membership, up to a relative slack.
    bool contains_closure(const Point& x, double slack = 1e-12) const {
        if (contains(x)) return true;
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Interval>)
                    return s.a - slack <= x[0] && x[0] <= s.b + slack;
                else if constexpr (std::is_same_v<T, Box>) {
                    for (int i = 0; i < x.dim(); ++i)
                        if (!(s.lo[i] - slack <= x[i] && x[i] <= s.hi[i] + slack)) return false;
                    return true;
                } else if constexpr (std::is_same_v<T, Ball>)
                    return distance(x, s.center) <= s.radius * (1.0 + slack);
                else if constexpr (std::is_same_v<T, FullSpace>) return true;
                else return eval_smooth(s, x) >= -slack;
            },
            shape_);
    }

    /// r(x) = dist(x, boundary); +inf on R^n.
    double boundary_distance(const Point& x, Faces faces = Faces::Both) const {
        const double inf = std::numeric_limits<double>::infinity();
        return std::visit(
            [&](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Interval>) {
                    const double lo = x[0] - s.a, hi = s.b - x[0];
                    if (faces == Faces::Lower) return lo;
                    if (faces == Faces::Upper) return hi;
                    return std::min(lo, hi);
                } else if constexpr (std::is_same_v<T, Box>) {
                    double d = inf;
                    for (int i = 0; i < x.dim(); ++i)
                        d = std::min({d, x[i] - s.lo[i], s.hi[i] - x[i]});
                    return d;
                } else if constexpr (std::is_same_v<T, Ball>) return s.radius - distance(x, s.center);
                else if constexpr (std::is_same_v<T, FullSpace>) return inf;
                else return eval_smooth(s, x);
            },
            shape_);
    }

    /// Tubular depth of the boundary chart (half-width for boxes/intervals).
    double tubular_depth() const {
        return std::visit(
            [&](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Interval>) return 0.5 * (s.b - s.a);
                else if constexpr (std::is_same_v<T, Box>) {
                    double d = std::numeric_limits<double>::infinity();
                    for (int i = 0; i < s.lo.dim(); ++i) d = std::min(d, 0.5 * (s.hi[i] - s.lo[i]));
                    return d;
                } else if constexpr (std::is_same_v<T, Ball>) return s.radius;
                else if constexpr (std::is_same_v<T, FullSpace>) return std::numeric_limits<double>::infinity();
                else return s.tubular_depth;
            },
            shape_);
    }

    /// Box enclosing Omega; unbounded directions are cut at the truncation
    /// radius.
    Box bounding_box() const {
        const double R = truncation_radius();
        return std::visit(
            [&](const auto& s) -> Box {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Interval>) {
                    const double a = std::isfinite(s.a) ? s.a : (std::isfinite(s.b) ? s.b - R : -R);
                    const double b = std::isfinite(s.b) ? s.b : (std::isfinite(s.a) ? s.a + R : R);
                    return Box{Point{a}, Point{b}};
                } else if constexpr (std::is_same_v<T, Box>) return s;
                else if constexpr (std::is_same_v<T, Ball>) {
                    Point lo = s.center, hi = s.center;
                    for (int i = 0; i < lo.dim(); ++i) {
                        lo[i] -= s.radius;
                        hi[i] += s.radius;
                    }
                    return Box{lo, hi};
                } else if constexpr (std::is_same_v<T, FullSpace>) {
                    Point lo(s.dim), hi(s.dim);
                    for (int i = 0; i < s.dim; ++i) {
                        lo[i] = -R;
                        hi[i] = R;
                    }
                    return Box{lo, hi};
                } else return s.bounds;
            },
            shape_);
    }

    std::string describe() const {
        auto num = [](double v) {
            if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
            std::ostringstream os;
            os << v;
            return os.str();
        };
        return std::visit(
            [&](const auto& s) -> std::string {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Interval>) return "interval(" + num(s.a) + ", " + num(s.b) + ")";
                else if constexpr (std::is_same_v<T, Box>) return "box" + s.lo.str() + "-" + s.hi.str();
                else if constexpr (std::is_same_v<T, Ball>) return "ball(" + s.center.str() + ", " + num(s.radius) + ")";
                else if constexpr (std::is_same_v<T, FullSpace>) return "R^" + std::to_string(s.dim);
                else return "bounded_smooth(r = " + s.distance.source() + ")";
            },
            shape_);
    }

private:
    static double eval_smooth(const BoundedSmooth& s, const Point& x) {
        const double args[3] = {x[0], x.dim() > 1 ? x[1] : 0.0, x.dim() > 2 ? x[2] : 0.0};
        return s.distance.eval(args);
    }

    void validate() const {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Interval>) {
                    if (!(s.a < s.b)) throw DomainError("interval requires a < b");
                } else if constexpr (std::is_same_v<T, Box>) {
                    if (s.lo.dim() != s.hi.dim()) throw DomainError("box corners differ in dimension");
                    for (int i = 0; i < s.lo.dim(); ++i)
                        if (!(s.lo[i] < s.hi[i])) throw DomainError("box requires lo < hi");
                } else if constexpr (std::is_same_v<T, Ball>) {
                    if (!(s.radius > 0)) throw DomainError("ball requires radius > 0");
                } else if constexpr (std::is_same_v<T, FullSpace>) {
                    if (s.dim < 1 || s.dim > kMaxDim) throw DomainError("dimension must be 1..3");
                    if (!(s.truncation_radius > 0)) throw DomainError("truncation radius must be > 0");
                } else {
                    if (!(s.tubular_depth > 0)) throw DomainError("tubular depth must be > 0");
                    validate_smooth(s);
                }
            },
            shape_);
    }

    // r(x) <= dist(x, complement) on sampled points: moving by 0.999 r(x)
    // along each axis must stay inside.
    static void validate_smooth(const BoundedSmooth& s) {
        const int n = s.dim;
        const int m = 9;
        int idx[3] = {0, 0, 0};
        const int total = n == 1 ? m : (n == 2 ? m * m : m * m * m);
        for (int k = 0; k < total; ++k) {
            int rem = k;
            for (int i = 0; i < n; ++i) {
                idx[i] = rem % m;
                rem /= m;
            }
            Point x(n);
            for (int i = 0; i < n; ++i)
                x[i] = s.bounds.lo[i] + (idx[i] + 0.5) / m * (s.bounds.hi[i] - s.bounds.lo[i]);
            const double r = eval_smooth(s, x);
            if (!(r > 0)) continue;
            for (int i = 0; i < n; ++i)
                for (double sg : {-1.0, 1.0}) {
                    Point y = x;
                    y[i] += sg * 0.999 * r;
                    if (eval_smooth(s, y) < -1e-9)
                        throw DomainError("boundary distance overestimates dist to complement at " + x.str());
                }
        }
    }

    Shape shape_;
    double truncation_ = kDefaultTruncationRadius;
};

}  // namespace wsemb
