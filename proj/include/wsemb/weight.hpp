#pragma once

#include <wsemb/core.hpp>
#include <wsemb/domain.hpp>
#include <wsemb/expression.hpp>
#include <wsemb/profile.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wsemb {

enum class WeightFamily {
    Constant,
    BoundaryProfile,
    Radial,
    PointSingular,
    Expression,
    Tabulated,
    Product,
    EquivalentTo,
    Piecewise,
};

inline const char* to_string(WeightFamily f) {
    switch (f) {
        case WeightFamily::Constant: return "constant";
        case WeightFamily::BoundaryProfile: return "boundary_profile";
        case WeightFamily::Radial: return "radial";
        case WeightFamily::PointSingular: return "point_singular";
        case WeightFamily::Expression: return "expression";
        case WeightFamily::Tabulated: return "tabulated";
        case WeightFamily::Product: return "product";
        case WeightFamily::EquivalentTo: return "equivalent_to";
        case WeightFamily::Piecewise: return "piecewise";
    }
    return "?";
}

/// Variables visible to weight expressions.
inline std::vector<std::string> weight_expression_variables() {
    return {"x", "y", "z", "x1", "x2", "x3", "norm", "r"};
}

/// Immutable weight description with declared zero set and infinity set
/// (finite point sets). Cheap to copy.
class Weight {
public:
    struct Constant { double c; };
    struct BoundaryProfile { Profile f; Faces faces; };
    struct Radial { Profile g; };
    struct PointSingular { Profile f; Point center; };
    struct Expr { Expression e; };
    struct Tabulated {
        std::vector<std::vector<double>> axes;
        std::vector<double> values;  // row-major, last axis fastest
    };
    struct Product { std::vector<Weight> factors; };
    struct EquivalentTo {
        std::vector<Weight> actual_and_reference;  // [actual, reference]
        double alpha, beta;
    };
    struct Piecewise {
        double breakpoint;  // left applies for x <= breakpoint
        std::vector<Weight> left_right;
    };
    using Family = std::variant<Constant, BoundaryProfile, Radial, PointSingular, Expr, Tabulated,
                                Product, EquivalentTo, Piecewise>;

    static Weight constant(double c) {
        if (!(c > 0) || !std::isfinite(c)) throw DomainError("constant weight must be positive and finite");
        return Weight(Constant{c});
    }
    static Weight boundary_profile(Profile f, Faces faces = Faces::Both) {
        return Weight(BoundaryProfile{std::move(f), faces});
    }
    static Weight radial(Profile g) { return Weight(Radial{std::move(g)}); }
    static Weight point_singular(Profile f, Point center) {
        return Weight(PointSingular{std::move(f), center});
    }
    static Weight expression(const std::string& src) {
        return Weight(Expr{Expression(src, weight_expression_variables())});
    }
    static Weight tabulated(std::vector<std::vector<double>> axes, std::vector<double> values) {
        std::size_t expect = 1;
        for (const auto& a : axes) {
            if (a.size() < 2) throw DomainError("tabulated axis needs at least two nodes");
            if (!std::is_sorted(a.begin(), a.end())) throw DomainError("tabulated axis must be increasing");
            expect *= a.size();
        }
        if (axes.empty() || axes.size() > kMaxDim) throw DomainError("tabulated weight needs 1..3 axes");
        if (values.size() != expect) throw DomainError("tabulated value count does not match grid");
        return Weight(Tabulated{std::move(axes), std::move(values)});
    }
    static Weight product(std::vector<Weight> factors) {
        if (factors.empty()) throw DomainError("empty product weight");
        return Weight(Product{std::move(factors)});
    }
    static Weight equivalent_to(Weight actual, Weight reference, double alpha, double beta) {
        if (!(alpha > 0) || !(beta > 0)) throw DomainError("equivalence constants must be positive");
        if (alpha > beta) throw DomainError("equivalent_to requires alpha <= beta");
        return Weight(EquivalentTo{{std::move(actual), std::move(reference)}, alpha, beta});
    }
    static Weight piecewise(double breakpoint, Weight left, Weight right) {
        return Weight(Piecewise{breakpoint, {std::move(left), std::move(right)}});
    }

    Weight with_zero_set(std::vector<Point> pts) const {
        Weight w = *this;
        w.zero_set_ = std::move(pts);
        return w;
    }
    Weight with_infinity_set(std::vector<Point> pts) const {
        Weight w = *this;
        w.infinity_set_ = std::move(pts);
        return w;
    }
    Weight with_doubling(bool on = true) const {
        Weight w = *this;
        w.doubling_ = on;
        return w;
    }
    Weight with_periodic(bool on = true) const {
        Weight w = *this;
        w.periodic_ = on;
        return w;
    }

    WeightFamily family() const { return static_cast<WeightFamily>(family_->index()); }
    const Family& data() const { return *family_; }
    const std::vector<Point>& zero_set() const { return zero_set_; }
    const std::vector<Point>& infinity_set() const { return infinity_set_; }
    bool declared_doubling() const { return doubling_ || family() == WeightFamily::Constant; }
    bool declared_periodic() const { return periodic_ || family() == WeightFamily::Constant; }

    bool in_zero_set(const Point& x) const { return near_any(zero_set_, x); }
    bool in_infinity_set(const Point& x) const { return near_any(infinity_set_, x); }

    /// Weight value at x (no membership check). Declared sets override the
    /// formula: the marker on the infinity set, 0 on the zero set. A formula
    /// overflow is also reported as the marker.
    Extended value(const Domain& omega, const Point& x) const {
        if (in_infinity_set(x)) return Extended::infinity();
        if (in_zero_set(x)) return Extended(0.0);
        const double v = formula(omega, x);
        if (std::isnan(v)) throw DomainError("weight evaluates to NaN at " + x.str());
        if (std::isinf(v)) return Extended::infinity();
        return Extended(v);
    }

    /// Integrand form: the marker maps to +inf.
    double density(const Domain& omega, const Point& x) const { return value(omega, x).as_double(); }

    /// Closed-form upper bound over Omega when the family admits one; the
    /// marker when the family is analytically unbounded; nullopt if unknown.
    std::optional<Extended> analytic_upper_bound(const Domain& omega) const {
        if (!infinity_set_.empty()) return Extended::infinity();
        return std::visit(
            [&](const auto& f) -> std::optional<Extended> {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) return Extended(f.c);
                else if constexpr (std::is_same_v<T, BoundaryProfile>) {
                    double rmax = std::numeric_limits<double>::infinity();
                    if (omega.is_interval()) {
                        const auto& I = omega.as_interval();
                        if (f.faces == Faces::Both) rmax = 0.5 * (I.b - I.a);
                        else rmax = I.b - I.a;
                    } else if (omega.bounded()) {
                        rmax = omega.tubular_depth();
                        if (!std::holds_alternative<BoundedSmooth>(omega.shape())) rmax = omega.tubular_depth();
                    }
                    return f.f.supremum(0.0, rmax);
                } else if constexpr (std::is_same_v<T, Radial>) {
                    return f.g.supremum(0.0, max_norm(omega));
                } else if constexpr (std::is_same_v<T, PointSingular>) {
                    return f.f.supremum(0.0, max_norm(omega));
                } else if constexpr (std::is_same_v<T, Expr>) return std::nullopt;
                else if constexpr (std::is_same_v<T, Tabulated>) {
                    return Extended(*std::max_element(f.values.begin(), f.values.end()));
                } else if constexpr (std::is_same_v<T, Product>) {
                    double b = 1.0;
                    for (const auto& w : f.factors) {
                        auto u = w.analytic_upper_bound(omega);
                        if (!u) return std::nullopt;
                        if (u->is_infinite()) return Extended::infinity();
                        b *= u->value();
                    }
                    return Extended(b);
                } else if constexpr (std::is_same_v<T, EquivalentTo>) {
                    auto u = f.actual_and_reference[1].analytic_upper_bound(omega);
                    if (!u || u->is_infinite()) return u;
                    return Extended(f.beta * u->value());
                } else {
                    auto l = f.left_right[0].analytic_upper_bound(omega);
                    auto r = f.left_right[1].analytic_upper_bound(omega);
                    if (!l || !r) return std::nullopt;
                    if (l->is_infinite() || r->is_infinite()) return Extended::infinity();
                    return Extended(std::max(l->value(), r->value()));
                }
            },
            *family_);
    }

    /// Radial profile, if w(x) = g(|x|) with a known g (constants included).
    std::optional<Profile> radial_profile() const {
        if (auto* r = std::get_if<Radial>(family_.get())) return r->g;
        if (auto* c = std::get_if<Constant>(family_.get())) return Profile::power(c->c, 0.0);
        return std::nullopt;
    }

    std::string describe() const {
        return std::visit(
            [&](const auto& f) -> std::string {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) return "constant(" + Extended(f.c).str() + ")";
                else if constexpr (std::is_same_v<T, BoundaryProfile>)
                    return "boundary_profile(f(s) = " + f.f.str() + ")";
                else if constexpr (std::is_same_v<T, Radial>) return "radial(g(s) = " + f.g.str() + ")";
                else if constexpr (std::is_same_v<T, PointSingular>)
                    return "point_singular(f(s) = " + f.f.str() + ", center " + f.center.str() + ")";
                else if constexpr (std::is_same_v<T, Expr>) return "expression(" + f.e.source() + ")";
                else if constexpr (std::is_same_v<T, Tabulated>) return "tabulated";
                else if constexpr (std::is_same_v<T, Product>) {
                    std::string s = "product(";
                    for (std::size_t i = 0; i < f.factors.size(); ++i)
                        s += (i ? ", " : "") + f.factors[i].describe();
                    return s + ")";
                } else if constexpr (std::is_same_v<T, EquivalentTo>)
                    return "equivalent_to(" + f.actual_and_reference[0].describe() + " ~ " +
                           f.actual_and_reference[1].describe() + ")";
                else
                    return "piecewise(" + f.left_right[0].describe() + " | " + f.left_right[1].describe() + ")";
            },
            *family_);
    }

private:
    explicit Weight(Family f) : family_(std::make_shared<const Family>(std::move(f))) {}

    static bool near_any(const std::vector<Point>& pts, const Point& x) {
        for (const auto& p : pts)
            if (p.dim() == x.dim() && distance(p, x) <= 1e-12 * (1.0 + p.norm())) return true;
        return false;
    }

    static double max_norm(const Domain& omega) {
        if (!omega.bounded()) return std::numeric_limits<double>::infinity();
        const Box b = omega.bounding_box();
        double s = 0.0;
        for (int i = 0; i < b.lo.dim(); ++i) {
            const double m = std::max(std::fabs(b.lo[i]), std::fabs(b.hi[i]));
            s += m * m;
        }
        return std::sqrt(s);
    }

    double formula(const Domain& omega, const Point& x) const {
        return std::visit(
            [&](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) return f.c;
                else if constexpr (std::is_same_v<T, BoundaryProfile>)
                    return f.f(omega.boundary_distance(x, f.faces));
                else if constexpr (std::is_same_v<T, Radial>) return f.g(x.norm());
                else if constexpr (std::is_same_v<T, PointSingular>) return f.f(distance(x, f.center));
                else if constexpr (std::is_same_v<T, Expr>) {
                    const double a0 = x[0], a1 = x.dim() > 1 ? x[1] : 0.0, a2 = x.dim() > 2 ? x[2] : 0.0;
                    const double args[8] = {a0, a1, a2, a0, a1, a2, x.norm(), omega.boundary_distance(x)};
                    return f.e.eval(args);
                } else if constexpr (std::is_same_v<T, Tabulated>) return interpolate(f, x);
                else if constexpr (std::is_same_v<T, Product>) {
                    double v = 1.0;
                    for (const auto& w : f.factors) v *= w.value(omega, x).as_double();
                    return v;
                } else if constexpr (std::is_same_v<T, EquivalentTo>)
                    return f.actual_and_reference[0].value(omega, x).as_double();
                else {
                    const Weight& side = x[0] <= f.breakpoint ? f.left_right[0] : f.left_right[1];
                    return side.value(omega, x).as_double();
                }
            },
            *family_);
    }

    // multilinear interpolation, clamped to the grid
    static double interpolate(const Tabulated& t, const Point& x) {
        const int n = static_cast<int>(t.axes.size());
        std::size_t base[kMaxDim] = {0, 0, 0};
        double frac[kMaxDim] = {0, 0, 0};
        std::size_t stride[kMaxDim] = {1, 1, 1};
        for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * t.axes[i + 1].size();
        for (int i = 0; i < n; ++i) {
            const auto& a = t.axes[i];
            const double xi = std::clamp(x[i], a.front(), a.back());
            std::size_t k = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), xi) - a.begin());
            k = std::clamp<std::size_t>(k, 1, a.size() - 1) - 1;
            base[i] = k;
            frac[i] = (xi - a[k]) / (a[k + 1] - a[k]);
        }
        double v = 0.0;
        for (int corner = 0; corner < (1 << n); ++corner) {
            double c = 1.0;
            std::size_t idx = 0;
            for (int i = 0; i < n; ++i) {
                const int bit = (corner >> i) & 1;
                c *= bit ? frac[i] : 1.0 - frac[i];
                idx += (base[i] + bit) * stride[i];
            }
            if (c != 0.0) v += c * t.values[idx];
        }
        return v;
    }

    std::shared_ptr<const Family> family_;
    std::vector<Point> zero_set_;
    std::vector<Point> infinity_set_;
    bool doubling_ = false;
    bool periodic_ = false;
};

}  // namespace wsemb
