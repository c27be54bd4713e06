#pragma once

#include <wsemb/admissibility.hpp>
#include <wsemb/core.hpp>
#include <wsemb/domain.hpp>
#include <wsemb/measure.hpp>
#include <wsemb/weight.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wsemb {

/// Function on the subgraph, v(x, y), with gradient in R^{n+1}.
struct LiftedFunction {
    std::function<double(const Point&, double)> value;
    std::function<std::vector<double>(const Point&, double)> gradient;
};

/// Truncations of the subgraph used as exhaustions.
enum class SlabKind {
    NearBoundary,  // boundary distance <= 1/N
    High,          // y >= N
    Far,           // |x| >= N
};

/// Omega_w = {(x, y) : x in Omega, 0 < y < w(x)}.
class Subgraph {
public:
    /// Validates the standing assumptions on a central compact box and
    /// measures the Fubini defect |vol(Omega_w) - mu_w(Omega)|.
    Subgraph(Weight w, Domain omega, const QuadratureOptions& opts = {}) : w_(std::move(w)), omega_(std::move(omega)) {
        const Box bb = omega_.bounding_box();
        Point lo = bb.lo, hi = bb.hi;
        for (int i = 0; i < lo.dim(); ++i) {
            const double m = 0.5 * (lo[i] + hi[i]), r = 0.25 * (hi[i] - lo[i]);
            lo[i] = m - 0.5 * r;
            hi[i] = m + 0.5 * r;
        }
        bool clear = true;
        for (const auto& pts : {w_.zero_set(), w_.infinity_set()})
            for (const auto& q : pts) {
                bool inside = true;
                for (int i = 0; i < q.dim(); ++i) inside = inside && lo[i] <= q[i] && q[i] <= hi[i];
                if (inside) clear = false;
            }
        if (clear && omega_.contains(0.5 * (lo + hi))) assert_compact_bounds(w_, omega_, Box{lo, hi}, 17);

        try {
            volume_ = volume(opts);
            base_volume_ = weighted_measure(w_, omega_, WholeDomain{}, opts);
        } catch (const BudgetExceeded&) {
            volume_.reset();
        }
    }

    const Weight& weight() const { return w_; }
    const Domain& base() const { return omega_; }
    int dim() const { return omega_.dim() + 1; }

    bool contains(const Point& x, double y) const {
        if (!omega_.contains(x)) return false;
        return 0.0 < y && y < w_.density(omega_, x);
    }

    bool in_slab(const Point& x, double y, SlabKind kind, double N) const {
        if (!contains(x, y)) return false;
        switch (kind) {
            case SlabKind::NearBoundary: return omega_.boundary_distance(x) <= 1.0 / N;
            case SlabKind::High: return y >= N;
            case SlabKind::Far: return x.norm() >= N;
        }
        return false;
    }

    /// ∫_Omega ∫_0^{w(x)} v(x, y) dy dx, the fiber integral evaluated
    /// directly in y.
    template <class V>
    MeasureResult integrate(const V& v, const QuadratureOptions& opts = {}) const {
        auto fiber = [&](const Point& x) {
            const double top = w_.density(omega_, x);
            if (std::isinf(top)) return std::numeric_limits<double>::infinity();
            if (!(top > 0)) return 0.0;
            auto g = [&](double y) { return v(x, y); };
            const MeasureResult r = adaptive_gk(g, 0.0, top, 1e-3 * opts.abs_tol, 1e-3 * opts.rel_tol, 4000);
            return r.value.as_double();
        };
        std::vector<double> bps;
        if (omega_.dim() == 1) bps = detail::singular_breakpoints(w_);
        return integrate_region(fiber, omega_, WholeDomain{}, opts, bps);
    }

    MeasureResult volume(const QuadratureOptions& opts = {}) const {
        return integrate([](const Point&, double) { return 1.0; }, opts);
    }

    /// |vol(Omega_w) - mu_w(Omega)|, infinite volumes counting as equal.
    std::optional<double> fubini_defect() const {
        if (!volume_ || !base_volume_) return std::nullopt;
        if (volume_->value.is_infinite() || base_volume_->value.is_infinite())
            return volume_->value.is_infinite() == base_volume_->value.is_infinite()
                       ? 0.0
                       : std::numeric_limits<double>::infinity();
        return std::fabs(volume_->value.value() - base_volume_->value.value());
    }
    std::optional<MeasureResult> cached_volume() const { return volume_; }

private:
    Weight w_;
    Domain omega_;
    std::optional<MeasureResult> volume_, base_volume_;
};

inline Subgraph build_subgraph(const Weight& w, const Domain& omega, const QuadratureOptions& opts = {}) {
    return Subgraph(w, omega, opts);
}

/// (Ju)(x, y) = u(x). The x-gradient is u's; the y-derivative is a
/// central difference of Ju itself.
inline LiftedFunction lift_J(const TestFunction& u) {
    LiftedFunction v;
    auto val = u.value;
    auto grad = u.gradient;
    v.value = [val](const Point& x, double) { return val(x); };
    auto lifted = v.value;
    v.gradient = [lifted, grad](const Point& x, double y) {
        const Point g = grad(x);
        std::vector<double> out(g.dim() + 1);
        for (int i = 0; i < g.dim(); ++i) out[i] = g[i];
        const double h = 1e-5 * std::max(1.0, std::fabs(y));
        out[g.dim()] = (lifted(x, y + h) - lifted(x, y - h)) / (2.0 * h);
        return out;
    };
    return v;
}

/// Arbitrary function on the subgraph with a central-difference gradient.
inline LiftedFunction lifted_from(std::function<double(const Point&, double)> f) {
    LiftedFunction v;
    v.value = f;
    v.gradient = [f](const Point& x, double y) {
        std::vector<double> out(x.dim() + 1);
        for (int i = 0; i <= x.dim(); ++i) {
            Point a = x, b = x;
            double ya = y, yb = y;
            const double h = 1e-5 * std::max(1.0, i < x.dim() ? std::fabs(x[i]) : std::fabs(y));
            if (i < x.dim()) {
                a[i] += h;
                b[i] -= h;
            } else {
                ya += h;
                yb -= h;
            }
            out[i] = (f(a, ya) - f(b, yb)) / (2.0 * h);
        }
        return out;
    };
    return v;
}

struct LiftedNorms {
    Extended lp_pow;    // ∫∫ |v|^p
    Extended grad_pow;  // ∫∫ |∇v|^p
};

/// p-th powers of the L^p norm and gradient seminorm of v over Omega_w.
inline LiftedNorms lifted_norms(const LiftedFunction& v, const Subgraph& S, double p,
                                const QuadratureOptions& opts = {}) {
    auto fv = [&](const Point& x, double y) { return std::pow(std::fabs(v.value(x, y)), p); };
    auto fg = [&](const Point& x, double y) {
        double s = 0.0;
        for (double c : v.gradient(x, y)) s += c * c;
        return std::pow(std::sqrt(s), p);
    };
    return {S.integrate(fv, opts).value, S.integrate(fg, opts).value};
}

/// (P_y v)(x) = (1/w(x)) ∫_0^{w(x)} v(x, y) dy. DomainError on the zero set.
inline double project_Py(const LiftedFunction& v, const Subgraph& S, const Point& x, double tol = 1e-12) {
    const Extended wx = S.weight().value(S.base(), x);
    if (wx.is_infinite()) throw DomainError("fiber over " + x.str() + " is unbounded");
    if (!(wx.value() > 0)) throw DomainError("fiber over " + x.str() + " is empty (zero set)");
    auto g = [&](double y) { return v.value(x, y); };
    const MeasureResult r = adaptive_gk(g, 0.0, wx.value(), tol * wx.value(), tol, 4000);
    return r.value.value() / wx.value();
}

/// P_y v as a test function on Omega (central-difference gradient).
inline TestFunction projected(const LiftedFunction& v, const Subgraph& S) {
    TestFunction t;
    auto vv = v;
    const Subgraph* s = &S;
    t.value = [vv, s](const Point& x) { return project_Py(vv, *s, x); };
    auto val = t.value;
    t.gradient = [val](const Point& x) {
        Point g(x.dim());
        for (int i = 0; i < x.dim(); ++i) {
            const double h = 1e-5 * std::max(1.0, std::fabs(x[i]));
            Point a = x, b = x;
            a[i] += h;
            b[i] -= h;
            g[i] = (val(a) - val(b)) / (2.0 * h);
        }
        return g;
    };
    return t;
}

struct SamplePlan {
    int grid = 257;    // interior points per axis (1-d) or total budget split per axis
    int levels = 40;   // dyadic approach toward each finite end (1-d)
};

struct TransferRecord {
    bool holds = true;
    std::optional<Point> witness;
    double witness_ratio = 0.0;
    int samples = 0;
    double alpha = 0.0, beta = 0.0;
    std::string provenance = "equivalence";
};

namespace detail {

inline std::vector<Point> plan_points(const Domain& omega, const SamplePlan& plan) {
    std::vector<Point> pts;
    const Box bb = omega.bounding_box();
    const int n = omega.dim();
    const int m = n == 1 ? plan.grid : (n == 2 ? 41 : 13);
    int total = 1;
    for (int i = 0; i < n; ++i) total *= m;
    for (int k = 0; k < total; ++k) {
        Point x(n);
        int rem = k;
        for (int i = 0; i < n; ++i) {
            x[i] = bb.lo[i] + (rem % m + 0.5) / m * (bb.hi[i] - bb.lo[i]);
            rem /= m;
        }
        if (omega.contains(x)) pts.push_back(x);
    }
    if (n == 1) {
        const double a = bb.lo[0], b = bb.hi[0], W = 0.5 * (b - a);
        for (int k = 1; k <= plan.levels; ++k) {
            const double d = W * std::ldexp(1.0, -k);
            for (Point x : {Point{a + d}, Point{b - d}})
                if (omega.contains(x)) pts.push_back(x);
        }
    }
    return pts;
}

}  // namespace detail

/// Samples alpha * ref <= w <= beta * ref. A passing record lets a verdict
/// for ref carry over to w.
inline TransferRecord equivalence_reduce(const Weight& w, const Weight& ref, double alpha, double beta,
                                         const Domain& omega, const SamplePlan& plan = {}) {
    if (!(alpha > 0) || !(beta > 0)) throw DomainError("equivalence constants must be positive");
    if (alpha > beta) throw DomainError("equivalence requires alpha <= beta");
    TransferRecord rec;
    rec.alpha = alpha;
    rec.beta = beta;
    double worst = 0.0;
    for (const Point& x : detail::plan_points(omega, plan)) {
        if (w.in_zero_set(x) || w.in_infinity_set(x)) continue;
        const double a = w.density(omega, x), r = ref.density(omega, x);
        if (!std::isfinite(a) || !std::isfinite(r) || !(r > 0)) continue;
        ++rec.samples;
        const double q = a / r;
        double excess = 0.0;
        if (q < alpha * (1.0 - 1e-12)) excess = alpha / q - 1.0;
        if (q > beta * (1.0 + 1e-12)) excess = q / beta - 1.0;
        if (excess > worst) {
            worst = excess;
            rec.holds = false;
            rec.witness = x;
            rec.witness_ratio = q;
        }
    }
    return rec;
}

/// Verdict for w from a verdict for the reference weight. The inequality is
/// only sampled, so certified verdicts arrive as supported.
inline Verdict transfer_verdict(const TransferRecord& rec, Verdict ref_verdict) {
    if (!rec.holds) return Verdict::Inconclusive;
    switch (ref_verdict) {
        case Verdict::CompactCertified: return Verdict::CompactSupported;
        case Verdict::NonCompactCertified: return Verdict::NonCompactSupported;
        default: return ref_verdict;
    }
}

}  // namespace wsemb
