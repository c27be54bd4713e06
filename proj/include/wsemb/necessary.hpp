#pragma once

#include <wsemb/check.hpp>
#include <wsemb/core.hpp>
#include <wsemb/domain.hpp>
#include <wsemb/measure.hpp>
#include <wsemb/weight.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace wsemb {

/// Canonical fatness parameter (2(3^n - 1))^{-1}.
inline double canonical_lambda(int n) { return 1.0 / (2.0 * (std::pow(3.0, n) - 1.0)); }

using CubeIndex = std::array<long, kMaxDim>;

/// Lattice of cubes of edge h anchored at `origin`.
struct Tesselation {
    double h = 1.0;
    Point origin;

    Box cube(const CubeIndex& k) const {
        Point lo = origin, hi = origin;
        for (int i = 0; i < origin.dim(); ++i) {
            lo[i] = origin[i] + h * static_cast<double>(k[i]);
            hi[i] = lo[i] + h;
        }
        return {lo, hi};
    }
    /// Index of the cube containing x (lower-closed).
    CubeIndex locate(const Point& x) const {
        CubeIndex k{};
        for (int i = 0; i < origin.dim(); ++i) k[i] = static_cast<long>(std::floor((x[i] - origin[i]) / h));
        return k;
    }
    /// The 3^n - 1 cubes forming the fringe N(H) \ H.
    std::vector<CubeIndex> fringe(const CubeIndex& k) const {
        const int n = origin.dim();
        std::vector<CubeIndex> out;
        int total = 1;
        for (int i = 0; i < n; ++i) total *= 3;
        for (int c = 0; c < total; ++c) {
            CubeIndex j = k;
            int rem = c;
            bool centre = true;
            for (int i = 0; i < n; ++i) {
                const int d = rem % 3 - 1;
                rem /= 3;
                j[i] += d;
                if (d != 0) centre = false;
            }
            if (!centre) out.push_back(j);
        }
        return out;
    }
};

enum class CubeClass { Fat, Thin, Unknown };

inline const char* to_string(CubeClass c) {
    switch (c) {
        case CubeClass::Fat: return "fat";
        case CubeClass::Thin: return "thin";
        case CubeClass::Unknown: return "unknown";
    }
    return "?";
}

struct CubeRecord {
    CubeIndex index{};
    std::optional<Extended> mu_H;  // empty: cell budget exhausted
    std::optional<Extended> mu_F;
    CubeClass classification = CubeClass::Unknown;
};

/// Per-call cache of mu_w(H ∩ Omega) over lattice cubes. Fringe masses are
/// sums of cached neighbours, i.e. mu(N(H)) - mu(H) by additivity.
class CubeMeasureCache {
public:
    CubeMeasureCache(const Weight& w, const Domain& omega, Tesselation T, QuadratureOptions opts = relative_quadrature())
        : w_(w), omega_(omega), T_(std::move(T)), opts_(opts) {
        if (!(T_.h > 0)) throw DomainError("cube edge must be > 0");
        if (T_.origin.dim() != omega.dim()) throw DomainError("tesselation dimension does not match the domain");
    }

    const Tesselation& tesselation() const { return T_; }

    std::optional<Extended> cube(const CubeIndex& k) {
        auto it = cache_.find(k);
        if (it != cache_.end()) return it->second;
        std::optional<Extended> v;
        const Box b = T_.cube(k);
        if (!intersects_domain(b)) v = Extended(0.0);
        else {
            try {
                v = weighted_measure(w_, omega_, BoxRegion{b.lo, b.hi}, opts_).value;
            } catch (const BudgetExceeded&) {
                v.reset();
            }
        }
        cache_.emplace(k, v);
        return v;
    }

    std::optional<Extended> fringe(const CubeIndex& k) {
        double s = 0.0;
        for (const auto& j : T_.fringe(k)) {
            auto m = cube(j);
            if (!m) return std::nullopt;
            if (m->is_infinite()) return Extended::infinity();
            s += m->value();
        }
        return Extended(s);
    }

private:
    bool intersects_domain(const Box& b) const {
        const Box d = omega_.bounding_box();
        if (omega_.is_full_space()) return true;
        for (int i = 0; i < b.lo.dim(); ++i) {
            const double lo = omega_.is_interval() ? omega_.as_interval().a : d.lo[i];
            const double hi = omega_.is_interval() ? omega_.as_interval().b : d.hi[i];
            if (!(b.hi[i] > lo && b.lo[i] < hi)) return false;
        }
        return true;
    }

    Weight w_;
    Domain omega_;
    Tesselation T_;
    QuadratureOptions opts_;
    std::map<CubeIndex, std::optional<Extended>> cache_;
};

/// Strict fatness mu(H) > lambda * mu(F(H)); Unknown if a measure failed.
inline CubeRecord classify_cube(CubeMeasureCache& cache, const CubeIndex& k, double lambda) {
    if (!(lambda > 0)) throw DomainError("lambda must be > 0");
    CubeRecord r;
    r.index = k;
    r.mu_H = cache.cube(k);
    r.mu_F = cache.fringe(k);
    if (!r.mu_H || !r.mu_F) return r;
    const Extended H = *r.mu_H, F = *r.mu_F;
    if (H.is_infinite() && F.is_infinite()) r.classification = CubeClass::Unknown;
    else if (H.is_infinite()) r.classification = CubeClass::Fat;
    else if (F.is_infinite()) r.classification = CubeClass::Thin;
    else r.classification = H.value() > lambda * F.value() ? CubeClass::Fat : CubeClass::Thin;
    return r;
}

inline CubeRecord classify_cube(const Weight& w, const Domain& omega, const Tesselation& T, const CubeIndex& k,
                                double lambda) {
    CubeMeasureCache cache(w, omega, T);
    return classify_cube(cache, k, lambda);
}

struct WindowCount {
    double radius;
    int fat = 0;
    int unknown = 0;  // fat count lies in [fat, fat + unknown]
    int scanned = 0;
};

struct FatCubeScan {
    double h, lambda;
    std::vector<WindowCount> windows;
    std::vector<CubeRecord> cubes;  // every cube of the largest window
    CheckResult result;
};

/// Whether the family is known to make every translate of a fat cube fat:
/// constant, declared periodic, or declared doubling.
inline bool admits_translation_argument(const Weight& w) {
    return w.declared_doubling() || w.declared_periodic();
}

/// Counts (lambda, w)-fat cubes of the tesselation of edge h inside the
/// windows [-R, R]^n.
inline FatCubeScan fat_cube_scan(const Weight& w, const Domain& omega, double h, double lambda,
                                 std::vector<double> window_radii, const QuadratureOptions& opts = relative_quadrature()) {
    if (window_radii.empty()) throw DomainError("at least one window radius is required");
    for (std::size_t i = 1; i < window_radii.size(); ++i)
        if (!(window_radii[i] > window_radii[i - 1])) throw DomainError("window radii must increase");
    const int n = omega.dim();
    Tesselation T{h, Point(n)};
    CubeMeasureCache cache(w, omega, T, opts);
    FatCubeScan scan{h, lambda, {}, {}, {}};
    std::map<CubeIndex, CubeRecord> seen;
    for (double R : window_radii) {
        const long lo = static_cast<long>(std::floor(-R / h + 1e-9)), hi = static_cast<long>(std::ceil(R / h - 1e-9));
        WindowCount wc{R};
        const long span = hi - lo;
        long total = 1;
        for (int i = 0; i < n; ++i) total *= span;
        for (long c = 0; c < total; ++c) {
            CubeIndex k{};
            long rem = c;
            for (int i = 0; i < n; ++i) {
                k[i] = lo + rem % span;
                rem /= span;
            }
            auto it = seen.find(k);
            if (it == seen.end()) it = seen.emplace(k, classify_cube(cache, k, lambda)).first;
            const CubeRecord& rec = it->second;
            if (rec.mu_H && rec.mu_H->is_finite() && rec.mu_H->value() == 0.0) continue;  // outside Omega
            ++wc.scanned;
            if (rec.classification == CubeClass::Fat) ++wc.fat;
            else if (rec.classification == CubeClass::Unknown) ++wc.unknown;
        }
        scan.windows.push_back(wc);
    }
    for (const auto& [k, rec] : seen) scan.cubes.push_back(rec);

    bool growing = scan.windows.size() >= 2;
    for (std::size_t i = 1; i < scan.windows.size(); ++i)
        if (!(scan.windows[i].fat > scan.windows[i - 1].fat + scan.windows[i - 1].unknown)) growing = false;
    auto& res = scan.result;
    if (growing && admits_translation_argument(w))
        res = decided("fat_cube_scan", Verdict::NonCompactCertified,
                      "fat cubes keep appearing and the weight is translation/doubling invariant");
    else if (growing)
        res = decided("fat_cube_scan", Verdict::NonCompactSupported, "fat-cube count grows with every window");
    else
        res = undecided("fat_cube_scan", CheckStatus::Consistent, "fat-cube count saturates");
    res.check = "fat_cube_scan";
    res.add("h", h).add("lambda", lambda);
    for (const auto& wc : scan.windows) res.add("fat(R=" + std::to_string(wc.radius) + ")", wc.fat);
    return scan;
}

/// CSV: cube index, mu_H, mu_F, class.
inline void write_scan_csv(std::ostream& os, const FatCubeScan& scan) {
    os << "i,j,k,mu_H,mu_F,class\n";
    os.precision(17);
    auto str = [](const std::optional<Extended>& e) { return e ? e->str() : std::string("unknown"); };
    for (const auto& c : scan.cubes)
        os << c.index[0] << ',' << c.index[1] << ',' << c.index[2] << ',' << str(c.mu_H) << ',' << str(c.mu_F) << ','
           << to_string(c.classification) << '\n';
}

struct BoundEstimate {
    Extended sup;          // sampled (or closed-form) supremum
    bool analytic = false; // from the family's closed form
};

namespace detail {

// sampled sup of w over Omega: an interior grid plus dyadic approach to
// every finite endpoint (1-d). Growth along an approach marks unboundedness.
inline BoundEstimate sampled_sup(const Weight& w, const Domain& omega) {
    if (auto a = w.analytic_upper_bound(omega)) return {*a, true};
    const Box bb = omega.bounding_box();
    const int n = omega.dim();
    const int m = n == 1 ? 513 : (n == 2 ? 65 : 17);
    double sup = 0.0;
    int total = 1;
    for (int i = 0; i < n; ++i) total *= m;
    for (int k = 0; k < total; ++k) {
        Point x(n);
        int rem = k;
        for (int i = 0; i < n; ++i) {
            x[i] = bb.lo[i] + (rem % m + 0.5) / m * (bb.hi[i] - bb.lo[i]);
            rem /= m;
        }
        if (!omega.contains(x)) continue;
        const double v = w.density(omega, x);
        if (std::isinf(v)) return {Extended::infinity(), false};
        sup = std::max(sup, v);
    }
    if (n == 1 && omega.is_interval()) {
        const auto& I = omega.as_interval();
        std::vector<std::pair<double, double>> ends;
        if (std::isfinite(I.a)) ends.push_back({I.a, 1.0});
        if (std::isfinite(I.b)) ends.push_back({I.b, -1.0});
        const double W = std::isfinite(I.a) && std::isfinite(I.b) ? 0.5 * (I.b - I.a) : 1.0;
        for (auto [e, dir] : ends) {
            std::vector<double> seq;
            for (int k = 1; k <= 40; ++k) {
                const double v = w.density(omega, Point{e + dir * W * std::ldexp(1.0, -k)});
                if (std::isinf(v)) return {Extended::infinity(), false};
                seq.push_back(v);
                sup = std::max(sup, v);
            }
            if (divergence_rule(seq)) {
                // dyadic samples keep growing: power-law blow-up at the end
                const double r = seq.back() / seq[seq.size() - 2];
                if (r > 1.0 + 1e-6) return {Extended::infinity(), false};
            }
        }
    }
    return {Extended(sup), false};
}

// last two-thirds of a grid
inline std::size_t tail_start(std::size_t n) { return n / 3; }

}  // namespace detail

/// Bounded w with infinite weighted volume excludes compactness. Refuses
/// when w is unbounded: integrable-unbounded counterexamples exist.
inline CheckResult finite_volume_check(const Weight& w, const Domain& omega,
                                       const QuadratureOptions& opts = {}) {
    const BoundEstimate b = detail::sampled_sup(w, omega);
    if (b.sup.is_infinite())
        return undecided("finite_volume", CheckStatus::Refused,
                         "weight is unbounded; x^a on (0,1) with a <= -1 has infinite volume yet a compact embedding")
            .add("sup_w", std::numeric_limits<double>::infinity());
    MeasureResult vol;
    try {
        vol = weighted_measure(w, omega, WholeDomain{}, opts);
    } catch (const BudgetExceeded& e) {
        return undecided("finite_volume", CheckStatus::Unresolved, "weighted volume did not converge")
            .add("sup_w", b.sup.value())
            .add("volume_estimate", e.best_estimate);
    }
    if (vol.divergent()) {
        if (b.analytic)
            return decided("finite_volume", Verdict::NonCompactCertified, "bounded weight with infinite weighted volume")
                .add("sup_w", b.sup.value())
                .add("volume", std::numeric_limits<double>::infinity());
        return decided("finite_volume", Verdict::NonCompactSupported,
                       "sampled-bounded weight with infinite weighted volume")
            .add("sup_w", b.sup.value())
            .add("volume", std::numeric_limits<double>::infinity());
    }
    return undecided("finite_volume", CheckStatus::Consistent, "finite weighted volume")
        .add("sup_w", b.sup.value())
        .add("volume", vol.value.value());
}

struct RatioSample {
    double r;
    Extended tail, shell, ratio;
};

/// mu(Omega_r) / mu(shell(r - eps, r)) along an increasing grid.
inline CheckResult tail_decay_check(const Weight& w, const Domain& omega, double eps, double delta,
                                    const std::vector<double>& r_grid, std::vector<RatioSample>* samples = nullptr,
                                    const QuadratureOptions& opts = relative_quadrature(), double margin = 1e-6) {
    if (omega.bounded()) return undecided("tail_decay", CheckStatus::Inapplicable, "domain is bounded");
    if (!(eps > 0) || !(delta > 0)) throw DomainError("eps and delta must be > 0");
    if (r_grid.size() < 3) throw DomainError("tail_decay needs at least three radii");
    std::vector<RatioSample> s;
    for (double r : r_grid) {
        RatioSample q{r, {}, {}, {}};
        try {
            q.tail = tail_measure(w, omega, r, opts).value;
            q.shell = shell_measure(w, omega, r, eps, opts).value;
        } catch (const BudgetExceeded&) {
            return undecided("tail_decay", CheckStatus::Unresolved, "measure budget exhausted at r = " + std::to_string(r));
        }
        if (q.tail.is_infinite()) q.ratio = Extended::infinity();
        else if (q.shell.is_infinite()) q.ratio = Extended(0.0);
        else if (q.shell.value() == 0.0) q.ratio = q.tail.value() > 0 ? Extended::infinity() : Extended(0.0);
        else q.ratio = Extended(q.tail.value() / q.shell.value());
        s.push_back(q);
    }
    if (samples) *samples = s;
    const std::size_t t0 = detail::tail_start(s.size());
    bool above = true, nondecreasing = true;
    std::vector<double> ratios;
    for (std::size_t i = t0; i < s.size(); ++i) {
        const double q = s[i].ratio.as_double();
        ratios.push_back(q);
        if (!(q >= delta * (1.0 + margin))) above = false;
        if (i > t0 && !(q >= s[i - 1].ratio.as_double() * (1.0 - 1e-6))) nondecreasing = false;
    }
    CheckResult res;
    if (above && nondecreasing)
        res = decided("tail_decay", Verdict::NonCompactSupported, "tail/shell ratio stays above delta");
    else if (ratios.back() < delta && tends_to_zero(ratios))
        res = undecided("tail_decay", CheckStatus::Consistent, "tail/shell ratio falls below delta toward 0");
    else
        res = undecided("tail_decay", CheckStatus::Unresolved, "tail/shell ratio trend inconclusive");
    res.add("eps", eps).add("delta", delta).add("last_ratio", ratios.back());
    return res;
}

struct SurfaceRatio {
    double r;
    double A_r, A_next, ratio;
};

/// Estimated lim A_{r+eps}/A_r. A positive limit excludes compactness for
/// bounded continuous weights with A_r positive and ultimately decreasing.
inline CheckResult surface_ratio_limit(const Weight& w, const Domain& omega, double eps,
                                       const std::vector<double>& r_grid, std::vector<SurfaceRatio>* samples = nullptr,
                                       double floor = 1e-3) {
    if (!(eps > 0)) throw DomainError("eps must be > 0");
    if (r_grid.size() < 4) throw DomainError("surface_ratio needs at least four radii");
    if (auto b = w.analytic_upper_bound(omega); b && b->is_infinite())
        return undecided("surface_ratio", CheckStatus::Inapplicable, "weight is unbounded");
    std::vector<SurfaceRatio> s;
    for (double r : r_grid) {
        const SurfaceArea a = weighted_surface_area(w, omega, r), b = weighted_surface_area(w, omega, r + eps);
        s.push_back({r, a.value, b.value, a.value > 0 ? b.value / a.value : 0.0});
    }
    if (samples) *samples = s;
    const std::size_t t0 = detail::tail_start(s.size());
    for (std::size_t i = t0; i < s.size(); ++i) {
        if (!(s[i].A_r > 0))
            return undecided("surface_ratio", CheckStatus::Inapplicable, "A_r vanishes on the tail of the grid");
        if (i > t0 && !(s[i].A_r < s[i - 1].A_r))
            return undecided("surface_ratio", CheckStatus::Inapplicable, "A_r is not ultimately decreasing");
    }
    std::vector<double> ratios;
    for (std::size_t i = t0; i < s.size(); ++i) ratios.push_back(s[i].ratio);
    // extrapolate ratio(r) ~ L + c/r from the last two samples
    const auto& p = s[s.size() - 2];
    const auto& q = s.back();
    const double L = (q.r * q.ratio - p.r * p.ratio) / (q.r - p.r);
    const double raw_min = *std::min_element(ratios.begin(), ratios.end());

    std::optional<double> closed;
    if (omega.is_full_space())
        if (auto g = w.radial_profile()) closed = g->ratio_limit_at_infinity(eps);

    CheckResult res;
    if (tends_to_zero(ratios) || (closed && *closed == 0.0 && L < floor))
        res = undecided("surface_ratio", CheckStatus::Consistent, "A_{r+eps}/A_r tends to 0");
    else if (raw_min >= floor && L >= floor) {
        if (closed && *closed > 0 && std::fabs(*closed - L) <= 0.05 * *closed + 1e-9)
            res = decided("surface_ratio", Verdict::NonCompactCertified,
                          "closed-form surface ratio limit is positive");
        else
            res = decided("surface_ratio", Verdict::NonCompactSupported, "surface ratio stays bounded away from 0");
    } else
        res = undecided("surface_ratio", CheckStatus::Unresolved, "surface ratio trend inconclusive");
    res.add("eps", eps).add("limit_estimate", L).add("last_ratio", q.ratio);
    if (closed) res.add("closed_form_limit", *closed);
    return res;
}

/// e^{kr} mu(Omega_r) for each k; a product that does not decay excludes
/// compactness for continuous bounded weights.
inline CheckResult exponential_decay_check(const Weight& w, const Domain& omega, const std::vector<double>& k_list,
                                           const std::vector<double>& r_grid,
                                           const QuadratureOptions& opts = relative_quadrature()) {
    if (omega.bounded()) return undecided("exponential_decay", CheckStatus::Inapplicable, "domain is bounded");
    if (r_grid.size() < 4) throw DomainError("exponential_decay needs at least four radii");
    if (detail::sampled_sup(w, omega).sup.is_infinite())
        return undecided("exponential_decay", CheckStatus::Inapplicable, "weight is not bounded above");
    std::vector<double> tails;
    for (double r : r_grid) {
        try {
            tails.push_back(tail_measure(w, omega, r, opts).value.as_double());
        } catch (const BudgetExceeded&) {
            return undecided("exponential_decay", CheckStatus::Unresolved, "tail measure budget exhausted");
        }
    }
    const std::size_t t0 = detail::tail_start(r_grid.size());
    CheckResult res;
    bool all_zero = true;
    for (double k : k_list) {
        std::vector<double> prod;
        for (std::size_t i = t0; i < r_grid.size(); ++i)
            prod.push_back(std::isinf(tails[i]) ? tails[i] : std::exp(k * r_grid[i]) * tails[i]);
        bool growing = true;
        for (std::size_t i = 1; i < prod.size(); ++i)
            if (!(prod[i] >= prod[i - 1] * (1.0 - 1e-9))) growing = false;
        const bool infinite = std::isinf(prod.back());
        const bool away = prod.back() >= 0.1 * prod.front() && !tends_to_zero(prod);
        if (infinite || growing || away) {
            res = decided("exponential_decay", Verdict::NonCompactSupported,
                          "e^{kr} mu(Omega_r) does not decay for k = " + std::to_string(k));
            res.add("k", k).add("last_product", prod.back());
            return res;
        }
        if (!tends_to_zero(prod)) all_zero = false;
    }
    res = all_zero ? undecided("exponential_decay", CheckStatus::Consistent, "e^{kr} mu(Omega_r) -> 0 for every k")
                   : undecided("exponential_decay", CheckStatus::Unresolved, "decay trend inconclusive");
    return res;
}

enum class ChainStop { FatCube, Cap, NoCandidate, EmptyStart, Unknown };

inline const char* to_string(ChainStop s) {
    switch (s) {
        case ChainStop::FatCube: return "fat_cube";
        case ChainStop::Cap: return "cap";
        case ChainStop::NoCandidate: return "no_candidate";
        case ChainStop::EmptyStart: return "empty_start";
        case ChainStop::Unknown: return "unknown_measure";
    }
    return "?";
}

struct ThinChain {
    double lambda;
    std::vector<CubeIndex> cubes;
    std::vector<double> masses;
    std::size_t terminated_at = 0;
    ChainStop stop = ChainStop::Cap;
};

/// Greedy chain of thin cubes, each link at least doubling the mass.
inline ThinChain thin_chain(const Weight& w, const Domain& omega, const Tesselation& T, const CubeIndex& start,
                            int cap, const QuadratureOptions& opts = relative_quadrature()) {
    CubeMeasureCache cache(w, omega, T, opts);
    ThinChain c{canonical_lambda(omega.dim()), {}, {}, 0, ChainStop::Cap};
    auto m0 = cache.cube(start);
    if (!m0) {
        c.stop = ChainStop::Unknown;
        return c;
    }
    if (m0->is_finite() && m0->value() == 0.0) {
        c.stop = ChainStop::EmptyStart;
        return c;
    }
    CubeIndex cur = start;
    c.cubes.push_back(cur);
    c.masses.push_back(m0->as_double());
    for (int j = 0; j < cap; ++j) {
        const CubeRecord rec = classify_cube(cache, cur, c.lambda);
        c.terminated_at = c.cubes.size() - 1;
        if (rec.classification == CubeClass::Fat) {
            c.stop = ChainStop::FatCube;
            return c;
        }
        if (rec.classification == CubeClass::Unknown) {
            c.stop = ChainStop::Unknown;
            return c;
        }
        const double mH = c.masses.back();
        std::optional<CubeIndex> best;
        double best_mass = -1.0;
        for (const auto& k : T.fringe(cur)) {
            auto m = cache.cube(k);
            if (!m) continue;
            const double v = m->as_double();
            if (mH <= 0.5 * v && v > best_mass) {
                best = k;
                best_mass = v;
            }
        }
        if (!best) {
            c.stop = ChainStop::NoCandidate;
            return c;
        }
        cur = *best;
        c.cubes.push_back(cur);
        c.masses.push_back(best_mass);
    }
    c.terminated_at = c.cubes.size() - 1;
    c.stop = ChainStop::Cap;
    return c;
}

}  // namespace wsemb
