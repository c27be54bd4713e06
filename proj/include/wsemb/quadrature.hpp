#pragma once

// Deterministic adaptive quadrature.
//
// 1-d integrals are split into dyadic layers toward every endpoint (and
// toward declared breakpoints): layer k of an end covers the band at
// distance W 2^-(k+1) .. W 2^-k from the end. Each layer is integrated
// with globally adaptive Gauss-Kronrod 7/15. Unbounded ends use doubling
// layers beyond the truncation radius. The sequence of layer masses
// either certifies divergence (shared divergence rule), or is closed by a
// geometric (Richardson-type) remainder estimate once consecutive
// remainder predictions agree.
//
// n-d boxes (n = 2, 3) use globally adaptive tensor Gauss-Legendre 5/7
// cells, split along the longest edge.

#include <wsemb/core.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <vector>

namespace wsemb {

struct CellRecord {
    Point lo, hi;
    double estimate;
    double error;
};

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_cells = 200000;           // per adaptive call
    int depth_cap = 48;               // dyadic layers toward a finite end
    double truncation_radius = kDefaultTruncationRadius;
    int max_doublings = 48;           // outward layers beyond truncation
    std::vector<CellRecord>* trace = nullptr;

};

struct MeasureResult {
    Extended value;
    double error_bound = 0.0;
    long cells_used = 0;
    bool converged = false;
    /// converged and divergent are exclusive; divergent => value is the marker
    bool divergent() const { return value.is_infinite(); }
};

inline void write_cells_csv(std::ostream& os, const std::vector<CellRecord>& cells) {
    os << "dim,lo,hi,estimate,error\n";
    os.precision(17);
    for (const auto& c : cells) {
        os << c.lo.dim() << ",\"" << c.lo.str() << "\",\"" << c.hi.str() << "\"," << c.estimate << ","
           << c.error << "\n";
    }
}

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * kWgk[7];
    double g = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        k += kWgk[j] * s;
        if (j % 2 == 1) g += kWg[j / 2] * s;
    }
    k *= h;
    g *= h;
    double err = std::fabs(k - g);
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    return {a, b, k, err};
}

}  // namespace detail

/// Globally adaptive GK15 on a finite interval. An infinite node value
/// propagates as the marker.
template <class F>
MeasureResult adaptive_gk(const F& f, double a, double b, double abs_tol, double rel_tol, int max_cells,
                          std::vector<CellRecord>* trace = nullptr) {
    MeasureResult r;
    if (!(b > a)) {
        r.value = Extended(0.0);
        r.converged = true;
        return r;
    }
    std::priority_queue<detail::Segment> heap;
    detail::Segment s0 = detail::gk15(f, a, b);
    if (std::isinf(s0.value)) {
        r.value = Extended::infinity();
        r.cells_used = 1;
        return r;
    }
    heap.push(s0);
    double total = s0.value, err = s0.error;
    long cells = 1;
    while (err > std::max(abs_tol, rel_tol * std::fabs(total)) && cells < max_cells) {
        const detail::Segment top = heap.top();
        heap.pop();
        const double mid = 0.5 * (top.a + top.b);
        if (!(mid > top.a && mid < top.b)) {  // cannot split further
            heap.push(top);
            break;
        }
        const detail::Segment l = detail::gk15(f, top.a, mid), u = detail::gk15(f, mid, top.b);
        if (std::isinf(l.value) || std::isinf(u.value)) {
            r.value = Extended::infinity();
            r.cells_used = cells + 2;
            return r;
        }
        total += l.value + u.value - top.value;
        err += l.error + u.error - top.error;
        heap.push(l);
        heap.push(u);
        cells += 1;
    }
    // re-sum in a fixed order for bit-stable results
    std::vector<detail::Segment> segs;
    segs.reserve(heap.size());
    while (!heap.empty()) {
        segs.push_back(heap.top());
        heap.pop();
    }
    std::sort(segs.begin(), segs.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    total = 0.0;
    err = 0.0;
    for (const auto& s : segs) {
        total += s.value;
        err += s.error;
        if (trace) trace->push_back({Point{s.a}, Point{s.b}, s.value, s.error});
    }
    r.value = Extended(total);
    r.error_bound = err;
    r.cells_used = cells;
    r.converged = err <= std::max(abs_tol, rel_tol * std::fabs(total));
    return r;
}

namespace detail {

struct EndResult {
    double value = 0.0;
    double error = 0.0;
    long cells = 0;
    bool divergent = false;
    bool converged = false;
};

// Closes a layer sequence: returns true when the sequence is finished.
struct LayerSeries {
    std::vector<double> masses;
    double last_remainder = std::numeric_limits<double>::quiet_NaN();
    int consistent_steps = 0;
    double remainder = 0.0;
    double consistency = 0.0;

    enum class State { Continue, Converged, Divergent };

    State push(double m, double tol) {
        if (std::isinf(m)) return State::Divergent;
        masses.push_back(m);
        const auto k = masses.size();
        if (divergence_rule(masses)) return State::Divergent;
        if (k < 2) return State::Continue;
        const double prev = masses[k - 2];
        if (m == 0.0 && prev == 0.0) {
            remainder = 0.0;
            consistency = 0.0;
            return State::Converged;
        }
        if (!(prev > 0.0)) return State::Continue;
        const double q = m / prev;
        if (!(q < 1.0)) {
            last_remainder = std::numeric_limits<double>::quiet_NaN();
            consistent_steps = 0;
            return State::Continue;
        }
        const double rem = m * q / (1.0 - q);
        if (rem <= 0.25 * tol) {
            remainder = rem;
            consistency = rem;
            return State::Converged;
        }
        if (!std::isnan(last_remainder)) {
            const double c = std::fabs(last_remainder - (m + rem));
            if (c <= 0.25 * tol && q < 0.99) ++consistent_steps;
            else consistent_steps = 0;
            consistency = c;
        }
        last_remainder = rem;
        remainder = rem;
        if (consistent_steps >= 2) return State::Converged;
        return State::Continue;
    }
};

// Layers toward `end` over the band between `end` and `far` (finite).
template <class F>
EndResult integrate_toward_end(const F& f, double end, double far, double tol, const QuadratureOptions& o) {
    EndResult out;
    const double W = far - end;  // signed
    LayerSeries series;
    double sum = 0.0;
    for (int k = 0; k < o.depth_cap; ++k) {
        const double outer = end + W * std::ldexp(1.0, -k);
        const double inner = end + W * std::ldexp(1.0, -k - 1);
        if (inner == end || inner == outer) break;
        const double a = std::min(inner, outer), b = std::max(inner, outer);
        MeasureResult layer = adaptive_gk(f, a, b, tol / 64.0, o.rel_tol, o.max_cells, o.trace);
        out.cells += layer.cells_used;
        if (layer.divergent()) {
            out.divergent = true;
            return out;
        }
        const double m = layer.value.value();
        sum += m;
        out.error += layer.error_bound;
        const auto st = series.push(m, std::max(tol, o.rel_tol * std::fabs(sum)));
        if (st == LayerSeries::State::Divergent) {
            out.divergent = true;
            return out;
        }
        if (st == LayerSeries::State::Converged) {
            out.value = sum + series.remainder;
            out.error += series.consistency;
            out.converged = true;
            return out;
        }
    }
    // depth cap reached without a closed remainder
    out.value = sum + series.remainder;
    out.error += std::fabs(series.remainder);
    out.converged = false;
    return out;
}

// Doubling layers from `start` toward +inf (dir = +1) or -inf (dir = -1).
template <class F>
EndResult integrate_to_infinity(const F& f, double start, double dir, double tol, const QuadratureOptions& o) {
    EndResult out;
    LayerSeries series;
    double sum = 0.0;
    const double T = o.truncation_radius;
    double lo = 0.0, hi = T;  // offsets from start
    for (int k = 0; k < o.max_doublings; ++k) {
        const double a = dir > 0 ? start + lo : start - hi;
        const double b = dir > 0 ? start + hi : start - lo;
        MeasureResult layer = adaptive_gk(f, a, b, tol / 64.0, o.rel_tol, o.max_cells, o.trace);
        out.cells += layer.cells_used;
        if (layer.divergent()) {
            out.divergent = true;
            return out;
        }
        const double m = layer.value.value();
        sum += m;
        out.error += layer.error_bound;
        const auto st = series.push(m, std::max(tol, o.rel_tol * std::fabs(sum)));
        if (st == LayerSeries::State::Divergent) {
            out.divergent = true;
            return out;
        }
        if (st == LayerSeries::State::Converged) {
            out.value = sum + series.remainder;
            out.error += series.consistency;
            out.converged = true;
            return out;
        }
        lo = hi;
        hi *= 2.0;
    }
    out.value = sum + series.remainder;
    out.error += std::fabs(series.remainder);
    return out;
}

}  // namespace detail

/// ∫_a^b f with a, b possibly infinite; `breakpoints` are interior points
/// where f may be singular.
template <class F>
MeasureResult integrate_1d(const F& f, double a, double b, const QuadratureOptions& o = {},
                           std::vector<double> breakpoints = {}) {
    MeasureResult r;
    if (!(b > a)) {
        r.value = Extended(0.0);
        r.converged = true;
        return r;
    }
    std::vector<double> cuts{a};
    std::sort(breakpoints.begin(), breakpoints.end());
    for (double p : breakpoints)
        if (p > a && p < b && p != cuts.back()) cuts.push_back(p);
    cuts.push_back(b);

    // finite pieces: [l, u] with both ends layered; infinite ends get a core
    // of length T followed by doubling layers
    std::vector<std::pair<double, double>> finite;
    struct Tail { double start, dir; };
    std::vector<Tail> tails;
    const double T = o.truncation_radius;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double l = cuts[i], u = cuts[i + 1];
        if (std::isinf(l) && std::isinf(u)) {
            finite.push_back({-T, 0.0});
            finite.push_back({0.0, T});
            tails.push_back({T, 1.0});
            tails.push_back({-T, -1.0});
        } else if (std::isinf(u)) {
            finite.push_back({l, l + T});
            tails.push_back({l + T, 1.0});
        } else if (std::isinf(l)) {
            finite.push_back({u - T, u});
            tails.push_back({u - T, -1.0});
        } else {
            finite.push_back({l, u});
        }
    }
    const int ends = static_cast<int>(2 * finite.size() + tails.size());
    const double tol_end = o.abs_tol / ends;
    double sum = 0.0, err = 0.0;
    long cells = 0;
    bool ok = true;
    auto absorb = [&](const detail::EndResult& e) {
        cells += e.cells;
        if (e.divergent) return false;
        sum += e.value;
        err += e.error;
        ok = ok && e.converged;
        return true;
    };
    for (const auto& [l, u] : finite) {
        const double m = 0.5 * (l + u);
        if (!absorb(detail::integrate_toward_end(f, l, m, tol_end, o)) ||
            !absorb(detail::integrate_toward_end(f, u, m, tol_end, o))) {
            r.value = Extended::infinity();
            r.cells_used = cells;
            return r;
        }
    }
    for (const auto& t : tails) {
        if (!absorb(detail::integrate_to_infinity(f, t.start, t.dir, tol_end, o))) {
            r.value = Extended::infinity();
            r.cells_used = cells;
            return r;
        }
    }
    r.value = Extended(sum);
    r.error_bound = err;
    r.cells_used = cells;
    r.converged = ok && err <= std::max(o.abs_tol, o.rel_tol * std::fabs(sum));
    if (!r.converged)
        throw BudgetExceeded("quadrature tolerance unreachable within the cell budget; best estimate " +
                                 std::to_string(sum),
                             sum);
    return r;
}

namespace detail {

inline constexpr std::array<double, 5> kGl5x = {-0.906179845938663992797626878299392,
                                                -0.538469310105683091036314420700208, 0.0,
                                                0.538469310105683091036314420700208,
                                                0.906179845938663992797626878299392};
inline constexpr std::array<double, 5> kGl5w = {0.236926885056189087514264040719917,
                                                0.478628670499366468041291514835638,
                                                0.568888888888888888888888888888889,
                                                0.478628670499366468041291514835638,
                                                0.236926885056189087514264040719917};
inline constexpr std::array<double, 7> kGl7x = {-0.949107912342758524526189684047851,
                                                -0.741531185599394439863864773280788,
                                                -0.405845151377397166906606412076961, 0.0,
                                                0.405845151377397166906606412076961,
                                                0.741531185599394439863864773280788,
                                                0.949107912342758524526189684047851};
inline constexpr std::array<double, 7> kGl7w = {0.129484966168869693270611432679082,
                                                0.279705391489276667901467771423780,
                                                0.381830050505118944950369775488975,
                                                0.417959183673469387755102040816327,
                                                0.381830050505118944950369775488975,
                                                0.279705391489276667901467771423780,
                                                0.129484966168869693270611432679082};

struct BoxCell {
    Point lo, hi;
    double value, error;
    bool operator<(const BoxCell& o) const { return error < o.error; }
};

template <std::size_t M, class F>
double tensor_rule(const F& f, const Point& lo, const Point& hi, const std::array<double, M>& xs,
                   const std::array<double, M>& ws) {
    const int n = lo.dim();
    Point c(n), h(n);
    for (int i = 0; i < n; ++i) {
        c[i] = 0.5 * (lo[i] + hi[i]);
        h[i] = 0.5 * (hi[i] - lo[i]);
    }
    int total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<int>(M);
    double sum = 0.0;
    for (int k = 0; k < total; ++k) {
        int rem = k;
        double w = 1.0;
        Point x(n);
        for (int i = 0; i < n; ++i) {
            const int j = rem % static_cast<int>(M);
            rem /= static_cast<int>(M);
            x[i] = c[i] + h[i] * xs[j];
            w *= ws[j];
        }
        sum += w * f(x);
    }
    double vol = 1.0;
    for (int i = 0; i < n; ++i) vol *= h[i];
    return sum * vol;
}

template <class F>
BoxCell eval_cell(const F& f, const Point& lo, const Point& hi) {
    const double q7 = tensor_rule(f, lo, hi, kGl7x, kGl7w);
    const double q5 = tensor_rule(f, lo, hi, kGl5x, kGl5w);
    double e = std::fabs(q7 - q5);
    if (std::isnan(e)) e = std::numeric_limits<double>::infinity();
    return {lo, hi, q7, e};
}

}  // namespace detail

/// Globally adaptive cubature over an axis-aligned box (any n <= 3). For
/// n = 1 this forwards to the layered 1-d integrator.
template <class F>
MeasureResult integrate_box(const F& f, const Point& lo, const Point& hi, const QuadratureOptions& o = {}) {
    const int n = lo.dim();
    if (n == 1) {
        auto g = [&](double x) { return f(Point{x}); };
        return integrate_1d(g, lo[0], hi[0], o);
    }
    MeasureResult r;
    for (int i = 0; i < n; ++i)
        if (!(hi[i] > lo[i])) {
            r.value = Extended(0.0);
            r.converged = true;
            return r;
        }
    std::priority_queue<detail::BoxCell> heap;
    auto c0 = detail::eval_cell(f, lo, hi);
    if (std::isinf(c0.value)) {
        r.value = Extended::infinity();
        return r;
    }
    heap.push(c0);
    double total = c0.value, err = c0.error;
    long cells = 1;
    while (err > std::max(o.abs_tol, o.rel_tol * std::fabs(total)) && cells < o.max_cells) {
        const detail::BoxCell top = heap.top();
        heap.pop();
        int axis = 0;
        for (int i = 1; i < n; ++i)
            if (top.hi[i] - top.lo[i] > top.hi[axis] - top.lo[axis]) axis = i;
        const double mid = 0.5 * (top.lo[axis] + top.hi[axis]);
        Point hi1 = top.hi, lo2 = top.lo;
        hi1[axis] = mid;
        lo2[axis] = mid;
        auto a = detail::eval_cell(f, top.lo, hi1), b = detail::eval_cell(f, lo2, top.hi);
        if (std::isinf(a.value) || std::isinf(b.value)) {
            r.value = Extended::infinity();
            r.cells_used = cells;
            return r;
        }
        total += a.value + b.value - top.value;
        err += a.error + b.error - top.error;
        heap.push(a);
        heap.push(b);
        ++cells;
    }
    std::vector<detail::BoxCell> all;
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
        for (int i = 0; i < x.lo.dim(); ++i)
            if (x.lo[i] != y.lo[i]) return x.lo[i] < y.lo[i];
        return false;
    });
    total = 0.0;
    err = 0.0;
    for (const auto& c : all) {
        total += c.value;
        err += c.error;
        if (o.trace) o.trace->push_back({c.lo, c.hi, c.value, c.error});
    }
    r.value = Extended(total);
    r.error_bound = err;
    r.cells_used = cells;
    r.converged = err <= std::max(o.abs_tol, o.rel_tol * std::fabs(total));
    if (!r.converged)
        throw BudgetExceeded("cubature tolerance unreachable within the cell budget; best estimate " +
                                 std::to_string(total),
                             total);
    return r;
}

}  // namespace wsemb
