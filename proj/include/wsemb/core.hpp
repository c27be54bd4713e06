#pragma once

// Shared vocabulary: points, the infinity-marker, error types and the
// verdict lattice used by every diagnostic.

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsemb {

inline constexpr int kMaxDim = 3;
inline constexpr double kDefaultTruncationRadius = 32.0;

/// Point in R^n, n <= 3. Unused trailing coordinates are zero.
class Point {
public:
    Point() = default;
    explicit Point(int dim) : dim_(dim) { check_dim(dim); }
    Point(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
        check_dim(dim_);
        int i = 0;
        for (double v : xs) c_[i++] = v;
    }
    static Point from(const std::vector<double>& xs) {
        Point p(static_cast<int>(xs.size()));
        for (int i = 0; i < p.dim_; ++i) p.c_[i] = xs[i];
        return p;
    }
    static Point scalar(double x) { return Point{x}; }

    int dim() const { return dim_; }
    double operator[](int i) const { return c_[i]; }
    double& operator[](int i) { return c_[i]; }

    double norm() const {
        switch (dim_) {
            case 1: return std::fabs(c_[0]);
            case 2: return std::hypot(c_[0], c_[1]);
            default: return std::hypot(c_[0], c_[1], c_[2]);
        }
    }

    friend Point operator+(Point a, const Point& b) {
        for (int i = 0; i < a.dim_; ++i) a.c_[i] += b.c_[i];
        return a;
    }
    friend Point operator-(Point a, const Point& b) {
        for (int i = 0; i < a.dim_; ++i) a.c_[i] -= b.c_[i];
        return a;
    }
    friend Point operator*(double s, Point a) {
        for (int i = 0; i < a.dim_; ++i) a.c_[i] *= s;
        return a;
    }
    friend bool operator==(const Point& a, const Point& b) {
        if (a.dim_ != b.dim_) return false;
        for (int i = 0; i < a.dim_; ++i)
            if (a.c_[i] != b.c_[i]) return false;
        return true;
    }

    std::string str() const {
        std::ostringstream os;
        os.precision(17);
        os << '(';
        for (int i = 0; i < dim_; ++i) os << (i ? ", " : "") << c_[i];
        os << ')';
        return os.str();
    }

private:
    static void check_dim(int d) {
        if (d < 1 || d > kMaxDim) throw std::invalid_argument("point dimension must be 1..3");
    }
    int dim_ = 1;
    std::array<double, kMaxDim> c_{};
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

/// Nonnegative extended real. Infinity is a distinguished marker, never a
/// floating overflow.
class Extended {
public:
    constexpr Extended() = default;
    constexpr explicit Extended(double v) : value_(v) {}
    static constexpr Extended infinity() {
        Extended e;
        e.infinite_ = true;
        return e;
    }
    constexpr bool is_infinite() const { return infinite_; }
    constexpr bool is_finite() const { return !infinite_; }
    /// Finite value; throws on the marker.
    double value() const {
        if (infinite_) throw std::logic_error("value() on infinity-marker");
        return value_;
    }
    /// Value with the marker mapped to +inf, for comparisons only.
    constexpr double as_double() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }
    std::string str() const {
        if (infinite_) return "inf";
        std::ostringstream os;
        os.precision(17);
        os << value_;
        return os.str();
    }
    friend constexpr bool operator==(const Extended&, const Extended&) = default;

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A standing assumption on the weight failed at a concrete point.
struct AssumptionViolation : std::runtime_error {
    AssumptionViolation(const std::string& what, Point at)
        : std::runtime_error(what + " at " + at.str()), point(at) {}
    Point point;
};

struct BudgetExceeded : std::runtime_error {
    BudgetExceeded(const std::string& what, double best)
        : std::runtime_error(what), best_estimate(best) {}
    double best_estimate;
};

struct PresetInapplicable : std::runtime_error {
    PresetInapplicable(std::string hypothesis_name, const std::string& detail)
        : std::runtime_error("preset inapplicable: " + hypothesis_name + ": " + detail),
          hypothesis(std::move(hypothesis_name)) {}
    std::string hypothesis;
};

struct SolverError : std::runtime_error {
    SolverError(const std::string& what, double residual_norm)
        : std::runtime_error(what), residual(residual_norm) {}
    double residual;
};

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& field_path, const std::string& what)
        : std::runtime_error("config error at '" + field_path + "': " + what), field(field_path) {}
    std::string field;
};

enum class Verdict {
    CompactCertified,
    CompactSupported,
    NonCompactCertified,
    NonCompactSupported,
    Inconclusive,
};

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::CompactCertified: return "CompactCertified";
        case Verdict::CompactSupported: return "CompactSupported";
        case Verdict::NonCompactCertified: return "NonCompactCertified";
        case Verdict::NonCompactSupported: return "NonCompactSupported";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

inline bool is_certified(Verdict v) {
    return v == Verdict::CompactCertified || v == Verdict::NonCompactCertified;
}
inline bool is_compact_side(Verdict v) {
    return v == Verdict::CompactCertified || v == Verdict::CompactSupported;
}
inline bool is_noncompact_side(Verdict v) {
    return v == Verdict::NonCompactCertified || v == Verdict::NonCompactSupported;
}

/// Shared divergence rule over positive dyadic-generation contributions:
/// over the last three generations every growth ratio is at least one and
/// the ratios do not shrink, so the partial sums grow at least linearly.
/// A transient rise toward a peak (shrinking ratios) does not qualify.
inline bool divergence_rule(const std::vector<double>& generation_contributions,
                            double slack = 1e-6) {
    const auto n = generation_contributions.size();
    if (n < 4) return false;
    double prev_ratio = 0.0;
    for (std::size_t k = n - 3; k < n; ++k) {
        const double prev = generation_contributions[k - 1];
        const double cur = generation_contributions[k];
        if (!(prev > 0.0)) return false;
        if (std::isinf(cur)) return true;
        const double q = cur / prev;
        if (q < 1.0 - slack) return false;
        if (k > n - 3 && q < prev_ratio * (1.0 - 1e-2)) return false;
        prev_ratio = q;
    }
    return true;
}

/// s_N -> 0: strictly decreasing over the last four samples and the last
/// value is at most 1e-3 of the first. Consecutive exact zeros (underflow)
/// count as decreasing.
inline bool tends_to_zero(const std::vector<double>& s, double drop = 1e-3) {
    if (s.size() < 4) return false;
    const auto n = s.size();
    for (std::size_t k = n - 3; k < n; ++k)
        if (!(s[k] < s[k - 1]) && !(s[k] == 0.0 && s[k - 1] == 0.0)) return false;
    return s.back() <= drop * s.front();
}

}  // namespace wsemb
