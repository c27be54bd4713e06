#pragma once

// Scalar profiles s -> f(s) used by boundary, radial and point-singular
// weights. Named analytic kinds carry closed forms (derivative, inverse,
// limits); `expression` profiles fall back to numerics and can only
// support, never certify, limit statements.

#include <wsemb/core.hpp>
#include <wsemb/expression.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <string>

namespace wsemb {

enum class ProfileKind {
    Power,         // c * s^a
    ShiftedPower,  // c * (1+s)^a
    Exp,           // c * exp(a s)
    Gaussian,      // c * exp(-a s^2)
    LogPower,      // c * (log(1/s))^a, 0 < s < 1
    ExpInverse,    // c * exp(a / s)
    Expr,
};

enum class Monotonicity { Increasing, Decreasing, Constant, Unknown };

class Profile {
public:
    Profile() = default;

    static Profile power(double c, double a) { return Profile(ProfileKind::Power, c, a); }
    static Profile shifted_power(double c, double a) { return Profile(ProfileKind::ShiftedPower, c, a); }
    static Profile exponential(double c, double a) { return Profile(ProfileKind::Exp, c, a); }
    static Profile gaussian(double c, double a) { return Profile(ProfileKind::Gaussian, c, a); }
    static Profile log_power(double c, double a) { return Profile(ProfileKind::LogPower, c, a); }
    static Profile exp_inverse(double c, double a) { return Profile(ProfileKind::ExpInverse, c, a); }
    static Profile expression(const std::string& src) {
        Profile p(ProfileKind::Expr, 1.0, 0.0);
        p.expr_ = Expression(src, {"s", "r", "rho", "x"});
        return p;
    }

    ProfileKind kind() const { return kind_; }
    bool analytic() const { return kind_ != ProfileKind::Expr; }
    double coef() const { return c_; }
    double exponent() const { return a_; }

    double operator()(double s) const {
        switch (kind_) {
            case ProfileKind::Power: return c_ * std::pow(s, a_);
            case ProfileKind::ShiftedPower: return c_ * std::pow(1.0 + s, a_);
            case ProfileKind::Exp: return c_ * std::exp(a_ * s);
            case ProfileKind::Gaussian: return c_ * std::exp(-a_ * s * s);
            case ProfileKind::LogPower: return c_ * std::pow(std::log(1.0 / s), a_);
            case ProfileKind::ExpInverse: return c_ * std::exp(a_ / s);
            case ProfileKind::Expr: {
                const double args[4] = {s, s, s, s};
                return expr_.eval(args);
            }
        }
        return std::nan("");
    }

    double derivative(double s) const {
        switch (kind_) {
            case ProfileKind::Power:
                return a_ == 0.0 ? 0.0 : c_ * a_ * std::pow(s, a_ - 1.0);
            case ProfileKind::ShiftedPower: return c_ * a_ * std::pow(1.0 + s, a_ - 1.0);
            case ProfileKind::Exp: return c_ * a_ * std::exp(a_ * s);
            case ProfileKind::Gaussian: return -2.0 * a_ * s * c_ * std::exp(-a_ * s * s);
            case ProfileKind::LogPower: {
                const double L = std::log(1.0 / s);
                return -c_ * a_ * std::pow(L, a_ - 1.0) / s;
            }
            case ProfileKind::ExpInverse: return -c_ * a_ / (s * s) * std::exp(a_ / s);
            case ProfileKind::Expr: {
                const double h = 1e-6 * std::max(std::fabs(s), 1e-300);
                return ((*this)(s + h) - (*this)(s - h)) / (2.0 * h);
            }
        }
        return std::nan("");
    }

    /// Inverse of a strictly monotone profile; `lo`,`hi` bracket the search
    /// for the numeric fallback.
    double inverse(double y, double lo, double hi) const {
        switch (kind_) {
            case ProfileKind::Power: return std::pow(y / c_, 1.0 / a_);
            case ProfileKind::ShiftedPower: return std::pow(y / c_, 1.0 / a_) - 1.0;
            case ProfileKind::Exp: return std::log(y / c_) / a_;
            case ProfileKind::Gaussian: return std::sqrt(-std::log(y / c_) / a_);
            case ProfileKind::LogPower: return std::exp(-std::pow(y / c_, 1.0 / a_));
            case ProfileKind::ExpInverse: return a_ / std::log(y / c_);
            case ProfileKind::Expr: break;
        }
        // bisection on a bracket, monotone either direction
        double flo = (*this)(lo) - y;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double fm = (*this)(mid) - y;
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

    /// log f(s), without underflow for the exponential kinds.
    double log_at(double s) const {
        switch (kind_) {
            case ProfileKind::Power: return std::log(c_) + a_ * std::log(s);
            case ProfileKind::ShiftedPower: return std::log(c_) + a_ * std::log1p(s);
            case ProfileKind::Exp: return std::log(c_) + a_ * s;
            case ProfileKind::Gaussian: return std::log(c_) - a_ * s * s;
            case ProfileKind::LogPower: return std::log(c_) + a_ * std::log(std::log(1.0 / s));
            case ProfileKind::ExpInverse: return std::log(c_) + a_ / s;
            case ProfileKind::Expr: break;
        }
        return std::log((*this)(s));
    }

    /// log f(u + d) - log f(u), free of cancellation for small d.
    double log_shift_ratio(double u, double d) const {
        switch (kind_) {
            case ProfileKind::Power: return a_ * std::log1p(d / u);
            case ProfileKind::ShiftedPower: return a_ * std::log1p(d / (1.0 + u));
            case ProfileKind::Exp: return a_ * d;
            case ProfileKind::Gaussian: return -a_ * d * (2.0 * u + d);
            case ProfileKind::LogPower: return a_ * std::log1p(-std::log1p(d / u) / std::log(1.0 / u));
            case ProfileKind::ExpInverse: return -a_ * d / (u * (u + d));
            case ProfileKind::Expr: break;
        }
        return log_at(u + d) - log_at(u);
    }

    /// log f^{-1}(y) for profiles blowing up at 0+.
    double log_inverse(double y, double lo, double hi) const {
        switch (kind_) {
            case ProfileKind::Power: return std::log(y / c_) / a_;
            case ProfileKind::LogPower: return -std::pow(y / c_, 1.0 / a_);
            case ProfileKind::ExpInverse: return std::log(a_ / std::log(y / c_));
            default: break;
        }
        return std::log(inverse(y, lo, hi));
    }

    /// log f^{-1}(y + d) - log f^{-1}(y), free of cancellation for small d.
    double log_inverse_shift(double y, double d, double lo, double hi) const {
        switch (kind_) {
            case ProfileKind::Power: return std::log1p(d / y) / a_;
            case ProfileKind::LogPower: return -std::pow(y / c_, 1.0 / a_) * std::expm1(std::log1p(d / y) / a_);
            case ProfileKind::ExpInverse: return -std::log1p(std::log1p(d / y) / std::log(y / c_));
            default: break;
        }
        return log_inverse(y + d, lo, hi) - log_inverse(y, lo, hi);
    }

    /// |(f^{-1})'(y)| = 1 / |f'(f^{-1}(y))|, evaluated in log space where a
    /// closed form exists.
    double inverse_derivative_abs(double y, double lo, double hi) const {
        switch (kind_) {
            case ProfileKind::Power:
                return std::fabs(std::pow(y / c_, 1.0 / a_) / (a_ * y));
            case ProfileKind::LogPower: {
                // r = exp(-L), L = (y/c)^{1/a}; |f'(r)| = c a L^{a-1} / r
                const double L = std::pow(y / c_, 1.0 / a_);
                return std::exp(-L + (1.0 - a_) * std::log(L) - std::log(c_ * a_));
            }
            default: break;
        }
        return 1.0 / std::fabs(derivative(inverse(y, lo, hi)));
    }

    /// Closed-form lim_{s->inf} f(s+eps)/f(s), when known.
    std::optional<double> ratio_limit_at_infinity(double eps) const {
        switch (kind_) {
            case ProfileKind::Power:
            case ProfileKind::ShiftedPower: return 1.0;
            case ProfileKind::Exp: return std::exp(a_ * eps);
            case ProfileKind::Gaussian: return a_ > 0.0 ? 0.0 : 1.0;
            case ProfileKind::ExpInverse: return 1.0;
            default: return std::nullopt;
        }
    }

    /// Closed-form lim_{y->inf} f^{-1}(y+eps)/f^{-1}(y) for profiles that
    /// blow up at 0+.
    std::optional<double> inverse_ratio_limit(double eps) const {
        switch (kind_) {
            case ProfileKind::Power:
                if (a_ < 0.0) return 1.0;
                return std::nullopt;
            case ProfileKind::ExpInverse:
                if (a_ > 0.0) return 1.0;
                return std::nullopt;
            case ProfileKind::LogPower:
                if (a_ <= 0.0) return std::nullopt;
                if (a_ < 1.0) return 0.0;
                if (a_ == 1.0) return std::exp(-eps / c_);
                return 1.0;
            default: return std::nullopt;
        }
    }

    /// Closed-form monotonicity on (lo, hi) with lo >= 0.
    Monotonicity monotonicity(double lo, double hi) const {
        (void)hi;
        const double sgn_c = c_ > 0 ? 1.0 : -1.0;
        switch (kind_) {
            case ProfileKind::Power:
            case ProfileKind::ShiftedPower:
            case ProfileKind::Exp:
                if (a_ == 0.0) return Monotonicity::Constant;
                return a_ * sgn_c > 0 ? Monotonicity::Increasing : Monotonicity::Decreasing;
            case ProfileKind::Gaussian:
                if (a_ == 0.0) return Monotonicity::Constant;
                if (lo < 0.0) return Monotonicity::Unknown;
                return a_ * sgn_c > 0 ? Monotonicity::Decreasing : Monotonicity::Increasing;
            case ProfileKind::LogPower:
            case ProfileKind::ExpInverse:
                if (a_ == 0.0) return Monotonicity::Constant;
                return a_ * sgn_c > 0 ? Monotonicity::Decreasing : Monotonicity::Increasing;
            case ProfileKind::Expr: return Monotonicity::Unknown;
        }
        return Monotonicity::Unknown;
    }

    /// Closed-form supremum over (lo, hi); the marker when unbounded.
    std::optional<Extended> supremum(double lo, double hi) const {
        if (!analytic() || c_ <= 0.0) return std::nullopt;
        const Monotonicity m = monotonicity(lo, hi);
        auto at = [&](double s) -> Extended {
            const double v = (*this)(s);
            if (!std::isfinite(v)) return Extended::infinity();
            return Extended(v);
        };
        switch (m) {
            case Monotonicity::Constant: return Extended(c_);
            case Monotonicity::Increasing:
                return std::isfinite(hi) ? at(hi) : Extended::infinity();
            case Monotonicity::Decreasing: {
                if (kind_ == ProfileKind::Power && lo == 0.0) return Extended::infinity();
                if ((kind_ == ProfileKind::LogPower || kind_ == ProfileKind::ExpInverse) && lo == 0.0)
                    return Extended::infinity();
                return at(lo);
            }
            case Monotonicity::Unknown: return std::nullopt;
        }
        return std::nullopt;
    }

    std::string str() const {
        auto num = [](double v) {
            std::string s = std::to_string(v);
            while (s.size() > 1 && s.back() == '0') s.pop_back();
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        };
        switch (kind_) {
            case ProfileKind::Power: return num(c_) + "*s^" + num(a_);
            case ProfileKind::ShiftedPower: return num(c_) + "*(1+s)^" + num(a_);
            case ProfileKind::Exp: return num(c_) + "*exp(" + num(a_) + "*s)";
            case ProfileKind::Gaussian: return num(c_) + "*exp(-" + num(a_) + "*s^2)";
            case ProfileKind::LogPower: return num(c_) + "*log(1/s)^" + num(a_);
            case ProfileKind::ExpInverse: return num(c_) + "*exp(" + num(a_) + "/s)";
            case ProfileKind::Expr: return expr_.source();
        }
        return "?";
    }

private:
    Profile(ProfileKind k, double c, double a) : kind_(k), c_(c), a_(a) {}

    ProfileKind kind_ = ProfileKind::Power;
    double c_ = 1.0;
    double a_ = 0.0;
    Expression expr_;
};

inline const char* to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::Power: return "power";
        case ProfileKind::ShiftedPower: return "shifted_power";
        case ProfileKind::Exp: return "exp";
        case ProfileKind::Gaussian: return "gaussian";
        case ProfileKind::LogPower: return "log_power";
        case ProfileKind::ExpInverse: return "exp_inverse";
        case ProfileKind::Expr: return "expression";
    }
    return "?";
}

}  // namespace wsemb
