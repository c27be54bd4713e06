#pragma once

#include <wsemb/core.hpp>
#include <wsemb/quadrature.hpp>

#include <string>
#include <utility>
#include <vector>

namespace wsemb {

/// How a single diagnostic ended. `Decided` carries a verdict; the others
/// leave the verdict Inconclusive.
enum class CheckStatus {
    Decided,       // verdict on either side
    Consistent,    // numbers agree with compactness, no verdict
    Refused,       // a guard forbids drawing a conclusion
    Inapplicable,  // hypotheses of the test fail
    Unresolved,    // trends inconclusive or budget exhausted
};

inline const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Decided: return "decided";
        case CheckStatus::Consistent: return "consistent";
        case CheckStatus::Refused: return "refused";
        case CheckStatus::Inapplicable: return "inapplicable";
        case CheckStatus::Unresolved: return "unresolved";
    }
    return "?";
}

struct CheckResult {
    std::string check;
    CheckStatus status = CheckStatus::Unresolved;
    Verdict verdict = Verdict::Inconclusive;
    std::string detail;
    std::vector<std::pair<std::string, double>> values;  // named numbers for the report

    CheckResult& add(std::string name, double v) {
        values.emplace_back(std::move(name), v);
        return *this;
    }
    double get(const std::string& name) const {
        for (const auto& [k, v] : values)
            if (k == name) return v;
        throw std::out_of_range("no value '" + name + "' in " + check);
    }
};

inline CheckResult decided(std::string check, Verdict v, std::string detail) {
    return {std::move(check), CheckStatus::Decided, v, std::move(detail), {}};
}
inline CheckResult undecided(std::string check, CheckStatus s, std::string detail) {
    return {std::move(check), s, Verdict::Inconclusive, std::move(detail), {}};
}

/// Quadrature settings for ratio tests: relative accuracy only, so tiny
/// far-field masses keep their significant digits.
inline QuadratureOptions relative_quadrature(double rel = 1e-10) {
    QuadratureOptions o;
    o.abs_tol = 1e-280;
    o.rel_tol = rel;
    return o;
}

}  // namespace wsemb
