#pragma once

#include <wsemb/admissibility.hpp>
#include <wsemb/check.hpp>
#include <wsemb/config.hpp>
#include <wsemb/core.hpp>
#include <wsemb/flow.hpp>
#include <wsemb/necessary.hpp>
#include <wsemb/spectral.hpp>
#include <wsemb/subgraph.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wsemb {

/// Fixed table: check name -> the mathematical result it instantiates.
inline const std::map<std::string, std::string>& anchor_table() {
    static const std::map<std::string, std::string> t{
        {"admissibility", "well-posedness: w^(-1/(p-1)) locally integrable (p > 1), 1/w locally bounded (p = 1)"},
        {"finite_volume", "necessary condition: bounded weight with infinite total mass"},
        {"tail_decay", "necessary condition: tail mass against shell mass"},
        {"surface_ratio", "necessary condition: weighted surface-area ratio A(r+eps)/A(r)"},
        {"exponential_decay", "necessary condition: exponential decay of the tail mass"},
        {"fat_cube_scan", "necessary condition: infinitely many disjoint fat cubes (doubling obstruction)"},
        {"preset_selection", "flow presets: family-keyed sufficient conditions"},
        {"boundary_profile", "Adams flow criterion: boundary-profile flow (xi, r + t, f(r+t)/f(r) y)"},
        {"radial", "Adams flow criterion: radial flow (r - t, theta, g(r-t)/g(r) y) and its converse"},
        {"singular_boundary", "Adams flow criterion: inverse-profile flow near a singular boundary"},
        {"singular_point", "Adams flow criterion: inverse-profile flow near a singular point"},
        {"log_example", "Adams flow criterion: log-root weight flow (x e^(-(y-t)^2 + y^2), y - t)"},
        {"expression_flow", "Adams flow criterion: user-supplied flow"},
        {"equivalence_transfer", "two-sided equivalence alpha ref <= w <= beta ref preserves compactness"},
        {"spectral_probe", "p = 2: compactness iff discrete spectrum of the weighted Neumann operator"},
    };
    return t;
}

inline std::string anchor_for(const std::string& check) {
    const auto& t = anchor_table();
    const auto it = t.find(check);
    if (it == t.end()) throw std::logic_error("no anchor for check " + check);
    return it->second;
}

struct Evidence {
    std::string stage, check, anchor;
    CheckStatus status = CheckStatus::Unresolved;
    Verdict verdict = Verdict::Inconclusive;
    std::string detail;
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::string> artifacts;
};

struct Conflict {
    std::string first, second;
    std::string detail;
};

struct SpectrumRow {
    int nodes;
    double truncation;
    int k;
    double lambda;
};

struct DiagnosticVerdict {
    Verdict overall = Verdict::Inconclusive;
    std::vector<Evidence> evidence;
    std::vector<Conflict> conflicts;
    bool soundness_alarm = false;
    std::vector<std::string> notes;
    std::vector<std::string> stages;  // stages that ran

    // artifact payloads
    std::optional<CertificateResult> certificate;
    std::optional<FatCubeScan> scan;
    std::optional<SpectralVerdict> counting;
    std::vector<SpectrumRow> spectrum;
};

inline Evidence make_evidence(const std::string& stage, const CheckResult& r, std::string check = "") {
    Evidence e;
    e.stage = stage;
    e.check = check.empty() ? r.check : check;
    e.anchor = anchor_for(e.check);
    e.status = r.status;
    e.verdict = r.verdict;
    e.detail = r.detail;
    e.values = r.values;
    return e;
}

/// Least upper bound under Certified > Supported > none; opposite certified
/// verdicts are a conflict and raise the soundness alarm.
inline void combine(DiagnosticVerdict& d) {
    std::vector<const Evidence*> cc, cs, nc, ns;
    for (const Evidence& e : d.evidence) {
        if (e.verdict == Verdict::CompactCertified) cc.push_back(&e);
        if (e.verdict == Verdict::CompactSupported) cs.push_back(&e);
        if (e.verdict == Verdict::NonCompactCertified) nc.push_back(&e);
        if (e.verdict == Verdict::NonCompactSupported) ns.push_back(&e);
    }
    d.conflicts.clear();
    for (const Evidence* a : cc)
        for (const Evidence* b : nc)
            d.conflicts.push_back({a->check, b->check, "compact and non-compact verdicts are both certified"});
    d.soundness_alarm = !d.conflicts.empty();
    if (d.soundness_alarm) {
        d.overall = Verdict::Inconclusive;
        d.notes.push_back("soundness alarm: contradictory certified verdicts; at least one check is unsound for this input");
        return;
    }
    if (!cc.empty()) {
        d.overall = Verdict::CompactCertified;
        if (!ns.empty()) d.notes.push_back("supported non-compact evidence is overridden by a certified compact verdict");
    } else if (!nc.empty()) {
        d.overall = Verdict::NonCompactCertified;
        if (!cs.empty()) d.notes.push_back("supported compact evidence is overridden by a certified non-compact verdict");
    } else if (!cs.empty() && !ns.empty()) {
        d.overall = Verdict::Inconclusive;
        d.notes.push_back("supported evidence points both ways; no verdict");
    } else if (!cs.empty()) {
        d.overall = Verdict::CompactSupported;
    } else if (!ns.empty()) {
        d.overall = Verdict::NonCompactSupported;
    } else {
        d.overall = Verdict::Inconclusive;
    }
}

namespace detail {

inline QuadratureOptions plan_quadrature(const PipelinePlan& plan) { return relative_quadrature(plan.quad_rel); }

/// Exact c (x - a)^alpha or c (b - x)^alpha on a bounded interval, found by
/// a two-point fit and confirmed to 1e-9 relative on a dyadic/uniform grid.
struct PowerFit {
    Faces face;
    double c, alpha;
};

inline std::optional<PowerFit> fit_boundary_power(const Weight& w, const Domain& omega) {
    if (!omega.is_interval() || !omega.bounded()) return std::nullopt;
    const Box bb = omega.bounding_box();
    const double a = bb.lo[0], b = bb.hi[0], L = b - a;
    for (Faces face : {Faces::Lower, Faces::Upper}) {
        auto at = [&](double d) { return face == Faces::Lower ? a + d : b - d; };
        try {
            const double d1 = 0.25 * L, d2 = 0.5 * L * std::ldexp(1.0, -10);
            const double v1 = w.density(omega, Point{at(d1)}), v2 = w.density(omega, Point{at(d2)});
            if (!(v1 > 0) || !(v2 > 0) || !std::isfinite(v1) || !std::isfinite(v2)) continue;
            const double alpha = std::log(v1 / v2) / std::log(d1 / d2);
            if (std::fabs(alpha) < 1e-12) continue;
            const double c = v1 / std::pow(d1, alpha);
            bool ok = true;
            std::vector<double> ds;
            for (int k = 1; k <= 40; ++k) ds.push_back(L * std::ldexp(1.0, -k));
            for (int i = 1; i < 200; ++i) ds.push_back(L * i / 200.0);
            for (double d : ds) {
                const double v = w.density(omega, Point{at(d)});
                const double ref = c * std::pow(d, alpha);
                if (!(std::fabs(v / ref - 1.0) <= 1e-9)) {
                    ok = false;
                    break;
                }
            }
            if (ok) return PowerFit{face, c, alpha};
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

struct PresetChoice {
    std::string name;  // preset name, or "" when none applies
    std::optional<Profile> profile;
    std::optional<Point> center;
    std::string reason;
};

inline bool profile_blows_up(const Profile& f) {
    const double lo = f(1e-6), hi = f(1e-3);
    return std::isinf(lo) || lo > hi;
}

inline PresetChoice auto_preset(const Weight& w, const Domain& omega) {
    if (w.describe() == log_example_weight().describe()) {
        const Box bb = omega.bounding_box();
        if (omega.is_interval() && bb.lo[0] == -0.5 && bb.hi[0] == 0.5)
            return {"log_example", std::nullopt, std::nullopt, "the log-root example weight on (-1/2, 1/2)"};
    }
    switch (w.family()) {
        case WeightFamily::BoundaryProfile: {
            const Profile& f = std::get<Weight::BoundaryProfile>(w.data()).f;
            if (!omega.bounded()) return {"", std::nullopt, std::nullopt, "boundary profiles need a bounded domain"};
            return {profile_blows_up(f) ? "singular_boundary" : "boundary_profile", f, std::nullopt,
                    "weight family boundary_profile"};
        }
        case WeightFamily::Radial:
            if (!omega.is_full_space()) return {"", std::nullopt, std::nullopt, "radial preset needs the full space"};
            return {"radial", std::get<Weight::Radial>(w.data()).g, std::nullopt, "weight family radial"};
        case WeightFamily::PointSingular: {
            const auto& ps = std::get<Weight::PointSingular>(w.data());
            return {"singular_point", ps.f, ps.center, "weight family point_singular"};
        }
        case WeightFamily::Expression:
            if (auto fit = fit_boundary_power(w, omega)) {
                const std::string side = fit->face == Faces::Lower ? "lower" : "upper";
                return {fit->alpha > 0 ? "boundary_profile" : "singular_boundary", Profile::power(fit->c, fit->alpha),
                        std::nullopt,
                        "expression equals c d^alpha with c = " + std::to_string(fit->c) +
                            ", alpha = " + std::to_string(fit->alpha) + ", d = distance to the " + side +
                            " endpoint; the other endpoint carries a weight bounded between positive constants"};
            }
            return {"", std::nullopt, std::nullopt, "no preset recognizes this expression"};
        default:
            return {"", std::nullopt, std::nullopt, std::string("no preset for weight family ") + to_string(w.family())};
    }
}

inline Evidence certificate_evidence(const std::string& stage, const std::string& check, const CertificateResult& r) {
    CheckResult c{check, CheckStatus::Decided, r.verdict(), "", {}};
    if (r.overall == CertificateOverall::CompactCertified || r.overall == CertificateOverall::CompactSupported)
        c.status = CheckStatus::Decided;
    else if (r.overall == CertificateOverall::Failed)
        c.status = CheckStatus::Refused;
    else
        c.status = CheckStatus::Unresolved;
    std::string detail = std::string("overall ") + to_string(r.overall) + "; flow_domain " + to_string(r.flow_domain) +
                         ", injectivity " + to_string(r.injectivity) + ", M_bound " + to_string(r.M_bound) +
                         ", d_N(c) -> 0 " + (r.dN_at_c.tends_to_zero ? "yes" : "no") + ", int d_N -> 0 " +
                         (r.dN_integral.tends_to_zero ? "yes" : "no");
    for (const auto& f : r.failures) detail += "; failure: " + f;
    c.detail = detail;
    c.add("M_sampled", r.M_sampled);
    if (r.M_closed) c.add("M_closed", *r.M_closed);
    c.add("closed_form_discrepancy", r.closed_form_discrepancy);
    if (!r.dN_at_c.values.empty()) c.add("dN_c_last", r.dN_at_c.values.back());
    if (!r.dN_integral.values.empty()) c.add("dN_integral_last", r.dN_integral.values.back());
    Evidence e = make_evidence(stage, c);
    e.artifacts.push_back("dN.csv");
    return e;
}

inline Evidence inapplicable(const std::string& stage, const std::string& check, const std::string& detail,
                             CheckStatus s = CheckStatus::Inapplicable) {
    return make_evidence(stage, undecided(check, s, detail));
}

/// Runs one preset; returns its evidence and keeps the certificate.
inline std::vector<Evidence> run_preset(const PresetChoice& ch, const Weight& w, const Domain& omega,
                                        const PipelinePlan& plan, DiagnosticVerdict& d, const std::string& stage) {
    std::vector<Evidence> out;
    auto keep = [&](const CertificateResult& r) {
        if (!d.certificate) d.certificate = r;
        out.push_back(certificate_evidence(stage, ch.name, r));
    };
    try {
        if (ch.name == "boundary_profile") {
            keep(adams_verify(preset_boundary_profile(*ch.profile, omega)));
        } else if (ch.name == "singular_boundary") {
            keep(adams_verify(preset_singular_boundary(*ch.profile, omega)));
        } else if (ch.name == "singular_point") {
            keep(adams_verify(preset_singular_point(*ch.profile, omega, *ch.center)));
        } else if (ch.name == "log_example") {
            keep(adams_verify(preset_log_example()));
        } else if (ch.name == "expression_flow") {
            keep(adams_verify(expression_flow(w, omega, *plan.flow)));
        } else if (ch.name == "radial") {
            const RadialOutcome ro = preset_radial(*ch.profile, omega.dim());
            if (ro.certificate) keep(adams_verify(*ro.certificate));
            if (ro.noncompact) {
                Evidence e = make_evidence(stage, *ro.noncompact, "radial");
                e.detail = "ratio condition fails (ratio bounded away from 0); converse route: " + e.detail;
                out.push_back(e);
            }
            if (!ro.certificate && !ro.noncompact)
                out.push_back(inapplicable(stage, "radial", "ratio condition undecided", CheckStatus::Unresolved));
        }
    } catch (const PresetInapplicable& e) {
        out.push_back(inapplicable(stage, ch.name, e.what()));
        d.notes.push_back(ch.name + ": " + e.what());
    } catch (const std::exception& e) {
        out.push_back(inapplicable(stage, ch.name, e.what(), CheckStatus::Unresolved));
    }
    return out;
}

inline void run_necessary(const Weight& w, const Domain& omega, const PipelinePlan& plan, DiagnosticVerdict& d) {
    const QuadratureOptions q = plan_quadrature(plan);
    auto guard = [&](const std::string& name, auto&& fn) {
        try {
            d.evidence.push_back(make_evidence("necessary", fn()));
        } catch (const std::exception& e) {
            d.evidence.push_back(inapplicable("necessary", name, e.what(), CheckStatus::Unresolved));
        }
    };
    guard("finite_volume", [&] { return finite_volume_check(w, omega, q); });
    if (omega.bounded()) return;
    guard("tail_decay", [&] { return tail_decay_check(w, omega, plan.eps, plan.tail_delta, plan.radii, nullptr, q); });
    guard("surface_ratio", [&] { return surface_ratio_limit(w, omega, plan.eps, plan.radii); });
    guard("exponential_decay", [&] { return exponential_decay_check(w, omega, plan.decay_k, plan.radii, q); });
    if (omega.dim() == 1 || admits_translation_argument(w)) {
        const double lambda = plan.cube_lambda > 0 ? plan.cube_lambda : canonical_lambda(omega.dim());
        try {
            FatCubeScan s = fat_cube_scan(w, omega, plan.cube_h, lambda, plan.cube_windows, q);
            Evidence e = make_evidence("necessary", s.result, "fat_cube_scan");
            e.artifacts.push_back("scan.csv");
            d.evidence.push_back(e);
            d.scan = std::move(s);
        } catch (const std::exception& e) {
            d.evidence.push_back(inapplicable("necessary", "fat_cube_scan", e.what(), CheckStatus::Unresolved));
        }
    }
}

inline void run_sufficient(const Weight& w, const Domain& omega, const PipelinePlan& plan, DiagnosticVerdict& d) {
    const std::string stage = "sufficient";
    if (plan.preset == "none") return;
    if (plan.preset == "expression_flow") {
        for (const Evidence& e : run_preset({"expression_flow", {}, {}, "requested"}, w, omega, plan, d, stage))
            d.evidence.push_back(e);
        return;
    }

    // equivalence: certify the reference, then transfer
    if (w.family() == WeightFamily::EquivalentTo && plan.preset == "auto") {
        const auto& eq = std::get<Weight::EquivalentTo>(w.data());
        const Weight& actual = eq.actual_and_reference[0];
        const Weight& ref = eq.actual_and_reference[1];
        const PresetChoice ch = auto_preset(ref, omega);
        if (ch.name.empty()) {
            d.evidence.push_back(inapplicable(stage, "preset_selection", "reference weight: " + ch.reason));
            return;
        }
        std::vector<Evidence> ref_ev = run_preset(ch, ref, omega, plan, d, stage);
        Verdict best = Verdict::Inconclusive;
        for (Evidence& e : ref_ev) {
            if (is_certified(e.verdict) || best == Verdict::Inconclusive) best = e.verdict;
            e.detail = "reference weight " + ref.describe() + ": " + e.detail;
            // reference verdicts are not verdicts about w
            e.values.emplace_back("reference_verdict", static_cast<double>(e.verdict));
            e.verdict = Verdict::Inconclusive;
            d.evidence.push_back(e);
        }
        const TransferRecord rec = equivalence_reduce(actual, ref, eq.alpha, eq.beta, omega);
        CheckResult c{"equivalence_transfer", rec.holds ? CheckStatus::Decided : CheckStatus::Refused,
                      transfer_verdict(rec, best), "", {}};
        c.detail = rec.holds ? "alpha ref <= w <= beta ref on " + std::to_string(rec.samples) +
                                   " samples; reference verdict " + to_string(best) + " transfers as " +
                                   to_string(c.verdict)
                             : "bound violated at " + (rec.witness ? rec.witness->str() : std::string("?")) +
                                   " (w/ref = " + std::to_string(rec.witness_ratio) + ")";
        c.add("alpha", eq.alpha).add("beta", eq.beta).add("samples", rec.samples);
        d.evidence.push_back(make_evidence(stage, c));
        return;
    }

    PresetChoice ch;
    if (plan.preset == "auto") {
        ch = auto_preset(w, omega);
    } else {
        ch = auto_preset(w, omega);
        if (ch.name != plan.preset) {
            // explicit override: take the profile from the family when it has one
            PresetChoice forced{plan.preset, ch.profile, ch.center, "requested by configuration"};
            if (plan.preset != "log_example" && !forced.profile) {
                d.evidence.push_back(inapplicable(stage, plan.preset, "the weight does not expose a profile for this preset"));
                return;
            }
            ch = forced;
        }
    }
    if (ch.name.empty()) {
        d.evidence.push_back(inapplicable(stage, "preset_selection", ch.reason));
    } else {
        d.notes.push_back("preset " + ch.name + ": " + ch.reason);
        for (const Evidence& e : run_preset(ch, w, omega, plan, d, stage)) d.evidence.push_back(e);
    }
    if (plan.flow)
        for (const Evidence& e : run_preset({"expression_flow", {}, {}, "flow supplied"}, w, omega, plan, d, stage))
            d.evidence.push_back(e);
}

/// Largest truncation radius (at most 32) whose boundary weight stays above
/// 1e-250 of the central value, so the floor never creates plateaus.
inline double unclamped_truncation(const Weight& w, const Domain& omega) {
    const int n = omega.dim();
    Point origin(n);
    const double w0 = w.density(omega, origin);
    double R = 32.0;
    while (R > 4.0) {
        double lo = w0;
        for (int i = 0; i < n; ++i)
            for (double s : {-1.0, 1.0}) {
                Point x(n);
                x[i] = s * R;
                lo = std::min(lo, w.density(omega, x));
            }
        if (lo >= 1e-250 * w0) break;
        R *= 0.75;
    }
    return R;
}

inline void run_spectral(const Weight& w, const Domain& omega, const PipelinePlan& plan, DiagnosticVerdict& d) {
    const std::string stage = "spectral";
    if (plan.p != 2.0) {
        d.evidence.push_back(inapplicable(stage, "spectral_probe", "the spectral probe applies to p = 2 only"));
        return;
    }
    if (omega.dim() > 2) {
        d.evidence.push_back(inapplicable(stage, "spectral_probe", "spectral grids support dimensions 1 and 2"));
        return;
    }
    try {
        const bool one = omega.dim() == 1;
        std::vector<int> nodes = plan.spectral_nodes;
        if (nodes.empty()) nodes = omega.bounded() ? (one ? std::vector<int>{500, 1000, 2000} : std::vector<int>{40, 80})
                                                   : (one ? std::vector<int>{2000, 4000} : std::vector<int>{60, 120});
        std::vector<double> trunc = plan.spectral_truncations;
        if (trunc.empty() && !omega.bounded()) {
            const double R = unclamped_truncation(w, omega);
            trunc = one ? std::vector<double>{R / 4, R / 2, R} : std::vector<double>{R / 8, R / 4, R / 2};
        }
        std::vector<double> lambdas = plan.spectral_lambdas;
        if (lambdas.empty()) lambdas = omega.bounded() ? std::vector<double>{10.0, 100.0} : std::vector<double>{0.5, 1.0, 4.0};

        SpectralVerdict v = compactness_probe(w, omega, nodes, trunc, lambdas);
        CheckResult c{"spectral_probe", CheckStatus::Consistent, Verdict::Inconclusive, v.detail, {}};
        if (v.classification == SpectralClass::DiscreteConsistent) c.verdict = Verdict::CompactSupported;
        else if (v.classification == SpectralClass::EssentialSpectrumEvidence) c.verdict = Verdict::NonCompactSupported;
        else c.status = CheckStatus::Unresolved;
        c.add("clamped_nodes", v.clamped_nodes);

        const std::vector<double> ts = omega.bounded() ? std::vector<double>{0.0} : trunc;
        for (int nn : nodes)
            for (double t : ts) {
                const EigenSolution s = solve_k(assemble(w, omega, {nn, t}), plan.eigenpairs);
                for (std::size_t k = 0; k < s.eigenvalues.size(); ++k)
                    d.spectrum.push_back({nn, t, static_cast<int>(k), s.eigenvalues[k]});
            }
        Evidence e = make_evidence(stage, c);
        e.artifacts = {"spectrum.csv", "counts.csv"};
        d.evidence.push_back(e);
        d.counting = std::move(v);
    } catch (const std::exception& e) {
        d.evidence.push_back(inapplicable(stage, "spectral_probe", e.what(), CheckStatus::Unresolved));
    }
}

}  // namespace detail

/// Runs admissibility, necessary checks, presets with equivalence transfer
/// and the spectral probe, then combines the evidence.
inline DiagnosticVerdict run_pipeline(const Weight& w, const Domain& omega, const PipelinePlan& plan) {
    DiagnosticVerdict d;
    d.stages.push_back("admissibility");
    AdmissibilityOptions ao;
    ao.quadrature.rel_tol = std::max(plan.quad_rel, ao.quadrature.rel_tol);
    try {
        const AdmissibilityReport a = admissibility_check(w, omega, plan.p, ao);
        CheckResult c{"admissibility", a.holds ? CheckStatus::Consistent : CheckStatus::Refused, Verdict::Inconclusive,
                      std::string(to_string(a.condition)) + (a.holds ? " holds on " : " fails; witness ball center ") +
                          (a.holds ? std::to_string(a.balls_checked) + " balls"
                                   : a.witness.center.str() + ", radius " + std::to_string(a.witness.radius) +
                                         ", estimate " + a.witness.estimate.str()),
                      {}};
        c.add("p", plan.p).add("balls_checked", a.balls_checked).add("balls_skipped", a.balls_skipped);
        if (a.balls_skipped > 0)
            c.detail += "; " + std::to_string(a.balls_skipped) + " balls skipped where the weight underflows";
        d.evidence.push_back(make_evidence("admissibility", c));
        if (!a.holds) {
            d.notes.push_back("the weighted space is possibly ill-defined for this p; pipeline stopped");
            combine(d);
            return d;
        }
    } catch (const std::exception& e) {
        d.evidence.push_back(detail::inapplicable("admissibility", "admissibility", e.what(), CheckStatus::Unresolved));
    }

    if (plan.runs("necessary")) {
        d.stages.push_back("necessary");
        detail::run_necessary(w, omega, plan, d);
    }
    if (plan.runs("sufficient")) {
        d.stages.push_back("sufficient");
        detail::run_sufficient(w, omega, plan, d);
    }
    if (plan.runs("spectral") && (plan.spectral || plan.only.count("spectral"))) {
        d.stages.push_back("spectral");
        detail::run_spectral(w, omega, plan, d);
    }
    combine(d);
    return d;
}

inline DiagnosticVerdict run_pipeline(const Config& cfg) { return run_pipeline(cfg.weight, cfg.domain, cfg.plan); }

}  // namespace wsemb
