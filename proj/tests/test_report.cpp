#include <wsemb/config.hpp>
#include <wsemb/pipeline.hpp>
#include <wsemb/report.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wsemb;

namespace {

const char* kMinimal = R"J({"domain": {"type": "interval", "a": 0, "b": 1},
                             "weight": {"family": "expression", "expr": "x^2"}, "p": 2})J";

std::string with(const std::string& extra) {
    return R"J({"domain": {"type": "interval", "a": 0, "b": 1},
                "weight": {"family": "expression", "expr": "x^2"}, "p": 2, )J" +
           extra + "}";
}

const Evidence* find(const DiagnosticVerdict& d, const std::string& check) {
    for (const Evidence& e : d.evidence)
        if (e.check == check) return &e;
    return nullptr;
}

std::string field_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.field;
    }
    return "<accepted>";
}

}  // namespace

TEST(Config, MinimalConfigGetsDefaults) {
    const Config c = parse_config_text(kMinimal);
    EXPECT_TRUE(c.domain.is_interval());
    EXPECT_EQ(c.weight.family(), WeightFamily::Expression);
    EXPECT_DOUBLE_EQ(c.plan.p, 2.0);
    EXPECT_EQ(c.plan.preset, "auto");
    EXPECT_FALSE(c.plan.spectral);
    const Json echo = plan_json(c.plan);
    for (const char* k : {"quad_rel", "eps", "radii", "tail_delta", "decay_k", "cube_h", "cube_lambda", "cube_windows",
                          "spectral_nodes", "spectral_truncations", "spectral_lambdas", "eigenpairs"})
        EXPECT_TRUE(echo["tolerances"].contains(k)) << k;
}

TEST(Config, RejectsInvalidInput) {
    EXPECT_EQ(field_of(R"J({"domain": {"type": "interval", "a": 0, "b": 1}, "p": 2,
        "weight": {"family": "equivalent_to", "actual": {"family": "constant", "c": 1},
                   "reference": {"family": "constant", "c": 1}, "alpha": 3, "beta": 1}})J"),
              "weight.alpha");
    EXPECT_EQ(field_of(with(R"J("checks": {"preset": "radial"})J")), "checks.preset");
    EXPECT_EQ(field_of(with(R"J("colour": 1)J")), "colour");
    EXPECT_EQ(field_of(with(R"J("tolerances": {"eps": 1, "nope": 2})J")), "tolerances.nope");
    EXPECT_EQ(field_of(with(R"J("schema": 7)J")), "schema");
    EXPECT_EQ(field_of(with(R"J("tolerances": {"radii": [1, 3, 2, 4]})J")), "tolerances.radii");
    EXPECT_EQ(field_of(with(R"J("checks": {"only": ["magic"]})J")), "checks.only");
    EXPECT_EQ(field_of(R"J({"domain": {"type": "interval", "a": 1, "b": 0},
                            "weight": {"family": "constant"}})J"),
              "domain.b");
    EXPECT_EQ(field_of("{\n\"domain\": {\"type\": \"interval\",\n \"a\": 0 \"b\": 1}}"), "line 3");
    EXPECT_EQ(field_of(R"J({"domain": {"type": "interval", "a": 0, "b": 1}, "p": 0.5,
                            "weight": {"family": "constant"}})J"),
              "p");
}

TEST(Config, AcceptsEveryFamilyAndDomain) {
    const char* docs[] = {
        R"J({"domain": {"type": "real_line"}, "weight": {"family": "radial", "profile": {"kind": "gaussian", "a": 1}}})J",
        R"J({"domain": {"type": "full_space", "dim": 2}, "weight": {"family": "constant", "c": 2, "doubling": true}})J",
        R"J({"domain": {"type": "box", "lo": [0, 0], "hi": [1, 1]},
             "weight": {"family": "product", "factors": [{"family": "constant"}, {"family": "expression", "expr": "1 + x*y"}]}})J",
        R"J({"domain": {"type": "ball", "center": [0, 0], "radius": 1},
             "weight": {"family": "point_singular", "profile": {"kind": "log_power", "a": 0.5}, "center": [0, 0]}})J",
        R"J({"domain": {"type": "half_line", "a": 0}, "weight": {"family": "expression", "expr": "exp(-x)"}})J",
        R"J({"domain": {"type": "interval", "a": "-inf", "b": "inf"},
             "weight": {"family": "piecewise", "breakpoint": 0, "left": {"family": "constant"},
                        "right": {"family": "constant", "c": 2}}})J",
        R"J({"domain": {"type": "interval", "a": 0, "b": 1},
             "weight": {"family": "tabulated", "axes": [[0, 0.5, 1]], "values": [1, 2, 3]}})J",
        R"J({"domain": {"type": "interval", "a": 0, "b": 1},
             "weight": {"family": "expression", "expr": "x", "zero_set": [[0]]},
             "checks": {"preset": "expression_flow", "flow": {"x_map": "x + t", "y_map": "y"}},
             "output": {"dir": "somewhere", "format": "text"}})J",
    };
    for (const char* d : docs) EXPECT_NO_THROW(parse_config_text(d)) << d;
}

TEST(Pipeline, BoundaryPowerIsCertifiedAndSpectralConcurs) {
    Config c = parse_config_text(with(R"J("checks": {"spectral": true})J"));
    const DiagnosticVerdict d = run_pipeline(c);
    EXPECT_EQ(d.overall, Verdict::CompactCertified);
    const Evidence* b = find(d, "boundary_profile");
    ASSERT_NE(b, nullptr);
    EXPECT_EQ(b->verdict, Verdict::CompactCertified);
    const Evidence* s = find(d, "spectral_probe");
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->verdict, Verdict::CompactSupported);
    ASSERT_TRUE(d.counting.has_value());
    EXPECT_EQ(d.counting->classification, SpectralClass::DiscreteConsistent);
    EXPECT_TRUE(d.conflicts.empty());
}

TEST(Pipeline, RadialExponentialIsNonCompact) {
    const Config c = parse_config_text(R"J({"domain": {"type": "full_space", "dim": 2},
        "weight": {"family": "radial", "profile": {"kind": "exponential", "c": 1, "a": -1}}, "p": 2})J");
    const DiagnosticVerdict d = run_pipeline(c);
    EXPECT_EQ(d.overall, Verdict::NonCompactCertified);
    const Evidence* s = find(d, "surface_ratio");
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->verdict, Verdict::NonCompactCertified);
    bool found = false;
    for (const auto& [k, v] : s->values)
        if (k == "limit_estimate") {
            found = true;
            EXPECT_NEAR(v, std::exp(-1.0), 1e-3);
        }
    EXPECT_TRUE(found);
}

TEST(Pipeline, SingularPowerIsInconclusiveWithLiteratureNote) {
    const Config c = parse_config_text(R"J({"domain": {"type": "interval", "a": 0, "b": 1},
        "weight": {"family": "expression", "expr": "x^(-2)"}, "p": 2})J");
    const DiagnosticVerdict d = run_pipeline(c);
    EXPECT_EQ(d.overall, Verdict::Inconclusive);
    EXPECT_EQ(find(d, "finite_volume")->status, CheckStatus::Refused);
    EXPECT_EQ(find(d, "singular_boundary")->status, CheckStatus::Inapplicable);
    bool note = false;
    for (const auto& n : d.notes) note = note || n.find("literature") != std::string::npos;
    EXPECT_TRUE(note);
}

TEST(Pipeline, InadmissibleWeightStopsEarly) {
    const Config c = parse_config_text(R"J({"domain": {"type": "interval", "a": 0, "b": 1},
        "weight": {"family": "expression", "expr": "(x - 0.5)^2"}, "p": 2})J");
    const DiagnosticVerdict d = run_pipeline(c);
    EXPECT_EQ(d.overall, Verdict::Inconclusive);
    ASSERT_EQ(d.stages.size(), 1u);
    EXPECT_EQ(d.evidence.front().status, CheckStatus::Refused);
}

TEST(Pipeline, EquivalenceTransfersAsSupported) {
    const Config c = parse_config_text(R"J({"domain": {"type": "interval", "a": 0, "b": 1}, "p": 2,
        "weight": {"family": "equivalent_to",
                   "actual": {"family": "expression", "expr": "(2 + sin(1/x)) * x^2"},
                   "reference": {"family": "boundary_profile", "profile": {"kind": "power", "a": 2}, "faces": "lower"},
                   "alpha": 1, "beta": 3}})J");
    const DiagnosticVerdict d = run_pipeline(c);
    EXPECT_EQ(d.overall, Verdict::CompactSupported);
    EXPECT_EQ(find(d, "equivalence_transfer")->verdict, Verdict::CompactSupported);

    const Config bad = parse_config_text(R"J({"domain": {"type": "interval", "a": 0, "b": 1}, "p": 2,
        "weight": {"family": "equivalent_to", "actual": {"family": "expression", "expr": "x"},
                   "reference": {"family": "boundary_profile", "profile": {"kind": "power", "a": 2}, "faces": "lower"},
                   "alpha": 1, "beta": 1}})J");
    const DiagnosticVerdict r = run_pipeline(bad);
    EXPECT_EQ(find(r, "equivalence_transfer")->status, CheckStatus::Refused);
    EXPECT_EQ(r.overall, Verdict::Inconclusive);
}

TEST(Pipeline, AnchorsComeFromTheFixedTable) {
    const DiagnosticVerdict d = run_pipeline(parse_config_text(with(R"J("checks": {"spectral": true})J")));
    for (const Evidence& e : d.evidence) {
        ASSERT_TRUE(anchor_table().count(e.check)) << e.check;
        EXPECT_EQ(e.anchor, anchor_table().at(e.check));
    }
}

TEST(Combine, LatticeAndConflicts) {
    auto ev = [](const std::string& check, Verdict v) {
        Evidence e;
        e.check = check;
        e.verdict = v;
        return e;
    };
    DiagnosticVerdict d;
    d.evidence = {ev("a", Verdict::CompactSupported), ev("b", Verdict::CompactCertified)};
    combine(d);
    EXPECT_EQ(d.overall, Verdict::CompactCertified);
    d.evidence = {ev("a", Verdict::NonCompactSupported), ev("b", Verdict::Inconclusive)};
    combine(d);
    EXPECT_EQ(d.overall, Verdict::NonCompactSupported);
    d.evidence = {ev("a", Verdict::NonCompactSupported), ev("b", Verdict::CompactSupported)};
    combine(d);
    EXPECT_EQ(d.overall, Verdict::Inconclusive);
    EXPECT_FALSE(d.soundness_alarm);
    d.evidence = {ev("a", Verdict::NonCompactCertified), ev("b", Verdict::CompactCertified)};
    combine(d);
    EXPECT_EQ(d.overall, Verdict::Inconclusive);
    EXPECT_TRUE(d.soundness_alarm);
    ASSERT_EQ(d.conflicts.size(), 1u);
    EXPECT_EQ(d.conflicts[0].first, "b");
    EXPECT_EQ(d.conflicts[0].second, "a");
}

TEST(Report, ConflictSetsTheAlarmFlag) {
    // a broken weight whose checks disagree: fabricate the contradictory evidence
    const Config c = parse_config_text(kMinimal);
    DiagnosticVerdict d;
    d.stages = {"necessary", "sufficient"};
    d.evidence.push_back(make_evidence("necessary", decided("finite_volume", Verdict::NonCompactCertified, "forced")));
    d.evidence.push_back(make_evidence("sufficient", decided("boundary_profile", Verdict::CompactCertified, "forced")));
    combine(d);
    const Json j = report_json(d, c);
    EXPECT_TRUE(j["soundness_alarm"].get<bool>());
    EXPECT_EQ(j["overall"], "Inconclusive");
    EXPECT_EQ(j["conflicts"].size(), 1u);
    std::ostringstream os;
    write_text_report(os, d, c);
    EXPECT_NE(os.str().find("SOUNDNESS ALARM"), std::string::npos);
}

TEST(Report, OneLinePerCheckWithAnchor) {
    const Config c = parse_config_text(with(R"J("checks": {"spectral": true})J"));
    const DiagnosticVerdict d = run_pipeline(c);
    std::ostringstream os;
    write_text_report(os, d, c);
    const std::string text = os.str();
    for (const Evidence& e : d.evidence) {
        const std::string line = "  " + e.check + ": ";
        const auto pos = text.find(line);
        ASSERT_NE(pos, std::string::npos) << e.check;
        const std::string l = text.substr(pos, text.find('\n', pos) - pos);
        EXPECT_NE(l.find("anchor: " + e.anchor), std::string::npos);
    }
}

TEST(Report, OnlyNecessaryOmitsOtherSections) {
    Config c = parse_config_text(with(R"J("checks": {"only": ["necessary"], "spectral": true})J"));
    const DiagnosticVerdict d = run_pipeline(c);
    std::ostringstream os;
    write_text_report(os, d, c);
    EXPECT_NE(os.str().find("[necessary]"), std::string::npos);
    EXPECT_EQ(os.str().find("[sufficient]"), std::string::npos);
    EXPECT_EQ(os.str().find("[spectral]"), std::string::npos);
    for (const Evidence& e : d.evidence) EXPECT_TRUE(e.stage == "admissibility" || e.stage == "necessary");
}

TEST(Report, StructuredReportIsDeterministic) {
    namespace fs = std::filesystem;
    const Config c = parse_config_text(kMinimal);
    const fs::path base = fs::temp_directory_path() / "wsemb_report_test";
    fs::remove_all(base);
    std::string dumps[2];
    for (int i = 0; i < 2; ++i) {
        const DiagnosticVerdict d = run_pipeline(c);
        const auto files = emit_report(d, c, (base / std::to_string(i)).string(), "both", i ? "t1" : "t0");
        EXPECT_EQ(files.size(), 3u);  // report.txt, report.json, dN.csv
        Json j = Json::parse(std::ifstream(base / std::to_string(i) / "report.json"));
        EXPECT_EQ(j["header"]["generated"], i ? "t1" : "t0");
        j["header"]["generated"] = "";
        dumps[i] = j.dump();
    }
    EXPECT_EQ(dumps[0], dumps[1]);
    std::ifstream dn(base / "0" / "dN.csv");
    std::string header;
    std::getline(dn, header);
    EXPECT_EQ(header.substr(0, 7), "N,t,dN,");
    fs::remove_all(base);
}

TEST(Report, UnwritableOutputIsAnError) {
    const Config c = parse_config_text(kMinimal);
    DiagnosticVerdict d;
    EXPECT_THROW(emit_report(d, c, "/proc/wsemb_cannot_write_here", "both"), std::runtime_error);
}
