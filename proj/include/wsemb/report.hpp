#pragma once

#include <wsemb/config.hpp>
#include <wsemb/pipeline.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

namespace wsemb {

inline constexpr const char* kToolVersion = "0.1.0";

inline Json evidence_json(const Evidence& e) {
    Json j;
    j["stage"] = e.stage;
    j["check"] = e.check;
    j["anchor"] = e.anchor;
    j["status"] = to_string(e.status);
    j["verdict"] = to_string(e.verdict);
    j["detail"] = e.detail;
    Json v = Json::object();
    for (const auto& [k, x] : e.values) {
        if (std::isfinite(x)) v[k] = x;
        else v[k] = std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    }
    j["values"] = v;
    j["artifacts"] = e.artifacts;
    return j;
}

/// Structured report. Everything except header.generated depends only on
/// the configuration and the tool version.
inline Json report_json(const DiagnosticVerdict& d, const Config& cfg, const std::string& generated = "") {
    Json j;
    j["header"] = {{"tool", "wsemb"}, {"version", kToolVersion}, {"schema", kSchemaVersion}, {"generated", generated}};
    j["input"] = {{"domain", cfg.domain.describe()}, {"weight", cfg.weight.describe()}, {"source", cfg.source}};
    j["plan"] = plan_json(cfg.plan);
    j["overall"] = to_string(d.overall);
    j["soundness_alarm"] = d.soundness_alarm;
    j["stages"] = d.stages;
    j["evidence"] = Json::array();
    for (const Evidence& e : d.evidence) j["evidence"].push_back(evidence_json(e));
    j["conflicts"] = Json::array();
    for (const Conflict& c : d.conflicts)
        j["conflicts"].push_back({{"first", c.first}, {"second", c.second}, {"detail", c.detail}});
    j["notes"] = d.notes;
    return j;
}

inline void write_text_report(std::ostream& os, const DiagnosticVerdict& d, const Config& cfg,
                              const std::string& generated = "") {
    os << "wsemb " << kToolVersion << " report";
    if (!generated.empty()) os << " (" << generated << ")";
    os << "\n\n";
    os << "domain: " << cfg.domain.describe() << "\n";
    os << "weight: " << cfg.weight.describe() << "\n";
    os << "p: " << cfg.plan.p << "\n";
    os << "plan: " << plan_json(cfg.plan).dump() << "\n\n";
    for (const std::string& stage : d.stages) {
        os << "[" << stage << "]\n";
        for (const Evidence& e : d.evidence) {
            if (e.stage != stage) continue;
            os << "  " << e.check << ": " << to_string(e.verdict) << " (" << to_string(e.status) << ")"
               << " | anchor: " << e.anchor << " | " << e.detail;
            if (!e.artifacts.empty()) {
                os << " | artifacts:";
                for (const auto& a : e.artifacts) os << " " << a;
            }
            os << "\n";
        }
        os << "\n";
    }
    os << "overall: " << to_string(d.overall) << "\n";
    if (d.soundness_alarm) {
        os << "SOUNDNESS ALARM\n";
        for (const Conflict& c : d.conflicts) os << "  conflict: " << c.first << " vs " << c.second << ": " << c.detail << "\n";
    }
    for (const std::string& n : d.notes) os << "note: " << n << "\n";
}

inline void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows) {
    os << "resolution,truncation,k,lambda\n";
    os.precision(17);
    for (const auto& r : rows) os << r.nodes << ',' << r.truncation << ',' << r.k << ',' << r.lambda << '\n';
}

/// Writes report.txt and/or report.json plus CSV side files into dir and
/// returns the paths written.
inline std::vector<std::string> emit_report(const DiagnosticVerdict& d, const Config& cfg, const std::string& dir,
                                            const std::string& format, const std::string& generated = "") {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir);
    std::vector<std::string> written;
    auto open = [&](const std::string& name) {
        const std::string path = (fs::path(dir) / name).string();
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path);
        written.push_back(path);
        return f;
    };
    if (format == "text" || format == "both") {
        auto f = open("report.txt");
        write_text_report(f, d, cfg, generated);
    }
    if (format == "structured" || format == "both") {
        auto f = open("report.json");
        f << report_json(d, cfg, generated).dump(2) << "\n";
    }
    if (d.certificate) {
        auto f = open("dN.csv");
        write_flow_csv(f, *d.certificate);
    }
    if (d.scan) {
        auto f = open("scan.csv");
        write_scan_csv(f, *d.scan);
    }
    if (!d.spectrum.empty()) {
        auto f = open("spectrum.csv");
        write_spectrum_csv(f, d.spectrum);
    }
    if (d.counting) {
        auto f = open("counts.csv");
        write_counting_csv(f, *d.counting);
    }
    return written;
}

}  // namespace wsemb
