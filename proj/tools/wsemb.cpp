#include <wsemb/config.hpp>
#include <wsemb/measure.hpp>
#include <wsemb/pipeline.hpp>
#include <wsemb/report.hpp>
#include <wsemb/spectral.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
    std::string config;
    std::vector<std::string> only;
    std::string out;
    std::string format;
    double tol = 0.0;
    long seed = 0;  // accepted for pipeline compatibility; nothing is random
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output directory (overrides output.dir)");
    app->add_option("--format", c.format, "report format")->check(CLI::IsMember({"text", "structured", "both"}));
    app->add_option("--tol", c.tol, "relative quadrature tolerance")->check(CLI::PositiveNumber);
    app->add_option("--seed", c.seed, "ignored: every computation is deterministic");
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

wsemb::Config load(const Common& c) {
    wsemb::Config cfg = wsemb::parse_config(c.config);
    if (!c.out.empty()) cfg.plan.out_dir = c.out;
    if (!c.format.empty()) cfg.plan.format = c.format;
    if (c.tol > 0) cfg.plan.quad_rel = c.tol;
    if (!c.only.empty()) {
        cfg.plan.only.clear();
        for (const auto& s : c.only) {
            bool known = false;
            for (const auto& k : wsemb::stage_names()) known = known || k == s;
            if (!known) throw wsemb::ConfigError("--only", "unknown stage '" + s + "'");
            cfg.plan.only.insert(s);
        }
    }
    return cfg;
}

int run_report(wsemb::Config cfg) {
    const wsemb::DiagnosticVerdict d = wsemb::run_pipeline(cfg);
    const auto files = wsemb::emit_report(d, cfg, cfg.plan.out_dir, cfg.plan.format, utc_now());
    std::cout << "overall: " << wsemb::to_string(d.overall) << (d.soundness_alarm ? " (SOUNDNESS ALARM)" : "") << "\n";
    for (const auto& e : d.evidence)
        std::cout << "  " << e.stage << "/" << e.check << ": " << wsemb::to_string(e.verdict) << "\n";
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diagnostics for compactness of weighted Sobolev embeddings W^{1,p}(Omega,w) -> L^p(Omega,w)"};
    app.require_subcommand(1);

    Common check_o, nec_o, suf_o, spec_o, npc_o, meas_o;
    CLI::App* check = app.add_subcommand("check", "full pipeline");
    add_common(check, check_o);
    check->add_option("--only", check_o.only, "stages to run: necessary, sufficient, spectral")->delimiter(',');
    CLI::App* nec = app.add_subcommand("necessary", "admissibility and necessary checks");
    add_common(nec, nec_o);
    CLI::App* suf = app.add_subcommand("sufficient", "admissibility, flow presets and equivalence transfer");
    add_common(suf, suf_o);
    CLI::App* spec = app.add_subcommand("spectral", "admissibility and the spectral probe (p = 2)");
    add_common(spec, spec_o);

    CLI::App* npc = app.add_subcommand("npc", "nonlinear principal components of the weighted Neumann problem");
    add_common(npc, npc_o);
    int npc_count = 3, npc_nodes = 2000;
    double npc_trunc = 8.0;
    npc->add_option("-j,--components", npc_count, "number of components")->check(CLI::PositiveNumber);
    npc->add_option("--nodes", npc_nodes, "grid cells per axis")->check(CLI::Range(3, 1000000));
    npc->add_option("--truncation", npc_trunc, "truncation radius on unbounded domains")->check(CLI::PositiveNumber);

    CLI::App* meas = app.add_subcommand("measure", "weighted measure of the domain");
    add_common(meas, meas_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (check->parsed()) return run_report(load(check_o));
        if (nec->parsed()) {
            nec_o.only = {"necessary"};
            return run_report(load(nec_o));
        }
        if (suf->parsed()) {
            suf_o.only = {"sufficient"};
            return run_report(load(suf_o));
        }
        if (spec->parsed()) {
            spec_o.only = {"spectral"};
            return run_report(load(spec_o));
        }
        if (npc->parsed()) {
            const wsemb::Config cfg = load(npc_o);
            const wsemb::NPCResult r = wsemb::compute_npcs(cfg.weight, cfg.domain, npc_count, {npc_nodes, npc_trunc});
            std::filesystem::create_directories(cfg.plan.out_dir);
            const std::string path = (std::filesystem::path(cfg.plan.out_dir) / "npc.csv").string();
            std::ofstream f(path);
            if (!f) throw std::runtime_error("cannot write " + path);
            wsemb::write_npc_csv(f, r);
            std::cout << std::setprecision(12);
            for (std::size_t k = 0; k < r.components.size(); ++k)
                std::cout << "npc " << k + 1 << ": lambda = " << r.components[k].lambda
                          << ", value = " << r.components[k].value << "\n";
            std::cout << "gram_defect = " << r.gram_defect << ", max_abs_mean = " << r.max_abs_mean << "\n";
            std::cout << "wrote " << path << "\n";
            return 0;
        }
        if (meas->parsed()) {
            const wsemb::Config cfg = load(meas_o);
            const wsemb::MeasureResult m = wsemb::weighted_measure(cfg.weight, cfg.domain, wsemb::WholeDomain{},
                                                                   wsemb::relative_quadrature(cfg.plan.quad_rel));
            std::cout << std::setprecision(15) << "mu_w(Omega) = " << m.value.str() << ", error_bound = " << m.error_bound
                      << ", cells = " << m.cells_used
                      << (m.divergent() ? ", divergent" : (m.converged ? ", converged" : ", not converged")) << "\n";
            return 0;
        }
    } catch (const wsemb::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
