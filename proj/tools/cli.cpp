#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>

#include "hctl/config.hpp"
#include "hctl/controller.hpp"
#include "hctl/error.hpp"
#include "hctl/serialization.hpp"
#include "hctl/simulation.hpp"
#include "hctl/solvers.hpp"

namespace hctl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string                  params;
    std::string                  scenario;
    std::string                  controller;
    std::string                  out = "out";
    std::string                  artifact;
    std::optional<int>           order;
    std::optional<std::uint64_t> seed;
};

bool looks_like_file(const std::string& s) {
    return s.find('/') != std::string::npos || s.ends_with(".ini") || fs::exists(s);
}

/// Everything a command needs, validated before any computation starts.
RunConfig resolve(const Options& o, bool need_scenario) {
    RunConfig cfg;
    if (!o.scenario.empty()) {
        if (looks_like_file(o.scenario)) cfg = load_run_config(o.scenario);
        else cfg.scenario = canonical_scenario(o.scenario);
    } else if (need_scenario) {
        cfg.scenario = canonical_scenario("fig4");
    }
    if (!o.params.empty()) {
        cfg.params     = load_params(o.params);
        cfg.has_params = true;
    }
    cfg.params.validate();
    if (!o.controller.empty()) cfg.controller = parse_controller_choice(o.controller);
    if (o.order) {
        if (*o.order < 1) throw ConfigError("--order must be >= 1");
        cfg.tuning.runtime_order = *o.order;
    }
    if (o.seed) cfg.scenario.seed = *o.seed;
    cfg.tuning.Ts = cfg.scenario.Ts;
    if (!cfg.pi_gains_set) {
        const PiCascadeConfig d = PiCascadeConfig::for_params(cfg.params, false);
        cfg.pi.K_P_i            = d.K_P_i;
        cfg.pi.K_I_i            = d.K_I_i;
    }
    cfg.scenario.validate();
    return cfg;
}

ControllerKind kind_of(ControllerChoice c) {
    switch (c) {
        case ControllerChoice::d1: return ControllerKind::d1;
        case ControllerChoice::d2: return ControllerKind::d2;
        case ControllerChoice::d3: return ControllerKind::d3;
        case ControllerChoice::d3_6: return ControllerKind::d3_6;
        default: throw ConfigError("controller '" + to_string(c) + "' is not a harmonic controller");
    }
}

ControllerSetup make_setup(const RunConfig& cfg, ControllerChoice choice, const std::string& artifact_path) {
    ControllerSetup s;
    s.choice = choice;
    s.pi     = cfg.pi;
    s.pll    = cfg.pll;
    s.pll.E_rms = cfg.params.E_rms;
    if (is_harmonic(choice)) {
        if (!artifact_path.empty()) {
            auto a = std::make_shared<ControllerArtifact>(load_artifact(artifact_path));
            if (a->kind != kind_of(choice))
                throw ConfigError("artifact holds controller '" + to_string(a->kind) + "', not '" + to_string(choice) +
                                  "'");
            s.artifact = std::move(a);
        } else {
            s.artifact = std::make_shared<ControllerArtifact>(synthesize(cfg.params, kind_of(choice), cfg.tuning));
        }
    }
    return s;
}

double final_vref(const RunConfig& cfg) {
    double v = cfg.params.v_dc_ref;
    for (const auto& e : cfg.scenario.events)
        if (e.kind == ScenarioEvent::Kind::vref_step) v += e.value;
    return v;
}

RunSummary summarize(const RunConfig& cfg, ControllerChoice choice, const SimulationTrace& tr) {
    RunSummary s;
    s.controller      = to_string(choice);
    s.scenario        = cfg.scenario.name;
    s.records         = tr.records.size();
    s.energy_residual = tr.max_energy_residual;
    const double nan  = std::numeric_limits<double>::quiet_NaN();
    if (tr.records.empty()) {
        s.thd_ia = s.hc_vdc = s.vdc_mean_error = s.iq_mean = nan;
        return s;
    }
    const double t1 = tr.records.back().t;
    const double t0 = t1 - 2.0 * std::numbers::pi / cfg.params.omega;
    s.thd_ia         = tr.records.back().thd_ia;
    s.hc_vdc         = tr.records.back().hc_vdc;
    s.vdc_mean_error = window_mean(tr, "v_dc", t0, t1) - final_vref(cfg);
    s.iq_mean        = window_mean(tr, "i_q", t0, t1);
    return s;
}

json summary_json(const RunSummary& s) {
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    return {{"controller", s.controller},
            {"scenario", s.scenario},
            {"records", s.records},
            {"thd_ia", num(s.thd_ia)},
            {"hc_vdc", num(s.hc_vdc)},
            {"vdc_mean_error", num(s.vdc_mean_error)},
            {"iq_mean", num(s.iq_mean)},
            {"max_energy_residual", num(s.energy_residual)}};
}

void print_table(std::ostream& out, const std::vector<RunSummary>& rows) {
    out << std::left << std::setw(10) << "controller" << std::right << std::setw(14) << "thd_ia" << std::setw(14)
        << "hc_vdc" << std::setw(16) << "vdc_mean_err" << std::setw(14) << "iq_mean" << '\n';
    for (const auto& r : rows)
        out << std::left << std::setw(10) << r.controller << std::right << std::setprecision(6) << std::setw(14)
            << r.thd_ia << std::setw(14) << r.hc_vdc << std::setw(16) << r.vdc_mean_error << std::setw(14)
            << r.iq_mean << '\n';
}

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    return f;
}

// Commands

int cmd_synthesize(const Options& o, std::ostream& out) {
    RunConfig cfg = resolve(o, false);
    const ControllerKind kind = kind_of(cfg.controller);
    const fs::path dir = prepare_out(o.out);
    const ControllerArtifact a = synthesize(cfg.params, kind, cfg.tuning);
    save_artifact(a, (dir / "artifact.json").string());
    open_out(dir / "report.json") << report_to_json(a.report) << '\n';
    const auto& r = a.report;
    out << "controller " << to_string(kind) << ", integrator states " << a.bank.dim() << '\n'
        << "H1 " << r.H1 << " (reference " << r.h1_reference << ")\n";
    if (a.bank.dim() > 0) out << "alpha' " << r.alpha_prime << " (reference " << r.alpha_reference << ")\n";
    out << "lyapunov residual " << r.lyapunov.residual << ", order " << r.lyapunov.solve_order << '\n';
    if (a.bank.dim() > 0)
        out << "sylvester residual " << r.sylvester.residual << ", order " << r.sylvester.solve_order << '\n';
    out << "min eig P " << r.p_min_eigenvalue << ", closed-loop margin " << r.closed_loop_margin << '\n'
        << "wall time " << r.wall_time << " s\n";
    for (const auto& n : r.notes) out << "note: " << n << '\n';
    out << "wrote " << (dir / "artifact.json").string() << '\n';
    return ok;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    RunConfig       cfg   = resolve(o, true);
    const fs::path  dir   = prepare_out(o.out);
    ControllerSetup setup = make_setup(cfg, cfg.controller, o.artifact);
    SimulationTrace tr    = run(cfg.scenario, cfg.params, setup);
    {
        std::ofstream f = open_out(dir / "trace.csv");
        write_trace_csv(f, tr);
    }
    const RunSummary s = summarize(cfg, cfg.controller, tr);
    open_out(dir / "summary.json") << summary_json(s).dump(1) << '\n';
    print_table(out, {s});
    out << "wrote " << (dir / "trace.csv").string() << '\n';
    return ok;
}

int cmd_spectrum(const Options& o, std::ostream& out) {
    RunConfig      cfg = resolve(o, false);
    const fs::path dir = prepare_out(o.out);
    const int      h   = o.order.value_or(12);
    if (h < 3) throw ConfigError("--order must be at least 3 for the spectrum");

    const bool     open_loop = o.controller.empty() || o.controller == "open";
    PeriodicMatrix F         = [&] {
        if (open_loop) return error_state_matrix(compute_setpoint(cfg.params, cfg.tuning.i_sink, h));
        const ControllerSetup s = make_setup(cfg, cfg.controller, o.artifact);
        if (!s.artifact) throw ConfigError("spectrum needs 'open' or a harmonic controller");
        return forwarding_closed_loop(*s.artifact);
    }();
    const auto eig = closed_loop_spectrum(harmonic_state_matrix(F, h), cfg.params.omega);

    std::ofstream f = open_out(dir / "spectrum.csv");
    f << "re,im,damping,boundary_flag\n" << std::setprecision(17);
    int unstable = 0, flagged = 0;
    for (const auto& e : eig) {
        const double mag  = std::abs(e.value);
        const double zeta = mag > 0.0 ? -e.value.real() / mag : 0.0;
        f << e.value.real() << ',' << e.value.imag() << ',' << zeta << ',' << (e.boundary ? 1 : 0) << '\n';
        unstable += e.value.real() >= 0.0;
        flagged += e.boundary;
    }
    out << (open_loop ? "open loop" : to_string(cfg.controller)) << ": " << eig.size() << " eigenvalues in the strip, "
        << unstable << " with re >= 0, " << flagged << " flagged\n";
    if (!eig.empty()) out << "rightmost " << eig.front().value.real() << (eig.front().value.imag() >= 0 ? "+" : "")
                          << eig.front().value.imag() << "j\n";
    out << "wrote " << (dir / "spectrum.csv").string() << '\n';
    return ok;
}

int cmd_compare(const Options& o, const std::vector<std::string>& names, std::ostream& out) {
    RunConfig cfg = resolve(o, true);
    std::vector<std::string> list = names.empty() ? cfg.compare : names;
    if (list.empty()) list = {to_string(cfg.controller)};
    std::vector<ControllerChoice> choices;
    for (const auto& n : list) choices.push_back(parse_controller_choice(n));
    const fs::path dir = prepare_out(o.out);

    std::vector<RunSummary> rows;
    for (ControllerChoice c : choices) {
        const ControllerSetup setup = make_setup(cfg, c, "");
        const SimulationTrace tr    = run(cfg.scenario, cfg.params, setup);
        std::ofstream         f     = open_out(dir / ("trace_" + to_string(c) + ".csv"));
        write_trace_csv(f, tr);
        rows.push_back(summarize(cfg, c, tr));
    }
    std::ofstream f = open_out(dir / "compare.csv");
    f << "controller,thd_ia,hc_vdc,vdc_mean_error,iq_mean\n" << std::setprecision(17);
    for (const auto& r : rows)
        f << r.controller << ',' << r.thd_ia << ',' << r.hc_vdc << ',' << r.vdc_mean_error << ',' << r.iq_mean << '\n';
    out << "scenario " << cfg.scenario.name << '\n';
    print_table(out, rows);
    out << "wrote " << (dir / "compare.csv").string() << '\n';
    return ok;
}

int cmd_analyze(const Options& o, const std::string& path, std::ostream& out) {
    RunConfig     cfg = resolve(o, false);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trace '" + path + "'");
    SimulationTrace tr = read_trace_csv(in, cfg.params.omega);
    fill_metrics(tr, cfg.scenario.metric_order);
    RunSummary s = summarize(cfg, cfg.controller, tr);
    s.controller = "-";
    s.scenario   = fs::path(path).filename().string();
    print_table(out, {s});
    if (!tr.records.empty()) {
        const auto   t  = tr.times();
        const auto   ia = tr.column("i_a");
        const double w  = cfg.params.omega;
        const double x1 = phasor_magnitude_series(t, ia, 1, w).back();
        out << "|I_a,k| / |I_a,1| at the last sample:";
        for (int k = 2; k <= 7; ++k) out << "  k=" << k << ' ' << phasor_magnitude_series(t, ia, k, w).back() / x1;
        out << '\n';
    }
    if (o.out != "out" || fs::exists(o.out)) {
        const fs::path dir = prepare_out(o.out);
        open_out(dir / "analysis.json") << summary_json(s).dump(1) << '\n';
    }
    return ok;
}

void write_failure(const std::string& dir, const std::string& command, const std::string& what, long index) {
    fs::path p = dir.empty() ? fs::path("failure.json") : fs::path(dir) / "failure.json";
    std::error_code ec;
    fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path(), ec);
    std::ofstream f(p);
    json j = {{"command", command}, {"error", what}};
    if (index >= 0) j["record_index"] = index;
    if (f) f << j.dump(1) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Harmonic-domain forwarding control of a grid-tied AC/DC converter"};
    app.require_subcommand(1);
    Options                  o;
    std::vector<std::string> compare_list;
    std::string              trace_path;

    auto add_common = [&](CLI::App* sub, bool scenario) {
        sub->add_option("--params", o.params, "converter parameter file (INI)");
        if (scenario) sub->add_option("--scenario", o.scenario, "canonical scenario name or run file (INI)");
        else sub->add_option("--scenario", o.scenario, "run file (INI) with [tuning] / [params] sections");
        sub->add_option("--controller", o.controller, "d1, d2, d3, d3_6, pi, pi_notch, fixed");
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--order", o.order, "harmonic order (runtime band, or truncation for spectrum)");
        sub->add_option("--seed", o.seed, "noise seed");
    };
    CLI::App* syn = app.add_subcommand("synthesize", "compute gains and write the controller artifact");
    add_common(syn, false);
    CLI::App* sim = app.add_subcommand("simulate", "run a scenario and write the trace");
    add_common(sim, true);
    sim->add_option("--artifact", o.artifact, "use a saved artifact instead of synthesizing");
    CLI::App* spec = app.add_subcommand("spectrum", "eigenvalues of the truncated harmonic state matrix");
    add_common(spec, false);
    spec->add_option("--artifact", o.artifact, "use a saved artifact instead of synthesizing");
    CLI::App* cmp = app.add_subcommand("compare", "run one scenario under several controllers");
    add_common(cmp, true);
    cmp->add_option("controllers", compare_list, "controllers to compare (default: run file list)");
    CLI::App* ana = app.add_subcommand("analyze", "recompute metrics of a trace CSV");
    add_common(ana, false);
    ana->add_option("trace", trace_path, "trace CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    CLI::App*         sub  = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        if (sub == syn) return cmd_synthesize(o, out);
        if (sub == sim) return cmd_simulate(o, out);
        if (sub == spec) return cmd_spectrum(o, out);
        if (sub == cmp) return cmd_compare(o, compare_list, out);
        return cmd_analyze(o, trace_path, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return config_error;
    } catch (const InfeasibleSetpoint& e) {
        err << "configuration error: " << e.what() << '\n';
        return config_error;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        write_failure(o.out, name, e.what(), e.record_index());
        return numerical_failure;
    } catch (const SolverError& e) {
        err << "numerical failure: " << e.what() << '\n';
        write_failure(o.out, name, e.what(), -1);
        return numerical_failure;
    }
}

}  // namespace hctl::cli
