#include "hctl/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "hctl/error.hpp"

namespace hctl {

namespace pt = boost::property_tree;

namespace {

double to_double(const std::string& text, const std::string& key) {
    try {
        std::size_t used  = 0;
        double      value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' is not a number: '" + text + "'");
    }
}

int to_int(const std::string& text, const std::string& key) {
    const double v = to_double(text, key);
    if (v != static_cast<int>(v)) throw ConfigError("'" + key + "' must be an integer");
    return static_cast<int>(v);
}

void check_keys(const pt::ptree& sec, const std::string& name, const std::set<std::string>& allowed,
                const std::string& prefix_allowed = "") {
    for (const auto& [key, value] : sec) {
        if (allowed.count(key)) continue;
        if (!prefix_allowed.empty() && key.rfind(prefix_allowed, 0) == 0) continue;
        throw ConfigError("unknown key '" + key + "' in section [" + name + "]");
    }
}

ScenarioEvent parse_event(const std::string& text, const std::string& key) {
    std::istringstream       is(text);
    std::vector<std::string> parts;
    for (std::string w; is >> w;) parts.push_back(w);
    if (parts.size() < 3 || parts.size() > 4)
        throw ConfigError("'" + key + "' must read 'time kind value [frequency]'");
    ScenarioEvent e;
    e.time  = to_double(parts[0], key);
    e.kind  = parse_event_kind(parts[1]);
    e.value = to_double(parts[2], key);
    if (parts.size() == 4) e.frequency = to_double(parts[3], key);
    return e;
}

void parse_scenario(const pt::ptree& sec, Scenario& s) {
    check_keys(sec, "scenario",
               {"base", "name", "duration", "dt", "Ts", "initial", "initial_sink", "pll", "noise_std", "seed",
                "sine_harmonic2", "sine_harmonic3", "hold_vdc", "metric_order"},
               "event");
    if (auto b = sec.get_optional<std::string>("base")) s = canonical_scenario(*b);
    std::vector<std::pair<int, ScenarioEvent>> events;
    for (const auto& [key, value] : sec) {
        const std::string v = value.data();
        if (key == "name") s.name = v;
        else if (key == "duration") s.duration = to_double(v, key);
        else if (key == "dt") s.dt = to_double(v, key);
        else if (key == "Ts") s.Ts = to_double(v, key);
        else if (key == "initial") {
            if (v == "diode") s.initial = InitialMode::diode;
            else if (v == "setpoint") s.initial = InitialMode::setpoint;
            else throw ConfigError("'initial' must be diode or setpoint");
        } else if (key == "initial_sink") s.initial_sink = to_double(v, key);
        else if (key == "pll") s.pll_enabled = parse_bool(v, key);
        else if (key == "noise_std") s.noise_std = to_double(v, key);
        else if (key == "seed") s.seed = static_cast<std::uint64_t>(to_int(v, key));
        else if (key == "sine_harmonic2") s.sine_harmonic2 = to_double(v, key);
        else if (key == "sine_harmonic3") s.sine_harmonic3 = to_double(v, key);
        else if (key == "hold_vdc") s.hold_vdc = parse_bool(v, key);
        else if (key == "metric_order") s.metric_order = to_int(v, key);
        else if (key.rfind("event", 0) == 0) {
            const std::string idx = key.substr(5);
            events.emplace_back(idx.empty() ? 0 : to_int(idx, key), parse_event(v, key));
        }
    }
    if (!events.empty()) {
        std::stable_sort(events.begin(), events.end(), [](auto& a, auto& b) { return a.first < b.first; });
        s.events.clear();
        for (auto& [i, e] : events) s.events.push_back(e);
    }
}

void parse_tuning(const pt::ptree& sec, TuningOverrides& t) {
    check_keys(sec, "tuning",
               {"q_vdc", "h1_divisor", "h2_divisor", "l1", "l2", "l3", "l4", "l6", "H1", "alpha_prime", "i_sink",
                "keep_order", "runtime_order", "max_order", "tol", "integrator", "Ts"});
    for (const auto& [key, value] : sec) {
        const std::string v = value.data();
        if (key == "q_vdc") t.q_vdc = to_double(v, key);
        else if (key == "h1_divisor") t.h1_divisor = to_double(v, key);
        else if (key == "h2_divisor") t.h2_divisor = to_double(v, key);
        else if (key == "l1") t.l1 = to_double(v, key);
        else if (key == "l2") t.l2 = to_double(v, key);
        else if (key == "l3") t.l3 = to_double(v, key);
        else if (key == "l4") t.l4 = to_double(v, key);
        else if (key == "l6") t.l6 = to_double(v, key);
        else if (key == "H1") t.H1 = to_double(v, key);
        else if (key == "alpha_prime") t.alpha_prime = to_double(v, key);
        else if (key == "i_sink") t.i_sink = to_double(v, key);
        else if (key == "keep_order") t.solver.keep_order = to_int(v, key);
        else if (key == "runtime_order") t.runtime_order = to_int(v, key);
        else if (key == "max_order") t.solver.max_order = to_int(v, key);
        else if (key == "tol") t.solver.tol = to_double(v, key);
        else if (key == "Ts") t.Ts = to_double(v, key);
        else if (key == "integrator") {
            if (v == "zoh") t.integrator = IntegratorDiscretization::zoh;
            else if (v == "as_printed") t.integrator = IntegratorDiscretization::as_printed;
            else throw ConfigError("'integrator' must be zoh or as_printed");
        }
    }
}

void parse_pi(const pt::ptree& sec, PiCascadeConfig& c, bool& gains_set) {
    check_keys(sec, "baseline_pi",
               {"K_P_i", "K_I_i", "K_P_v", "K_I_v", "omega_cons", "zeta_cons", "ref_filter", "notch_frequency",
                "notch_zeta"});
    for (const auto& [key, value] : sec) {
        const std::string v = value.data();
        if (key == "K_P_i") c.K_P_i = to_double(v, key), gains_set = true;
        else if (key == "K_I_i") c.K_I_i = to_double(v, key), gains_set = true;
        else if (key == "K_P_v") c.K_P_v = to_double(v, key);
        else if (key == "K_I_v") c.K_I_v = to_double(v, key);
        else if (key == "omega_cons") c.omega_cons = to_double(v, key);
        else if (key == "zeta_cons") c.zeta_cons = to_double(v, key);
        else if (key == "ref_filter") c.ref_filter_enabled = parse_bool(v, key);
        else if (key == "notch_frequency") c.notch_omega = 2.0 * std::numbers::pi * to_double(v, key);
        else if (key == "notch_zeta") c.notch_zeta = to_double(v, key);
    }
    c.validate();
}

void parse_pll(const pt::ptree& sec, PllConfig& c) {
    check_keys(sec, "pll", {"gain", "f_zero", "f_pole", "f_min", "f_max"});
    for (const auto& [key, value] : sec) {
        const std::string v = value.data();
        if (key == "gain") c.gain = to_double(v, key);
        else if (key == "f_zero") c.f_zero = to_double(v, key);
        else if (key == "f_pole") c.f_pole = to_double(v, key);
        else if (key == "f_min") c.omega_min = 2.0 * std::numbers::pi * to_double(v, key);
        else if (key == "f_max") c.omega_max = 2.0 * std::numbers::pi * to_double(v, key);
    }
    if (!(c.gain > 0.0 && c.f_zero > 0.0 && c.f_pole > 0.0 && c.omega_min > 0.0 && c.omega_max > c.omega_min))
        throw ConfigError("PLL settings must be positive with f_min < f_max");
}

}  // namespace

bool parse_bool(const std::string& text, const std::string& key) {
    const std::string v = boost::algorithm::to_lower_copy(text);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("'" + key + "' must be a boolean, got '" + text + "'");
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ": " + e.message());
    }
    RunConfig cfg;
    try {
        for (const auto& [name, sec] : tree) {
            if (name == "scenario") parse_scenario(sec, cfg.scenario);
            else if (name == "tuning") parse_tuning(sec, cfg.tuning);
            else if (name == "baseline_pi") parse_pi(sec, cfg.pi, cfg.pi_gains_set);
            else if (name == "pll") parse_pll(sec, cfg.pll);
            else if (name == "params") {
                std::ostringstream os;
                pt::ptree          wrapped;
                wrapped.add_child("params", sec);
                pt::write_ini(os, wrapped);
                std::istringstream is(os.str());
                cfg.params     = parse_params(is, source);
                cfg.has_params = true;
            } else if (name == "controller") {
                check_keys(sec, "controller", {"name", "compare"});
                if (auto n = sec.get_optional<std::string>("name")) cfg.controller = parse_controller_choice(*n);
                if (auto c = sec.get_optional<std::string>("compare")) {
                    std::vector<std::string> parts;
                    boost::algorithm::split(parts, *c, boost::is_any_of(","));
                    for (auto& p : parts) {
                        boost::algorithm::trim(p);
                        if (p.empty()) continue;
                        parse_controller_choice(p);
                        cfg.compare.push_back(p);
                    }
                }
            } else {
                throw ConfigError("unknown section [" + name + "]");
            }
        }
        cfg.scenario.validate();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind(source, 0) == 0) throw;
        throw ConfigError(source + ": " + msg);
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run file '" + path + "'");
    return parse_run_config(in, path);
}

}  // namespace hctl
