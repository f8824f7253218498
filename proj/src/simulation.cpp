#include "hctl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "hctl/error.hpp"
#include "hctl/harmonic.hpp"

namespace hctl {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

std::string to_string(ScenarioEvent::Kind kind) {
    switch (kind) {
        case ScenarioEvent::Kind::sink_step: return "sink_step";
        case ScenarioEvent::Kind::sink_sine: return "sink_sine";
        case ScenarioEvent::Kind::vref_step: return "vref_step";
        case ScenarioEvent::Kind::grid_frequency: return "grid_frequency";
    }
    return "sink_step";
}

ScenarioEvent::Kind parse_event_kind(const std::string& name) {
    if (name == "sink_step") return ScenarioEvent::Kind::sink_step;
    if (name == "sink_sine") return ScenarioEvent::Kind::sink_sine;
    if (name == "vref_step") return ScenarioEvent::Kind::vref_step;
    if (name == "grid_frequency") return ScenarioEvent::Kind::grid_frequency;
    throw ConfigError("unknown event kind '" + name + "' (valid: sink_step, sink_sine, vref_step, grid_frequency)");
}

void Scenario::validate() const {
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw ConfigError("scenario duration must be >= 0");
    if (!(dt > 0.0) || !(Ts > 0.0)) throw ConfigError("scenario dt and Ts must be positive");
    const double ratio = Ts / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio || std::round(ratio) < 1.0)
        throw ConfigError("Ts must be an integer multiple of dt");
    double last = 0.0;
    for (const auto& e : events) {
        if (e.time < last) throw ConfigError("scenario events must be sorted by time");
        if (e.time > duration) throw ConfigError("scenario event after the end of the run");
        if (e.kind == ScenarioEvent::Kind::sink_sine && !(e.frequency > 0.0))
            throw ConfigError("sinusoidal sink event needs a positive frequency");
        if (e.kind == ScenarioEvent::Kind::grid_frequency && !(e.value > 0.0))
            throw ConfigError("grid frequency event needs a positive frequency");
        last = e.time;
    }
    if (noise_std < 0.0) throw ConfigError("noise level must be >= 0");
    if (metric_order < 2) throw ConfigError("metric order must be >= 2");
}

StateAbc diode_init(const ConverterParams& p) { return {Vec3::Zero(), std::sqrt(6.0) * p.E_rms}; }

std::string to_string(ControllerChoice c) {
    switch (c) {
        case ControllerChoice::d1: return "d1";
        case ControllerChoice::d2: return "d2";
        case ControllerChoice::d3: return "d3";
        case ControllerChoice::d3_6: return "d3_6";
        case ControllerChoice::pi: return "pi";
        case ControllerChoice::pi_notch: return "pi_notch";
        case ControllerChoice::fixed: return "fixed";
    }
    return "d3";
}

ControllerChoice parse_controller_choice(const std::string& name) {
    if (name == "d1") return ControllerChoice::d1;
    if (name == "d2") return ControllerChoice::d2;
    if (name == "d3") return ControllerChoice::d3;
    if (name == "d3_6" || name == "d3+6th") return ControllerChoice::d3_6;
    if (name == "pi") return ControllerChoice::pi;
    if (name == "pi_notch") return ControllerChoice::pi_notch;
    if (name == "fixed") return ControllerChoice::fixed;
    throw ConfigError("unknown controller '" + name + "' (valid: d1, d2, d3, d3_6, pi, pi_notch, fixed)");
}

bool is_harmonic(ControllerChoice c) {
    return c == ControllerChoice::d1 || c == ControllerChoice::d2 || c == ControllerChoice::d3 ||
           c == ControllerChoice::d3_6;
}

// Trace

std::vector<double> SimulationTrace::times() const {
    std::vector<double> t;
    t.reserve(records.size());
    for (const auto& r : records) t.push_back(r.t);
    return t;
}

std::vector<double> SimulationTrace::column(const std::string& name) const {
    std::vector<double> out;
    out.reserve(records.size());
    auto pick = [&](auto f) {
        for (const auto& r : records) out.push_back(f(r));
    };
    if (name == "t") pick([](const TraceRecord& r) { return r.t; });
    else if (name == "i_a") pick([](const TraceRecord& r) { return r.i_abc(0); });
    else if (name == "i_b") pick([](const TraceRecord& r) { return r.i_abc(1); });
    else if (name == "i_c") pick([](const TraceRecord& r) { return r.i_abc(2); });
    else if (name == "v_dc") pick([](const TraceRecord& r) { return r.v_dc; });
    else if (name == "i_d") pick([](const TraceRecord& r) { return r.i_dq(0); });
    else if (name == "i_q") pick([](const TraceRecord& r) { return r.i_dq(1); });
    else if (name == "d_a") pick([](const TraceRecord& r) { return r.d(0); });
    else if (name == "d_b") pick([](const TraceRecord& r) { return r.d(1); });
    else if (name == "d_c") pick([](const TraceRecord& r) { return r.d(2); });
    else if (name == "theta") pick([](const TraceRecord& r) { return r.theta; });
    else if (name == "theta_hat") pick([](const TraceRecord& r) { return r.theta_hat; });
    else if (name == "omega_hat") pick([](const TraceRecord& r) { return r.omega_hat; });
    else if (name == "i_sink") pick([](const TraceRecord& r) { return r.i_sink; });
    else if (name == "i_dc") pick([](const TraceRecord& r) { return r.i_dc; });
    else if (name == "lyapunov") pick([](const TraceRecord& r) { return r.lyapunov; });
    else if (name == "thd_ia") pick([](const TraceRecord& r) { return r.thd_ia; });
    else if (name == "hc_vdc") pick([](const TraceRecord& r) { return r.hc_vdc; });
    else throw ConfigError("unknown trace column '" + name + "'");
    return out;
}

// Simulation

namespace {

struct Sinusoid {
    double start, amplitude, frequency;
};

struct LoadProfile {
    double                base = 0.0;
    std::vector<double>   step_times, step_values;
    std::vector<Sinusoid> sines;
    double                h2 = 0.0, h3 = 0.0;

    /// Steps switch at the sampling instant t_step so that RK4 never straddles them.
    double operator()(double t, double t_step) const {
        double i = base;
        for (std::size_t k = 0; k < step_times.size(); ++k)
            if (t_step >= step_times[k] - 1e-12) i += step_values[k];
        for (const auto& s : sines) {
            if (t < s.start) continue;
            const double ph = kTwoPi * s.frequency * (t - s.start);
            i += s.amplitude * (std::sin(ph) + h2 * std::sin(2.0 * ph) + h3 * std::sin(3.0 * ph));
        }
        return i;
    }
};

}  // namespace

SimulationTrace run(const Scenario& sc, const ConverterParams& plant, const ControllerSetup& ctl) {
    sc.validate();
    plant.validate();
    const bool harmonic = is_harmonic(ctl.choice);
    if (harmonic && !ctl.artifact) throw ConfigError("harmonic controller selected without a synthesized artifact");

    SimulationTrace trace;
    trace.Ts    = sc.Ts;
    trace.omega = plant.omega;

    const int    substeps = static_cast<int>(std::lround(sc.Ts / sc.dt));
    const double dt       = sc.Ts / substeps;
    const long   n_steps  = static_cast<long>(std::floor(sc.duration / sc.Ts + 1e-9));

    // Initial state
    const Setpoint sp_plant = compute_setpoint(plant, sc.initial_sink);
    Vec4           x;
    switch (sc.initial) {
        case InitialMode::diode: x = diode_init(plant).vector(); break;
        case InitialMode::setpoint: x = sp_plant.state(0.0); break;
        case InitialMode::custom: x = sc.custom_state; break;
    }

    LoadProfile load;
    load.base = sc.initial_sink;
    load.h2   = sc.sine_harmonic2;
    load.h3   = sc.sine_harmonic3;
    for (const auto& e : sc.events) {
        if (e.kind == ScenarioEvent::Kind::sink_step) {
            load.step_times.push_back(e.time);
            load.step_values.push_back(e.value);
        } else if (e.kind == ScenarioEvent::Kind::sink_sine) {
            load.sines.push_back({e.time, e.value, e.frequency});
        }
    }

    // Controllers
    std::unique_ptr<DiscreteController> hc;
    if (harmonic) hc = std::make_unique<DiscreteController>(ctl.artifact);
    PiCascadeConfig pi_cfg = ctl.pi;
    pi_cfg.notch_enabled   = ctl.choice == ControllerChoice::pi_notch;
    PiCascadeState pi_state;
    const bool     use_pi = ctl.choice == ControllerChoice::pi || ctl.choice == ControllerChoice::pi_notch;
    if (use_pi) {
        pi_state = pi_init(pi_cfg, sc.Ts, x(3));
        if (sc.initial == InitialMode::setpoint) {
            pi_preload(pi_state, sp_plant);
            pi_state.notch.prime(pi_state.int_v);
        }
    }

    double   omega_grid = plant.omega;
    double   theta      = 0.0;
    PllState pll        = pll_init(theta, omega_grid);
    PllConfig pll_cfg   = ctl.pll;
    pll_cfg.E_rms       = plant.E_rms;
    double   v_ref      = plant.v_dc_ref;

    std::mt19937_64                  rng(sc.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto measure = [&](double v) { return sc.noise_std > 0.0 ? v + sc.noise_std * noise(rng) : v; };

    std::size_t next_event = 0;
    trace.records.reserve(static_cast<std::size_t>(n_steps));

    for (long n = 0; n < n_steps; ++n) {
        const double t0 = n * sc.Ts;
        while (next_event < sc.events.size() && sc.events[next_event].time <= t0 + 1e-12) {
            const auto& e = sc.events[next_event++];
            if (e.kind == ScenarioEvent::Kind::vref_step) v_ref += e.value;
            if (e.kind == ScenarioEvent::Kind::grid_frequency) omega_grid = kTwoPi * e.value;
        }

        Vec4 xm;
        for (int i = 0; i < 4; ++i) xm(i) = measure(x(i));
        Vec3 em = grid_voltage(plant.E_rms, theta);
        for (int i = 0; i < 3; ++i) em(i) = measure(em(i));

        const double th_hat = sc.pll_enabled ? pll.theta_hat : theta;
        const double om_hat = sc.pll_enabled ? pll.omega_hat : omega_grid;

        Vec3 d;
        TraceRecord rec;
        if (harmonic) {
            const ControllerArtifact& a = *ctl.artifact;
            const Vec3 delta_r(a.setpoint.v_dc - v_ref, 0.0, 0.0);
            rec.z        = hc->z();
            rec.lyapunov = lyapunov_value(xm, hc->z(), th_hat, a);
            d            = hc->step(xm, th_hat, om_hat, delta_r);
        } else if (use_pi) {
            d = pi_baseline_step(xm, park(em, th_hat), th_hat, om_hat, v_ref, pi_cfg, pi_state, plant, sc.Ts).d;
        } else {
            d = ctl.fixed_duty;
        }

        rec.t         = t0;
        rec.i_abc     = x.head<3>();
        rec.v_dc      = x(3);
        rec.i_dq      = park(x.head<3>(), theta);
        rec.d         = d;
        rec.theta     = theta;
        rec.theta_hat = th_hat;
        rec.omega_hat = om_hat;
        rec.i_sink    = load(t0, t0);
        rec.i_dc      = rec.i_sink + x(3) / plant.R_L;
        trace.records.push_back(std::move(rec));

        if (sc.pll_enabled) pll = pll_step(em, pll, sc.Ts, pll_cfg);

        // Plant over [t0, t0 + Ts] with d held
        auto f = [&](double t, const Vec4& s, double& rate) {
            const double th  = theta + omega_grid * (t - t0);
            const Vec3   e   = grid_voltage(plant.E_rms, th);
            const double idc = load(t, t0) + s(3) / plant.R_L;
            Vec4         dx  = abc_derivative(s, d, e, idc, plant);
            rate             = energy_rate(s, d, e, idc, plant);
            if (sc.hold_vdc) dx(3) = 0.0;
            return dx;
        };
        for (int k = 0; k < substeps; ++k) {
            const double t = t0 + k * dt;
            double       r1, r2, r3, r4;
            const Vec4   k1 = f(t, x, r1);
            const Vec4   k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1, r2);
            const Vec4   k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2, r3);
            const Vec4   k4 = f(t + dt, x + dt * k3, r4);
            const Vec4   xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!sc.hold_vdc) {
                const double dE   = stored_energy(xn, plant) - stored_energy(x, plant);
                const double quad = dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
                const Vec3   e    = grid_voltage(plant.E_rms, theta + omega_grid * (t - t0));
                const double scale = dt * (plant.r * x.head<3>().squaredNorm() + std::abs(e.dot(x.head<3>())) +
                                           std::abs(x(3) * (load(t, t0) + x(3) / plant.R_L)));
                if (scale > 1e-300)
                    trace.max_energy_residual = std::max(trace.max_energy_residual, std::abs(dE - quad) / scale);
            }
            x = xn;
        }
        theta = std::fmod(theta + omega_grid * sc.Ts, kTwoPi);
        trace.max_current_sum = std::max(trace.max_current_sum, std::abs(x.head<3>().sum()));
        if (!x.allFinite())
            throw NumericalError("plant state became non-finite after record " + std::to_string(n), n);
    }
    trace.final_state = x;
    fill_metrics(trace, sc.metric_order);
    return trace;
}

// Metrics

namespace {

PhasorTrajectory phasors_of(std::span<const double> t, std::span<const double> x, double omega, int order) {
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = x[i];
    return sliding_fourier(t, m, kTwoPi / omega, order);
}

template <class F>
std::vector<double> phasor_metric(std::span<const double> t, std::span<const double> x, double omega, int order,
                                  F metric) {
    std::vector<double> out(x.size(), kNaN);
    if (x.size() < 2) return out;
    const double dt     = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    const long   window = std::lround(kTwoPi / omega / dt);
    if (static_cast<long>(x.size()) < window + 1) return out;
    const PhasorTrajectory tr = phasors_of(t, x, omega, order);
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < tr.samples.size(); ++i) out[window + i] = metric(tr.samples[i], scale);
    return out;
}

}  // namespace

std::vector<double> thd_series(std::span<const double> t, std::span<const double> x, double omega, int k_max) {
    return phasor_metric(t, x, omega, k_max, [&](const PhasorVector& X, double scale) {
        const double f = std::abs(X(0, 1));
        if (f <= 1e-9 * scale || f == 0.0) return kNaN;
        double s = 0.0;
        for (int k = 2; k <= k_max; ++k) s += std::norm(X(0, k));
        return std::sqrt(s) / f;
    });
}

std::vector<double> hc_series(std::span<const double> t, std::span<const double> x, double omega, int k_max) {
    return phasor_metric(t, x, omega, k_max, [&](const PhasorVector& X, double) {
        double s = 0.0;
        for (int k = 1; k <= k_max; ++k) s += 2.0 * std::abs(X(0, k));
        return s;
    });
}

std::vector<double> phasor_magnitude_series(std::span<const double> t, std::span<const double> x, int k,
                                            double omega) {
    return phasor_metric(t, x, omega, std::abs(k), [&](const PhasorVector& X, double) { return std::abs(X(0, k)); });
}

void fill_metrics(SimulationTrace& trace, int k_max) {
    if (trace.records.size() < 2) return;
    const auto t = trace.times();
    std::vector<double> thd, hc;
    try {
        thd = thd_series(t, trace.column("i_a"), trace.omega, k_max);
        hc  = hc_series(t, trace.column("v_dc"), trace.omega, k_max);
    } catch (const ConfigError&) {
        return;  // period not a multiple of the record spacing
    }
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        trace.records[i].thd_ia = thd[i];
        trace.records[i].hc_vdc = hc[i];
    }
}

double window_mean(const SimulationTrace& trace, const std::string& column, double t0, double t1) {
    const auto c = trace.column(column);
    double     s = 0.0;
    long       n = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double t = trace.records[i].t;
        if (t < t0 - 1e-12 || t > t1 + 1e-12 || std::isnan(c[i])) continue;
        s += c[i];
        ++n;
    }
    return n > 0 ? s / n : kNaN;
}

double window_max_abs(const SimulationTrace& trace, const std::string& column, double t0, double t1) {
    const auto c = trace.column(column);
    double     m = kNaN;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double t = trace.records[i].t;
        if (t < t0 - 1e-12 || t > t1 + 1e-12 || std::isnan(c[i])) continue;
        m = std::isnan(m) ? std::abs(c[i]) : std::max(m, std::abs(c[i]));
    }
    return m;
}

double final_phasor_magnitude(const SimulationTrace& trace, const std::string& column, int k) {
    const auto s = phasor_magnitude_series(trace.times(), trace.column(column), k, trace.omega);
    return s.empty() ? kNaN : s.back();
}

// Canonical scenarios

std::vector<std::string> canonical_scenario_names() {
    return {"fig4", "startup", "step", "harmonic-injection", "injection-300hz"};
}

Scenario canonical_scenario(const std::string& name) {
    using K = ScenarioEvent::Kind;
    Scenario s;
    s.name = name;
    if (name == "fig4") {
        s.duration = 0.16;
        s.initial  = InitialMode::diode;
        s.events   = {{0.04, K::sink_step, 3.0, 0.0}, {0.08, K::sink_sine, 1.0, 150.0}};
    } else if (name == "startup") {
        s.duration = 0.1;
        s.initial  = InitialMode::diode;
    } else if (name == "step") {
        s.duration = 0.1;
        s.initial  = InitialMode::setpoint;
        s.events   = {{0.02, K::sink_step, 4.0, 0.0}};
    } else if (name == "harmonic-injection") {
        s.duration = 0.3;
        s.initial  = InitialMode::setpoint;
        s.events   = {{0.06, K::sink_step, 4.0, 0.0}, {0.06, K::sink_sine, std::sqrt(2.0), 150.0}};
    } else if (name == "injection-300hz") {
        s.duration = 0.3;
        s.initial  = InitialMode::setpoint;
        s.events   = {{0.02, K::sink_sine, 1.0, 300.0}};
    } else {
        std::string valid;
        for (const auto& n : canonical_scenario_names()) valid += (valid.empty() ? "" : ", ") + n;
        throw ConfigError("unknown scenario '" + name + "' (valid: " + valid + ")");
    }
    return s;
}

// CSV

namespace {
const char* kHeader = "t,i_a,i_b,i_c,v_dc,i_d,i_q,d_a,d_b,d_c,theta_hat,omega_hat,i_sink,i_dc,thd_ia,hc_vdc";
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
    out << kHeader << '\n';
    char buf[32];
    auto field = [&](double v, bool last) {
        if (!std::isnan(v)) {
            std::snprintf(buf, sizeof buf, "%.12g", v);
            out << buf;
        }
        out << (last ? '\n' : ',');
    };
    for (const auto& r : trace.records) {
        const double row[] = {r.t,      r.i_abc(0), r.i_abc(1), r.i_abc(2), r.v_dc,      r.i_dq(0),
                              r.i_dq(1), r.d(0),    r.d(1),     r.d(2),     r.theta_hat, r.omega_hat,
                              r.i_sink, r.i_dc,    r.thd_ia,   r.hc_vdc};
        constexpr int n = static_cast<int>(std::size(row));
        for (int i = 0; i < n; ++i) field(row[i], i == n - 1);
    }
}

SimulationTrace read_trace_csv(std::istream& in, double omega) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("trace file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) throw ConfigError("trace file header does not match the expected columns");
    SimulationTrace trace;
    trace.omega = omega;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream   ss(line);
        std::string         cell;
        while (std::getline(ss, cell, ',')) {
            if (cell.empty()) {
                v.push_back(kNaN);
                continue;
            }
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("trace line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (line.back() == ',') v.push_back(kNaN);
        if (v.size() != 16) throw ConfigError("trace line " + std::to_string(lineno) + ": expected 16 fields");
        TraceRecord r;
        r.t         = v[0];
        r.i_abc     = {v[1], v[2], v[3]};
        r.v_dc      = v[4];
        r.i_dq      = {v[5], v[6]};
        r.d         = {v[7], v[8], v[9]};
        r.theta_hat = v[10];
        r.omega_hat = v[11];
        r.i_sink    = v[12];
        r.i_dc      = v[13];
        r.thd_ia    = v[14];
        r.hc_vdc    = v[15];
        trace.records.push_back(r);
    }
    if (trace.records.size() >= 2) trace.Ts = trace.records[1].t - trace.records[0].t;
    return trace;
}

}  // namespace hctl
