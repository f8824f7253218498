#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hctl/baseline_pi.hpp"
#include "hctl/controller.hpp"
#include "hctl/converter.hpp"
#include "hctl/pll.hpp"

namespace hctl {

enum class InitialMode { diode, setpoint, custom };

struct ScenarioEvent {
    enum class Kind {
        sink_step,       ///< i_sink += value
        sink_sine,       ///< i_sink += value sin(2 pi frequency (t - time))
        vref_step,       ///< v_ref += value
        grid_frequency,  ///< grid frequency set to value (Hz)
    };
    double time      = 0.0;
    Kind   kind      = Kind::sink_step;
    double value     = 0.0;
    double frequency = 0.0;
};

std::string        to_string(ScenarioEvent::Kind kind);
ScenarioEvent::Kind parse_event_kind(const std::string& name);

struct Scenario {
    std::string                name     = "custom";
    double                     duration = 0.1;
    double                     dt       = 1e-6;
    double                     Ts       = 50e-6;
    InitialMode                initial  = InitialMode::diode;
    Vec4                       custom_state = Vec4::Zero();
    double                     initial_sink = 0.0;
    std::vector<ScenarioEvent> events;
    bool                       pll_enabled = true;
    /// Extra 2nd / 3rd multiples added to every injected sinusoid, relative amplitude.
    double                     sine_harmonic2 = 0.0;
    double                     sine_harmonic3 = 0.0;
    /// Holds v_dc at its initial value (the DC side becomes an ideal source).
    bool                       hold_vdc  = false;
    double                     noise_std = 0.0;  ///< additive white noise on measured currents and voltages
    std::uint64_t              seed      = 1;
    int                        metric_order = 25;

    /// Throws ConfigError on inconsistent timing or unsorted events.
    void validate() const;
};

/// Ideal six-pulse bridge start: v_dc = sqrt(6) E_rms, i = 0.
StateAbc diode_init(const ConverterParams& p);

enum class ControllerChoice { d1, d2, d3, d3_6, pi, pi_notch, fixed };

std::string      to_string(ControllerChoice c);
ControllerChoice parse_controller_choice(const std::string& name);
bool             is_harmonic(ControllerChoice c);

struct ControllerSetup {
    ControllerChoice                          choice = ControllerChoice::d3;
    std::shared_ptr<const ControllerArtifact> artifact;     ///< harmonic controllers
    PiCascadeConfig                           pi;           ///< pi and pi_notch
    PllConfig                                 pll;
    Vec3                                      fixed_duty = Vec3::Constant(0.5);
};

struct TraceRecord {
    double          t = 0.0;
    Vec3            i_abc = Vec3::Zero();
    double          v_dc  = 0.0;
    Vec2            i_dq  = Vec2::Zero();
    Vec3            d     = Vec3::Zero();
    Eigen::VectorXd z;
    double          theta     = 0.0;
    double          theta_hat = 0.0;
    double          omega_hat = 0.0;
    double          i_sink    = 0.0;
    double          i_dc      = 0.0;
    double          lyapunov  = std::numeric_limits<double>::quiet_NaN();
    double          thd_ia    = std::numeric_limits<double>::quiet_NaN();
    double          hc_vdc    = std::numeric_limits<double>::quiet_NaN();
};

struct SimulationTrace {
    std::vector<TraceRecord> records;
    double Ts    = 50e-6;
    double omega = 0.0;  ///< nominal, used for the metrics
    double max_energy_residual = 0.0;
    double max_current_sum     = 0.0;
    Vec4   final_state = Vec4::Zero();

    std::vector<double> times() const;
    /// Named column: i_a, i_b, i_c, v_dc, i_d, i_q, d_a, d_b, d_c, theta_hat, omega_hat, i_sink, i_dc, ...
    std::vector<double> column(const std::string& name) const;
};

/**
 * Fixed-step closed loop: RK4 at dt, controller sampled every Ts with the
 * duty held in between. Records are taken at each sampling instant before the
 * control update. THD(i_a) and HC(v_dc) are filled in afterwards.
 */
SimulationTrace run(const Scenario& scenario, const ConverterParams& plant, const ControllerSetup& controller);

/// Fills thd_ia and hc_vdc of every record.
void fill_metrics(SimulationTrace& trace, int k_max = 25);

/// THD = sqrt(sum_{k=2..k_max} |X_k|^2) / |X_1|, NaN before the first full window or when |X_1| vanishes.
std::vector<double> thd_series(std::span<const double> t, std::span<const double> x, double omega, int k_max = 25);
/// HC = sum_{k=1..k_max} 2 |X_k|.
std::vector<double> hc_series(std::span<const double> t, std::span<const double> x, double omega, int k_max = 25);
/// |X_k(t)|.
std::vector<double> phasor_magnitude_series(std::span<const double> t, std::span<const double> x, int k,
                                            double omega);

/// Mean of a column over records with t in [t0, t1]; NaN entries are skipped.
double window_mean(const SimulationTrace& trace, const std::string& column, double t0, double t1);
double window_max_abs(const SimulationTrace& trace, const std::string& column, double t0, double t1);

/// Steady value of |X_k| of a column, read at the last record.
double final_phasor_magnitude(const SimulationTrace& trace, const std::string& column, int k);

/// Named scenarios: fig4, startup, step, harmonic-injection, injection-300hz.
Scenario              canonical_scenario(const std::string& name);
std::vector<std::string> canonical_scenario_names();

void            write_trace_csv(std::ostream& out, const SimulationTrace& trace);
SimulationTrace read_trace_csv(std::istream& in, double omega);

}  // namespace hctl
