#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hctl/baseline_pi.hpp"
#include "hctl/controller.hpp"
#include "hctl/pll.hpp"
#include "hctl/simulation.hpp"

namespace hctl {

/**
 * Contents of a run file. Sections:
 *   [scenario]     base, duration, dt, Ts, initial, initial_sink, pll, noise_std, seed,
 *                  sine_harmonic2, sine_harmonic3, hold_vdc, metric_order, event<N> = "time kind value [Hz]"
 *   [controller]   name, compare (comma separated)
 *   [tuning]       q_vdc, h1_divisor, h2_divisor, l1, l2, l3, l4, l6, H1, alpha_prime, i_sink,
 *                  keep_order, runtime_order, max_order, tol, integrator (zoh | as_printed)
 *   [baseline_pi]  K_P_i, K_I_i, K_P_v, K_I_v, omega_cons, zeta_cons, ref_filter, notch_frequency, notch_zeta
 *   [pll]          gain, f_zero, f_pole, f_min, f_max
 *   [params]       optional plant parameters, same keys as a parameter file
 * Unknown sections or keys are rejected.
 */
struct RunConfig {
    ConverterParams          params;
    bool                     has_params = false;
    Scenario                 scenario;
    ControllerChoice         controller = ControllerChoice::d3;
    std::vector<std::string> compare;
    TuningOverrides          tuning;
    bool                     pi_gains_set = false;  ///< K_P_i / K_I_i given explicitly
    PiCascadeConfig          pi;
    PllConfig                pll;
};

RunConfig parse_run_config(std::istream& in, const std::string& source = "<stream>");
RunConfig load_run_config(const std::string& path);

bool parse_bool(const std::string& text, const std::string& key);

}  // namespace hctl
