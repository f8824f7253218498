#pragma once

#include "hctl/converter.hpp"

namespace hctl {

/// Loop H(s) = gain (1 + s/(2 pi f_zero)) / (1 + s/(2 pi f_pole)) / s^2 acting on the phase error.
struct PllConfig {
    double gain       = 1e5;
    double f_zero     = 5.0;
    double f_pole     = 500.0;
    double omega_min  = 2.0 * 3.14159265358979323846 * 30.0;
    double omega_max  = 2.0 * 3.14159265358979323846 * 80.0;
    double E_rms      = 45.0;  ///< normalization of the phase detector
};

struct PllState {
    double theta_hat = 0.0;  ///< wrapped to [0, 2 pi)
    double omega_hat = 0.0;
    double err_prev  = 0.0;  ///< lead-lag input at the previous step
    double lead_prev = 0.0;  ///< lead-lag output at the previous step
};

PllState pll_init(double theta, double omega);

/// q-axis phase detector: -e_q / (sqrt(3) E_rms) ~ theta - theta_hat near lock.
double pll_phase_error(const Vec3& e_abc, double theta_hat, const PllConfig& cfg);

/**
 * One sample of the synchronous-frame PLL. The lead-lag and the frequency
 * integrator are bilinear; theta_hat advances with the frequency held over the
 * step. Frequency is clamped to [omega_min, omega_max] without windup.
 */
PllState pll_step(const Vec3& e_abc, const PllState& state, double Ts, const PllConfig& cfg);

}  // namespace hctl
