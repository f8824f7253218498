#include "hctl/pll.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hctl {

namespace {
double wrap(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double           w      = std::fmod(theta, two_pi);
    if (w < 0.0) w += two_pi;
    return w >= two_pi ? 0.0 : w;
}
}  // namespace

PllState pll_init(double theta, double omega) { return {wrap(theta), omega, 0.0, 0.0}; }

double pll_phase_error(const Vec3& e_abc, double theta_hat, const PllConfig& cfg) {
    return -park(e_abc, theta_hat)(1) / (std::sqrt(3.0) * cfg.E_rms);
}

PllState pll_step(const Vec3& e_abc, const PllState& s, double Ts, const PllConfig& cfg) {
    const double err = pll_phase_error(e_abc, s.theta_hat, cfg);

    const double ca   = 2.0 / (2.0 * std::numbers::pi * cfg.f_zero * Ts);
    const double cb   = 2.0 / (2.0 * std::numbers::pi * cfg.f_pole * Ts);
    const double lead = ((1.0 + ca) * err + (1.0 - ca) * s.err_prev - (1.0 - cb) * s.lead_prev) / (1.0 + cb);

    PllState next  = s;
    next.err_prev  = err;
    next.lead_prev = lead;

    const double omega = s.omega_hat + 0.5 * Ts * cfg.gain * (lead + s.lead_prev);
    next.omega_hat     = std::clamp(omega, cfg.omega_min, cfg.omega_max);
    next.theta_hat     = wrap(s.theta_hat + Ts * s.omega_hat);
    return next;
}

}  // namespace hctl
