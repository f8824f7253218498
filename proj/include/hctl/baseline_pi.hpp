#pragma once

#include "hctl/converter.hpp"

namespace hctl {

struct PiCascadeConfig {
    double K_P_i = 122e-6 * 6280.0;
    double K_I_i = 122e-6 * 6280.0 * 6280.0;
    double K_P_v = 2.0 * 0.707 * 627.0;
    double K_I_v = 2.0 * 0.707 * 627.0 * 627.0;

    bool   ref_filter_enabled = true;
    double omega_cons         = 62.0;
    double zeta_cons          = 0.707;

    bool   notch_enabled = false;
    double notch_omega   = 2.0 * 3.14159265358979323846 * 150.0;
    double notch_zeta    = 0.707;

    /// Gains from the inductance: K_P_i = L 6280, K_I_i = K_P_i 6280.
    static PiCascadeConfig for_params(const ConverterParams& p, bool notch);
    void                   validate() const;
};

/// Direct-form II transposed biquad.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;
    double s1 = 0.0, s2 = 0.0;

    double step(double u);
    /// Sets the internal state to the steady state for a constant input.
    void   prime(double u);
    /// |H(e^{j w Ts})|
    double gain(double omega, double Ts) const;
};

/// (s^2 + wn^2) / (s^2 + 2 zeta wn s + wn^2), bilinear with prewarping at wn.
Biquad make_notch(double wn, double zeta, double Ts);
/// wn^2 / (s^2 + 2 zeta wn s + wn^2), bilinear with prewarping at wn.
Biquad make_lowpass2(double wn, double zeta, double Ts);
/// s / (1 + s / p), bilinear.
Biquad make_filtered_derivative(double pole, double Ts);

double notch_step(double u, Biquad& notch);

/// i_d = P_f / (-e_d), i_q = 0.
Vec2 power_to_current_ref(double P_f, const Vec2& e_dq);

struct PiCascadeState {
    double int_v = 0.0;
    Vec2   int_i = Vec2::Zero();
    Biquad ref_filter;
    Biquad deriv;
    Biquad notch;
    bool   primed = false;
};

PiCascadeState pi_init(const PiCascadeConfig& cfg, double Ts, double v_dc0);
/// Loads the integrators with their steady values at a setpoint.
void pi_preload(PiCascadeState& st, const Setpoint& sp);

struct PiOutput {
    Vec3 d;
    Vec2 i_ref;
    bool saturated = false;
};

/**
 * Energy loop on W = C v^2 / 2 with reference feedforward, optional notch on
 * the power reference, dq current PI with e_dq and L w R i_dq feedforward.
 * Saturation scales the dq duty about 0.5 so every arm stays in [0, 1];
 * integrators hold while saturated.
 */
PiOutput pi_baseline_step(const Vec4& x, const Vec2& e_dq, double theta_hat, double omega_hat, double v_ref,
                          const PiCascadeConfig& cfg, PiCascadeState& st, const ConverterParams& p, double Ts);

}  // namespace hctl
