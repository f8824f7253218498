#include "hctl/baseline_pi.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "hctl/error.hpp"

namespace hctl {

PiCascadeConfig PiCascadeConfig::for_params(const ConverterParams& p, bool notch) {
    PiCascadeConfig c;
    c.K_P_i         = p.L * 6280.0;
    c.K_I_i         = c.K_P_i * 6280.0;
    c.notch_enabled = notch;
    return c;
}

void PiCascadeConfig::validate() const {
    const double v[] = {K_P_i, K_I_i, K_P_v, K_I_v, omega_cons, zeta_cons, notch_omega, notch_zeta};
    for (double x : v)
        if (!std::isfinite(x) || x <= 0.0) throw ConfigError("PI cascade gains and filter settings must be positive");
}

// Biquad

double Biquad::step(double u) {
    const double y = b0 * u + s1;
    s1             = b1 * u - a1 * y + s2;
    s2             = b2 * u - a2 * y;
    return y;
}

void Biquad::prime(double u) {
    const double y = u * (b0 + b1 + b2) / (1.0 + a1 + a2);
    s2             = b2 * u - a2 * y;
    s1             = b1 * u - a1 * y + s2;
}

double Biquad::gain(double omega, double Ts) const {
    const std::complex<double> zi = std::polar(1.0, -omega * Ts);
    return std::abs((b0 + b1 * zi + b2 * zi * zi) / (1.0 + a1 * zi + a2 * zi * zi));
}

namespace {

/// (B0 s^2 + B1 s + B2) / (A0 s^2 + A1 s + A2) with s = K (z - 1)/(z + 1).
Biquad bilinear2(double B0, double B1, double B2, double A0, double A1, double A2, double K) {
    const double K2 = K * K;
    const double a0 = A0 * K2 + A1 * K + A2;
    Biquad       f;
    f.b0 = (B0 * K2 + B1 * K + B2) / a0;
    f.b1 = (2.0 * B2 - 2.0 * B0 * K2) / a0;
    f.b2 = (B0 * K2 - B1 * K + B2) / a0;
    f.a1 = (2.0 * A2 - 2.0 * A0 * K2) / a0;
    f.a2 = (A0 * K2 - A1 * K + A2) / a0;
    return f;
}

double prewarp(double wn, double Ts) { return wn / std::tan(0.5 * wn * Ts); }

}  // namespace

Biquad make_notch(double wn, double zeta, double Ts) {
    return bilinear2(1.0, 0.0, wn * wn, 1.0, 2.0 * zeta * wn, wn * wn, prewarp(wn, Ts));
}

Biquad make_lowpass2(double wn, double zeta, double Ts) {
    return bilinear2(0.0, 0.0, wn * wn, 1.0, 2.0 * zeta * wn, wn * wn, prewarp(wn, Ts));
}

Biquad make_filtered_derivative(double pole, double Ts) {
    // p s / (s + p), first order
    const double K  = 2.0 / Ts;
    const double a0 = K + pole;
    Biquad       f;
    f.b0 = pole * K / a0;
    f.b1 = -pole * K / a0;
    f.a1 = (pole - K) / a0;
    return f;
}

double notch_step(double u, Biquad& notch) { return notch.step(u); }

Vec2 power_to_current_ref(double P_f, const Vec2& e_dq) {
    if (e_dq(0) == 0.0) return Vec2::Zero();
    return {P_f / -e_dq(0), 0.0};
}

PiCascadeState pi_init(const PiCascadeConfig& cfg, double Ts, double v_dc0) {
    cfg.validate();
    PiCascadeState st;
    st.ref_filter = make_lowpass2(cfg.omega_cons, cfg.zeta_cons, Ts);
    st.ref_filter.prime(v_dc0);
    st.deriv = make_filtered_derivative(10.0 * cfg.omega_cons, Ts);
    st.notch = make_notch(cfg.notch_omega, cfg.notch_zeta, Ts);
    st.primed = false;
    return st;
}

void pi_preload(PiCascadeState& st, const Setpoint& sp) {
    st.int_v = -sp.e_dq(0) * sp.i_dq(0);
    st.int_i = sp.params.r * sp.i_dq;
}

PiOutput pi_baseline_step(const Vec4& x, const Vec2& e_dq, double theta_hat, double omega_hat, double v_ref,
                          const PiCascadeConfig& cfg, PiCascadeState& st, const ConverterParams& p, double Ts) {
    const double v_f   = cfg.ref_filter_enabled ? st.ref_filter.step(v_ref) : v_ref;
    const double W_ref = 0.5 * p.C * v_f * v_f;
    if (!st.primed) {
        st.deriv.prime(W_ref);
        st.primed = true;
    }
    const double P_r = st.deriv.step(W_ref);
    const double e_W = W_ref - 0.5 * p.C * x(3) * x(3);

    const double P_star = cfg.K_P_v * e_W + st.int_v + P_r;
    const double P_f    = cfg.notch_enabled ? notch_step(P_star, st.notch) : P_star;

    PiOutput   out;
    out.i_ref        = power_to_current_ref(P_f, e_dq);
    const Vec2 i_dq  = park(x.head<3>(), theta_hat);
    const Vec2 err   = out.i_ref - i_dq;
    const Vec2 u     = cfg.K_P_i * err + st.int_i;
    const Vec2 rot_i(-i_dq(1), i_dq(0));
    const double v   = std::max(x(3), 1.0);
    Vec2 d_dq        = -(u + e_dq + p.L * omega_hat * rot_i) / v;

    const Vec3   swing = inverse_park(d_dq, theta_hat);
    const double peak  = swing.cwiseAbs().maxCoeff();
    if (peak > 0.5) {
        d_dq *= 0.5 / peak;
        out.saturated = true;
    }
    out.d = Vec3::Constant(0.5) + inverse_park(d_dq, theta_hat);
    out.d = out.d.cwiseMax(0.0).cwiseMin(1.0);

    if (!out.saturated) {
        st.int_i += cfg.K_I_i * Ts * err;
        st.int_v += cfg.K_I_v * Ts * e_W;
    }
    return out;
}

}  // namespace hctl
