#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

#include "hctl/harmonic.hpp"
#include "hctl/periodic_matrix.hpp"

namespace hctl {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Physical constants of the grid-tied converter (SI units).
struct ConverterParams {
    double r        = 1.15;
    double L        = 122e-6;
    double C        = 100e-6;
    double R_L      = 120.0;
    double E_rms    = 45.0;
    double omega    = 2.0 * 3.14159265358979323846 * 50.0;
    double v_dc_ref = 150.0;

    /// Bench values: r = 1.15, L = 122 uH, C = 100 uF, R_L = 120, 50 Hz, 45 V rms, 150 V.
    static ConverterParams table_one() { return {}; }

    double frequency() const;
    double period() const;
    double nominal_load_current() const { return v_dc_ref / R_L; }

    /// Throws ConfigError unless every field is finite and positive (r may be 0).
    void validate() const;
};

/// Reads `key = value` lines with keys r, L, C, R_L, E_rms, f, v_dc_ref.
ConverterParams parse_params(std::istream& in, const std::string& source = "<stream>");
ConverterParams load_params(const std::string& path);

/// x = [i_a, i_b, i_c, v_dc].
struct StateAbc {
    Vec3   i_abc = Vec3::Zero();
    double v_dc  = 0.0;

    Vec4            vector() const { return {i_abc(0), i_abc(1), i_abc(2), v_dc}; }
    static StateAbc from_vector(const Vec4& x) { return {x.head<3>(), x(3)}; }
};

/// Per-arm duty cycles in [0, 1].
struct DutyCycle {
    Vec3 abc = Vec3::Constant(0.5);

    double sum() const { return abc(0) + abc(1) + abc(2); }
    bool   within_bounds() const { return (abc.array() >= 0.0).all() && (abc.array() <= 1.0).all(); }
};

/// Laplacian C33 = I - (1/3) 1 1'.
const Eigen::Matrix3d& c33();

/// [cos(theta), cos(theta - 2pi/3), cos(theta + 2pi/3)]
Vec3 cos3(double theta);
/// [sin(theta), sin(theta - 2pi/3), sin(theta + 2pi/3)]
Vec3 sin3(double theta);

/// Balanced grid voltage e_abc = -sqrt(2) E_rms cos3(theta).
Vec3 grid_voltage(double E_rms, double theta);

/**
 * Power-invariant Park transform, x_dq = sqrt(2/3) [cos3; -sin3] x_abc.
 * The q-axis row matches the output row -sqrt(2/3) sin3 used by the
 * integral actions, and <x_a>_1 = (x_d + j x_q)/sqrt(6) for constant x_dq.
 */
Vec2 park(const Vec3& abc, double theta);
Vec3 inverse_park(const Vec2& dq, double theta);

/// Average abc model: L di = -r i - C33 d v_dc - e,  C dv_dc = d'i - i_dc.
Vec4 abc_derivative(const Vec4& x, const Vec3& d, const Vec3& e_abc, double i_dc, const ConverterParams& p);
Vec4 abc_derivative(const StateAbc& x, const DutyCycle& d, const Vec3& e_abc, double i_dc,
                    const ConverterParams& p);

/// Returns [di_d, di_q, dv_dc] for L di = -r i - L w R i - d v - e, C dv = d'i - i_dc.
Vec3 dq_derivative(const Vec2& i_dq, double v_dc, const Vec2& d_dq, const Vec2& e_dq, double i_dc,
                   const ConverterParams& p);

/// Stored energy 0.5 L |i|^2 + 0.5 C v^2 and its exact rate along the abc model.
double stored_energy(const Vec4& x, const ConverterParams& p);
double energy_rate(const Vec4& x, const Vec3& d, const Vec3& e_abc, double i_dc, const ConverterParams& p);

/// Bilinear form pieces of x' = A x + G(x) d + B v.
Eigen::Matrix4d                state_matrix(const ConverterParams& p);
Eigen::Matrix<double, 4, 3>    input_gain(const Vec4& x, const ConverterParams& p);
Eigen::Matrix4d                disturbance_matrix(const ConverterParams& p);
/// Linear part A(d) of G(x) d seen as a function of x.
Eigen::Matrix4d                duty_coupling(const Vec3& d, const ConverterParams& p);

/// Periodic operating point in dq, time and harmonic form.
struct Setpoint {
    ConverterParams params;
    double          i_sink = 0.0;
    double          i_dc   = 0.0;
    double          v_dc   = 0.0;
    Vec2            i_dq   = Vec2::Zero();
    Vec2            d_dq   = Vec2::Zero();
    Vec2            e_dq   = Vec2::Zero();

    /// X^e = (I_a, I_b, I_c, V_dc), D^e = (D_a, D_b, D_c), V^e = (E_a, E_b, E_c, I_dc).
    PhasorVector X;
    PhasorVector D;
    PhasorVector V;

    Vec4 state(double theta) const;
    Vec3 duty(double theta) const;
    Vec3 grid(double theta) const;
};

/**
 * Steady state with i_q = 0 and zero-sequence duty 0.5:
 *   0 = -r i_d - d_d v - e_d,  0 = -L w i_d - d_q v - e_q,  d_d i_d = i_dc,
 * at v = v_dc_ref and i_dc = v_dc_ref / R_L + i_sink. Takes the smaller-|i_d|
 * root. Throws InfeasibleSetpoint when the quadratic has no real root.
 */
Setpoint compute_setpoint(const ConverterParams& p, double i_sink = 0.0, int order = 10);

/// Harmonic operators of x' = A x + G(x) d + B v and of the error dynamics.
struct HarmonicMatrices {
    ToeplitzOperator A;
    ToeplitzOperator B;
    ToeplitzOperator N;
    ToeplitzOperator G;     ///< G(X)
    ToeplitzOperator A_de;  ///< A(D^e)
};

HarmonicMatrices build_harmonic_matrices(const ConverterParams& p, const PhasorVector& X, const PhasorVector& De,
                                         int order);

/// (A - N) X + G(X) D + B V at order h.
PhasorVector harmonic_rhs(const ConverterParams& p, const PhasorVector& X, const PhasorVector& D,
                          const PhasorVector& V, int order);

/// |(A - N) X + G(X) D + B V| scaled by the largest of the three term norms.
double equilibrium_residual(const ConverterParams& p, const PhasorVector& X, const PhasorVector& D,
                            const PhasorVector& V, int order);

/// A + A(d^e(theta)) as a periodic matrix (band 1).
PeriodicMatrix error_state_matrix(const Setpoint& sp);
/// G(x^e(theta)) as a periodic matrix (band 1).
PeriodicMatrix setpoint_input_gain(const Setpoint& sp);

}  // namespace hctl
