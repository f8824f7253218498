#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hctl/converter.hpp"
#include "hctl/periodic_matrix.hpp"
#include "hctl/solvers.hpp"

namespace hctl {

/**
 * d1: stabilizing feedback only.
 * d2: plus integral action on v_dc and i_q.
 * d3: plus resonant rejection of the 3rd phasor of i_q and i_d.
 * d3_6: d3 plus a 6th-phasor oscillator on i_d.
 */
enum class ControllerKind { d1, d2, d3, d3_6 };

std::string    to_string(ControllerKind kind);
ControllerKind parse_controller_kind(const std::string& name);

/// How the pure integrators of the bank are sampled.
enum class IntegratorDiscretization {
    zoh,         ///< z+ = z + Ts L y (exact hold, matches the oscillator blocks)
    as_printed,  ///< z+ = z + L y
};

struct TuningOverrides {
    double q_vdc        = 1e-4;  ///< Q = diag(1, 1, 1, q_vdc)
    double h1_divisor   = 50.0;
    double h2_divisor   = 50.0;
    double l1           = 0.1;
    double l2           = 0.816496580927726;  ///< sqrt(2/3)
    double l3           = 0.14 * 0.816496580927726;
    double l4           = 0.14 * 0.816496580927726;
    double l6           = 0.14 * 0.816496580927726;
    std::optional<double> H1;
    std::optional<double> alpha_prime;
    double i_sink       = 0.0;  ///< load offset of the design setpoint
    int    runtime_order = 3;
    double Ts           = 50e-6;
    IntegratorDiscretization integrator = IntegratorDiscretization::zoh;
    SolverOptions solver;
};

struct SynthesisReport {
    double H1          = 0.0;
    double alpha_prime = 0.0;
    double sigma_gp    = 0.0;  ///< largest singular value of G(X^e)* P
    double sigma_gmm   = 0.0;  ///< largest singular value of G(X^e)* M* M
    SolveReport lyapunov;
    SolveReport sylvester;
    double p_min_eigenvalue   = 0.0;
    double open_loop_margin   = 0.0;  ///< -max Re of the open-loop strip spectrum
    double closed_loop_margin = 0.0;  ///< same for A - N - G H1 G* P
    double wall_time          = 0.0;  ///< seconds
    double h1_reference       = 0.613;
    double alpha_reference    = 6.919;
    std::vector<std::string> notes;
};

/// Oscillator-bank layout: one entry per block, 0 for a pure integrator, k for a k*w pair.
struct IntegratorBank {
    std::vector<int> harmonics;
    Eigen::MatrixXd  L;        ///< dim x 3
    Eigen::VectorXd  weights;  ///< H2 = alpha' diag(weights)

    int             dim() const { return static_cast<int>(L.rows()); }
    Eigen::MatrixXd O(double omega) const;
};

IntegratorBank make_integrator_bank(ControllerKind kind, const TuningOverrides& t);

struct ControllerArtifact {
    ControllerKind  kind = ControllerKind::d3;
    ConverterParams params;  ///< design model
    Setpoint        setpoint;
    IntegratorBank  bank;
    PeriodicMatrix  P_full, M_full;  ///< kept band of the solvers
    PeriodicMatrix  P, M;            ///< runtime band
    double          H1 = 0.0;
    Eigen::MatrixXd H2;
    Eigen::MatrixXd O;
    PeriodicMatrix  C;
    double          omega_nominal = 0.0;
    double          Ts            = 50e-6;
    IntegratorDiscretization integrator = IntegratorDiscretization::zoh;
    SynthesisReport report;

    int integrator_dim() const { return bank.dim(); }
};

ControllerArtifact synthesize(const ConverterParams& p, ControllerKind kind, const TuningOverrides& t = {});

/// y = C(theta) (x - x^e) = [v_dc - v^e; i_q; i_d - i_d^e].
Eigen::Matrix<double, 3, 4> output_matrix_C(double theta);
PeriodicMatrix              output_matrix_periodic(double omega);

/// d^e(theta) - H1 G(x)' P(theta) (x - x^e(theta)), not saturated.
Vec3 control_stabilizing(const Vec4& x, double theta, const ControllerArtifact& a);

struct ForwardingOutput {
    Vec3            d;     ///< not saturated
    Eigen::VectorXd zdot;  ///< O z + L (C x~ + delta_r)
};

ForwardingOutput control_forwarding(const Vec4& x, const Eigen::VectorXd& z, double theta, const Vec3& delta_r,
                                    const ControllerArtifact& a);

/// Linearization of the sampled-free closed loop about the setpoint, state (x~, z).
/// Uses the runtime (truncated) gains, so it describes what control_forwarding applies.
PeriodicMatrix forwarding_closed_loop(const ControllerArtifact& a);

/// W = x~'P x~ + (z - M x~)' H2 (z - M x~).
double lyapunov_value(const Vec4& x, const Eigen::VectorXd& z, double theta, const ControllerArtifact& a);

struct Saturated {
    DutyCycle d;
    double    alpha = 1.0;
};

/**
 * d^e + min_i alpha_i delta_d, with alpha_i the largest step keeping arm i in
 * [0, 1]. The result is snapped so that its components add up to exactly 1.5.
 */
Saturated saturate(const Vec3& d_e, const Vec3& delta_d);

struct DiscreteIntegrator {
    Eigen::MatrixXd Od;
    Eigen::MatrixXd Ld;
};

/// Exact hold of the oscillator blocks at the given frequency; throws ConfigError on k w Ts >= pi.
DiscreteIntegrator discretize(const IntegratorBank& bank, double Ts, double omega,
                              IntegratorDiscretization mode = IntegratorDiscretization::zoh);

/// Sampled forwarding controller. One owner, one step at a time.
class DiscreteController {
   public:
    explicit DiscreteController(std::shared_ptr<const ControllerArtifact> artifact);

    /// Saturated duty for the held interval, then advances z with the hold model.
    Vec3 step(const Vec4& x, double theta_hat, double omega_hat, const Vec3& delta_r = Vec3::Zero());

    const Eigen::VectorXd&    z() const { return z_; }
    void                      set_z(const Eigen::VectorXd& z) { z_ = z; }
    const ControllerArtifact& artifact() const { return *art_; }
    double                    last_alpha() const { return last_alpha_; }

   private:
    std::shared_ptr<const ControllerArtifact> art_;
    Eigen::VectorXd                           z_;
    double                                    last_alpha_ = 1.0;
};

}  // namespace hctl
