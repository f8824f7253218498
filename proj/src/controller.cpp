#include "hctl/controller.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hctl/error.hpp"

namespace hctl {

namespace {
const double kRho = std::sqrt(2.0 / 3.0);

Eigen::Matrix2d rot() {
    Eigen::Matrix2d R;
    R << 0.0, -1.0, 1.0, 0.0;
    return R;
}

double largest_singular_value(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}
}  // namespace

std::string to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::d1: return "d1";
        case ControllerKind::d2: return "d2";
        case ControllerKind::d3: return "d3";
        case ControllerKind::d3_6: return "d3_6";
    }
    return "d3";
}

ControllerKind parse_controller_kind(const std::string& name) {
    if (name == "d1") return ControllerKind::d1;
    if (name == "d2") return ControllerKind::d2;
    if (name == "d3") return ControllerKind::d3;
    if (name == "d3_6" || name == "d3+6th") return ControllerKind::d3_6;
    throw ConfigError("unknown harmonic controller '" + name + "' (valid: d1, d2, d3, d3_6)");
}

// Integrator bank

Eigen::MatrixXd IntegratorBank::O(double omega) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim(), dim());
    int             row = 0;
    for (int k : harmonics) {
        if (k == 0) {
            ++row;
            continue;
        }
        out.block<2, 2>(row, row) = k * omega * rot();
        row += 2;
    }
    return out;
}

IntegratorBank make_integrator_bank(ControllerKind kind, const TuningOverrides& t) {
    IntegratorBank b;
    switch (kind) {
        case ControllerKind::d1: b.harmonics = {}; break;
        case ControllerKind::d2: b.harmonics = {0, 0}; break;
        case ControllerKind::d3: b.harmonics = {0, 0, 3, 3}; break;
        case ControllerKind::d3_6: b.harmonics = {0, 0, 3, 3, 6}; break;
    }
    int dim = 0;
    for (int k : b.harmonics) dim += k == 0 ? 1 : 2;
    b.L       = Eigen::MatrixXd::Zero(dim, 3);
    b.weights = Eigen::VectorXd::Ones(dim);
    if (dim == 0) return b;

    // y = [v_dc error, i_q, i_d error]
    b.L(0, 0)     = t.l1;
    b.L(1, 1)     = t.l2;
    b.weights(1)  = 0.1;
    if (dim >= 6) {
        b.L(2, 1) = t.l3;
        b.L(4, 2) = t.l4;
    }
    if (dim >= 8) b.L(6, 2) = t.l6;
    return b;
}

// Output matrix

Eigen::Matrix<double, 3, 4> output_matrix_C(double theta) {
    Eigen::Matrix<double, 3, 4> C = Eigen::Matrix<double, 3, 4>::Zero();
    C(0, 3)                      = 1.0;
    C.block<1, 3>(1, 0)          = -kRho * sin3(theta).transpose();
    C.block<1, 3>(2, 0)          = kRho * cos3(theta).transpose();
    return C;
}

PeriodicMatrix output_matrix_periodic(double omega) {
    PeriodicMatrix C(3, 4, 1, omega);
    C.coeff_ref(0)(0, 3) = 1.0;
    const double phase[3] = {0.0, -2.0 * std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0};
    for (int j = 0; j < 3; ++j) {
        const cplx e = std::polar(1.0, phase[j]);
        // cos(th + ph) = (e^{j ph} e^{j th} + c.c.)/2, sin(th + ph) = (e^{j ph} e^{j th} - c.c.)/(2j)
        C.coeff_ref(1)(1, j)  = -kRho * e / cplx(0.0, 2.0);
        C.coeff_ref(-1)(1, j) = kRho * std::conj(e) / cplx(0.0, 2.0);
        C.coeff_ref(1)(2, j)  = kRho * e / 2.0;
        C.coeff_ref(-1)(2, j) = kRho * std::conj(e) / 2.0;
    }
    return C;
}

// Synthesis

ControllerArtifact synthesize(const ConverterParams& p, ControllerKind kind, const TuningOverrides& t) {
    const auto start = std::chrono::steady_clock::now();
    const int  keep  = t.solver.keep_order;
    if (t.runtime_order < 0 || t.runtime_order > keep)
        throw ConfigError("runtime order must lie in [0, keep order]");
    if (!(t.Ts > 0.0)) throw ConfigError("sampling period must be positive");

    ControllerArtifact a;
    a.kind          = kind;
    a.params        = p;
    a.setpoint      = compute_setpoint(p, t.i_sink, keep);
    a.omega_nominal = p.omega;
    a.Ts            = t.Ts;
    a.integrator    = t.integrator;
    a.bank          = make_integrator_bank(kind, t);
    a.O             = a.bank.O(p.omega);
    a.C             = output_matrix_periodic(p.omega);

    const PeriodicMatrix A = error_state_matrix(a.setpoint);
    const PeriodicMatrix G = setpoint_input_gain(a.setpoint);
    Eigen::Vector4d      qd(1.0, 1.0, 1.0, t.q_vdc);
    const PeriodicMatrix Q = PeriodicMatrix::constant(qd.asDiagonal().toDenseMatrix(), p.omega);

    SynthesisReport& rep = a.report;
    rep.open_loop_margin = is_hurwitz(harmonic_state_matrix(A, keep), p.omega).margin;

    LyapunovSolution ls = solve_lyapunov(A, Q, t.solver);
    a.P_full            = ls.P;
    rep.lyapunov        = ls.report;
    rep.p_min_eigenvalue = min_eigenvalue_on_grid(a.P_full);

    const ToeplitzOperator Gt  = toeplitz(G, keep);
    const ToeplitzOperator Pt  = toeplitz(a.P_full, keep);
    const Eigen::MatrixXcd GsP = Gt.data().adjoint() * Pt.data();
    rep.sigma_gp               = largest_singular_value(GsP);
    a.H1                       = t.H1 ? *t.H1 : (1.0 / t.h1_divisor) / rep.sigma_gp;
    if (!(a.H1 > 0.0)) throw ConfigError("H1 must be positive");
    rep.H1 = a.H1;

    ToeplitzOperator Acl = harmonic_state_matrix(A, keep);
    Acl.data() -= a.H1 * Gt.data() * GsP;
    rep.closed_loop_margin = is_hurwitz(Acl, p.omega).margin;

    const int nz = a.bank.dim();
    if (nz > 0) {
        const PeriodicMatrix LC = PeriodicMatrix::constant(a.bank.L, p.omega) * a.C;
        SylvesterSolution    ss = solve_sylvester(a.O, LC, A, t.solver);
        a.M_full                = ss.M;
        rep.sylvester           = ss.report;

        const ToeplitzOperator Mt = toeplitz(a.M_full, keep);
        rep.sigma_gmm = largest_singular_value(Gt.data().adjoint() * Mt.data().adjoint() * Mt.data());
        rep.alpha_prime = t.alpha_prime ? *t.alpha_prime : (1.0 / a.H1) * (1.0 / t.h2_divisor) / rep.sigma_gmm;
        if (!(rep.alpha_prime > 0.0)) throw ConfigError("alpha' must be positive");
        a.H2 = rep.alpha_prime * a.bank.weights.asDiagonal().toDenseMatrix();
        a.M  = a.M_full.with_order(t.runtime_order);
    } else {
        a.M_full = PeriodicMatrix(0, 4, 0, p.omega);
        a.M      = a.M_full;
        a.H2     = Eigen::MatrixXd::Zero(0, 0);
    }
    a.P = a.P_full.with_order(t.runtime_order);

    auto deviation = [](double v, double ref) { return 100.0 * (v - ref) / ref; };
    {
        std::ostringstream os;
        os << "H1 = " << a.H1 << " vs reference " << rep.h1_reference << " (" << deviation(a.H1, rep.h1_reference)
           << " %)";
        rep.notes.push_back(os.str());
    }
    if (nz > 0) {
        std::ostringstream os;
        os << "alpha' = " << rep.alpha_prime << " vs reference " << rep.alpha_reference << " ("
           << deviation(rep.alpha_prime, rep.alpha_reference) << " %); H1 alpha' = " << a.H1 * rep.alpha_prime
           << " vs " << rep.h1_reference * rep.alpha_reference;
        rep.notes.push_back(os.str());
    }
    if (!t.H1 && std::abs(deviation(a.H1, rep.h1_reference)) > 15.0) {
        std::ostringstream os;
        os << "H1 is set by the largest singular value of G(X^e)* P. In SI units the current rows of G carry "
              "v_dc/L = "
           << a.setpoint.v_dc / p.L << " 1/s while P is O(1) in the current block, so sigma = " << rep.sigma_gp
           << " and H1 lands far from the reference; the reference scale needs an unstated normalization of the "
              "model or of Q";
        rep.notes.push_back(os.str());
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return a;
}

// Control laws

Vec3 control_stabilizing(const Vec4& x, double theta, const ControllerArtifact& a) {
    const Vec4 xt = x - a.setpoint.state(theta);
    return a.setpoint.duty(theta) - a.H1 * input_gain(x, a.params).transpose() * (a.P.evaluate(theta) * xt);
}

ForwardingOutput control_forwarding(const Vec4& x, const Eigen::VectorXd& z, double theta, const Vec3& delta_r,
                                    const ControllerArtifact& a) {
    const Vec4 xt = x - a.setpoint.state(theta);
    Vec4       inner = a.P.evaluate(theta) * xt;
    ForwardingOutput out;
    if (a.bank.dim() > 0) {
        if (z.size() != a.bank.dim()) throw ConfigError("integrator state has the wrong dimension");
        const Eigen::MatrixXd M = a.M.evaluate(theta);
        inner -= M.transpose() * (a.H2 * (z - M * xt));
        out.zdot = a.O * z + a.bank.L * (output_matrix_C(theta) * xt + delta_r);
    } else {
        out.zdot = Eigen::VectorXd::Zero(0);
    }
    out.d = a.setpoint.duty(theta) - a.H1 * input_gain(x, a.params).transpose() * inner;
    return out;
}

PeriodicMatrix forwarding_closed_loop(const ControllerArtifact& a) {
    const double         w  = a.params.omega;
    const PeriodicMatrix A  = error_state_matrix(a.setpoint);
    const PeriodicMatrix Gt = setpoint_input_gain(a.setpoint).transpose();
    const PeriodicMatrix G  = setpoint_input_gain(a.setpoint);
    const int            nz = a.bank.dim();
    if (nz == 0) return A - a.H1 * (G * (Gt * a.P));

    const PeriodicMatrix H2 = PeriodicMatrix::constant(a.H2, w);
    const PeriodicMatrix Mt = a.M.transpose();
    const PeriodicMatrix Ax = A - a.H1 * (G * (Gt * (a.P + Mt * (H2 * a.M))));
    const PeriodicMatrix Az = a.H1 * (G * (Gt * (Mt * H2)));
    const PeriodicMatrix Zx = PeriodicMatrix::constant(a.bank.L, w) * a.C;

    const int      h = std::max({Ax.order(), Az.order(), Zx.order()});
    PeriodicMatrix F(4 + nz, 4 + nz, h, w);
    for (int k = -h; k <= h; ++k) {
        F.coeff_ref(k).block(0, 0, 4, 4)  = Ax.coeff(k);
        F.coeff_ref(k).block(0, 4, 4, nz) = Az.coeff(k);
        F.coeff_ref(k).block(4, 0, nz, 4) = Zx.coeff(k);
    }
    F.coeff_ref(0).block(4, 4, nz, nz) = a.O.cast<cplx>();
    return F;
}

double lyapunov_value(const Vec4& x, const Eigen::VectorXd& z, double theta, const ControllerArtifact& a) {
    const Vec4 xt = x - a.setpoint.state(theta);
    double     W  = xt.dot(a.P.evaluate(theta) * xt);
    if (a.bank.dim() > 0) {
        const Eigen::VectorXd e = z - a.M.evaluate(theta) * xt;
        W += e.dot(a.H2 * e);
    }
    return W;
}

// Saturation

Saturated saturate(const Vec3& d_e, const Vec3& delta_d) {
    double alpha = 1.0;
    for (int i = 0; i < 3; ++i) {
        const double u = d_e(i) + delta_d(i);
        double       a = 1.0;
        if (u > 1.0 && delta_d(i) > 0.0) a = (1.0 - d_e(i)) / delta_d(i);
        else if (u < 0.0 && delta_d(i) < 0.0) a = -d_e(i) / delta_d(i);
        alpha = std::min(alpha, std::clamp(a, 0.0, 1.0));
    }
    const Vec3 raw = d_e + alpha * delta_d;

    // Dyadic grid so that 1.5 - d_a - d_b and the final sum are exact.
    constexpr double q     = 0x1p-40;
    auto             snap  = [&](double v) { return std::clamp(std::nearbyint(v / q) * q, 0.0, 1.0); };
    double           da    = snap(raw(0)), db = snap(raw(1));
    double           dc    = 1.5 - da - db;
    if (dc > 1.0) {
        const double excess = dc - 1.0;
        double&      arm    = (1.0 - da) >= (1.0 - db) ? da : db;
        arm                 = std::min(1.0, arm + excess);
        dc                  = 1.5 - da - db;
    } else if (dc < 0.0) {
        const double deficit = -dc;
        double&      arm     = da >= db ? da : db;
        arm                  = std::max(0.0, arm - deficit);
        dc                   = 1.5 - da - db;
    }
    Saturated out;
    out.d.abc = {da, db, dc};
    out.alpha = alpha;
    return out;
}

// Discretization

DiscreteIntegrator discretize(const IntegratorBank& bank, double Ts, double omega, IntegratorDiscretization mode) {
    const int          n = bank.dim();
    DiscreteIntegrator out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, 3)};
    const Eigen::Matrix2d R = rot();
    int                   row = 0;
    for (int k : bank.harmonics) {
        if (k == 0) {
            out.Od(row, row) = 1.0;
            out.Ld.row(row)  = (mode == IntegratorDiscretization::zoh ? Ts : 1.0) * bank.L.row(row);
            ++row;
            continue;
        }
        const double phi = k * omega * Ts;
        if (phi >= std::numbers::pi)
            throw ConfigError("oscillator at harmonic " + std::to_string(k) + " aliases at this sampling period");
        const Eigen::Matrix2d Od = std::cos(phi) * Eigen::Matrix2d::Identity() + std::sin(phi) * R;
        out.Od.block<2, 2>(row, row) = Od;
        out.Ld.block(row, 0, 2, 3) = -(1.0 / (k * omega)) * R * (Od - Eigen::Matrix2d::Identity()) *
                                     bank.L.block(row, 0, 2, 3);
        row += 2;
    }
    return out;
}

DiscreteController::DiscreteController(std::shared_ptr<const ControllerArtifact> artifact)
    : art_(std::move(artifact)), z_(Eigen::VectorXd::Zero(art_ ? art_->bank.dim() : 0)) {
    if (!art_) throw ConfigError("DiscreteController needs an artifact");
}

Vec3 DiscreteController::step(const Vec4& x, double theta_hat, double omega_hat, const Vec3& delta_r) {
    const ControllerArtifact& a = *art_;
    const ForwardingOutput    f = control_forwarding(x, z_, theta_hat, delta_r, a);
    const Vec3                de = a.setpoint.duty(theta_hat);
    const Saturated           s  = saturate(de, f.d - de);
    last_alpha_                  = s.alpha;
    if (a.bank.dim() > 0) {
        const DiscreteIntegrator di = discretize(a.bank, a.Ts, omega_hat, a.integrator);
        const Vec4               xt = x - a.setpoint.state(theta_hat);
        z_ = di.Od * z_ + di.Ld * (output_matrix_C(theta_hat) * xt + delta_r);
    }
    return s.d.abc;
}

}  // namespace hctl
