#include "hctl/converter.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <numbers>

#include "hctl/error.hpp"

namespace hctl {

namespace {
constexpr double kTwoPiOver3 = 2.0 * std::numbers::pi / 3.0;
const double     kRho        = std::sqrt(2.0 / 3.0);
}  // namespace

double ConverterParams::frequency() const { return omega / (2.0 * std::numbers::pi); }
double ConverterParams::period() const { return 2.0 * std::numbers::pi / omega; }

void ConverterParams::validate() const {
    const std::pair<const char*, double> fields[] = {{"r", r},         {"L", L},     {"C", C},
                                                     {"R_L", R_L},     {"E_rms", E_rms}, {"omega", omega},
                                                     {"v_dc_ref", v_dc_ref}};
    for (const auto& [name, value] : fields) {
        // a lossless line (r = 0) is allowed, everything else must be positive
        const bool ok = std::isfinite(value) && (value > 0.0 || (value == 0.0 && name == std::string("r")));
        if (!ok) throw ConfigError(std::string("converter parameter '") + name + "' must be strictly positive");
    }
}

ConverterParams parse_params(std::istream& in, const std::string& source) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ": " + e.message());
    }
    if (auto section = tree.get_child_optional("params")) tree = *section;

    auto required = [&](const char* key) {
        auto v = tree.get_optional<std::string>(key);
        if (!v) throw ConfigError(source + ": missing parameter key '" + key + "'");
        try {
            std::size_t used  = 0;
            double      value = std::stod(*v, &used);
            if (used != v->size()) throw std::invalid_argument(*v);
            return value;
        } catch (const std::exception&) {
            throw ConfigError(source + ": parameter '" + key + "' is not a number: '" + *v + "'");
        }
    };

    ConverterParams p;
    p.r        = required("r");
    p.L        = required("L");
    p.C        = required("C");
    p.R_L      = required("R_L");
    p.E_rms    = required("E_rms");
    p.omega    = 2.0 * std::numbers::pi * required("f");
    p.v_dc_ref = required("v_dc_ref");
    p.validate();
    return p;
}

ConverterParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file '" + path + "'");
    return parse_params(in, path);
}

const Eigen::Matrix3d& c33() {
    static const Eigen::Matrix3d m = Eigen::Matrix3d::Identity() - Eigen::Matrix3d::Constant(1.0 / 3.0);
    return m;
}

Vec3 cos3(double theta) {
    return {std::cos(theta), std::cos(theta - kTwoPiOver3), std::cos(theta + kTwoPiOver3)};
}

Vec3 sin3(double theta) {
    return {std::sin(theta), std::sin(theta - kTwoPiOver3), std::sin(theta + kTwoPiOver3)};
}

Vec3 grid_voltage(double E_rms, double theta) { return -std::sqrt(2.0) * E_rms * cos3(theta); }

Vec2 park(const Vec3& abc, double theta) { return {kRho * cos3(theta).dot(abc), -kRho * sin3(theta).dot(abc)}; }

Vec3 inverse_park(const Vec2& dq, double theta) { return kRho * (cos3(theta) * dq(0) - sin3(theta) * dq(1)); }

Vec4 abc_derivative(const Vec4& x, const Vec3& d, const Vec3& e_abc, double i_dc, const ConverterParams& p) {
    const Vec3 i = x.head<3>();
    Vec4       dx;
    dx.head<3>() = (-p.r * i - c33() * d * x(3) - e_abc) / p.L;
    dx(3)        = (d.dot(i) - i_dc) / p.C;
    return dx;
}

Vec4 abc_derivative(const StateAbc& x, const DutyCycle& d, const Vec3& e_abc, double i_dc, const ConverterParams& p) {
    return abc_derivative(x.vector(), d.abc, e_abc, i_dc, p);
}

Vec3 dq_derivative(const Vec2& i_dq, double v_dc, const Vec2& d_dq, const Vec2& e_dq, double i_dc,
                   const ConverterParams& p) {
    const Vec2 rot(-i_dq(1), i_dq(0));  // R i_dq, R = [[0, -1], [1, 0]]
    const Vec2 di = (-p.r * i_dq - p.L * p.omega * rot - d_dq * v_dc - e_dq) / p.L;
    return {di(0), di(1), (d_dq.dot(i_dq) - i_dc) / p.C};
}

double stored_energy(const Vec4& x, const ConverterParams& p) {
    return 0.5 * p.L * x.head<3>().squaredNorm() + 0.5 * p.C * x(3) * x(3);
}

double energy_rate(const Vec4& x, const Vec3& d, const Vec3& e_abc, double i_dc, const ConverterParams& p) {
    const Vec3 i = x.head<3>();
    // C33 symmetric: v (d'i - i'C33 d) = v (sum d)(sum i) / 3
    return -p.r * i.squaredNorm() - e_abc.dot(i) - x(3) * i_dc + x(3) * d.sum() * i.sum() / 3.0;
}

Eigen::Matrix4d state_matrix(const ConverterParams& p) {
    Eigen::Matrix4d A  = Eigen::Matrix4d::Zero();
    A.topLeftCorner<3, 3>() = -(p.r / p.L) * Eigen::Matrix3d::Identity();
    return A;
}

Eigen::Matrix<double, 4, 3> input_gain(const Vec4& x, const ConverterParams& p) {
    Eigen::Matrix<double, 4, 3> G;
    G.topRows<3>() = -c33() * x(3) / p.L;
    G.row(3)       = x.head<3>().transpose() / p.C;
    return G;
}

Eigen::Matrix4d disturbance_matrix(const ConverterParams& p) {
    Eigen::Matrix4d B        = Eigen::Matrix4d::Zero();
    B.topLeftCorner<3, 3>()  = -Eigen::Matrix3d::Identity() / p.L;
    B(3, 3)                  = -1.0 / p.C;
    return B;
}

Eigen::Matrix4d duty_coupling(const Vec3& d, const ConverterParams& p) {
    Eigen::Matrix4d A         = Eigen::Matrix4d::Zero();
    A.block<3, 1>(0, 3)       = -c33() * d / p.L;
    A.block<1, 3>(3, 0)       = d.transpose() / p.C;
    return A;
}

// Setpoint

Vec4 Setpoint::state(double theta) const {
    Vec4 x;
    x.head<3>() = inverse_park(i_dq, theta);
    x(3)        = v_dc;
    return x;
}

Vec3 Setpoint::duty(double theta) const { return Vec3::Constant(0.5) + inverse_park(d_dq, theta); }

Vec3 Setpoint::grid(double theta) const { return grid_voltage(params.E_rms, theta); }

namespace {

/// Fills channels [first, first+3) with a balanced set from the phase-a fundamental.
void fill_balanced(PhasorVector& X, int first, cplx dc, cplx fundamental) {
    PhasorVector a(1, X.order(), X.omega());
    a(0, 0) = dc;
    if (X.order() >= 1) {
        a(0, 1)  = fundamental;
        a(0, -1) = std::conj(fundamental);
    }
    const PhasorVector b = phase_shifted(a, -kTwoPiOver3);
    const PhasorVector c = phase_shifted(a, kTwoPiOver3);
    for (int k = -X.order(); k <= X.order(); ++k) {
        X(first, k)     = a(0, k);
        X(first + 1, k) = b(0, k);
        X(first + 2, k) = c(0, k);
    }
}

}  // namespace

Setpoint compute_setpoint(const ConverterParams& p, double i_sink, int order) {
    p.validate();
    if (order < 1) throw ConfigError("compute_setpoint: harmonic order must be >= 1");

    Setpoint sp;
    sp.params = p;
    sp.i_sink = i_sink;
    sp.v_dc   = p.v_dc_ref;
    sp.i_dc   = p.nominal_load_current() + i_sink;
    sp.e_dq   = park(grid_voltage(p.E_rms, 0.0), 0.0);

    // r i_d^2 + e_d i_d + v i_dc = 0, smaller-magnitude root
    const double e_d  = sp.e_dq(0);
    const double c    = sp.v_dc * sp.i_dc;
    const double disc = e_d * e_d - 4.0 * p.r * c;
    if (disc < 0.0)
        throw InfeasibleSetpoint("power demand " + std::to_string(c) + " W exceeds converter capability " +
                                 std::to_string(e_d * e_d / (4.0 * p.r)) + " W");
    const double q   = -0.5 * (e_d + std::copysign(std::sqrt(disc), e_d));
    const double i_d = q != 0.0 ? c / q : 0.0;

    sp.i_dq = {i_d, 0.0};
    sp.d_dq = {(-p.r * i_d - e_d) / sp.v_dc, (-p.L * p.omega * i_d - sp.e_dq(1)) / sp.v_dc};
    if (kRho * sp.d_dq.norm() >= 0.5)
        throw InfeasibleSetpoint("setpoint duty cycle leaves [0, 1]: |d_dq| = " + std::to_string(sp.d_dq.norm()));

    const double inv_sqrt6 = 1.0 / std::sqrt(6.0);
    sp.X                   = PhasorVector(4, order, p.omega);
    fill_balanced(sp.X, 0, 0.0, inv_sqrt6 * cplx(sp.i_dq(0), sp.i_dq(1)));
    sp.X(3, 0) = sp.v_dc;

    sp.D = PhasorVector(3, order, p.omega);
    fill_balanced(sp.D, 0, 0.5, inv_sqrt6 * cplx(sp.d_dq(0), sp.d_dq(1)));

    sp.V = PhasorVector(4, order, p.omega);
    fill_balanced(sp.V, 0, 0.0, -p.E_rms * std::sqrt(2.0) / 2.0);
    sp.V(3, 0) = sp.i_dc;
    return sp;
}

// Harmonic lifting

HarmonicMatrices build_harmonic_matrices(const ConverterParams& p, const PhasorVector& X, const PhasorVector& De,
                                         int order) {
    if (X.channels() != 4 || De.channels() != 3)
        throw ConfigError("build_harmonic_matrices: expected X with 4 channels and D with 3");
    HarmonicMatrices m{
        toeplitz(PeriodicMatrix::constant(state_matrix(p), p.omega), order),
        toeplitz(PeriodicMatrix::constant(disturbance_matrix(p), p.omega), order),
        n_operator(4, order, p.omega),
        ToeplitzOperator(4, 3, order),
        ToeplitzOperator(4, 4, order),
    };
    const int w = 2 * order + 1;

    // T(v_dc), T(i_j), T(d_j) as scalar Toeplitz blocks
    auto scalar_block = [&](const PhasorVector& S, int channel) {
        PhasorVector s(1, S.order(), S.omega());
        s.coeffs().row(0) = S.coeffs().row(channel);
        return toeplitz(s, order).data();
    };
    const Eigen::MatrixXcd Tv = scalar_block(X, 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m.G.data().block(i * w, j * w, w, w) = -c33()(i, j) / p.L * Tv;
        m.G.data().block(3 * w, i * w, w, w) = scalar_block(X, i) / p.C;
    }
    for (int j = 0; j < 3; ++j) {
        const Eigen::MatrixXcd Td = scalar_block(De, j);
        for (int i = 0; i < 3; ++i) m.A_de.data().block(i * w, 3 * w, w, w) += -c33()(i, j) / p.L * Td;
        m.A_de.data().block(3 * w, j * w, w, w) = Td / p.C;
    }
    return m;
}

namespace {

struct RhsTerms {
    Eigen::VectorXcd drift, control, input;
};

RhsTerms rhs_terms(const ConverterParams& p, const PhasorVector& X, const PhasorVector& D, const PhasorVector& V,
                   int order) {
    const HarmonicMatrices m = build_harmonic_matrices(p, X.with_order(order), D.with_order(order), order);
    return {(m.A.data() - m.N.data()) * X.with_order(order).stacked(), m.G.data() * D.with_order(order).stacked(),
            m.B.data() * V.with_order(order).stacked()};
}

}  // namespace

PhasorVector harmonic_rhs(const ConverterParams& p, const PhasorVector& X, const PhasorVector& D,
                          const PhasorVector& V, int order) {
    const RhsTerms t = rhs_terms(p, X, D, V, order);
    return PhasorVector::from_stacked(t.drift + t.control + t.input, 4, order, p.omega, X.real_valued());
}

double equilibrium_residual(const ConverterParams& p, const PhasorVector& X, const PhasorVector& D,
                            const PhasorVector& V, int order) {
    const RhsTerms t     = rhs_terms(p, X, D, V, order);
    const double   scale = std::max({t.drift.norm(), t.control.norm(), t.input.norm()});
    const double   res   = (t.drift + t.control + t.input).norm();
    return scale > 0.0 ? res / scale : res;
}

PeriodicMatrix error_state_matrix(const Setpoint& sp) {
    const ConverterParams& p = sp.params;
    PeriodicMatrix         A(4, 4, 1, p.omega);
    A.coeff_ref(0).topLeftCorner(3, 3) = (-(p.r / p.L) * Eigen::Matrix3d::Identity()).cast<cplx>();
    for (int k = -1; k <= 1; ++k) {
        Eigen::Vector3cd d(sp.D.at(0, k), sp.D.at(1, k), sp.D.at(2, k));
        A.coeff_ref(k).block(0, 3, 3, 1) = -(c33().cast<cplx>() * d) / p.L;
        A.coeff_ref(k).block(3, 0, 1, 3) = d.transpose() / p.C;
    }
    return A;
}

PeriodicMatrix setpoint_input_gain(const Setpoint& sp) {
    const ConverterParams& p = sp.params;
    PeriodicMatrix         G(4, 3, 1, p.omega);
    for (int k = -1; k <= 1; ++k) {
        G.coeff_ref(k).topRows(3) = -c33().cast<cplx>() * sp.X.at(3, k) / p.L;
        G.coeff_ref(k).row(3) << sp.X.at(0, k) / p.C, sp.X.at(1, k) / p.C, sp.X.at(2, k) / p.C;
    }
    return G;
}

}  // namespace hctl
