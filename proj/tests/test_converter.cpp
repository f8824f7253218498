#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "hctl/converter.hpp"
#include "hctl/error.hpp"
#include "oracles.hpp"

using namespace hctl;
using testutil::kPi;

TEST_CASE("parameter file parsing") {
    std::istringstream flat("r = 1.15\nL = 122e-6\nC = 100e-6\nR_L = 120\nE_rms = 45\nf = 50\nv_dc_ref = 150\n");
    const ConverterParams p = parse_params(flat);
    CHECK(p.L == doctest::Approx(122e-6));
    CHECK(p.omega == doctest::Approx(2 * kPi * 50));

    std::istringstream sec("[params]\nr = 0.5\nL = 1e-3\nC = 1e-3\nR_L = 10\nE_rms = 230\nf = 60\nv_dc_ref = 700\n");
    CHECK(parse_params(sec).frequency() == doctest::Approx(60.0));

    std::istringstream missing("r = 1.15\nL = 122e-6\nC = 100e-6\nR_L = 120\nf = 50\nv_dc_ref = 150\n");
    try {
        parse_params(missing);
        FAIL("missing key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("E_rms") != std::string::npos);
    }
    std::istringstream negative("r = 1.15\nL = -1\nC = 100e-6\nR_L = 120\nE_rms = 45\nf = 50\nv_dc_ref = 150\n");
    CHECK_THROWS_AS(parse_params(negative), ConfigError);

    ConverterParams lossless;
    lossless.r = 0.0;
    CHECK_NOTHROW(lossless.validate());
}

TEST_CASE("abc model examples") {
    const ConverterParams p;
    const Vec4            d0 = abc_derivative(Vec4::Zero(), Vec3::Constant(0.5), Vec3::Zero(), 0.0, p);
    CHECK(d0.norm() == 0.0);
    // half duty on every arm has no differential-mode effect even with a charged bus
    Vec4 x(0, 0, 0, 150);
    CHECK(abc_derivative(x, Vec3::Constant(0.5), Vec3::Zero(), 0.0, p).head<3>().norm() < 1e-9);
    const Vec4 d1 = abc_derivative(Vec4::Zero(), Vec3::Constant(0.5), Vec3(1, 0, 0), 0.0, p);
    CHECK(d1(0) == doctest::Approx(-1.0 / p.L));
    CHECK(d1(1) == 0.0);
    CHECK(d1(2) == 0.0);
    CHECK(d1(3) == 0.0);
}

TEST_CASE("dq model examples") {
    const ConverterParams p;
    CHECK(dq_derivative(Vec2::Zero(), 0.0, Vec2::Zero(), Vec2::Zero(), 0.0, p).norm() == 0.0);
    const Vec3 d = dq_derivative(Vec2(1, 0), 0.0, Vec2::Zero(), Vec2::Zero(), 0.0, p);
    CHECK(d(1) == doctest::Approx(-p.omega));
    CHECK(d(0) == doctest::Approx(-p.r / p.L));
}

TEST_CASE("park transform") {
    CHECK(park(Vec3::Zero(), 0.3).norm() == 0.0);
    for (double th : {0.0, 0.7, 2.9, 5.1}) {
        const Vec2 v(1.3, -0.4);
        CHECK((park(inverse_park(v, th), th) - v).norm() < 1e-14);
    }
    // power invariance: |i_abc|^2 = |i_dq|^2 for zero-sum currents
    const Vec3 i = inverse_park(Vec2(2.0, 1.0), 1.1);
    CHECK(i.sum() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(i.squaredNorm() == doctest::Approx(5.0));
    // grid voltage lands on the negative d axis
    const Vec2 e = park(grid_voltage(45.0, 0.8), 0.8);
    CHECK(e(0) == doctest::Approx(-std::sqrt(3.0) * 45.0));
    CHECK(std::abs(e(1)) < 1e-12);
}

TEST_CASE("fundamental phasor of a constant dq current") {
    const double w = 2 * kPi * 50, T = 0.02;
    const auto   t = testutil::grid(T, 400, 1.0);
    Eigen::MatrixXd x(1, static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = inverse_park(Vec2(1, 0), w * t[i])(0);
    const PhasorVector X = sliding_fourier(t, x, T, 2).samples.back();
    CHECK(std::abs(X(0, 1) - 1.0 / std::sqrt(6.0)) < 1e-12);
}

TEST_CASE("energy rate matches finite differences") {
    const ConverterParams p;
    const Vec4            x(1.0, -2.5, 1.5, 140.0);
    const Vec3            d(0.8, 0.3, 0.4);
    const Vec3            e = grid_voltage(p.E_rms, 0.3);
    const double          idc = 1.7, h = 1e-9;
    const Vec4            dx  = abc_derivative(x, d, e, idc, p);
    const double fd = (stored_energy(x + h * dx, p) - stored_energy(x - h * dx, p)) / (2 * h);
    CHECK(energy_rate(x, d, e, idc, p) == doctest::Approx(fd).epsilon(1e-6));
    // zero-sum duty deviation about 0.5: the plain balance -r|i|^2 - e'i - v i_dc
    const Vec3 dz(0.7, 0.4, 0.4);
    const double plain = -p.r * x.head<3>().squaredNorm() - e.dot(x.head<3>()) - x(3) * idc;
    CHECK(energy_rate(x, dz, e, idc, p) == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("abc and dq trajectories agree") { CHECK(oracle::abc_dq_agreement(ConverterParams{}, 0.05) < 1e-6); }

TEST_CASE("setpoint at the bench values") {
    const ConverterParams p;
    const Setpoint        sp = compute_setpoint(p);
    // frozen values of this implementation
    CHECK(sp.i_dq(0) == doctest::Approx(2.4976699781).epsilon(1e-9));
    CHECK(sp.i_dq(1) == 0.0);
    CHECK(sp.d_dq(0) == doctest::Approx(0.500466439105).epsilon(1e-9));
    CHECK(sp.d_dq(1) == doctest::Approx(-0.000638195147882).epsilon(1e-9));
    CHECK(sp.e_dq(0) == doctest::Approx(-std::sqrt(3.0) * 45.0));
    CHECK(sp.i_dc == doctest::Approx(1.25));

    const Vec3 r = dq_derivative(sp.i_dq, sp.v_dc, sp.d_dq, sp.e_dq, sp.i_dc, p);
    CHECK(std::abs(r(0)) * p.L < 1e-10 * std::abs(sp.e_dq(0)));
    CHECK(std::abs(r(1)) * p.L < 1e-10 * std::abs(sp.e_dq(0)));
    CHECK(std::abs(r(2)) * p.C < 1e-10 * sp.i_dc);

    const auto pb = oracle::setpoint_power_balance(sp);
    CHECK(std::abs(pb.grid - pb.load_and_loss) < 1e-3 * pb.grid);

    // phasor relations
    CHECK(std::abs(sp.X(0, 1) - sp.i_dq(0) / std::sqrt(6.0)) < 1e-14);
    CHECK(std::abs(sp.D(0, 0) - 0.5) < 1e-15);
    const PhasorVector Xb = phase_shifted(sp.X, -2 * kPi / 3);
    for (int k = -2; k <= 2; ++k) {
        CHECK(std::abs(Xb(0, k) - sp.X(1, k)) < 1e-14);
        CHECK(std::abs(phase_shifted(sp.X, 2 * kPi / 3)(0, k) - sp.X(2, k)) < 1e-14);
    }
    // the time form agrees with the phasors
    for (double th : {0.0, 1.0, 4.0}) {
        const Vec4 x = sp.state(th);
        CHECK(x(0) == doctest::Approx(2 * (sp.X(0, 1) * std::polar(1.0, th)).real()));
    }
}

TEST_CASE("setpoint limits") {
    ConverterParams p;
    // no load at all: i_d -> 0 and d_d v -> -e_d
    p.R_L               = 1e12;
    const Setpoint none = compute_setpoint(p);
    CHECK(std::abs(none.i_dq(0)) < 1e-9);
    CHECK(none.d_dq(0) * none.v_dc == doctest::Approx(-none.e_dq(0)).epsilon(1e-9));

    ConverterParams heavy;
    heavy.R_L = 1.0;
    CHECK_THROWS_AS(compute_setpoint(heavy), InfeasibleSetpoint);
    CHECK_THROWS_AS(compute_setpoint(ConverterParams{}, 0.0, 0), ConfigError);

    ConverterParams lossless;
    lossless.r = 0.0;
    const Setpoint sp0 = compute_setpoint(lossless);
    CHECK(sp0.i_dq(0) == doctest::Approx(-sp0.v_dc * sp0.i_dc / sp0.e_dq(0)));
}

TEST_CASE("harmonic equilibrium") {
    const ConverterParams p;
    const Setpoint        sp = compute_setpoint(p, 0.0, 6);
    CHECK(equilibrium_residual(p, sp.X, sp.D, sp.V, 6) < 1e-8);

    PhasorVector Dp = sp.D;
    Dp.coeffs() *= 1.01;
    CHECK(equilibrium_residual(p, sp.X, Dp, sp.V, 6) > 1e-3);

    const PhasorVector zero4(4, 6, p.omega), zero3(3, 6, p.omega);
    CHECK(harmonic_rhs(p, zero4, zero3, zero4, 6).coeffs().norm() == 0.0);
}

TEST_CASE("lifted input gain") {
    const ConverterParams p;
    const PhasorVector    D(3, 3, p.omega);
    const int             h = 3, w = 2 * h + 1;
    {
        const PhasorVector zero(4, 3, p.omega);
        CHECK(build_harmonic_matrices(p, zero, D, h).G.data().norm() == 0.0);
    }
    PhasorVector X(4, 3, p.omega);
    X(3, 0)                   = 150.0;
    const HarmonicMatrices m  = build_harmonic_matrices(p, X, D, h);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK((m.G.data().block(i * w, j * w, w, w) +
                   c33()(i, j) * 150.0 / p.L * Eigen::MatrixXcd::Identity(w, w))
                      .norm() < 1e-6);
    CHECK(m.G.data().block(3 * w, 0, w, 3 * w).norm() == 0.0);
    CHECK(m.N.data().isApprox(n_operator(4, h, p.omega).data()));
}

TEST_CASE("lifted model follows the time model through a transient") {
    CHECK(oracle::lifting_residual(ConverterParams{}, 0.1, 6) < 1e-4);
}

TEST_CASE("periodic error-system matrices") {
    const Setpoint       sp = compute_setpoint(ConverterParams{});
    const PeriodicMatrix A  = error_state_matrix(sp);
    const PeriodicMatrix G  = setpoint_input_gain(sp);
    CHECK(A.order() == 1);
    CHECK(A.is_real_valued(1e-15));
    for (double th : {0.0, 0.9, 3.3}) {
        const Eigen::Matrix4d ref = state_matrix(sp.params) + duty_coupling(sp.duty(th), sp.params);
        CHECK((A.evaluate(th) - ref).norm() < 1e-9 * ref.norm());
        CHECK((G.evaluate(th) - input_gain(sp.state(th), sp.params)).norm() < 1e-9 * G.evaluate(th).norm());
        // zero-sum property of the duty channel
        CHECK((G.evaluate(th).topRows<3>().colwise().sum()).norm() < 1e-6);
    }
}
