#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hctl/harmonic.hpp"

namespace oracle {

using namespace hctl;

namespace {

template <class V, class F>
V rk4(const V& x, double t, double h, F&& f) {
    const V k1 = f(t, x);
    const V k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const V k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const V k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

double abc_dq_agreement(const ConverterParams& p, double duration, double dt) {
    const Setpoint sp = compute_setpoint(p);
    // start away from the setpoint so both models move
    const Vec2   i0(0.5, -1.0);
    const double v0 = 120.0;
    const Vec2   d_dq = sp.d_dq + Vec2(0.01, 0.02);
    auto i_dc = [&](double t) { return sp.i_dc + 0.5 * std::sin(2 * std::numbers::pi * 30 * t); };

    Vec4 xa;
    xa.head<3>() = inverse_park(i0, 0.0);
    xa(3)        = v0;
    Vec3 xd(i0(0), i0(1), v0);

    auto fa = [&](double t, const Vec4& x) {
        const double th = p.omega * t;
        return abc_derivative(x, Vec3::Constant(0.5) + inverse_park(d_dq, th), grid_voltage(p.E_rms, th), i_dc(t), p);
    };
    auto fd = [&](double t, const Vec3& x) {
        return dq_derivative(x.head<2>(), x(2), d_dq, sp.e_dq, i_dc(t), p);
    };

    const long n   = std::lround(duration / dt);
    double     err = 0.0;
    for (long s = 0; s < n; ++s) {
        const double t = s * dt;
        xa             = rk4(xa, t, dt, fa);
        xd             = rk4(xd, t, dt, fd);
        const Vec2   idq   = park(xa.head<3>(), p.omega * (t + dt));
        const double scale = std::max(1.0, xd.norm());
        err = std::max(err, std::max((idq - xd.head<2>()).norm(), std::abs(xa(3) - xd(2))) / scale);
    }
    return err;
}

double lifting_residual(const ConverterParams& p, double duration, int order) {
    const Setpoint sp = compute_setpoint(p, 0.0, order + 1);
    const double   dt = 1e-6;
    const double   T  = 2 * std::numbers::pi / p.omega;
    // smooth load change: sine plus a 10 ms raised-cosine ramp of +2 A at 50 ms
    auto i_dc = [&](double t) {
        const double u    = std::clamp((t - 0.05) / 0.01, 0.0, 1.0);
        const double ramp = 2.0 * 0.5 * (1.0 - std::cos(std::numbers::pi * u));
        return sp.i_dc + 1.5 * std::sin(2 * std::numbers::pi * 13 * t) + ramp;
    };
    auto f = [&](double t, const Vec4& x) {
        const double th = p.omega * t;
        return abc_derivative(x, sp.duty(th), grid_voltage(p.E_rms, th), i_dc(t), p);
    };

    const long          n = std::lround(duration / dt);
    std::vector<double> ts(n + 1);
    Eigen::MatrixXd     xs(4, n + 1), vs(4, n + 1);
    Vec4                x = diode_init(p).vector();
    for (long s = 0; s <= n; ++s) {
        const double t      = s * dt;
        ts[s]               = t;
        xs.col(s)           = x;
        vs.col(s).head<3>() = grid_voltage(p.E_rms, p.omega * t);
        vs(3, s)            = i_dc(t);
        if (s < n) x = rk4(x, t, dt, f);
    }

    const PhasorTrajectory X = sliding_fourier(ts, xs, T, order + 1);
    const PhasorTrajectory V = sliding_fourier(ts, vs, T, order + 1);
    const long             w = std::lround(T / dt);

    double max_err = 0.0, max_ref = 0.0;
    const int stride = 97;
    for (std::size_t i = 0; i < X.samples.size(); i += stride) {
        const long   s = static_cast<long>(i) + w;  // sample index of the window end
        const double t = ts[s];
        // exact derivative of the trailing-window integral
        PhasorVector dX(4, order, p.omega);
        for (int k = -order; k <= order; ++k) {
            const cplx e = std::polar(1.0, -p.omega * k * t);
            for (int c = 0; c < 4; ++c) dX(c, k) = (xs(c, s) - xs(c, s - w)) / T * e;
        }
        const PhasorVector rhs = harmonic_rhs(p, X.samples[i], sp.D, V.samples[i], order);
        double             e2 = 0.0, r2 = 0.0;
        for (int c = 0; c < 4; ++c)
            for (int k = -(order - 1); k <= order - 1; ++k) {
                e2 += std::norm(rhs(c, k) - dX(c, k));
                r2 += std::norm(dX(c, k));
            }
        max_err = std::max(max_err, std::sqrt(e2));
        max_ref = std::max(max_ref, std::sqrt(r2));
    }
    return max_ref > 0.0 ? max_err / max_ref : max_err;
}

PowerBalance setpoint_power_balance(const Setpoint& sp) {
    const ConverterParams& p = sp.params;
    const int              n = 720;
    double                 grid = 0.0, loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = 2 * std::numbers::pi * i / n;
        const Vec3   ia = sp.state(th).head<3>();
        grid += -sp.grid(th).dot(ia) / n;
        loss += p.r * ia.squaredNorm() / n;
    }
    return {grid, loss + sp.v_dc * sp.i_dc};
}

double settling_time(const SimulationTrace& tr, double t_event, double target, double band) {
    const auto   t  = tr.times();
    const auto   v  = tr.column("v_dc");
    const auto   m0 = phasor_magnitude_series(t, v, 0, tr.omega);
    double       last = t_event;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_event || std::isnan(m0[i])) continue;
        if (std::abs(m0[i] - target) > band) last = t[i];
    }
    return last - t_event;
}

double phasor_ratio(const SimulationTrace& tr, const std::string& column, int k, int k_ref, double t0, double t1) {
    const auto t  = tr.times();
    const auto x  = tr.column(column);
    const auto mk = phasor_magnitude_series(t, x, k, tr.omega);
    const auto mr = phasor_magnitude_series(t, x, k_ref, tr.omega);
    double     s = 0.0;
    int        n = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t0 && t[i] <= t1 && !std::isnan(mk[i]) && !std::isnan(mr[i]) && mr[i] > 0.0) {
            s += mk[i] / mr[i];
            ++n;
        }
    return n ? s / n : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace oracle
