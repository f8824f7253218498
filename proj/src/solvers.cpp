#include "hctl/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "hctl/error.hpp"

namespace hctl {

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) { return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size()); }

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), rows, cols);
}

/// Banded coefficient equation: diag(k) X_k + sum_l coupling(l) X_{k-l} = rhs(k).
struct BandedProblem {
    Eigen::Index                               rows = 0, cols = 0;
    int                                        band = 0;
    std::function<Eigen::MatrixXcd(int)>       diag;
    std::function<const Eigen::MatrixXcd&(int)> coupling;
    std::function<Eigen::VectorXcd(int)>       rhs;
    double                                     omega = 1.0;
};

std::vector<Eigen::MatrixXcd> solve_at_order(const BandedProblem& pb, int H) {
    const Eigen::Index s = pb.rows * pb.cols;
    const Eigen::Index n = s * (2 * H + 1);

    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<std::size_t>(n * s * (2 * pb.band + 2)));
    Eigen::VectorXcd b(n);
    auto add_block = [&](Eigen::Index r0, Eigen::Index c0, const Eigen::MatrixXcd& blk) {
        for (Eigen::Index j = 0; j < blk.cols(); ++j)
            for (Eigen::Index i = 0; i < blk.rows(); ++i)
                if (blk(i, j) != cplx(0.0)) trip.emplace_back(r0 + i, c0 + j, blk(i, j));
    };
    for (int k = -H; k <= H; ++k) {
        const Eigen::Index r0 = (k + H) * s;
        add_block(r0, r0, pb.diag(k));
        for (int l = -pb.band; l <= pb.band; ++l) {
            const int m = k - l;
            if (m < -H || m > H) continue;
            add_block(r0, (m + H) * s, pb.coupling(l));
        }
        b.segment(r0, s) = pb.rhs(k);
    }
    SpMat A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();

    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw SolverError("truncated harmonic system is singular at order " + std::to_string(H));
    const Eigen::VectorXcd u = lu.solve(b);
    if (lu.info() != Eigen::Success || !u.allFinite())
        throw SolverError("truncated harmonic solve failed at order " + std::to_string(H));

    std::vector<Eigen::MatrixXcd> X;
    X.reserve(2 * H + 1);
    for (int k = -H; k <= H; ++k) X.push_back(unvec(u.segment((k + H) * s, s), pb.rows, pb.cols));
    return X;
}

double central_gap(const std::vector<Eigen::MatrixXcd>& a, int Ha, const std::vector<Eigen::MatrixXcd>& b, int Hb,
                   int keep) {
    double diff = 0.0, ref = 0.0;
    for (int k = -keep; k <= keep; ++k) {
        diff = std::max(diff, (a[k + Ha] - b[k + Hb]).norm());
        ref  = std::max(ref, b[k + Hb].norm());
    }
    return ref > 0.0 ? diff / ref : diff;
}

struct EscalationResult {
    std::vector<Eigen::MatrixXcd> coeffs;
    int                           order = 0;
    int                           escalations = 0;
    double                        gap = 0.0;
};

EscalationResult escalate(const BandedProblem& pb, const SolverOptions& opts) {
    if (opts.keep_order < 0 || opts.solve_margin < 0) throw ConfigError("solver orders must be non-negative");
    int  H    = opts.keep_order + std::max(opts.solve_margin, 1);
    auto prev = solve_at_order(pb, H);
    for (int esc = 1;; ++esc) {
        const int next = H + 2;
        if (next > opts.max_order)
            throw SolverError("harmonic solve did not converge before order " + std::to_string(opts.max_order));
        auto         cur = solve_at_order(pb, next);
        const double gap = central_gap(prev, H, cur, next, opts.keep_order);
        if (gap < opts.tol) return {std::move(cur), next, esc, gap};
        prev = std::move(cur);
        H    = next;
    }
}

PeriodicMatrix keep_band(const std::vector<Eigen::MatrixXcd>& coeffs, int H, int keep, double omega) {
    std::vector<Eigen::MatrixXcd> kept(coeffs.begin() + (H - keep), coeffs.begin() + (H + keep + 1));
    return PeriodicMatrix::from_coefficients(std::move(kept), omega);
}

}  // namespace

ToeplitzOperator harmonic_state_matrix(const PeriodicMatrix& A, int order) {
    return toeplitz(A, order) - n_operator(A.rows(), order, A.omega());
}

LyapunovSolution solve_lyapunov(const PeriodicMatrix& A, const PeriodicMatrix& Q, const SolverOptions& opts) {
    if (A.rows() != A.cols() || Q.rows() != A.rows() || Q.cols() != A.cols())
        throw ConfigError("solve_lyapunov: A and Q must be square of equal size");
    if (opts.check_hurwitz) {
        const HurwitzCheck hc = is_hurwitz(harmonic_state_matrix(A, std::max(opts.keep_order, 2)), A.omega());
        if (!hc.hurwitz)
            throw SolverError("solve_lyapunov: state matrix is not Hurwitz (margin " + std::to_string(hc.margin) + ")");
    }
    const int                     n = A.rows();
    const Eigen::MatrixXcd        I = Eigen::MatrixXcd::Identity(n, n);
    std::vector<Eigen::MatrixXcd> coupling;
    for (int l = -A.order(); l <= A.order(); ++l) {
        const Eigen::MatrixXcd At = A.coeff_ref(l).transpose();
        coupling.push_back(kron(I, At) + kron(At, I));
    }
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(n, n);

    BandedProblem pb;
    pb.rows = pb.cols = n;
    pb.band           = A.order();
    pb.omega          = A.omega();
    pb.diag = [&](int k) { return Eigen::MatrixXcd(cplx(0.0, k * A.omega()) * Eigen::MatrixXcd::Identity(n * n, n * n)); };
    pb.coupling = [&](int l) -> const Eigen::MatrixXcd& { return coupling[l + A.order()]; };
    pb.rhs      = [&](int k) { return Eigen::VectorXcd(-vec(k >= -Q.order() && k <= Q.order() ? Q.coeff_ref(k) : zero)); };

    EscalationResult er = escalate(pb, opts);
    PeriodicMatrix   P  = keep_band(er.coeffs, er.order, opts.keep_order, A.omega());
    P.enforce_real();
    P.enforce_symmetric();

    // Central-band residual of the kept solution
    double res = 0.0;
    const int inner = std::max(0, opts.keep_order - A.order());
    for (int k = -inner; k <= inner; ++k) {
        Eigen::MatrixXcd r = cplx(0.0, k * A.omega()) * P.coeff_ref(k) + Q.coeff(k);
        for (int l = -A.order(); l <= A.order(); ++l) {
            const Eigen::MatrixXcd Pm = P.coeff(k - l);
            r += A.coeff_ref(l).transpose() * Pm + Pm * A.coeff_ref(l);
        }
        res = std::max(res, r.norm());
    }
    const double qn = std::max(Q.max_coeff_norm(), 1e-300);

    LyapunovSolution out{P, {}};
    out.report.keep_order    = opts.keep_order;
    out.report.solve_order   = er.order;
    out.report.escalations   = er.escalations;
    out.report.gap           = er.gap;
    out.report.residual      = res / qn;
    out.report.time_residual = lyapunov_time_residual(P, A, Q);
    return out;
}

SylvesterSolution solve_sylvester(const Eigen::MatrixXd& O, const PeriodicMatrix& LC, const PeriodicMatrix& A,
                                  const SolverOptions& opts) {
    if (A.rows() != A.cols() || O.rows() != O.cols() || LC.rows() != O.rows() || LC.cols() != A.rows())
        throw ConfigError("solve_sylvester: incompatible shapes of O, L C and A");
    const Eigen::Index m = O.rows(), n = A.rows();
    const Eigen::MatrixXcd kO = kron(Eigen::MatrixXcd::Identity(n, n), O.cast<cplx>());
    std::vector<Eigen::MatrixXcd> coupling;
    for (int l = -A.order(); l <= A.order(); ++l)
        coupling.push_back(kron(A.coeff_ref(l).transpose(), Eigen::MatrixXcd::Identity(m, m)));
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(m, n);

    BandedProblem pb;
    pb.rows     = m;
    pb.cols     = n;
    pb.band     = A.order();
    pb.omega    = A.omega();
    pb.diag     = [&](int k) { return Eigen::MatrixXcd(cplx(0.0, k * A.omega()) * Eigen::MatrixXcd::Identity(m * n, m * n) - kO); };
    pb.coupling = [&](int l) -> const Eigen::MatrixXcd& { return coupling[l + A.order()]; };
    pb.rhs      = [&](int k) { return vec(k >= -LC.order() && k <= LC.order() ? LC.coeff_ref(k) : zero); };

    EscalationResult er = escalate(pb, opts);
    PeriodicMatrix   M  = keep_band(er.coeffs, er.order, opts.keep_order, A.omega());
    M.enforce_real();

    double    res   = 0.0;
    const int inner = std::max(0, opts.keep_order - A.order());
    for (int k = -inner; k <= inner; ++k) {
        Eigen::MatrixXcd r = cplx(0.0, k * A.omega()) * M.coeff_ref(k) - O * M.coeff_ref(k) - LC.coeff(k);
        for (int l = -A.order(); l <= A.order(); ++l) r += M.coeff(k - l) * A.coeff_ref(l);
        res = std::max(res, r.norm());
    }
    const double ln = std::max(LC.max_coeff_norm(), 1e-300);

    SylvesterSolution out{M, {}};
    out.report.keep_order    = opts.keep_order;
    out.report.solve_order   = er.order;
    out.report.escalations   = er.escalations;
    out.report.gap           = er.gap;
    out.report.residual      = res / ln;
    out.report.time_residual = sylvester_time_residual(M, O, LC, A);
    return out;
}

double lyapunov_time_residual(const PeriodicMatrix& P, const PeriodicMatrix& A, const PeriodicMatrix& Q, int points) {
    const PeriodicMatrix dP  = P.derivative();
    double               res = 0.0, ref = 0.0;
    for (int i = 0; i < points; ++i) {
        const double          th = 2.0 * std::numbers::pi * i / points;
        const Eigen::MatrixXd Pt = P.evaluate(th), At = A.evaluate(th), Qt = Q.evaluate(th);
        res = std::max(res, (dP.evaluate(th) + At.transpose() * Pt + Pt * At + Qt).norm());
        ref = std::max(ref, Qt.norm());
    }
    return ref > 0.0 ? res / ref : res;
}

double sylvester_time_residual(const PeriodicMatrix& M, const Eigen::MatrixXd& O, const PeriodicMatrix& LC,
                               const PeriodicMatrix& A, int points) {
    const PeriodicMatrix dM  = M.derivative();
    double               res = 0.0, ref = 0.0;
    for (int i = 0; i < points; ++i) {
        const double          th = 2.0 * std::numbers::pi * i / points;
        const Eigen::MatrixXd Mt = M.evaluate(th), LCt = LC.evaluate(th);
        res = std::max(res, (dM.evaluate(th) - O * Mt + Mt * A.evaluate(th) - LCt).norm());
        ref = std::max(ref, LCt.norm());
    }
    return ref > 0.0 ? res / ref : res;
}

double min_eigenvalue_on_grid(const PeriodicMatrix& P, int points) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const Eigen::MatrixXd Pt = P.evaluate(2.0 * std::numbers::pi * i / points);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Pt + Pt.transpose()), Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues().minCoeff());
    }
    return m;
}

namespace {

bool in_strip(cplx z, double omega) {
    const double half = 0.5 * omega, eps = 1e-9 * omega;
    return z.imag() > -half + eps && z.imag() <= half + eps;
}

}  // namespace

std::vector<StripEigenvalue> closed_loop_spectrum(const ToeplitzOperator& A_op, double omega) {
    if (A_op.block_rows() != A_op.block_cols()) throw ConfigError("closed_loop_spectrum: operator is not square");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A_op.data(), false);
    const Eigen::VectorXcd                      ev = es.eigenvalues();

    Eigen::VectorXcd coarse;
    if (A_op.order() >= 2) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ec(A_op.truncated(A_op.order() - 2).data(), false);
        coarse = ec.eigenvalues();
    }

    std::vector<StripEigenvalue> out;
    for (const cplx z : ev) {
        if (!in_strip(z, omega)) continue;
        bool boundary = std::abs(std::abs(z.imag()) - 0.5 * omega) < 1e-6 * omega;
        if (coarse.size() == 0) {
            boundary = true;
        } else {
            double best = std::numeric_limits<double>::infinity();
            for (const cplx c : coarse) best = std::min(best, std::abs(c - z));
            if (best > 1e-6 * (std::abs(z) + omega)) boundary = true;
        }
        out.push_back({z, boundary});
    }
    std::sort(out.begin(), out.end(), [](const StripEigenvalue& a, const StripEigenvalue& b) {
        return a.value.real() != b.value.real() ? a.value.real() > b.value.real() : a.value.imag() > b.value.imag();
    });
    return out;
}

HurwitzCheck is_hurwitz(const ToeplitzOperator& A_op, double omega) {
    const auto spec = closed_loop_spectrum(A_op, omega);
    if (spec.empty()) return {false, 0.0};
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& e : spec) max_re = std::max(max_re, e.value.real());
    return {max_re < 0.0, -max_re};
}

Eigen::VectorXcd floquet_exponents(const PeriodicMatrix& A, int steps) {
    const int       n  = A.rows();
    const double    T  = 2.0 * std::numbers::pi / A.omega();
    const double    h  = T / steps;
    Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(n, n);
    auto            f   = [&](double t, const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
        return A.evaluate(A.omega() * t) * X;
    };
    for (int i = 0; i < steps; ++i) {
        const double          t  = i * h;
        const Eigen::MatrixXd k1 = f(t, Phi);
        const Eigen::MatrixXd k2 = f(t + 0.5 * h, Phi + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = f(t + 0.5 * h, Phi + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = f(t + h, Phi + h * k3);
        Phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(Phi, false);
    Eigen::VectorXcd                    mu = es.eigenvalues();
    Eigen::VectorXcd                    out(n);
    for (int i = 0; i < n; ++i) out(i) = std::log(mu(i)) / T;
    return out;
}

Eigen::VectorXd floquet_real_parts(const PeriodicMatrix& A, int steps, int periods) {
    const int       n = A.rows();
    const double    T = 2.0 * std::numbers::pi / A.omega();
    const double    h = T / steps;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    auto            f = [&](double t, const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
        return A.evaluate(A.omega() * t) * X;
    };
    for (int p = 0; p < periods; ++p) {
        if (p == periods / 2) acc.setZero();  // first half only rotates Q onto the ordered subspaces
        for (int i = 0; i < steps; ++i) {
            const double          t  = i * h;
            const Eigen::MatrixXd k1 = f(t, Q);
            const Eigen::MatrixXd k2 = f(t + 0.5 * h, Q + 0.5 * h * k1);
            const Eigen::MatrixXd k3 = f(t + 0.5 * h, Q + 0.5 * h * k2);
            const Eigen::MatrixXd k4 = f(t + h, Q + h * k3);
            const Eigen::MatrixXd Y  = Q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
            const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
            Q = qr.householderQ();
            for (int j = 0; j < n; ++j) {
                acc(j) += std::log(std::abs(R(j, j)));
                if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
            }
        }
    }
    const int counted = periods - periods / 2;
    Eigen::VectorXd out = acc / (counted * T);
    std::sort(out.data(), out.data() + n, std::greater<>());
    return out;
}

}  // namespace hctl
