#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hctl/harmonic.hpp"
#include "hctl/periodic_matrix.hpp"

namespace hctl {

struct SolverOptions {
    int    keep_order   = 10;  ///< band of the returned solution
    int    solve_margin = 4;   ///< first solve at keep_order + solve_margin
    int    max_order    = 40;  ///< give up beyond this solve order
    double tol          = 1e-10;
    bool   check_hurwitz = true;
};

/// Convergence record of a truncated harmonic solve.
struct SolveReport {
    int    keep_order  = 0;
    int    solve_order = 0;    ///< order whose solution was returned
    int    escalations = 0;    ///< number of order increases after the first solve
    double residual    = 0.0;  ///< central-band equation residual, relative
    double gap         = 0.0;  ///< central-band change between the last two orders, relative
    double time_residual = 0.0;  ///< pointwise differential-equation residual, relative
};

struct LyapunovSolution {
    PeriodicMatrix P;
    SolveReport    report;
};

struct SylvesterSolution {
    PeriodicMatrix M;
    SolveReport    report;
};

/**
 * Periodic Lyapunov equation -dP/dt = A(t)'P + P A(t) + Q(t), solved on its
 * Fourier coefficients: j k w P_k + sum_l (A_l' P_{k-l} + P_{k-l} A_l) + Q_k = 0.
 * The truncated system is assembled at increasing orders until the central
 * band stops moving; the result is symmetrized and real-valued.
 */
LyapunovSolution solve_lyapunov(const PeriodicMatrix& A, const PeriodicMatrix& Q, const SolverOptions& opts = {});

/**
 * Periodic Sylvester equation dM/dt = O M - M A(t) + L C(t), with O constant:
 * j k w M_k - O M_k + sum_l M_{k-l} A_l - (L C)_k = 0.
 */
SylvesterSolution solve_sylvester(const Eigen::MatrixXd& O, const PeriodicMatrix& LC, const PeriodicMatrix& A,
                                  const SolverOptions& opts = {});

/// Pointwise residual of the differential Lyapunov equation on an n-point grid, relative to |Q|.
double lyapunov_time_residual(const PeriodicMatrix& P, const PeriodicMatrix& A, const PeriodicMatrix& Q,
                              int points = 100);
double sylvester_time_residual(const PeriodicMatrix& M, const Eigen::MatrixXd& O, const PeriodicMatrix& LC,
                               const PeriodicMatrix& A, int points = 100);

/// Smallest eigenvalue of the symmetric part of P(theta) over an n-point grid.
double min_eigenvalue_on_grid(const PeriodicMatrix& P, int points = 100);

struct StripEigenvalue {
    cplx value;
    bool boundary = false;  ///< unmatched at order h - 2, or on the strip edge
};

/**
 * Eigenvalues of a truncated harmonic state matrix (already including -N)
 * whose imaginary part lies in (-w/2, w/2]. Each is compared with the
 * spectrum of the central truncation at order h - 2.
 */
std::vector<StripEigenvalue> closed_loop_spectrum(const ToeplitzOperator& A_op, double omega);

struct HurwitzCheck {
    bool   hurwitz = false;
    double margin  = 0.0;  ///< -max Re over the fundamental strip
};

HurwitzCheck is_hurwitz(const ToeplitzOperator& A_op, double omega);

/// toeplitz(A, h) - N, the harmonic state matrix of x' = A(t) x.
ToeplitzOperator harmonic_state_matrix(const PeriodicMatrix& A, int order);

/// Floquet exponents from the monodromy matrix of x' = A(t) x, imaginary parts folded to (-w/2, w/2].
Eigen::VectorXcd floquet_exponents(const PeriodicMatrix& A, int steps = 4000);

/// Real parts of the Floquet exponents, largest first, from QR re-orthogonalization
/// at every step over several periods. Survives stiff modes that swamp the monodromy matrix.
Eigen::VectorXd floquet_real_parts(const PeriodicMatrix& A, int steps = 4000, int periods = 40);

}  // namespace hctl
