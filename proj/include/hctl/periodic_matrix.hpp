#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hctl/harmonic.hpp"

namespace hctl {

/**
 * @brief T-periodic matrix function stored by its Fourier coefficients.
 *
 * P(theta) = sum_{|k| <= h} P_k e^{j k theta}. For real-valued functions
 * P_{-k} = conj(P_k) and the runtime form
 *   P(theta) = P_0 + sum_k P_{c,k} cos(k theta) + P_{s,k} sin(k theta),
 *   P_{c,k} = 2 Re(P_k),  P_{s,k} = -2 Im(P_k)
 * is used by evaluate().
 */
class PeriodicMatrix {
   public:
    PeriodicMatrix() = default;
    PeriodicMatrix(int rows, int cols, int order, double omega);

    static PeriodicMatrix constant(const Eigen::MatrixXd& value, double omega);
    static PeriodicMatrix from_coefficients(std::vector<Eigen::MatrixXcd> coeffs, double omega);

    int    rows() const { return rows_; }
    int    cols() const { return cols_; }
    int    order() const { return order_; }
    double omega() const { return omega_; }

    /// Coefficient P_k; zero outside the stored band.
    Eigen::MatrixXcd        coeff(int k) const;
    Eigen::MatrixXcd&       coeff_ref(int k) { return coeffs_.at(k + order_); }
    const Eigen::MatrixXcd& coeff_ref(int k) const { return coeffs_.at(k + order_); }

    /// Real runtime evaluation with an optional band limit (h_trunc).
    Eigen::MatrixXd  evaluate(double theta, int band = -1) const;
    Eigen::MatrixXcd evaluate_complex(double theta, int band = -1) const;

    /// Largest index with a coefficient above tol * max_k |P_k|.
    int effective_band(double tol = 1e-13) const;

    bool   is_real_valued(double tol) const;
    double max_coeff_norm() const;

    PeriodicMatrix with_order(int order) const;
    PeriodicMatrix transpose() const;
    PeriodicMatrix derivative() const;

    /// Symmetrizes the coefficients so that P_{-k} = conj(P_k).
    void enforce_real();
    /// Symmetrizes so that P(theta)' = P(theta), i.e. P_k' = P_k.
    void enforce_symmetric();

    PeriodicMatrix& operator+=(const PeriodicMatrix& other);
    PeriodicMatrix& operator-=(const PeriodicMatrix& other);
    PeriodicMatrix& operator*=(double s);

   private:
    int                           rows_  = 0;
    int                           cols_  = 0;
    int                           order_ = 0;
    double                        omega_ = 1.0;
    std::vector<Eigen::MatrixXcd> coeffs_;
};

PeriodicMatrix operator+(PeriodicMatrix a, const PeriodicMatrix& b);
PeriodicMatrix operator-(PeriodicMatrix a, const PeriodicMatrix& b);
PeriodicMatrix operator*(double s, PeriodicMatrix a);
/// Pointwise product in time = coefficient convolution; band adds up.
PeriodicMatrix operator*(const PeriodicMatrix& a, const PeriodicMatrix& b);

/// Block-Toeplitz lift of a periodic matrix function at order h_out.
ToeplitzOperator toeplitz(const PeriodicMatrix& A, int h_out);

/// Reads the symbol back from block column 0 of a Toeplitz operator.
PeriodicMatrix symbol_of(const ToeplitzOperator& T, double omega);

}  // namespace hctl
