#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace hctl {

using cplx = std::complex<double>;

/**
 * @brief Phasors X_k, k = -h..h, of a multichannel signal over one period.
 *
 * Storage is centered: column (k + h) holds the k-th phasor of every channel,
 * so conjugate symmetry of a real signal is a mirror test about column h.
 */
class PhasorVector {
   public:
    PhasorVector() = default;
    PhasorVector(int channels, int order, double omega, bool real_valued = true);

    int    channels() const { return static_cast<int>(coeffs_.rows()); }
    int    order() const { return order_; }
    int    width() const { return 2 * order_ + 1; }
    double omega() const { return omega_; }
    double period() const;
    bool   real_valued() const { return real_valued_; }
    void   set_real_valued(bool flag) { real_valued_ = flag; }

    cplx&       operator()(int channel, int k) { return coeffs_(channel, k + order_); }
    const cplx& operator()(int channel, int k) const { return coeffs_(channel, k + order_); }

    /// k-th phasor, zero outside the stored band.
    cplx at(int channel, int k) const;

    Eigen::MatrixXcd&       coeffs() { return coeffs_; }
    const Eigen::MatrixXcd& coeffs() const { return coeffs_; }

    bool is_conjugate_symmetric(double tol) const;

    /// Channel-major stacking [X_c(-h..h) for c = 0..channels-1].
    Eigen::VectorXcd stacked() const;
    static PhasorVector from_stacked(const Eigen::VectorXcd& v, int channels, int order, double omega,
                                     bool real_valued = true);

    /// Re-banded copy: coefficients beyond the new order are dropped, new ones zero.
    PhasorVector with_order(int order) const;

   private:
    Eigen::MatrixXcd coeffs_;
    int              order_       = 0;
    double           omega_       = 1.0;
    bool             real_valued_ = true;
};

/// Time-varying phasors X(t) sampled at strictly increasing timestamps.
struct PhasorTrajectory {
    std::vector<double>       timestamps;
    std::vector<PhasorVector> samples;

    bool empty() const { return samples.empty(); }
};

struct SlidingFourierOptions {
    /// Emit one sample every `stride` input samples (after the first full window).
    int stride = 1;
};

/**
 * Sliding Fourier decomposition X_k(t) = (1/T) int_{t-T}^{t} x(tau) e^{-j w k tau} dtau.
 *
 * `samples` is channels x N, uniformly spaced at `timestamps`. The trailing
 * window integral is evaluated with the trapezoidal rule.
 */
PhasorTrajectory sliding_fourier(std::span<const double> timestamps, const Eigen::MatrixXd& samples, double period,
                                 int order, SlidingFourierOptions options = {});
PhasorTrajectory sliding_fourier(std::span<const double> timestamps, const Eigen::MatrixXcd& samples, double period,
                                 int order, SlidingFourierOptions options = {});

/// x(t) = sum_k X_k e^{j w k t} + (T/2) dX_0/dt, per channel.
Eigen::VectorXcd reconstruct(const PhasorVector& X, const Eigen::VectorXcd& dX0, double t);

/**
 * @brief Truncated block-Toeplitz operator of order h.
 *
 * Block (i, j) is (2h+1) x (2h+1); the scalar at (i, j, p, q), p, q in -h..h,
 * is the (p - q)-th Fourier coefficient of entry (i, j) of the represented
 * matrix function (plus whatever diagonal terms like N were added).
 */
class ToeplitzOperator {
   public:
    ToeplitzOperator() = default;
    ToeplitzOperator(int block_rows, int block_cols, int order);
    ToeplitzOperator(int block_rows, int block_cols, int order, Eigen::MatrixXcd data);

    static ToeplitzOperator identity(int blocks, int order);

    int block_rows() const { return block_rows_; }
    int block_cols() const { return block_cols_; }
    int order() const { return order_; }
    int width() const { return 2 * order_ + 1; }

    Eigen::MatrixXcd&       data() { return data_; }
    const Eigen::MatrixXcd& data() const { return data_; }

    cplx& at(int i, int j, int p, int q) { return data_(index(i, p), index(j, q)); }
    cplx  at(int i, int j, int p, int q) const { return data_(index(i, p), index(j, q)); }

    /// True when every block is constant along its diagonals (within tol).
    bool has_toeplitz_structure(double tol = 1e-12) const;

    /// Central truncation to a lower order.
    ToeplitzOperator truncated(int order) const;

    ToeplitzOperator adjoint() const;

    /// Column q = 0 of block column `block_col`, read back as phasors.
    PhasorVector central_column(int block_col, double omega) const;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const { return data_ * x; }
    PhasorVector     apply(const PhasorVector& X) const;

    ToeplitzOperator& operator+=(const ToeplitzOperator& other);
    ToeplitzOperator& operator-=(const ToeplitzOperator& other);
    ToeplitzOperator& operator*=(cplx s);

   private:
    int index(int block, int k) const { return block * width() + k + order_; }
    void require_same_shape(const ToeplitzOperator& other) const;

    int              block_rows_ = 0;
    int              block_cols_ = 0;
    int              order_      = 0;
    Eigen::MatrixXcd data_;
};

ToeplitzOperator operator+(ToeplitzOperator a, const ToeplitzOperator& b);
ToeplitzOperator operator-(ToeplitzOperator a, const ToeplitzOperator& b);
ToeplitzOperator operator*(cplx s, ToeplitzOperator a);

/// Lift of a vector signal: channels x 1 block operator of order h_out.
ToeplitzOperator toeplitz(const PhasorVector& X, int h_out);

/// N = Id_channels (x) diag(j w k).
ToeplitzOperator n_operator(int channels, int order, double omega);

/// S_alpha = diag(e^{j k alpha}); F(u(t - a T)) = S_{-2 pi a} F(u).
ToeplitzOperator phase_shift(double alpha, int order);

/// Applies S_alpha channel-wise.
PhasorVector phase_shifted(const PhasorVector& X, double alpha);

/// Plain truncated product. Only the central coefficients
/// |k| <= h - band(A) - band(B) of the result are exact.
ToeplitzOperator truncated_product(const ToeplitzOperator& A, const ToeplitzOperator& B);

}  // namespace hctl
