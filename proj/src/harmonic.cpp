#include "hctl/harmonic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hctl/error.hpp"

namespace hctl {

// PhasorVector

PhasorVector::PhasorVector(int channels, int order, double omega, bool real_valued)
    : coeffs_(Eigen::MatrixXcd::Zero(channels, 2 * order + 1)), order_(order), omega_(omega),
      real_valued_(real_valued) {
    if (channels < 0 || order < 0) throw ConfigError("PhasorVector: negative channel count or order");
    if (!(omega > 0.0)) throw ConfigError("PhasorVector: omega must be positive");
}

double PhasorVector::period() const { return 2.0 * std::numbers::pi / omega_; }

cplx PhasorVector::at(int channel, int k) const {
    if (k < -order_ || k > order_) return {0.0, 0.0};
    return coeffs_(channel, k + order_);
}

bool PhasorVector::is_conjugate_symmetric(double tol) const {
    for (int c = 0; c < channels(); ++c)
        for (int k = 0; k <= order_; ++k)
            if (std::abs((*this)(c, -k) - std::conj((*this)(c, k))) > tol) return false;
    return true;
}

Eigen::VectorXcd PhasorVector::stacked() const {
    Eigen::VectorXcd v(channels() * width());
    for (int c = 0; c < channels(); ++c) v.segment(c * width(), width()) = coeffs_.row(c).transpose();
    return v;
}

PhasorVector PhasorVector::from_stacked(const Eigen::VectorXcd& v, int channels, int order, double omega,
                                        bool real_valued) {
    PhasorVector X(channels, order, omega, real_valued);
    if (v.size() != channels * X.width()) throw ConfigError("PhasorVector::from_stacked: size mismatch");
    for (int c = 0; c < channels; ++c) X.coeffs_.row(c) = v.segment(c * X.width(), X.width()).transpose();
    return X;
}

PhasorVector PhasorVector::with_order(int order) const {
    PhasorVector out(channels(), order, omega_, real_valued_);
    const int    common = std::min(order, order_);
    for (int c = 0; c < channels(); ++c)
        for (int k = -common; k <= common; ++k) out(c, k) = (*this)(c, k);
    return out;
}

// Sliding Fourier decomposition

namespace {

PhasorTrajectory sliding_fourier_impl(std::span<const double> t, const Eigen::MatrixXcd& x, double period, int order,
                                      SlidingFourierOptions options, bool real_valued) {
    const long n = static_cast<long>(t.size());
    if (x.cols() != n) throw ConfigError("sliding_fourier: sample count does not match timestamps");
    if (n < 2) throw ConfigError("sliding_fourier: at least two samples required");
    if (!(period > 0.0)) throw ConfigError("sliding_fourier: period must be positive");
    if (order < 0) throw ConfigError("sliding_fourier: negative order");
    if (options.stride < 1) throw ConfigError("sliding_fourier: stride must be >= 1");

    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    if (!(dt > 0.0)) throw ConfigError("sliding_fourier: timestamps must be strictly increasing");
    for (long i = 1; i < n; ++i) {
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt)
            throw ConfigError("sliding_fourier: non-uniform timestamps at index " + std::to_string(i));
    }
    const double ratio  = period / dt;
    const long   window = std::lround(ratio);
    if (window < 1 || std::abs(ratio - static_cast<double>(window)) > 1e-3)
        throw ConfigError("sliding_fourier: sample spacing does not divide the period");
    if (n < window + 1) throw ConfigError("sliding_fourier: signal shorter than one window");

    const int    channels = static_cast<int>(x.rows());
    const int    width    = 2 * order + 1;
    const double omega    = 2.0 * std::numbers::pi / period;

    // f_j(k) = x_j e^{-j w k t_j}, built from powers of e^{-j w t_j}.
    auto kernel_row = [&](long j, Eigen::MatrixXcd& out) {
        const cplx base = std::polar(1.0, -omega * t[j]);
        cplx       pos(1.0, 0.0);
        out.col(order) = x.col(j);
        for (int k = 1; k <= order; ++k) {
            pos *= base;
            out.col(order + k) = x.col(j) * pos;
            out.col(order - k) = x.col(j) * std::conj(pos);
        }
    };

    Eigen::MatrixXcd fa(channels, width), fb(channels, width), acc = Eigen::MatrixXcd::Zero(channels, width);
    auto             segment = [&](long j, Eigen::MatrixXcd& out) {
        kernel_row(j, fa);
        kernel_row(j + 1, fb);
        out = 0.5 * dt * (fa + fb);
    };

    Eigen::MatrixXcd seg(channels, width);
    for (long j = 0; j < window; ++j) {
        segment(j, seg);
        acc += seg;
    }

    PhasorTrajectory out;
    const long       count = (n - 1 - window) / options.stride + 1;
    out.timestamps.reserve(count);
    out.samples.reserve(count);
    const double scale = 1.0 / period;
    for (long i = window;; ++i) {
        if ((i - window) % options.stride == 0) {
            PhasorVector X(channels, order, omega, real_valued);
            X.coeffs() = acc * scale;
            out.timestamps.push_back(t[i]);
            out.samples.push_back(std::move(X));
        }
        if (i + 1 >= n) break;
        segment(i, seg);
        acc += seg;
        segment(i - window, seg);
        acc -= seg;
    }
    return out;
}

}  // namespace

PhasorTrajectory sliding_fourier(std::span<const double> timestamps, const Eigen::MatrixXd& samples, double period,
                                 int order, SlidingFourierOptions options) {
    return sliding_fourier_impl(timestamps, samples.cast<cplx>(), period, order, options, true);
}

PhasorTrajectory sliding_fourier(std::span<const double> timestamps, const Eigen::MatrixXcd& samples, double period,
                                 int order, SlidingFourierOptions options) {
    return sliding_fourier_impl(timestamps, samples, period, order, options, false);
}

Eigen::VectorXcd reconstruct(const PhasorVector& X, const Eigen::VectorXcd& dX0, double t) {
    if (dX0.size() != X.channels()) throw ConfigError("reconstruct: dX0 must have one entry per channel");
    Eigen::VectorXcd x = 0.5 * X.period() * dX0;
    for (int k = -X.order(); k <= X.order(); ++k) {
        const cplx e = std::polar(1.0, X.omega() * k * t);
        for (int c = 0; c < X.channels(); ++c) x(c) += X(c, k) * e;
    }
    return x;
}

// ToeplitzOperator

ToeplitzOperator::ToeplitzOperator(int block_rows, int block_cols, int order)
    : block_rows_(block_rows), block_cols_(block_cols), order_(order),
      data_(Eigen::MatrixXcd::Zero(block_rows * (2 * order + 1), block_cols * (2 * order + 1))) {
    if (block_rows < 0 || block_cols < 0 || order < 0) throw ConfigError("ToeplitzOperator: negative dimension");
}

ToeplitzOperator::ToeplitzOperator(int block_rows, int block_cols, int order, Eigen::MatrixXcd data)
    : block_rows_(block_rows), block_cols_(block_cols), order_(order), data_(std::move(data)) {
    if (data_.rows() != block_rows * width() || data_.cols() != block_cols * width())
        throw ConfigError("ToeplitzOperator: data shape does not match block layout");
}

ToeplitzOperator ToeplitzOperator::identity(int blocks, int order) {
    ToeplitzOperator I(blocks, blocks, order);
    I.data_.setIdentity();
    return I;
}

bool ToeplitzOperator::has_toeplitz_structure(double tol) const {
    const int w = width();
    for (int i = 0; i < block_rows_; ++i)
        for (int j = 0; j < block_cols_; ++j) {
            const auto blk = data_.block(i * w, j * w, w, w);
            for (int d = -(w - 1); d <= w - 1; ++d) {
                const int  p0  = std::max(0, d);
                const int  q0  = p0 - d;
                const cplx ref = blk(p0, q0);
                for (int s = 1; p0 + s < w && q0 + s < w; ++s)
                    if (std::abs(blk(p0 + s, q0 + s) - ref) > tol) return false;
            }
        }
    return true;
}

ToeplitzOperator ToeplitzOperator::truncated(int order) const {
    if (order > order_ || order < 0) throw ConfigError("ToeplitzOperator::truncated: invalid order");
    ToeplitzOperator out(block_rows_, block_cols_, order);
    const int        w = out.width(), off = order_ - order;
    for (int i = 0; i < block_rows_; ++i)
        for (int j = 0; j < block_cols_; ++j)
            out.data_.block(i * w, j * w, w, w) = data_.block(i * width() + off, j * width() + off, w, w);
    return out;
}

ToeplitzOperator ToeplitzOperator::adjoint() const {
    return ToeplitzOperator(block_cols_, block_rows_, order_, data_.adjoint());
}

PhasorVector ToeplitzOperator::central_column(int block_col, double omega) const {
    PhasorVector X(block_rows_, order_, omega, false);
    for (int i = 0; i < block_rows_; ++i)
        for (int k = -order_; k <= order_; ++k) X(i, k) = at(i, block_col, k, 0);
    return X;
}

PhasorVector ToeplitzOperator::apply(const PhasorVector& X) const {
    if (X.channels() != block_cols_ || X.order() != order_)
        throw ConfigError("ToeplitzOperator::apply: phasor shape mismatch");
    return PhasorVector::from_stacked(data_ * X.stacked(), block_rows_, order_, X.omega(), X.real_valued());
}

void ToeplitzOperator::require_same_shape(const ToeplitzOperator& other) const {
    if (block_rows_ != other.block_rows_ || block_cols_ != other.block_cols_ || order_ != other.order_)
        throw ConfigError("ToeplitzOperator: shape mismatch");
}

ToeplitzOperator& ToeplitzOperator::operator+=(const ToeplitzOperator& other) {
    require_same_shape(other);
    data_ += other.data_;
    return *this;
}

ToeplitzOperator& ToeplitzOperator::operator-=(const ToeplitzOperator& other) {
    require_same_shape(other);
    data_ -= other.data_;
    return *this;
}

ToeplitzOperator& ToeplitzOperator::operator*=(cplx s) {
    data_ *= s;
    return *this;
}

ToeplitzOperator operator+(ToeplitzOperator a, const ToeplitzOperator& b) { return a += b; }
ToeplitzOperator operator-(ToeplitzOperator a, const ToeplitzOperator& b) { return a -= b; }
ToeplitzOperator operator*(cplx s, ToeplitzOperator a) { return a *= s; }

ToeplitzOperator toeplitz(const PhasorVector& X, int h_out) {
    ToeplitzOperator T(X.channels(), 1, h_out);
    for (int c = 0; c < X.channels(); ++c)
        for (int p = -h_out; p <= h_out; ++p)
            for (int q = -h_out; q <= h_out; ++q) T.at(c, 0, p, q) = X.at(c, p - q);
    return T;
}

ToeplitzOperator n_operator(int channels, int order, double omega) {
    ToeplitzOperator N(channels, channels, order);
    for (int c = 0; c < channels; ++c)
        for (int k = -order; k <= order; ++k) N.at(c, c, k, k) = cplx(0.0, omega * k);
    return N;
}

ToeplitzOperator phase_shift(double alpha, int order) {
    ToeplitzOperator S(1, 1, order);
    for (int k = -order; k <= order; ++k) S.at(0, 0, k, k) = std::polar(1.0, k * alpha);
    return S;
}

PhasorVector phase_shifted(const PhasorVector& X, double alpha) {
    PhasorVector out = X;
    for (int k = -X.order(); k <= X.order(); ++k) {
        const cplx s = std::polar(1.0, k * alpha);
        for (int c = 0; c < X.channels(); ++c) out(c, k) *= s;
    }
    return out;
}

ToeplitzOperator truncated_product(const ToeplitzOperator& A, const ToeplitzOperator& B) {
    if (A.order() != B.order()) throw ConfigError("truncated_product: orders differ");
    if (A.block_cols() != B.block_rows()) throw ConfigError("truncated_product: block dimensions incompatible");
    return ToeplitzOperator(A.block_rows(), B.block_cols(), A.order(), A.data() * B.data());
}

}  // namespace hctl
