#include "hctl/periodic_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "hctl/error.hpp"

namespace hctl {

PeriodicMatrix::PeriodicMatrix(int rows, int cols, int order, double omega)
    : rows_(rows), cols_(cols), order_(order), omega_(omega),
      coeffs_(2 * order + 1, Eigen::MatrixXcd::Zero(rows, cols)) {
    if (rows < 0 || cols < 0 || order < 0) throw ConfigError("PeriodicMatrix: negative dimension");
    if (!(omega > 0.0)) throw ConfigError("PeriodicMatrix: omega must be positive");
}

PeriodicMatrix PeriodicMatrix::constant(const Eigen::MatrixXd& value, double omega) {
    PeriodicMatrix P(static_cast<int>(value.rows()), static_cast<int>(value.cols()), 0, omega);
    P.coeffs_[0] = value.cast<cplx>();
    return P;
}

PeriodicMatrix PeriodicMatrix::from_coefficients(std::vector<Eigen::MatrixXcd> coeffs, double omega) {
    if (coeffs.empty() || coeffs.size() % 2 == 0)
        throw ConfigError("PeriodicMatrix: coefficient list must have odd length 2h+1");
    PeriodicMatrix P(static_cast<int>(coeffs[0].rows()), static_cast<int>(coeffs[0].cols()),
                     static_cast<int>(coeffs.size() / 2), omega);
    for (const auto& c : coeffs)
        if (c.rows() != P.rows_ || c.cols() != P.cols_) throw ConfigError("PeriodicMatrix: ragged coefficients");
    P.coeffs_ = std::move(coeffs);
    return P;
}

Eigen::MatrixXcd PeriodicMatrix::coeff(int k) const {
    if (k < -order_ || k > order_) return Eigen::MatrixXcd::Zero(rows_, cols_);
    return coeffs_[k + order_];
}

Eigen::MatrixXd PeriodicMatrix::evaluate(double theta, int band) const {
    const int       h   = band < 0 ? order_ : std::min(band, order_);
    Eigen::MatrixXd out = coeffs_[order_].real();
    for (int k = 1; k <= h; ++k) {
        const auto& Pk = coeffs_[order_ + k];
        out += 2.0 * Pk.real() * std::cos(k * theta) - 2.0 * Pk.imag() * std::sin(k * theta);
    }
    return out;
}

Eigen::MatrixXcd PeriodicMatrix::evaluate_complex(double theta, int band) const {
    const int        h   = band < 0 ? order_ : std::min(band, order_);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rows_, cols_);
    for (int k = -h; k <= h; ++k) out += coeffs_[order_ + k] * std::polar(1.0, k * theta);
    return out;
}

double PeriodicMatrix::max_coeff_norm() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, c.norm());
    return m;
}

int PeriodicMatrix::effective_band(double tol) const {
    const double ref = max_coeff_norm();
    for (int k = order_; k > 0; --k)
        if (coeffs_[order_ + k].norm() > tol * ref || coeffs_[order_ - k].norm() > tol * ref) return k;
    return 0;
}

bool PeriodicMatrix::is_real_valued(double tol) const {
    const double ref = std::max(1.0, max_coeff_norm());
    for (int k = 0; k <= order_; ++k)
        if ((coeffs_[order_ - k] - coeffs_[order_ + k].conjugate()).norm() > tol * ref) return false;
    return true;
}

PeriodicMatrix PeriodicMatrix::with_order(int order) const {
    PeriodicMatrix out(rows_, cols_, order, omega_);
    const int      common = std::min(order, order_);
    for (int k = -common; k <= common; ++k) out.coeffs_[order + k] = coeffs_[order_ + k];
    return out;
}

PeriodicMatrix PeriodicMatrix::transpose() const {
    PeriodicMatrix out(cols_, rows_, order_, omega_);
    for (int i = 0; i < static_cast<int>(coeffs_.size()); ++i) out.coeffs_[i] = coeffs_[i].transpose();
    return out;
}

PeriodicMatrix PeriodicMatrix::derivative() const {
    PeriodicMatrix out = *this;
    for (int k = -order_; k <= order_; ++k) out.coeffs_[order_ + k] *= cplx(0.0, omega_ * k);
    return out;
}

void PeriodicMatrix::enforce_real() {
    for (int k = 0; k <= order_; ++k) {
        Eigen::MatrixXcd avg       = 0.5 * (coeffs_[order_ + k] + coeffs_[order_ - k].conjugate());
        coeffs_[order_ + k]        = avg;
        coeffs_[order_ - k]        = avg.conjugate();
    }
    coeffs_[order_] = coeffs_[order_].real().cast<cplx>();
}

void PeriodicMatrix::enforce_symmetric() {
    if (rows_ != cols_) throw ConfigError("PeriodicMatrix::enforce_symmetric: matrix is not square");
    for (auto& c : coeffs_) c = (0.5 * (c + c.transpose())).eval();
}

PeriodicMatrix& PeriodicMatrix::operator+=(const PeriodicMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw ConfigError("PeriodicMatrix: shape mismatch in sum");
    if (other.order_ > order_) *this = with_order(other.order_);
    for (int k = -other.order_; k <= other.order_; ++k) coeffs_[order_ + k] += other.coeffs_[other.order_ + k];
    return *this;
}

PeriodicMatrix& PeriodicMatrix::operator-=(const PeriodicMatrix& other) {
    PeriodicMatrix neg = other;
    neg *= -1.0;
    return *this += neg;
}

PeriodicMatrix& PeriodicMatrix::operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

PeriodicMatrix operator+(PeriodicMatrix a, const PeriodicMatrix& b) { return a += b; }
PeriodicMatrix operator-(PeriodicMatrix a, const PeriodicMatrix& b) { return a -= b; }
PeriodicMatrix operator*(double s, PeriodicMatrix a) { return a *= s; }

PeriodicMatrix operator*(const PeriodicMatrix& a, const PeriodicMatrix& b) {
    if (a.cols() != b.rows()) throw ConfigError("PeriodicMatrix: shape mismatch in product");
    PeriodicMatrix out(a.rows(), b.cols(), a.order() + b.order(), a.omega());
    for (int i = -a.order(); i <= a.order(); ++i)
        for (int j = -b.order(); j <= b.order(); ++j)
            out.coeff_ref(i + j) += a.coeff_ref(i) * b.coeff_ref(j);
    return out;
}

ToeplitzOperator toeplitz(const PeriodicMatrix& A, int h_out) {
    ToeplitzOperator T(A.rows(), A.cols(), h_out);
    const int        w    = T.width();
    const int        band = std::min(A.order(), 2 * h_out);
    for (int d = -band; d <= band; ++d) {
        const Eigen::MatrixXcd& Ad = A.coeff_ref(d);
        for (int p = -h_out; p <= h_out; ++p) {
            const int q = p - d;
            if (q < -h_out || q > h_out) continue;
            for (int i = 0; i < A.rows(); ++i)
                for (int j = 0; j < A.cols(); ++j) T.data()(i * w + p + h_out, j * w + q + h_out) = Ad(i, j);
        }
    }
    return T;
}

PeriodicMatrix symbol_of(const ToeplitzOperator& T, double omega) {
    const int      h = T.order();
    PeriodicMatrix P(T.block_rows(), T.block_cols(), 2 * h, omega);
    for (int k = -2 * h; k <= 2 * h; ++k) {
        // entry (p, q) with p - q = k, taken from the first column or first row
        const int p = k >= 0 ? k - h : -h;
        const int q = p - k;
        for (int i = 0; i < T.block_rows(); ++i)
            for (int j = 0; j < T.block_cols(); ++j) P.coeff_ref(k)(i, j) = T.at(i, j, p, q);
    }
    return P;
}

}  // namespace hctl
