#include "rmprod/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmprod/error.hpp"

namespace rmprod {

namespace {

void check_dim(int k) {
    if (k < 1 || k > kMaxDim)
        throw DimensionError("matrix dimension " + std::to_string(k) +
                             " outside [1, " + std::to_string(kMaxDim) + "]");
}

} // namespace

SquareMatrix::SquareMatrix(int k) : k_(k) { check_dim(k); }

SquareMatrix::SquareMatrix(int k, std::span<const double> row_major) : k_(k) {
    check_dim(k);
    if (row_major.size() != static_cast<std::size_t>(k * k))
        throw DimensionError("expected " + std::to_string(k * k) + " entries, got " +
                             std::to_string(row_major.size()));
    std::copy(row_major.begin(), row_major.end(), a_.begin());
    if (!all_finite())
        throw NumericalError("matrix entries must be finite");
}

SquareMatrix::SquareMatrix(int k, std::initializer_list<double> row_major)
    : SquareMatrix(k, std::span<const double>(row_major.begin(), row_major.size())) {}

SquareMatrix SquareMatrix::identity(int k) {
    SquareMatrix m(k);
    for (int i = 0; i < k; ++i) m(i, i) = 1.0;
    return m;
}

double SquareMatrix::frobenius_norm() const noexcept {
    // Scaled accumulation avoids overflow/underflow for extreme entries.
    const double s = max_abs();
    if (s == 0.0) return 0.0;
    double acc = 0.0;
    for (double x : entries()) {
        const double y = x / s;
        acc += y * y;
    }
    return s * std::sqrt(acc);
}

double SquareMatrix::max_abs() const noexcept {
    double s = 0.0;
    for (double x : entries()) s = std::max(s, std::abs(x));
    return s;
}

double SquareMatrix::trace() const noexcept {
    double t = 0.0;
    for (int i = 0; i < k_; ++i) t += (*this)(i, i);
    return t;
}

bool SquareMatrix::is_zero() const noexcept {
    return std::all_of(entries().begin(), entries().end(), [](double x) { return x == 0.0; });
}

bool SquareMatrix::all_finite() const noexcept {
    return std::all_of(entries().begin(), entries().end(),
                       [](double x) { return std::isfinite(x); });
}

SquareMatrix SquareMatrix::scaled(double c) const {
    SquareMatrix out(k_);
    for (int i = 0; i < k_ * k_; ++i) out.a_[i] = c * a_[i];
    if (!out.all_finite()) throw NumericalError("scaled matrix is not finite");
    return out;
}

SquareMatrix SquareMatrix::row_swapped(int r1, int r2) const {
    SquareMatrix out = *this;
    for (int c = 0; c < k_; ++c) std::swap(out(r1, c), out(r2, c));
    return out;
}

bool operator==(const SquareMatrix& a, const SquareMatrix& b) noexcept {
    return a.k_ == b.k_ && std::equal(a.entries().begin(), a.entries().end(), b.entries().begin());
}

SquareMatrix ScaledMatrix::reconstruct() const {
    if (is_zero) return SquareMatrix(matrix.dim());
    const double s = std::exp(log_scale);
    SquareMatrix out(matrix.dim());
    for (int r = 0; r < matrix.dim(); ++r)
        for (int c = 0; c < matrix.dim(); ++c) out(r, c) = s * matrix(r, c);
    return out;
}

SquareMatrix multiply(const SquareMatrix& a, const SquareMatrix& b) {
    const int k = a.dim();
    if (b.dim() != k)
        throw DimensionError("multiply: dimension mismatch " + std::to_string(k) + " vs " +
                             std::to_string(b.dim()));
    SquareMatrix out(k);
    for (int i = 0; i < k; ++i) {
        for (int l = 0; l < k; ++l) {
            const double ail = a(i, l);
            for (int j = 0; j < k; ++j) out(i, j) += ail * b(l, j);
        }
    }
    return out;
}

namespace {

void normalize_into(ScaledMatrix& acc, const SquareMatrix& m, double extra_log) {
    const double norm = m.frobenius_norm();
    if (norm == 0.0) {
        acc.matrix = SquareMatrix(m.dim());
        acc.log_scale = 0.0;
        acc.is_zero = true;
        return;
    }
    acc.matrix = m.scaled(1.0 / norm);
    acc.log_scale = extra_log + std::log(norm);
    acc.is_zero = false;
}

} // namespace

ScaledMatrix to_scaled(const SquareMatrix& m) {
    ScaledMatrix out;
    normalize_into(out, m, 0.0);
    return out;
}

RescaledProduct::RescaledProduct(int k) : k_(k) {
    check_dim(k);
    acc_.matrix = SquareMatrix(k);
}

namespace {

std::uint64_t zero_mask(const SquareMatrix& m) {
    std::uint64_t mask = 0;
    const int k = m.dim();
    for (int i = 0; i < k * k; ++i)
        if (m.entries()[i] == 0.0) mask |= std::uint64_t{1} << i;
    return mask;
}

std::uint64_t product_zero_mask(std::uint64_t lhs, std::uint64_t rhs, int k) {
    std::uint64_t mask = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            bool structural = true;
            for (int l = 0; l < k && structural; ++l)
                structural = ((lhs >> (i * k + l)) & 1U) || ((rhs >> (l * k + j)) & 1U);
            if (structural) mask |= std::uint64_t{1} << (i * k + j);
        }
    return mask;
}

} // namespace

void RescaledProduct::append(const SquareMatrix& factor) {
    if (factor.dim() != k_)
        throw DimensionError("product: factor dimension " + std::to_string(factor.dim()) +
                             " in a product of dimension " + std::to_string(k_));
    if (!factor.all_finite()) throw NumericalError("NaN or inf in product factor");
    ++count_;
    if (count_ == 1) {
        normalize_into(acc_, factor, 0.0);
        structural_zero_ = zero_mask(factor);
        return;
    }
    if (acc_.is_zero) return;

    const double fnorm = factor.frobenius_norm();
    if (fnorm == 0.0) {
        normalize_into(acc_, factor, 0.0);
        structural_zero_ = zero_mask(factor);
        return;
    }
    SquareMatrix next = multiply(acc_.matrix, factor);
    if (!next.all_finite()) throw NumericalError("NaN or inf in running product");
    structural_zero_ = product_zero_mask(structural_zero_, zero_mask(factor), k_);
    const double nnorm = next.frobenius_norm();
    const std::uint64_t full = k_ == 8 ? ~std::uint64_t{0} : (std::uint64_t{1} << (k_ * k_)) - 1;
    if (nnorm == 0.0 && structural_zero_ != full) {
        // Cancelled to zero in floating point; the true product may not be.
        acc_.min_step_ratio = 0.0;
    } else if (nnorm != 0.0) {
        acc_.min_step_ratio = std::min(acc_.min_step_ratio, nnorm / fnorm);
    }
    normalize_into(acc_, next, acc_.log_scale);
}

ScaledMatrix product_rescaled(std::span<const SquareMatrix> factors) {
    if (factors.empty()) throw DimensionError("product_rescaled: empty factor sequence");
    RescaledProduct prod(factors.front().dim());
    for (const auto& f : factors) {
        prod.append(f);
        if (prod.result().is_zero) {
            // Validate dimensions of what we skip so errors do not depend
            // on where the zero appeared.
            for (const auto& g : factors)
                if (g.dim() != factors.front().dim())
                    throw DimensionError("product_rescaled: dimension mismatch");
            break;
        }
    }
    return prod.result();
}

bool rank_le_one(const SquareMatrix& m, double tol) {
    if (!(tol > 0.0)) throw DomainError("rank_le_one: tolerance must be positive");
    const int k = m.dim();
    const double s = m.max_abs();
    const double bound = tol * s * s;
    for (int r1 = 0; r1 < k; ++r1)
        for (int r2 = r1 + 1; r2 < k; ++r2)
            for (int c1 = 0; c1 < k; ++c1)
                for (int c2 = c1 + 1; c2 < k; ++c2) {
                    const double minor = m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1);
                    if (std::abs(minor) > bound) return false;
                }
    return true;
}

} // namespace rmprod
