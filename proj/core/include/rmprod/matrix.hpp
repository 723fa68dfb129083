#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace rmprod {

/// Largest supported matrix dimension. Storage is fixed-size so small
/// kernels stay inlined and allocation free.
inline constexpr int kMaxDim = 8;

/// Relative tolerance used by the floating-point rank-at-most-one test.
inline constexpr double kDefaultRankTol = 1e-10;

/// Dense k x k real matrix, row-major, 1 <= k <= kMaxDim.
class SquareMatrix {
public:
    /// 1x1 zero matrix.
    SquareMatrix() = default;
    /// k x k zero matrix.
    explicit SquareMatrix(int k);
    SquareMatrix(int k, std::span<const double> row_major);
    SquareMatrix(int k, std::initializer_list<double> row_major);

    static SquareMatrix identity(int k);

    int dim() const noexcept { return k_; }

    double operator()(int r, int c) const noexcept { return a_[r * k_ + c]; }
    double& operator()(int r, int c) noexcept { return a_[r * k_ + c]; }

    std::span<const double> entries() const noexcept {
        return {a_.data(), static_cast<std::size_t>(k_ * k_)};
    }

    double frobenius_norm() const noexcept;
    double max_abs() const noexcept;
    double trace() const noexcept;
    bool is_zero() const noexcept;
    bool all_finite() const noexcept;

    SquareMatrix scaled(double c) const;
    /// Swap rows r1 and r2.
    SquareMatrix row_swapped(int r1, int r2) const;

    friend bool operator==(const SquareMatrix& a, const SquareMatrix& b) noexcept;

private:
    int k_ = 1;
    std::array<double, kMaxDim * kMaxDim> a_{};
};

/// A long product stored as exp(log_scale) * matrix with matrix of unit
/// Frobenius norm, so arbitrarily long products never overflow.
struct ScaledMatrix {
    SquareMatrix matrix;
    double log_scale = 0.0;
    bool is_zero = false;
    /// Smallest ||R F|| / (||R|| ||F||) seen across the multiplications
    /// that formed the product. Values near zero mean heavy cancellation:
    /// the stored direction carries few correct digits.
    double min_step_ratio = 1.0;

    /// exp(log_scale) * matrix. Overflows to inf for large log_scale;
    /// intended for short products and tests.
    SquareMatrix reconstruct() const;
};

SquareMatrix multiply(const SquareMatrix& a, const SquareMatrix& b);

/// Normalizes a single matrix to a ScaledMatrix (zero stays zero).
ScaledMatrix to_scaled(const SquareMatrix& m);

/// Left-to-right running product with Frobenius rescaling after every step.
class RescaledProduct {
public:
    explicit RescaledProduct(int k);

    /// running <- running * factor, then renormalize.
    void append(const SquareMatrix& factor);

    bool empty() const noexcept { return count_ == 0; }
    std::size_t count() const noexcept { return count_; }
    const ScaledMatrix& result() const noexcept { return acc_; }

private:
    int k_;
    std::size_t count_ = 0;
    ScaledMatrix acc_;
    // Bit r*k+c set when entry (r,c) of the running product is zero for
    // structural reasons (every term has an exactly-zero factor), which
    // rounding cannot fake.
    std::uint64_t structural_zero_ = 0;
};

/// Product of a nonempty sequence of equally sized matrices, rescaled at
/// every step. Once the running product is exactly zero the remaining
/// factors are skipped.
ScaledMatrix product_rescaled(std::span<const SquareMatrix> factors);

/// True iff every 2x2 minor has |minor| <= tol * max|entry|^2.
bool rank_le_one(const SquareMatrix& m, double tol = kDefaultRankTol);

} // namespace rmprod
