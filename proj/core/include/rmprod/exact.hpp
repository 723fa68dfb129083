#pragma once

#include <gmpxx.h>

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rmprod/matrix.hpp"

namespace rmprod {

/// k x k matrix of arbitrary-precision integers. Products never round.
class ExactMatrix {
public:
    ExactMatrix() : ExactMatrix(1) {}
    explicit ExactMatrix(int k);
    ExactMatrix(int k, std::vector<mpz_class> row_major);
    ExactMatrix(int k, std::initializer_list<long> row_major);

    static ExactMatrix identity(int k);

    int dim() const noexcept { return k_; }
    const mpz_class& operator()(int r, int c) const { return a_[r * k_ + c]; }
    mpz_class& operator()(int r, int c) { return a_[r * k_ + c]; }
    const std::vector<mpz_class>& entries() const noexcept { return a_; }

    bool is_zero() const;
    mpz_class trace() const;

    friend bool operator==(const ExactMatrix& a, const ExactMatrix& b);
    friend bool operator<(const ExactMatrix& a, const ExactMatrix& b);

private:
    int k_;
    std::vector<mpz_class> a_;
};

/// k x k matrix of exact rationals; used where scaling by non-integers
/// must stay exact.
class RationalMatrix {
public:
    explicit RationalMatrix(int k);
    explicit RationalMatrix(const ExactMatrix& m);

    int dim() const noexcept { return k_; }
    const mpq_class& operator()(int r, int c) const { return a_[r * k_ + c]; }
    mpq_class& operator()(int r, int c) { return a_[r * k_ + c]; }

    RationalMatrix scaled(const mpq_class& c) const;

private:
    int k_;
    std::vector<mpq_class> a_;
};

ExactMatrix multiply(const ExactMatrix& a, const ExactMatrix& b);

/// Exact product of a nonempty sequence of equally sized matrices.
ExactMatrix exact_product(std::span<const ExactMatrix> factors);

/// All 2x2 minors exactly zero.
bool rank_le_one(const ExactMatrix& m);

/// Converts a matrix whose entries are all integers (|x| < 2^53) to exact
/// form. Throws DomainError on a non-integral entry.
ExactMatrix to_exact(const SquareMatrix& m);

/// Integer matrix equal to 2^s * m for the smallest s >= 0 that clears
/// every fractional bit. Every finite double matrix has one; for integral
/// input s = 0 and the result equals to_exact(m). Positive scaling keeps
/// eigenvalue realness, so exact verdicts on this form hold for m.
ExactMatrix to_exact_dyadic(const SquareMatrix& m);

/// True when every entry is an integer representable exactly in a double.
bool is_integral(const SquareMatrix& m) noexcept;

/// Normalized float view of an exact matrix. Works for entries far
/// outside double range (exponents are carried in log_scale).
ScaledMatrix to_scaled(const ExactMatrix& m);

/// Parses "p/q", an integer, or a finite decimal ("0.25", "-1.5e-3") into
/// an exact rational. Throws DomainError on malformed input.
mpq_class parse_rational(std::string_view text);

/// "p/q" in lowest terms, or "p" when the denominator is 1.
std::string to_string(const mpq_class& q);

} // namespace rmprod
