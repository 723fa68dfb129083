#pragma once

#include <gmpxx.h>

#include <string_view>
#include <vector>

#include "rmprod/exact.hpp"
#include "rmprod/matrix.hpp"

namespace rmprod {

/// Verdict on whether every eigenvalue of a matrix is real.
enum class SpectrumClass { AllReal, HasComplexPair, Indeterminate };

std::string_view to_string(SpectrumClass c) noexcept;

/// Relative width of the floating-point Indeterminate band.
inline constexpr double kDefaultTau = 1e-9;

/// Products whose formation lost more than this factor of magnitude to
/// cancellation in a single step are not trusted by the float classifier.
inline constexpr double kCancellationGuard = 1e-6;

/// Monic characteristic polynomial det(xI - M). coeffs[i] multiplies x^i,
/// coeffs.back() == 1.
template <class T>
struct CharPoly {
    std::vector<T> coeffs;

    int degree() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
};

using FloatCharPoly = CharPoly<double>;
using ExactCharPoly = CharPoly<mpq_class>;

FloatCharPoly char_poly(const SquareMatrix& m);
ExactCharPoly char_poly(const ExactMatrix& m);
ExactCharPoly char_poly(const RationalMatrix& m);

/// (a+d)^2 - 4(ad - bc): nonnegative iff [[a,b],[c,d]] has real eigenvalues.
template <class T>
T discriminant_2x2(const T& a, const T& b, const T& c, const T& d) {
    T tr = a + d;
    T det = a * d - b * c;
    return T(tr * tr - 4 * det);
}

/// Dense polynomial over Q, coefficients ascending. Empty means zero.
using RationalPoly = std::vector<mpq_class>;

/// p / gcd(p, p'): same distinct roots as p, all simple.
RationalPoly square_free_part(const RationalPoly& p);

/// Sturm sequence of a square-free polynomial: p, p', then negated
/// remainders (each rescaled by a positive constant) down to a constant.
struct SturmChain {
    std::vector<RationalPoly> polys;
};

SturmChain sturm_chain(const RationalPoly& square_free);

/// Distinct real roots of p. Throws DomainError for the zero polynomial.
int sturm_real_root_count(const RationalPoly& p);
int sturm_real_root_count(const ExactCharPoly& p);

/// Every root of p (counted with multiplicity) is real.
bool all_roots_real_exact(const ExactCharPoly& p);

/// Hessenberg reduction followed by shifted QR iteration to real
/// quasi-triangular form; each deflated 2x2 block is judged by the sign of
/// its discriminant against the band +-tau * s^2, s the block's largest
/// entry. A zero product is AllReal. Non-convergence or a product built
/// through severe cancellation yields Indeterminate.
SpectrumClass classify_spectrum_float(const ScaledMatrix& m, double tau = kDefaultTau);
SpectrumClass classify_spectrum_float(const SquareMatrix& m, double tau = kDefaultTau);

/// Exact verdict through the characteristic polynomial. Never Indeterminate.
SpectrumClass classify_spectrum_exact(const ExactMatrix& m);
SpectrumClass classify_spectrum_exact(const RationalMatrix& m);

struct ClassifyPolicy {
    enum class Mode { FloatOnly, ExactOnly, FloatWithExactFallback };

    Mode mode = Mode::FloatWithExactFallback;
    double tau = kDefaultTau;

    static ClassifyPolicy float_only(double tau = kDefaultTau) { return {Mode::FloatOnly, tau}; }
    static ClassifyPolicy exact_only() { return {Mode::ExactOnly, kDefaultTau}; }
    static ClassifyPolicy with_fallback(double tau = kDefaultTau) {
        return {Mode::FloatWithExactFallback, tau};
    }

    friend bool operator==(const ClassifyPolicy&, const ClassifyPolicy&) = default;
};

std::string_view to_string(ClassifyPolicy::Mode m) noexcept;

/// Float input: ExactOnly throws DomainError; the fallback policy has no
/// exact representation to fall back on and may return Indeterminate.
SpectrumClass classify_spectrum(const ScaledMatrix& m, const ClassifyPolicy& policy);
SpectrumClass classify_spectrum(const ExactMatrix& m, const ClassifyPolicy& policy);
SpectrumClass classify_spectrum(const RationalMatrix& m, const ClassifyPolicy& policy);

} // namespace rmprod
