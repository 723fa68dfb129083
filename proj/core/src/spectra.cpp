#include "rmprod/spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "rmprod/error.hpp"

namespace rmprod {

std::string_view to_string(SpectrumClass c) noexcept {
    switch (c) {
    case SpectrumClass::AllReal: return "AllReal";
    case SpectrumClass::HasComplexPair: return "HasComplexPair";
    case SpectrumClass::Indeterminate: return "Indeterminate";
    }
    return "?";
}

std::string_view to_string(ClassifyPolicy::Mode m) noexcept {
    switch (m) {
    case ClassifyPolicy::Mode::FloatOnly: return "float";
    case ClassifyPolicy::Mode::ExactOnly: return "exact";
    case ClassifyPolicy::Mode::FloatWithExactFallback: return "fallback";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Characteristic polynomial: Faddeev-LeVerrier trace recursion
//   M_0 = 0, c_k = 1
//   M_m = A M_{m-1} + c_{k-m+1} I,   c_{k-m} = -tr(A M_m) / m
// The division by m is exact for integer matrices.

namespace {

template <class T>
using Dense = std::vector<T>;

template <class T, class Get>
std::vector<T> faddeev_leverrier(int k, Get entry, auto divide) {
    Dense<T> a(static_cast<std::size_t>(k * k));
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) a[r * k + c] = entry(r, c);

    std::vector<T> coeffs(static_cast<std::size_t>(k + 1), T(0));
    coeffs[k] = T(1);
    Dense<T> m(a.size(), T(0));
    Dense<T> am(a.size(), T(0));
    for (int step = 1; step <= k; ++step) {
        // m <- a * m + c_{k-step+1} I
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                T acc(0);
                for (int l = 0; l < k; ++l) acc += a[i * k + l] * m[l * k + j];
                am[i * k + j] = acc;
            }
        m = am;
        for (int i = 0; i < k; ++i) m[i * k + i] += coeffs[k - step + 1];
        // tr(a * m)
        T tr(0);
        for (int i = 0; i < k; ++i)
            for (int l = 0; l < k; ++l) tr += a[i * k + l] * m[l * k + i];
        coeffs[k - step] = divide(T(-tr), step);
    }
    return coeffs;
}

} // namespace

FloatCharPoly char_poly(const SquareMatrix& m) {
    return {faddeev_leverrier<double>(
        m.dim(), [&](int r, int c) { return m(r, c); },
        [](double x, int s) { return x / s; })};
}

ExactCharPoly char_poly(const ExactMatrix& m) {
    auto ints = faddeev_leverrier<mpz_class>(
        m.dim(), [&](int r, int c) { return m(r, c); },
        [](const mpz_class& x, int s) {
            mpz_class q;
            mpz_divexact_ui(q.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(s));
            return q;
        });
    ExactCharPoly out;
    out.coeffs.reserve(ints.size());
    for (auto& z : ints) out.coeffs.emplace_back(z);
    return out;
}

ExactCharPoly char_poly(const RationalMatrix& m) {
    return {faddeev_leverrier<mpq_class>(
        m.dim(), [&](int r, int c) { return m(r, c); },
        [](const mpq_class& x, int s) { return mpq_class(x / s); })};
}

// ---------------------------------------------------------------------------
// Exact polynomial arithmetic over Q

namespace {

void trim(RationalPoly& p) {
    while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

int degree(const RationalPoly& p) { return static_cast<int>(p.size()) - 1; }

RationalPoly derivative(const RationalPoly& p) {
    RationalPoly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.emplace_back(p[i] * static_cast<long>(i));
    trim(d);
    return d;
}

// a = q*b + r with deg r < deg b. b nonzero.
void divmod(const RationalPoly& a, const RationalPoly& b, RationalPoly& q, RationalPoly& r) {
    r = a;
    trim(r);
    q.assign(r.size() >= b.size() ? r.size() - b.size() + 1 : 0, mpq_class(0));
    const mpq_class& lead = b.back();
    while (!r.empty() && r.size() >= b.size()) {
        const std::size_t shift = r.size() - b.size();
        mpq_class f = r.back() / lead;
        q[shift] = f;
        for (std::size_t i = 0; i < b.size(); ++i) r[shift + i] -= f * b[i];
        r.pop_back(); // leading term cancels exactly
        trim(r);
    }
}

void make_monic(RationalPoly& p) {
    if (p.empty()) return;
    const mpq_class lead = p.back();
    for (auto& c : p) c /= lead;
}

// Divide by |leading coefficient|: keeps signs, shrinks numbers.
void normalize_positive(RationalPoly& p) {
    if (p.empty()) return;
    const mpq_class lead = abs(p.back());
    for (auto& c : p) c /= lead;
}

RationalPoly poly_gcd(RationalPoly a, RationalPoly b) {
    trim(a);
    trim(b);
    RationalPoly q, r;
    while (!b.empty()) {
        divmod(a, b, q, r);
        a = std::move(b);
        b = std::move(r);
        make_monic(b);
    }
    make_monic(a);
    return a;
}

int sign_at_pos_inf(const RationalPoly& p) { return sgn(p.back()); }

int sign_at_neg_inf(const RationalPoly& p) {
    const int s = sgn(p.back());
    return degree(p) % 2 == 0 ? s : -s;
}

int variations(const std::vector<int>& signs) {
    int v = 0;
    int prev = 0;
    for (int s : signs) {
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++v;
        prev = s;
    }
    return v;
}

} // namespace

RationalPoly square_free_part(const RationalPoly& p_in) {
    RationalPoly p = p_in;
    trim(p);
    if (p.empty()) throw DomainError("square_free_part: zero polynomial");
    RationalPoly d = derivative(p);
    if (d.empty()) return p;
    RationalPoly g = poly_gcd(p, d);
    RationalPoly q, r;
    divmod(p, g, q, r);
    return q;
}

SturmChain sturm_chain(const RationalPoly& square_free) {
    SturmChain chain;
    RationalPoly p0 = square_free;
    trim(p0);
    if (p0.empty()) throw DomainError("sturm_chain: zero polynomial");
    normalize_positive(p0);
    chain.polys.push_back(p0);
    RationalPoly p1 = derivative(p0);
    if (p1.empty()) return chain;
    normalize_positive(p1);
    chain.polys.push_back(p1);
    RationalPoly q, r;
    while (true) {
        const auto& a = chain.polys[chain.polys.size() - 2];
        const auto& b = chain.polys.back();
        divmod(a, b, q, r);
        if (r.empty()) break;
        for (auto& c : r) c = -c;
        normalize_positive(r);
        chain.polys.push_back(r);
    }
    return chain;
}

int sturm_real_root_count(const RationalPoly& p) {
    const RationalPoly q = square_free_part(p);
    if (degree(q) == 0) return 0;
    const SturmChain chain = sturm_chain(q);
    std::vector<int> neg, pos;
    for (const auto& s : chain.polys) {
        neg.push_back(sign_at_neg_inf(s));
        pos.push_back(sign_at_pos_inf(s));
    }
    return variations(neg) - variations(pos);
}

int sturm_real_root_count(const ExactCharPoly& p) { return sturm_real_root_count(p.coeffs); }

bool all_roots_real_exact(const ExactCharPoly& p) {
    const RationalPoly q = square_free_part(p.coeffs);
    return sturm_real_root_count(q) == degree(q);
}

// ---------------------------------------------------------------------------
// Floating-point path

namespace {

using Work = std::array<std::array<double, kMaxDim>, kMaxDim>;

// Orthogonal (Householder) reduction to upper Hessenberg form.
void to_hessenberg(Work& a, int n) {
    std::array<double, kMaxDim> v{};
    for (int c = 0; c + 2 < n; ++c) {
        double norm = 0.0;
        for (int i = c + 1; i < n; ++i) norm = std::hypot(norm, a[i][c]);
        if (norm == 0.0) continue;
        const double alpha = a[c + 1][c] > 0 ? -norm : norm;
        double vv = 0.0;
        for (int i = c + 1; i < n; ++i) {
            v[i] = a[i][c];
            if (i == c + 1) v[i] -= alpha;
            vv += v[i] * v[i];
        }
        if (vv == 0.0) continue;
        const double beta = 2.0 / vv;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = c + 1; i < n; ++i) s += v[i] * a[i][j];
            s *= beta;
            for (int i = c + 1; i < n; ++i) a[i][j] -= s * v[i];
        }
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = c + 1; j < n; ++j) s += a[i][j] * v[j];
            s *= beta;
            for (int j = c + 1; j < n; ++j) a[i][j] -= s * v[j];
        }
        a[c + 1][c] = alpha;
        for (int i = c + 2; i < n; ++i) a[i][c] = 0.0;
    }
}

enum class BlockVerdict { Real, Complex, Unsure };

constexpr double kNoiseFactor = 32.0;

// `noise` is the absolute rounding level of the reduced matrix. A block
// whose entries sit near it (the zero pair of a rank-one matrix, say) has
// eigenvalues that rounding alone decides, so its band widens to cover
// a perturbation of that size: |dD| <= 8 s noise to first order.
BlockVerdict judge_block(double a, double b, double c, double d, double tau, double noise) {
    const double s = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    // (a+d)^2 - 4(ad-bc) rewritten as (a-d)^2 + 4bc to avoid cancellation.
    const double disc = (a - d) * (a - d) + 4.0 * b * c;
    const double band = tau * s * s + 8.0 * s * noise;
    if (disc >= band) return BlockVerdict::Real;
    if (disc < -band) return BlockVerdict::Complex;
    return BlockVerdict::Unsure;
}

// Francis double-shift QR on an upper Hessenberg matrix (eigenvalue-only
// variant). Deflated 2x2 blocks are judged as they split off.
SpectrumClass hessenberg_qr(Work& a, int n, double tau) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const int budget = 40 * n;

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a[i][j]);
    const double noise = kNoiseFactor * n * eps * anorm;

    bool unsure = false;
    int nn = n - 1;
    int its = 0;
    int total = 0;
    double t = 0.0; // accumulated exceptional shift
    while (nn >= 0) {
        int l = nn;
        for (; l >= 1; --l) {
            double s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
            if (s == 0.0) s = anorm;
            if (std::abs(a[l][l - 1]) <= eps * s) {
                a[l][l - 1] = 0.0;
                break;
            }
        }
        double x = a[nn][nn];
        if (l == nn) {
            --nn;
            its = 0;
            continue;
        }
        double y = a[nn - 1][nn - 1];
        double w = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {
            switch (judge_block(y + t, a[nn - 1][nn], a[nn][nn - 1], x + t, tau, noise)) {
            case BlockVerdict::Complex: return SpectrumClass::HasComplexPair;
            case BlockVerdict::Unsure: unsure = true; break;
            case BlockVerdict::Real: break;
            }
            nn -= 2;
            its = 0;
            continue;
        }
        if (total >= budget) return SpectrumClass::Indeterminate;
        if (its == 10 || its == 20) {
            t += x;
            for (int i = 0; i <= nn; ++i) a[i][i] -= x;
            const double s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
            x = y = 0.75 * s;
            w = -0.4375 * s * s;
        }
        ++its;
        ++total;

        int m = nn - 2;
        double p = 0, q = 0, r = 0, z = 0;
        for (; m >= l; --m) {
            z = a[m][m];
            r = x - z;
            double s = y - z;
            p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a[m][m - 1]) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a[m - 1][m - 1]) + std::abs(z) + std::abs(a[m + 1][m + 1]));
            if (u <= eps * v) break;
        }
        for (int i = m + 2; i <= nn; ++i) {
            a[i][i - 2] = 0.0;
            if (i != m + 2) a[i][i - 3] = 0.0;
        }
        for (int kk = m; kk <= nn - 1; ++kk) {
            if (kk != m) {
                p = a[kk][kk - 1];
                q = a[kk + 1][kk - 1];
                r = kk != nn - 1 ? a[kk + 2][kk - 1] : 0.0;
                x = std::abs(p) + std::abs(q) + std::abs(r);
                if (x != 0.0) {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            const double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (kk == m) {
                if (l != m) a[kk][kk - 1] = -a[kk][kk - 1];
            } else {
                a[kk][kk - 1] = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = kk; j <= nn; ++j) {
                p = a[kk][j] + q * a[kk + 1][j];
                if (kk != nn - 1) {
                    p += r * a[kk + 2][j];
                    a[kk + 2][j] -= p * z;
                }
                a[kk + 1][j] -= p * y;
                a[kk][j] -= p * x;
            }
            const int mmin = std::min(nn, kk + 3);
            for (int i = l; i <= mmin; ++i) {
                p = x * a[i][kk] + y * a[i][kk + 1];
                if (kk != nn - 1) {
                    p += z * a[i][kk + 2];
                    a[i][kk + 2] -= p * r;
                }
                a[i][kk + 1] -= p * q;
                a[i][kk] -= p;
            }
        }
    }
    return unsure ? SpectrumClass::Indeterminate : SpectrumClass::AllReal;
}

} // namespace

SpectrumClass classify_spectrum_float(const ScaledMatrix& m, double tau) {
    if (!(tau > 0.0)) throw DomainError("classify_spectrum_float: tau must be positive");
    if (m.min_step_ratio < kCancellationGuard) return SpectrumClass::Indeterminate;
    if (m.is_zero) return SpectrumClass::AllReal;
    const int n = m.matrix.dim();
    if (n == 1) return SpectrumClass::AllReal;
    if (!m.matrix.all_finite()) throw NumericalError("classify_spectrum_float: non-finite matrix");

    Work a{};
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a[r][c] = m.matrix(r, c);
    to_hessenberg(a, n);
    return hessenberg_qr(a, n, tau);
}

SpectrumClass classify_spectrum_float(const SquareMatrix& m, double tau) {
    return classify_spectrum_float(to_scaled(m), tau);
}

SpectrumClass classify_spectrum_exact(const ExactMatrix& m) {
    if (m.dim() == 1 || m.is_zero()) return SpectrumClass::AllReal;
    return all_roots_real_exact(char_poly(m)) ? SpectrumClass::AllReal
                                              : SpectrumClass::HasComplexPair;
}

SpectrumClass classify_spectrum_exact(const RationalMatrix& m) {
    if (m.dim() == 1) return SpectrumClass::AllReal;
    return all_roots_real_exact(char_poly(m)) ? SpectrumClass::AllReal
                                              : SpectrumClass::HasComplexPair;
}

SpectrumClass classify_spectrum(const ScaledMatrix& m, const ClassifyPolicy& policy) {
    if (policy.mode == ClassifyPolicy::Mode::ExactOnly)
        throw DomainError("exact classification requested for a floating-point matrix");
    return classify_spectrum_float(m, policy.tau);
}

SpectrumClass classify_spectrum(const ExactMatrix& m, const ClassifyPolicy& policy) {
    switch (policy.mode) {
    case ClassifyPolicy::Mode::ExactOnly: return classify_spectrum_exact(m);
    case ClassifyPolicy::Mode::FloatOnly: return classify_spectrum_float(to_scaled(m), policy.tau);
    case ClassifyPolicy::Mode::FloatWithExactFallback: {
        const auto v = classify_spectrum_float(to_scaled(m), policy.tau);
        return v == SpectrumClass::Indeterminate ? classify_spectrum_exact(m) : v;
    }
    }
    return SpectrumClass::Indeterminate;
}

namespace {

SquareMatrix to_float(const RationalMatrix& m) {
    SquareMatrix out(m.dim());
    for (int r = 0; r < m.dim(); ++r)
        for (int c = 0; c < m.dim(); ++c) out(r, c) = m(r, c).get_d();
    if (!out.all_finite()) throw NumericalError("rational matrix outside double range");
    return out;
}

} // namespace

SpectrumClass classify_spectrum(const RationalMatrix& m, const ClassifyPolicy& policy) {
    switch (policy.mode) {
    case ClassifyPolicy::Mode::ExactOnly: return classify_spectrum_exact(m);
    case ClassifyPolicy::Mode::FloatOnly: return classify_spectrum_float(to_float(m), policy.tau);
    case ClassifyPolicy::Mode::FloatWithExactFallback: {
        const auto v = classify_spectrum_float(to_float(m), policy.tau);
        return v == SpectrumClass::Indeterminate ? classify_spectrum_exact(m) : v;
    }
    }
    return SpectrumClass::Indeterminate;
}

} // namespace rmprod
