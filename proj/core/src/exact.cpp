#include "rmprod/exact.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>

#include "rmprod/error.hpp"

namespace rmprod {

namespace {

void check_dim(int k) {
    if (k < 1 || k > kMaxDim)
        throw DimensionError("matrix dimension " + std::to_string(k) + " outside [1, " +
                             std::to_string(kMaxDim) + "]");
}

} // namespace

ExactMatrix::ExactMatrix(int k) : k_(k) {
    check_dim(k);
    a_.assign(static_cast<std::size_t>(k * k), mpz_class(0));
}

ExactMatrix::ExactMatrix(int k, std::vector<mpz_class> row_major) : k_(k), a_(std::move(row_major)) {
    check_dim(k);
    if (a_.size() != static_cast<std::size_t>(k * k))
        throw DimensionError("expected " + std::to_string(k * k) + " entries, got " +
                             std::to_string(a_.size()));
}

ExactMatrix::ExactMatrix(int k, std::initializer_list<long> row_major) : k_(k) {
    check_dim(k);
    if (row_major.size() != static_cast<std::size_t>(k * k))
        throw DimensionError("expected " + std::to_string(k * k) + " entries, got " +
                             std::to_string(row_major.size()));
    a_.reserve(row_major.size());
    for (long v : row_major) a_.emplace_back(v);
}

ExactMatrix ExactMatrix::identity(int k) {
    ExactMatrix m(k);
    for (int i = 0; i < k; ++i) m(i, i) = 1;
    return m;
}

bool ExactMatrix::is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](const mpz_class& x) { return sgn(x) == 0; });
}

mpz_class ExactMatrix::trace() const {
    mpz_class t = 0;
    for (int i = 0; i < k_; ++i) t += (*this)(i, i);
    return t;
}

bool operator==(const ExactMatrix& a, const ExactMatrix& b) {
    return a.k_ == b.k_ && a.a_ == b.a_;
}

bool operator<(const ExactMatrix& a, const ExactMatrix& b) {
    if (a.k_ != b.k_) return a.k_ < b.k_;
    for (std::size_t i = 0; i < a.a_.size(); ++i) {
        const int c = cmp(a.a_[i], b.a_[i]);
        if (c != 0) return c < 0;
    }
    return false;
}

RationalMatrix::RationalMatrix(int k) : k_(k) {
    check_dim(k);
    a_.assign(static_cast<std::size_t>(k * k), mpq_class(0));
}

RationalMatrix::RationalMatrix(const ExactMatrix& m) : k_(m.dim()) {
    a_.reserve(m.entries().size());
    for (const auto& x : m.entries()) a_.emplace_back(x);
}

RationalMatrix RationalMatrix::scaled(const mpq_class& c) const {
    RationalMatrix out(k_);
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] * c;
    return out;
}

ExactMatrix multiply(const ExactMatrix& a, const ExactMatrix& b) {
    const int k = a.dim();
    if (b.dim() != k)
        throw DimensionError("multiply: dimension mismatch " + std::to_string(k) + " vs " +
                             std::to_string(b.dim()));
    ExactMatrix out(k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            mpz_class& acc = out(i, j);
            for (int l = 0; l < k; ++l) mpz_addmul(acc.get_mpz_t(), a(i, l).get_mpz_t(), b(l, j).get_mpz_t());
        }
    return out;
}

ExactMatrix exact_product(std::span<const ExactMatrix> factors) {
    if (factors.empty()) throw DimensionError("exact_product: empty factor sequence");
    ExactMatrix acc = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) acc = multiply(acc, factors[i]);
    return acc;
}

bool rank_le_one(const ExactMatrix& m) {
    const int k = m.dim();
    mpz_class lhs, rhs;
    for (int r1 = 0; r1 < k; ++r1)
        for (int r2 = r1 + 1; r2 < k; ++r2)
            for (int c1 = 0; c1 < k; ++c1)
                for (int c2 = c1 + 1; c2 < k; ++c2) {
                    lhs = m(r1, c1) * m(r2, c2);
                    rhs = m(r1, c2) * m(r2, c1);
                    if (lhs != rhs) return false;
                }
    return true;
}

bool is_integral(const SquareMatrix& m) noexcept {
    constexpr double kLimit = 9007199254740992.0; // 2^53
    return std::all_of(m.entries().begin(), m.entries().end(),
                       [](double x) { return std::trunc(x) == x && std::abs(x) <= kLimit; });
}

ExactMatrix to_exact(const SquareMatrix& m) {
    if (!is_integral(m)) throw DomainError("to_exact: matrix has non-integral entries");
    std::vector<mpz_class> v;
    v.reserve(m.entries().size());
    for (double x : m.entries()) v.emplace_back(x);
    return ExactMatrix(m.dim(), std::move(v));
}

ExactMatrix to_exact_dyadic(const SquareMatrix& m) {
    if (!m.all_finite()) throw NumericalError("to_exact_dyadic: non-finite entry");
    const std::size_t cells = m.entries().size();
    std::vector<std::int64_t> odd(cells, 0);
    std::vector<long> expo(cells, 0);
    long shift = 0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double x = m.entries()[i];
        if (x == 0.0) continue;
        int e = 0;
        const double frac = std::frexp(x, &e);
        // x = odd * 2^(e - 53 + tz) with odd an integer below 2^53.
        auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
        const int tz = std::countr_zero(static_cast<std::uint64_t>(mant < 0 ? -mant : mant));
        odd[i] = mant / (std::int64_t{1} << tz);
        expo[i] = static_cast<long>(e) - 53 + tz;
        shift = std::max(shift, -expo[i]);
    }
    std::vector<mpz_class> v(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        if (odd[i] == 0) continue;
        v[i] = mpz_class(static_cast<long>(odd[i]));
        mpz_mul_2exp(v[i].get_mpz_t(), v[i].get_mpz_t(), static_cast<mp_bitcnt_t>(expo[i] + shift));
    }
    return ExactMatrix(m.dim(), std::move(v));
}

ScaledMatrix to_scaled(const ExactMatrix& m) {
    const int k = m.dim();
    if (m.is_zero()) {
        ScaledMatrix z;
        z.matrix = SquareMatrix(k);
        z.is_zero = true;
        return z;
    }
    std::vector<double> mant(m.entries().size());
    std::vector<long> expo(m.entries().size());
    long emax = std::numeric_limits<long>::min();
    for (std::size_t i = 0; i < mant.size(); ++i) {
        mant[i] = mpz_get_d_2exp(&expo[i], m.entries()[i].get_mpz_t());
        if (mant[i] != 0.0) emax = std::max(emax, expo[i]);
    }
    SquareMatrix shifted(k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
            const std::size_t i = static_cast<std::size_t>(r * k + c);
            shifted(r, c) = mant[i] == 0.0 ? 0.0 : std::ldexp(mant[i], static_cast<int>(expo[i] - emax));
        }
    ScaledMatrix out = to_scaled(shifted);
    out.log_scale += static_cast<double>(emax) * std::log(2.0);
    return out;
}

mpq_class parse_rational(std::string_view text) {
    auto fail = [&]() -> mpq_class {
        throw DomainError("cannot parse rational from \"" + std::string(text) + "\"");
    };
    std::string s(text);
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
            s.end());
    if (s.empty()) return fail();

    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const std::string num = s.substr(0, slash);
        const std::string den = s.substr(slash + 1);
        auto is_int = [](const std::string& t, bool allow_sign) {
            std::size_t i = 0;
            if (allow_sign && !t.empty() && (t[0] == '-' || t[0] == '+')) i = 1;
            if (i >= t.size()) return false;
            return std::all_of(t.begin() + static_cast<long>(i), t.end(),
                               [](unsigned char c) { return std::isdigit(c); });
        };
        if (!is_int(num, true) || !is_int(den, false)) return fail();
        mpz_class n(num[0] == '+' ? num.substr(1) : num, 10);
        mpz_class d(den, 10);
        if (d == 0) throw DomainError("rational with zero denominator: \"" + std::string(text) + "\"");
        mpq_class q(n, d);
        q.canonicalize();
        return q;
    }

    // Decimal: [sign] digits [. digits] [e [sign] digits]
    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
    std::string digits;
    long frac_len = 0;
    bool seen_point = false;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits += c;
            if (seen_point) ++frac_len;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (digits.empty()) return fail();
    long exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') return fail();
        ++i;
        const std::string e = s.substr(i);
        if (e.empty()) return fail();
        std::size_t j = (e[0] == '+' || e[0] == '-') ? 1 : 0;
        if (j >= e.size() || e.size() > 8) return fail();
        for (std::size_t t = j; t < e.size(); ++t)
            if (!std::isdigit(static_cast<unsigned char>(e[t]))) return fail();
        exponent = std::stol(e);
    }
    mpz_class n(digits, 10);
    if (negative) n = -n;
    const long shift = exponent - frac_len;
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    mpq_class q = shift >= 0 ? mpq_class(n * p10) : mpq_class(n, p10);
    q.canonicalize();
    return q;
}

std::string to_string(const mpq_class& q) {
    mpq_class c(q);
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

} // namespace rmprod
