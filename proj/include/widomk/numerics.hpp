#ifndef WIDOMK_NUMERICS_HPP
#define WIDOMK_NUMERICS_HPP

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace widomk {

/// Arbitrary-precision real. Expression templates are off so that `auto`
/// always yields a value.
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

/// Thrown when precision escalation hits the configured ceiling.
class PrecisionExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline unsigned digits10_for_bits(unsigned bits)
{
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

/// Mantissa bits actually carried by `x`.
inline unsigned bits_of(const Real& x)
{
    return static_cast<unsigned>(mpfr_get_prec(x.backend().data()));
}

/// Sets the thread-local default precision for newly created Reals and
/// restores the previous one on scope exit.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned bits) : saved_(Real::default_precision())
    {
        Real::default_precision(digits10_for_bits(bits));
    }
    ~PrecisionScope() { Real::default_precision(saved_); }

    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

/// Copy of `x` rounded (or widened) to `bits`.
inline Real with_bits(const Real& x, unsigned bits)
{
    PrecisionScope scope(bits);
    Real out;
    mpfr_set_prec(out.backend().data(), bits);
    mpfr_set(out.backend().data(), x.backend().data(), MPFR_RNDN);
    return out;
}

inline Real ln2()
{
    return log(Real(2));
}

inline Real euler_e()
{
    return exp(Real(1));
}

inline Real pi()
{
    return acos(Real(-1));
}

inline Real neg_infinity()
{
    return -std::numeric_limits<Real>::infinity();
}

/// 2^k as a Real (exact).
inline Real pow2(long k)
{
    Real out(1);
    mpfr_mul_2si(out.backend().data(), out.backend().data(), k, MPFR_RNDN);
    return out;
}

/// Working-precision schedule. Level s of the Cantor construction needs
/// Theta(2^s) bits because interval endpoints separate at scale r_s.
struct PrecisionPolicy {
    unsigned base_bits = 256;
    std::uint64_t slope_num = 4;  // slope_bits_per_node = slope_num / slope_den
    std::uint64_t slope_den = 1;
    unsigned max_escalations = 2;
    unsigned ceiling_bits = 1u << 22;

    unsigned bits(unsigned s) const
    {
        if (s >= 40)
            throw PrecisionExhausted("precision policy: level " + std::to_string(s) + " out of range");
        const std::uint64_t nodes = std::uint64_t{1} << s;
        const std::uint64_t extra = (slope_num * nodes + slope_den - 1) / slope_den;
        const std::uint64_t total = base_bits + extra;
        if (total > ceiling_bits)
            throw PrecisionExhausted("precision policy: bits(" + std::to_string(s) + ") = " +
                                     std::to_string(total) + " exceeds ceiling");
        return static_cast<unsigned>(total);
    }

    void validate() const
    {
        if (base_bits < 64)
            throw std::invalid_argument("precision policy: base_bits must be >= 64");
        if (slope_den == 0)
            throw std::invalid_argument("precision policy: slope denominator is zero");
    }
};

class LogScalar;
struct SumResult;

LogScalar ls_mul(const LogScalar& a, const LogScalar& b);
SumResult ls_add(const LogScalar& a, const LogScalar& b);

/// Signed real in log domain: value = sign * exp(logmag). Zero has sign 0 and
/// logmag = -inf. Immutable once built.
class LogScalar {
public:
    LogScalar() : logmag_(neg_infinity()) {}

    static LogScalar zero(unsigned bits = 64)
    {
        LogScalar z;
        z.bits_ = bits;
        return z;
    }

    static LogScalar from_real(const Real& x, unsigned bits)
    {
        PrecisionScope scope(bits);
        LogScalar out;
        out.bits_ = bits;
        if (x == 0)
            return out;
        out.sign_ = x > 0 ? 1 : -1;
        out.logmag_ = log(boost::multiprecision::abs(with_bits(x, std::max(bits, bits_of(x)))));
        return out;
    }

    static LogScalar from_real(const Real& x) { return from_real(x, bits_of(x)); }

    static LogScalar from_log(int sign, const Real& logmag, unsigned bits)
    {
        LogScalar out;
        out.bits_ = bits;
        if (sign == 0 || (isinf(logmag) && logmag < 0))
            return out;
        if (sign != 1 && sign != -1)
            throw std::invalid_argument("LogScalar: sign must be -1, 0 or +1");
        out.sign_ = sign;
        out.logmag_ = with_bits(logmag, bits);
        return out;
    }

    static LogScalar from_log(int sign, const Real& logmag) { return from_log(sign, logmag, bits_of(logmag)); }

    int sign() const noexcept { return sign_; }
    bool is_zero() const noexcept { return sign_ == 0; }
    const Real& logmag() const noexcept { return logmag_; }
    unsigned precision() const noexcept { return bits_; }

    Real to_real() const
    {
        PrecisionScope scope(bits_);
        if (sign_ == 0)
            return Real(0);
        Real m = exp(logmag_);
        return sign_ > 0 ? m : Real(-m);
    }

    double to_double() const
    {
        if (sign_ == 0)
            return 0.0;
        const double l = static_cast<double>(logmag_);
        return sign_ * std::exp(l);
    }

    LogScalar operator-() const
    {
        LogScalar out = *this;
        out.sign_ = -sign_;
        return out;
    }

    LogScalar abs() const
    {
        LogScalar out = *this;
        out.sign_ = sign_ == 0 ? 0 : 1;
        return out;
    }

    LogScalar with_precision(unsigned bits) const { return from_log(sign_, logmag_, bits); }

private:
    int sign_ = 0;
    Real logmag_;
    unsigned bits_ = 64;
};

/// Result of a log-domain sum. `cancellation` is raised when the result lost
/// more than half the working bits relative to the larger operand.
struct SumResult {
    LogScalar value;
    bool cancellation = false;
};

inline LogScalar ls_mul(const LogScalar& a, const LogScalar& b)
{
    const unsigned bits = std::max(a.precision(), b.precision());
    if (a.is_zero() || b.is_zero())
        return LogScalar::zero(bits);
    PrecisionScope scope(bits);
    return LogScalar::from_log(a.sign() * b.sign(), a.logmag() + b.logmag(), bits);
}

inline LogScalar ls_div(const LogScalar& a, const LogScalar& b)
{
    if (b.is_zero())
        throw std::domain_error("LogScalar: division by zero");
    const unsigned bits = std::max(a.precision(), b.precision());
    if (a.is_zero())
        return LogScalar::zero(bits);
    PrecisionScope scope(bits);
    return LogScalar::from_log(a.sign() * b.sign(), a.logmag() - b.logmag(), bits);
}

inline SumResult ls_add(const LogScalar& a, const LogScalar& b)
{
    const unsigned bits = std::max(a.precision(), b.precision());
    if (a.is_zero())
        return {b.with_precision(bits), false};
    if (b.is_zero())
        return {a.with_precision(bits), false};

    PrecisionScope scope(bits);
    const bool a_big = a.logmag() >= b.logmag();
    const LogScalar& big = a_big ? a : b;
    const LogScalar& small = a_big ? b : a;
    const Real d = small.logmag() - big.logmag();  // <= 0
    const Real negligible = -Real(bits + 4) * ln2();

    if (d < negligible)
        return {big.with_precision(bits), false};

    if (big.sign() == small.sign())
        return {LogScalar::from_log(big.sign(), big.logmag() + log1p(exp(d)), bits), false};

    if (d == 0)
        return {LogScalar::zero(bits), false};

    const Real shift = log1p(-exp(d));
    const bool cancelled = shift < -Real(bits / 2) * ln2();
    return {LogScalar::from_log(big.sign(), big.logmag() + shift, bits), cancelled};
}

inline SumResult ls_sub(const LogScalar& a, const LogScalar& b)
{
    return ls_add(a, -b);
}

inline std::strong_ordering ls_cmp(const LogScalar& a, const LogScalar& b)
{
    if (a.sign() != b.sign())
        return a.sign() <=> b.sign();
    if (a.sign() == 0)
        return std::strong_ordering::equal;
    const int mag = a.logmag() < b.logmag() ? -1 : (a.logmag() > b.logmag() ? 1 : 0);
    const int signed_mag = a.sign() > 0 ? mag : -mag;
    return signed_mag <=> 0;
}

/// a^e for a > 0.
inline LogScalar ls_pow(const LogScalar& a, const Real& exponent)
{
    if (a.sign() <= 0)
        throw std::domain_error("ls_pow: base must be positive");
    PrecisionScope scope(a.precision());
    return LogScalar::from_log(1, a.logmag() * exponent, a.precision());
}

inline LogScalar operator*(const LogScalar& a, const LogScalar& b) { return ls_mul(a, b); }
inline LogScalar operator/(const LogScalar& a, const LogScalar& b) { return ls_div(a, b); }
inline LogScalar operator+(const LogScalar& a, const LogScalar& b) { return ls_add(a, b).value; }
inline LogScalar operator-(const LogScalar& a, const LogScalar& b) { return ls_sub(a, b).value; }
inline std::strong_ordering operator<=>(const LogScalar& a, const LogScalar& b) { return ls_cmp(a, b); }
inline bool operator==(const LogScalar& a, const LogScalar& b) { return ls_cmp(a, b) == 0; }

/// Decimal string with enough digits to round-trip `bits` of mantissa.
inline std::string to_decimal(const Real& x, unsigned digits = 0)
{
    if (digits == 0)
        digits = digits10_for_bits(bits_of(x)) + 1;
    return x.str(static_cast<std::streamsize>(digits), std::ios_base::scientific);
}

/// Exact hexadecimal float rendering (MPFR %Ra).
inline std::string to_hexfloat(const Real& x)
{
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%Ra", x.backend().data());
    std::string out(buf ? buf : "");
    mpfr_free_str(buf);
    return out;
}

}  // namespace widomk

#endif  // WIDOMK_NUMERICS_HPP
