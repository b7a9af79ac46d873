#ifndef WIDOMK_POTENTIAL_HPP
#define WIDOMK_POTENTIAL_HPP

#include "cantor.hpp"

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace widomk {

inline constexpr unsigned complex_bits = 256;

/// Green functions are reported at this depth at most, independent of S_max:
/// green_level never needs explicit endpoints.
inline constexpr unsigned green_depth_limit = 16;

class DegenerateGap : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct GreenBracket {
    Real x0;
    unsigned s = 0;
    Real lo, hi;
    Real tau_used;
    Real eps_cap;

    Real width() const { return hi - lo; }
};

struct HarnackBracket {
    enum class Method { exact_one_slit, chain_and_comparison };
    Real x0;
    Real lo, hi;
    Method method = Method::exact_one_slit;
    Real waypoint_h;  // chain only: height of the best waypoint

    Real exponent_lo() const { return 1 / hi; }
    Real exponent_hi() const { return 1 / lo; }
};

inline const char* method_name(HarnackBracket::Method m)
{
    return m == HarnackBracket::Method::exact_one_slit ? "exactOneSlit" : "chainAndComparison";
}

/// arccosh|F| for |F| >= 1 given as a log-domain value; 0 inside [-1, 1].
/// arccosh(x) = ln x + ln(1 + sqrt(1 - x^-2)), with 1 - x^-2 = -expm1(-2 ln x).
inline Real green_ref(const LogScalar& z)
{
    PrecisionScope scope(z.precision());
    if (z.is_zero() || z.logmag() <= 0)
        return Real(0);
    const Real& l = z.logmag();
    return l + log1p(sqrt(-expm1(-2 * l)));
}

/// g_{[-1,1]}(z) = ln|z + sqrt(z^2 - 1)| for real |z| >= 1.
inline Real green_ref(const Real& z)
{
    return green_ref(LogScalar::from_real(z, std::max(bits_of(z), complex_bits)));
}

/// g_{E_s}(x0) = 2^-s arccosh|F_s(x0)|, rounded to the model's scalar precision.
inline Real green_level(const CantorModel& model, unsigned s, const Real& x0)
{
    const LogScalar f = model.eval_F(s, x0);
    PrecisionScope scope(f.precision());
    const Real g = green_ref(f) / pow2(static_cast<long>(s));
    return with_bits(g, model.scalar_bits());
}

/// Rectangular complex arithmetic, just enough for the Joukowski map.
struct Complex {
    Real re, im;
};

inline Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
inline Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
inline Complex operator*(const Complex& a, const Complex& b)
{
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline Real modulus(const Complex& z)
{
    return hypot(z.re, z.im);
}

/// Principal square root.
inline Complex csqrt(const Complex& z)
{
    const Real r = modulus(z);
    if (r == 0)
        return {Real(0), Real(0)};
    Real re = sqrt((r + z.re) / 2);
    Real im = sqrt((r - z.re) / 2);
    if (z.im < 0 || (z.im == 0 && z.re < 0 && signbit(z.im)))
        im = -im;
    return {re, im};
}

/// (1 + u)/(1 - u): Harnack distance in the unit disk between 0 and a point
/// of modulus u.
inline Real disk_distance(const Real& u)
{
    if (u >= 1)
        return std::numeric_limits<Real>::infinity();
    return (1 + u) / (1 - u);
}

/// Modulus of zeta = y + sqrt(y^2 - 1) on the branch |zeta| >= 1.
inline Real joukowski_modulus(const Complex& y)
{
    const Complex w = csqrt(y * y - Complex{Real(1), Real(0)});
    return std::max(modulus(y + w), modulus(y - w));
}

/// Harnack distance between v and infinity in the sphere minus [a, b].
inline Real harnack_one_slit_complex(const Complex& v, const Real& a, const Real& b)
{
    PrecisionScope scope(complex_bits);
    const Real width = b - a;
    const Complex y{(2 * v.re - a - b) / width, 2 * v.im / width};
    return disk_distance(1 / joukowski_modulus(y));
}

/// Exact Harnack distance between real x0 and infinity in the sphere minus
/// [a, b].
inline Real harnack_one_slit(const Real& x0, const Real& a, const Real& b)
{
    if (!(a < b))
        throw std::invalid_argument("harnack_one_slit: empty interval");
    if (x0 >= a && x0 <= b)
        throw std::domain_error("harnack_one_slit: x0 lies on the slit");
    PrecisionScope scope(complex_bits);
    const Real y = abs((2 * x0 - a - b) / (b - a));
    const Real zeta = y + sqrt((y - 1) * (y + 1));
    return disk_distance(1 / zeta);
}

/// Harnack distance in the disk |z - x0| < rho between x0 and a point at
/// distance h from the centre.
inline Real harnack_disk(const Real& h, const Real& rho)
{
    return disk_distance(h / rho);
}

/// Bracket for tau over Omega_{x0} = sphere minus ([0, alpha] u [beta, 1]).
/// lo from the two one-slit comparison domains that contain Omega; hi from
/// the chain x0 -> x0 + ih -> infinity, through the disk about x0 and then
/// the sphere minus [0, 1].
inline HarnackBracket harnack_bracket(const Real& x0, const Real& alpha, const Real& beta, unsigned min_levels = 8)
{
    PrecisionScope scope(complex_bits);
    if (!(alpha < x0 && x0 < beta))
        throw std::invalid_argument("harnack_bracket: x0 outside the gap");
    if (beta - alpha < pow2(16 - static_cast<long>(complex_bits)))
        throw DegenerateGap("harnack_bracket: gap narrower than the precision floor");

    HarnackBracket out;
    out.x0 = x0;
    out.method = HarnackBracket::Method::chain_and_comparison;
    out.lo = std::max(harnack_one_slit(x0, Real(0), alpha), harnack_one_slit(x0, beta, Real(1)));

    const Real rho = std::min(x0 - alpha, beta - x0);
    Real best = std::numeric_limits<Real>::infinity();
    const unsigned max_levels = complex_bits - 32;
    for (unsigned k = 1; k <= max_levels; ++k) {
        if (k > min_levels && isfinite(best))
            break;
        const Real h = (beta - alpha) / pow2(static_cast<long>(k));
        if (h >= rho)
            continue;
        const Real t = harnack_disk(h, rho) * harnack_one_slit_complex({x0, h}, Real(0), Real(1));
        if (t < best) {
            best = t;
            out.waypoint_h = h;
        }
    }
    if (!isfinite(best))
        throw DegenerateGap("harnack_bracket: no admissible waypoint");
    // one ulp-scale nudge outward keeps hi an upper bound after rounding
    out.hi = best * (1 + pow2(32 - static_cast<long>(complex_bits)));
    return out;
}

/// Harnack data for x0 outside K(gamma): exact on unbounded gaps, a bracket
/// on bounded ones.
inline HarnackBracket harnack_for(const GapLocation& gap, const Real& x0)
{
    if (gap.is_bounded())
        return harnack_bracket(x0, gap.alpha, gap.beta);
    HarnackBracket out;
    out.x0 = x0;
    out.method = HarnackBracket::Method::exact_one_slit;
    out.lo = harnack_one_slit(x0, Real(0), Real(1));
    out.hi = out.lo;
    return out;
}

/// Bracket of g_K(x0) from level-s data:
/// g_{E_s} <= g_K <= g_{E_s} + tau (ln Cap E_s - ln Cap K + eps_cap).
inline GreenBracket green_bracket_at(const CantorModel& model, unsigned s, const Real& x0, const Real& tau_hi)
{
    PrecisionScope scope(model.scalar_bits());
    const CapacityEstimate& cap = model.capacity();
    if (!isfinite(cap.eps))
        throw CertificateError("green bracket: capacity of K(gamma) has no certified tail");
    GreenBracket out;
    out.x0 = x0;
    out.s = s;
    out.tau_used = tau_hi;
    out.eps_cap = cap.eps;
    out.lo = green_level(model, s, x0);
    const Real excess = model.log_cap_level(s).logmag() - cap.log_cap + cap.eps;
    out.hi = out.lo + tau_hi * std::max(excess, Real(0));
    return out;
}

/// Refines s until hi - lo <= eps. Bounded gaps start at their level s0.
inline GreenBracket green_K(const CantorModel& model, const Real& x0, const Real& eps,
                            unsigned s_limit = green_depth_limit)
{
    if (!(eps > 0))
        throw std::invalid_argument("green_K: eps must be positive");
    const GapLocation gap = model.locate_gap(x0, std::min(s_limit, model.s_max()));
    const HarnackBracket tau = harnack_for(gap, x0);
    unsigned s = gap.is_bounded() ? gap.s0 : 0;
    for (;; ++s) {
        GreenBracket b = green_bracket_at(model, s, x0, tau.hi);
        if (b.width() <= eps)
            return b;
        if (s >= s_limit)
            throw DepthExhausted("green_K: eps = " + to_decimal(eps, 6) + " not reached by level " +
                                 std::to_string(s_limit));
    }
}

}  // namespace widomk

#endif  // WIDOMK_POTENTIAL_HPP
