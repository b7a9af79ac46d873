#ifndef WIDOMK_ORACLE_HPP
#define WIDOMK_ORACLE_HPP

#include "cantor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace widomk {

class SingularMoments : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadMeasure {
    enum class Kind { arcsine, pullback };
    Kind kind = Kind::arcsine;
    unsigned s = 0;  // pullback level
    unsigned m = 0;  // Chebyshev nodes per branch
    unsigned bits = 0;
    std::vector<Real> nodes;  // sorted
    std::vector<Real> weights;

    std::size_t size() const { return nodes.size(); }

    std::string provenance() const
    {
        if (kind == Kind::arcsine)
            return "arcsine(m=" + std::to_string(m) + ")";
        return "pullback(s=" + std::to_string(s) + ",m=" + std::to_string(m) + ")";
    }
};

/// cos((2k - 1) pi / (2m)), k = 1..m.
inline std::vector<Real> chebyshev_nodes(unsigned m)
{
    std::vector<Real> t;
    t.reserve(m);
    const Real p = pi();
    for (unsigned k = 1; k <= m; ++k)
        t.push_back(cos(Real(2 * k - 1) * p / (2 * m)));
    return t;
}

/// Gauss-Chebyshev discretization of the equilibrium measure of [a, b].
inline QuadMeasure arcsine_measure(const Real& a, const Real& b, unsigned m, unsigned bits = 512)
{
    if (m < 1)
        throw std::invalid_argument("arcsine_measure: m must be >= 1");
    if (!(a < b))
        throw std::invalid_argument("arcsine_measure: empty interval");
    PrecisionScope scope(bits);
    QuadMeasure mu;
    mu.kind = QuadMeasure::Kind::arcsine;
    mu.m = m;
    mu.bits = bits;
    const Real mid = (with_bits(a, bits) + with_bits(b, bits)) / 2;
    const Real half = (with_bits(b, bits) - with_bits(a, bits)) / 2;
    for (const Real& t : chebyshev_nodes(m))
        mu.nodes.push_back(mid + half * t);
    std::sort(mu.nodes.begin(), mu.nodes.end());
    mu.weights.assign(m, Real(1) / m);
    return mu;
}

/// Equilibrium measure of E_s as the pullback of the arcsine measure under
/// F_s: every branch of F_s^{-1}(t) at each Chebyshev node t, weight 1/(m 2^s).
inline QuadMeasure pullback_quadrature(const CantorModel& model, unsigned s, unsigned m, unsigned bits = 512)
{
    if (m < 1)
        throw std::invalid_argument("pullback_quadrature: m must be >= 1");
    if (s == 0) {
        QuadMeasure mu = arcsine_measure(Real(0), Real(1), m, bits);
        mu.kind = QuadMeasure::Kind::pullback;
        return mu;
    }
    const unsigned work = std::max(bits, model.policy().bits(s));
    PrecisionScope scope(work);
    const Real r = model.r_table(s, work).back();
    QuadMeasure mu;
    mu.kind = QuadMeasure::Kind::pullback;
    mu.s = s;
    mu.m = m;
    mu.bits = work;
    for (const Real& t : chebyshev_nodes(m)) {
        const Real y = (t - 1) * r / 2;
        for (const Real& x : model.preimages(s, y, work))
            mu.nodes.push_back(model.polish(s, x, y, work));
    }
    std::sort(mu.nodes.begin(), mu.nodes.end());
    const Real w = Real(1) / (Real(m) * pow2(static_cast<long>(s)));
    mu.weights.assign(mu.nodes.size(), w);
    return mu;
}

/// p(x) = scale^n q((x - center) / scale), q(y) = y^n + sum_k coeffs[k] y^k.
struct MonicPoly {
    Real center = 0, scale = 1;
    std::vector<Real> coeffs;  // degree n = coeffs.size()

    std::size_t degree() const { return coeffs.size(); }

    Real operator()(const Real& x) const
    {
        const Real y = (x - center) / scale;
        Real q = 1;
        for (std::size_t k = coeffs.size(); k-- > 0;)
            q = q * y + coeffs[k];
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            q *= scale;
        return q;
    }
};

/// ||p||_{L^2(mu)}.
inline LogScalar discrete_norm(const QuadMeasure& mu, const MonicPoly& p)
{
    PrecisionScope scope(mu.bits);
    Real sum = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const Real v = p(mu.nodes[i]);
        sum += mu.weights[i] * v * v;
    }
    if (sum == 0)
        return LogScalar::zero(mu.bits);
    return LogScalar::from_log(1, log(sum) / 2, mu.bits);
}

struct GramResult {
    std::size_t n = 0;
    LogScalar monic_norm;
    MonicPoly minimizer;
    double log2_condition = 0;  // log2(mu_0 / smallest Cholesky pivot), scaled variable
};

/// Monic L^2 minimizer from the Hankel moment matrix in the variable
/// y = (x - c)/h centred on the node hull; ||Q_n||^2 is the last Cholesky pivot.
inline GramResult monic_norm(const QuadMeasure& mu, std::size_t n)
{
    if (n >= mu.size())
        throw SingularMoments("monic_norm: degree " + std::to_string(n) + " needs more than " +
                              std::to_string(mu.size()) + " nodes");
    PrecisionScope scope(mu.bits);
    GramResult out;
    out.n = n;
    out.minimizer.center = (mu.nodes.front() + mu.nodes.back()) / 2;
    out.minimizer.scale = (mu.nodes.back() - mu.nodes.front()) / 2;
    if (out.minimizer.scale == 0)
        out.minimizer.scale = 1;
    const Real& c = out.minimizer.center;
    const Real& h = out.minimizer.scale;

    std::vector<Real> moment(2 * n + 1, Real(0));
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const Real y = (mu.nodes[i] - c) / h;
        Real power = mu.weights[i];
        for (std::size_t k = 0; k <= 2 * n; ++k) {
            moment[k] += power;
            power *= y;
        }
    }

    // Cholesky of H = [moment[i + j]], 0 <= i, j <= n.
    const std::size_t dim = n + 1;
    std::vector<Real> L(dim * dim, Real(0));
    Real smallest = moment[0];
    for (std::size_t j = 0; j < dim; ++j) {
        Real d = moment[2 * j];
        for (std::size_t k = 0; k < j; ++k)
            d -= L[j * dim + k] * L[j * dim + k];
        if (!(d > 0))
            throw SingularMoments("monic_norm: moment matrix not positive definite at order " + std::to_string(j));
        smallest = std::min(smallest, d);
        L[j * dim + j] = sqrt(d);
        for (std::size_t i = j + 1; i < dim; ++i) {
            Real v = moment[i + j];
            for (std::size_t k = 0; k < j; ++k)
                v -= L[i * dim + k] * L[j * dim + k];
            L[i * dim + j] = v / L[j * dim + j];
        }
    }
    out.log2_condition = static_cast<double>(log2(moment[0] / smallest));

    // Minimizer coefficients: solve H_{<n} a = -b with b_k = moment[k + n],
    // reusing the leading block of L.
    std::vector<Real> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        Real v = -moment[i + n];
        for (std::size_t k = 0; k < i; ++k)
            v -= L[i * dim + k] * z[k];
        z[i] = v / L[i * dim + i];
    }
    out.minimizer.coeffs.assign(n, Real(0));
    for (std::size_t i = n; i-- > 0;) {
        Real v = z[i];
        for (std::size_t k = i + 1; k < n; ++k)
            v -= L[k * dim + i] * out.minimizer.coeffs[k];
        out.minimizer.coeffs[i] = v / L[i * dim + i];
    }

    const Real pivot = L[n * dim + n];
    out.monic_norm = LogScalar::from_log(1, log(pivot) + Real(n) * log(h), mu.bits);
    return out;
}

/// ln W_{2,n} = ln ||Q_n|| - n ln Cap, with the caller's ln Cap of the support.
inline LogScalar widom_l2_oracle(const QuadMeasure& mu, std::size_t n, const Real& log_cap_ref)
{
    const GramResult g = monic_norm(mu, n);
    PrecisionScope scope(mu.bits);
    return LogScalar::from_log(1, g.monic_norm.logmag() - Real(n) * with_bits(log_cap_ref, mu.bits), mu.bits);
}

}  // namespace widomk

#endif  // WIDOMK_ORACLE_HPP
