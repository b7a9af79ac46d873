#ifndef WIDOMK_SEQUENCES_HPP
#define WIDOMK_SEQUENCES_HPP

#include "numerics.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace widomk {

/// Working precision for the sequence layer (alpha, t, u).
inline constexpr unsigned sequence_bits = 128;

struct ConstantFamily {
    Real c;
};

/// c_n = a * n^p
struct PowerFamily {
    Real a;
    Real p;
};

/// c_n = a + b ln n
struct LogarithmicFamily {
    Real a;
    Real b;
};

struct TableFamily {
    enum class Extension { none, repeat_last };
    std::vector<Real> values;
    Extension extension = Extension::none;
};

/// c_n = max(e, base_n * (1 + amplitude * xi_n)) with xi_n a deterministic
/// uniform draw in [-1, 1] keyed on (seed, n).
struct PerturbedFamily {
    std::variant<PowerFamily, LogarithmicFamily> base;
    Real amplitude;
    std::uint64_t seed = 0;
};

using SequenceSpec = std::variant<ConstantFamily, PowerFamily, LogarithmicFamily, TableFamily, PerturbedFamily>;

class SequenceExhausted : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class HorizonExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Real unit_draw(std::uint64_t seed, std::uint64_t n)
{
    const std::uint64_t h = splitmix64(seed ^ splitmix64(n));
    // 53 random bits mapped to [-1, 1]
    const double u = static_cast<double>(h >> 11) / static_cast<double>(std::uint64_t{1} << 53);
    return Real(2.0 * u - 1.0);
}

inline std::uint64_t index_of(const Real& n)
{
    if (n < 1 || n > Real(static_cast<double>(std::uint64_t{1} << 62)))
        throw SequenceExhausted("sequence index out of addressable range");
    return static_cast<std::uint64_t>(n);
}

inline Real ln_base(const std::variant<PowerFamily, LogarithmicFamily>& base, const Real& ln_n)
{
    if (const auto* pw = std::get_if<PowerFamily>(&base))
        return log(pw->a) + pw->p * ln_n;
    const auto& lg = std::get<LogarithmicFamily>(base);
    return log(lg.a + lg.b * ln_n);
}

}  // namespace detail

/// ln c_n, with n given as a Real so that indices such as 2^100 are usable
/// for the closed-form families.
inline Real ln_value(const SequenceSpec& spec, const Real& n)
{
    if (n < 1)
        throw std::invalid_argument("sequence index must be >= 1");
    return std::visit(
        [&](const auto& fam) -> Real {
            using F = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<F, ConstantFamily>) {
                return log(fam.c);
            } else if constexpr (std::is_same_v<F, PowerFamily>) {
                return log(fam.a) + fam.p * log(n);
            } else if constexpr (std::is_same_v<F, LogarithmicFamily>) {
                return log(fam.a + fam.b * log(n));
            } else if constexpr (std::is_same_v<F, TableFamily>) {
                const std::uint64_t k = detail::index_of(n);
                if (k <= fam.values.size())
                    return log(fam.values[k - 1]);
                if (fam.extension == TableFamily::Extension::repeat_last && !fam.values.empty())
                    return log(fam.values.back());
                throw SequenceExhausted("table sequence exhausted at n = " + std::to_string(k));
            } else {
                const std::uint64_t k = detail::index_of(n);
                const Real base = detail::ln_base(fam.base, log(n)) +
                                  log1p(fam.amplitude * detail::unit_draw(fam.seed, k));
                return std::max(base, Real(1));
            }
        },
        spec);
}

inline Real ln_value(const SequenceSpec& spec, std::uint64_t n)
{
    return ln_value(spec, Real(n));
}

namespace detail {

/// ln n for n <= 2^16 at sequence precision, shared by every regularization.
inline const Real& ln_index(std::uint64_t n)
{
    static const std::vector<Real> table = [] {
        PrecisionScope scope(sequence_bits);
        std::vector<Real> t(std::size_t{1} << 16);
        for (std::size_t k = 0; k < t.size(); ++k)
            t[k] = log(Real(k + 1));
        return t;
    }();
    return table[n - 1];
}

/// ln c_n for consecutive integer n with the per-family constants (ln a)
/// computed once; same values as ln_value.
class LnTerms {
public:
    explicit LnTerms(const SequenceSpec& spec) : spec_(spec)
    {
        if (const auto* p = std::get_if<PowerFamily>(&spec)) {
            ln_a_ = log(p->a);
            power_ = true;
        } else if (const auto* pf = std::get_if<PerturbedFamily>(&spec)) {
            if (const auto* pw = std::get_if<PowerFamily>(&pf->base)) {
                ln_a_ = log(pw->a);
                power_ = true;
            }
        }
    }

    Real operator()(std::uint64_t n) const
    {
        if (n > (std::uint64_t{1} << 16) || std::holds_alternative<TableFamily>(spec_) ||
            std::holds_alternative<ConstantFamily>(spec_))
            return ln_value(spec_, n);
        const Real& ln_n = ln_index(n);
        if (const auto* p = std::get_if<PowerFamily>(&spec_))
            return ln_a_ + p->p * ln_n;
        if (const auto* l = std::get_if<LogarithmicFamily>(&spec_))
            return log(l->a + l->b * ln_n);
        if (const auto* pf = std::get_if<PerturbedFamily>(&spec_)) {
            const Real base = power_ ? ln_a_ + std::get<PowerFamily>(pf->base).p * ln_n : ln_base(pf->base, ln_n);
            return std::max(base + log1p(pf->amplitude * unit_draw(pf->seed, n)), Real(1));
        }
        return ln_value(spec_, n);
    }

private:
    const SequenceSpec& spec_;
    Real ln_a_;
    bool power_ = false;
};

}  // namespace detail

/// c_n at the current working precision.
inline Real evaluate(const SequenceSpec& spec, std::uint64_t n)
{
    if (n < 1)
        throw std::invalid_argument("sequence index must be >= 1");
    if (const auto* c = std::get_if<ConstantFamily>(&spec))
        return c->c;
    if (const auto* t = std::get_if<TableFamily>(&spec)) {
        if (n <= t->values.size())
            return t->values[n - 1];
        if (t->extension == TableFamily::Extension::repeat_last && !t->values.empty())
            return t->values.back();
        throw SequenceExhausted("table sequence exhausted at n = " + std::to_string(n));
    }
    if (const auto* p = std::get_if<PowerFamily>(&spec))
        return p->a * pow(Real(n), p->p);
    if (const auto* l = std::get_if<LogarithmicFamily>(&spec))
        return l->a + l->b * log(Real(n));
    return exp(ln_value(spec, n));
}

/// True when the family is defined for every n (no finite table cut-off).
inline bool unbounded_domain(const SequenceSpec& spec)
{
    if (const auto* t = std::get_if<TableFamily>(&spec))
        return t->extension != TableFamily::Extension::none;
    return true;
}

/// Closed-form families whose parameters make them regular for every n:
/// c_n >= e, nondecreasing, (ln c_n)/n nonincreasing.
inline bool analytically_regular(const SequenceSpec& spec)
{
    const Real e = euler_e();
    if (const auto* c = std::get_if<ConstantFamily>(&spec))
        return c->c >= e;
    if (const auto* p = std::get_if<PowerFamily>(&spec))
        // d/dn (ln a + p ln n)/n has the sign of p - ln a - p ln n
        return p->a >= e && p->p >= 0 && p->p <= log(p->a);
    if (const auto* l = std::get_if<LogarithmicFamily>(&spec))
        // sign of b/(a + b ln n) - ln(a + b ln n); nonpositive once b <= a and a >= e
        return l->a >= e && l->b >= 0 && l->b <= l->a;
    return false;
}

/// Monotone upper envelope for c_k: ln env(k) >= ln c_k for all k, together
/// with the index from which ln env(k)/k is nonincreasing. Empty when no
/// analytic envelope is known.
struct Envelope {
    Real ln_env_at_from;  // ln env(from)
    std::uint64_t from;
};

inline std::optional<Envelope> envelope_from(const SequenceSpec& spec, std::uint64_t horizon)
{
    const Real e = euler_e();
    auto power_env = [&](const Real& a, const Real& p) -> std::optional<Envelope> {
        if (a <= 0 || p < 0)
            return std::nullopt;
        std::uint64_t from = horizon;
        if (p > 0) {
            // nonincreasing once ln k >= 1 - ln a / p, and clipping at e keeps that
            const Real k0 = ceil(exp(Real(1) - log(a) / p));
            if (k0 > Real(static_cast<double>(horizon)))
                from = static_cast<std::uint64_t>(k0);
        }
        const Real ln_env = std::max(log(a) + p * log(Real(from)), Real(1));
        return Envelope{ln_env, from};
    };
    auto log_env = [&](const Real& a, const Real& b) -> std::optional<Envelope> {
        if (a <= 0 || b < 0)
            return std::nullopt;
        std::uint64_t from = horizon;
        if (b > 0) {
            const Real target = std::max(e, b);
            const Real k0 = ceil(exp((target - a) / b));
            if (k0 > Real(static_cast<double>(horizon)))
                from = static_cast<std::uint64_t>(k0);
        }
        const Real ln_env = std::max(log(a + b * log(Real(from))), Real(1));
        return Envelope{ln_env, from};
    };

    if (const auto* c = std::get_if<ConstantFamily>(&spec))
        return Envelope{std::max(log(c->c), Real(0)), horizon};
    if (const auto* p = std::get_if<PowerFamily>(&spec))
        return power_env(p->a, p->p);
    if (const auto* l = std::get_if<LogarithmicFamily>(&spec))
        return log_env(l->a, l->b);
    if (const auto* t = std::get_if<TableFamily>(&spec)) {
        if (t->extension == TableFamily::Extension::repeat_last && !t->values.empty() &&
            horizon >= t->values.size())
            return Envelope{log(t->values.back()), horizon};
        return std::nullopt;
    }
    const auto& pf = std::get<PerturbedFamily>(spec);
    const Real scale = Real(1) + abs(pf.amplitude);
    if (const auto* p = std::get_if<PowerFamily>(&pf.base))
        return power_env(p->a * scale, p->p);
    const auto& l = std::get<LogarithmicFamily>(pf.base);
    return log_env(l.a * scale, l.b * scale);
}

/// Outcome of the three regularity conditions on a prefix 1..N. Each
/// failing condition records the first index where it breaks.
struct RegularityReport {
    std::uint64_t checked_to = 0;
    std::optional<std::uint64_t> below_e;         // (i) c_n >= e
    std::optional<std::uint64_t> not_monotone;    // (ii) c_n nondecreasing
    std::optional<std::uint64_t> ratio_increase;  // (iii) (ln c_n)/n nonincreasing

    bool passes() const { return !below_e && !not_monotone && !ratio_increase; }
};

inline RegularityReport check_regular(const SequenceSpec& spec, std::uint64_t N)
{
    if (N < 2)
        throw std::invalid_argument("check_regular: N must be >= 2");
    PrecisionScope scope(sequence_bits);
    const Real slack = pow2(-static_cast<long>(sequence_bits) + 8);
    RegularityReport rep;
    rep.checked_to = N;
    Real prev_ln;
    Real prev_ratio;
    for (std::uint64_t n = 1; n <= N; ++n) {
        const Real ln_c = ln_value(spec, n);
        const Real ratio = ln_c / Real(n);
        if (!rep.below_e && ln_c < Real(1) - slack)
            rep.below_e = n;
        if (n > 1) {
            if (!rep.not_monotone && ln_c < prev_ln - slack * (1 + abs(prev_ln)))
                rep.not_monotone = n;
            if (!rep.ratio_increase && ratio > prev_ratio + slack * (1 + abs(prev_ratio)))
                rep.ratio_increase = n;
        }
        prev_ln = ln_c;
        prev_ratio = ratio;
    }
    return rep;
}

/// Regularized majorant s_n of a subexponential sequence, cached on 1..N.
/// Built from u_n = max_{k<=n} c_k, alpha_n = (ln u_n)/n,
/// alpha*_n = sup_{k>=n} alpha_k and s_n = max_{k<=n} exp(k alpha*_k).
class RegularizedSequence {
public:
    const SequenceSpec& source() const { return source_; }
    std::uint64_t size() const { return ln_u_.size(); }
    std::uint64_t horizon() const { return horizon_; }

    /// True when alpha* could only be certified on the finite table itself.
    bool prefix_certified_only() const { return prefix_only_; }

    /// True when the source is analytically regular, so s_n = c_n for all n
    /// and values past the cached prefix are available in closed form.
    bool identity_beyond_prefix() const { return analytic_; }

    const Real& ln_u(std::uint64_t n) const { return ln_u_.at(check(n)); }
    const Real& alpha(std::uint64_t n) const { return alpha_.at(check(n)); }
    const Real& alpha_star(std::uint64_t n) const { return alpha_star_.at(check(n)); }
    const Real& ln_s(std::uint64_t n) const { return ln_s_.at(check(n)); }
    Real s(std::uint64_t n) const { return exp(ln_s(n)); }
    const Real& t(std::uint64_t n) const { return t_.at(check(n)); }

    /// ln s_n for any n: cached prefix, else the closed form when the source is
    /// analytically regular.
    Real ln_s_at(const Real& n) const
    {
        if (n <= Real(static_cast<double>(size())) && n >= 1 && n == floor(n))
            return ln_s(static_cast<std::uint64_t>(n));
        if (analytic_)
            return ln_value(source_, n);
        throw SequenceExhausted("regularized sequence: index beyond cached prefix");
    }

    /// ln s_{2^k}.
    Real ln_s_pow2(unsigned k) const { return ln_s_at(pow2(static_cast<long>(k))); }

    /// t_{2^k} = ln s_{2^k} / 2^k.
    Real t_pow2(unsigned k) const { return ln_s_pow2(k) / pow2(static_cast<long>(k)); }

private:
    friend RegularizedSequence regularize(const SequenceSpec& spec, std::uint64_t N);

    std::uint64_t check(std::uint64_t n) const
    {
        if (n < 1 || n > size())
            throw SequenceExhausted("regularized sequence: index " + std::to_string(n) + " not cached");
        return n - 1;
    }

    SequenceSpec source_;
    std::uint64_t horizon_ = 0;
    bool prefix_only_ = false;
    bool analytic_ = false;
    std::vector<Real> ln_u_, alpha_, alpha_star_, ln_s_, t_;
};

inline RegularizedSequence regularize(const SequenceSpec& spec, std::uint64_t N)
{
    if (N < 1)
        throw std::invalid_argument("regularize: N must be >= 1");
    PrecisionScope scope(sequence_bits);

    RegularizedSequence out;
    out.source_ = spec;
    out.analytic_ = analytically_regular(spec);

    std::uint64_t M;
    if (unbounded_domain(spec)) {
        M = std::max<std::uint64_t>(4 * N, std::uint64_t{1} << 16);
    } else {
        const auto& tab = std::get<TableFamily>(spec);
        if (N > tab.values.size())
            throw SequenceExhausted("regularize: N exceeds table length");
        M = tab.values.size();
        out.prefix_only_ = true;
    }

    // Certification of alpha*: past the horizon alpha_k <= max(alpha_M, ln env(k)/k)
    // with ln env(k)/k nonincreasing from env->from, so the horizon must cover
    // env->from and the tail bound must not exceed the computed sup at N.
    std::optional<Envelope> env;
    if (!out.prefix_only_) {
        env = envelope_from(spec, M);
        if (!env)
            throw HorizonExhausted("regularize: no analytic envelope for this family");
        if (env->from > M) {
            if (env->from > (std::uint64_t{1} << 26))
                throw HorizonExhausted("regularize: envelope decreases only beyond the horizon ceiling");
            M = env->from;
        }
    }

    std::vector<Real> alpha_all(M);
    std::vector<Real> ln_u_all(M);
    Real running = neg_infinity();
    const detail::LnTerms ln_c(spec);
    for (std::uint64_t k = 1; k <= M; ++k) {
        running = std::max(running, ln_c(k));
        ln_u_all[k - 1] = running;
        alpha_all[k - 1] = running / Real(k);
    }

    std::vector<Real> suffix(M);
    suffix[M - 1] = alpha_all[M - 1];
    for (std::uint64_t k = M - 1; k >= 1; --k)
        suffix[k - 1] = std::max(alpha_all[k - 1], suffix[k]);

    if (env) {
        const Real tail_bound = std::max(alpha_all[M - 1], env->ln_env_at_from / Real(env->from));
        if (suffix[N - 1] < tail_bound)
            throw HorizonExhausted("regularize: sup of alpha did not stabilize within horizon " +
                                   std::to_string(M));
    }

    out.horizon_ = M;
    out.ln_u_.assign(ln_u_all.begin(), ln_u_all.begin() + static_cast<std::ptrdiff_t>(N));
    out.alpha_.assign(alpha_all.begin(), alpha_all.begin() + static_cast<std::ptrdiff_t>(N));
    out.alpha_star_.assign(suffix.begin(), suffix.begin() + static_cast<std::ptrdiff_t>(N));
    out.ln_s_.resize(N);
    out.t_.resize(N);
    Real best = neg_infinity();
    for (std::uint64_t n = 1; n <= N; ++n) {
        // when the sup is attained at n itself, k alpha*_k is ln u_n exactly
        const bool attained = out.alpha_star_[n - 1] == out.alpha_[n - 1];
        best = std::max(best, attained ? out.ln_u_[n - 1] : Real(n) * out.alpha_star_[n - 1]);
        out.ln_s_[n - 1] = best;
        out.t_[n - 1] = best / Real(n);
    }
    return out;
}

/// Regularizes the cached s-prefix of an already regularized sequence.
inline RegularizedSequence regularize(const RegularizedSequence& reg, std::uint64_t N)
{
    TableFamily tab;
    const std::uint64_t len = std::min<std::uint64_t>(reg.size(), std::max<std::uint64_t>(N, 1));
    PrecisionScope scope(sequence_bits);
    tab.values.reserve(len);
    for (std::uint64_t n = 1; n <= len; ++n)
        tab.values.push_back(reg.s(n));
    return regularize(SequenceSpec{std::move(tab)}, std::min(N, len));
}

/// t_n = (ln s_n)/n.
inline Real tail_decay(const RegularizedSequence& reg, std::uint64_t n)
{
    return reg.t(n);
}

}  // namespace widomk

#endif  // WIDOMK_SEQUENCES_HPP
