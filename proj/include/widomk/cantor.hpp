#ifndef WIDOMK_CANTOR_HPP
#define WIDOMK_CANTOR_HPP

#include "numerics.hpp"
#include "sequences.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace widomk {

class InvalidGamma : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CertificateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RootBracketingFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DepthExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// What is known about gamma_n past the explicitly evaluated prefix.
struct TailCertificate {
    enum class Kind { eventually_constant, bounded, remainder };
    Kind kind = Kind::eventually_constant;
    // bounded: lo <= gamma_n <= hi for every n past the prefix
    Real lo, hi;
    // remainder: sum_{n > L} 2^-n ln gamma_n lies in center +- radius and
    // gamma_n <= gamma_max there
    Real center, radius, gamma_max;
};

/// gamma supplied directly: a prefix, optionally a rule n -> gamma_n for the
/// indices past it, and a certificate for the capacity tail.
struct DirectGamma {
    std::vector<Real> prefix;
    std::function<Real(unsigned)> rule;
    std::optional<TailCertificate> tail;
};

/// Immutable gamma sequence, either direct or derived from a regular sequence
/// via gamma_n = c_{2^{n+1}} / (6 c_{2^n}^2). Values are fixed at construction
/// so every later computation, at any precision, sees the same set K(gamma).
class Gamma {
public:
    static constexpr unsigned max_index = 160;

    static Gamma direct(DirectGamma spec, unsigned bits = 256)
    {
        Gamma g;
        g.bits_ = bits;
        PrecisionScope scope(bits);
        if (spec.prefix.empty() && !spec.rule)
            throw InvalidGamma("gamma: empty direct specification");
        for (const Real& v : spec.prefix)
            g.values_.push_back(with_bits(v, bits));
        const std::size_t given = g.values_.size();
        if (spec.rule) {
            for (unsigned n = static_cast<unsigned>(given) + 1; n <= max_index; ++n)
                g.values_.push_back(with_bits(spec.rule(n), bits));
        } else if (spec.tail && spec.tail->kind == TailCertificate::Kind::eventually_constant) {
            const Real last = g.values_.back();
            while (g.values_.size() < max_index)
                g.values_.push_back(last);
        }
        g.tail_ = spec.tail;
        g.exact_tail_ = !spec.rule && spec.tail && spec.tail->kind == TailCertificate::Kind::eventually_constant;
        g.validate();
        return g;
    }

    static Gamma derived(std::shared_ptr<const RegularizedSequence> seq, unsigned bits = 256)
    {
        if (!seq)
            throw InvalidGamma("gamma: null sequence");
        Gamma g;
        g.bits_ = bits;
        g.seq_ = std::move(seq);
        PrecisionScope scope(bits);
        const Real ln6 = log(Real(6));
        for (unsigned n = 1; n <= max_index; ++n) {
            Real hi, lo;
            try {
                hi = g.seq_->ln_s_pow2(n + 1);
                lo = g.seq_->ln_s_pow2(n);
            } catch (const SequenceExhausted&) {
                break;
            }
            g.values_.push_back(exp(hi - ln6 - 2 * lo));
        }
        if (g.values_.empty())
            throw InvalidGamma("gamma: regularized prefix too short (need s_4)");
        g.validate();
        return g;
    }

    bool is_derived() const { return seq_ != nullptr; }
    const RegularizedSequence* sequence() const { return seq_.get(); }
    const std::optional<TailCertificate>& tail() const { return tail_; }
    unsigned bits() const { return bits_; }

    /// Number of indices with a known value.
    unsigned known() const { return static_cast<unsigned>(values_.size()); }

    const Real& value(unsigned n) const
    {
        if (n < 1 || n > values_.size())
            throw SequenceExhausted("gamma_" + std::to_string(n) + " is not available");
        return values_[n - 1];
    }

    /// gamma_n <= 1/6 for every n, as far as the data can tell.
    bool small_gamma() const
    {
        const Real sixth = Real(1) / 6;
        for (const Real& v : values_)
            if (v > sixth)
                return false;
        if (is_derived() || exact_tail_)
            return true;
        if (!tail_)
            return false;
        switch (tail_->kind) {
        case TailCertificate::Kind::eventually_constant:
            return true;
        case TailCertificate::Kind::bounded:
            return tail_->hi <= sixth;
        case TailCertificate::Kind::remainder:
            return tail_->gamma_max <= sixth;
        }
        return false;
    }

    /// Truncation-free tail: the known values already determine every gamma_n.
    bool exact_tail() const { return exact_tail_; }

private:
    void validate() const
    {
        const Real quarter = Real(1) / 4;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!(values_[i] > 0) || !(values_[i] < quarter))
                throw InvalidGamma("gamma_" + std::to_string(i + 1) + " = " + to_decimal(values_[i], 12) +
                                   " outside (0, 1/4)");
        }
        if (tail_ && tail_->kind == TailCertificate::Kind::bounded) {
            if (!(tail_->lo > 0) || !(tail_->hi < quarter) || tail_->lo > tail_->hi)
                throw InvalidGamma("gamma: bounded tail certificate outside (0, 1/4)");
        }
        if (tail_ && tail_->kind == TailCertificate::Kind::remainder && tail_->radius < 0)
            throw InvalidGamma("gamma: negative remainder radius");
    }

    unsigned bits_ = 256;
    std::vector<Real> values_;
    std::shared_ptr<const RegularizedSequence> seq_;
    std::optional<TailCertificate> tail_;
    bool exact_tail_ = false;
};

/// One approximant E_s: 2^{s+1} sorted endpoints, interval j being
/// [endpoints[2j], endpoints[2j+1]] (0-based).
struct Level {
    unsigned s = 0;
    unsigned bits = 0;
    LogScalar log_r;    // r_s
    LogScalar log_cap;  // Cap(E_s) = (r_s/4)^{1/2^s}
    std::vector<Real> endpoints;

    std::size_t interval_count() const { return endpoints.size() / 2; }
    const Real& left(std::size_t j) const { return endpoints[2 * j]; }
    const Real& right(std::size_t j) const { return endpoints[2 * j + 1]; }
};

struct GapLocation {
    enum class Kind { unbounded_left, unbounded_right, bounded };
    Kind kind = Kind::unbounded_right;
    unsigned s0 = 0;          // first level not containing x0 (bounded only)
    std::size_t gap_index = 0;  // gap between intervals gap_index and gap_index+1 of E_{s0}
    Real alpha, beta;         // L_{x0} = (alpha, beta), points of K(gamma)
    Real width;               // numerical uncertainty of alpha and beta

    bool is_bounded() const { return kind == Kind::bounded; }
};

/// ln Cap(K(gamma)) within +- eps.
struct CapacityEstimate {
    Real log_cap;
    Real eps;
    unsigned terms = 0;  // prefix length summed explicitly (0 = closed form)
};

/// Value of a polynomial evaluation together with the cancellation state of
/// the last attempt.
struct PolyValue {
    LogScalar value;
    bool cancellation = false;
    unsigned bits = 0;
};

class CantorModel {
public:
    CantorModel(Gamma gamma, PrecisionPolicy policy = {}, unsigned s_max = 12)
        : gamma_(std::move(gamma)), policy_(policy), s_max_(s_max)
    {
        policy_.validate();
        cap_ = compute_log_cap();
    }

    CantorModel(const CantorModel&) = delete;
    CantorModel& operator=(const CantorModel&) = delete;

    const Gamma& gamma() const { return gamma_; }
    const PrecisionPolicy& policy() const { return policy_; }
    unsigned s_max() const { return s_max_; }
    unsigned scalar_bits() const { return policy_.base_bits; }
    bool small_gamma() const { return gamma_.small_gamma(); }

    /// ln gamma_n at `bits`.
    Real ln_gamma(unsigned n, unsigned bits) const
    {
        PrecisionScope scope(bits);
        return log(with_bits(gamma_.value(n), bits));
    }

    /// ln r_0 .. ln r_s at `bits`, via ln r_s = ln gamma_s + 2 ln r_{s-1}.
    std::vector<Real> ln_r_table(unsigned s, unsigned bits) const
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto& tab = ln_r_cache_[bits];
        PrecisionScope scope(bits);
        if (tab.empty())
            tab.push_back(Real(0));
        while (tab.size() <= s) {
            const unsigned k = static_cast<unsigned>(tab.size());
            tab.push_back(log(with_bits(gamma_.value(k), bits)) + 2 * tab.back());
        }
        return std::vector<Real>(tab.begin(), tab.begin() + s + 1);
    }

    /// r_0 .. r_s at `bits`.
    std::vector<Real> r_table(unsigned s, unsigned bits) const
    {
        const std::vector<Real> lr = ln_r_table(s, bits);
        std::lock_guard<std::mutex> lock(mutex_);
        auto& tab = r_cache_[bits];
        PrecisionScope scope(bits);
        while (tab.size() <= s)
            tab.push_back(exp(lr[tab.size()]));
        return std::vector<Real>(tab.begin(), tab.begin() + s + 1);
    }

    LogScalar log_r(unsigned s, unsigned bits) const
    {
        return LogScalar::from_log(1, ln_r_table(s, bits).back(), bits);
    }

    LogScalar log_r(unsigned s) const { return log_r(s, scalar_bits()); }

    /// Cap(E_s) = (r_s / 4)^{1/2^s}.
    LogScalar log_cap_level(unsigned s) const
    {
        const unsigned bits = scalar_bits();
        PrecisionScope scope(bits);
        const Real lr = ln_r_table(s, bits).back();
        return LogScalar::from_log(1, (lr - log(Real(4))) / pow2(static_cast<long>(s)), bits);
    }

    const CapacityEstimate& capacity() const { return cap_; }

    /// ln Cap(K(gamma)) as a LogScalar of Cap, with its error bound; throws when
    /// the available certificate cannot reach `eps`.
    std::pair<LogScalar, Real> log_cap_K(const Real& eps) const
    {
        if (cap_.eps > eps)
            throw CertificateError("capacity tail certificate only reaches eps = " + to_decimal(cap_.eps, 6));
        return {LogScalar::from_log(1, cap_.log_cap, scalar_bits()), cap_.eps};
    }

    /// For derived gamma: the smallest m with 2^-m ln 6 + 2 t_{2^{m+1}} <= eps.
    /// That quantity bounds |sum_{n>m} 2^-n ln gamma_n| and hence also
    /// |log_cap_level(m) - ln Cap(K)|.
    unsigned truncation_level(const Real& eps, unsigned limit = Gamma::max_index - 2) const
    {
        const RegularizedSequence* seq = gamma_.sequence();
        if (!seq)
            throw CertificateError("truncation_level: only defined for derived gamma");
        PrecisionScope scope(scalar_bits());
        for (unsigned m = 1; m <= limit; ++m)
            if (truncation_bound(m) <= eps)
                return m;
        throw CertificateError("truncation_level: eps unreachable within index limit");
    }

    /// 2^-m ln 6 + 2 t_{2^{m+1}} (t taken at the longest cached index when the
    /// exact one is out of reach; t is nonincreasing so that still bounds it).
    Real truncation_bound(unsigned m) const
    {
        const RegularizedSequence* seq = gamma_.sequence();
        if (!seq)
            throw CertificateError("truncation_bound: only defined for derived gamma");
        PrecisionScope scope(scalar_bits());
        Real t;
        try {
            t = seq->t_pow2(m + 1);
        } catch (const SequenceExhausted&) {
            t = seq->t(seq->size());
        }
        return log(Real(6)) / pow2(static_cast<long>(m)) + 2 * t;
    }

    /// P_{2^s}(x) by P_{2^{k+1}} = P_{2^k}(P_{2^k} + r_k), P_2 = x(x - 1).
    PolyValue eval_P_checked(unsigned s, const Real& x) const
    {
        return to_log(checked(s, x, [](const Real& p, const Real&) { return p; }));
    }

    LogScalar eval_P(unsigned s, const Real& x) const { return eval_P_checked(s, x).value; }

    /// T_{2^s} = P_{2^s} + r_s / 2.
    LogScalar eval_T(unsigned s, const Real& x) const
    {
        return to_log(checked(s, x, [](const Real& p, const Real& r) { return p + r / 2; })).value;
    }

    /// T_{2^s}(x) as a plain real at the level's working precision.
    Real eval_T_plain(unsigned s, const Real& x) const
    {
        return checked(s, x, [](const Real& p, const Real& r) { return p + r / 2; }).value;
    }

    /// F_s = (2/r_s) P_{2^s} + 1; E_s = F_s^{-1}([-1, 1]).
    LogScalar eval_F(unsigned s, const Real& x) const
    {
        if (s == 0) {
            PrecisionScope scope(scalar_bits());
            return LogScalar::from_real(2 * x - 1, scalar_bits());
        }
        return to_log(checked(s, x, [](const Real& p, const Real& r) { return 2 * p / r + 1; })).value;
    }

    Real eval_F_plain(unsigned s, const Real& x) const
    {
        if (s == 0)
            return 2 * x - 1;
        return checked(s, x, [](const Real& p, const Real& r) { return 2 * p / r + 1; }).value;
    }

    /// x in E_s, i.e. |F_s(x)| <= 1 up to 2^{-bits/2}.
    bool contains(unsigned s, const Real& x) const
    {
        if (s == 0)
            return x >= 0 && x <= 1;
        if (x < 0 || x > 1)
            return false;
        const LogScalar f = eval_F(s, x);
        if (f.is_zero())
            return true;
        PrecisionScope scope(f.precision());
        return f.logmag() <= pow2(-static_cast<long>(f.precision() / 2));
    }

    /// All x with P_{2^s}(x) = y for y in [-r_s, 0], sorted, at `bits`.
    /// Descends P_{2^k} = q (q + r_{k-1}) through the two-root quadratics.
    std::vector<Real> preimages(unsigned s, const Real& y, unsigned bits) const
    {
        PrecisionScope scope(bits);
        const std::vector<Real> rt = r_table(s, bits);
        std::vector<Real> values{with_bits(y, bits)};
        for (unsigned k = s; k >= 2; --k) {
            const Real& r = rt[k - 1];
            const Real r2 = r * r;
            std::vector<Real> next;
            next.reserve(values.size() * 2);
            for (const Real& v : values) {
                Real disc = r2 + 4 * v;
                if (disc < 0) {
                    if (disc < -r2 * pow2(16 - static_cast<long>(bits)))
                        throw RootBracketingFailure("preimage: negative discriminant at level " + std::to_string(k));
                    disc = 0;
                }
                const Real q1 = -(r + sqrt(disc)) / 2;
                next.push_back(q1);
                next.push_back(-v / q1);
            }
            values = std::move(next);
        }
        std::vector<Real> xs;
        if (s == 0) {
            xs.push_back(values.front() + 1);
            return xs;
        }
        xs.reserve(values.size() * 2);
        for (const Real& v : values) {
            Real disc = 1 + 4 * v;
            if (disc < 0) {
                if (disc < -pow2(16 - static_cast<long>(bits)))
                    throw RootBracketingFailure("preimage: negative discriminant at level 1");
                disc = 0;
            }
            const Real big = (1 + sqrt(disc)) / 2;
            xs.push_back(big);
            xs.push_back(-v / big);
        }
        std::sort(xs.begin(), xs.end());
        return xs;
    }

    /// One guarded Newton step on P_{2^s}(x) = y in plain arithmetic.
    Real polish(unsigned s, const Real& x, const Real& y, unsigned bits) const
    {
        PrecisionScope scope(bits);
        const std::vector<Real> r = r_table(s, bits);
        auto eval = [&](const Real& t, Real& dp) {
            Real p = t - 1;
            dp = 1;
            for (unsigned k = 0; k < s; ++k) {
                dp = dp * (2 * p + r[k]);
                p = p * (p + r[k]);
            }
            return p - y;
        };
        Real d0;
        const Real res0 = eval(x, d0);
        if (res0 == 0 || d0 == 0)
            return x;
        const Real x1 = x - res0 / d0;
        Real d1;
        const Real res1 = eval(x1, d1);
        return abs(res1) < abs(res0) ? x1 : x;
    }

    /// E_s with explicit endpoints, built level by level and cached.
    std::shared_ptr<const Level> level(unsigned s) const
    {
        if (s > s_max_)
            throw DepthExhausted("level " + std::to_string(s) + " exceeds S_max = " + std::to_string(s_max_));
        std::lock_guard<std::mutex> lock(level_mutex_);
        if (levels_.empty())
            levels_.push_back(make_level0());
        while (levels_.size() <= s)
            levels_.push_back(next_level(*levels_.back()));
        return levels_[s];
    }

    /// Gap of K(gamma) containing x0. The bracketing endpoints at the first
    /// level that excludes x0 are level endpoints, hence points of K(gamma),
    /// and they persist at every deeper level.
    GapLocation locate_gap(const Real& x0, unsigned depth) const
    {
        GapLocation out;
        PrecisionScope scope(scalar_bits());
        if (x0 < 0) {
            out.kind = GapLocation::Kind::unbounded_left;
            out.alpha = neg_infinity();
            out.beta = 0;
            out.width = 0;
            return out;
        }
        if (x0 > 1) {
            out.kind = GapLocation::Kind::unbounded_right;
            out.alpha = 1;
            out.beta = std::numeric_limits<Real>::infinity();
            out.width = 0;
            return out;
        }
        for (unsigned s = 1; s <= depth; ++s) {
            if (contains(s, x0))
                continue;
            const auto lev = level(s);
            const auto it = std::upper_bound(lev->endpoints.begin(), lev->endpoints.end(), x0);
            if (it == lev->endpoints.begin() || it == lev->endpoints.end())
                throw RootBracketingFailure("locate_gap: x0 not bracketed by level endpoints");
            const std::size_t idx = static_cast<std::size_t>(it - lev->endpoints.begin());
            if (idx % 2 != 0)
                throw RootBracketingFailure("locate_gap: membership test and endpoints disagree");
            out.kind = GapLocation::Kind::bounded;
            out.s0 = s;
            out.gap_index = idx / 2 - 1;
            out.alpha = lev->endpoints[idx - 1];
            out.beta = lev->endpoints[idx];
            out.width = pow2(8 - static_cast<long>(lev->bits));
            return out;
        }
        throw DepthExhausted("locate_gap: x0 lies in E_s for every s <= " + std::to_string(depth));
    }

private:
    // Plain mpfr arithmetic (its exponent range makes under/overflow a non-issue
    // here) with one log at the end; the cancellation test mirrors ls_add.
    // `finish` maps (P_{2^s}(x), r_s) to the reported quantity.
    struct PlainValue {
        Real value;
        bool cancellation = false;
        unsigned bits = 0;
    };

    static PolyValue to_log(const PlainValue& v)
    {
        return {LogScalar::from_real(v.value, v.bits), v.cancellation, v.bits};
    }

    template <class Finish>
    PlainValue eval_at(unsigned s, const Real& x, unsigned bits, Finish finish) const
    {
        PrecisionScope scope(bits);
        const Real xb = with_bits(x, std::max(bits, bits_of(x)));
        const std::vector<Real> r = r_table(s, bits);
        const Real threshold = pow2(-static_cast<long>(bits / 2));
        PlainValue out;
        out.bits = bits;
        Real p = xb * (xb - 1);
        for (unsigned k = 1; k < s; ++k) {
            const Real shifted = p + r[k];
            if (shifted != 0 && abs(shifted) < threshold * std::max(abs(p), r[k]))
                out.cancellation = true;
            p = p * shifted;
        }
        out.value = finish(p, r[s]);
        return out;
    }

    // Escalation only helps while x itself carries more bits than were used.
    template <class Finish>
    PlainValue checked(unsigned s, const Real& x, Finish finish) const
    {
        if (s < 1)
            throw std::invalid_argument("eval_P: s must be >= 1");
        unsigned bits = policy_.bits(s);
        PlainValue out;
        for (unsigned attempt = 0;; ++attempt) {
            out = eval_at(s, x, bits, finish);
            if (!out.cancellation || attempt >= policy_.max_escalations || bits >= bits_of(x))
                return out;
            if (2 * bits > policy_.ceiling_bits)
                throw PrecisionExhausted("eval_P: escalation ceiling reached at level " + std::to_string(s));
            bits *= 2;
        }
    }

    std::shared_ptr<const Level> make_level0() const
    {
        auto lev = std::make_shared<Level>();
        const unsigned bits = policy_.bits(0);
        PrecisionScope scope(bits);
        lev->s = 0;
        lev->bits = bits;
        lev->log_r = LogScalar::from_log(1, Real(0), bits);
        lev->log_cap = log_cap_level(0);
        lev->endpoints = {with_bits(Real(0), bits), with_bits(Real(1), bits)};
        return lev;
    }

    std::shared_ptr<const Level> next_level(const Level& prev) const
    {
        const unsigned s = prev.s;  // building level s + 1
        const unsigned bits = policy_.bits(s + 1);
        PrecisionScope scope(bits);
        const std::vector<Real> lr = ln_r_table(s + 1, bits);
        const Real r = exp(lr[s]);
        const Real g = with_bits(gamma_.value(s + 1), bits);
        // p (p + r_s) = -r_{s+1} = -gamma_{s+1} r_s^2
        const Real root = sqrt(1 - 4 * g);
        const Real p_outer = -r * (1 + root) / 2;
        const Real p_inner = -r * g / ((1 + root) / 2);

        std::vector<Real> fresh;
        fresh.reserve(prev.endpoints.size());
        if (s == 0) {
            // x (x - 1) = -gamma_1 in cancellation-free form
            const Real small = 2 * g / (1 + root);
            fresh = {small, 1 - small};
        } else {
            for (const Real& y : {p_outer, p_inner})
                for (const Real& x : preimages(s, y, bits))
                    fresh.push_back(polish(s, x, y, bits));
        }

        auto lev = std::make_shared<Level>();
        lev->s = s + 1;
        lev->bits = bits;
        lev->log_r = LogScalar::from_log(1, lr[s + 1], bits);
        lev->log_cap = log_cap_level(s + 1);
        lev->endpoints.reserve(prev.endpoints.size() * 2);
        for (const Real& e : prev.endpoints)
            lev->endpoints.push_back(with_bits(e, bits));
        for (Real& e : fresh)
            lev->endpoints.push_back(std::move(e));
        std::sort(lev->endpoints.begin(), lev->endpoints.end());

        // each parent [a, b] must become a < c < d < b with c, d fresh
        for (std::size_t j = 0; j < prev.interval_count(); ++j) {
            const Real& a = lev->endpoints[4 * j];
            const Real& c = lev->endpoints[4 * j + 1];
            const Real& d = lev->endpoints[4 * j + 2];
            const Real& b = lev->endpoints[4 * j + 3];
            if (a != prev.left(j) || b != prev.right(j) || !(a < c && c < d && d < b))
                throw RootBracketingFailure("level " + std::to_string(s + 1) + ": children of interval " +
                                            std::to_string(j) + " not bracketed by parent");
        }
        return lev;
    }

    CapacityEstimate compute_log_cap() const
    {
        const unsigned bits = scalar_bits();
        PrecisionScope scope(bits);
        CapacityEstimate est;
        const Real rounding = pow2(8 - static_cast<long>(std::min(bits, gamma_.bits())));
        if (const RegularizedSequence* seq = gamma_.sequence()) {
            // limit of Cap(E_s) is 1 / (6 s_2)
            est.log_cap = -log(Real(6)) - seq->ln_s_pow2(1);
            est.eps = rounding;
            // gamma values were rounded at gamma_.bits(); sum 2^-n |dgamma/gamma| <= 2^{1-bits}
            est.terms = 0;
            return est;
        }
        const unsigned known = gamma_.known();
        Real partial = 0;
        for (unsigned n = 1; n <= known; ++n)
            partial += log(with_bits(gamma_.value(n), bits)) / pow2(static_cast<long>(n));
        est.terms = known;
        if (gamma_.exact_tail()) {
            // constant continuation: sum_{n > L} 2^-n ln gamma_L = 2^-L ln gamma_L
            est.log_cap = partial + log(with_bits(gamma_.value(known), bits)) / pow2(static_cast<long>(known));
            est.eps = rounding;
            return est;
        }
        const auto& tail = gamma_.tail();
        if (!tail) {
            est.log_cap = partial;
            est.eps = std::numeric_limits<Real>::infinity();
            return est;
        }
        const Real w = pow2(-static_cast<long>(known));
        switch (tail->kind) {
        case TailCertificate::Kind::eventually_constant:
            est.log_cap = partial + w * log(with_bits(gamma_.value(known), bits));
            est.eps = rounding;
            break;
        case TailCertificate::Kind::bounded: {
            const Real a = w * log(tail->lo);
            const Real b = w * log(tail->hi);
            est.log_cap = partial + (a + b) / 2;
            est.eps = (b - a) / 2 + rounding;
            break;
        }
        case TailCertificate::Kind::remainder:
            est.log_cap = partial + tail->center;
            est.eps = tail->radius + rounding;
            break;
        }
        return est;
    }

    Gamma gamma_;
    PrecisionPolicy policy_;
    unsigned s_max_;
    CapacityEstimate cap_;

    mutable std::mutex mutex_;
    mutable std::map<unsigned, std::vector<Real>> ln_r_cache_;
    mutable std::map<unsigned, std::vector<Real>> r_cache_;
    mutable std::mutex level_mutex_;
    mutable std::vector<std::shared_ptr<const Level>> levels_;
};

/// Model built from a regular (or regularized) sequence c.
inline std::shared_ptr<CantorModel> make_derived_model(const SequenceSpec& spec, std::uint64_t prefix,
                                                       PrecisionPolicy policy = {}, unsigned s_max = 12)
{
    auto seq = std::make_shared<const RegularizedSequence>(regularize(spec, prefix));
    return std::make_shared<CantorModel>(Gamma::derived(seq, std::max(policy.base_bits, 256u)), policy, s_max);
}

/// Model with gamma_n = g for every n.
inline std::shared_ptr<CantorModel> make_constant_model(const Real& g, PrecisionPolicy policy = {},
                                                        unsigned s_max = 12)
{
    DirectGamma d;
    d.prefix = {g};
    d.tail = TailCertificate{};
    return std::make_shared<CantorModel>(Gamma::direct(std::move(d), std::max(policy.base_bits, bits_of(g))),
                                         policy, s_max);
}

}  // namespace widomk

#endif  // WIDOMK_CANTOR_HPP
