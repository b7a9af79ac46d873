#ifndef WIDOMK_WIDOM_HPP
#define WIDOMK_WIDOM_HPP

#include "cantor.hpp"
#include "potential.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace widomk {

class AlternationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// ln W_{inf,2^s} = ln(r_s / 2) - 2^s ln Cap(K). For s = 0 this is
/// ||x - 1/2||_K / Cap(K) with ||x - 1/2||_K = 1/2 = r_0/2, since 0, 1 are in K.
inline LogScalar widom_sup_dyadic(const CantorModel& model, unsigned s)
{
    const unsigned bits = model.scalar_bits();
    PrecisionScope scope(bits);
    const Real ln_r = model.log_r(s).logmag();
    return LogScalar::from_log(1, ln_r - ln2() - pow2(static_cast<long>(s)) * model.capacity().log_cap, bits);
}

/// tail(s) = sum_{k>s} 2^{s-k} ln gamma_k.
inline Real gamma_tail(const CantorModel& model, unsigned s)
{
    PrecisionScope scope(model.scalar_bits());
    if (const RegularizedSequence* seq = model.gamma().sequence()) {
        // telescopes to -ln(6 s_{2^{s+1}})
        return -log(Real(6)) - seq->ln_s_pow2(s + 1);
    }
    if (!isfinite(model.capacity().eps))
        throw CertificateError("gamma tail: no tail certificate for this gamma");
    return pow2(static_cast<long>(s)) * model.capacity().log_cap - model.log_r(s).logmag();
}

/// ln W_{2,2^s}(mu_K) = (1/2) ln(1 - 2 gamma_{s+1}) - ln 2 - tail(s).
inline LogScalar widom_l2_dyadic(const CantorModel& model, unsigned s)
{
    if (!model.small_gamma())
        throw std::domain_error("widom_l2_dyadic: needs gamma_n <= 1/6 for every n");
    const unsigned bits = model.scalar_bits();
    PrecisionScope scope(bits);
    const Real g = with_bits(model.gamma().value(s + 1), bits);
    const Real ln_w = log1p(-2 * g) / 2 - ln2() - gamma_tail(model, s);
    return LogScalar::from_log(1, ln_w, bits);
}

inline unsigned dyadic_block(std::uint64_t n)
{
    if (n == 0)
        throw std::invalid_argument("dyadic_block: n must be >= 1");
    unsigned s = 0;
    while ((n >> (s + 1)) != 0)
        ++s;
    return s;
}

/// min over 2^s <= n < 2^{s+1} of W_{2,n}, which is attained at n = 2^s.
inline LogScalar widom_l2_block_min(const CantorModel& model, std::uint64_t n)
{
    return widom_l2_dyadic(model, dyadic_block(n));
}

/// R = T_{2^s} / T_{2^s}(x0). Holds a non-owning pointer to its model.
struct ResidualPolynomial {
    const CantorModel* model = nullptr;
    unsigned s = 0;
    Real x0;
    std::uint64_t degree = 0;
    LogScalar T_at_x0;
    LogScalar sup_norm;  // (r_s / 2) / |T(x0)|

    LogScalar operator()(const Real& x) const { return model->eval_T(s, x) / T_at_x0; }

    /// R(x) / ||R|| in plain arithmetic; +-1 exactly on the alternation points.
    Real normalized(const Real& x) const
    {
        const Real t = model->eval_T_plain(s, x);
        PrecisionScope scope(bits_of(t));
        return 2 * t / model->r_table(s, bits_of(t)).back() * T_at_x0.sign();
    }
};

inline ResidualPolynomial residual_dyadic(const CantorModel& model, unsigned s, const Real& x0)
{
    if (s < 1)
        throw std::invalid_argument("residual_dyadic: s must be >= 1");
    if (x0 >= 0 && x0 <= 1) {
        if (model.contains(s, x0))
            throw std::domain_error("residual_dyadic: x0 lies in E_" + std::to_string(s) +
                                    " (s below the level of its gap)");
    }
    ResidualPolynomial out;
    out.model = &model;
    out.s = s;
    out.x0 = x0;
    out.degree = std::uint64_t{1} << s;
    out.T_at_x0 = model.eval_T(s, x0);
    const unsigned bits = out.T_at_x0.precision();
    PrecisionScope scope(bits);
    const LogScalar half_r = model.log_r(s, bits) / LogScalar::from_real(Real(2), bits);
    out.sup_norm = half_r / out.T_at_x0.abs();
    return out;
}

/// Greedy left-to-right scan over the level-s endpoints, keeping an endpoint
/// when sigma = sign(R(e)) sign(e - x0) flips; the first 2^s + 1 kept points.
inline std::vector<Real> alternating_set(const CantorModel& model, unsigned s, const Real& x0)
{
    const ResidualPolynomial R = residual_dyadic(model, s, x0);
    const auto lev = model.level(s);
    std::vector<Real> kept;
    int last = 0;
    for (const Real& e : lev->endpoints) {
        const Real f = model.eval_F_plain(s, e);
        const int sigma = (f > 0 ? 1 : (f < 0 ? -1 : 0)) * R.T_at_x0.sign() * (e < x0 ? -1 : 1);
        if (sigma != 0 && sigma != last) {
            kept.push_back(e);
            last = sigma;
        }
    }
    if (kept.size() < R.degree + 1)
        throw AlternationFailure("alternating_set: scan kept " + std::to_string(kept.size()) + " of " +
                                 std::to_string(R.degree + 1) + " points");
    kept.resize(R.degree + 1);
    return kept;
}

struct AlternationCheck {
    bool ok = true;
    std::size_t index = 0;  // first failing point (1-based), or 0
    std::string reason;

    explicit operator bool() const { return ok; }
};

/// R(x_j) = (-1)^{k+1-j} sign(x_j - x0) ||R||, k = #{x_j < x0}; k = 0 is
/// accepted for x0 left of K.
inline AlternationCheck verify_alternation(const std::vector<Real>& points, const Real& x0,
                                           const ResidualPolynomial& R, const Real& tol)
{
    auto fail = [](std::size_t i, std::string why) { return AlternationCheck{false, i, std::move(why)}; };
    if (points.size() != R.degree + 1)
        return fail(points.size(), "expected " + std::to_string(R.degree + 1) + " points");
    std::size_t k = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0 && !(points[i - 1] < points[i]))
            return fail(i + 1, "points not strictly increasing");
        if (points[i] == x0)
            return fail(i + 1, "point coincides with x0");
        if (points[i] < x0)
            ++k;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t j = i + 1;
        const Real v = R.normalized(points[i]);
        PrecisionScope scope(bits_of(v));
        const int side = points[i] < x0 ? -1 : 1;
        const int parity = ((k + 1 + j) % 2 == 0) ? 1 : -1;  // (-1)^{k+1-j}
        if ((v > 0 ? 1 : -1) != parity * side)
            return fail(j, "sign pattern broken");
        const Real rel = abs(abs(v) - 1);
        if (rel > tol)
            return fail(j, "|R| differs from ||R|| by " + to_decimal(rel, 6));
    }
    return {};
}

struct ResidualWidom {
    LogScalar lo, hi;  // bracket of W^{(x0)}_{inf,2^s}
    GreenBracket green;
};

/// ln W in [2^s g_lo + ln ||R||, 2^s g_hi + ln ||R||].
inline ResidualWidom residual_widom_from(const ResidualPolynomial& R, const GreenBracket& g)
{
    const unsigned bits = std::max(bits_of(g.lo), R.sup_norm.precision());
    PrecisionScope scope(bits);
    const Real n = pow2(static_cast<long>(R.s));
    const Real base = R.sup_norm.logmag();
    return {LogScalar::from_log(1, n * g.lo + base, bits), LogScalar::from_log(1, n * g.hi + base, bits), g};
}

/// Green bracket refined from level max(s, s0) until its width is <= eps.
inline ResidualWidom residual_widom_dyadic(const CantorModel& model, unsigned s, const Real& x0, const Real& eps,
                                           unsigned s_limit = green_depth_limit)
{
    const ResidualPolynomial R = residual_dyadic(model, s, x0);
    const GapLocation gap = model.locate_gap(x0, std::min(s, model.s_max()));
    const HarnackBracket tau = harnack_for(gap, x0);
    for (unsigned level = s;; ++level) {
        GreenBracket g = green_bracket_at(model, level, x0, tau.hi);
        if (g.width() <= eps)
            return residual_widom_from(R, g);
        if (level >= s_limit)
            throw DepthExhausted("residual_widom_dyadic: eps not reached by level " + std::to_string(s_limit));
    }
}

enum class Verdict { pass, fail, undecided };

inline const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::pass:
        return "pass";
    case Verdict::fail:
        return "fail";
    case Verdict::undecided:
        return "undecided";
    }
    return "?";
}

struct WidomRow {
    enum class Kind { sup, l2, l2_block, residual };
    // primary: sqrt6 c_n (thm 1) or (sqrt6 c_n / 2)^{1/tau_hi} (thm 2);
    // c: c_n or c_n^{1/tau_hi}; ttt: (W_inf / 2)^{1/tau_hi};
    // tau_lo: (sqrt6 c_n / 2)^{1/tau_lo}, informational only.
    enum class Bound { primary, c, ttt, tau_lo };

    Kind kind = Kind::l2;
    Bound bound_kind = Bound::primary;
    std::uint64_t n = 0;
    unsigned s = 0;
    std::optional<Real> x0;
    LogScalar value_lo, value_hi;
    LogScalar bound;
    Real exponent_lo = 1, exponent_hi = 1;  // tau_{x0} bracket [1/tau_hi, 1/tau_lo]
    unsigned green_level = 0;
    Verdict verdict = Verdict::undecided;
    bool informational = false;

    bool pass() const { return verdict == Verdict::pass; }
};

inline const char* kind_name(WidomRow::Kind k)
{
    switch (k) {
    case WidomRow::Kind::sup:
        return "sup";
    case WidomRow::Kind::l2:
        return "L2";
    case WidomRow::Kind::l2_block:
        return "L2-block";
    case WidomRow::Kind::residual:
        return "residual";
    }
    return "?";
}

inline const char* bound_name(WidomRow::Bound b)
{
    switch (b) {
    case WidomRow::Bound::primary:
        return "primary";
    case WidomRow::Bound::c:
        return "c";
    case WidomRow::Bound::ttt:
        return "ttt";
    case WidomRow::Bound::tau_lo:
        return "tau_lo";
    }
    return "?";
}

/// Certified comparison on the log scale with a rounding margin.
inline Verdict compare(const LogScalar& lo, const LogScalar& hi, const LogScalar& bound, unsigned bits)
{
    PrecisionScope scope(bits);
    const Real& b = bound.logmag();
    const Real margin = pow2(24 - static_cast<long>(bits)) * (1 + abs(b));
    if (lo.logmag() - b > margin)
        return Verdict::pass;
    if (b - hi.logmag() > margin)
        return Verdict::fail;
    return Verdict::undecided;
}

inline const RegularizedSequence& derived_sequence(const CantorModel& model, const char* who)
{
    const RegularizedSequence* seq = model.gamma().sequence();
    if (!seq)
        throw CertificateError(std::string(who) + ": gamma is not derived from a sequence");
    return *seq;
}

/// Theorem 1 rows for n <= N: dyadic W_{2,2^s} >= sqrt6 c_{2^{s+1}} and, for
/// every n, the block minimum against sqrt6 c_n and c_n.
inline std::vector<WidomRow> check_thm1(const CantorModel& model, std::uint64_t N)
{
    const RegularizedSequence& seq = derived_sequence(model, "check_thm1");
    const unsigned bits = model.scalar_bits();
    PrecisionScope scope(bits);
    const Real ln_sqrt6 = log(Real(6)) / 2;
    std::vector<WidomRow> rows;

    std::vector<LogScalar> dyadic;
    for (unsigned s = 0; (std::uint64_t{1} << s) <= N; ++s)
        dyadic.push_back(widom_l2_dyadic(model, s));

    for (unsigned s = 0; (std::uint64_t{2} << s) <= N; ++s) {
        WidomRow row;
        row.kind = WidomRow::Kind::l2;
        row.n = std::uint64_t{1} << s;
        row.s = s;
        row.value_lo = row.value_hi = dyadic[s];
        row.bound = LogScalar::from_log(1, ln_sqrt6 + seq.ln_s_pow2(s + 1), bits);
        row.verdict = compare(row.value_lo, row.value_hi, row.bound, bits);
        rows.push_back(std::move(row));
    }
    for (std::uint64_t n = 1; n <= N; ++n) {
        const unsigned s = dyadic_block(n);
        const Real ln_c = seq.ln_s_at(Real(static_cast<double>(n)));
        for (const auto kind : {WidomRow::Bound::primary, WidomRow::Bound::c}) {
            WidomRow row;
            row.kind = WidomRow::Kind::l2_block;
            row.bound_kind = kind;
            row.n = n;
            row.s = s;
            row.value_lo = row.value_hi = dyadic[s];
            row.bound = LogScalar::from_log(1, kind == WidomRow::Bound::primary ? ln_sqrt6 + ln_c : ln_c, bits);
            row.verdict = compare(row.value_lo, row.value_hi, row.bound, bits);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

/// Theorem 2 rows at n = 2^s. The residual bracket is refined on deeper Green
/// levels until every certified bound is decided, the ln-bracket width drops
/// below eps, or the Green depth limit is hit. Exponent 1/tau_hi <= tau_{x0}
/// makes each certified row a consequence of the theorem.
inline std::vector<WidomRow> check_thm2(const CantorModel& model, const Real& x0, unsigned S, const Real& eps,
                                        unsigned s_limit = green_depth_limit)
{
    const RegularizedSequence* seq = model.gamma().sequence();
    const unsigned bits = model.scalar_bits();
    PrecisionScope scope(bits);
    const GapLocation gap = model.locate_gap(x0, model.s_max());
    const HarnackBracket tau = harnack_for(gap, x0);
    const Real e_lo = tau.exponent_lo();
    const Real e_hi = tau.exponent_hi();
    const Real ln_half_sqrt6 = log(Real(6)) / 2 - ln2();
    const unsigned first = gap.is_bounded() ? std::max(gap.s0, 1u) : 1u;

    std::vector<WidomRow> rows;
    for (unsigned s = first; s <= S; ++s) {
        const ResidualPolynomial R = residual_dyadic(model, s, x0);

        struct Target {
            WidomRow::Bound kind;
            LogScalar bound;
            bool informational;
        };
        std::vector<Target> targets;
        if (seq) {
            const Real ln_c = seq->ln_s_pow2(s);
            targets.push_back({WidomRow::Bound::primary, LogScalar::from_log(1, e_lo * (ln_half_sqrt6 + ln_c), bits), false});
            targets.push_back({WidomRow::Bound::c, LogScalar::from_log(1, e_lo * ln_c, bits), false});
        }
        const Real ln_sup = widom_sup_dyadic(model, s).logmag();
        targets.push_back({WidomRow::Bound::ttt, LogScalar::from_log(1, e_lo * (ln_sup - ln2()), bits), false});
        if (seq) {
            const Real ln_c = seq->ln_s_pow2(s);
            targets.push_back({WidomRow::Bound::tau_lo, LogScalar::from_log(1, e_hi * (ln_half_sqrt6 + ln_c), bits), true});
        }

        ResidualWidom w;
        std::vector<Verdict> verdicts(targets.size(), Verdict::undecided);
        unsigned level = s;
        for (;; ++level) {
            w = residual_widom_from(R, green_bracket_at(model, level, x0, tau.hi));
            bool decided = true;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                verdicts[i] = compare(w.lo, w.hi, targets[i].bound, bits);
                if (!targets[i].informational && verdicts[i] == Verdict::undecided)
                    decided = false;
            }
            const Real width = w.hi.logmag() - w.lo.logmag();
            if (decided || width <= eps || level >= s_limit)
                break;
        }
        for (std::size_t i = 0; i < targets.size(); ++i) {
            WidomRow row;
            row.kind = WidomRow::Kind::residual;
            row.bound_kind = targets[i].kind;
            row.n = R.degree;
            row.s = s;
            row.x0 = x0;
            row.value_lo = w.lo;
            row.value_hi = w.hi;
            row.bound = targets[i].bound;
            row.exponent_lo = e_lo;
            row.exponent_hi = e_hi;
            row.green_level = level;
            row.verdict = verdicts[i];
            row.informational = targets[i].informational;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

struct InvariantResult {
    std::string name;
    unsigned s = 0;
    bool pass = false;
    std::string detail;
};

/// Cross-module invariants at levels 0..S (sup/L2 ordering, Schiefermayr,
/// growth, Green monotonicity and alternation round trips at the given x0).
inline std::vector<InvariantResult> check_invariants(const CantorModel& model, unsigned S,
                                                     const std::vector<Real>& x0s)
{
    const unsigned bits = model.scalar_bits();
    PrecisionScope scope(bits);
    std::vector<InvariantResult> out;
    auto add = [&](std::string name, unsigned s, bool ok, std::string detail = {}) {
        out.push_back({std::move(name), s, ok, std::move(detail)});
    };
    const LogScalar two = LogScalar::from_real(Real(2), bits);
    const LogScalar one = LogScalar::from_real(Real(1), bits);
    Real prev_growth = std::numeric_limits<Real>::infinity();
    for (unsigned s = 0; s <= S; ++s) {
        const LogScalar w_sup = widom_sup_dyadic(model, s);
        add("sup >= 2", s, w_sup >= two, to_decimal(w_sup.to_real(), 12));
        if (model.small_gamma()) {
            const LogScalar w2 = widom_l2_dyadic(model, s);
            add("L2 >= 1", s, w2 >= one, to_decimal(w2.to_real(), 12));
            add("L2 <= sup", s, w2 <= w_sup);
        }
        const Real growth = w_sup.logmag() / pow2(static_cast<long>(s));
        if (s > 2)
            add("ln W_sup / n nonincreasing", s, growth <= prev_growth * (1 + pow2(24 - static_cast<long>(bits))));
        prev_growth = growth;
        if (s >= 1) {
            const Real d = model.log_cap_level(s).logmag() - model.log_cap_level(s - 1).logmag();
            add("Cap(E_s) nonincreasing", s, d <= 0);
        }
    }
    for (const Real& x0 : x0s) {
        const std::string tag = " x0=" + to_decimal(x0, 8);
        GapLocation gap;
        try {
            gap = model.locate_gap(x0, std::min(S, model.s_max()));
        } catch (const DepthExhausted&) {
            add("gap located" + tag, S, false, "x0 in E_S");
            continue;
        }
        const unsigned first = gap.is_bounded() ? std::max(gap.s0, 1u) : 1u;
        Real prev = -1;
        for (unsigned s = 0; s <= S; ++s) {
            const Real g = green_level(model, s, x0);
            add("green monotone" + tag, s, g >= prev);
            prev = g;
        }
        for (unsigned s = first; s <= std::min(S, model.s_max()); ++s) {
            const ResidualPolynomial R = residual_dyadic(model, s, x0);
            bool ok = true;
            std::string why;
            try {
                const AlternationCheck c = verify_alternation(alternating_set(model, s, x0), x0, R, pow2(-64));
                ok = c.ok;
                why = c.reason;
            } catch (const AlternationFailure& e) {
                ok = false;
                why = e.what();
            }
            add("alternation" + tag, s, ok, why);
            add("||R|| <= 1" + tag, s, R.sup_norm <= one);
        }
    }
    return out;
}

}  // namespace widomk

#endif  // WIDOMK_WIDOM_HPP
