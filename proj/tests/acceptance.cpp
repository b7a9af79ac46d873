// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.
#include <widomk/oracle.hpp>
#include <widomk/widom.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace widomk;

namespace {

constexpr unsigned model_bits = 256;
constexpr unsigned identity_bits = 512;
const char* const cap_limit_eps = "1e-30";
const char* const identity_rel_tol = "1e-40";
const char* const alternation_tol = "1e-20";
const char* const green_eps = "1e-12";
const char* const oracle_tol = "1e-25";
const char* const pullback_slack = "1e-6";
constexpr std::uint64_t thm1_n = 4096;
constexpr unsigned identity_levels = 12;
constexpr unsigned alternation_levels = 8;
constexpr unsigned thm2_levels = 10;
constexpr int minimality_trials = 100;
constexpr int random_specs = 50;
constexpr std::uint64_t regularize_prefix = std::uint64_t{1} << 14;

struct Outcome {
    bool ok = true;
    std::ostringstream note;

    void require(bool cond, const std::string& what)
    {
        if (!cond && ok)
            note << "first failure: " << what << "; ";
        ok = ok && cond;
    }
};

std::shared_ptr<CantorModel> derived(const SequenceSpec& spec, std::uint64_t prefix = 4096, unsigned s_max = 12)
{
    PrecisionScope scope(model_bits);
    PrecisionPolicy pol;
    pol.base_bits = model_bits;
    return make_derived_model(spec, prefix, pol, s_max);
}

SequenceSpec constant_e()
{
    PrecisionScope scope(identity_bits);
    return ConstantFamily{euler_e()};
}

SequenceSpec power_e_half()
{
    PrecisionScope scope(identity_bits);
    return PowerFamily{euler_e(), Real(1) / 2};
}

SequenceSpec log_3_2()
{
    PrecisionScope scope(identity_bits);
    return LogarithmicFamily{Real(3), Real(2)};
}

// 1. Theorem 1 rows for n <= 4096.
void thm1(Outcome& out)
{
    for (const auto& [name, spec] : {std::pair{"constant(e)", constant_e()}, std::pair{"power(e,1/2)", power_e_half()}}) {
        const auto m = derived(spec, thm1_n);
        const auto rows = check_thm1(*m, thm1_n);
        std::size_t pass = 0;
        for (const auto& r : rows)
            pass += r.pass() ? 1 : 0;
        out.require(pass == rows.size(), std::string(name) + " has non-passing rows");
        out.note << name << ": " << pass << "/" << rows.size() << " rows; ";
    }
}

// 2. |ln Cap(E_s) - ln(1/(6 c_2))| decreases and is below eps at the truncation level.
void capacity_limit(Outcome& out)
{
    PrecisionScope scope(model_bits);
    const Real eps(cap_limit_eps);
    for (const auto& [name, spec] :
         {std::pair{"constant(e)", constant_e()}, std::pair{"power(e,1/2)", power_e_half()},
          std::pair{"logarithmic(3,2)", log_3_2()}}) {
        const auto m = derived(spec);
        const Real limit = -log(Real(6)) - m->gamma().sequence()->ln_s(2);
        const unsigned level = m->truncation_level(eps);
        Real prev = std::numeric_limits<Real>::infinity();
        bool monotone = true;
        Real diff;
        for (unsigned s = 0; s <= level; ++s) {
            diff = abs(m->log_cap_level(s).logmag() - limit);
            monotone = monotone && diff < prev;
            prev = diff;
        }
        out.require(monotone, std::string(name) + " not monotone");
        out.require(diff < eps, std::string(name) + " above eps at the truncation level");
        out.note << name << ": m=" << level << " diff=" << to_decimal(diff, 3) << "; ";
    }
}

// 3. gamma = 1/6: W_inf = 3, W_2 = sqrt 6 at 512 bits.
void constant_identities(Outcome& out)
{
    PrecisionScope scope(identity_bits);
    PrecisionPolicy pol;
    pol.base_bits = identity_bits;
    const auto m = make_constant_model(Real(1) / 6, pol, identity_levels);
    const Real tol(identity_rel_tol);
    Real worst = 0;
    for (unsigned s = 0; s <= identity_levels; ++s) {
        const Real a = abs(widom_sup_dyadic(*m, s).to_real() / 3 - 1);
        const Real b = abs(widom_l2_dyadic(*m, s).to_real() / sqrt(Real(6)) - 1);
        worst = std::max({worst, a, b});
    }
    out.require(worst < tol, "relative error too large");
    out.note << "max rel err " << to_decimal(worst, 3) << " over s<=" << identity_levels;
}

// 4. W_inf >= 2 and W_2 <= W_inf on every model, s <= 12.
void ordering(Outcome& out)
{
    std::vector<std::pair<std::string, std::shared_ptr<CantorModel>>> models;
    models.emplace_back("constant(e)", derived(constant_e()));
    models.emplace_back("power(e,1/2)", derived(power_e_half()));
    models.emplace_back("logarithmic(3,2)", derived(log_3_2()));
    {
        PrecisionScope scope(identity_bits);
        // W_2 at s = 12 reaches c_{2^14}
        models.emplace_back("perturbed",
                            derived(PerturbedFamily{PowerFamily{Real(4), Real("0.3")}, Real("0.3"), 3}, 1u << 14));
        models.emplace_back("gamma=1/6", make_constant_model(Real(1) / 6));
        models.emplace_back("gamma=1/10", make_constant_model(Real(1) / 10));
        models.emplace_back("gamma=0.2", make_constant_model(Real("0.2")));
    }
    std::size_t checks = 0;
    for (const auto& [name, m] : models) {
        const unsigned bits = m->scalar_bits();
        const LogScalar two = LogScalar::from_real(Real(2), bits);
        for (unsigned s = 0; s <= identity_levels; ++s) {
            const LogScalar sup = widom_sup_dyadic(*m, s);
            out.require(compare(sup, sup, two, bits) == Verdict::pass || sup == two,
                        name + " W_inf < 2 at s=" + std::to_string(s));
            ++checks;
            if (m->small_gamma()) {
                const LogScalar l2 = widom_l2_dyadic(*m, s);
                out.require(compare(sup, sup, l2, bits) == Verdict::pass, name + " W_2 > W_inf at s=" + std::to_string(s));
                ++checks;
            }
        }
    }
    out.note << checks << " inequalities on " << models.size() << " models";
}

// 5. Alternation for x0 in {-0.5, 2} and one point per bounded gap of E_1..E_3,
// plus the two tampering checks.
void alternation(Outcome& out)
{
    const auto m = derived(constant_e());
    PrecisionScope scope(model_bits);
    const Real tol(alternation_tol);
    std::vector<Real> x0s{Real("-0.5"), Real(2)};
    for (unsigned s = 1; s <= 3; ++s) {
        const auto lev = m->level(s);
        for (std::size_t j = 0; j + 1 < lev->interval_count(); ++j) {
            const Real x = (lev->right(j) + lev->left(j + 1)) / 2;
            if (m->locate_gap(x, s).s0 == s)
                x0s.push_back(x);
        }
    }
    std::size_t verified = 0, tampered = 0;
    for (const Real& x0 : x0s) {
        const GapLocation gap = m->locate_gap(x0, alternation_levels);
        const unsigned first = gap.is_bounded() ? gap.s0 : 1;
        for (unsigned s = first; s <= alternation_levels; ++s) {
            const std::string tag = "x0=" + to_decimal(x0, 6) + " s=" + std::to_string(s);
            const ResidualPolynomial R = residual_dyadic(*m, s, x0);
            std::vector<Real> pts;
            try {
                pts = alternating_set(*m, s, x0);
            } catch (const AlternationFailure& e) {
                out.require(false, tag + ": " + e.what());
                continue;
            }
            const AlternationCheck c = verify_alternation(pts, x0, R, tol);
            out.require(c.ok, tag + ": " + c.reason);
            verified += c.ok ? 1 : 0;

            auto dropped = pts;
            dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(pts.size() / 2));
            auto mid = pts;
            const auto lev = m->level(s);
            const std::size_t j = lev->interval_count() / 2;
            mid[pts.size() / 2] = (lev->left(j) + lev->right(j)) / 2;
            std::sort(mid.begin(), mid.end());
            const bool caught = !verify_alternation(dropped, x0, R, tol).ok && !verify_alternation(mid, x0, R, tol).ok;
            out.require(caught, tag + ": tampered set accepted");
            tampered += caught ? 1 : 0;
        }
    }
    out.note << x0s.size() << " points, " << verified << " sets verified, " << tampered << " tamper pairs rejected";
}

// 6. Green brackets at x0 = 2.
void green_brackets(Outcome& out)
{
    const auto m = derived(constant_e());
    PrecisionScope scope(model_bits);
    const Real x0 = 2;
    const Real tau = harnack_for(m->locate_gap(x0, 1), x0).hi;
    std::vector<GreenBracket> b;
    for (unsigned s : {2u, 4u, 6u, 8u, 10u})
        b.push_back(green_bracket_at(*m, s, x0, tau));
    for (std::size_t i = 1; i < 4; ++i)
        out.require(b[i].width() < b[i - 1].width(), "width not decreasing at s=" + std::to_string(b[i].s));
    const GreenBracket& deep = b.back();
    out.require(deep.lo > b[0].lo, "level-10 lo does not exceed level-2 lo");
    for (const auto& g : b)
        out.require(deep.lo < g.hi, "level-10 lo above hi at s=" + std::to_string(g.s));
    out.note << "widths s=2..8: ";
    for (std::size_t i = 0; i < 4; ++i)
        out.note << to_decimal(b[i].width(), 3) << (i < 3 ? ", " : "");
    out.note << "; g_K(2) in [" << to_decimal(deep.lo, 12) << ", " << to_decimal(deep.hi, 12) << "]";
}

// 7. Theorem 2 rows at x0 = 2, -0.5 and in the central gap.
void thm2(Outcome& out)
{
    const auto m = derived(constant_e());
    PrecisionScope scope(model_bits);
    const Real eps(green_eps);

    const HarnackBracket exact = harnack_for(m->locate_gap(Real(2), 1), Real(2));
    out.require(abs(exact.lo - sqrt(Real(2))) < pow2(-200) && exact.lo == exact.hi, "tau(2) != sqrt 2");

    const Real gap_x0("0.5");
    const GapLocation gap = m->locate_gap(gap_x0, 3);
    out.require(gap.is_bounded() && gap.s0 <= 3, "0.5 not in a bounded gap of E_1..E_3");
    const HarnackBracket tb = harnack_for(gap, gap_x0);
    out.require(1 <= tb.lo && tb.lo <= tb.hi, "tau bracket not ordered");

    std::size_t certified = 0, informational = 0;
    for (const Real& x0 : {Real(2), Real("-0.5"), gap_x0}) {
        const auto rows = check_thm2(*m, x0, thm2_levels, eps);
        for (const auto& r : rows) {
            if (r.informational) {
                ++informational;
                continue;
            }
            out.require(r.pass(), "x0=" + to_decimal(x0, 4) + " s=" + std::to_string(r.s) + " " +
                                      bound_name(r.bound_kind) + " " + verdict_name(r.verdict));
            certified += r.pass() ? 1 : 0;
        }
    }
    out.note << certified << " certified rows pass (" << informational << " informational rows excluded); tau(0.5) in ["
             << to_decimal(tb.lo, 6) << ", " << to_decimal(tb.hi, 6) << "]";
}

// 8. Oracle: arcsine sqrt 2, Gram minimality, pullback range.
void oracle(Outcome& out)
{
    PrecisionScope scope(identity_bits);
    const auto mu = arcsine_measure(Real(0), Real(1), 64, identity_bits);
    const Real ln_cap = -log(Real(4));
    Real worst = 0;
    for (std::size_t n = 1; n <= 6; ++n)
        worst = std::max(worst, abs(widom_l2_oracle(mu, n, ln_cap).to_real() - sqrt(Real(2))));
    out.require(worst < Real(oracle_tol), "arcsine value off");

    std::mt19937_64 rng(20261018);
    std::uniform_int_distribution<int> deg(1, 8);
    std::uniform_real_distribution<double> u(-1, 1);
    int beaten = 0;
    for (int t = 0; t < minimality_trials; ++t) {
        const std::size_t n = static_cast<std::size_t>(deg(rng));
        const GramResult g = monic_norm(mu, n);
        MonicPoly p = g.minimizer;
        const Real scale = pow2(-static_cast<long>(t % 40));
        for (auto& c : p.coeffs)
            c += Real(u(rng)) * scale;
        beaten += discrete_norm(mu, p) < g.monic_norm ? 1 : 0;
    }
    out.require(beaten == 0, "a random competitor beat the minimizer");

    const Real hi = 2 + Real(pullback_slack);
    Real lo_seen = 10, hi_seen = 0;
    std::vector<std::shared_ptr<CantorModel>> models{derived(constant_e()), derived(power_e_half()),
                                                     make_constant_model(Real(1) / 6)};
    for (const auto& m : models)
        for (unsigned s = 0; s <= 3; ++s) {
            const auto q = pullback_quadrature(*m, s, 64);
            const Real w = widom_l2_oracle(q, std::size_t{1} << s, m->log_cap_level(s).logmag()).to_real();
            out.require(w >= 1 && w <= hi, "pullback value outside [1, 2 + slack] at s=" + std::to_string(s));
            lo_seen = std::min(lo_seen, w);
            hi_seen = std::max(hi_seen, w);
        }
    out.note << "arcsine err " << to_decimal(worst, 3) << "; " << minimality_trials - beaten << "/" << minimality_trials
             << " minimality trials; pullback values in [" << to_decimal(lo_seen, 8) << ", " << to_decimal(hi_seen, 8)
             << "]";
}

// 9. Regularizer properties on random specs, and the spike table.
void regularizer(Outcome& out)
{
    PrecisionScope scope(sequence_bits);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ua(2.72, 12), up(0.05, 0.95), ub(0.1, 4), uamp(0, 0.6);
    const Real slack = pow2(-100);
    // long double evaluation of c_n is good to a few ulps
    const long double oracle_slack = 1e-15L;
    int checked = 0;
    for (int i = 0; i < random_specs; ++i) {
        // parameters are doubles so the long-double oracle sees the same c_n
        const bool power = i % 2 == 0;
        const double a = ua(rng), q = power ? up(rng) : ub(rng), amp = uamp(rng);
        const auto seed = static_cast<std::uint64_t>(i);
        std::variant<PowerFamily, LogarithmicFamily> base;
        if (power)
            base = PowerFamily{Real(a), Real(q)};
        else
            base = LogarithmicFamily{Real(a), Real(q)};
        const SequenceSpec spec = PerturbedFamily{base, Real(amp), seed};
        auto ln_c = [&](std::uint64_t n) {
            const long double ln_n = std::log(static_cast<long double>(n));
            const long double b = power ? std::log(static_cast<long double>(a)) + q * ln_n : std::log(a + q * ln_n);
            const long double xi = static_cast<long double>(detail::unit_draw(seed, n));
            return std::max(b + std::log1p(amp * xi), 1.0L);
        };
        RegularizedSequence reg;
        try {
            reg = regularize(spec, regularize_prefix);
        } catch (const std::exception& e) {
            out.require(false, "spec " + std::to_string(i) + ": " + e.what());
            continue;
        }
        bool ok = true;
        for (std::uint64_t n = 1; n <= regularize_prefix && ok; ++n) {
            const long double c = ln_c(n);
            ok = static_cast<long double>(reg.ln_s(n)) >= c - oracle_slack * (1 + c);
            if (n > 1)
                ok = ok && reg.ln_s(n) >= reg.ln_s(n - 1) && reg.t(n) <= reg.t(n - 1) + slack;
        }
        out.require(ok, "spec " + std::to_string(i) + " violates a property");
        checked += ok ? 1 : 0;
    }

    TableFamily spike;
    spike.values.push_back(exp(Real(2)));
    while (spike.values.size() < regularize_prefix)
        spike.values.push_back(euler_e());
    const auto reg = regularize(spike, regularize_prefix);
    bool exact = true;
    for (std::uint64_t n = 1; n <= regularize_prefix; ++n)
        exact = exact && reg.ln_s(n) == log(spike.values[0]) && reg.s(n) == reg.s(1);
    out.require(exact, "spike table not constant e^2");
    out.note << checked << "/" << random_specs << " random specs regular to n=" << regularize_prefix
             << "; spike table " << (exact ? "exact" : "inexact");
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"theorem 1 rows", thm1},
        {"capacity limit", capacity_limit},
        {"constant gamma identities", constant_identities},
        {"sup/L2 ordering", ordering},
        {"alternation", alternation},
        {"green brackets", green_brackets},
        {"theorem 2 rows", thm2},
        {"oracle equivalence", oracle},
        {"regularizer properties", regularizer},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            run(out);
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += out.ok ? 0 : 1;
        std::printf("[%s] %d %s (%.1fs): %s\n", out.ok ? "PASS" : "FAIL", index, name, secs, out.note.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
