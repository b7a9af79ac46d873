#ifndef WIDOMK_CLI_COMMANDS_HPP
#define WIDOMK_CLI_COMMANDS_HPP

#include "../cantor.hpp"
#include "../oracle.hpp"
#include "../potential.hpp"
#include "../widom.hpp"
#include "config.hpp"
#include "report.hpp"

#include <iostream>
#include <string>
#include <vector>

namespace widomk::cli {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_exhausted = 3 };

struct CommandResult {
    int exit_code = exit_ok;
    std::vector<std::string> files;
    std::string summary;
};

/// Explicit endpoint tables are built to this level at most; deeper levels
/// are reported through their scalars (r_s, Cap(E_s)) only.
inline constexpr unsigned explicit_level_limit = 13;

namespace detail {

struct Context {
    RunConfig cfg;
    std::shared_ptr<CantorModel> model;
    unsigned bits;
    ReportWriter out;

    explicit Context(const RunConfig& c)
        : cfg((validate(c), c)), model(build_model(c)), bits(model->scalar_bits()), out(c, model->scalar_bits())
    {
        out.write_config();
    }

    Cell num(const Real& x) const { return cell(with_bits(x, bits)); }
    Cell num(const LogScalar& v) const { return num(v.to_real()); }

    std::vector<Real> x0s() const
    {
        std::vector<Real> xs;
        for (const auto& t : cfg.x0)
            xs.push_back(parse_number(t, value_bits(cfg)));
        if (xs.empty())
            for (const char* t : {"2", "-0.5", "0.5"})
                xs.push_back(parse_number(t, value_bits(cfg)));
        return xs;
    }

    Real eps_green() const { return parse_number(cfg.eps_green, value_bits(cfg)); }

    void require_capacity() const
    {
        model->log_cap_K(parse_number(cfg.eps_cap, value_bits(cfg)));
    }

    std::string short_num(const Real& x) const { return to_decimal(x, 17); }
};

inline Table widom_table(const std::string& name, const Context& ctx, const std::vector<WidomRow>& rows)
{
    Table t{name,
            {"kind", "bound_kind", "n", "s", "x0", "value_lo", "value_hi", "bound", "exponent_lo", "exponent_hi",
             "green_level", "verdict", "pass", "informational"},
            {}};
    for (const auto& r : rows) {
        t.add({cell(kind_name(r.kind)), cell(bound_name(r.bound_kind)), cell(r.n), cell(r.s),
               r.x0 ? ctx.num(*r.x0) : cell(""), ctx.num(r.value_lo), ctx.num(r.value_hi), ctx.num(r.bound),
               ctx.num(r.exponent_lo), ctx.num(r.exponent_hi), cell(r.green_level), cell(verdict_name(r.verdict)),
               cell(r.pass()), cell(r.informational)});
    }
    return t;
}

inline int tally(const std::vector<WidomRow>& rows, std::string& summary)
{
    std::size_t pass = 0, fail = 0, open = 0;
    for (const auto& r : rows) {
        if (r.informational)
            continue;
        if (r.verdict == Verdict::pass)
            ++pass;
        else if (r.verdict == Verdict::fail)
            ++fail;
        else
            ++open;
    }
    summary += std::to_string(pass) + " pass, " + std::to_string(fail) + " fail, " + std::to_string(open) +
               " undecided\n";
    if (fail)
        return exit_failure;
    return open ? exit_exhausted : exit_ok;
}

}  // namespace detail

inline CommandResult cmd_build(const RunConfig& cfg)
{
    detail::Context ctx(cfg);
    const CantorModel& m = *ctx.model;
    CommandResult res;
    PrecisionScope scope(ctx.bits);

    Table gamma{"gamma", {"n", "gamma"}, {}};
    for (unsigned n = 1; n <= std::min(m.gamma().known(), cfg.s_max + 1); ++n)
        gamma.add({cell(n), ctx.num(m.gamma().value(n))});
    ctx.out.write(gamma);

    Table levels{"levels_summary", {"s", "bits", "ln_r", "cap_level", "intervals", "explicit"}, {}};
    for (unsigned s = 0; s <= cfg.s_max; ++s) {
        const bool explicit_level = s <= explicit_level_limit;
        if (explicit_level)
            m.level(s);
        levels.add({cell(s), cell(m.policy().bits(s)), ctx.num(m.log_r(s).logmag()),
                    ctx.num(exp(m.log_cap_level(s).logmag())), cell(std::uint64_t{1} << s), cell(explicit_level)});
    }
    ctx.out.write(levels);

    const CapacityEstimate& cap = m.capacity();
    Table summary{"model", {"quantity", "value"}, {}};
    summary.add({cell("derived"), cell(m.gamma().is_derived())});
    summary.add({cell("small_gamma"), cell(m.small_gamma())});
    summary.add({cell("ln_cap_K"), ctx.num(cap.log_cap)});
    summary.add({cell("cap_K"), ctx.num(exp(cap.log_cap))});
    summary.add({cell("cap_eps"), ctx.num(cap.eps)});
    summary.add({cell("s_max"), cell(cfg.s_max)});
    ctx.out.write(summary);

    res.summary = "Cap(K) = " + ctx.short_num(exp(cap.log_cap)) + " (+- " + to_decimal(cap.eps, 3) +
                  " in ln), small gamma: " + (m.small_gamma() ? "yes" : "no") + ", levels 0.." +
                  std::to_string(cfg.s_max) + "\n";
    res.files = ctx.out.files();
    return res;
}

inline CommandResult cmd_verify(const RunConfig& cfg, const std::string& which)
{
    if (which != "thm1" && which != "thm2" && which != "invariants")
        throw ConfigError("verify: expected thm1, thm2 or invariants, got '" + which + "'");
    RunConfig effective = cfg;
    if (which == "thm1" && effective.sequence)
        effective.prefix = std::max(effective.prefix, effective.n_max);
    detail::Context ctx(effective);
    const CantorModel& m = *ctx.model;
    CommandResult res;
    PrecisionScope scope(ctx.bits);

    if (which == "thm1") {
        if (!m.gamma().is_derived())
            throw ConfigError("verify thm1: needs a sequence, not a direct gamma");
        ctx.require_capacity();
        const auto rows = check_thm1(m, cfg.n_max);
        ctx.out.write(detail::widom_table("thm1", ctx, rows));
        res.summary = "thm1 (n <= " + std::to_string(cfg.n_max) + "): ";
        res.exit_code = detail::tally(rows, res.summary);
    } else if (which == "thm2") {
        ctx.require_capacity();
        std::vector<WidomRow> all;
        for (const Real& x0 : ctx.x0s()) {
            const auto rows = check_thm2(m, x0, cfg.s, ctx.eps_green());
            all.insert(all.end(), rows.begin(), rows.end());
        }
        ctx.out.write(detail::widom_table("thm2", ctx, all));
        res.summary = "thm2 (s <= " + std::to_string(cfg.s) + "): ";
        res.exit_code = detail::tally(all, res.summary);
    } else {
        auto inv = check_invariants(m, cfg.s, ctx.x0s());
        // oracle chain on E_s: 1 <= W_2(mu_{E_s}, 2^s) <= 2 up to quadrature slack
        for (unsigned s = 0; s <= std::min(cfg.s, 3u); ++s) {
            const QuadMeasure mu = pullback_quadrature(m, s, cfg.oracle_nodes);
            const LogScalar w = widom_l2_oracle(mu, std::size_t{1} << s, m.log_cap_level(s).logmag());
            const double v = w.to_double();
            inv.push_back({"oracle 1 <= W2(E_s) <= 2", s, v >= 1 - 1e-20 && v <= 2 + 1e-6, std::to_string(v)});
        }
        Table t{"invariants", {"invariant", "s", "pass", "detail"}, {}};
        std::size_t failed = 0;
        for (const auto& r : inv) {
            t.add({cell(r.name), cell(r.s), cell(r.pass), cell(r.detail)});
            failed += r.pass ? 0 : 1;
        }
        ctx.out.write(t);
        res.summary = "invariants: " + std::to_string(inv.size() - failed) + " pass, " + std::to_string(failed) +
                      " fail\n";
        res.exit_code = failed ? exit_failure : exit_ok;
    }
    res.files = ctx.out.files();
    return res;
}

inline CommandResult cmd_report(const RunConfig& cfg, const std::string& quantity)
{
    detail::Context ctx(cfg);
    const CantorModel& m = *ctx.model;
    CommandResult res;
    PrecisionScope scope(ctx.bits);
    std::vector<std::vector<std::string>> plot;

    if (quantity == "widom-sup") {
        Table t{"widom_sup", {"s", "n", "W_sup", "ln_W_sup"}, {}};
        for (unsigned s = 0; s <= cfg.s; ++s) {
            const LogScalar w = widom_sup_dyadic(m, s);
            t.add({cell(s), cell(std::uint64_t{1} << s), ctx.num(w), ctx.num(w.logmag())});
            plot.push_back({std::to_string(std::uint64_t{1} << s), ctx.short_num(w.logmag())});
        }
        ctx.out.write(t);
        ctx.out.write_plot("widom_sup", {"n", "ln_W_sup"}, plot);
    } else if (quantity == "widom-l2") {
        Table t{"widom_l2", {"n", "block_s", "W2_lower", "ln_W2_lower"}, {}};
        std::vector<LogScalar> dyadic;
        for (unsigned s = 0; (std::uint64_t{1} << s) <= cfg.n_max; ++s)
            dyadic.push_back(widom_l2_dyadic(m, s));
        for (std::uint64_t n = 1; n <= cfg.n_max; ++n) {
            const unsigned s = dyadic_block(n);
            t.add({cell(n), cell(s), ctx.num(dyadic[s]), ctx.num(dyadic[s].logmag())});
            plot.push_back({std::to_string(n), ctx.short_num(dyadic[s].logmag())});
        }
        ctx.out.write(t);
        ctx.out.write_plot("widom_l2", {"n", "ln_W2_lower"}, plot);
    } else if (quantity == "widom-res") {
        ctx.require_capacity();
        Table t{"widom_res", {"x0", "s", "n", "W_lo", "W_hi", "green_level", "sup_norm"}, {}};
        const Real eps = ctx.eps_green();
        for (const Real& x0 : ctx.x0s()) {
            const GapLocation gap = m.locate_gap(x0, m.s_max());
            const HarnackBracket tau = harnack_for(gap, x0);
            const unsigned first = gap.is_bounded() ? std::max(gap.s0, 1u) : 1u;
            for (unsigned s = first; s <= cfg.s; ++s) {
                const ResidualPolynomial R = residual_dyadic(m, s, x0);
                ResidualWidom w;
                unsigned level = s;
                for (;; ++level) {
                    w = residual_widom_from(R, green_bracket_at(m, level, x0, tau.hi));
                    if (w.hi.logmag() - w.lo.logmag() <= eps || level >= green_depth_limit)
                        break;
                }
                t.add({ctx.num(x0), cell(s), cell(R.degree), ctx.num(w.lo), ctx.num(w.hi), cell(level),
                       ctx.num(R.sup_norm)});
                plot.push_back({ctx.short_num(x0), std::to_string(R.degree), ctx.short_num(w.lo.logmag()),
                                ctx.short_num(w.hi.logmag())});
            }
        }
        ctx.out.write(t);
        ctx.out.write_plot("widom_res", {"x0", "n", "ln_W_lo", "ln_W_hi"}, plot);
    } else if (quantity == "green") {
        ctx.require_capacity();
        Table t{"green", {"x0", "s", "g_lo", "g_hi", "tau_lo", "tau_hi", "method"}, {}};
        for (const Real& x0 : ctx.x0s()) {
            const GapLocation gap = m.locate_gap(x0, m.s_max());
            const HarnackBracket tau = harnack_for(gap, x0);
            for (unsigned s = gap.is_bounded() ? gap.s0 : 0; s <= cfg.s; ++s) {
                const GreenBracket g = green_bracket_at(m, s, x0, tau.hi);
                t.add({ctx.num(x0), cell(s), ctx.num(g.lo), ctx.num(g.hi), ctx.num(tau.lo), ctx.num(tau.hi),
                       cell(method_name(tau.method))});
            }
        }
        ctx.out.write(t);
    } else if (quantity == "harnack") {
        Table t{"harnack", {"x0", "tau_lo", "tau_hi", "exponent_lo", "exponent_hi", "method", "alpha", "beta"}, {}};
        for (const Real& x0 : ctx.x0s()) {
            const GapLocation gap = m.locate_gap(x0, m.s_max());
            const HarnackBracket tau = harnack_for(gap, x0);
            t.add({ctx.num(x0), ctx.num(tau.lo), ctx.num(tau.hi), ctx.num(tau.exponent_lo()),
                   ctx.num(tau.exponent_hi()), cell(method_name(tau.method)),
                   gap.is_bounded() ? ctx.num(gap.alpha) : cell(""), gap.is_bounded() ? ctx.num(gap.beta) : cell("")});
        }
        ctx.out.write(t);
    } else if (quantity == "levels") {
        const auto lev = m.level(cfg.s);
        Table t{"levels", {"s", "j", "left", "right"}, {}};
        for (std::size_t j = 0; j < lev->interval_count(); ++j)
            t.add({cell(cfg.s), cell(static_cast<std::uint64_t>(j + 1)), ctx.num(lev->left(j)), ctx.num(lev->right(j))});
        ctx.out.write(t);
    } else {
        throw ConfigError("report: unknown quantity '" + quantity +
                          "' (widom-sup, widom-l2, widom-res, green, harnack, levels)");
    }
    res.summary = "report " + quantity + " written to " + cfg.output.dir + "\n";
    res.files = ctx.out.files();
    return res;
}

/// Runs a command and maps library errors onto exit codes.
template <class F>
int run_guarded(F&& f, std::ostream& out, std::ostream& err)
{
    try {
        const CommandResult r = f();
        out << r.summary;
        for (const auto& file : r.files)
            out << "  " << file << "\n";
        return r.exit_code;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const InvalidGamma& e) {
        err << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const PrecisionExhausted& e) {
        err << "precision exhausted: " << e.what() << "\n";
        return exit_exhausted;
    } catch (const DepthExhausted& e) {
        err << "depth exhausted: " << e.what() << "\n";
        return exit_exhausted;
    } catch (const CertificateError& e) {
        err << "certificate unavailable: " << e.what() << "\n";
        return exit_exhausted;
    } catch (const HorizonExhausted& e) {
        err << "regularization horizon exhausted: " << e.what() << "\n";
        return exit_exhausted;
    } catch (const SequenceExhausted& e) {
        err << "sequence exhausted: " << e.what() << "\n";
        return exit_exhausted;
    } catch (const std::exception& e) {
        // bracketing, alternation and degenerate-gap failures are numerical
        err << "error: " << e.what() << "\n";
        return exit_exhausted;
    }
}

}  // namespace widomk::cli

#endif  // WIDOMK_CLI_COMMANDS_HPP
