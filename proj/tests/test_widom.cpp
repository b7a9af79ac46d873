#include <widomk/widom.hpp>

#include <catch_amalgamated.hpp>

using namespace widomk;

namespace {

constexpr unsigned bits = 256;

std::shared_ptr<CantorModel> sixth()
{
    PrecisionScope scope(bits);
    return make_constant_model(Real(1) / 6);
}

std::shared_ptr<CantorModel> constant_e()
{
    PrecisionScope scope(bits);
    return make_derived_model(ConstantFamily{euler_e()}, 4096);
}

// T_{2^s}(x) = P_{2^s}(x) + r_s/2 straight from the recursion, with r from gamma.
Real t_direct(const CantorModel& m, unsigned s, const Real& x, Real& r_s)
{
    Real p = x - 1, r = 1;
    for (unsigned k = 0; k < s; ++k) {
        if (k > 0)
            r = m.gamma().value(k) * r * r;
        p = p * (p + r);
    }
    r_s = s == 0 ? Real(1) : m.gamma().value(s) * r * r;
    return p + r_s / 2;
}

}  // namespace

TEST_CASE("constant one-sixth gives W_inf = 3 and W_2 = sqrt 6", "[widom]")
{
    const auto m = sixth();
    PrecisionScope scope(bits);
    for (unsigned s = 0; s <= 12; ++s) {
        CHECK(abs(widom_sup_dyadic(*m, s).to_real() - 3) < pow2(-230));
        CHECK(abs(widom_l2_dyadic(*m, s).to_real() - sqrt(Real(6))) < pow2(-230));
    }
}

TEST_CASE("constant-e Widom factors in closed form", "[widom]")
{
    const auto m = constant_e();
    PrecisionScope scope(bits);
    // gamma = 1/(6e) throughout: W_inf = 1/(2 gamma) = 3e, W_2 = 3e sqrt(1 - 1/(3e))
    const Real e = euler_e();
    const Real tol = pow2(-static_cast<long>(sequence_bits) + 8);
    for (unsigned s = 0; s <= 10; ++s) {
        CHECK(abs(widom_sup_dyadic(*m, s).to_real() / (3 * e) - 1) < tol * pow2(s));
        CHECK(abs(widom_l2_dyadic(*m, s).to_real() / (3 * e * sqrt(1 - 1 / (3 * e))) - 1) < tol);
    }
}

TEST_CASE("L2 Widom factor needs small gamma", "[widom]")
{
    PrecisionScope scope(bits);
    const auto m = make_constant_model(Real("0.2"));
    CHECK_THROWS_AS(widom_l2_dyadic(*m, 1), std::domain_error);
    CHECK(widom_sup_dyadic(*m, 3) >= LogScalar::from_real(Real(2), bits));
}

TEST_CASE("dyadic blocks", "[widom]")
{
    CHECK(dyadic_block(1) == 0);
    CHECK(dyadic_block(2) == 1);
    CHECK(dyadic_block(3) == 1);
    CHECK(dyadic_block(4096) == 12);
    CHECK(dyadic_block(4095) == 11);
    CHECK_THROWS_AS(dyadic_block(0), std::invalid_argument);
}

TEST_CASE("residual polynomial against the recursion", "[widom]")
{
    const auto m = constant_e();
    PrecisionScope scope(bits);
    for (const char* x : {"2", "-0.5", "0.5"}) {
        const Real x0(x);
        for (unsigned s = 1; s <= 6; ++s) {
            Real r_s;
            const Real t0 = t_direct(*m, s, x0, r_s);
            const ResidualPolynomial R = residual_dyadic(*m, s, x0);
            CHECK(R.degree == (std::uint64_t{1} << s));
            CHECK(abs(R.T_at_x0.to_real() / t0 - 1) < pow2(-200));
            CHECK(abs(R.sup_norm.to_real() - r_s / 2 / abs(t0)) < pow2(-200) * R.sup_norm.to_real());
            CHECK(abs(R(x0).to_real() - 1) < pow2(-200));
        }
    }
    CHECK_THROWS_AS(residual_dyadic(*m, 0, Real(2)), std::invalid_argument);
    CHECK_THROWS_AS(residual_dyadic(*m, 2, Real(0)), std::domain_error);
}

TEST_CASE("residual sup norm on a dense sample of E_s", "[widom]")
{
    const auto m = sixth();
    PrecisionScope scope(bits);
    const unsigned s = 3;
    const ResidualPolynomial R = residual_dyadic(*m, s, Real(2));
    const auto lev = m->level(s);
    Real worst = 0;
    for (std::size_t j = 0; j < lev->interval_count(); ++j)
        for (int i = 0; i <= 200; ++i) {
            const Real x = lev->left(j) + (lev->right(j) - lev->left(j)) * i / 200;
            worst = std::max(worst, abs(R(x).to_real()));
        }
    CHECK(abs(worst / R.sup_norm.to_real() - 1) < pow2(-150));
}

TEST_CASE("alternation holds and detects tampering", "[widom]")
{
    const auto m = constant_e();
    PrecisionScope scope(bits);
    const Real tol("1e-20");
    for (const char* x : {"2", "-0.5", "0.5"}) {
        const Real x0(x);
        for (unsigned s = 1; s <= 6; ++s) {
            const auto pts = alternating_set(*m, s, x0);
            const ResidualPolynomial R = residual_dyadic(*m, s, x0);
            REQUIRE(pts.size() == R.degree + 1);
            CHECK(verify_alternation(pts, x0, R, tol).ok);

            auto dropped = pts;
            dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(dropped.size() / 2));
            CHECK_FALSE(verify_alternation(dropped, x0, R, tol).ok);

            // an interval midpoint has |R| < ||R||
            auto mid = pts;
            const auto lev = m->level(s);
            mid[0] = (lev->left(0) + lev->right(0)) / 2;
            std::sort(mid.begin(), mid.end());
            CHECK_FALSE(verify_alternation(mid, x0, R, tol).ok);
        }
    }
}

TEST_CASE("Theorem 1 rows for constant e", "[widom]")
{
    const auto m = constant_e();
    const auto rows = check_thm1(*m, 256);
    CHECK(rows.size() == 8 + 2 * 256);
    for (const auto& r : rows)
        CHECK(r.pass());
}

TEST_CASE("Theorem 1 needs a derived gamma", "[widom]")
{
    const auto m = sixth();
    CHECK_THROWS_AS(check_thm1(*m, 16), CertificateError);
}

TEST_CASE("Theorem 2 rows at an unbounded gap", "[widom]")
{
    const auto m = constant_e();
    PrecisionScope scope(bits);
    const auto rows = check_thm2(*m, Real(2), 6, Real("1e-12"));
    REQUIRE(rows.size() == 6 * 4);
    for (const auto& r : rows) {
        CHECK(r.value_lo <= r.value_hi);
        // tau = sqrt 2 exactly
        CHECK(abs(r.exponent_lo - 1 / sqrt(Real(2))) < pow2(-200));
        if (!r.informational)
            CHECK(r.pass());
    }
}

TEST_CASE("invariants on a derived model", "[widom]")
{
    PrecisionScope scope(bits);
    const auto m = make_derived_model(PowerFamily{euler_e(), Real("0.5")}, 4096);
    const auto res = check_invariants(*m, 8, {Real(2), Real("-0.5"), Real("0.5")});
    CHECK(res.size() > 40);
    for (const auto& r : res) {
        INFO(r.name << " s=" << r.s << " " << r.detail);
        CHECK(r.pass);
    }
}

TEST_CASE("certified comparison", "[widom]")
{
    PrecisionScope scope(bits);
    const auto v = [](const char* x) { return LogScalar::from_real(Real(x), bits); };
    CHECK(compare(v("2"), v("2"), v("1"), bits) == Verdict::pass);
    CHECK(compare(v("0.5"), v("0.6"), v("1"), bits) == Verdict::fail);
    CHECK(compare(v("0.5"), v("2"), v("1"), bits) == Verdict::undecided);
    CHECK(compare(v("1"), v("1"), v("1"), bits) == Verdict::undecided);
}
