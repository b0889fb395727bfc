#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "coneig/cauchy.hpp"
#include "coneig/error.hpp"
#include "coneig/expsum.hpp"
#include "coneig/oracle.hpp"
#include "support.hpp"

using namespace coneig;
using testing::eps;
using testing::rel_err;

namespace
{

RationalFunction single(double re_tau, double im_tau, Complex alpha)
{
    RationalFunction f;
    f.terms.push_back({ExponentPole::from_exponent(re_tau, im_tau), alpha});
    return f;
}

} // namespace

TEST_CASE("entry of a single pole pair")
{
    // gamma = 1/2, alpha = 1: 1 / (1 - 1/4)
    auto g = generators_from_rational(single(std::numbers::ln2, 0.0, 1.0));
    CHECK(rel_err(eval_entry(g, 0, 0), Complex(4.0 / 3.0, 0.0)) <= 2 * eps);

    // alpha = i, tau = 1: |sqrt(i)|^2 / (1 - e^-2)
    g = generators_from_rational(single(1.0, 0.0, Complex(0.0, 1.0)));
    CHECK(rel_err(eval_entry(g, 0, 0), Complex(1.0 / -std::expm1(-2.0), 0.0)) <= 4 * eps);
    CHECK(std::abs(g.s(0) - std::polar(1.0, std::numbers::pi / 4)) <= 2 * eps);
}

TEST_CASE("dense C is Hermitian and positive definite")
{
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        const auto f = oracle::random_rational(8, seed);
        const auto g = generators_from_rational(f);
        const MatrixXc C = assemble(g);
        double worst     = 0.0;
        for (Eigen::Index i = 0; i < 8; ++i)
        {
            for (Eigen::Index j = 0; j < 8; ++j)
            {
                worst = std::max(worst, rel_err(C(i, j), std::conj(C(j, i))));
            }
        }
        CHECK(worst <= 4 * eps);

        // smallest eigenvalue at 100 digits
        oracle::MPCholesky ch;
        {
            mp::PrecisionScope scope(100);
            CHECK_NOTHROW(ch = oracle::gecp_cholesky(oracle::assemble_mp(g)));
        }
        for (const auto& d : ch.D)
        {
            CHECK(d.sign() > 0);
        }
    }
}

TEST_CASE("entries of clustered functions against 100 digits")
{
    for (unsigned k = 0; k < 3; ++k)
    {
        const auto f = clustered_function(k);
        const auto g = generators_from_rational(f);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < g.size(); i += 3)
        {
            for (Eigen::Index j = 0; j < g.size(); j += 2)
            {
                worst = std::max(worst, rel_err(eval_entry(g, i, j), oracle::eval_entry(g, i, j)));
            }
        }
        CHECK(worst <= 16 * eps);
    }
}

TEST_CASE("entries with re_tau down to 1e-14")
{
    std::mt19937_64 rng(41);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial)
    {
        RationalFunction f;
        const double angle = testing::uniform(rng, 0.0, two_pi);
        for (int i = 0; i < 2; ++i)
        {
            f.terms.push_back({ExponentPole::from_exponent(testing::log_uniform(rng, -14, 0),
                                                           angle + testing::uniform(rng, -1e-9, 1e-9)),
                               testing::random_phase(rng, testing::uniform(rng, 0.1, 10.0))});
        }
        const auto g = generators_from_rational(f);
        for (Eigen::Index i = 0; i < 2; ++i)
        {
            for (Eigen::Index j = 0; j < 2; ++j)
            {
                worst = std::max(worst, rel_err(eval_entry(g, i, j), oracle::eval_entry(g, i, j)));
            }
        }
    }
    CHECK(worst <= 16 * eps);
}

TEST_CASE("validate")
{
    SUBCASE("valid input gives an empty report")
    {
        auto f = oracle::random_rational(5, 9);
        CHECK(validate(f).ok());
        CHECK_NOTHROW(require_valid(f));
    }
    SUBCASE("im_tau is normalized")
    {
        auto f = single(0.5, -1.0, 1.0);
        CHECK(validate(f).ok());
        CHECK(f.terms[0].pole.im_tau == doctest::Approx(two_pi - 1.0).epsilon(1e-15));
    }
    SUBCASE("duplicate pole")
    {
        auto f = single(0.5, 1.0, 1.0);
        f.terms.push_back({ExponentPole{0.5, 1.0 + two_pi}, 2.0});
        const auto rep = validate(f);
        REQUIRE(rep.issues.size() == 1);
        CHECK(rep.issues[0].kind == Diagnostic::Kind::DuplicatePole);
        CHECK(rep.issues[0].index == 0);
        CHECK(rep.issues[0].other == 1);
        CHECK_THROWS_AS(require_valid(f), Error);
    }
    SUBCASE("re_tau = 0")
    {
        auto f         = single(0.0, 1.0, 1.0);
        const auto rep = validate(f);
        REQUIRE(rep.issues.size() == 1);
        CHECK(rep.issues[0].kind == Diagnostic::Kind::NonPositiveReTau);
        try
        {
            require_valid(f);
            FAIL("no exception");
        }
        catch (const Error& e)
        {
            CHECK(e.code() == ErrorCode::NotPositive);
        }
    }
    SUBCASE("zero residue, empty and non-finite")
    {
        auto f = single(1.0, 1.0, 0.0);
        CHECK(validate(f).issues.at(0).kind == Diagnostic::Kind::ZeroResidue);
        RationalFunction empty;
        CHECK(validate(empty).issues.at(0).kind == Diagnostic::Kind::Empty);
        auto bad = single(std::nan(""), 1.0, 1.0);
        CHECK(validate(bad).issues.at(0).kind == Diagnostic::Kind::NonFinite);
    }
}

TEST_CASE("evaluation on the circle is real for real alpha0")
{
    const auto f = oracle::random_rational(6, 17);
    for (double theta : {0.0, 0.3, 2.0, 5.9})
    {
        const Complex v = evaluate_on_circle(f, theta);
        CHECK(std::abs(v.imag()) <= 1e-13 * std::abs(v));
    }
}
