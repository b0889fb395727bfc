#include <doctest.h>

#include <cmath>

#include "coneig/error.hpp"
#include "coneig/oracle.hpp"
#include "coneig/rrd.hpp"
#include "support.hpp"

using namespace coneig;

namespace
{

// |a - b| / |b| at the current precision
double mp_rel(const mp::MPReal& a, const mp::MPReal& b)
{
    return (mp::abs(a - b) / mp::abs(b)).to_double();
}

} // namespace

TEST_CASE("1 x 1 is exact")
{
    RationalFunction f;
    f.terms.push_back({ExponentPole::from_exponent(1.0, 2.0), Complex(3.0, 4.0)});
    const auto g   = generators_from_rational(f);
    const auto gz  = oracle::oracle_coneig(g, 100);
    mp::PrecisionScope scope(100);
    // |alpha| / (1 - e^-2)
    const mp::MPReal want = mp::MPReal(5.0) / -mp::expm1(mp::MPReal(-2.0));
    CHECK(mp_rel(gz.lambdas[0], want) <= 1e-95);
}

TEST_CASE("real symmetric 2 x 2 against the quadratic formula")
{
    RationalFunction f;
    f.terms.push_back({ExponentPole::from_exponent(0.3, 0.0), Complex(1.0, 0.0)});
    f.terms.push_back({ExponentPole::from_exponent(0.9, 0.0), Complex(2.5, 0.0)});
    const auto g  = generators_from_rational(f);
    const auto gz = oracle::oracle_coneig(g, 100);

    mp::PrecisionScope scope(100);
    const auto C        = oracle::assemble_mp(g);
    const mp::MPReal a  = C(0, 0).re;
    const mp::MPReal d  = C(1, 1).re;
    const mp::MPReal b  = C(0, 1).re;
    const mp::MPReal hm = (a - d) / mp::MPReal(2.0);
    const mp::MPReal r  = mp::sqrt(hm * hm + b * b);
    const mp::MPReal mid = (a + d) / mp::MPReal(2.0);
    CHECK(mp_rel(gz.lambdas[0], mid + r) <= 1e-40);
    CHECK(mp_rel(gz.lambdas[1], mid - r) <= 1e-40);
}

TEST_CASE("residual and self-consistency")
{
    const auto g  = generators_from_rational(oracle::random_rational(12, 4));
    const auto lo = oracle::oracle_coneig(g, 60);
    const auto hi = oracle::oracle_coneig(g, 120);
    CHECK(lo.max_residual <= 1e-30);
    CHECK(hi.max_residual <= 1e-60);
    mp::PrecisionScope scope(120);
    double worst = 0.0;
    for (std::size_t j = 0; j < lo.lambdas.size(); ++j)
    {
        worst = std::max(worst, mp_rel(lo.lambdas[j], hi.lambdas[j]));
    }
    CHECK(worst <= 1e-30);
}

TEST_CASE("ensemble is seeded and within its distributions")
{
    const auto f1 = oracle::random_rational(30, 99);
    const auto f2 = oracle::random_rational(30, 99);
    REQUIRE(f1.size() == 30);
    for (std::size_t i = 0; i < 30; ++i)
    {
        CHECK(f1.terms[i].pole == f2.terms[i].pole);
        CHECK(f1.terms[i].residue == f2.terms[i].residue);
        CHECK(f1.terms[i].pole.re_tau > 0.0);
        CHECK(std::abs(f1.terms[i].residue) <= 10.0);
    }
}

TEST_CASE("error statistics")
{
    const auto g  = generators_from_rational(oracle::random_rational(10, 6));
    const auto gz = oracle::oracle_coneig(g, 100);

    SUBCASE("the gauge itself has zero error")
    {
        ConEigDecomposition dec;
        dec.lambdas  = gz.lambdas_double();
        dec.Z        = gz.Z.to_double();
        const auto st = oracle::oracle_error_stats(dec, gz);
        CHECK(st.max_lambda == 0.0);
        CHECK(st.max_vector == 0.0);
    }
    SUBCASE("column phases are removed, perturbations are not")
    {
        ConEigDecomposition dec;
        dec.lambdas = gz.lambdas_double();
        dec.Z       = gz.Z.to_double();
        dec.Z.col(2) *= std::polar(1.0, 0.7);
        dec.lambdas(4) *= 1.0 + 1e-9;
        dec.Z(0, 5) += 1e-7 * dec.Z.col(5).cwiseAbs().maxCoeff();
        const auto st = oracle::oracle_error_stats(dec, gz);
        CHECK(st.vector_err(2) <= 4 * testing::eps);
        CHECK(st.lambda_err(4) == doctest::Approx(1e-9).epsilon(1e-6));
        CHECK(st.vector_err(5) > 1e-9);
    }
    SUBCASE("double decomposition")
    {
        const auto st = oracle::oracle_error_stats(con_eigvector(g, 0.0), gz);
        CHECK(st.max_lambda <= 1e-10);
        CHECK(st.max_vector <= 1e-10);
    }
}

TEST_CASE("residue solve: trivial systems")
{
    RationalFunction f;
    f.terms.push_back({ExponentPole::from_exponent(0.5, 1.0), Complex(1.0, 2.0)});
    f.terms.push_back({ExponentPole::from_exponent(1.5, 4.0), Complex(-0.5, 0.3)});
    // eta = 0 needs zeta = +inf; a huge re(zeta) puts eta below 1e-300
    const auto beta = oracle::solve_residues({ExponentPole{700.0, 0.0}}, f, 50);
    CHECK(testing::rel_err(beta(0), Complex(0.5, 2.3)) <= 1e-14);
}
