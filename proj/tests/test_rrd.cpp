#include <doctest.h>

#include <cmath>

#include "coneig/cholesky.hpp"
#include "coneig/error.hpp"
#include "coneig/oracle.hpp"
#include "coneig/rrd.hpp"
#include "support.hpp"

using namespace coneig;
using testing::eps;
using testing::rel_err;

namespace
{

MatrixXc random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng)
{
    MatrixXc a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
    {
        for (Eigen::Index i = 0; i < rows; ++i)
        {
            a(i, j) = {testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1)};
        }
    }
    return a;
}

// Column j of `got` rescaled so its entry at argmax |want(:, j)| matches.
VectorXc align(const VectorXc& got, const VectorXc& want)
{
    Eigen::Index i0 = 0;
    want.cwiseAbs().maxCoeff(&i0);
    return got * (want(i0) / got(i0));
}

} // namespace

TEST_CASE("pivoted QR: identity and graded diagonal")
{
    auto qr = qr_householder_pivoted(MatrixXc::Identity(4, 4));
    CHECK((qr.R.cwiseAbs() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= eps);
    CHECK(qr.row_perm == std::vector<Eigen::Index>{0, 1, 2, 3});
    CHECK(qr.col_perm == std::vector<Eigen::Index>{0, 1, 2, 3});

    MatrixXc g = MatrixXc::Zero(2, 2);
    g(0, 0)    = 1.0;
    g(1, 1)    = 1e-30;
    qr         = qr_householder_pivoted(g);
    CHECK(qr.col_perm == std::vector<Eigen::Index>{0, 1});
    CHECK(rel_err(std::abs(qr.R(0, 0)), 1.0) <= eps);
    CHECK(rel_err(std::abs(qr.R(1, 1)), 1e-30) <= eps);
    CHECK(qr.R(0, 1) == Complex(0.0, 0.0));
}

TEST_CASE("pivoted QR: random symmetric matrix against 100 digits")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial)
    {
        const MatrixXc a = random_complex(6, 6, rng);
        const MatrixXc g = a * a.transpose();
        const auto qr    = qr_householder_pivoted(g);
        const auto ref   = oracle::qr_pivoted(g, 100);
        REQUIRE(qr.col_perm == ref.col_perm);
        for (Eigen::Index j = 0; j < 6; ++j)
        {
            const double err = (qr.R.col(j).cwiseAbs() - ref.R.col(j).cwiseAbs()).norm() /
                               ref.R.col(j).norm();
            CHECK(err <= 1e-12);
        }
    }
}

TEST_CASE("Jacobi: diagonal and permutation")
{
    MatrixXc r = MatrixXc::Zero(3, 3);
    r.diagonal() << 3.0, 2.0, 1.0;
    auto svd = jacobi_svd_left(r);
    CHECK(svd.sigma(0) == 3.0);
    CHECK(svd.sigma(1) == 2.0);
    CHECK(svd.sigma(2) == 1.0);
    CHECK((svd.U - MatrixXc::Identity(3, 3)).norm() == 0.0);

    MatrixXc p = MatrixXc::Zero(2, 2);
    p(0, 1) = 1.0;
    p(1, 0) = 1.0;
    svd     = jacobi_svd_left(p);
    CHECK(svd.sigma(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(svd.sigma(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Jacobi: graded triangular matrices")
{
    std::mt19937_64 rng(5);
    const Eigen::Index m = 6;
    for (int trial = 0; trial < 5; ++trial)
    {
        MatrixXc r0 = random_complex(m, m, rng).triangularView<Eigen::Upper>();
        for (Eigen::Index i = 0; i < m; ++i)
        {
            r0(i, i) += 2.0;
        }
        Eigen::VectorXd d(m);
        for (Eigen::Index i = 0; i < m; ++i)
        {
            d(i) = std::pow(10.0, -2.0 * static_cast<double>(i));
        }
        const MatrixXc r = d.cwiseAbs2().asDiagonal() * r0;
        const auto svd   = jacobi_svd_left(r);
        const auto ref   = oracle::svd_left(r, 100);

        CHECK(svd.sigma(m - 1) < 1e-18 * svd.sigma(0));
        double sig_err = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
        {
            sig_err = std::max(sig_err, rel_err(svd.sigma(i), ref.sigma(i)));
        }
        CHECK(sig_err <= 1e-12);

        // componentwise bound scaled by the grading
        double worst = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
        {
            const VectorXc u = align(svd.U.col(i), ref.U.col(i));
            const double s   = std::sqrt(ref.sigma(i));
            for (Eigen::Index j = 0; j < m; ++j)
            {
                const double scale = std::min(d(j) / s, s / d(j));
                worst = std::max(worst, std::abs(u(j) - ref.U(j, i)) / scale);
            }
        }
        CHECK(worst <= 1e-8);

        CHECK(svd.max_cosine <= m * eps * (1.0 + 1e-2));
    }
}

TEST_CASE("coneig_rrd: 1 x 1")
{
    MatrixXc x(1, 1);
    x(0, 0) = 1.0;
    Eigen::VectorXd d(1);
    d(0)           = 2.0;
    const auto dec = coneig_rrd(x, d);
    CHECK(dec.lambdas(0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(std::abs(dec.Z(0, 0).imag()) <= eps);
    CHECK(std::abs(std::abs(dec.Z(0, 0)) - 1.0) <= eps);
}

TEST_CASE("coneig_rrd: real symmetric 2 x 2")
{
    // C = [[2, 1], [1, 3]] = L D^2 L^T
    MatrixXc x(2, 2);
    x << 1.0, 0.0, 0.5, 1.0;
    Eigen::VectorXd d(2);
    d << std::sqrt(2.0), std::sqrt(2.5);
    // 3 >= 2 would be picked first by complete pivoting, but any
    // factorization of C works here
    const auto dec = coneig_rrd(x, d);
    const double l0 = (5.0 + std::sqrt(5.0)) / 2.0;
    const double l1 = (5.0 - std::sqrt(5.0)) / 2.0;
    CHECK(rel_err(dec.lambdas(0), l0) <= 1e-14);
    CHECK(rel_err(dec.lambdas(1), l1) <= 1e-14);
    // eigenvector of l0 is (1, l0 - 2) normalized
    VectorXc v(2);
    v << 1.0, l0 - 2.0;
    v.normalize();
    const VectorXc z = align(dec.Z.col(0), v);
    CHECK((z - v).norm() <= 1e-12);
}

TEST_CASE("con_eigvector: delta below the smallest pair")
{
    const auto g    = generators_from_rational(oracle::random_rational(4, 21));
    const auto full = con_eigvector(g, 0.0);
    const double ln = full.lambdas(3);
    const auto dec  = con_eigvector(g, 0.5 * ln);
    REQUIRE(dec.lambdas.size() == 4);
    const auto pc  = partial_cholesky(g, 0.0);
    const auto ref = coneig_rrd(pc.X(), pc.D);
    CHECK(dec.lambdas == ref.lambdas);
    CHECK(dec.Z == ref.Z);
}

TEST_CASE("con_eigvector: truncated pairs agree with the full decomposition")
{
    for (std::uint64_t seed : {31u, 32u, 33u})
    {
        const auto g    = generators_from_rational(oracle::random_rational(60, seed));
        const auto full = con_eigvector(g, 0.0);
        const auto dec  = con_eigvector(g, 1e-8);
        const auto pc   = partial_cholesky(g, 1e-8);
        Eigen::Index above = 0;
        while (above < dec.lambdas.size() && dec.lambdas(above) >= 1e-8)
        {
            ++above;
        }
        REQUIRE(above > 0);
        CHECK(dec.lambdas.size() == above + 1);
        double worst = 0.0;
        for (Eigen::Index j = 0; j < above; ++j)
        {
            worst = std::max(worst, rel_err(dec.lambdas(j), full.lambdas(j)));
        }
        CHECK(worst <= 1e-12);
        CHECK(pc.m <= 2 * above);
    }
}

TEST_CASE("con_eigvector: residual at 100 digits, ordering and phase")
{
    for (std::uint64_t seed : {41u, 42u})
    {
        const auto g   = generators_from_rational(oracle::random_rational(20, seed));
        const auto dec = con_eigvector(g, 0.0, true);
        // A vector stored in double cannot do better than the exact vector
        // rounded to double, whose residual grows like eps |C| / lambda. The
        // computed vectors carry a few hundred ulps of error on top of that.
        const auto gauge = oracle::oracle_coneig(g, 120);
        const auto floor = testing::mp_residuals(g, gauge.lambdas_double(), gauge.Z.to_double());
        const auto res   = testing::mp_residuals(g, dec.lambdas, dec.Z);
        for (Eigen::Index j = 0; j < res.size(); ++j)
        {
            CHECK(res(j) <= std::max(1e-10, 100.0 * floor(j)));
        }
        for (Eigen::Index j = 0; j < dec.lambdas.size(); ++j)
        {
            CHECK(dec.lambdas(j) > 0.0);
            if (j > 0)
            {
                CHECK(dec.lambdas(j) < dec.lambdas(j - 1));
            }
            const Complex zz = (dec.Z.col(j).array() * dec.Z.col(j).array()).sum();
            CHECK(zz.real() > 0.0);
            CHECK(std::abs(zz.imag()) <= 1e-10 * std::abs(zz));
        }
    }
}

TEST_CASE("RRD trace: symmetric G and triangular solve")
{
    const auto g  = generators_from_rational(oracle::random_rational(30, 51));
    const auto pc = partial_cholesky(g, 0.0);
    RRDTrace tr;
    coneig_rrd(pc.X(), pc.D, false, &tr);
    const Eigen::Index m = tr.G.rows();
    double sym = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
    {
        for (Eigen::Index j = 0; j < m; ++j)
        {
            sym = std::max(sym, rel_err(tr.G(i, j), tr.G(j, i)));
        }
    }
    CHECK(sym <= 4 * eps);

    const MatrixXc lhs = tr.R1.triangularView<Eigen::Upper>() * tr.Y1;
    double worst       = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
    {
        worst = std::max(worst, (lhs.col(j) - tr.X1.col(j)).norm() / tr.X1.col(j).norm());
    }
    CHECK(worst <= 1e-13);
    CHECK(tr.svd.max_cosine <= m * eps * (1.0 + 1e-2));
}

TEST_CASE("relative gaps")
{
    Eigen::VectorXd l(3);
    l << 4.0, 2.0, 1.0;
    const auto r = relative_gaps(l);
    CHECK(r(0) == doctest::Approx(1.0 / 3.0));
    CHECK(r(1) == doctest::Approx(1.0 / 3.0));
    CHECK(r(2) == doctest::Approx(1.0 / 3.0));
}
