// Shared helpers for the unit tests.
#ifndef CONEIG_TEST_SUPPORT_HPP
#define CONEIG_TEST_SUPPORT_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <random>

#include "coneig/cholesky.hpp"
#include "coneig/kernels.hpp"
#include "coneig/oracle.hpp"

namespace testing
{

inline constexpr double eps = std::numeric_limits<double>::epsilon();

inline double rel_err(std::complex<double> got, std::complex<double> want)
{
    const double d = std::abs(got - want);
    return d == 0.0 ? 0.0 : d / std::abs(want);
}

inline double rel_err(double got, double want)
{
    const double d = std::abs(got - want);
    return d == 0.0 ? 0.0 : d / std::abs(want);
}

// 10^U(lo, hi)
inline double log_uniform(std::mt19937_64& rng, double lo_exp, double hi_exp)
{
    std::uniform_real_distribution<double> u(lo_exp, hi_exp);
    return std::pow(10.0, u(rng));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    return u(rng);
}

inline std::complex<double> random_phase(std::mt19937_64& rng, double r)
{
    return std::polar(r, uniform(rng, -std::numbers::pi, std::numbers::pi));
}

struct CholeskyComparison
{
    bool same_order   = false;
    double max_l_err  = 0.0;
    double max_d_err  = 0.0;
};

// Untruncated structured Cholesky against diagonally pivoted Cholesky of the
// dense matrix at `digits`.
inline CholeskyComparison compare_cholesky(const coneig::CauchyGenerators& g, int digits = 100)
{
    const auto ours = coneig::partial_cholesky(g, 0.0);
    coneig::oracle::MPCholesky ref;
    {
        coneig::mp::PrecisionScope scope(digits);
        ref = coneig::oracle::gecp_cholesky(coneig::oracle::assemble_mp(g));
    }
    CholeskyComparison out;
    out.same_order = ours.perm == ref.perm && ours.m == g.size();
    if (!out.same_order)
    {
        return out;
    }
    const auto L = ref.L.to_double();
    for (Eigen::Index j = 0; j < ours.m; ++j)
    {
        out.max_d_err = std::max(out.max_d_err,
                                 rel_err(ours.D(j), ref.D[static_cast<std::size_t>(j)].to_double()));
        for (Eigen::Index i = j + 1; i < g.size(); ++i)
        {
            out.max_l_err = std::max(out.max_l_err, rel_err(ours.L(i, j), L(i, j)));
        }
    }
    return out;
}

// |C z_j - lambda_j conj z_j| / (lambda_j |z_j|) per column, C at 100 digits
inline Eigen::VectorXd mp_residuals(const coneig::CauchyGenerators& g,
                                    const Eigen::VectorXd& lambdas,
                                    const coneig::MatrixXc& Z)
{
    coneig::mp::PrecisionScope scope(100);
    const auto C = coneig::oracle::assemble_mp(g);
    Eigen::VectorXd out(lambdas.size());
    for (Eigen::Index j = 0; j < lambdas.size(); ++j)
    {
        coneig::mp::MPReal r2(0.0), z2(0.0);
        for (Eigen::Index i = 0; i < C.rows(); ++i)
        {
            coneig::mp::MPComplex acc(coneig::Complex(0.0, 0.0));
            for (Eigen::Index k = 0; k < C.cols(); ++k)
            {
                acc += C(i, k) * coneig::mp::MPComplex(Z(k, j));
            }
            acc -= coneig::mp::MPComplex(std::conj(Z(i, j))) * coneig::mp::MPReal(lambdas(j));
            r2 += coneig::mp::norm(acc);
            z2 += coneig::mp::norm(coneig::mp::MPComplex(Z(i, j)));
        }
        out(j) = (coneig::mp::sqrt(r2 / z2) / coneig::mp::MPReal(lambdas(j))).to_double();
    }
    return out;
}

} // namespace testing

#endif
