///
/// \file oracle.hpp
///
/// Arbitrary-precision computations: reference oracles for the tests, and the
/// refinement steps the reduction runs on a single con-eigenpair and its
/// roots. Every routine here trades speed for digits.
///
#ifndef CONEIG_ORACLE_HPP
#define CONEIG_ORACLE_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "coneig/expsum.hpp"
#include "coneig/mp.hpp"
#include "coneig/rrd.hpp"

namespace coneig::oracle
{

inline constexpr int default_digits = 300;

/// Dense column-major matrix of MPComplex.
class MPMatrix
{
public:
    MPMatrix() = default;
    MPMatrix(Eigen::Index rows, Eigen::Index cols)
        : m_rows(rows), m_cols(cols), m_data(static_cast<std::size_t>(rows * cols))
    {
    }
    Eigen::Index rows() const
    {
        return m_rows;
    }
    Eigen::Index cols() const
    {
        return m_cols;
    }
    mp::MPComplex& operator()(Eigen::Index i, Eigen::Index j)
    {
        return m_data[static_cast<std::size_t>(i + j * m_rows)];
    }
    const mp::MPComplex& operator()(Eigen::Index i, Eigen::Index j) const
    {
        return m_data[static_cast<std::size_t>(i + j * m_rows)];
    }
    MatrixXc to_double() const;
    static MPMatrix from_double(const MatrixXc& a);

private:
    Eigen::Index m_rows = 0;
    Eigen::Index m_cols = 0;
    std::vector<mp::MPComplex> m_data;
};

///
/// Random ensemble: gamma = rho e^{2 pi i phi}, alpha = zeta e^{2 pi i psi},
/// rho, phi, psi ~ U(0,1), zeta ~ U(0,10). Poles are stored through their
/// exponents.
///
RationalFunction random_rational(std::size_t n, std::mt19937_64& rng);
RationalFunction random_rational(std::size_t n, std::uint64_t seed);

/// C_ij from the double exponents and residues, evaluated at the current
/// default precision.
MPMatrix assemble_mp(const CauchyGenerators& g);

struct MPCholesky
{
    std::vector<Eigen::Index> perm;
    MPMatrix L;                  ///< n x n unit lower triangular (pivoted order)
    std::vector<mp::MPReal> D;   ///< sqrt of the pivots
};

/// Completely (diagonally) pivoted Cholesky of a Hermitian PD matrix.
MPCholesky gecp_cholesky(MPMatrix C);

struct OracleConEig
{
    std::vector<mp::MPReal> lambdas; ///< decreasing
    MPMatrix Z;                      ///< C z = lambda conj(z), unit columns
    double max_residual = 0.0;       ///< max |Cz - lambda conj z| / (lambda |z|)

    Eigen::VectorXd lambdas_double() const;
};

/// Gauge con-eigendecomposition at `digits` decimal digits. Throws
/// PrecisionExhausted when residuals exceed 10^{-digits/2}.
OracleConEig oracle_coneig(const CauchyGenerators& g, int digits = default_digits);

struct ErrorStats
{
    Eigen::VectorXd lambda_err;
    Eigen::VectorXd vector_err;
    double max_lambda = 0.0;
    double max_vector = 0.0;
};

/// Relative errors of `dec` against the gauge after rescaling each computed
/// column by Z(i0,j) / Zhat(i0,j), i0 = argmax_i |Z(i,j)|.
ErrorStats oracle_error_stats(const ConEigDecomposition& dec, const OracleConEig& gauge);
ErrorStats oracle_error_stats(const ConEigDecomposition& dec, const Eigen::VectorXd& lambdas,
                              const MatrixXc& Z);

/// 1 - exp(z) at the given precision.
Complex one_minus_exp(Complex z, int digits = 100);
/// (x_j - x_k)/(x_j + y_k) and (y_j - y_k)/(y_j + x_k) at the given precision.
Complex x_ratio(const ExponentPole& j, const ExponentPole& k, int digits = 100);
Complex y_ratio(const ExponentPole& j, const ExponentPole& k, int digits = 100);

/// Householder QR with the same pre-sort and column pivot rule as
/// `qr_householder_pivoted`, at the given precision.
PivotedQR qr_pivoted(const MatrixXc& A, int digits = 100);

/// Singular values (decreasing) and left singular vectors of a square matrix.
LeftSVD svd_left(const MatrixXc& A, int digits = 100);

/// Solves A x = b by Gaussian elimination with complete pivoting.
VectorXc solve(const MPMatrix& A, const std::vector<mp::MPComplex>& b);

/// Residue system sum_i beta_i/(1 - eta_i conj eta_j) = sum_i alpha_i/(1 - gamma_i conj eta_j)
/// with eta = exp(-zeta), built and solved at the given precision.
VectorXc solve_residues(const std::vector<ExponentPole>& zetas, const RationalFunction& f,
                        int digits = 100);

///
/// Zeros of v(exp(-eta)) = (1/lambda) sum_i conj(s_i) z_i / (1 - conj(gamma_i) exp(-eta))
/// for the gauge pair `index`, refined by Newton from the given seeds. A seed
/// that does not converge yields NaN.
///
std::vector<Complex> refine_roots(const CauchyGenerators& g, const OracleConEig& gauge,
                                  Eigen::Index index, const std::vector<Complex>& seeds,
                                  int digits = default_digits);

/// Zeros of eta -> sum_i c_i / (1 - conj(gamma_i) exp(-eta)) with double
/// coefficients, refined by Newton at the given precision. NaN marks a seed
/// that did not converge within `max_iter` steps.
std::vector<Complex> polish_roots(const std::vector<ExponentPole>& poles,
                                  const std::vector<Complex>& coeffs,
                                  const std::vector<Complex>& seeds, int digits,
                                  int max_iter = 60);

/// Same with extended-precision coefficients, at their precision.
std::vector<Complex> polish_roots(const std::vector<ExponentPole>& poles,
                                  const std::vector<mp::MPComplex>& coeffs,
                                  const std::vector<Complex>& seeds, int max_iter = 60);

struct RefinedPair
{
    mp::MPReal lambda;
    std::vector<mp::MPComplex> z; ///< unit 2-norm
    double residual = 0.0;        ///< |Cz - lambda conj z| / lambda
};

///
/// One con-eigenpair refined from a double approximation by inverse
/// iteration with shift `lambda` on the real form
///
///     [Re C  Im C; Im C  -Re C] [x; -y] = lambda [x; -y],  z = x + iy,
///
/// at the given precision. Cost is one real LU of order 2n.
///
RefinedPair refine_coneig_pair(const CauchyGenerators& g, const VectorXc& z, double lambda,
                               int digits, int iterations = 3);

/// Entry of C at the given precision.
Complex eval_entry(const CauchyGenerators& g, Eigen::Index i, Eigen::Index j,
                   int digits = 100);

struct ExpSumError
{
    double max_error = 0.0; ///< max_n |1/n^p - sum|
    long argmax      = 0;
};

///
/// Brute force over n = 1 ... n_max of |1/n^p - sum_m w_m exp(-tau_m n)| for
/// the double nodes and weights of `s`, at the given precision. Powers are
/// updated by one multiplication per term and step; terms below 10^-digits
/// are dropped.
///
ExpSumError expsum_max_error(const ExpSum& s, int p, long n_max, int digits = 50);

} // namespace coneig::oracle

#endif /* CONEIG_ORACLE_HPP */
