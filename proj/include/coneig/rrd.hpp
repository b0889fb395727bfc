///
/// \file rrd.hpp
///
/// Con-eigenvalue decomposition of C = X D^2 X^* from a rank-revealing
/// factorization, and its driver for Cauchy generators.
///
#ifndef CONEIG_RRD_HPP
#define CONEIG_RRD_HPP

#include <vector>

#include "coneig/cholesky.hpp"

namespace coneig
{

struct PivotedQR
{
    MatrixXc R;
    /// A(row_perm[i], col_perm[j]) = (Q R)(i, j)
    std::vector<Eigen::Index> row_perm;
    std::vector<Eigen::Index> col_perm;
};

/// Rows pre-sorted by decreasing sup-norm, then Householder QR with column
/// pivoting on the trailing 2-norms. Throws RankDeficient.
PivotedQR qr_householder_pivoted(const MatrixXc& A);

struct LeftSVD
{
    MatrixXc U;             ///< left singular vectors, columns sorted with sigma
    Eigen::VectorXd sigma;  ///< decreasing
    int sweeps = 0;
    double max_cosine = 0.0; ///< largest |w_p^* w_q| / (|w_p||w_q|) on exit
};

inline constexpr int jacobi_max_sweeps = 30;

/// One-sided Jacobi applied to R^* (rotations from the left on R). Stops once
/// every column pair is orthogonal to within m * eps.
LeftSVD jacobi_svd_left(const MatrixXc& R, int max_sweeps = jacobi_max_sweeps);

struct ConEigDecomposition
{
    Eigen::VectorXd lambdas; ///< positive, decreasing
    MatrixXc Z;              ///< C z = lambda conj(z), unit columns
    Eigen::VectorXd relgaps;
    std::vector<bool> clustered;
    /// |C z - lambda conj(z)| / (lambda |z|) evaluated in double precision
    /// through the factors; empty unless requested.
    Eigen::VectorXd residuals;
    /// True when the columns of conj(X Y1) had to be conjugated to satisfy
    /// C z = lambda conj(z).
    bool conjugated = false;
    /// Truncation rank of the underlying factorization.
    Eigen::Index rank = 0;
};

inline constexpr double cluster_relgap = 1e-8;

/// Diagnostics kept alongside the decomposition for the property tests.
struct RRDTrace
{
    MatrixXc G;
    PivotedQR qr;
    LeftSVD svd;
    MatrixXc R1;
    MatrixXc X1;
    MatrixXc Y1;
};

ConEigDecomposition coneig_rrd(const MatrixXc& X, const Eigen::VectorXd& D,
                               bool with_residuals = false, RRDTrace* trace = nullptr);

///
/// Con-eigenpairs with lambda >= delta plus the first pair below delta when
/// the truncated factorization resolves it. delta = 0 returns everything.
///
ConEigDecomposition con_eigvector(const CauchyGenerators& g, double delta,
                                  bool with_residuals = false);

/// |C z_j - lambda_j conj(z_j)| / (lambda_j |z_j|) with C = X D^2 X^*.
Eigen::VectorXd coneig_residuals(const MatrixXc& X, const Eigen::VectorXd& D,
                                 const Eigen::VectorXd& lambdas, const MatrixXc& Z);

/// relgap_i = min_{j != i} |l_i - l_j| / (l_i + l_j)
Eigen::VectorXd relative_gaps(const Eigen::VectorXd& lambdas);

} // namespace coneig

#endif /* CONEIG_RRD_HPP */
