///
/// \file cholesky.hpp
///
/// Completely pivoted, truncated Cholesky factorization of positive-definite
/// Cauchy matrices computed from the generators in O(m n) per column.
///
#ifndef CONEIG_CHOLESKY_HPP
#define CONEIG_CHOLESKY_HPP

#include <vector>

#include "coneig/cauchy.hpp"

namespace coneig
{

struct PivotOrder
{
    CauchyGenerators permuted;
    /// perm[r] = original index of the row placed at position r
    std::vector<Eigen::Index> perm;
    Eigen::Index m = 0;
    /// Largest remaining Schur complement diagonal when the loop stopped
    /// (zero when m == n).
    double tail = 0.0;
};

///
/// Greedy complete-pivoting order. Stops at the first step after the first
/// where every remaining Schur complement diagonal is below eps * delta^2,
/// so m >= 1. delta = 0 disables truncation.
///
PivotOrder pivot_order(const CauchyGenerators& g, double delta);

///
/// C ~ (P L) D^2 (P L)^*, L unit lower trapezoidal n x m, D decreasing.
///
struct PartialCholesky
{
    std::vector<Eigen::Index> perm;
    MatrixXc L;
    Eigen::VectorXd D;
    Eigen::Index m = 0;
    double tail = 0.0;

    /// P L with rows in the original ordering.
    MatrixXc X() const;
};

PartialCholesky partial_cholesky(const CauchyGenerators& g, double delta);

} // namespace coneig

#endif /* CONEIG_CHOLESKY_HPP */
