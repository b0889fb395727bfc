///
/// \file reduction.hpp
///
/// Reduction of a rational function to fewer poles at a prescribed L-infinity
/// error. The con-eigenvector of the selected con-eigenvalue lambda_m defines
///
///     v(z) = (1/lambda_m) sum_i conj(s_i) z_i / (1 - conj(gamma_i) z),
///
/// whose m zeros in the unit disk become the new poles. Near its zeros the
/// double sum loses about log10(1/lambda_m) digits to cancellation, so roots
/// found in double are refined with the sum carried in extended precision.
/// The Thiele interpolant of v is kept for callers that only have values
/// of v at the poles.
///
#ifndef CONEIG_REDUCTION_HPP
#define CONEIG_REDUCTION_HPP

#include <vector>

#include "coneig/cauchy.hpp"
#include "coneig/mp.hpp"
#include "coneig/rrd.hpp"

namespace coneig
{

/// v(gamma_i) = conj(z_i) / s_i for column `m` of the decomposition.
std::vector<Complex> coneig_values_of_v(const ConEigDecomposition& dec,
                                        const RationalFunction& f, Eigen::Index m);

///
/// v~(z) = a_1 / (1 + a_2 (z - g_1) / (1 + a_3 (z - g_2) / (1 + ...)))
///
/// evaluated at z = exp(-eta). Node differences z - g_j go through
/// `point_minus_pole`.
///
struct ContinuedFraction
{
    std::vector<ExponentPole> nodes; ///< interpolation nodes in Leja order
    std::vector<Complex> coeffs;     ///< a_1 ... a_n

    Complex evaluate(Complex eta) const;
    /// Value and derivative with respect to eta.
    void evaluate(Complex eta, Complex& value, Complex& derivative) const;
};

/// Thiele interpolation by inverse differences. Values may be infinite (pole
/// nodes) except the one placed first. Throws Breakdown when a coefficient
/// vanishes or overflows.
ContinuedFraction build_continued_fraction(const std::vector<ExponentPole>& nodes,
                                           const std::vector<Complex>& values);

///
/// Interpolant of v from its values at the poles gamma_i of f and its own
/// poles 1/conj(gamma_i), used as nodes with infinite value. With these 2n
/// conditions the fraction has the type of v, (n-1, n), and reproduces it.
///
ContinuedFraction interpolate_v(const std::vector<ExponentPole>& poles,
                                const std::vector<Complex>& values);

/// v(z) = sum_i c_i / (1 - conj(gamma_i) z), c_i = conj(s_i) z_i / lambda.
struct SummedV
{
    std::vector<ExponentPole> poles; ///< gamma_i of f
    std::vector<Complex> coeffs;     ///< c_i
    /// Optional c_i in extended precision, used for refinement when present.
    std::vector<mp::MPComplex> coeffs_mp;

    /// Value and derivative with respect to eta at z = exp(-eta), in double.
    void evaluate(Complex eta, Complex& value, Complex& derivative) const;
};

SummedV summed_v(const ConEigDecomposition& dec, const RationalFunction& f, Eigen::Index m);

struct RootSet
{
    std::vector<ExponentPole> zetas; ///< eta = exp(-zeta), sorted by (im, re)
    std::vector<int> iterations;
};

///
/// Newton on eta -> v~(exp(-eta)) from each seed, then from perturbed seeds
/// if fewer than `m` distinct roots with Re(zeta) > 0 were found. Throws
/// RootCountMismatch unless exactly `m` remain.
///
RootSet find_unit_disk_roots(const ContinuedFraction& cf, std::size_t m,
                             const std::vector<ExponentPole>& seeds);

///
/// Zeros of v in the unit disk. Double Newton from each seed gives
/// candidates, each refined with `coeffs_mp`, or with the double
/// coefficients at `digits` decimal digits when those are absent. Perturbed restarts
/// follow while fewer than `m` distinct roots with Re(zeta) > 0 are known.
/// Throws RootCountMismatch unless exactly `m` remain.
///
RootSet find_v_roots(const SummedV& v, std::size_t m, const std::vector<ExponentPole>& seeds,
                     int digits);

/// Residues beta of the reduced function, from
/// sum_i beta_i / (1 - eta_i conj(eta_j)) = sum_i alpha_i / (1 - gamma_i conj(eta_j)).
VectorXc solve_residues(const std::vector<ExponentPole>& zetas, const RationalFunction& f,
                        bool high_precision = false);

struct ReductionReport
{
    std::size_t m = 0;    ///< pole count of the result
    double lambda_m = 0;  ///< selected con-eigenvalue (0-based index m)
    int digits      = 0;  ///< precision of vector refinement and root polish
    double sup_error = 0; ///< measured max |f - g| on the unit circle
    std::vector<int> newton_iters;
    std::vector<ExponentPole> root_exponents;
};

struct ReduceOptions
{
    std::size_t grid_size        = 4096;
    bool high_precision_residues = false;
    /// Refine the selected con-eigenvector in extended precision before
    /// root finding. Without it, roots are limited by the double vector.
    bool refine_vector = true;
};

struct Reduction
{
    RationalFunction g;
    ReductionReport report;
};

///
/// Selects the smallest 0-based index m with lambda_m <= delta and returns a
/// function with m poles. When every con-eigenvalue exceeds delta, f is
/// returned unchanged with m = n.
///
Reduction reduce(const RationalFunction& f, double delta, const ReduceOptions& opt = {});

/// Angle theta = hi + lo on the unit circle.
struct CirclePoint
{
    double hi;
    double lo;
    double x() const; ///< theta / 2pi in [0, 1)
};

///
/// Uniform grid of `base_points` angles, plus windows of 33 points around
/// every pole angle with half-widths 64, 8 and 1 times re(tau). Sorted.
///
std::vector<CirclePoint> adaptive_grid(const std::vector<const RationalFunction*>& fs,
                                       std::size_t base_points);

/// max |f - g| over the adaptive grid of both functions; base_points >= 64.
double sup_error_estimate(const RationalFunction& f, const RationalFunction& g,
                          std::size_t base_points);

} // namespace coneig

#endif /* CONEIG_REDUCTION_HPP */
