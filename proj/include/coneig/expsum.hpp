///
/// \file expsum.hpp
///
/// Deliberately over-long rational functions used as reduction inputs. The
/// building block is the trapezoidal discretization
///
///     1/n^p = sum_{m=-M1}^{M2} a_m exp(-tau_m n),
///     tau_m = exp(h m),  a_m = h exp(p h m) / (p-1)!,
///
/// of the integral (p-1)!/n^p = int exp(-n e^t + p t) dt.
///
#ifndef CONEIG_EXPSUM_HPP
#define CONEIG_EXPSUM_HPP

#include <vector>

#include "coneig/cauchy.hpp"

namespace coneig
{

struct ExpSumParams
{
    double h = 0.3;
    int M1   = 0;
    int M2   = 0;
    int p    = 1;

    std::size_t terms() const
    {
        return static_cast<std::size_t>(M1 + M2 + 1);
    }
};

inline constexpr int expsum_max_power = 20;

struct ExpSum
{
    std::vector<double> taus;
    std::vector<double> weights;
};

/// Nodes and weights for m = -M1 ... M2. Throws InvalidArgument for bad
/// parameters and Overflow when exp(p h M2) is not representable.
ExpSum inverse_power_expsum(const ExpSumParams& params);

///
/// Parameters for absolute error below `eps` on 1 <= n <= n_max: the step
/// from the trapezoidal error 2 |Gamma(p + 2 pi i/h)| / (p-1)!, the ranges
/// from the decay of the integrand at both ends. Term count grows like
/// log(1/eps)^2.
///
ExpSumParams fit_expsum_params(double eps, int p = 1, double n_max = 1e6);

/// sum_m a_m exp(-tau_m n)
double expsum_value(const ExpSum& s, double n);

///
/// Conjugate-symmetric f whose coefficient of z^-n, n >= 1, is
/// sum_k w_k exp(-(tau_k + 2 pi i x0) n): pole exponent tau + 2 pi i x0 and
/// residue w exp(-tau - 2 pi i x0) per term.
///
RationalFunction rational_from_expsum(const std::vector<Complex>& taus,
                                      const std::vector<Complex>& weights, double x0,
                                      Complex alpha0);

RationalFunction rational_from_expsum(const ExpSum& s, double x0, Complex alpha0);

/// Coefficient of z^-n (n >= 1) of f on the unit circle,
/// int_0^1 f(e^{2 pi i x}) e^{2 pi i n x} dx.
Complex fourier_coefficient(const RationalFunction& f, int n);

///
/// Reduction test family: truncated sums for 1/n^2 with a random step and
/// shift, 40 to 80 pole pairs and smallest re(tau) near 1e-10. For 1/n the
/// con-eigenvalues decay too slowly to reduce much at delta = 1e-10.
///
RationalFunction synthetic_function(unsigned index);

///
/// Clustered family: re(tau) spanning [1e-12, 1] with several poles sharing
/// nearly the same angle.
///
RationalFunction clustered_function(unsigned index);

} // namespace coneig

#endif /* CONEIG_EXPSUM_HPP */
