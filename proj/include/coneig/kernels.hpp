///
/// \file kernels.hpp
///
/// Cancellation-free scalar kernels for poles stored in exponent form,
/// \f$ \gamma = e^{-\tau} \f$ with \f$ \mathrm{Re}(\tau) > 0 \f$.
///
/// Every difference or sum of two Cauchy generators built from exponents is
/// routed through `one_minus_exp`, so that the result keeps full relative
/// accuracy even when \f$ |\tau_j - \tau_k| \ll 1 \f$ or
/// \f$ \mathrm{Re}(\tau) \ll 1 \f$.
///
#ifndef CONEIG_KERNELS_HPP
#define CONEIG_KERNELS_HPP

#include <complex>
#include <numbers>

namespace coneig
{

using Complex = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

///
/// Pole \f$ \gamma = e^{-\tau} \f$ stored through its exponent. The imaginary
/// part is kept in \f$ [0, 2\pi) \f$.
///
struct ExponentPole
{
    double re_tau = 1.0;
    double im_tau = 0.0;

    /// Construct with `im_tau` normalized into [0, 2pi). No validation of
    /// `re_tau` happens here; see `validate` in cauchy.hpp.
    static ExponentPole from_exponent(double re_tau, double im_tau);
    static ExponentPole from_exponent(Complex tau)
    {
        return from_exponent(tau.real(), tau.imag());
    }
    /// Exponent of a pole given by value, tau = -log(gamma). Loses relative
    /// accuracy for |gamma| close to one; prefer exponents when available.
    static ExponentPole from_pole(Complex gamma);

    Complex tau() const
    {
        return {re_tau, im_tau};
    }
    /// gamma = exp(-tau)
    Complex pole() const;

    friend bool operator==(const ExponentPole&, const ExponentPole&) = default;
};

/// Reduce an angle into (-pi, pi], treating the double nearest to 2pi as the
/// period (so exact 2pi shifts of stored exponents cancel exactly).
double wrap_angle(double theta) noexcept;

/// wrap_angle(a + b + c), with the sums carried in double-double so that a
/// result near zero keeps its relative accuracy.
double wrap_angle_sum(double a, double b, double c) noexcept;

/// Normalize an angle into [0, 2pi); a no-op for values already in range.
double normalize_angle(double theta) noexcept;

/// tau_j - tau_k with the imaginary part wrapped into (-pi, pi].
Complex exponent_difference(const ExponentPole& j, const ExponentPole& k) noexcept;

/// -tau_j - conj(tau_k), imaginary part wrapped into (-pi, pi].
Complex exponent_cross_sum(const ExponentPole& j, const ExponentPole& k) noexcept;

///
/// 1 - exp(z) with relative error O(eps) for every finite z, including
/// |z| << 1 where the truncated Taylor series -(z + z^2/2 + ...) is used.
///
Complex one_minus_exp(Complex z) noexcept;

/// |z| below which `one_minus_exp` switches to the Taylor series.
inline constexpr double one_minus_exp_taylor_radius = 0.5;

namespace detail
{
// Exposed for the branch-continuity tests.
Complex one_minus_exp_taylor(Complex z) noexcept;
Complex one_minus_exp_direct(Complex z) noexcept;
} // namespace detail

///
/// Cauchy generators in exponent form: x = exp(tau), y = -exp(-conj(tau)).
///
/// All functions below throw `Error(CoincidentPoles)` when the two exponents
/// are identical.
///

/// x_j - x_k. Exactly antisymmetric: x_difference(j,k) == -x_difference(k,j).
Complex x_difference(const ExponentPole& j, const ExponentPole& k);

/// gamma_j - gamma_k. Exactly antisymmetric.
Complex pole_difference(const ExponentPole& j, const ExponentPole& k);

/// (x_j - x_k) / (x_j + y_k), multiplier of the alpha generator recursion.
Complex x_ratio(const ExponentPole& j, const ExponentPole& k);

/// (y_j - y_k) / (y_j + x_k), multiplier of the beta generator recursion.
Complex y_ratio(const ExponentPole& j, const ExponentPole& k);

/// (x_i + y_j) / x_i = 1 - gamma_i conj(gamma_j). Never cancels for valid
/// poles since Re(tau_i + conj(tau_j)) > 0; defined also for i == j.
Complex scaled_x_plus_y(const ExponentPole& i, const ExponentPole& j) noexcept;

/// exp(-eta) - gamma with eta a free exponent (e.g. a Newton iterate).
Complex point_minus_pole(Complex eta, const ExponentPole& pole) noexcept;

} // namespace coneig

#endif /* CONEIG_KERNELS_HPP */
