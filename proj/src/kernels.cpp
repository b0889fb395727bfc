#include "coneig/kernels.hpp"

#include <cmath>
#include <sstream>

#include "coneig/error.hpp"

namespace coneig
{

namespace
{

// 2pi split for argument reduction of general (non-exponent) inputs:
// hi is the double nearest 2pi, lo the remainder.
constexpr double two_pi_hi = 6.283185307179586232;
constexpr double two_pi_lo = 2.4492935982947064e-16;

// Number of Taylor terms: for |z| < 1/2 the first neglected term is below
// 2^-20 / 21! relative to |z|.
constexpr int taylor_terms = 20;

// Strict weak order used to pick a canonical argument order for the
// antisymmetric kernels.
bool precedes(const ExponentPole& a, const ExponentPole& b) noexcept
{
    return a.re_tau < b.re_tau || (a.re_tau == b.re_tau && a.im_tau < b.im_tau);
}

void require_distinct(const ExponentPole& j, const ExponentPole& k)
{
    if (j == k)
    {
        std::ostringstream os;
        os.precision(17);
        os << "identical exponents tau = (" << j.re_tau << ", " << j.im_tau
           << ")";
        raise(ErrorCode::CoincidentPoles, os.str());
    }
}

// Reduce the imaginary part of z into [-pi, pi] accurately (two-term 2pi).
Complex reduce_imag(Complex z) noexcept
{
    const double b = z.imag();
    if (std::abs(b) <= std::numbers::pi)
    {
        return z;
    }
    const double k = std::nearbyint(b / two_pi_hi);
    double r       = std::fma(-k, two_pi_hi, b);
    r              = std::fma(-k, two_pi_lo, r);
    return {z.real(), r};
}

inline void two_sum(double a, double b, double& s, double& e) noexcept
{
    s              = a + b;
    const double v = s - a;
    e              = (a - (s - v)) + (b - v);
}

// a - b for two angles in [0, 2pi), reduced into (-pi, pi] with the two-term
// 2pi so that poles on either side of the branch seam keep their small
// separation to full relative accuracy.
double angle_difference(double a, double b) noexcept
{
    if (!(a >= 0.0 && a < two_pi && b >= 0.0 && b < two_pi))
    {
        return wrap_angle(a - b);
    }
    const double d = a - b;
    if (d > std::numbers::pi)
    {
        // a > pi, so a - 2pi_hi is exact
        return ((a - two_pi_hi) - b) - two_pi_lo;
    }
    if (d <= -std::numbers::pi)
    {
        return (a + (two_pi_hi - b)) + two_pi_lo;
    }
    return d;
}

} // namespace

ExponentPole ExponentPole::from_exponent(double re_tau, double im_tau)
{
    return ExponentPole{re_tau, normalize_angle(im_tau)};
}

ExponentPole ExponentPole::from_pole(Complex gamma)
{
    const Complex tau = -std::log(gamma);
    return from_exponent(tau.real(), tau.imag());
}

Complex ExponentPole::pole() const
{
    return std::polar(std::exp(-re_tau), -im_tau);
}

double wrap_angle_sum(double a, double b, double c) noexcept
{
    double s, e;
    two_sum(a, b, s, e);
    two_sum(s, c, s, c);
    e += c;
    const double k = std::nearbyint((s + e) / two_pi_hi);
    const double p = -k * two_pi_hi;
    const double q = std::fma(-k, two_pi_hi, -p);
    double r, f;
    two_sum(s, p, r, f);
    return r + (((e + f) + q) - k * two_pi_lo);
}

double wrap_angle(double theta) noexcept
{
    if (theta > std::numbers::pi || theta <= -std::numbers::pi)
    {
        theta -= two_pi * std::floor(theta / two_pi);
        if (theta > std::numbers::pi)
        {
            theta -= two_pi;
        }
    }
    return theta;
}

double normalize_angle(double theta) noexcept
{
    if (theta >= 0.0 && theta < two_pi)
    {
        return theta;
    }
    theta -= two_pi * std::floor(theta / two_pi);
    if (theta >= two_pi || theta < 0.0)
    {
        theta = 0.0;
    }
    return theta;
}

Complex exponent_difference(const ExponentPole& j, const ExponentPole& k) noexcept
{
    return {j.re_tau - k.re_tau, angle_difference(j.im_tau, k.im_tau)};
}

Complex exponent_cross_sum(const ExponentPole& j, const ExponentPole& k) noexcept
{
    return {-(j.re_tau + k.re_tau), -angle_difference(j.im_tau, k.im_tau)};
}

namespace detail
{

Complex one_minus_exp_taylor(Complex z) noexcept
{
    // 1 - e^z = -z (1 + z/2 (1 + z/3 (1 + ... )))
    Complex acc(1.0, 0.0);
    for (int k = taylor_terms; k >= 2; --k)
    {
        acc = 1.0 + acc * z / static_cast<double>(k);
    }
    return -z * acc;
}

Complex one_minus_exp_direct(Complex z) noexcept
{
    const double a = z.real();
    const double b = z.imag();
    // e^z - 1 = (e^a - 1) cos b - 2 sin^2(b/2) + i e^a sin b
    const double s  = std::sin(0.5 * b);
    const double re = std::expm1(a) * std::cos(b) - 2.0 * s * s;
    const double im = std::exp(a) * std::sin(b);
    return {-re, -im};
}

} // namespace detail

Complex one_minus_exp(Complex z) noexcept
{
    if (std::abs(z) < one_minus_exp_taylor_radius)
    {
        return detail::one_minus_exp_taylor(z);
    }
    const Complex r = reduce_imag(z);
    if (std::abs(r) < one_minus_exp_taylor_radius)
    {
        return detail::one_minus_exp_taylor(r);
    }
    return detail::one_minus_exp_direct(r);
}

Complex x_difference(const ExponentPole& j, const ExponentPole& k)
{
    require_distinct(j, k);
    // x_p - x_q = e^{tau_p} (1 - e^{tau_q - tau_p}), evaluated for the
    // canonical ordering of (p, q) only.
    if (precedes(k, j))
    {
        return std::exp(j.tau()) * one_minus_exp(exponent_difference(k, j));
    }
    return -(std::exp(k.tau()) * one_minus_exp(exponent_difference(j, k)));
}

Complex pole_difference(const ExponentPole& j, const ExponentPole& k)
{
    require_distinct(j, k);
    // gamma_p - gamma_q = e^{-tau_p} (1 - e^{tau_p - tau_q})
    if (precedes(k, j))
    {
        return j.pole() * one_minus_exp(exponent_difference(j, k));
    }
    return -(k.pole() * one_minus_exp(exponent_difference(k, j)));
}

Complex x_ratio(const ExponentPole& j, const ExponentPole& k)
{
    require_distinct(j, k);
    // (x_j - x_k) / x_j, same canonical branch as x_difference
    Complex numer;
    if (precedes(k, j))
    {
        numer = one_minus_exp(exponent_difference(k, j));
    }
    else
    {
        numer = -(std::exp(exponent_difference(k, j)) *
                  one_minus_exp(exponent_difference(j, k)));
    }
    return numer / one_minus_exp(exponent_cross_sum(j, k));
}

Complex y_ratio(const ExponentPole& j, const ExponentPole& k)
{
    // y_j - y_k = conj(gamma_k - gamma_j)
    // y_j + x_k = e^{tau_k} (1 - e^{-tau_k - conj(tau_j)})
    const Complex numer = std::conj(pole_difference(k, j));
    return numer * k.pole() / one_minus_exp(exponent_cross_sum(k, j));
}

Complex scaled_x_plus_y(const ExponentPole& i, const ExponentPole& j) noexcept
{
    return one_minus_exp(exponent_cross_sum(i, j));
}

Complex point_minus_pole(Complex eta, const ExponentPole& pole) noexcept
{
    // e^{-eta} - e^{-tau} = -e^{-tau} (1 - e^{tau - eta})
    const Complex d(pole.re_tau - eta.real(), angle_difference(pole.im_tau, eta.imag()));
    return -(pole.pole() * one_minus_exp(d));
}

} // namespace coneig
