#include "coneig/expsum.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "coneig/error.hpp"

namespace coneig
{

ExpSum inverse_power_expsum(const ExpSumParams& params)
{
    if (!(params.h > 0.0) || params.M1 < 0 || params.M2 < 0 || params.p < 1 ||
        params.p > expsum_max_power)
    {
        raise(ErrorCode::InvalidArgument, "expsum parameters out of range");
    }
    const double top = params.p * params.h * params.M2;
    if (top >= std::log(std::numeric_limits<double>::max() / params.h) ||
        params.h * params.M2 >= std::log(std::numeric_limits<double>::max()))
    {
        std::ostringstream os;
        os << "exp(p h M2) = exp(" << top << ") overflows";
        raise(ErrorCode::Overflow, os.str());
    }
    double fact = 1.0;
    for (int k = 2; k < params.p; ++k)
    {
        fact *= k;
    }
    ExpSum s;
    for (int m = -params.M1; m <= params.M2; ++m)
    {
        const double t = params.h * m;
        s.taus.push_back(std::exp(t));
        s.weights.push_back(params.h * std::exp(params.p * t) / fact);
    }
    return s;
}

ExpSumParams fit_expsum_params(double eps, int p, double n_max)
{
    if (!(eps > 0.0 && eps < 1.0) || !(n_max >= 1.0) || p < 1 || p > expsum_max_power)
    {
        raise(ErrorCode::InvalidArgument, "expsum fit parameters out of range");
    }
    const double L = std::log(1.0 / eps);
    ExpSumParams q;
    q.p = p;
    // Trapezoidal error at n = 1 is about 2 |Gamma(p + 2 pi i / h)| / (p-1)!,
    // |Gamma(p + iy)| ~ sqrt(2 pi) y^(p - 1/2) exp(-pi y / 2).
    double fact = 1.0;
    for (int k = 2; k < p; ++k)
    {
        fact *= k;
    }
    auto discretization = [&](double h) {
        const double y = 2.0 * std::numbers::pi / h;
        return 2.0 * std::sqrt(2.0 * std::numbers::pi) * std::pow(y, p - 0.5) *
               std::exp(-std::numbers::pi * y / 2.0) / fact;
    };
    q.h = std::numbers::pi * std::numbers::pi / L;
    while (discretization(q.h) > 0.5 * eps)
    {
        q.h *= 0.99;
    }
    // Upper end: exp(-e^t) e^{p t} below eps at n = 1.
    double t = 1.0;
    while (std::exp(-std::exp(t) + p * t) > eps * 1e-2)
    {
        t += 0.25;
    }
    q.M2 = static_cast<int>(std::ceil(t / q.h));
    // Lower end: geometric tail h e^{p h m} / (p h) below eps for all n <= n_max.
    q.M1 = static_cast<int>(std::ceil((L + p * std::log(n_max)) / (p * q.h)));
    return q;
}

double expsum_value(const ExpSum& s, double n)
{
    double sum = 0.0;
    for (std::size_t m = 0; m < s.taus.size(); ++m)
    {
        sum += s.weights[m] * std::exp(-s.taus[m] * n);
    }
    return sum;
}

RationalFunction rational_from_expsum(const std::vector<Complex>& taus,
                                      const std::vector<Complex>& weights, double x0,
                                      Complex alpha0)
{
    if (taus.size() != weights.size())
    {
        raise(ErrorCode::InvalidArgument, "taus and weights differ in length");
    }
    RationalFunction f;
    f.alpha0 = alpha0;
    for (std::size_t k = 0; k < taus.size(); ++k)
    {
        if (!(taus[k].real() > 0.0))
        {
            raise(ErrorCode::InvalidArgument, "expsum exponent with re(tau) <= 0");
        }
        const auto pole = ExponentPole::from_exponent(taus[k].real(), taus[k].imag() + two_pi * x0);
        f.terms.push_back({pole, weights[k] * pole.pole()});
    }
    require_valid(f);
    return f;
}

RationalFunction rational_from_expsum(const ExpSum& s, double x0, Complex alpha0)
{
    std::vector<Complex> t(s.taus.begin(), s.taus.end());
    std::vector<Complex> w(s.weights.begin(), s.weights.end());
    return rational_from_expsum(t, w, x0, alpha0);
}

Complex fourier_coefficient(const RationalFunction& f, int n)
{
    if (n < 1)
    {
        raise(ErrorCode::InvalidArgument, "fourier_coefficient needs n >= 1");
    }
    Complex c(0.0, 0.0);
    for (const auto& t : f.terms)
    {
        c += t.residue * std::exp(-static_cast<double>(n - 1) * t.pole.tau());
    }
    return c;
}

RationalFunction synthetic_function(unsigned index)
{
    std::mt19937_64 rng(0x5eed0000u + index);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ExpSumParams q;
    q.p  = 2;
    q.h  = 0.34 + 0.16 * u(rng);
    q.M1 = static_cast<int>(std::lround(std::log(1e10) / q.h));
    q.M2 = static_cast<int>(std::ceil(std::log(24.0) / q.h));
    const double x0     = u(rng);
    const double alpha0 = u(rng) - 0.5;
    return rational_from_expsum(inverse_power_expsum(q), x0, alpha0);
}

RationalFunction clustered_function(unsigned index)
{
    std::mt19937_64 rng(0xc1c0000u + index);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ExpSumParams q;
    q.p             = 2;
    q.h             = 0.45 + 0.15 * u(rng);
    q.M1            = static_cast<int>(std::lround(std::log(1e12) / q.h));
    q.M2            = 0;
    const double x0 = u(rng);
    return rational_from_expsum(inverse_power_expsum(q), x0, 0.0);
}

} // namespace coneig
