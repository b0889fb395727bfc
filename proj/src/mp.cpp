#include "coneig/mp.hpp"

#include <cmath>
#include <vector>

namespace coneig::mp
{

namespace
{
thread_local mpfr_prec_t tl_precision = 1024;
}

mpfr_prec_t default_precision() noexcept
{
    return tl_precision;
}

void set_default_precision(mpfr_prec_t bits) noexcept
{
    tl_precision = bits;
}

mpfr_prec_t digits_to_bits(int digits) noexcept
{
    // log2(10) = 3.3219...; 32 guard bits
    return static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 32;
}

std::string MPReal::to_string(int digits) const
{
    std::vector<char> buf(static_cast<std::size_t>(digits) + 32);
    mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", digits, m_x);
    return std::string(buf.data());
}

#define CONEIG_MP_UNARY(name, fn)                                                      \
    MPReal name(const MPReal& x)                                                       \
    {                                                                                  \
        MPReal r;                                                                      \
        fn(r.get(), x.get(), MPFR_RNDN);                                               \
        return r;                                                                      \
    }

CONEIG_MP_UNARY(sqrt, mpfr_sqrt)
CONEIG_MP_UNARY(exp, mpfr_exp)
CONEIG_MP_UNARY(expm1, mpfr_expm1)
CONEIG_MP_UNARY(log, mpfr_log)
CONEIG_MP_UNARY(sin, mpfr_sin)
CONEIG_MP_UNARY(cos, mpfr_cos)
CONEIG_MP_UNARY(abs, mpfr_abs)

#undef CONEIG_MP_UNARY

MPReal atan2(const MPReal& y, const MPReal& x)
{
    MPReal r;
    mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
    return r;
}

MPReal hypot(const MPReal& x, const MPReal& y)
{
    MPReal r;
    mpfr_hypot(r.get(), x.get(), y.get(), MPFR_RNDN);
    return r;
}

MPReal pi()
{
    MPReal r;
    mpfr_const_pi(r.get(), MPFR_RNDN);
    return r;
}

MPReal pow10(long e)
{
    MPReal r;
    mpfr_ui_pow_ui(r.get(), 10, static_cast<unsigned long>(e < 0 ? -e : e), MPFR_RNDN);
    if (e < 0)
    {
        mpfr_ui_div(r.get(), 1, r.get(), MPFR_RNDN);
    }
    return r;
}

MPComplex& MPComplex::operator*=(const MPComplex& o)
{
    MPReal t = re * o.im;
    re *= o.re;
    mpfr_fms(re.get(), im.get(), o.im.get(), re.get(), MPFR_RNDN); // im*o.im - re*o.re
    mpfr_neg(re.get(), re.get(), MPFR_RNDN);
    mpfr_fma(im.get(), im.get(), o.re.get(), t.get(), MPFR_RNDN);
    return *this;
}

MPComplex& MPComplex::operator/=(const MPComplex& o)
{
    const MPReal d = norm(o);
    *this *= conj(o);
    re /= d;
    im /= d;
    return *this;
}

MPComplex conj(const MPComplex& z)
{
    return {z.re, -z.im};
}

MPReal norm(const MPComplex& z)
{
    MPReal r = z.re * z.re;
    mpfr_fma(r.get(), z.im.get(), z.im.get(), r.get(), MPFR_RNDN);
    return r;
}

MPReal abs(const MPComplex& z)
{
    return hypot(z.re, z.im);
}

MPReal arg(const MPComplex& z)
{
    return atan2(z.im, z.re);
}

MPComplex polar(const MPReal& r, const MPReal& theta)
{
    MPReal s, c;
    mpfr_sin_cos(s.get(), c.get(), theta.get(), MPFR_RNDN);
    return {r * c, r * s};
}

MPComplex exp(const MPComplex& z)
{
    return polar(exp(z.re), z.im);
}

MPComplex sqrt(const MPComplex& z)
{
    // principal root via half angle, with the branch cut on the negative axis
    const MPReal r = abs(z);
    if (r.is_zero())
    {
        return {MPReal(0.0), MPReal(0.0)};
    }
    MPReal th = arg(z);
    mpfr_div_2ui(th.get(), th.get(), 1, MPFR_RNDN);
    return polar(sqrt(r), th);
}

void fma_acc(MPComplex& acc, const MPComplex& a, const MPComplex& b)
{
    // acc.re += a.re b.re - a.im b.im ; acc.im += a.re b.im + a.im b.re
    mpfr_fma(acc.re.get(), a.re.get(), b.re.get(), acc.re.get(), MPFR_RNDN);
    mpfr_fms(acc.re.get(), a.im.get(), b.im.get(), acc.re.get(), MPFR_RNDN);
    mpfr_neg(acc.re.get(), acc.re.get(), MPFR_RNDN);
    mpfr_fma(acc.im.get(), a.re.get(), b.im.get(), acc.im.get(), MPFR_RNDN);
    mpfr_fma(acc.im.get(), a.im.get(), b.re.get(), acc.im.get(), MPFR_RNDN);
}

void fma_conj_acc(MPComplex& acc, const MPComplex& a, const MPComplex& b)
{
    // conj(a) b = (a.re b.re + a.im b.im) + i (a.re b.im - a.im b.re)
    mpfr_fma(acc.re.get(), a.re.get(), b.re.get(), acc.re.get(), MPFR_RNDN);
    mpfr_fma(acc.re.get(), a.im.get(), b.im.get(), acc.re.get(), MPFR_RNDN);
    mpfr_fma(acc.im.get(), a.re.get(), b.im.get(), acc.im.get(), MPFR_RNDN);
    mpfr_fms(acc.im.get(), a.im.get(), b.re.get(), acc.im.get(), MPFR_RNDN);
    mpfr_neg(acc.im.get(), acc.im.get(), MPFR_RNDN);
}

void Workspace::axpy_sub(MPComplex& y, const MPComplex& s, const MPComplex& x)
{
    // y.re -= s.re x.re - s.im x.im ; y.im -= s.re x.im + s.im x.re
    mpfr_mul(t1.get(), s.re.get(), x.re.get(), MPFR_RNDN);
    mpfr_mul(t2.get(), s.im.get(), x.im.get(), MPFR_RNDN);
    mpfr_sub(t1.get(), t1.get(), t2.get(), MPFR_RNDN);
    mpfr_sub(y.re.get(), y.re.get(), t1.get(), MPFR_RNDN);
    mpfr_mul(t1.get(), s.re.get(), x.im.get(), MPFR_RNDN);
    mpfr_mul(t2.get(), s.im.get(), x.re.get(), MPFR_RNDN);
    mpfr_add(t1.get(), t1.get(), t2.get(), MPFR_RNDN);
    mpfr_sub(y.im.get(), y.im.get(), t1.get(), MPFR_RNDN);
}

} // namespace coneig::mp
