///
/// \file mp.hpp
///
/// Thin RAII wrapper over MPFR used by the reference oracles. Precision of new
/// values comes from a thread-local default set through `PrecisionScope`.
///
#ifndef CONEIG_MP_HPP
#define CONEIG_MP_HPP

#include <complex>
#include <string>
#include <type_traits>
#include <utility>

#include <mpfr.h>

namespace coneig::mp
{

mpfr_prec_t default_precision() noexcept;
void set_default_precision(mpfr_prec_t bits) noexcept;

/// Bits needed for `digits` decimal digits plus guard bits.
mpfr_prec_t digits_to_bits(int digits) noexcept;

class PrecisionScope
{
public:
    explicit PrecisionScope(int digits) : m_saved(default_precision())
    {
        set_default_precision(digits_to_bits(digits));
    }
    /// Exact bit count, e.g. the precision of an existing value.
    PrecisionScope(mpfr_prec_t bits, std::true_type) : m_saved(default_precision())
    {
        set_default_precision(bits);
    }
    ~PrecisionScope()
    {
        set_default_precision(m_saved);
    }
    PrecisionScope(const PrecisionScope&)            = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    mpfr_prec_t m_saved;
};

class MPReal
{
public:
    MPReal()
    {
        mpfr_init2(m_x, default_precision());
        mpfr_set_zero(m_x, 1);
    }
    MPReal(double v)
    {
        mpfr_init2(m_x, default_precision());
        mpfr_set_d(m_x, v, MPFR_RNDN);
    }
    explicit MPReal(long v)
    {
        mpfr_init2(m_x, default_precision());
        mpfr_set_si(m_x, v, MPFR_RNDN);
    }
    explicit MPReal(int v) : MPReal(static_cast<long>(v)) {}
    explicit MPReal(const std::string& s)
    {
        mpfr_init2(m_x, default_precision());
        mpfr_set_str(m_x, s.c_str(), 10, MPFR_RNDN);
    }
    MPReal(const MPReal& o)
    {
        mpfr_init2(m_x, mpfr_get_prec(o.m_x));
        mpfr_set(m_x, o.m_x, MPFR_RNDN);
    }
    MPReal(MPReal&& o) noexcept
    {
        mpfr_init2(m_x, mpfr_get_prec(o.m_x));
        mpfr_swap(m_x, o.m_x);
    }
    MPReal& operator=(const MPReal& o)
    {
        if (this != &o)
        {
            mpfr_set_prec(m_x, mpfr_get_prec(o.m_x));
            mpfr_set(m_x, o.m_x, MPFR_RNDN);
        }
        return *this;
    }
    MPReal& operator=(MPReal&& o) noexcept
    {
        mpfr_swap(m_x, o.m_x);
        return *this;
    }
    MPReal& operator=(double v)
    {
        mpfr_set_d(m_x, v, MPFR_RNDN);
        return *this;
    }
    ~MPReal()
    {
        mpfr_clear(m_x);
    }

    mpfr_ptr get() noexcept
    {
        return m_x;
    }
    mpfr_srcptr get() const noexcept
    {
        return m_x;
    }

    double to_double() const
    {
        return mpfr_get_d(m_x, MPFR_RNDN);
    }
    std::string to_string(int digits = 40) const;
    bool is_zero() const
    {
        return mpfr_zero_p(m_x) != 0;
    }
    int sign() const
    {
        return mpfr_sgn(m_x);
    }

    MPReal& operator+=(const MPReal& o)
    {
        mpfr_add(m_x, m_x, o.m_x, MPFR_RNDN);
        return *this;
    }
    MPReal& operator-=(const MPReal& o)
    {
        mpfr_sub(m_x, m_x, o.m_x, MPFR_RNDN);
        return *this;
    }
    MPReal& operator*=(const MPReal& o)
    {
        mpfr_mul(m_x, m_x, o.m_x, MPFR_RNDN);
        return *this;
    }
    MPReal& operator/=(const MPReal& o)
    {
        mpfr_div(m_x, m_x, o.m_x, MPFR_RNDN);
        return *this;
    }
    MPReal operator-() const
    {
        MPReal r(*this);
        mpfr_neg(r.m_x, r.m_x, MPFR_RNDN);
        return r;
    }

    friend MPReal operator+(MPReal a, const MPReal& b)
    {
        return a += b;
    }
    friend MPReal operator-(MPReal a, const MPReal& b)
    {
        return a -= b;
    }
    friend MPReal operator*(MPReal a, const MPReal& b)
    {
        return a *= b;
    }
    friend MPReal operator/(MPReal a, const MPReal& b)
    {
        return a /= b;
    }
    friend bool operator<(const MPReal& a, const MPReal& b)
    {
        return mpfr_less_p(a.m_x, b.m_x) != 0;
    }
    friend bool operator>(const MPReal& a, const MPReal& b)
    {
        return mpfr_greater_p(a.m_x, b.m_x) != 0;
    }
    friend bool operator<=(const MPReal& a, const MPReal& b)
    {
        return mpfr_lessequal_p(a.m_x, b.m_x) != 0;
    }
    friend bool operator>=(const MPReal& a, const MPReal& b)
    {
        return mpfr_greaterequal_p(a.m_x, b.m_x) != 0;
    }

private:
    mpfr_t m_x;
};

MPReal sqrt(const MPReal& x);
MPReal exp(const MPReal& x);
MPReal expm1(const MPReal& x);
MPReal log(const MPReal& x);
MPReal sin(const MPReal& x);
MPReal cos(const MPReal& x);
MPReal atan2(const MPReal& y, const MPReal& x);
MPReal abs(const MPReal& x);
MPReal hypot(const MPReal& x, const MPReal& y);
MPReal pi();
MPReal pow10(long e);

struct MPComplex
{
    MPReal re;
    MPReal im;

    MPComplex() = default;
    MPComplex(const MPReal& r, const MPReal& i) : re(r), im(i) {}
    MPComplex(std::complex<double> z) : re(z.real()), im(z.imag()) {}

    std::complex<double> to_complex() const
    {
        return {re.to_double(), im.to_double()};
    }

    MPComplex& operator+=(const MPComplex& o)
    {
        re += o.re;
        im += o.im;
        return *this;
    }
    MPComplex& operator-=(const MPComplex& o)
    {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    MPComplex& operator*=(const MPComplex& o);
    MPComplex& operator/=(const MPComplex& o);
    MPComplex& operator*=(const MPReal& s)
    {
        re *= s;
        im *= s;
        return *this;
    }
    MPComplex& operator/=(const MPReal& s)
    {
        re /= s;
        im /= s;
        return *this;
    }
    MPComplex operator-() const
    {
        return {-re, -im};
    }

    friend MPComplex operator+(MPComplex a, const MPComplex& b)
    {
        return a += b;
    }
    friend MPComplex operator-(MPComplex a, const MPComplex& b)
    {
        return a -= b;
    }
    friend MPComplex operator*(MPComplex a, const MPComplex& b)
    {
        return a *= b;
    }
    friend MPComplex operator/(MPComplex a, const MPComplex& b)
    {
        return a /= b;
    }
    friend MPComplex operator*(MPComplex a, const MPReal& s)
    {
        return a *= s;
    }
    friend MPComplex operator/(MPComplex a, const MPReal& s)
    {
        return a /= s;
    }
};

MPComplex conj(const MPComplex& z);
MPReal norm(const MPComplex& z); ///< |z|^2
MPReal abs(const MPComplex& z);
MPReal arg(const MPComplex& z);
MPComplex exp(const MPComplex& z);
MPComplex sqrt(const MPComplex& z); ///< principal branch
MPComplex polar(const MPReal& r, const MPReal& theta);

/// acc += a * b without temporaries beyond two scratch values.
void fma_acc(MPComplex& acc, const MPComplex& a, const MPComplex& b);
/// acc += conj(a) * b
void fma_conj_acc(MPComplex& acc, const MPComplex& a, const MPComplex& b);

/// Scratch-reusing complex kernels for the oracles' inner loops.
class Workspace
{
public:
    /// y -= s * x
    void axpy_sub(MPComplex& y, const MPComplex& s, const MPComplex& x);

private:
    MPReal t1, t2;
};

} // namespace coneig::mp

#endif /* CONEIG_MP_HPP */
