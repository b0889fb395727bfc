#include "coneig/oracle.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>

#include "coneig/error.hpp"

namespace coneig::oracle
{

using mp::MPComplex;
using mp::MPReal;

namespace
{

// 1 - exp(z) through expm1 so tiny |z| keeps its digits.
MPComplex mp_one_minus_exp(const MPComplex& z)
{
    MPReal s, c;
    mpfr_sin_cos(s.get(), c.get(), z.im.get(), MPFR_RNDN);
    MPReal half = z.im;
    mpfr_div_2ui(half.get(), half.get(), 1, MPFR_RNDN);
    MPReal sh   = mp::sin(half);
    MPReal re   = mp::expm1(z.re) * c;
    MPReal sh2  = sh * sh;
    mpfr_mul_2ui(sh2.get(), sh2.get(), 1, MPFR_RNDN);
    re -= sh2;
    MPReal im = mp::exp(z.re) * s;
    return {-re, -im};
}

MPComplex mp_tau(const ExponentPole& p)
{
    return {MPReal(p.re_tau), MPReal(p.im_tau)};
}

MPComplex mp_conj_tau(const ExponentPole& p)
{
    return {MPReal(p.re_tau), MPReal(-p.im_tau)};
}

MPReal mp_norm2(const MPMatrix& a, Eigen::Index col)
{
    MPReal acc(0.0);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
    {
        const auto& z = a(i, col);
        mpfr_fma(acc.get(), z.re.get(), z.re.get(), acc.get(), MPFR_RNDN);
        mpfr_fma(acc.get(), z.im.get(), z.im.get(), acc.get(), MPFR_RNDN);
    }
    return acc;
}

// sum_i conj(a_ip) a_iq
MPComplex mp_dot(const MPMatrix& a, Eigen::Index p, Eigen::Index q)
{
    MPComplex acc{MPReal(0.0), MPReal(0.0)};
    for (Eigen::Index i = 0; i < a.rows(); ++i)
    {
        mp::fma_conj_acc(acc, a(i, p), a(i, q));
    }
    return acc;
}

// Column rotation [p, q] <- [c p - s e q, s p + c e q] with real c, s and
// unit complex e.
struct Rotator
{
    MPReal t1, t2, t3, t4;
    MPComplex se, ce;

    void setup(const MPReal& c, const MPReal& s, const MPComplex& e)
    {
        se = e * s;
        ce = e * c;
    }

    void apply(MPMatrix& a, Eigen::Index p, Eigen::Index q, const MPReal& c, const MPReal& s)
    {
        for (Eigen::Index i = 0; i < a.rows(); ++i)
        {
            auto& x = a(i, p);
            auto& y = a(i, q);
            // eq = e*y parts, shared: se*y = s*(e*y), ce*y = c*(e*y)
            // t1 + i t2 = se * y
            mpfr_mul(t1.get(), se.re.get(), y.re.get(), MPFR_RNDN);
            mpfr_fms(t1.get(), se.im.get(), y.im.get(), t1.get(), MPFR_RNDN);
            mpfr_neg(t1.get(), t1.get(), MPFR_RNDN);
            mpfr_mul(t2.get(), se.re.get(), y.im.get(), MPFR_RNDN);
            mpfr_fma(t2.get(), se.im.get(), y.re.get(), t2.get(), MPFR_RNDN);
            // t3 + i t4 = ce * y
            mpfr_mul(t3.get(), ce.re.get(), y.re.get(), MPFR_RNDN);
            mpfr_fms(t3.get(), ce.im.get(), y.im.get(), t3.get(), MPFR_RNDN);
            mpfr_neg(t3.get(), t3.get(), MPFR_RNDN);
            mpfr_mul(t4.get(), ce.re.get(), y.im.get(), MPFR_RNDN);
            mpfr_fma(t4.get(), ce.im.get(), y.re.get(), t4.get(), MPFR_RNDN);
            // y = s x + ce y
            mpfr_fma(y.re.get(), s.get(), x.re.get(), t3.get(), MPFR_RNDN);
            mpfr_fma(y.im.get(), s.get(), x.im.get(), t4.get(), MPFR_RNDN);
            // x = c x - se y_old
            mpfr_fms(x.re.get(), c.get(), x.re.get(), t1.get(), MPFR_RNDN);
            mpfr_fms(x.im.get(), c.get(), x.im.get(), t2.get(), MPFR_RNDN);
        }
    }
};

struct MPJacobiResult
{
    std::vector<MPReal> sigma;
    MPMatrix V;
    std::vector<Eigen::Index> order;
};

// One-sided Jacobi on the columns of A (overwritten). With `accumulate`, V
// collects the rotations so that A_in V = A_out.
MPJacobiResult mp_jacobi(MPMatrix& A, bool accumulate = true)
{
    const Eigen::Index n = A.cols();
    MPJacobiResult out;
    if (accumulate)
    {
        out.V = MPMatrix(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            out.V(i, i).re = 1.0;
        }
    }
    // cosine tolerance a few bits above the working precision
    MPReal tol(1.0);
    mpfr_div_2si(tol.get(), tol.get(),
                 static_cast<long>(mp::default_precision()) - 40, MPFR_RNDN);
    tol *= MPReal(static_cast<double>(std::max<Eigen::Index>(n, 1)));

    std::vector<MPReal> nrm(static_cast<std::size_t>(n));
    Rotator rot;
    bool converged = n <= 1;
    int sweep      = 0;
    while (!converged)
    {
        if (++sweep > 60)
        {
            raise(ErrorCode::PrecisionExhausted, "oracle Jacobi did not converge");
        }
        converged = true;
        for (Eigen::Index j = 0; j < n; ++j)
        {
            nrm[static_cast<std::size_t>(j)] = mp_norm2(A, j);
        }
        for (Eigen::Index p = 0; p + 1 < n; ++p)
        {
            for (Eigen::Index q = p + 1; q < n; ++q)
            {
                const MPReal& alpha = nrm[static_cast<std::size_t>(p)];
                const MPReal& beta  = nrm[static_cast<std::size_t>(q)];
                if (alpha.is_zero() || beta.is_zero())
                {
                    continue;
                }
                const MPComplex g = mp_dot(A, p, q);
                const MPReal ag   = mp::abs(g);
                if (ag <= tol * mp::sqrt(alpha * beta))
                {
                    continue;
                }
                converged          = false;
                const MPComplex e  = mp::conj(g) / ag;
                const MPReal zeta  = (beta - alpha) / (ag * MPReal(2.0));
                const MPReal root  = mp::sqrt(MPReal(1.0) + zeta * zeta);
                MPReal t           = MPReal(1.0) / (mp::abs(zeta) + root);
                if (zeta.sign() < 0)
                {
                    t = -t;
                }
                const MPReal c = MPReal(1.0) / mp::sqrt(MPReal(1.0) + t * t);
                const MPReal s = c * t;
                rot.setup(c, s, e);
                rot.apply(A, p, q, c, s);
                if (accumulate)
                {
                    rot.apply(out.V, p, q, c, s);
                }
                // exact norm updates of the rotated pair
                const MPReal tg = t * ag;
                nrm[static_cast<std::size_t>(p)] = alpha - tg;
                nrm[static_cast<std::size_t>(q)] = beta + tg;
            }
        }
    }
    out.sigma.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j)
    {
        out.sigma[static_cast<std::size_t>(j)] = mp::sqrt(mp_norm2(A, j));
    }
    out.order.resize(static_cast<std::size_t>(n));
    std::iota(out.order.begin(), out.order.end(), Eigen::Index{0});
    std::stable_sort(out.order.begin(), out.order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return out.sigma[static_cast<std::size_t>(a)] > out.sigma[static_cast<std::size_t>(b)];
    });
    return out;
}

Complex to_c(const MPComplex& z)
{
    return z.to_complex();
}

// Copy of `a` rounded to the current default precision.
MPMatrix rounded(const MPMatrix& a)
{
    MPMatrix r(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
    {
        for (Eigen::Index i = 0; i < a.rows(); ++i)
        {
            mpfr_set(r(i, j).re.get(), a(i, j).re.get(), MPFR_RNDN);
            mpfr_set(r(i, j).im.get(), a(i, j).im.get(), MPFR_RNDN);
        }
    }
    return r;
}

// Modified Gram-Schmidt on the columns, in place.
void orthonormalize(MPMatrix& q)
{
    mp::Workspace ws;
    for (Eigen::Index j = 0; j < q.cols(); ++j)
    {
        for (Eigen::Index k = 0; k < j; ++k)
        {
            const MPComplex h = mp_dot(q, k, j);
            for (Eigen::Index i = 0; i < q.rows(); ++i)
            {
                ws.axpy_sub(q(i, j), h, q(i, k));
            }
        }
        const MPReal nrm = mp::sqrt(mp_norm2(q, j));
        for (Eigen::Index i = 0; i < q.rows(); ++i)
        {
            q(i, j) /= nrm;
        }
    }
}

// A * B
MPMatrix multiply(const MPMatrix& a, const MPMatrix& b)
{
    MPMatrix c(a.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j)
    {
        for (Eigen::Index k = 0; k < a.cols(); ++k)
        {
            for (Eigen::Index i = 0; i < a.rows(); ++i)
            {
                mp::fma_acc(c(i, j), a(i, k), b(k, j));
            }
        }
    }
    return c;
}

} // namespace

MatrixXc MPMatrix::to_double() const
{
    MatrixXc a(m_rows, m_cols);
    for (Eigen::Index j = 0; j < m_cols; ++j)
    {
        for (Eigen::Index i = 0; i < m_rows; ++i)
        {
            a(i, j) = (*this)(i, j).to_complex();
        }
    }
    return a;
}

MPMatrix MPMatrix::from_double(const MatrixXc& a)
{
    MPMatrix m(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
    {
        for (Eigen::Index i = 0; i < a.rows(); ++i)
        {
            m(i, j) = MPComplex(a(i, j));
        }
    }
    return m;
}

RationalFunction random_rational(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RationalFunction f;
    f.terms.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
    {
        const double rho  = 1.0 - unit(rng); // (0, 1]
        const double phi  = unit(rng);
        const double psi  = unit(rng);
        const double zeta = 10.0 * unit(rng);
        PoleTerm t;
        t.pole    = ExponentPole::from_exponent(-std::log(rho), -two_pi * phi);
        t.residue = std::polar(zeta, two_pi * psi);
        f.terms.push_back(t);
    }
    return f;
}

RationalFunction random_rational(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return random_rational(n, rng);
}

MPMatrix assemble_mp(const CauchyGenerators& g)
{
    const Eigen::Index n = g.size();
    MPMatrix c(n, n);
    if (g.exponents)
    {
        const auto& e = *g.exponents;
        std::vector<MPComplex> s(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i)
        {
            s[static_cast<std::size_t>(i)] = MPComplex(g.s(i));
        }
        for (Eigen::Index j = 0; j < n; ++j)
        {
            for (Eigen::Index i = 0; i < n; ++i)
            {
                const MPComplex arg =
                    -(mp_tau(e[static_cast<std::size_t>(i)]) +
                      mp_conj_tau(e[static_cast<std::size_t>(j)]));
                c(i, j) = s[static_cast<std::size_t>(i)] *
                          mp::conj(s[static_cast<std::size_t>(j)]) / mp_one_minus_exp(arg);
            }
        }
        return c;
    }
    for (Eigen::Index j = 0; j < n; ++j)
    {
        for (Eigen::Index i = 0; i < n; ++i)
        {
            c(i, j) = MPComplex(g.a(i)) * MPComplex(g.b(j)) /
                      (MPComplex(g.x(i)) + MPComplex(g.y(j)));
        }
    }
    return c;
}

Complex eval_entry(const CauchyGenerators& g, Eigen::Index i, Eigen::Index j, int digits)
{
    mp::PrecisionScope scope(digits);
    if (g.exponents)
    {
        const auto& e = *g.exponents;
        const MPComplex arg =
            -(mp_tau(e[static_cast<std::size_t>(i)]) + mp_conj_tau(e[static_cast<std::size_t>(j)]));
        return to_c(MPComplex(g.s(i)) * mp::conj(MPComplex(g.s(j))) / mp_one_minus_exp(arg));
    }
    return to_c(MPComplex(g.a(i)) * MPComplex(g.b(j)) / (MPComplex(g.x(i)) + MPComplex(g.y(j))));
}

MPCholesky gecp_cholesky(MPMatrix C)
{
    const Eigen::Index n = C.rows();
    MPCholesky out;
    out.perm.resize(static_cast<std::size_t>(n));
    std::iota(out.perm.begin(), out.perm.end(), Eigen::Index{0});
    out.L = MPMatrix(n, n);
    out.D.resize(static_cast<std::size_t>(n));
    mp::Workspace ws;

    for (Eigen::Index k = 0; k < n; ++k)
    {
        Eigen::Index p = k;
        for (Eigen::Index i = k + 1; i < n; ++i)
        {
            if (C(i, i).re > C(p, p).re)
            {
                p = i;
            }
        }
        if (!(C(p, p).re.sign() > 0))
        {
            raise(ErrorCode::NotPositive, "oracle Cholesky met a nonpositive pivot");
        }
        if (p != k)
        {
            for (Eigen::Index j = 0; j < n; ++j)
            {
                std::swap(C(k, j), C(p, j));
            }
            for (Eigen::Index i = 0; i < n; ++i)
            {
                std::swap(C(i, k), C(i, p));
            }
            for (Eigen::Index j = 0; j < k; ++j)
            {
                std::swap(out.L(k, j), out.L(p, j));
            }
            std::swap(out.perm[static_cast<std::size_t>(k)], out.perm[static_cast<std::size_t>(p)]);
        }
        const MPReal piv = C(k, k).re;
        out.D[static_cast<std::size_t>(k)] = mp::sqrt(piv);
        out.L(k, k).re                     = 1.0;
        for (Eigen::Index i = k + 1; i < n; ++i)
        {
            out.L(i, k) = C(i, k) / piv;
        }
        // Schur complement: C_ij -= L_ik C_kj
        for (Eigen::Index j = k + 1; j < n; ++j)
        {
            const MPComplex ckj = C(k, j);
            for (Eigen::Index i = k + 1; i < n; ++i)
            {
                ws.axpy_sub(C(i, j), out.L(i, k), ckj);
            }
        }
    }
    return out;
}

Eigen::VectorXd OracleConEig::lambdas_double() const
{
    Eigen::VectorXd l(static_cast<Eigen::Index>(lambdas.size()));
    for (std::size_t i = 0; i < lambdas.size(); ++i)
    {
        l(static_cast<Eigen::Index>(i)) = lambdas[i].to_double();
    }
    return l;
}

OracleConEig oracle_coneig(const CauchyGenerators& g, int digits)
{
    mp::PrecisionScope scope(digits);
    const Eigen::Index n = g.size();
    const MPMatrix C     = assemble_mp(g);
    const MPCholesky ch  = gecp_cholesky(C);

    // G = D (L^T L) D, the complex symmetric Gram of X = P L D
    MPMatrix G(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
    {
        for (Eigen::Index i = 0; i <= j; ++i)
        {
            MPComplex acc{MPReal(0.0), MPReal(0.0)};
            for (Eigen::Index r = j; r < n; ++r)
            {
                mp::fma_acc(acc, ch.L(r, i), ch.L(r, j));
            }
            acc *= ch.D[static_cast<std::size_t>(i)] * ch.D[static_cast<std::size_t>(j)];
            G(i, j) = acc;
            if (i != j)
            {
                G(j, i) = G(i, j);
            }
        }
    }
    // Jacobi to convergence at reduced precision, then a few sweeps at full
    // precision on G Q with Q the re-orthonormalized low-precision rotations.
    MPMatrix Q;
    {
        mp::PrecisionScope lo(std::max(30, digits / 4));
        MPMatrix Glo = rounded(G);
        Q            = mp_jacobi(Glo, true).V;
    }
    Q = rounded(Q);
    orthonormalize(Q);
    MPMatrix A               = multiply(G, Q);
    const MPJacobiResult jac = mp_jacobi(A, false);

    // G is complex symmetric, so conj of a left singular vector is a right
    // singular vector up to phase, and z = conj(P L D v) ~ conj(P L D) u.
    OracleConEig out;
    out.lambdas.resize(static_cast<std::size_t>(n));
    out.Z = MPMatrix(n, n);
    for (Eigen::Index jj = 0; jj < n; ++jj)
    {
        const Eigen::Index src = jac.order[static_cast<std::size_t>(jj)];
        const MPReal& sig      = jac.sigma[static_cast<std::size_t>(src)];
        out.lambdas[static_cast<std::size_t>(jj)] = sig;
        std::vector<MPComplex> du(static_cast<std::size_t>(n));
        for (Eigen::Index k = 0; k < n; ++k)
        {
            du[static_cast<std::size_t>(k)] = A(k, src) * (ch.D[static_cast<std::size_t>(k)] / sig);
        }
        MPComplex psum{MPReal(0.0), MPReal(0.0)};
        for (Eigen::Index r = 0; r < n; ++r)
        {
            MPComplex acc{MPReal(0.0), MPReal(0.0)};
            for (Eigen::Index k = 0; k <= r; ++k)
            {
                mp::fma_conj_acc(acc, ch.L(r, k), du[static_cast<std::size_t>(k)]);
            }
            auto& z = out.Z(ch.perm[static_cast<std::size_t>(r)], jj);
            z       = acc;
            mp::fma_acc(psum, z, z);
        }
        MPReal half = mp::arg(psum);
        mpfr_div_2ui(half.get(), half.get(), 1, MPFR_RNDN);
        const MPComplex ph = mp::polar(MPReal(1.0), -half);
        MPReal nrm(0.0);
        for (Eigen::Index r = 0; r < n; ++r)
        {
            out.Z(r, jj) *= ph;
            nrm += mp::norm(out.Z(r, jj));
        }
        nrm = mp::sqrt(nrm);
        for (Eigen::Index r = 0; r < n; ++r)
        {
            out.Z(r, jj) /= nrm;
        }
    }

    // Residual check in the C z = lambda conj(z) convention.
    double worst = 0.0;
    for (Eigen::Index jj = 0; jj < n; ++jj)
    {
        MPReal res(0.0);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            MPComplex acc = -(mp::conj(out.Z(i, jj)) * out.lambdas[static_cast<std::size_t>(jj)]);
            for (Eigen::Index k = 0; k < n; ++k)
            {
                mp::fma_acc(acc, C(i, k), out.Z(k, jj));
            }
            res += mp::norm(acc);
        }
        res = mp::sqrt(res) / out.lambdas[static_cast<std::size_t>(jj)];
        worst = std::max(worst, res.to_double());
    }
    out.max_residual = worst;
    const double limit = std::pow(10.0, -0.5 * digits);
    if (!(worst <= limit))
    {
        std::ostringstream os;
        os << "oracle residual " << worst << " exceeds " << limit;
        raise(ErrorCode::PrecisionExhausted, os.str());
    }
    return out;
}

ErrorStats oracle_error_stats(const ConEigDecomposition& dec, const Eigen::VectorXd& lambdas,
                              const MatrixXc& Z)
{
    const Eigen::Index l = std::min(dec.lambdas.size(), lambdas.size());
    ErrorStats st;
    st.lambda_err.resize(l);
    st.vector_err.resize(l);
    for (Eigen::Index j = 0; j < l; ++j)
    {
        st.lambda_err(j) = std::abs(dec.lambdas(j) - lambdas(j)) / lambdas(j);
        Eigen::Index i0  = 0;
        Z.col(j).cwiseAbs().maxCoeff(&i0);
        const VectorXc zhat = dec.Z.col(j) * (Z(i0, j) / dec.Z(i0, j));
        st.vector_err(j)    = (Z.col(j) - zhat).norm() / Z.col(j).norm();
    }
    st.max_lambda = l > 0 ? st.lambda_err.maxCoeff() : 0.0;
    st.max_vector = l > 0 ? st.vector_err.maxCoeff() : 0.0;
    return st;
}

ErrorStats oracle_error_stats(const ConEigDecomposition& dec, const OracleConEig& gauge)
{
    return oracle_error_stats(dec, gauge.lambdas_double(), gauge.Z.to_double());
}

Complex one_minus_exp(Complex z, int digits)
{
    mp::PrecisionScope scope(digits);
    return to_c(mp_one_minus_exp(MPComplex(z)));
}

Complex x_ratio(const ExponentPole& j, const ExponentPole& k, int digits)
{
    mp::PrecisionScope scope(digits);
    const MPComplex num = mp_one_minus_exp(mp_tau(k) - mp_tau(j));
    const MPComplex den = mp_one_minus_exp(-(mp_tau(j) + mp_conj_tau(k)));
    return to_c(num / den);
}

Complex y_ratio(const ExponentPole& j, const ExponentPole& k, int digits)
{
    mp::PrecisionScope scope(digits);
    // conj(gamma_k - gamma_j) gamma_k / (1 - exp(-tau_k - conj tau_j))
    const MPComplex gk   = mp::exp(-mp_tau(k));
    const MPComplex diff = gk * mp_one_minus_exp(mp_tau(k) - mp_tau(j));
    const MPComplex den  = mp_one_minus_exp(-(mp_tau(k) + mp_conj_tau(j)));
    return to_c(mp::conj(diff) * gk / den);
}

PivotedQR qr_pivoted(const MatrixXc& A, int digits)
{
    mp::PrecisionScope scope(digits);
    const Eigen::Index rows = A.rows();
    const Eigen::Index cols = A.cols();
    PivotedQR out;
    out.row_perm.resize(static_cast<std::size_t>(rows));
    out.col_perm.resize(static_cast<std::size_t>(cols));
    std::iota(out.row_perm.begin(), out.row_perm.end(), Eigen::Index{0});
    std::iota(out.col_perm.begin(), out.col_perm.end(), Eigen::Index{0});
    std::vector<double> supn(static_cast<std::size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i)
    {
        supn[static_cast<std::size_t>(i)] = A.row(i).cwiseAbs().maxCoeff();
    }
    std::stable_sort(out.row_perm.begin(), out.row_perm.end(), [&](Eigen::Index p, Eigen::Index q) {
        return supn[static_cast<std::size_t>(p)] > supn[static_cast<std::size_t>(q)];
    });
    MPMatrix B(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
    {
        for (Eigen::Index j = 0; j < cols; ++j)
        {
            B(i, j) = MPComplex(A(out.row_perm[static_cast<std::size_t>(i)], j));
        }
    }
    mp::Workspace ws;
    const Eigen::Index steps = std::min(rows, cols);
    for (Eigen::Index k = 0; k < steps; ++k)
    {
        Eigen::Index p = k;
        MPReal best(-1.0);
        for (Eigen::Index j = k; j < cols; ++j)
        {
            MPReal acc(0.0);
            for (Eigen::Index i = k; i < rows; ++i)
            {
                acc += mp::norm(B(i, j));
            }
            if (acc > best)
            {
                best = acc;
                p    = j;
            }
        }
        if (!(best.sign() > 0))
        {
            raise(ErrorCode::RankDeficient, "oracle QR: zero pivot column");
        }
        best = mp::sqrt(best);
        if (p != k)
        {
            for (Eigen::Index i = 0; i < rows; ++i)
            {
                std::swap(B(i, k), B(i, p));
            }
            std::swap(out.col_perm[static_cast<std::size_t>(k)], out.col_perm[static_cast<std::size_t>(p)]);
        }
        bool below_zero = true;
        for (Eigen::Index i = k + 1; i < rows; ++i)
        {
            below_zero = below_zero && B(i, k).re.is_zero() && B(i, k).im.is_zero();
        }
        if (below_zero)
        {
            continue;
        }
        std::vector<MPComplex> v(static_cast<std::size_t>(rows - k));
        for (Eigen::Index i = k; i < rows; ++i)
        {
            v[static_cast<std::size_t>(i - k)] = B(i, k) / best;
        }
        MPComplex alf;
        {
            const MPReal a0 = mp::abs(v[0]);
            alf             = a0.is_zero() ? MPComplex(MPReal(-1.0), MPReal(0.0)) : -(v[0] / a0);
        }
        v[0] -= alf;
        MPReal vv(0.0);
        for (const auto& x : v)
        {
            vv += mp::norm(x);
        }
        const MPReal tau = MPReal(2.0) / vv;
        for (Eigen::Index j = k + 1; j < cols; ++j)
        {
            MPComplex w{MPReal(0.0), MPReal(0.0)};
            for (Eigen::Index i = k; i < rows; ++i)
            {
                mp::fma_conj_acc(w, v[static_cast<std::size_t>(i - k)], B(i, j));
            }
            w *= tau;
            for (Eigen::Index i = k; i < rows; ++i)
            {
                ws.axpy_sub(B(i, j), w, v[static_cast<std::size_t>(i - k)]);
            }
        }
        B(k, k) = alf * best;
        for (Eigen::Index i = k + 1; i < rows; ++i)
        {
            B(i, k) = MPComplex();
        }
    }
    out.R = MatrixXc::Zero(steps, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
    {
        for (Eigen::Index i = 0; i <= std::min(j, steps - 1); ++i)
        {
            out.R(i, j) = B(i, j).to_complex();
        }
    }
    return out;
}

LeftSVD svd_left(const MatrixXc& A, int digits)
{
    mp::PrecisionScope scope(digits);
    MPMatrix B = MPMatrix::from_double(A.adjoint());
    MPJacobiResult jac = mp_jacobi(B);
    const Eigen::Index n = A.rows();
    LeftSVD out;
    out.sigma.resize(n);
    out.U.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
    {
        const Eigen::Index src = jac.order[static_cast<std::size_t>(j)];
        out.sigma(j)           = jac.sigma[static_cast<std::size_t>(src)].to_double();
        for (Eigen::Index i = 0; i < n; ++i)
        {
            out.U(i, j) = jac.V(i, src).to_complex();
        }
    }
    return out;
}

VectorXc solve(const MPMatrix& Ain, const std::vector<MPComplex>& bin)
{
    MPMatrix A                 = Ain;
    std::vector<MPComplex> b   = bin;
    const Eigen::Index n       = A.rows();
    std::vector<Eigen::Index> colp(static_cast<std::size_t>(n));
    std::iota(colp.begin(), colp.end(), Eigen::Index{0});
    mp::Workspace ws;
    for (Eigen::Index k = 0; k < n; ++k)
    {
        Eigen::Index pr = k, pc = k;
        MPReal best(-1.0);
        for (Eigen::Index j = k; j < n; ++j)
        {
            for (Eigen::Index i = k; i < n; ++i)
            {
                MPReal v = mp::norm(A(i, j));
                if (v > best)
                {
                    best = std::move(v);
                    pr   = i;
                    pc   = j;
                }
            }
        }
        if (!(best.sign() > 0))
        {
            raise(ErrorCode::RankDeficient, "oracle solve: singular matrix");
        }
        if (pr != k)
        {
            for (Eigen::Index j = 0; j < n; ++j)
            {
                std::swap(A(k, j), A(pr, j));
            }
            std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(pr)]);
        }
        if (pc != k)
        {
            for (Eigen::Index i = 0; i < n; ++i)
            {
                std::swap(A(i, k), A(i, pc));
            }
            std::swap(colp[static_cast<std::size_t>(k)], colp[static_cast<std::size_t>(pc)]);
        }
        for (Eigen::Index i = k + 1; i < n; ++i)
        {
            const MPComplex l = A(i, k) / A(k, k);
            for (Eigen::Index j = k + 1; j < n; ++j)
            {
                ws.axpy_sub(A(i, j), l, A(k, j));
            }
            ws.axpy_sub(b[static_cast<std::size_t>(i)], l, b[static_cast<std::size_t>(k)]);
        }
    }
    std::vector<MPComplex> x(static_cast<std::size_t>(n));
    for (Eigen::Index k = n - 1; k >= 0; --k)
    {
        MPComplex acc = b[static_cast<std::size_t>(k)];
        for (Eigen::Index j = k + 1; j < n; ++j)
        {
            ws.axpy_sub(acc, A(k, j), x[static_cast<std::size_t>(j)]);
        }
        x[static_cast<std::size_t>(k)] = acc / A(k, k);
    }
    VectorXc out(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        out(colp[static_cast<std::size_t>(k)]) = x[static_cast<std::size_t>(k)].to_complex();
    }
    return out;
}

VectorXc solve_residues(const std::vector<ExponentPole>& zetas, const RationalFunction& f,
                        int digits)
{
    mp::PrecisionScope scope(digits);
    const auto m = static_cast<Eigen::Index>(zetas.size());
    MPMatrix K(m, m);
    std::vector<MPComplex> rhs(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j)
    {
        const MPComplex czj = mp_conj_tau(zetas[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < m; ++i)
        {
            const MPComplex arg = -(mp_tau(zetas[static_cast<std::size_t>(i)]) + czj);
            K(j, i)             = MPComplex(MPReal(1.0), MPReal(0.0)) / mp_one_minus_exp(arg);
        }
        MPComplex acc{MPReal(0.0), MPReal(0.0)};
        for (const auto& t : f.terms)
        {
            acc += MPComplex(t.residue) / mp_one_minus_exp(-(mp_tau(t.pole) + czj));
        }
        rhs[static_cast<std::size_t>(j)] = acc;
    }
    return solve(K, rhs);
}

namespace
{

// Newton on eta -> sum_i c_i / (1 - exp(-conj tau_i - eta)) at the current
// precision. Non-converging seeds give NaN.
std::vector<Complex> newton_on_sum(const std::vector<MPComplex>& coef,
                                   const std::vector<MPComplex>& ctau,
                                   const std::vector<Complex>& seeds, int max_iter)
{
    MPReal tol(1.0);
    mpfr_div_2si(tol.get(), tol.get(), static_cast<long>(mp::default_precision()) - 64,
                 MPFR_RNDN);
    const MPComplex one{MPReal(1.0), MPReal(0.0)};

    std::vector<Complex> roots;
    roots.reserve(seeds.size());
    for (const Complex& s0 : seeds)
    {
        MPComplex eta(s0);
        bool done = false;
        for (int it = 0; it < max_iter && !done; ++it)
        {
            MPComplex val{MPReal(0.0), MPReal(0.0)};
            MPComplex der{MPReal(0.0), MPReal(0.0)};
            for (std::size_t i = 0; i < coef.size(); ++i)
            {
                // w = exp(-conj tau_i - eta); term c/(1-w), derivative -c w/(1-w)^2
                const MPComplex om = mp_one_minus_exp(-(ctau[i] + eta));
                const MPComplex q  = coef[i] / om;
                val += q;
                der -= q * (one - om) / om;
            }
            const MPComplex step = val / der;
            eta -= step;
            if (!std::isfinite(eta.re.to_double()) || !std::isfinite(eta.im.to_double()) ||
                eta.re.to_double() > 700.0)
            {
                break;
            }
            done = mp::abs(step) <= tol * mp::abs(eta);
        }
        if (!done)
        {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            roots.emplace_back(nan, nan);
            continue;
        }
        roots.emplace_back(eta.re.to_double(), normalize_angle(eta.im.to_double()));
    }
    return roots;
}

} // namespace

std::vector<Complex> refine_roots(const CauchyGenerators& g, const OracleConEig& gauge,
                                  Eigen::Index index, const std::vector<Complex>& seeds,
                                  int digits)
{
    mp::PrecisionScope scope(digits);
    if (!g.exponents)
    {
        raise(ErrorCode::InvalidArgument, "refine_roots needs exponent generators");
    }
    const auto& e        = *g.exponents;
    const Eigen::Index n = g.size();
    std::vector<MPComplex> coef(static_cast<std::size_t>(n));
    std::vector<MPComplex> ctau(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
    {
        coef[static_cast<std::size_t>(i)] = mp::conj(MPComplex(g.s(i))) * gauge.Z(i, index);
        ctau[static_cast<std::size_t>(i)] = mp_conj_tau(e[static_cast<std::size_t>(i)]);
    }
    return newton_on_sum(coef, ctau, seeds, 200);
}

std::vector<Complex> polish_roots(const std::vector<ExponentPole>& poles,
                                  const std::vector<Complex>& coeffs,
                                  const std::vector<Complex>& seeds, int digits, int max_iter)
{
    if (poles.size() != coeffs.size())
    {
        raise(ErrorCode::InvalidArgument, "poles and coefficients differ in length");
    }
    mp::PrecisionScope scope(digits);
    std::vector<MPComplex> coef(coeffs.begin(), coeffs.end());
    std::vector<MPComplex> ctau;
    ctau.reserve(poles.size());
    for (const auto& p : poles)
    {
        ctau.push_back(mp_conj_tau(p));
    }
    return newton_on_sum(coef, ctau, seeds, max_iter);
}

std::vector<Complex> polish_roots(const std::vector<ExponentPole>& poles,
                                  const std::vector<MPComplex>& coeffs,
                                  const std::vector<Complex>& seeds, int max_iter)
{
    if (poles.size() != coeffs.size() || coeffs.empty())
    {
        raise(ErrorCode::InvalidArgument, "poles and coefficients differ in length");
    }
    mp::PrecisionScope scope(mpfr_get_prec(coeffs[0].re.get()), std::true_type{});
    std::vector<MPComplex> ctau;
    ctau.reserve(poles.size());
    for (const auto& p : poles)
    {
        ctau.push_back(mp_conj_tau(p));
    }
    return newton_on_sum(coeffs, ctau, seeds, max_iter);
}

RefinedPair refine_coneig_pair(const CauchyGenerators& g, const VectorXc& z, double lambda,
                               int digits, int iterations)
{
    const Eigen::Index n = g.size();
    if (z.size() != n || !(lambda > 0.0))
    {
        raise(ErrorCode::InvalidArgument, "refine_coneig_pair needs a matching vector and lambda > 0");
    }
    mp::PrecisionScope scope(digits);
    const MPMatrix C       = assemble_mp(g);
    const std::size_t N    = static_cast<std::size_t>(2 * n);
    const MPReal sigma(lambda);

    // B - sigma I, row-major, then LU with partial pivoting in place.
    std::vector<MPReal> B(N * N);
    auto at = [&](std::size_t r, std::size_t c) -> MPReal& { return B[r * N + c]; };
    for (Eigen::Index i = 0; i < n; ++i)
    {
        for (Eigen::Index j = 0; j < n; ++j)
        {
            const auto& c = C(i, j);
            const std::size_t r = static_cast<std::size_t>(i), q = static_cast<std::size_t>(j);
            const std::size_t h = static_cast<std::size_t>(n);
            at(r, q)         = c.re;
            at(r, q + h)     = c.im;
            at(r + h, q)     = c.im;
            at(r + h, q + h) = -c.re;
        }
    }
    for (std::size_t k = 0; k < N; ++k)
    {
        at(k, k) -= sigma;
    }

    std::vector<std::size_t> piv(N);
    MPReal t;
    for (std::size_t k = 0; k < N; ++k)
    {
        std::size_t p = k;
        for (std::size_t r = k + 1; r < N; ++r)
        {
            if (mpfr_cmpabs(at(r, k).get(), at(p, k).get()) > 0)
            {
                p = r;
            }
        }
        piv[k] = p;
        if (p != k)
        {
            for (std::size_t c = 0; c < N; ++c)
            {
                mpfr_swap(at(k, c).get(), at(p, c).get());
            }
        }
        if (at(k, k).is_zero())
        {
            // Exact singularity: sigma is an eigenvalue at this precision.
            mpfr_set_d(at(k, k).get(), 1e-300, MPFR_RNDN);
        }
        for (std::size_t r = k + 1; r < N; ++r)
        {
            at(r, k) /= at(k, k);
            const MPReal& l = at(r, k);
            for (std::size_t c = k + 1; c < N; ++c)
            {
                mpfr_mul(t.get(), l.get(), at(k, c).get(), MPFR_RNDN);
                mpfr_sub(at(r, c).get(), at(r, c).get(), t.get(), MPFR_RNDN);
            }
        }
    }
    auto solve = [&](std::vector<MPReal> b)
    {
        for (std::size_t k = 0; k < N; ++k)
        {
            if (piv[k] != k)
            {
                mpfr_swap(b[k].get(), b[piv[k]].get());
            }
        }
        for (std::size_t r = 1; r < N; ++r)
        {
            for (std::size_t c = 0; c < r; ++c)
            {
                mpfr_mul(t.get(), at(r, c).get(), b[c].get(), MPFR_RNDN);
                mpfr_sub(b[r].get(), b[r].get(), t.get(), MPFR_RNDN);
            }
        }
        for (std::size_t r = N; r-- > 0;)
        {
            for (std::size_t c = r + 1; c < N; ++c)
            {
                mpfr_mul(t.get(), at(r, c).get(), b[c].get(), MPFR_RNDN);
                mpfr_sub(b[r].get(), b[r].get(), t.get(), MPFR_RNDN);
            }
            b[r] /= at(r, r);
        }
        return b;
    };
    auto normalize = [&](std::vector<MPReal>& w)
    {
        MPReal s(0.0);
        for (const auto& x : w)
        {
            mpfr_fma(s.get(), x.get(), x.get(), s.get(), MPFR_RNDN);
        }
        s = mp::sqrt(s);
        for (auto& x : w)
        {
            x /= s;
        }
    };

    std::vector<MPReal> w(N);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        w[static_cast<std::size_t>(i)]     = MPReal(z(i).real());
        w[static_cast<std::size_t>(i + n)] = MPReal(-z(i).imag());
    }
    normalize(w);
    MPReal lam = sigma;
    for (int it = 0; it < iterations; ++it)
    {
        std::vector<MPReal> u = solve(w);
        // u ~ w / (lambda - sigma)
        MPReal wu(0.0), uu(0.0);
        for (std::size_t k = 0; k < N; ++k)
        {
            mpfr_fma(wu.get(), w[k].get(), u[k].get(), wu.get(), MPFR_RNDN);
            mpfr_fma(uu.get(), u[k].get(), u[k].get(), uu.get(), MPFR_RNDN);
        }
        lam = sigma + wu / uu;
        if (wu.sign() < 0)
        {
            for (auto& x : u)
            {
                x = -x;
            }
        }
        w = std::move(u);
        normalize(w);
    }

    RefinedPair out;
    out.lambda = lam;
    out.z.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
    {
        out.z[static_cast<std::size_t>(i)] =
            MPComplex(w[static_cast<std::size_t>(i)], -w[static_cast<std::size_t>(i + n)]);
    }
    MPReal res(0.0);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        MPComplex acc = -(MPComplex(lam, MPReal(0.0)) * mp::conj(out.z[static_cast<std::size_t>(i)]));
        for (Eigen::Index j = 0; j < n; ++j)
        {
            mp::fma_acc(acc, C(i, j), out.z[static_cast<std::size_t>(j)]);
        }
        res += mp::norm(acc);
    }
    out.residual = (mp::sqrt(res) / lam).to_double();
    return out;
}

ExpSumError expsum_max_error(const ExpSum& s, int p, long n_max, int digits)
{
    if (p < 1 || n_max < 1 || s.taus.size() != s.weights.size())
    {
        raise(ErrorCode::InvalidArgument, "expsum_max_error: bad arguments");
    }
    mp::PrecisionScope scope(digits);
    const MPReal floor_value = mp::pow10(-digits);
    std::vector<MPReal> ratio, term;
    for (std::size_t m = 0; m < s.taus.size(); ++m)
    {
        ratio.push_back(mp::exp(-MPReal(s.taus[m])));
        term.push_back(MPReal(s.weights[m]) * ratio.back());
    }
    ExpSumError out;
    MPReal sum, err;
    for (long n = 1; n <= n_max; ++n)
    {
        sum = MPReal(0.0);
        std::size_t live = 0;
        for (std::size_t m = 0; m < term.size(); ++m)
        {
            sum += term[m];
            term[m] *= ratio[m];
            // terms decrease in n, so a dropped term stays negligible
            if (term[m] > floor_value)
            {
                if (live != m)
                {
                    term[live]  = std::move(term[m]);
                    ratio[live] = std::move(ratio[m]);
                }
                ++live;
            }
        }
        term.resize(live);
        ratio.resize(live);
        MPReal target(1.0);
        for (int k = 0; k < p; ++k)
        {
            target /= MPReal(static_cast<double>(n));
        }
        err             = mp::abs(target - sum);
        const double e = err.to_double();
        if (e > out.max_error)
        {
            out.max_error = e;
            out.argmax    = n;
        }
    }
    return out;
}

} // namespace coneig::oracle
