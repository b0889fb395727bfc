#include "coneig/cholesky.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "coneig/error.hpp"

namespace coneig
{

namespace
{

constexpr double eps = std::numeric_limits<double>::epsilon();

// Imaginary part allowed on a pivot of the raw path, relative to |pivot|.
constexpr double pivot_imag_tol = 1e-8;

void swap_rows(CauchyGenerators& g, Eigen::Index i, Eigen::Index j)
{
    std::swap(g.a(i), g.a(j));
    std::swap(g.b(i), g.b(j));
    std::swap(g.x(i), g.x(j));
    std::swap(g.y(i), g.y(j));
    if (g.s.size() == g.a.size())
    {
        std::swap(g.s(i), g.s(j));
    }
    if (g.exponents)
    {
        std::swap((*g.exponents)[static_cast<std::size_t>(i)],
                  (*g.exponents)[static_cast<std::size_t>(j)]);
    }
}

[[noreturn]] void not_positive(Eigen::Index step, Complex pivot)
{
    std::ostringstream os;
    os.precision(17);
    os << "pivot " << step << " = " << pivot.real() << " + " << pivot.imag()
       << "i is not positive real";
    raise(ErrorCode::NotPositive, os.str());
}

double exp_diag(const ExponentPole& p)
{
    // 1 - |gamma|^2
    return -std::expm1(-2.0 * p.re_tau);
}

} // namespace

PivotOrder pivot_order(const CauchyGenerators& g, double delta)
{
    const Eigen::Index n = g.size();
    if (n == 0)
    {
        raise(ErrorCode::InvalidArgument, "empty generators");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta))
    {
        raise(ErrorCode::InvalidArgument, "delta must be finite and >= 0");
    }
    const double cutoff = eps * delta * delta;

    PivotOrder out;
    out.permuted = g;
    out.perm.resize(static_cast<std::size_t>(n));
    std::iota(out.perm.begin(), out.perm.end(), Eigen::Index{0});
    auto& pg = out.permuted;

    const bool expo = pg.has_exponents();
    VectorXc diag(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        diag(i) = eval_entry(pg, i, i);
    }

    Eigen::Index k = 0;
    for (; k < n; ++k)
    {
        Eigen::Index p = k;
        double best    = std::abs(diag(k));
        for (Eigen::Index i = k + 1; i < n; ++i)
        {
            const double v = std::abs(diag(i));
            if (v > best)
            {
                best = v;
                p    = i;
            }
        }
        if (!std::isfinite(best))
        {
            not_positive(k, diag(p));
        }
        // the first pivot is always taken, so m >= 1
        if ((k > 0 && best < cutoff) || best == 0.0)
        {
            out.tail = best;
            break;
        }
        const Complex piv = diag(p);
        if (!(piv.real() > 0.0) || std::abs(piv.imag()) > pivot_imag_tol * best)
        {
            not_positive(k, piv);
        }
        if (p != k)
        {
            swap_rows(pg, k, p);
            std::swap(diag(k), diag(p));
            std::swap(out.perm[static_cast<std::size_t>(k)],
                      out.perm[static_cast<std::size_t>(p)]);
        }
        if (expo)
        {
            const auto& e    = *pg.exponents;
            const auto& pk   = e[static_cast<std::size_t>(k)];
            const double gk2 = std::exp(-2.0 * pk.re_tau);
            for (Eigen::Index i = k + 1; i < n; ++i)
            {
                diag(i) *= gk2 * std::norm(x_ratio(e[static_cast<std::size_t>(i)], pk));
            }
        }
        else
        {
            for (Eigen::Index i = k + 1; i < n; ++i)
            {
                diag(i) *= (pg.x(i) - pg.x(k)) * (pg.y(i) - pg.y(k)) /
                           ((pg.x(i) + pg.y(k)) * (pg.y(i) + pg.x(k)));
            }
        }
    }
    out.m = k;
    return out;
}

MatrixXc PartialCholesky::X() const
{
    MatrixXc x(L.rows(), L.cols());
    for (Eigen::Index r = 0; r < L.rows(); ++r)
    {
        x.row(perm[static_cast<std::size_t>(r)]) = L.row(r);
    }
    return x;
}

PartialCholesky partial_cholesky(const CauchyGenerators& g, double delta)
{
    PivotOrder po        = pivot_order(g, delta);
    const Eigen::Index n = g.size();
    const Eigen::Index m = po.m;
    const auto& pg       = po.permuted;
    const bool expo      = pg.has_exponents();

    PartialCholesky out;
    out.perm = std::move(po.perm);
    out.m    = m;
    out.tail = po.tail;
    out.L    = MatrixXc::Zero(n, m);
    out.D.resize(m);

    // Scaled generators: in exponent form alpha carries a factor 1/x_i that
    // cancels against (x_i + y_j) = x_i * scaled_x_plus_y(i, j).
    VectorXc alpha = expo ? pg.s : pg.a;
    VectorXc beta  = pg.b;
    VectorXc col(n);

    for (Eigen::Index k = 0; k < m; ++k)
    {
        if (k > 0)
        {
            const Eigen::Index q = k - 1;
            if (expo)
            {
                const auto& e  = *pg.exponents;
                const auto& pq = e[static_cast<std::size_t>(q)];
                for (Eigen::Index i = k; i < n; ++i)
                {
                    const auto& pi = e[static_cast<std::size_t>(i)];
                    alpha(i) *= x_ratio(pi, pq);
                    beta(i) *= y_ratio(pi, pq);
                }
            }
            else
            {
                for (Eigen::Index i = k; i < n; ++i)
                {
                    alpha(i) *= (pg.x(i) - pg.x(q)) / (pg.x(i) + pg.y(q));
                    beta(i) *= (pg.y(i) - pg.y(q)) / (pg.y(i) + pg.x(q));
                }
            }
        }

        Complex dkk;
        if (expo)
        {
            const auto& e  = *pg.exponents;
            const auto& pk = e[static_cast<std::size_t>(k)];
            dkk            = alpha(k) * beta(k) / exp_diag(pk);
            for (Eigen::Index i = k + 1; i < n; ++i)
            {
                col(i) = alpha(i) * beta(k) /
                         scaled_x_plus_y(e[static_cast<std::size_t>(i)], pk);
            }
        }
        else
        {
            dkk = alpha(k) * beta(k) / (pg.x(k) + pg.y(k));
            for (Eigen::Index i = k + 1; i < n; ++i)
            {
                col(i) = alpha(i) * beta(k) / (pg.x(i) + pg.y(k));
            }
        }
        if (!(dkk.real() > 0.0) || std::abs(dkk.imag()) > pivot_imag_tol * std::abs(dkk))
        {
            not_positive(k, dkk);
        }
        const double d = dkk.real();
        out.D(k)       = std::sqrt(d);
        out.L(k, k)    = 1.0;
        for (Eigen::Index i = k + 1; i < n; ++i)
        {
            out.L(i, k) = col(i) / d;
        }
    }
    return out;
}

} // namespace coneig
