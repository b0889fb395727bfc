#include "coneig/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "coneig/error.hpp"

namespace coneig
{

namespace
{

constexpr double eps = std::numeric_limits<double>::epsilon();

std::string describe(std::size_t i, const PoleTerm& t)
{
    std::ostringstream os;
    os.precision(17);
    os << "term " << i << " (tau = " << t.pole.re_tau << " + " << t.pole.im_tau
       << "i)";
    return os.str();
}

double tau_distance(const ExponentPole& p, const ExponentPole& q)
{
    return std::abs(Complex(p.re_tau - q.re_tau, wrap_angle(p.im_tau - q.im_tau)));
}

} // namespace

Complex evaluate_on_circle(const RationalFunction& f, double theta_hi, double theta_lo)
{
    const double t = theta_hi + theta_lo;
    Complex sum(0.0, 0.0);
    for (const auto& term : f.terms)
    {
        const Complex arg(-term.pole.re_tau, wrap_angle_sum(-term.pole.im_tau, -theta_hi, -theta_lo));
        sum += term.residue * std::polar(1.0, -t) / one_minus_exp(arg);
    }
    return 2.0 * sum.real() + f.alpha0;
}

Complex evaluate_on_circle(const RationalFunction& f, double theta)
{
    // alpha / (z - gamma) = alpha conj(z) / (1 - gamma conj(z)) on |z| = 1
    const double t = wrap_angle(theta);
    Complex sum(0.0, 0.0);
    for (const auto& term : f.terms)
    {
        const Complex arg(-term.pole.re_tau, wrap_angle(-term.pole.im_tau - t));
        sum += term.residue * std::polar(1.0, -t) / one_minus_exp(arg);
    }
    return 2.0 * sum.real() + f.alpha0;
}

ValidationReport validate(RationalFunction& f)
{
    ValidationReport rep;
    const std::size_t n = f.terms.size();
    if (n == 0)
    {
        rep.issues.push_back({Diagnostic::Kind::Empty, 0, 0, "no terms"});
        return rep;
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        auto& t = f.terms[i];
        if (!std::isfinite(t.pole.re_tau) || !std::isfinite(t.pole.im_tau) ||
            !std::isfinite(t.residue.real()) || !std::isfinite(t.residue.imag()))
        {
            rep.issues.push_back({Diagnostic::Kind::NonFinite, i, i,
                                  describe(i, t) + " is not finite"});
            continue;
        }
        t.pole.im_tau = normalize_angle(t.pole.im_tau);
        if (!(t.pole.re_tau > 0.0))
        {
            rep.issues.push_back({Diagnostic::Kind::NonPositiveReTau, i, i,
                                  describe(i, t) + " has re_tau <= 0"});
        }
        if (t.residue == Complex(0.0, 0.0))
        {
            rep.issues.push_back({Diagnostic::Kind::ZeroResidue, i, i,
                                  describe(i, t) + " has zero residue"});
        }
    }

    // Duplicates: sort by re_tau and only compare within the window where a
    // relative match is still possible.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
        return f.terms[p].pole.re_tau < f.terms[q].pole.re_tau;
    });
    for (std::size_t u = 0; u < n; ++u)
    {
        const auto& p = f.terms[order[u]].pole;
        const double abs_p = std::abs(p.tau());
        for (std::size_t w = u + 1; w < n; ++w)
        {
            const auto& q = f.terms[order[w]].pole;
            if (q.re_tau - p.re_tau > 4.0 * eps * (abs_p + q.re_tau + two_pi))
            {
                break;
            }
            const double tol = 4.0 * eps * std::max(abs_p, std::abs(q.tau()));
            if (tau_distance(p, q) <= tol)
            {
                const std::size_t i = std::min(order[u], order[w]);
                const std::size_t j = std::max(order[u], order[w]);
                rep.issues.push_back({Diagnostic::Kind::DuplicatePole, i, j,
                                      describe(i, f.terms[i]) + " duplicates " +
                                          describe(j, f.terms[j])});
            }
        }
    }
    return rep;
}

void require_valid(RationalFunction& f)
{
    const auto rep = validate(f);
    if (rep.ok())
    {
        return;
    }
    const auto& d = rep.issues.front();
    switch (d.kind)
    {
    case Diagnostic::Kind::DuplicatePole:
        raise(ErrorCode::CoincidentPoles, d.message);
    case Diagnostic::Kind::ZeroResidue:
        raise(ErrorCode::ZeroResidue, d.message);
    case Diagnostic::Kind::NonPositiveReTau:
        // |gamma| >= 1 gives a diagonal entry of C that is not positive
        raise(ErrorCode::NotPositive, d.message);
    default:
        raise(ErrorCode::InvalidArgument, d.message);
    }
}

CauchyGenerators generators_from_exponents(const std::vector<ExponentPole>& exps,
                                           const VectorXc& alpha)
{
    const auto n = static_cast<Eigen::Index>(exps.size());
    if (alpha.size() != n)
    {
        raise(ErrorCode::InvalidArgument, "pole and residue counts differ");
    }
    CauchyGenerators g;
    g.a.resize(n);
    g.b.resize(n);
    g.x.resize(n);
    g.y.resize(n);
    g.s.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (alpha(i) == Complex(0.0, 0.0))
        {
            raise(ErrorCode::ZeroResidue, "residue " + std::to_string(i) + " is zero");
        }
        const Complex s   = std::sqrt(alpha(i));
        const Complex tau = exps[static_cast<std::size_t>(i)].tau();
        g.s(i)            = s;
        g.x(i)            = std::exp(tau);
        g.y(i)            = -std::exp(-std::conj(tau));
        g.a(i)            = s * g.x(i);
        g.b(i)            = std::conj(s);
    }
    g.exponents = exps;
    return g;
}

CauchyGenerators generators_from_rational(const RationalFunction& f)
{
    std::vector<ExponentPole> exps;
    VectorXc alpha(static_cast<Eigen::Index>(f.size()));
    exps.reserve(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
    {
        exps.push_back(f.terms[i].pole);
        alpha(static_cast<Eigen::Index>(i)) = f.terms[i].residue;
    }
    return generators_from_exponents(exps, alpha);
}

CauchyGenerators generators_from_raw(VectorXc a, VectorXc b, VectorXc x, VectorXc y)
{
    const auto n = a.size();
    if (b.size() != n || x.size() != n || y.size() != n)
    {
        raise(ErrorCode::InvalidArgument, "generator lengths differ");
    }
    CauchyGenerators g;
    g.a = std::move(a);
    g.b = std::move(b);
    g.x = std::move(x);
    g.y = std::move(y);
    return g;
}

Complex eval_entry(const CauchyGenerators& g, Eigen::Index i, Eigen::Index j)
{
    if (g.exponents)
    {
        const auto& e = *g.exponents;
        const auto& ti = e[static_cast<std::size_t>(i)];
        const auto& tj = e[static_cast<std::size_t>(j)];
        if (i == j)
        {
            return Complex(std::norm(g.s(i)) / -std::expm1(-2.0 * ti.re_tau), 0.0);
        }
        return g.s(i) * std::conj(g.s(j)) / scaled_x_plus_y(ti, tj);
    }
    return g.a(i) * g.b(j) / (g.x(i) + g.y(j));
}

MatrixXc assemble(const CauchyGenerators& g)
{
    const auto n = g.size();
    MatrixXc c(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
    {
        for (Eigen::Index i = 0; i < n; ++i)
        {
            c(i, j) = eval_entry(g, i, j);
        }
    }
    return c;
}

} // namespace coneig
