#include "coneig/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "coneig/cholesky.hpp"
#include "coneig/error.hpp"
#include "coneig/oracle.hpp"

namespace coneig
{

namespace
{

constexpr double eps = std::numeric_limits<double>::epsilon();

bool finite(const Complex& z)
{
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Distance between two exponents with the angle wrapped.
double exponent_distance(const ExponentPole& a, const ExponentPole& b)
{
    return std::abs(exponent_difference(a, b));
}

// Greedy max-product order. Nodes with finite values come first, starting
// at the largest value; pole nodes (infinite values) follow.
std::vector<std::size_t> leja_order(const std::vector<ExponentPole>& nodes,
                                    const std::vector<Complex>& values)
{
    const std::size_t n = nodes.size();
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<double> score(n, 0.0);
    std::vector<bool> used(n, false);
    std::vector<bool> is_pole(n);
    std::size_t finite_left = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        is_pole[i] = !finite(values[i]);
        finite_left += is_pole[i] ? 0 : 1;
    }

    std::size_t cur = 0;
    double best     = -1.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!is_pole[i] && std::abs(values[i]) > best)
        {
            best = std::abs(values[i]);
            cur  = i;
        }
    }
    for (std::size_t k = 0; k < n; ++k)
    {
        order.push_back(cur);
        used[cur] = true;
        if (!is_pole[cur])
        {
            --finite_left;
        }
        std::size_t next = n;
        for (std::size_t i = 0; i < n; ++i)
        {
            if (used[i])
            {
                continue;
            }
            score[i] += std::log(std::abs(pole_difference(nodes[i], nodes[cur])));
            if (finite_left > 0 && is_pole[i])
            {
                continue;
            }
            if (next == n || score[i] > score[next])
            {
                next = i;
            }
        }
        cur = next;
    }
    return order;
}

struct NewtonResult
{
    Complex eta;
    int iterations = 0;
    bool converged = false;
};

// Newton on eta for an evaluator fn(eta, value, derivative).
template <class F>
NewtonResult newton(const F& fn, Complex eta)
{
    NewtonResult r;
    double last = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 1; it <= 80; ++it)
    {
        Complex val, der;
        fn(eta, val, der);
        r.iterations = it;
        if (val == Complex(0.0, 0.0))
        {
            r.converged = true;
            break;
        }
        const Complex step = val / der;
        if (!finite(step))
        {
            break;
        }
        eta = {eta.real() - step.real(), normalize_angle(eta.imag() - step.imag())};
        if (eta.real() < -1.0 || eta.real() > 700.0)
        {
            break;
        }
        const double s = std::abs(step);
        if (s <= 4.0 * eps * std::abs(eta.real()))
        {
            r.converged = true;
            break;
        }
        // Rounding floor reached: the step no longer shrinks.
        if (s <= 1e-9 * std::abs(eta))
        {
            if (s >= 0.5 * last && ++stalled >= 2)
            {
                r.converged = true;
                break;
            }
        }
        last = s;
    }
    r.eta = eta;
    return r;
}

// Distinct in-disk roots at relative exponent distance 1e-8.
class RootCollector
{
public:
    bool add(Complex eta, int iterations)
    {
        if (!finite(eta) || !(eta.real() > 0.0))
        {
            return false;
        }
        const auto z = ExponentPole::from_exponent(eta);
        for (const auto& q : m_set.zetas)
        {
            const double scale = std::min(std::abs(q.tau()), std::max(q.re_tau, z.re_tau));
            if (exponent_distance(q, z) <= 1e-8 * scale)
            {
                return false;
            }
        }
        m_set.zetas.push_back(z);
        m_set.iterations.push_back(iterations);
        return true;
    }

    std::size_t size() const
    {
        return m_set.zetas.size();
    }

    // Sorted by (im, re); RootCountMismatch unless exactly m.
    RootSet finish(std::size_t m) const
    {
        if (size() != m)
        {
            std::ostringstream os;
            os << "found " << size() << " roots in the unit disk, expected " << m;
            raise(ErrorCode::RootCountMismatch, os.str());
        }
        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b)
                  {
                      const auto& x = m_set.zetas[a];
                      const auto& y = m_set.zetas[b];
                      return x.im_tau != y.im_tau ? x.im_tau < y.im_tau : x.re_tau < y.re_tau;
                  });
        RootSet sorted;
        for (std::size_t i : idx)
        {
            sorted.zetas.push_back(m_set.zetas[i]);
            sorted.iterations.push_back(m_set.iterations[i]);
        }
        return sorted;
    }

private:
    RootSet m_set;
};

// Seeds shifted by radius * re(tau) in four directions.
std::vector<Complex> perturbed(const ExponentPole& s, double radius)
{
    std::vector<Complex> out;
    for (int q = 0; q < 4; ++q)
    {
        out.push_back(s.tau() + std::polar(radius * s.re_tau, 0.25 * two_pi * q + 0.3));
    }
    return out;
}

} // namespace

std::vector<Complex> coneig_values_of_v(const ConEigDecomposition& dec,
                                        const RationalFunction& f, Eigen::Index m)
{
    const Eigen::Index n = static_cast<Eigen::Index>(f.size());
    if (m < 0 || m >= dec.Z.cols() || dec.Z.rows() != n)
    {
        raise(ErrorCode::InvalidArgument, "con-eigenvector index out of range");
    }
    std::vector<Complex> v(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const Complex s = std::sqrt(f.terms[static_cast<std::size_t>(i)].residue);
        v[static_cast<std::size_t>(i)] = std::conj(dec.Z(i, m)) / s;
    }
    return v;
}

void ContinuedFraction::evaluate(Complex eta, Complex& value, Complex& derivative) const
{
    const std::size_t n = coeffs.size();
    const Complex dz    = -std::exp(-eta); // d(z - g)/d eta
    Complex w           = coeffs[n - 1];
    Complex dw(0.0, 0.0);
    for (std::size_t j = n - 1; j-- > 0;)
    {
        const Complex d   = point_minus_pole(eta, nodes[j]);
        const Complex den = 1.0 + d * w;
        const Complex wn  = coeffs[j] / den;
        dw                = -wn * (dz * w + d * dw) / den;
        w                 = wn;
    }
    value      = w;
    derivative = dw;
}

Complex ContinuedFraction::evaluate(Complex eta) const
{
    Complex v, d;
    evaluate(eta, v, d);
    return v;
}

ContinuedFraction build_continued_fraction(const std::vector<ExponentPole>& nodes,
                                           const std::vector<Complex>& values)
{
    const std::size_t n = nodes.size();
    if (n == 0 || values.size() != n)
    {
        raise(ErrorCode::InvalidArgument, "continued fraction needs matching nodes and values");
    }
    ContinuedFraction cf;
    const auto order = leja_order(nodes, values);
    cf.nodes.reserve(n);
    std::vector<Complex> v;
    v.reserve(n);
    for (std::size_t i : order)
    {
        cf.nodes.push_back(nodes[i]);
        v.push_back(values[i]);
    }
    if (!finite(v[0]) || v[0] == Complex(0.0, 0.0))
    {
        raise(ErrorCode::Breakdown, "no finite nonzero value to start the continued fraction");
    }

    // Inverse differences in projective arithmetic: an infinite value (a pole
    // node) or an intermediate zero is carried symbolically.
    cf.coeffs.resize(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        Complex w    = v[k];
        bool w_inf   = !finite(w);
        for (std::size_t j = 0; j < k; ++j)
        {
            const Complex dk = pole_difference(cf.nodes[k], cf.nodes[j]);
            if (w_inf)
            {
                w     = -1.0 / dk;
                w_inf = false;
            }
            else if (w == Complex(0.0, 0.0))
            {
                w_inf = true;
            }
            else
            {
                w     = (cf.coeffs[j] / w - 1.0) / dk;
                w_inf = !finite(w);
            }
        }
        if (w_inf || w == Complex(0.0, 0.0))
        {
            std::ostringstream os;
            os << "inverse difference " << (w_inf ? "overflows" : "vanishes") << " at node "
               << order[k];
            raise(ErrorCode::Breakdown, os.str());
        }
        cf.coeffs[k] = w;
    }
    return cf;
}

ContinuedFraction interpolate_v(const std::vector<ExponentPole>& poles,
                                const std::vector<Complex>& values)
{
    std::vector<ExponentPole> nodes = poles;
    std::vector<Complex> vals       = values;
    const Complex inf(std::numeric_limits<double>::infinity(), 0.0);
    for (const auto& p : poles)
    {
        // 1/conj(gamma) = exp(conj(tau))
        nodes.push_back(ExponentPole::from_exponent(-p.re_tau, p.im_tau));
        vals.push_back(inf);
    }
    return build_continued_fraction(nodes, vals);
}

RootSet find_unit_disk_roots(const ContinuedFraction& cf, std::size_t m,
                             const std::vector<ExponentPole>& seeds)
{
    RootCollector found;
    if (m == 0)
    {
        return found.finish(0);
    }
    double vmax = 0.0;
    for (const auto& node : cf.nodes)
    {
        if (node.re_tau > 0.0)
        {
            vmax = std::max(vmax, std::abs(cf.evaluate(node.tau())));
        }
    }
    const auto fn = [&](Complex eta, Complex& v, Complex& d) { cf.evaluate(eta, v, d); };
    auto try_seed = [&](Complex eta0)
    {
        const NewtonResult r = newton(fn, eta0);
        if (r.converged && std::abs(cf.evaluate(r.eta)) <= 1e-8 * vmax)
        {
            found.add(r.eta, r.iterations);
        }
    };

    for (const auto& s : seeds)
    {
        try_seed(s.tau());
    }
    for (double radius : {0.5, 2.0})
    {
        for (std::size_t i = 0; i < seeds.size() && found.size() < m; ++i)
        {
            for (const Complex& e : perturbed(seeds[i], radius))
            {
                try_seed(e);
            }
        }
    }
    return found.finish(m);
}

void SummedV::evaluate(Complex eta, Complex& value, Complex& derivative) const
{
    value      = Complex(0.0, 0.0);
    derivative = Complex(0.0, 0.0);
    for (std::size_t i = 0; i < poles.size(); ++i)
    {
        // 1 - conj(gamma_i) z = 1 - exp(-conj(tau_i) - eta)
        const Complex arg(-poles[i].re_tau - eta.real(), wrap_angle(poles[i].im_tau - eta.imag()));
        const Complex om = one_minus_exp(arg);
        const Complex q  = coeffs[i] / om;
        value += q;
        derivative -= q * (1.0 - om) / om;
    }
}

SummedV summed_v(const ConEigDecomposition& dec, const RationalFunction& f, Eigen::Index m)
{
    const Eigen::Index n = static_cast<Eigen::Index>(f.size());
    if (m < 0 || m >= dec.Z.cols() || dec.Z.rows() != n)
    {
        raise(ErrorCode::InvalidArgument, "con-eigenvector index out of range");
    }
    SummedV v;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const auto& t = f.terms[static_cast<std::size_t>(i)];
        v.poles.push_back(t.pole);
        v.coeffs.push_back(std::conj(std::sqrt(t.residue)) * dec.Z(i, m) / dec.lambdas(m));
    }
    return v;
}

RootSet find_v_roots(const SummedV& v, std::size_t m, const std::vector<ExponentPole>& seeds,
                     int digits)
{
    RootCollector found;
    if (m == 0)
    {
        return found.finish(0);
    }
    const auto fn = [&](Complex eta, Complex& val, Complex& der) { v.evaluate(eta, val, der); };

    // Double Newton runs may stop on spurious zeros of the rounded sum; only
    // distinct end points are refined.
    auto run = [&](const std::vector<Complex>& starts)
    {
        RootCollector cand;
        std::vector<Complex> pts;
        std::vector<int> iters;
        for (const Complex& e : starts)
        {
            const NewtonResult r = newton(fn, e);
            if (finite(r.eta) && r.eta.real() > -0.5 && cand.add(r.eta, r.iterations))
            {
                pts.push_back(r.eta);
                iters.push_back(r.iterations);
            }
        }
        const auto refined = v.coeffs_mp.empty()
                                 ? oracle::polish_roots(v.poles, v.coeffs, pts, digits)
                                 : oracle::polish_roots(v.poles, v.coeffs_mp, pts);
        for (std::size_t i = 0; i < refined.size(); ++i)
        {
            found.add(refined[i], iters[i]);
        }
    };

    std::vector<Complex> starts;
    for (const auto& s : seeds)
    {
        starts.push_back(s.tau());
    }
    run(starts);
    for (double radius : {0.5, 2.0})
    {
        if (found.size() >= m)
        {
            break;
        }
        starts.clear();
        for (const auto& s : seeds)
        {
            for (const Complex& e : perturbed(s, radius))
            {
                starts.push_back(e);
            }
        }
        run(starts);
    }
    return found.finish(m);
}

VectorXc solve_residues(const std::vector<ExponentPole>& zetas, const RationalFunction& f,
                        bool high_precision)
{
    const std::size_t m = zetas.size();
    if (m == 0)
    {
        return VectorXc();
    }
    if (high_precision)
    {
        return oracle::solve_residues(zetas, f, 100);
    }

    // System matrix 1/(1 - conj(eta_j) eta_k): Cauchy generators with poles
    // conj(eta) and unit residues.
    std::vector<ExponentPole> ce(m);
    for (std::size_t j = 0; j < m; ++j)
    {
        ce[j] = ExponentPole::from_exponent(zetas[j].re_tau, -zetas[j].im_tau);
    }
    const CauchyGenerators g = generators_from_exponents(ce, VectorXc::Ones(static_cast<Eigen::Index>(m)));

    VectorXc rhs = VectorXc::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j)
    {
        for (const auto& t : f.terms)
        {
            rhs(static_cast<Eigen::Index>(j)) += t.residue / one_minus_exp(exponent_cross_sum(t.pole, zetas[j]));
        }
    }

    // C = P L D^2 L^* P^T
    const PartialCholesky pc = partial_cholesky(g, 0.0);
    const Eigen::Index n     = static_cast<Eigen::Index>(m);
    VectorXc w(n);
    for (Eigen::Index r = 0; r < n; ++r)
    {
        Complex acc = rhs(pc.perm[static_cast<std::size_t>(r)]);
        for (Eigen::Index k = 0; k < r; ++k)
        {
            acc -= pc.L(r, k) * w(k);
        }
        w(r) = acc;
    }
    for (Eigen::Index r = 0; r < n; ++r)
    {
        w(r) /= pc.D(r) * pc.D(r);
    }
    VectorXc y(n);
    for (Eigen::Index r = n; r-- > 0;)
    {
        Complex acc = w(r);
        for (Eigen::Index k = r + 1; k < n; ++k)
        {
            acc -= std::conj(pc.L(k, r)) * y(k);
        }
        y(r) = acc;
    }
    VectorXc beta(n);
    for (Eigen::Index r = 0; r < n; ++r)
    {
        beta(pc.perm[static_cast<std::size_t>(r)]) = y(r);
    }
    return beta;
}

Reduction reduce(const RationalFunction& f_in, double delta, const ReduceOptions& opt)
{
    if (!(delta > 0.0))
    {
        raise(ErrorCode::InvalidArgument, "delta must be positive");
    }
    RationalFunction f = f_in;
    require_valid(f);
    const CauchyGenerators gen = generators_from_rational(f);
    const Eigen::Index n       = gen.size();

    // The factorization cutoff starts at delta and shrinks until the pair at
    // or below delta is resolved.
    ConEigDecomposition dec;
    Eigen::Index sel = -1;
    double cutoff    = delta;
    for (int attempt = 0;; ++attempt)
    {
        try
        {
            dec = con_eigvector(gen, cutoff);
        }
        catch (const Error& e)
        {
            if (e.code() != ErrorCode::DeltaTooSmall || attempt >= 8)
            {
                throw;
            }
            cutoff *= 1e-2;
            continue;
        }
        sel = -1;
        for (Eigen::Index j = 0; j < dec.lambdas.size(); ++j)
        {
            if (dec.lambdas(j) <= delta)
            {
                sel = j;
                break;
            }
        }
        if (sel >= 0 || dec.rank >= n || attempt >= 8)
        {
            break;
        }
        cutoff *= 1e-2;
    }

    Reduction out;
    if (sel < 0)
    {
        out.g                = f;
        out.report.m         = static_cast<std::size_t>(n);
        out.report.lambda_m  = dec.lambdas(dec.lambdas.size() - 1);
        out.report.sup_error = 0.0;
        for (const auto& t : f.terms)
        {
            out.report.root_exponents.push_back(t.pole);
        }
        return out;
    }

    const std::size_t m = static_cast<std::size_t>(sel);
    out.report.m        = m;
    out.report.lambda_m = dec.lambdas(sel);
    out.g.alpha0        = f.alpha0;

    if (m > 0)
    {
        // Cancellation in the sum costs about log10(1/lambda_m) digits, and
        // the vector must resolve lambda_m against lambda_0.
        const double span = std::max(1.0, dec.lambdas(0) / out.report.lambda_m);
        const int digits  = 40 + static_cast<int>(std::ceil(std::log10(span)));
        out.report.digits = digits;

        SummedV v = summed_v(dec, f, sel);
        if (opt.refine_vector)
        {
            const oracle::RefinedPair rp =
                oracle::refine_coneig_pair(gen, dec.Z.col(sel), out.report.lambda_m, digits);
            mp::PrecisionScope scope(digits);
            const mp::MPReal inv = mp::MPReal(1.0) / rp.lambda;
            for (std::size_t i = 0; i < f.size(); ++i)
            {
                const mp::MPComplex c =
                    mp::conj(mp::MPComplex(gen.s(static_cast<Eigen::Index>(i)))) * rp.z[i] * inv;
                v.coeffs_mp.push_back(c);
                v.coeffs[i] = {c.re.to_double(), c.im.to_double()};
            }
            out.report.lambda_m = rp.lambda.to_double();
        }

        std::vector<std::size_t> idx(f.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<double> mag(f.size());
        for (std::size_t i = 0; i < f.size(); ++i)
        {
            mag[i] = std::abs(v.coeffs[i]) / std::abs(f.terms[i].residue);
        }
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return mag[a] < mag[b]; });
        std::vector<ExponentPole> seeds;
        for (std::size_t i : idx)
        {
            seeds.push_back(f.terms[i].pole);
        }

        const RootSet roots = find_v_roots(v, m, seeds, digits);
        const VectorXc beta = solve_residues(roots.zetas, f, opt.high_precision_residues);
        for (std::size_t j = 0; j < m; ++j)
        {
            out.g.terms.push_back({roots.zetas[j], beta(static_cast<Eigen::Index>(j))});
        }
        out.report.newton_iters   = roots.iterations;
        out.report.root_exponents = roots.zetas;
    }
    out.report.sup_error = sup_error_estimate(f, out.g, opt.grid_size);
    return out;
}

double CirclePoint::x() const
{
    double t = (hi + lo) / two_pi;
    if (t < 0.0)
    {
        t += 1.0;
    }
    return t >= 1.0 ? t - 1.0 : t;
}

std::vector<CirclePoint> adaptive_grid(const std::vector<const RationalFunction*>& fs,
                                       std::size_t base_points)
{
    std::vector<CirclePoint> pts;
    for (std::size_t k = 0; k < base_points; ++k)
    {
        pts.push_back({two_pi * static_cast<double>(k) / static_cast<double>(base_points), 0.0});
    }
    const double spacing = two_pi / static_cast<double>(std::max<std::size_t>(base_points, 1));
    constexpr int per_window = 33;
    for (const RationalFunction* f : fs)
    {
        for (const auto& t : f->terms)
        {
            // The pole exp(-tau) sits at angle -im(tau), i.e. 2pi - im(tau).
            const double c_hi = two_pi - t.pole.im_tau;
            const double c_lo = ((two_pi - c_hi) - t.pole.im_tau) + 2.4492935982947064e-16;
            for (double scale : {64.0, 8.0, 1.0})
            {
                const double half = std::min(scale * t.pole.re_tau, 0.5 * two_pi);
                if (2.0 * half / (per_window - 1) >= spacing)
                {
                    continue;
                }
                for (int q = 0; q < per_window; ++q)
                {
                    const double off = half * (2.0 * q / (per_window - 1) - 1.0);
                    const double h   = c_hi + off;
                    const double v   = h - c_hi;
                    const double e   = (c_hi - (h - v)) + (off - v);
                    pts.push_back({h, c_lo + e});
                }
            }
        }
    }
    std::sort(pts.begin(), pts.end(), [](const CirclePoint& a, const CirclePoint& b)
              { return a.x() < b.x(); });
    return pts;
}

double sup_error_estimate(const RationalFunction& f, const RationalFunction& g,
                          std::size_t base_points)
{
    if (base_points < 64)
    {
        raise(ErrorCode::InvalidArgument, "sup_error_estimate needs at least 64 base points");
    }
    double worst = 0.0;
    for (const auto& p : adaptive_grid({&f, &g}, base_points))
    {
        worst = std::max(worst, std::abs(evaluate_on_circle(f, p.hi, p.lo) -
                                         evaluate_on_circle(g, p.hi, p.lo)));
    }
    return worst;
}

} // namespace coneig
