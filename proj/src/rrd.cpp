#include "coneig/rrd.hpp"

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

Complex unit_phase(Complex z)
{
    const double r = std::abs(z);
    return r == 0.0 ? Complex(1.0, 0.0) : z / r;
}

// Sigma^{1/2}-free phase fix: scale so that sum_i z_i^2 is real positive, then
// normalize to unit 2-norm.
void normalize_column(Eigen::Ref<VectorXc> z)
{
    const Complex p = z.cwiseProduct(z).sum();
    if (p != Complex(0.0, 0.0))
    {
        z *= std::polar(1.0, -0.5 * std::arg(p));
    }
    const double nrm = z.stableNorm();
    if (nrm > 0.0)
    {
        z /= nrm;
    }
}

// C w with C = X D^2 X^*.
VectorXc apply_c(const MatrixXc& X, const Eigen::VectorXd& D, const VectorXc& w)
{
    VectorXc t = X.adjoint() * w;
    t          = t.cwiseProduct(D.cwiseAbs2().cast<Complex>());
    return X * t;
}

} // namespace

PivotedQR qr_householder_pivoted(const MatrixXc& A)
{
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
    std::stable_sort(out.row_perm.begin(), out.row_perm.end(),
                     [&](Eigen::Index p, Eigen::Index q) {
                         return supn[static_cast<std::size_t>(p)] >
                                supn[static_cast<std::size_t>(q)];
                     });

    MatrixXc B(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
    {
        B.row(i) = A.row(out.row_perm[static_cast<std::size_t>(i)]);
    }

    const Eigen::Index steps = std::min(rows, cols);
    for (Eigen::Index k = 0; k < steps; ++k)
    {
        Eigen::Index p = k;
        double best    = -1.0;
        for (Eigen::Index j = k; j < cols; ++j)
        {
            const double v = B.col(j).tail(rows - k).stableNorm();
            if (v > best)
            {
                best = v;
                p    = j;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best))
        {
            raise(ErrorCode::RankDeficient,
                  "pivot column norm vanished at step " + std::to_string(k));
        }
        if (p != k)
        {
            B.col(k).swap(B.col(p));
            std::swap(out.col_perm[static_cast<std::size_t>(k)],
                      out.col_perm[static_cast<std::size_t>(p)]);
        }

        const Eigen::Index len = rows - k;
        if (len <= 1 || B.col(k).tail(len - 1).stableNorm() == 0.0)
        {
            continue;
        }
        // v = x/|x| - alpha e1 with alpha = -phase(x0); H = I - tau v v^*
        VectorXc v        = B.col(k).tail(len) / best;
        const Complex alf = -unit_phase(v(0));
        v(0) -= alf;
        const double tau = 2.0 / v.squaredNorm();
        if (k + 1 < cols)
        {
            auto trailing = B.block(k, k + 1, len, cols - k - 1);
            const Eigen::RowVectorXcd w = v.adjoint() * trailing;
            trailing.noalias() -= (tau * v) * w;
        }
        B(k, k) = alf * best;
        B.col(k).tail(len - 1).setZero();
    }
    out.R = B.topRows(steps).triangularView<Eigen::Upper>();
    return out;
}

LeftSVD jacobi_svd_left(const MatrixXc& R, int max_sweeps)
{
    const Eigen::Index m = R.rows();
    MatrixXc A           = R.adjoint();
    MatrixXc V           = MatrixXc::Identity(m, m);
    const double tol     = static_cast<double>(std::max<Eigen::Index>(m, 1)) * eps;

    LeftSVD out;
    bool converged = m <= 1;
    int sweep      = 0;
    while (!converged)
    {
        if (sweep >= max_sweeps)
        {
            raise(ErrorCode::NoConvergence,
                  "one-sided Jacobi did not converge in " + std::to_string(max_sweeps) +
                      " sweeps");
        }
        ++sweep;
        converged       = true;
        double max_cos  = 0.0;
        for (Eigen::Index p = 0; p + 1 < m; ++p)
        {
            for (Eigen::Index q = p + 1; q < m; ++q)
            {
                const double np = A.col(p).stableNorm();
                const double nq = A.col(q).stableNorm();
                if (np == 0.0 || nq == 0.0)
                {
                    continue;
                }
                const Complex c =
                    (A.col(p) / np).dot(A.col(q) / nq); // conj(a_p) . a_q
                const double ac = std::abs(c);
                max_cos         = std::max(max_cos, ac);
                if (ac <= tol)
                {
                    continue;
                }
                converged          = false;
                const Complex ph   = std::conj(c) / ac; // e^{-i theta}
                const double zeta  = (nq / np - np / nq) / (2.0 * ac);
                const double t     = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;

                const VectorXc ap = A.col(p);
                const VectorXc aq = A.col(q) * ph;
                A.col(p)          = cs * ap - sn * aq;
                A.col(q)          = sn * ap + cs * aq;

                const VectorXc vp = V.col(p);
                const VectorXc vq = V.col(q) * ph;
                V.col(p)          = cs * vp - sn * vq;
                V.col(q)          = sn * vp + cs * vq;
            }
        }
        out.max_cosine = max_cos;
    }
    out.sweeps = sweep;

    Eigen::VectorXd s(m);
    for (Eigen::Index j = 0; j < m; ++j)
    {
        s(j) = A.col(j).stableNorm();
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return s(a) > s(b); });
    out.sigma.resize(m);
    out.U.resize(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
    {
        const auto src = order[static_cast<std::size_t>(j)];
        out.sigma(j)   = s(src);
        out.U.col(j)   = V.col(src);
    }
    return out;
}

Eigen::VectorXd relative_gaps(const Eigen::VectorXd& lambdas)
{
    const Eigen::Index m = lambdas.size();
    Eigen::VectorXd gaps = Eigen::VectorXd::Ones(m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        for (Eigen::Index j = 0; j < m; ++j)
        {
            if (j != i)
            {
                const double g =
                    std::abs(lambdas(i) - lambdas(j)) / (lambdas(i) + lambdas(j));
                gaps(i) = std::min(gaps(i), g);
            }
        }
    }
    return gaps;
}

Eigen::VectorXd coneig_residuals(const MatrixXc& X, const Eigen::VectorXd& D,
                                 const Eigen::VectorXd& lambdas, const MatrixXc& Z)
{
    Eigen::VectorXd r(Z.cols());
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
    {
        const VectorXc z  = Z.col(j);
        const VectorXc cz = apply_c(X, D, z);
        r(j) = (cz - lambdas(j) * z.conjugate()).stableNorm() / (lambdas(j) * z.stableNorm());
    }
    return r;
}

ConEigDecomposition coneig_rrd(const MatrixXc& X, const Eigen::VectorXd& D,
                               bool with_residuals, RRDTrace* trace)
{
    const Eigen::Index n = X.rows();
    const Eigen::Index m = D.size();
    if (X.cols() != m)
    {
        raise(ErrorCode::InvalidArgument, "X and D dimensions differ");
    }
    for (Eigen::Index i = 0; i < m; ++i)
    {
        if (!(D(i) > 0.0))
        {
            raise(ErrorCode::InvalidArgument, "D must be positive");
        }
    }
    ConEigDecomposition out;
    out.rank = m;
    if (m == 0)
    {
        out.Z.resize(n, 0);
        return out;
    }

    // G = D (X^T X) D, complex symmetric
    MatrixXc G = X.transpose() * X;
    for (Eigen::Index j = 0; j < m; ++j)
    {
        for (Eigen::Index i = 0; i < m; ++i)
        {
            G(i, j) *= D(i) * D(j);
        }
    }

    PivotedQR qr = qr_householder_pivoted(G);
    LeftSVD svd  = jacobi_svd_left(qr.R);

    Eigen::VectorXd Dp(m);
    for (Eigen::Index j = 0; j < m; ++j)
    {
        Dp(j) = D(qr.col_perm[static_cast<std::size_t>(j)]);
    }
    MatrixXc R1 = MatrixXc::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
    {
        for (Eigen::Index i = 0; i <= j; ++i)
        {
            R1(i, j) = qr.R(i, j) / Dp(i) / Dp(j);
        }
    }
    MatrixXc X1(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
    {
        const double sq = std::sqrt(svd.sigma(j));
        for (Eigen::Index i = 0; i < m; ++i)
        {
            X1(i, j) = svd.U(i, j) / Dp(i) * sq;
        }
    }
    MatrixXc Y1 = R1.triangularView<Eigen::Upper>().solve(X1);

    MatrixXc Y(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
    {
        Y.row(qr.col_perm[static_cast<std::size_t>(j)]) = Y1.row(j);
    }
    MatrixXc Z = (X * Y).conjugate();
    for (Eigen::Index j = 0; j < m; ++j)
    {
        normalize_column(Z.col(j));
    }

    // Convention probe on the leading pair.
    {
        const VectorXc z   = Z.col(0);
        const double l0    = svd.sigma(0);
        const double plain = (apply_c(X, D, z) - l0 * z.conjugate()).stableNorm();
        const double conj =
            (apply_c(X, D, z.conjugate()) - l0 * z).stableNorm();
        if (conj < plain)
        {
            Z = Z.conjugate().eval();
            out.conjugated = true;
        }
    }

    out.lambdas = svd.sigma;
    out.Z       = std::move(Z);
    out.relgaps = relative_gaps(out.lambdas);
    out.clustered.resize(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j)
    {
        out.clustered[static_cast<std::size_t>(j)] = out.relgaps(j) < cluster_relgap;
    }
    if (with_residuals)
    {
        out.residuals = coneig_residuals(X, D, out.lambdas, out.Z);
    }
    if (trace)
    {
        trace->G   = std::move(G);
        trace->qr  = std::move(qr);
        trace->svd = std::move(svd);
        trace->R1  = std::move(R1);
        trace->X1  = std::move(X1);
        trace->Y1  = std::move(Y1);
    }
    return out;
}

ConEigDecomposition con_eigvector(const CauchyGenerators& g, double delta,
                                  bool with_residuals)
{
    const PartialCholesky pc = partial_cholesky(g, delta);
    const MatrixXc X         = pc.X();
    ConEigDecomposition dec  = coneig_rrd(X, pc.D, with_residuals);
    if (delta == 0.0)
    {
        return dec;
    }

    const Eigen::Index m = dec.lambdas.size();
    Eigen::Index keep    = 0;
    while (keep < m && dec.lambdas(keep) >= delta)
    {
        ++keep;
    }
    if (keep < m)
    {
        // The pair just below delta is only resolved when the discarded Schur
        // complement is negligible relative to it.
        if (pc.m < g.size() && pc.tail > eps * dec.lambdas(keep))
        {
            std::ostringstream os;
            os.precision(6);
            os << "truncation tail " << pc.tail << " not below eps * lambda = "
               << eps * dec.lambdas(keep);
            raise(ErrorCode::DeltaTooSmall, os.str());
        }
        ++keep;
    }
    if (keep < m)
    {
        dec.lambdas.conservativeResize(keep);
        dec.Z.conservativeResize(Eigen::NoChange, keep);
        dec.relgaps.conservativeResize(keep);
        dec.clustered.resize(static_cast<std::size_t>(keep));
        if (dec.residuals.size() > 0)
        {
            dec.residuals.conservativeResize(keep);
        }
    }
    return dec;
}

} // namespace coneig
