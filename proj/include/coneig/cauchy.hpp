///
/// \file cauchy.hpp
///
/// Rational functions on the unit circle and the Cauchy generators of their
/// con-eigenvalue problem.
///
#ifndef CONEIG_CAUCHY_HPP
#define CONEIG_CAUCHY_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coneig/kernels.hpp"

namespace coneig
{

using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

struct PoleTerm
{
    ExponentPole pole;
    Complex residue;
};

///
/// f(z) = sum_i alpha_i / (z - gamma_i) + sum_i conj(alpha_i) z / (1 - conj(gamma_i) z) + alpha0
///
/// On the unit circle the second sum is the complex conjugate of the first,
/// so f is real there whenever alpha0 is real.
///
struct RationalFunction
{
    Complex alpha0{0.0, 0.0};
    std::vector<PoleTerm> terms;

    std::size_t size() const
    {
        return terms.size();
    }
};

/// Value of f at exp(i theta).
Complex evaluate_on_circle(const RationalFunction& f, double theta);

/// Same with theta = theta_hi + theta_lo; needed when theta sits within a few
/// ulps of a pole angle.
Complex evaluate_on_circle(const RationalFunction& f, double theta_hi, double theta_lo);

struct Diagnostic
{
    enum class Kind
    {
        Empty,
        NonPositiveReTau,
        NonFinite,
        DuplicatePole,
        ZeroResidue,
    };
    Kind kind;
    std::size_t index;
    std::size_t other; // second index for DuplicatePole
    std::string message;
};

struct ValidationReport
{
    std::vector<Diagnostic> issues;
    bool ok() const
    {
        return issues.empty();
    }
};

/// Normalizes im_tau in place and reports duplicate poles, re_tau <= 0 and
/// zero residues. Never throws.
ValidationReport validate(RationalFunction& f);

/// Throws the matching Error for the first issue reported by `validate`.
void require_valid(RationalFunction& f);

///
/// Generators of C_ij = a_i b_j / (x_i + y_j).
///
/// When built from exponents, `s` holds the principal square roots of the
/// residues and all differences are routed through the exponent kernels. Raw
/// generators (no exponents) are accepted by the factorizations too, with the
/// usual loss of accuracy for close nodes.
///
struct CauchyGenerators
{
    VectorXc a;
    VectorXc b;
    VectorXc x;
    VectorXc y;
    VectorXc s;
    std::optional<std::vector<ExponentPole>> exponents;

    Eigen::Index size() const
    {
        return a.size();
    }
    bool has_exponents() const
    {
        return exponents.has_value();
    }
};

/// Generators of C_ij = s_i conj(s_j) / (1 - gamma_i conj(gamma_j)),
/// s_i = sqrt(alpha_i). Throws ZeroResidue for a vanishing residue.
CauchyGenerators generators_from_rational(const RationalFunction& f);

/// Generators with poles `exps` and residues `alpha`.
CauchyGenerators generators_from_exponents(const std::vector<ExponentPole>& exps,
                                           const VectorXc& alpha);

/// Raw generators; x + y is evaluated directly.
CauchyGenerators generators_from_raw(VectorXc a, VectorXc b, VectorXc x, VectorXc y);

/// C_ij (0-based indices).
Complex eval_entry(const CauchyGenerators& g, Eigen::Index i, Eigen::Index j);

/// Dense C. Reference use only.
MatrixXc assemble(const CauchyGenerators& g);

} // namespace coneig

#endif /* CONEIG_CAUCHY_HPP */
