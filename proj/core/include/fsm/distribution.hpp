#pragma once

// Exact distributions on factored spaces.
//
// All probabilities are GMP rationals. Conditional independence is checked in
// the cross-multiplied form P(A n C) P(B n C) = P(A n B n C) P(C), which also
// encodes the convention that anything is independent given a null event.

#include "fsm/rational.hpp"
#include "fsm/space.hpp"
#include "fsm/variable.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace fsm {

using Rng = std::mt19937_64;

class GeneralDistribution;

/// P = (x)_i P_i: one probability vector per factor.
class FactorizingDistribution {
public:
    /// Throws DomainError on a vector of the wrong length, PreconditionError when an
    /// entry is negative or a vector does not sum to exactly 1.
    FactorizingDistribution(SpacePtr space, std::vector<std::vector<Rational>> factors);

    static FactorizingDistribution uniform(SpacePtr space);

    const SpacePtr& space_ptr() const { return space_; }
    const FactoredSpace& space() const { return *space_; }
    const std::vector<Rational>& factor(FactorId i) const { return factors_.at(i.value); }
    const std::vector<std::vector<Rational>>& factors() const { return factors_; }

    Rational point_probability(PointIndex index) const;
    /// Copy with factor i replaced.
    FactorizingDistribution with_factor(FactorId i, std::vector<Rational> values) const;
    GeneralDistribution to_general() const;

    friend bool operator==(const FactorizingDistribution&, const FactorizingDistribution&);

private:
    SpacePtr space_;
    std::vector<std::vector<Rational>> factors_;
};

/// An arbitrary distribution on Omega as a dense vector over the canonical encoding.
class GeneralDistribution {
public:
    /// Throws DomainError on wrong length, PreconditionError on negative entries or
    /// a total different from 1.
    GeneralDistribution(SpacePtr space, std::vector<Rational> probabilities);

    const SpacePtr& space_ptr() const { return space_; }
    const FactoredSpace& space() const { return *space_; }
    const std::vector<Rational>& probabilities() const { return probs_; }
    const Rational& operator[](PointIndex index) const { return probs_[index]; }

    friend bool operator==(const GeneralDistribution&, const GeneralDistribution&);

private:
    SpacePtr space_;
    std::vector<Rational> probs_;
};

/// A distribution over Omega_J; `distribution` lives on space.subspace(domain).
struct SubDistribution {
    IndexSubset domain;
    GeneralDistribution distribution;
};

struct IndependenceVerdict {
    bool independent = true;
    /// First violating (x, y, z); z = 0 for the unconditional query.
    std::optional<std::array<ValueId, 3>> witness;
};

Rational prob_event(const GeneralDistribution& P, const Event& A);
Rational prob_event(const FactorizingDistribution& P, const Event& A);

/// P(w) = prod_i P(w_i) for every w, P(w_i) being the factor marginals of P.
bool factorizes(const GeneralDistribution& P);

bool cond_indep(const GeneralDistribution& P, const Event& A, const Event& B, const Event& C);
bool cond_indep(const FactorizingDistribution& P, const Event& A, const Event& B, const Event& C);

/// x indep y | z for every value triple. Z absent means unconditional.
IndependenceVerdict cond_indep_vars(const GeneralDistribution& P, const Variable& X, const Variable& Y,
                                    const std::optional<Variable>& Z = std::nullopt);
IndependenceVerdict cond_indep_vars(const FactorizingDistribution& P, const Variable& X, const Variable& Y,
                                    const std::optional<Variable>& Z = std::nullopt);

/// Floating-point variant for performance exploration only; nothing in the
/// verification paths uses it. Each cell passes when
/// |P(x,z) P(y,z) - P(x,y,z) P(z)| <= tolerance * P(z)^2.
bool cond_indep_vars_approx(const FactorizingDistribution& P, const Variable& X, const Variable& Y,
                            const std::optional<Variable>& Z = std::nullopt, double tolerance = 1e-9);

/// Strictly positive probability vector of length `cardinality`: k_j / sum k with
/// k_j uniform in [1, denominator_bound].
std::vector<Rational> sample_simplex_point(std::uint32_t cardinality, Rng& rng, std::uint32_t denominator_bound);

/// Independent sample_simplex_point per factor. Throws PreconditionError if the
/// bound is < 2.
FactorizingDistribution sample_factorizing(SpacePtr space, Rng& rng, std::uint32_t denominator_bound = 64);

/// Structural independence of (X, Y | Z) implies X indep Y | Z under P.
bool soundness_check(const Variable& X, const Variable& Y, const std::optional<Variable>& Z,
                     const FactorizingDistribution& P);

/// A sampled strictly positive factorizing distribution under which X and Y are
/// dependent given Z, or nullopt after `trials` draws.
std::optional<FactorizingDistribution> completeness_witness(const Variable& X, const Variable& Y,
                                                            const std::optional<Variable>& Z, std::size_t trials,
                                                            Rng& rng, std::uint32_t denominator_bound = 64);

Event support(const GeneralDistribution& P);
Event support(const FactorizingDistribution& P);

/// The point mass at w.
GeneralDistribution delta(SpacePtr space, const Point& w);

/// P_J = P o U_J^{-1}.
SubDistribution marginal(const GeneralDistribution& P, IndexSubset J);

/// (P_J (x) P_K)(a) = P_J(a_J) P_K(a_K) on Omega_{J u K} of `parent`.
/// Throws DisjointnessError when J and K overlap.
SubDistribution outer(const FactoredSpace& parent, const SubDistribution& PJ, const SubDistribution& PK);

/// Index of the Omega_J point obtained by restricting a point of `parent`.
PointIndex subspace_index(const FactoredSpace& parent, IndexSubset J, PointIndex index);

}  // namespace fsm
