#pragma once

// Disintegration, generation and history.
//
//   J disintegrates C   iff  C = C_J x C_{I\J}
//   J generates X | C   iff  J disintegrates C and U_J determines X on C
//   h(X | C)            =    intersection of all J that generate X given C
//
// The disintegrating sets of an event form a Boolean algebra of subsets of I,
// so they are exactly the unions of its atoms. Since a set containing the
// history generates whenever it disintegrates, an atom b belongs to h(X | C)
// iff U_{I\b} does not determine X on C. `history` computes the atoms once and
// then runs one determination pass per atom; `history_exhaustive` evaluates
// the intersection over all 2^|I| subsets literally.

#include "fsm/distribution.hpp"
#include "fsm/space.hpp"
#include "fsm/variable.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace fsm {

struct HistoryOptions {
    /// Largest |I| accepted; larger spaces raise CapacityError.
    std::size_t max_factors = 20;
};

/// C = C_J x C_{I\J}. Every J disintegrates the empty event.
bool disintegrates(IndexSubset J, const Event& C);

/// J disintegrates C and U_J determines X on C.
bool generates(IndexSubset J, const Variable& X, const Event& C);

/// The atoms of the Boolean algebra of index sets that disintegrate an event,
/// i.e. the finest partition of I with C = X_b C_b over its blocks.
class Decomposition {
public:
    explicit Decomposition(Event C, HistoryOptions options = {});

    const Event& event() const { return event_; }
    const std::vector<IndexSubset>& atoms() const { return atoms_; }
    /// Atoms on which C is not constant. The others never enter a history.
    const std::vector<IndexSubset>& varying_atoms() const { return varying_; }
    /// J is a union of atoms.
    bool disintegrated_by(IndexSubset J) const;

private:
    friend IndexSubset history(const Variable& X, const Decomposition& decomposition);

    Event event_;
    std::vector<IndexSubset> atoms_;
    std::vector<IndexSubset> varying_;
    // Members of C, and per varying atom b the dense id of each member's
    // restriction to I \ b, so history queries are one lookup pass per atom.
    std::vector<PointIndex> members_;
    std::vector<std::vector<std::uint32_t>> keys_;
    std::vector<std::uint32_t> key_counts_;
};

/// h(X | C). Throws CapacityError when |I| > options.max_factors.
IndexSubset history(const Variable& X, const Event& C, HistoryOptions options = {});
IndexSubset history(const Variable& X, const Decomposition& decomposition);

/// Unconditional history h(X) = h(X | Omega).
IndexSubset history(const Variable& X, HistoryOptions options = {});

/// Intersection of all generating subsets by plain enumeration of 2^|I| sets.
IndexSubset history_exhaustive(const Variable& X, const Event& C, HistoryOptions options = {});

/// h(X | Z = z). Throws ValueRangeError when z >= Z.num_values().
IndexSubset history_given_value(const Variable& X, const Variable& Z, ValueId z, HistoryOptions options = {});

/// The factors irrelevant to A given C, computed as I \ h(1_A | C).
IndexSubset cohistory(const Event& A, const Event& C, HistoryOptions options = {});

using DistributionPair = std::pair<FactorizingDistribution, FactorizingDistribution>;

/// Searches pairs (P, Q) of strictly positive factorizing distributions that
/// differ only in factor i, and returns one with P(A | C) != Q(A | C). Returns
/// nullopt when none is found within `trials`, and always when C is empty.
std::optional<DistributionPair> relevance_witness(FactorId i, const Event& A, const Event& C, std::size_t trials,
                                                  Rng& rng, std::uint32_t denominator_bound = 64);

}  // namespace fsm
