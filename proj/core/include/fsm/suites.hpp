#pragma once

// Randomized verification suites over the exact oracles. Each suite reports
// counts and keeps every failing instance so it can be written out and re-run.

#include "fsm/distribution.hpp"
#include "fsm/structural.hpp"
#include "fsm/variable.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace fsm {

struct Triple {
    Variable x, y;
    std::optional<Variable> z;
};

/// Random triples on one space; Z is absent for roughly a quarter of them.
std::vector<Triple> random_triples(const SpacePtr& space, std::size_t count, Rng& rng, ValueId max_values = 3);

struct SoundnessViolation {
    Triple triple;
    FactorizingDistribution distribution;
};

struct SoundnessReport {
    std::size_t triples = 0;
    std::size_t structurally_independent = 0;
    std::size_t distributions_checked = 0;
    std::vector<SoundnessViolation> violations;
};

/// For every structurally independent triple, `samples` sampled factorizing
/// distributions (plus the `extra` ones) must all give conditional independence.
SoundnessReport soundness_suite(const std::vector<Triple>& triples, std::size_t samples, Rng& rng,
                                std::uint32_t denominator_bound = 64,
                                const std::vector<FactorizingDistribution>& extra = {});

struct CompletenessReport {
    std::size_t triples = 0;
    std::size_t structurally_dependent = 0;
    std::size_t witnessed = 0;
    std::vector<Triple> failures;
};

/// Every structurally dependent triple must yield a witness within `trials`.
CompletenessReport completeness_suite(const std::vector<Triple>& triples, std::size_t trials, Rng& rng,
                                      std::uint32_t denominator_bound = 64);

struct AxiomCounts {
    std::size_t instances = 0;
    /// Instances whose premise held.
    std::size_t applicable = 0;
    std::size_t failures = 0;
    std::vector<AxiomInstance> counterexamples;
};

struct AxiomSuiteReport {
    std::array<AxiomCounts, 6> counts;

    const AxiomCounts& operator[](Axiom a) const { return counts[static_cast<std::size_t>(a)]; }
    AxiomCounts& operator[](Axiom a) { return counts[static_cast<std::size_t>(a)]; }
    /// No failures outside the intersection axiom, which does not hold in general.
    bool clean() const;
};

/// Each instance (X, Y, Z, W) is checked against every axiom. At most
/// `keep_counterexamples` failing instances are kept per axiom.
AxiomSuiteReport axiom_suite(const std::vector<AxiomInstance>& instances, std::size_t keep_counterexamples = 8);

std::vector<AxiomInstance> random_axiom_instances(const SpacePtr& space, std::size_t count, Rng& rng,
                                                  ValueId max_values = 3);

}  // namespace fsm
