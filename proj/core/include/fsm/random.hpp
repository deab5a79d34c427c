#pragma once

// Random generators for spaces, variables, events and DAGs, used by the
// property tests, the verify command and the acceptance suite.

#include "fsm/bayesnet.hpp"
#include "fsm/distribution.hpp"
#include "fsm/space.hpp"
#include "fsm/variable.hpp"

#include <cstdint>
#include <vector>

namespace fsm {

struct RandomSpaceOptions {
    std::size_t min_factors = 1;
    std::size_t max_factors = 4;
    std::uint32_t max_cardinality = 3;
    /// Redraw until |Omega| is at most this.
    std::uint64_t max_size = 256;
};

SpacePtr random_space(Rng& rng, const RandomSpaceOptions& options = {});

/// One of: a random function of a random subset of factors, a background
/// variable, an indicator of a random event, or a constant.
Variable random_variable(const SpacePtr& space, Rng& rng, ValueId max_values = 3);

/// Either an independent coin per point or a product of random per-factor
/// value sets, so that both tangled and disintegrable events occur.
Event random_event(const SpacePtr& space, Rng& rng);

/// Edge u -> v (u < v in a random relabelling) with probability edge_probability;
/// cardinalities uniform in [2, max_cardinality]. Redraws until the constructed
/// space has at most `max_space_size` points.
Dag random_dag(std::size_t num_nodes, Rng& rng, double edge_probability = 0.5, std::uint32_t max_cardinality = 2,
               std::uint64_t max_space_size = FactoredSpace::kDefaultSizeCap);

/// Nodes "v0", "v1", ... with the given cardinalities and random edges.
Dag random_dag(const std::vector<std::uint32_t>& cardinalities, Rng& rng, double edge_probability = 0.5);

/// Every labelled DAG on n binary nodes named "v0", "v1", ... (n <= 5).
std::vector<Dag> all_dags(std::size_t num_nodes);

/// |Omega| of build_fsm(G) without building it.
std::uint64_t constructed_space_size(const Dag& G);

}  // namespace fsm
