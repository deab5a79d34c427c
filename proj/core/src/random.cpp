#include "fsm/random.hpp"

#include "fsm/error.hpp"

#include <algorithm>
#include <numeric>

namespace fsm {

namespace {

std::uint64_t uniform(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

bool coin(Rng& rng) { return rng() & 1u; }

}  // namespace

SpacePtr random_space(Rng& rng, const RandomSpaceOptions& options) {
    if (options.min_factors > options.max_factors || options.max_cardinality < 1) {
        throw PreconditionError("bad random space options");
    }
    for (;;) {
        const auto n = uniform(rng, options.min_factors, options.max_factors);
        std::vector<std::uint32_t> cards;
        std::uint64_t size = 1;
        for (std::size_t i = 0; i < n; ++i) {
            cards.push_back(static_cast<std::uint32_t>(uniform(rng, 1, options.max_cardinality)));
            size *= cards.back();
        }
        if (size <= options.max_size) return make_space_from_cardinalities(cards);
    }
}

Variable random_variable(const SpacePtr& space, Rng& rng, ValueId max_values) {
    const auto n = space->num_factors();
    const auto kind = rng() % 8;
    if (kind == 0) return constant(space);
    if (kind == 1 && n > 0) return background(space, FactorId{static_cast<std::uint32_t>(rng() % n)});
    if (kind == 2) return indicator(random_event(space, rng));

    // A random table on the values of a random subset of factors.
    IndexSubset J;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (coin(rng)) J.insert(FactorId{i});
    }
    const auto values = static_cast<ValueId>(uniform(rng, std::min<ValueId>(2, max_values), std::max<ValueId>(1, max_values)));
    const auto sub = space->subspace(J);
    std::vector<ValueId> image(sub.size());
    // Constants are already covered above; redraw images that collapse to one value.
    do {
        for (auto& v : image) v = static_cast<ValueId>(rng() % values);
    } while (values > 1 && image.size() > 1 && std::all_of(image.begin(), image.end(), [&](ValueId v) { return v == image[0]; }));
    std::vector<ValueId> table(space->size());
    for (PointIndex w = 0; w < space->size(); ++w) table[w] = image[subspace_index(*space, J, w)];
    return Variable(space, std::move(table), values);
}

Event random_event(const SpacePtr& space, Rng& rng) {
    boost::dynamic_bitset<> bits(space->size());
    if (coin(rng)) {
        for (PointIndex w = 0; w < space->size(); ++w) bits[w] = coin(rng);
        return Event(space, std::move(bits));
    }
    std::vector<std::vector<bool>> allowed;
    for (std::uint32_t i = 0; i < space->num_factors(); ++i) {
        auto& row = allowed.emplace_back(space->cardinality(FactorId{i}));
        const bool everything = rng() % 3 == 0;
        for (std::size_t k = 0; k < row.size(); ++k) row[k] = everything || coin(rng);
        if (std::none_of(row.begin(), row.end(), [](bool b) { return b; })) row[rng() % row.size()] = true;
    }
    for (PointIndex w = 0; w < space->size(); ++w) {
        bool in = true;
        for (std::uint32_t i = 0; i < space->num_factors() && in; ++i) in = allowed[i][space->coordinate(w, FactorId{i})];
        bits[w] = in;
    }
    return Event(space, std::move(bits));
}

std::uint64_t constructed_space_size(const Dag& G) {
    long double size = 1;
    for (NodeId v = 0; v < G.size(); ++v) {
        for (std::uint64_t c = 0; c < G.num_parent_configurations(v); ++c) size *= G.cardinality(v);
        if (size > 1e18L) return ~std::uint64_t{0};
    }
    return static_cast<std::uint64_t>(size);
}

Dag random_dag(std::size_t num_nodes, Rng& rng, double edge_probability, std::uint32_t max_cardinality,
               std::uint64_t max_space_size) {
    if (max_cardinality < 2) throw PreconditionError("node cardinality must be at least 2");
    std::bernoulli_distribution edge(edge_probability);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<NodeId> order(num_nodes);
        std::iota(order.begin(), order.end(), NodeId{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Node> nodes;
        for (std::size_t v = 0; v < num_nodes; ++v) {
            nodes.push_back(Node{"v" + std::to_string(v), static_cast<std::uint32_t>(uniform(rng, 2, max_cardinality))});
        }
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (std::size_t a = 0; a < num_nodes; ++a) {
            for (std::size_t b = a + 1; b < num_nodes; ++b) {
                if (edge(rng)) edges.emplace_back(order[a], order[b]);
            }
        }
        Dag G(std::move(nodes), std::move(edges));
        if (constructed_space_size(G) <= max_space_size) return G;
    }
    throw CapacityError("no random DAG within the space size limit");
}

Dag random_dag(const std::vector<std::uint32_t>& cardinalities, Rng& rng, double edge_probability) {
    const auto n = cardinalities.size();
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Node> nodes;
    for (std::size_t v = 0; v < n; ++v) nodes.push_back(Node{"v" + std::to_string(v), cardinalities[v]});
    std::bernoulli_distribution edge(edge_probability);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (edge(rng)) edges.emplace_back(order[a], order[b]);
        }
    }
    return Dag(std::move(nodes), std::move(edges));
}

std::vector<Dag> all_dags(std::size_t num_nodes) {
    if (num_nodes > 5) throw CapacityError("all_dags supports at most 5 nodes");
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId a = 0; a < num_nodes; ++a) {
        for (NodeId b = a + 1; b < num_nodes; ++b) pairs.emplace_back(a, b);
    }
    std::vector<Node> nodes;
    for (std::size_t v = 0; v < num_nodes; ++v) nodes.push_back(Node{"v" + std::to_string(v), 2});

    // Each unordered pair is absent, a -> b or b -> a.
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < pairs.size(); ++k) total *= 3;
    std::vector<Dag> out;
    for (std::uint64_t code = 0; code < total; ++code) {
        std::vector<std::pair<NodeId, NodeId>> edges;
        auto rest = code;
        for (auto [a, b] : pairs) {
            const auto digit = rest % 3;
            rest /= 3;
            if (digit == 1) edges.emplace_back(a, b);
            if (digit == 2) edges.emplace_back(b, a);
        }
        try {
            out.emplace_back(nodes, std::move(edges));
        } catch (const PreconditionError&) {
            // cyclic orientation
        }
    }
    return out;
}

}  // namespace fsm
