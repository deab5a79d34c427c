#pragma once

// DAGs with conditional probability tables and the factored space built from
// them.
//
// Parent configurations of a node are coded lexicographically over its parents
// in ascending node order, the first parent being the most significant digit.
// CPT rows, factor order inside the constructed space and the factor labels all
// follow that coding. The constructed space lists factors by topological node
// order (Kahn's algorithm, smallest ready id first), then by configuration code.

#include "fsm/distribution.hpp"
#include "fsm/history.hpp"
#include "fsm/space.hpp"
#include "fsm/variable.hpp"

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fsm {

using NodeId = std::uint32_t;

/// A set of DAG nodes as a bitmask over node ids.
class NodeSet {
public:
    constexpr NodeSet() = default;
    constexpr explicit NodeSet(std::uint64_t mask) : mask_(mask) {}
    NodeSet(std::initializer_list<NodeId> ids) {
        for (auto id : ids) insert(id);
    }

    constexpr std::uint64_t mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
    constexpr bool contains(NodeId v) const { return v < 64 && ((mask_ >> v) & 1u); }
    constexpr void insert(NodeId v) { mask_ |= std::uint64_t{1} << v; }
    std::vector<NodeId> ids() const;

    friend constexpr NodeSet operator|(NodeSet a, NodeSet b) { return NodeSet(a.mask_ | b.mask_); }
    friend constexpr NodeSet operator&(NodeSet a, NodeSet b) { return NodeSet(a.mask_ & b.mask_); }
    friend constexpr NodeSet operator-(NodeSet a, NodeSet b) { return NodeSet(a.mask_ & ~b.mask_); }
    friend constexpr bool operator==(NodeSet, NodeSet) = default;

private:
    std::uint64_t mask_ = 0;
};

struct Node {
    std::string name;
    std::uint32_t cardinality = 2;

    friend bool operator==(const Node&, const Node&) = default;
};

class Dag {
public:
    static constexpr std::size_t kMaxNodes = 64;

    /// Throws DomainError on unknown endpoints, duplicate names, self loops, repeated
    /// edges or cardinality < 2; PreconditionError when the edges contain a cycle.
    Dag(std::vector<Node> nodes, std::vector<std::pair<NodeId, NodeId>> edges);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(NodeId v) const { return nodes_.at(v); }
    std::uint32_t cardinality(NodeId v) const { return node(v).cardinality; }
    std::optional<NodeId> find(std::string_view name) const;
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

    /// Ascending node ids.
    const std::vector<NodeId>& parents(NodeId v) const { return parents_.at(v); }
    const std::vector<NodeId>& topological_order() const { return topo_; }
    /// Strict ancestors.
    NodeSet ancestors(NodeId v) const { return ancestors_.at(v); }
    bool is_ancestor(NodeId a, NodeId v) const { return ancestors(v).contains(a); }
    NodeSet all_nodes() const { return NodeSet(nodes_.size() >= 64 ? ~0ULL : (1ULL << nodes_.size()) - 1); }

    /// |Val_pa(v)|; 1 for roots.
    std::uint64_t num_parent_configurations(NodeId v) const;
    /// Parent values for a configuration code, in parents(v) order.
    std::vector<ValueId> parent_values(NodeId v, std::uint64_t configuration) const;

    /// Val = X_v Val_v as a factored space (node v is factor v).
    SpacePtr value_space() const;

    friend bool operator==(const Dag&, const Dag&) = default;

private:
    std::vector<Node> nodes_;
    std::vector<std::pair<NodeId, NodeId>> edges_;
    std::vector<std::vector<NodeId>> parents_;
    std::vector<NodeSet> ancestors_;
    std::vector<NodeId> topo_;
};

/// rows[v][configuration][value] = P(x_v = value | x_pa(v) = configuration).
struct Cpt {
    std::vector<std::vector<std::vector<Rational>>> rows;

    friend bool operator==(const Cpt&, const Cpt&) = default;
};

/// Throws DomainError on shape mismatches and PreconditionError on negative
/// entries or a row not summing to 1 (the message names node and row).
void validate_cpt(const Dag& G, const Cpt& cpt);

/// d-separation by the ancestral moral graph: keep ancestors of V1 u V2 u V3,
/// marry co-parents, drop directions, delete V3 and test for a path. Nodes of
/// V1 or V2 that lie in V3 are dropped; an empty side is separated; a node shared
/// by V1 and V2 outside V3 is never separated from itself.
bool d_separated(const Dag& G, NodeSet V1, NodeSet V2, NodeSet V3);

struct FsmConstruction {
    SpacePtr space;
    /// Val, the observation space.
    SpacePtr value_space;
    /// X_v(w) = w_(v, X_pa(v)(w)).
    std::vector<Variable> node_vars;
    /// O = X; value id is the canonical index of (X_v(w))_v in value_space.
    Variable observation;
    /// I_v, the factors owned by node v.
    std::vector<IndexSubset> node_factors;
    /// factor -> (node, parent configuration code)
    std::vector<std::pair<NodeId, std::uint64_t>> factor_owner;

    FactorId factor_of(NodeId v, std::uint64_t configuration) const;
    /// X_V, the joint of node variables in ascending node order.
    Variable node_set_variable(NodeSet V) const;
};

/// The factored space model of G. Factor (v, c) is labelled "v" for roots and
/// "v[p1=a,p2=b]" otherwise. Throws CapacityError when |Omega| exceeds the cap.
FsmConstruction build_fsm(const Dag& G, std::uint64_t size_cap = FactoredSpace::kDefaultSizeCap);

/// tau(P^Omega)(x) = P^Omega(X = x).
GeneralDistribution tau(const FsmConstruction& construction, const FactorizingDistribution& P_omega);

/// Factor (v, c) gets the CPT row P(. | c).
FactorizingDistribution tau_inverse(const FsmConstruction& construction, const Dag& G, const Cpt& cpt);
/// Throws PreconditionError unless P factorizes over G.
FactorizingDistribution tau_inverse(const FsmConstruction& construction, const Dag& G, const GeneralDistribution& P);

/// P(x) prod_v P(x_pa(v)) = prod_v P(x_v, x_pa(v)) at every x.
bool bn_factorizes(const Dag& G, const GeneralDistribution& P);

/// P(x) = prod_v P(x_v | x_pa(v)) over Val.
GeneralDistribution joint_from_cpt(const Dag& G, const Cpt& cpt);

/// Conditional rows of P; configurations with P(x_pa) = 0 get uniform rows.
Cpt cpt_from_joint(const Dag& G, const GeneralDistribution& P);

/// Strictly positive rows drawn with sample_simplex_point.
Cpt sample_cpt(const Dag& G, Rng& rng, std::uint32_t denominator_bound = 64);

struct EquivalenceOptions {
    /// Random CPT sets and random factor-vector sets per round-trip direction.
    std::size_t tau_samples = 100;
    std::uint32_t denominator_bound = 64;
    std::uint64_t seed = 1;
    /// Triples re-evaluated through structurally_independent directly.
    std::size_t spot_checks = 16;
    HistoryOptions history = {};
};

struct DsepMismatch {
    NodeSet v1, v2, v3;
    bool d_separated = false;
    bool structurally_independent = false;
};

struct EquivalenceReport {
    std::size_t triples_checked = 0;
    std::vector<DsepMismatch> dsep_mismatches;
    std::size_t pairs_checked = 0;
    std::vector<std::pair<NodeId, NodeId>> ancestor_mismatches;
    std::vector<NodeId> history_formula_mismatches;
    std::size_t spot_checks = 0;
    std::size_t spot_check_mismatches = 0;
    std::size_t tau_round_trips = 0;
    std::size_t tau_failures = 0;
    std::size_t factorization_checks = 0;
    std::size_t factorization_mismatches = 0;

    bool ok() const {
        return dsep_mismatches.empty() && ancestor_mismatches.empty() && history_formula_mismatches.empty() &&
               spot_check_mismatches == 0 && tau_failures == 0 && factorization_mismatches == 0;
    }
};

/// Checks on G and its constructed FSM:
///  - d_separated(V1, V2, V3) == structurally_independent(X_V1, X_V2 | X_V3) for all
///    triples of node subsets;
///  - ancestor(v1, v2) == strictly_before(X_v1, X_v2) for all ordered pairs;
///  - h(X_v) is the union of I_u over u in A(v) u {v};
///  - tau(tau^-1(P)) = P for sampled CPTs and tau^-1(tau(P^Omega)) = P^Omega for
///    sampled factor vectors;
///  - bn_factorizes(P) iff tau(tau^-1(cpt_from_joint(P))) = P, on factorizing and
///    on unrestricted sampled P.
EquivalenceReport equivalence_suite(const Dag& G, const EquivalenceOptions& options = {});

/// The suite on an already constructed FSM (it must equal build_fsm(G)).
EquivalenceReport equivalence_suite(const Dag& G, const FsmConstruction& construction,
                                    const EquivalenceOptions& options = {});

}  // namespace fsm
