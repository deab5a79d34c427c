#include "fsm/bayesnet.hpp"

#include "fsm/error.hpp"
#include "fsm/structural.hpp"
#include "weights.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <unordered_set>

namespace fsm {

std::vector<NodeId> NodeSet::ids() const {
    std::vector<NodeId> out;
    for (auto m = mask_; m != 0; m &= m - 1) out.push_back(static_cast<NodeId>(std::countr_zero(m)));
    return out;
}

Dag::Dag(std::vector<Node> nodes, std::vector<std::pair<NodeId, NodeId>> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    const auto n = nodes_.size();
    if (n > kMaxNodes) throw CapacityError("at most 64 DAG nodes are supported");
    std::unordered_set<std::string> names;
    for (const auto& node : nodes_) {
        if (node.name.empty()) throw DomainError("node names must be non-empty");
        if (!names.insert(node.name).second) throw DomainError("duplicate node name '" + node.name + "'");
        if (node.cardinality < 2) throw DomainError("node '" + node.name + "' needs at least 2 values");
    }
    parents_.assign(n, {});
    std::set<std::pair<NodeId, NodeId>> seen;
    std::vector<std::vector<NodeId>> children(n);
    for (auto [from, to] : edges_) {
        if (from >= n || to >= n) throw DomainError("edge references an unknown node");
        if (from == to) throw DomainError("self loop on node '" + nodes_[from].name + "'");
        if (!seen.insert({from, to}).second) throw DomainError("repeated edge");
        parents_[to].push_back(from);
        children[from].push_back(to);
    }
    for (auto& p : parents_) std::sort(p.begin(), p.end());

    std::vector<std::size_t> indegree(n);
    for (std::size_t v = 0; v < n; ++v) indegree[v] = parents_[v].size();
    std::set<NodeId> ready;
    for (NodeId v = 0; v < n; ++v) {
        if (indegree[v] == 0) ready.insert(v);
    }
    while (!ready.empty()) {
        auto v = *ready.begin();
        ready.erase(ready.begin());
        topo_.push_back(v);
        for (auto c : children[v]) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    if (topo_.size() != n) throw PreconditionError("the edges contain a directed cycle");

    ancestors_.assign(n, NodeSet{});
    for (auto v : topo_) {
        for (auto p : parents_[v]) ancestors_[v] = ancestors_[v] | ancestors_[p] | NodeSet{p};
    }
}

std::optional<NodeId> Dag::find(std::string_view name) const {
    for (NodeId v = 0; v < nodes_.size(); ++v) {
        if (nodes_[v].name == name) return v;
    }
    return std::nullopt;
}

std::uint64_t Dag::num_parent_configurations(NodeId v) const {
    std::uint64_t count = 1;
    for (auto p : parents(v)) count *= nodes_[p].cardinality;
    return count;
}

std::vector<ValueId> Dag::parent_values(NodeId v, std::uint64_t configuration) const {
    const auto& ps = parents(v);
    std::vector<ValueId> values(ps.size());
    for (std::size_t k = ps.size(); k-- > 0;) {
        values[k] = static_cast<ValueId>(configuration % nodes_[ps[k]].cardinality);
        configuration /= nodes_[ps[k]].cardinality;
    }
    return values;
}

SpacePtr Dag::value_space() const {
    std::vector<Factor> factors;
    for (const auto& node : nodes_) factors.push_back(Factor{node.name, node.cardinality});
    return make_space(std::move(factors));
}

void validate_cpt(const Dag& G, const Cpt& cpt) {
    if (cpt.rows.size() != G.size()) throw DomainError("CPT set does not cover every node");
    for (NodeId v = 0; v < G.size(); ++v) {
        const auto& rows = cpt.rows[v];
        const auto& name = G.node(v).name;
        if (rows.size() != G.num_parent_configurations(v)) {
            throw DomainError("node '" + name + "' needs " + std::to_string(G.num_parent_configurations(v)) +
                              " CPT rows, got " + std::to_string(rows.size()));
        }
        for (std::size_t c = 0; c < rows.size(); ++c) {
            if (rows[c].size() != G.cardinality(v)) {
                throw DomainError("CPT row " + std::to_string(c) + " of node '" + name + "' has wrong length");
            }
            Rational total = 0;
            for (const auto& p : rows[c]) {
                if (sgn(p) < 0) {
                    throw PreconditionError("CPT row " + std::to_string(c) + " of node '" + name +
                                            "' has a negative entry");
                }
                total += p;
            }
            if (total != 1) {
                throw PreconditionError("CPT row " + std::to_string(c) + " of node '" + name + "' sums to " +
                                        format_rational(total) + ", not 1");
            }
        }
    }
}

bool d_separated(const Dag& G, NodeSet V1, NodeSet V2, NodeSet V3) {
    const auto all = G.all_nodes();
    if (!(V1 - all).empty() || !(V2 - all).empty() || !(V3 - all).empty()) {
        throw DomainError("node set references unknown nodes");
    }
    const auto A = V1 - V3;
    const auto B = V2 - V3;
    if (A.empty() || B.empty()) return true;
    if (!(A & B).empty()) return false;

    auto relevant = V1 | V2 | V3;
    for (auto v : relevant.ids()) relevant = relevant | G.ancestors(v);

    const auto n = G.size();
    std::vector<std::vector<NodeId>> adjacent(n);
    auto connect = [&](NodeId a, NodeId b) {
        adjacent[a].push_back(b);
        adjacent[b].push_back(a);
    };
    for (auto v : relevant.ids()) {
        const auto& ps = G.parents(v);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            connect(ps[i], v);
            for (std::size_t j = i + 1; j < ps.size(); ++j) connect(ps[i], ps[j]);
        }
    }

    std::vector<bool> visited(n, false);
    std::deque<NodeId> queue;
    for (auto v : A.ids()) {
        visited[v] = true;
        queue.push_back(v);
    }
    while (!queue.empty()) {
        auto v = queue.front();
        queue.pop_front();
        if (B.contains(v)) return false;
        for (auto u : adjacent[v]) {
            if (!visited[u] && !V3.contains(u) && relevant.contains(u)) {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    return true;
}

FactorId FsmConstruction::factor_of(NodeId v, std::uint64_t configuration) const {
    const auto ids = node_factors.at(v).ids();
    if (configuration >= ids.size()) throw DomainError("parent configuration out of range");
    // Factors of one node are contiguous and ordered by configuration code.
    return ids[configuration];
}

Variable FsmConstruction::node_set_variable(NodeSet V) const {
    std::vector<Variable> parts;
    for (auto v : V.ids()) parts.push_back(node_vars.at(v));
    return joint(space, parts);
}

FsmConstruction build_fsm(const Dag& G, std::uint64_t size_cap) {
    const auto n = G.size();
    std::vector<Factor> factors;
    std::vector<std::pair<NodeId, std::uint64_t>> owner;
    std::vector<std::uint32_t> first_factor(n, 0);
    std::uint64_t total = 1;
    for (auto v : G.topological_order()) {
        first_factor[v] = static_cast<std::uint32_t>(factors.size());
        const auto configs = G.num_parent_configurations(v);
        if (factors.size() + configs > FactoredSpace::kMaxFactors) {
            throw CapacityError("constructed space would have more than 64 factors");
        }
        for (std::uint64_t c = 0; c < configs; ++c) {
            std::string label = G.node(v).name;
            const auto& ps = G.parents(v);
            if (!ps.empty()) {
                const auto values = G.parent_values(v, c);
                label += "[";
                for (std::size_t k = 0; k < ps.size(); ++k) {
                    if (k > 0) label += ",";
                    label += G.node(ps[k]).name + "=" + std::to_string(values[k]);
                }
                label += "]";
            }
            factors.push_back(Factor{std::move(label), G.cardinality(v)});
            owner.emplace_back(v, c);
            if (total > size_cap / G.cardinality(v)) {
                throw CapacityError("constructed space exceeds the size cap of " + std::to_string(size_cap));
            }
            total *= G.cardinality(v);
        }
    }
    auto space = make_space(std::move(factors), size_cap);
    auto value_space = G.value_space();

    std::vector<IndexSubset> node_factors(n);
    for (std::uint32_t f = 0; f < owner.size(); ++f) node_factors[owner[f].first].insert(FactorId{f});

    std::vector<std::vector<ValueId>> tables(n, std::vector<ValueId>(space->size()));
    std::vector<ValueId> observed(space->size());
    std::vector<ValueId> x(n);
    for (PointIndex w = 0; w < space->size(); ++w) {
        for (auto v : G.topological_order()) {
            std::uint64_t config = 0;
            for (auto p : G.parents(v)) config = config * G.cardinality(p) + x[p];
            x[v] = space->coordinate(w, FactorId{first_factor[v] + static_cast<std::uint32_t>(config)});
            tables[v][w] = x[v];
        }
        PointIndex o = 0;
        for (NodeId v = 0; v < n; ++v) o += x[v] * value_space->stride(FactorId{v});
        observed[w] = static_cast<ValueId>(o);
    }

    std::vector<Variable> node_vars;
    for (NodeId v = 0; v < n; ++v) node_vars.emplace_back(space, std::move(tables[v]), G.cardinality(v));
    Variable observation(space, std::move(observed), static_cast<ValueId>(value_space->size()));
    return FsmConstruction{space,      value_space, std::move(node_vars), std::move(observation), std::move(node_factors),
                           std::move(owner)};
}

GeneralDistribution tau(const FsmConstruction& construction, const FactorizingDistribution& P_omega) {
    if (!same_space(construction.space, P_omega.space_ptr())) {
        throw SpaceMismatchError("distribution does not live on the constructed space");
    }
    const auto weights = detail::point_weights(P_omega);
    const auto& O = construction.observation;
    std::vector<Rational> probs(construction.value_space->size());
    weights.visit([&](const auto& w) {
        using W = std::decay_t<decltype(w[0])>;
        std::vector<W> mass(probs.size(), W(0));
        for (PointIndex idx = 0; idx < w.size(); ++idx) mass[O(idx)] += w[idx];
        for (std::size_t x = 0; x < probs.size(); ++x) {
            probs[x] = Rational(detail::to_integer(mass[x]), weights.denominator);
            probs[x].canonicalize();
        }
    });
    return GeneralDistribution(construction.value_space, std::move(probs));
}

FactorizingDistribution tau_inverse(const FsmConstruction& construction, const Dag& G, const Cpt& cpt) {
    validate_cpt(G, cpt);
    std::vector<std::vector<Rational>> factors;
    factors.reserve(construction.factor_owner.size());
    for (auto [v, c] : construction.factor_owner) factors.push_back(cpt.rows.at(v).at(c));
    return FactorizingDistribution(construction.space, std::move(factors));
}

FactorizingDistribution tau_inverse(const FsmConstruction& construction, const Dag& G, const GeneralDistribution& P) {
    if (!bn_factorizes(G, P)) throw PreconditionError("distribution does not factorize over the DAG");
    return tau_inverse(construction, G, cpt_from_joint(G, P));
}

namespace {

// Family marginals P(x_v, x_pa(v)) indexed [v][configuration * |Val_v| + x_v],
// and parent marginals P(x_pa(v)) indexed [v][configuration].
struct FamilyMarginals {
    std::vector<std::vector<Rational>> family;
    std::vector<std::vector<Rational>> parents;
};

std::uint64_t configuration_of(const Dag& G, const FactoredSpace& val, NodeId v, PointIndex x) {
    std::uint64_t config = 0;
    for (auto p : G.parents(v)) config = config * G.cardinality(p) + val.coordinate(x, FactorId{p});
    return config;
}

FamilyMarginals family_marginals(const Dag& G, const GeneralDistribution& P) {
    const auto& val = P.space();
    FamilyMarginals m;
    for (NodeId v = 0; v < G.size(); ++v) {
        const auto configs = G.num_parent_configurations(v);
        m.family.emplace_back(configs * G.cardinality(v), Rational(0));
        m.parents.emplace_back(configs, Rational(0));
    }
    for (PointIndex x = 0; x < val.size(); ++x) {
        if (sgn(P[x]) == 0) continue;
        for (NodeId v = 0; v < G.size(); ++v) {
            const auto c = configuration_of(G, val, v, x);
            m.family[v][c * G.cardinality(v) + val.coordinate(x, FactorId{v})] += P[x];
            m.parents[v][c] += P[x];
        }
    }
    return m;
}

void check_value_space(const Dag& G, const GeneralDistribution& P) {
    if (!(P.space() == *G.value_space())) throw DomainError("distribution is not over the DAG's value space");
}

}  // namespace

bool bn_factorizes(const Dag& G, const GeneralDistribution& P) {
    check_value_space(G, P);
    const auto m = family_marginals(G, P);
    const auto& val = P.space();
    for (PointIndex x = 0; x < val.size(); ++x) {
        Rational lhs = P[x];
        Rational rhs = 1;
        for (NodeId v = 0; v < G.size(); ++v) {
            const auto c = configuration_of(G, val, v, x);
            lhs *= m.parents[v][c];
            rhs *= m.family[v][c * G.cardinality(v) + val.coordinate(x, FactorId{v})];
        }
        if (lhs != rhs) return false;
    }
    return true;
}

GeneralDistribution joint_from_cpt(const Dag& G, const Cpt& cpt) {
    validate_cpt(G, cpt);
    auto val = G.value_space();
    std::vector<Rational> probs(val->size());
    for (PointIndex x = 0; x < val->size(); ++x) {
        Rational p = 1;
        for (NodeId v = 0; v < G.size(); ++v) {
            p *= cpt.rows[v][configuration_of(G, *val, v, x)][val->coordinate(x, FactorId{v})];
        }
        probs[x] = std::move(p);
    }
    return GeneralDistribution(std::move(val), std::move(probs));
}

Cpt cpt_from_joint(const Dag& G, const GeneralDistribution& P) {
    check_value_space(G, P);
    const auto m = family_marginals(G, P);
    Cpt cpt;
    for (NodeId v = 0; v < G.size(); ++v) {
        const auto card = G.cardinality(v);
        auto& rows = cpt.rows.emplace_back();
        for (std::uint64_t c = 0; c < G.num_parent_configurations(v); ++c) {
            auto& row = rows.emplace_back();
            for (std::uint32_t k = 0; k < card; ++k) {
                row.push_back(sgn(m.parents[v][c]) == 0 ? Rational(1, card)
                                                        : Rational(m.family[v][c * card + k] / m.parents[v][c]));
            }
        }
    }
    return cpt;
}

Cpt sample_cpt(const Dag& G, Rng& rng, std::uint32_t denominator_bound) {
    Cpt cpt;
    for (NodeId v = 0; v < G.size(); ++v) {
        auto& rows = cpt.rows.emplace_back();
        for (std::uint64_t c = 0; c < G.num_parent_configurations(v); ++c) {
            rows.push_back(sample_simplex_point(G.cardinality(v), rng, denominator_bound));
        }
    }
    return cpt;
}

namespace {

GeneralDistribution sample_general(const SpacePtr& space, Rng& rng, std::uint32_t bound) {
    auto probs = sample_simplex_point(static_cast<std::uint32_t>(space->size()), rng, bound);
    // Knock out some points so that zero-probability configurations occur too.
    if (rng() % 2 == 0 && space->size() > 1) {
        Rational removed = 0;
        for (auto& p : probs) {
            if (rng() % 3 == 0) {
                removed += p;
                p = 0;
            }
        }
        auto keep = rng() % probs.size();
        probs[keep] += removed;
    }
    return GeneralDistribution(space, std::move(probs));
}

}  // namespace

EquivalenceReport equivalence_suite(const Dag& G, const EquivalenceOptions& options) {
    return equivalence_suite(G, build_fsm(G), options);
}

EquivalenceReport equivalence_suite(const Dag& G, const FsmConstruction& fsm, const EquivalenceOptions& options) {
    EquivalenceReport report;
    const auto n = G.size();
    const std::uint64_t subsets = std::uint64_t{1} << n;
    Rng rng(options.seed);

    // Joint node variables X_V for every node subset V.
    std::vector<Variable> node_set_vars;
    node_set_vars.reserve(subsets);
    for (std::uint64_t V = 0; V < subsets; ++V) node_set_vars.push_back(fsm.node_set_variable(NodeSet(V)));

    // d-separation against structural independence, with h(X_V1 | X_V3 = z)
    // computed once per (V1, V3, z).
    std::vector<std::vector<IndexSubset>> histories(subsets);
    for (std::uint64_t V3 = 0; V3 < subsets; ++V3) {
        const auto& Z = node_set_vars[V3];
        std::vector<bool> present(Z.num_values(), false);
        for (auto z : Z.table()) present[z] = true;
        for (auto& h : histories) h.clear();
        for (ValueId z = 0; z < Z.num_values(); ++z) {
            if (!present[z]) continue;
            const Decomposition decomposition(fiber(Z, z), options.history);
            for (std::uint64_t V1 = 0; V1 < subsets; ++V1) {
                histories[V1].push_back(history(node_set_vars[V1], decomposition));
            }
        }
        for (std::uint64_t V1 = 0; V1 < subsets; ++V1) {
            for (std::uint64_t V2 = 0; V2 < subsets; ++V2) {
                bool independent = true;
                for (std::size_t k = 0; k < histories[V1].size() && independent; ++k) {
                    independent = !histories[V1][k].intersects(histories[V2][k]);
                }
                const bool separated = d_separated(G, NodeSet(V1), NodeSet(V2), NodeSet(V3));
                ++report.triples_checked;
                if (independent != separated) {
                    report.dsep_mismatches.push_back(
                        DsepMismatch{NodeSet(V1), NodeSet(V2), NodeSet(V3), separated, independent});
                }
            }
        }
    }

    // The cached verdicts must agree with the library call on sampled triples.
    for (std::size_t s = 0; s < options.spot_checks; ++s) {
        const auto V1 = rng() % subsets, V2 = rng() % subsets, V3 = rng() % subsets;
        std::optional<Variable> Z;
        if (V3 != 0) Z = node_set_vars[V3];
        const bool direct = structurally_independent(node_set_vars[V1], node_set_vars[V2], Z, options.history);
        const bool separated = d_separated(G, NodeSet(V1), NodeSet(V2), NodeSet(V3));
        ++report.spot_checks;
        if (direct != separated) ++report.spot_check_mismatches;
    }

    // Ancestors against strict structural precedence, and the closed form of h(X_v).
    std::vector<IndexSubset> node_history(n);
    for (NodeId v = 0; v < n; ++v) {
        node_history[v] = history(fsm.node_vars[v], options.history);
        IndexSubset expected = fsm.node_factors[v];
        for (auto u : G.ancestors(v).ids()) expected = expected | fsm.node_factors[u];
        if (node_history[v] != expected) report.history_formula_mismatches.push_back(v);
    }
    for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = 0; b < n; ++b) {
            if (a == b) continue;
            ++report.pairs_checked;
            const bool precedes = strictly_before(fsm.node_vars[a], fsm.node_vars[b], options.history);
            if (precedes != G.is_ancestor(a, b)) report.ancestor_mismatches.emplace_back(a, b);
        }
    }

    // tau round trips and the factorization property.
    for (std::size_t s = 0; s < options.tau_samples; ++s) {
        const auto cpt = sample_cpt(G, rng, options.denominator_bound);
        const auto P = joint_from_cpt(G, cpt);
        ++report.tau_round_trips;
        if (!(tau(fsm, tau_inverse(fsm, G, cpt)) == P)) ++report.tau_failures;

        const auto P_omega = sample_factorizing(fsm.space, rng, options.denominator_bound);
        const auto pushed = tau(fsm, P_omega);
        ++report.tau_round_trips;
        if (!bn_factorizes(G, pushed) || !(tau_inverse(fsm, G, pushed) == P_omega)) ++report.tau_failures;

        ++report.factorization_checks;
        if (!bn_factorizes(G, P)) ++report.factorization_mismatches;
    }
    const std::size_t general_samples = std::max<std::size_t>(1, options.tau_samples / 4);
    for (std::size_t s = 0; s < general_samples; ++s) {
        const auto R = sample_general(fsm.value_space, rng, options.denominator_bound);
        const bool via_tau = tau(fsm, tau_inverse(fsm, G, cpt_from_joint(G, R))) == R;
        ++report.factorization_checks;
        if (via_tau != bn_factorizes(G, R)) ++report.factorization_mismatches;
    }
    return report;
}

}  // namespace fsm
