#include "fsm/bayesnet.hpp"
#include "fsm/error.hpp"
#include "fsm/random.hpp"
#include "fsm/structural.hpp"
#include "oracle/oracle.hpp"

#include <gtest/gtest.h>

using namespace fsm;

namespace {

Dag make_dag(std::vector<std::uint32_t> cards, std::vector<std::pair<NodeId, NodeId>> edges) {
    std::vector<Node> nodes;
    const char* names[] = {"a", "b", "c", "d", "e", "f"};
    for (std::size_t v = 0; v < cards.size(); ++v) nodes.push_back({names[v], cards[v]});
    return Dag(std::move(nodes), std::move(edges));
}

Dag chain() { return make_dag({2, 2, 2}, {{0, 1}, {1, 2}}); }
Dag collider() { return make_dag({2, 2, 2}, {{0, 2}, {1, 2}}); }

Rational r(long n, long d) { return Rational(n, d); }

}  // namespace

TEST(Dag, Validation) {
    EXPECT_THROW(make_dag({2, 2}, {{0, 1}, {1, 0}}), PreconditionError);
    EXPECT_THROW(make_dag({2, 2}, {{0, 0}}), DomainError);
    EXPECT_THROW(make_dag({2, 2}, {{0, 2}}), DomainError);
    EXPECT_THROW(make_dag({2, 1}, {}), DomainError);
    EXPECT_THROW(make_dag({2, 2}, {{0, 1}, {0, 1}}), DomainError);
    EXPECT_THROW(Dag({{"a", 2}, {"a", 2}}, {}), DomainError);
}

TEST(Dag, OrderAndAncestors) {
    const auto G = make_dag({2, 2, 2, 2}, {{3, 0}, {0, 1}, {2, 1}});
    EXPECT_EQ(G.topological_order(), (std::vector<NodeId>{2, 3, 0, 1}));
    EXPECT_EQ(G.parents(1), (std::vector<NodeId>{0, 2}));
    EXPECT_EQ(G.ancestors(1), (NodeSet{0, 2, 3}));
    EXPECT_TRUE(G.is_ancestor(3, 1));
    EXPECT_FALSE(G.is_ancestor(1, 3));
}

TEST(Dag, ParentConfigurationsFirstParentMostSignificant) {
    const auto G = make_dag({2, 3, 2}, {{0, 2}, {1, 2}});
    EXPECT_EQ(G.num_parent_configurations(2), 6u);
    EXPECT_EQ(G.parent_values(2, 4), (std::vector<ValueId>{1, 1}));
    EXPECT_EQ(G.parent_values(2, 2), (std::vector<ValueId>{0, 2}));
}

TEST(DSeparation, ChainBlockedByMiddle) {
    const auto G = chain();
    EXPECT_TRUE(d_separated(G, NodeSet{0}, NodeSet{2}, NodeSet{1}));
    EXPECT_FALSE(d_separated(G, NodeSet{0}, NodeSet{2}, NodeSet{}));
}

TEST(DSeparation, ColliderOpensWhenObserved) {
    const auto G = collider();
    EXPECT_TRUE(d_separated(G, NodeSet{0}, NodeSet{1}, NodeSet{}));
    EXPECT_FALSE(d_separated(G, NodeSet{0}, NodeSet{1}, NodeSet{2}));
    // a descendant of the collider opens it too
    const auto H = make_dag({2, 2, 2, 2}, {{0, 2}, {1, 2}, {2, 3}});
    EXPECT_FALSE(d_separated(H, NodeSet{0}, NodeSet{1}, NodeSet{3}));
}

TEST(DSeparation, VectorToSumToNoisySum) {
    // Xvec -> Y -> Z
    const Dag G({{"Xvec", 4}, {"Y", 3}, {"Z", 4}}, {{0, 1}, {1, 2}});
    EXPECT_FALSE(d_separated(G, NodeSet{1}, NodeSet{2}, NodeSet{0}));
    EXPECT_TRUE(d_separated(G, NodeSet{0}, NodeSet{2}, NodeSet{1}));
}

TEST(DSeparation, OverlapConventions) {
    const auto G = chain();
    EXPECT_TRUE(d_separated(G, NodeSet{}, NodeSet{2}, NodeSet{}));
    EXPECT_FALSE(d_separated(G, NodeSet{1}, NodeSet{1}, NodeSet{}));
    EXPECT_TRUE(d_separated(G, NodeSet{1}, NodeSet{1}, NodeSet{1}));
    EXPECT_TRUE(d_separated(G, NodeSet{0, 1}, NodeSet{2}, NodeSet{1}));
}

TEST(DSeparation, MatchesPathOracle) {
    Rng rng(41);
    for (int t = 0; t < 40; ++t) {
        const auto G = random_dag(5, rng, 0.4, 2, 1u << 20);
        const auto all = G.all_nodes().mask();
        for (std::uint64_t a = 0; a <= all; ++a) {
            for (std::uint64_t b = 0; b <= all; b += 3) {
                const std::uint64_t z = rng() & all;
                ASSERT_EQ(d_separated(G, NodeSet(a), NodeSet(b), NodeSet(z)),
                          oracle::d_separated(G, NodeSet(a), NodeSet(b), NodeSet(z)));
            }
        }
    }
}

TEST(BuildFsm, SingleRoot) {
    const auto G = make_dag({2}, {});
    const auto F = build_fsm(G);
    EXPECT_EQ(F.space->num_factors(), 1u);
    EXPECT_EQ(F.space->size(), 2u);
    EXPECT_EQ(F.space->label(FactorId{0}), "a");
    EXPECT_EQ(F.node_vars[0], background(F.space, FactorId{0}));
}

TEST(BuildFsm, TwoNodeChain) {
    const Dag G({{"v1", 2}, {"v2", 2}}, {{0, 1}});
    const auto F = build_fsm(G);
    EXPECT_EQ(F.space->size(), 8u);
    ASSERT_EQ(F.space->num_factors(), 3u);
    EXPECT_EQ(F.space->label(FactorId{0}), "v1");
    EXPECT_EQ(F.space->label(FactorId{1}), "v2[v1=0]");
    EXPECT_EQ(F.space->label(FactorId{2}), "v2[v1=1]");
    EXPECT_EQ(F.node_factors[1], (IndexSubset{1, 2}));
    EXPECT_EQ(F.factor_of(1, 1).value, 2u);
    // X_v2(w) = w_(v2, w_v1)
    for (PointIndex k = 0; k < 8; ++k) {
        const auto w = decode(*F.space, k);
        EXPECT_EQ(F.node_vars[0](k), w.coords[0]);
        EXPECT_EQ(F.node_vars[1](k), w.coords[1 + w.coords[0]]);
        EXPECT_EQ(F.observation(k), w.coords[0] + 2 * w.coords[1 + w.coords[0]]);
    }
}

TEST(BuildFsm, ColliderSizes) {
    const auto F = build_fsm(collider());
    EXPECT_EQ(F.node_factors[2].size(), 4u);
    EXPECT_EQ(F.space->num_factors(), 6u);
    EXPECT_EQ(F.space->size(), 64u);
    EXPECT_EQ(F.space->label(FactorId{5}), "c[a=1,b=1]");
}

TEST(BuildFsm, CapacityAndSize) {
    // a chain of ternary nodes: 3 * 3^3 * 3^3 * 3^3
    const auto G = make_dag({3, 3, 3, 3}, {{0, 1}, {1, 2}, {2, 3}});
    EXPECT_EQ(constructed_space_size(G), 59049u);
    EXPECT_EQ(constructed_space_size(collider()), 64u);
    EXPECT_THROW(build_fsm(G, 1000), CapacityError);
    EXPECT_EQ(build_fsm(G).space->size(), 59049u);
}

TEST(BuildFsm, NodeHistoryIsUnionOfAncestorFactors) {
    Rng rng(43);
    for (int t = 0; t < 10; ++t) {
        const auto G = random_dag(4, rng, 0.5, 2, 1u << 16);
        const auto F = build_fsm(G);
        for (NodeId v = 0; v < G.size(); ++v) {
            IndexSubset expected = F.node_factors[v];
            for (auto u : G.ancestors(v).ids()) expected = expected | F.node_factors[u];
            ASSERT_EQ(history(F.node_vars[v]), expected);
        }
    }
}

TEST(Tau, UniformOnSingleRoot) {
    const auto G = make_dag({3}, {});
    const auto F = build_fsm(G);
    const auto P = tau(F, FactorizingDistribution::uniform(F.space));
    EXPECT_EQ(P.probabilities(), std::vector<Rational>(3, r(1, 3)));
}

TEST(Tau, TwoNodeChainIsTheBayesNetProduct) {
    const Dag G({{"v1", 2}, {"v2", 2}}, {{0, 1}});
    const auto F = build_fsm(G);
    const auto p = r(1, 3), q0 = r(1, 4), q1 = r(5, 6);
    const FactorizingDistribution P_omega(F.space, {{p, 1 - p}, {q0, 1 - q0}, {q1, 1 - q1}});
    const auto P = tau(F, P_omega);
    // value index = x1 + 2 x2
    EXPECT_EQ(P[0], p * q0);
    EXPECT_EQ(P[1], (1 - p) * q1);
    EXPECT_EQ(P[2], p * (1 - q0));
    EXPECT_EQ(P[3], (1 - p) * (1 - q1));
    EXPECT_EQ(tau_inverse(F, G, P), P_omega);
    const Cpt cpt{{{{p, 1 - p}}, {{q0, 1 - q0}, {q1, 1 - q1}}}};
    EXPECT_EQ(tau_inverse(F, G, cpt), P_omega);
    EXPECT_EQ(joint_from_cpt(G, cpt), P);
}

TEST(Tau, RoundTripsOnRandomCpts) {
    Rng rng(44);
    for (int t = 0; t < 10; ++t) {
        const auto G = random_dag(4, rng, 0.5, 3, 1u << 14);
        const auto F = build_fsm(G);
        for (int k = 0; k < 5; ++k) {
            const auto cpt = sample_cpt(G, rng);
            const auto P = joint_from_cpt(G, cpt);
            ASSERT_EQ(tau(F, tau_inverse(F, G, cpt)), P);
            ASSERT_EQ(tau(F, tau_inverse(F, G, P)), P);
            const auto P_omega = sample_factorizing(F.space, rng, 16);
            ASSERT_EQ(tau_inverse(F, G, tau(F, P_omega)), P_omega);
        }
    }
}

TEST(Tau, DeterministicCptsGiveDeltaFactors) {
    const Dag G({{"v1", 2}, {"v2", 2}}, {{0, 1}});
    const auto F = build_fsm(G);
    const Cpt cpt{{{{1, 0}}, {{0, 1}, {1, 0}}}};
    const auto P_omega = tau_inverse(F, G, cpt);
    for (const auto& f : P_omega.factors()) {
        EXPECT_EQ(std::count(f.begin(), f.end(), 0), 1);
    }
    EXPECT_EQ(tau(F, P_omega), delta(F.value_space, Point{{0, 1}}));
}

TEST(Tau, InverseRejectsNonFactorizing) {
    const Dag G({{"a", 2}, {"b", 2}}, {});
    const auto F = build_fsm(G);
    const GeneralDistribution P(F.value_space, {r(1, 2), 0, 0, r(1, 2)});
    EXPECT_THROW(tau_inverse(F, G, P), PreconditionError);
}

TEST(BnFactorizes, Cases) {
    Rng rng(45);
    for (int t = 0; t < 10; ++t) {
        const auto G = random_dag(4, rng, 0.5, 2, 1u << 16);
        ASSERT_TRUE(bn_factorizes(G, joint_from_cpt(G, sample_cpt(G, rng))));
    }
    const Dag disconnected({{"a", 2}, {"b", 2}}, {});
    EXPECT_FALSE(bn_factorizes(disconnected, GeneralDistribution(disconnected.value_space(), {r(1, 2), 0, 0, r(1, 2)})));
    const Dag single({{"a", 3}}, {});
    EXPECT_TRUE(bn_factorizes(single, GeneralDistribution(single.value_space(), {r(1, 2), 0, r(1, 2)})));
}

TEST(BnFactorizes, ZeroMassParentConfiguration) {
    // P(a=1) = 0 leaves b's second row free; any row reproduces P
    const Dag G({{"a", 2}, {"b", 2}}, {{0, 1}});
    const GeneralDistribution P(G.value_space(), {r(1, 4), 0, r(3, 4), 0});
    EXPECT_TRUE(bn_factorizes(G, P));
    const auto cpt = cpt_from_joint(G, P);
    EXPECT_EQ(cpt.rows[1][1], (std::vector<Rational>{r(1, 2), r(1, 2)}));
    EXPECT_EQ(joint_from_cpt(G, cpt), P);
}

TEST(Cpt, Validation) {
    const Dag G({{"v1", 2}, {"v2", 2}}, {{0, 1}});
    const Cpt bad{{{{r(1, 2), r(1, 2)}}, {{r(1, 2), r(1, 2)}, {r(1, 5), r(7, 10)}}}};
    try {
        validate_cpt(G, bad);
        FAIL() << "expected PreconditionError";
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("row 1 of node 'v2'"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("9/10"), std::string::npos);
    }
    const Cpt short_cpt{{{{r(1, 2), r(1, 2)}}, {{r(1, 2), r(1, 2)}}}};
    EXPECT_THROW(validate_cpt(G, short_cpt), DomainError);
}

TEST(Equivalence, ChainAndCollider) {
    for (const auto& G : {chain(), collider()}) {
        const auto report = equivalence_suite(G, {.tau_samples = 10});
        EXPECT_TRUE(report.ok());
        EXPECT_EQ(report.triples_checked, 512u);
        EXPECT_EQ(report.pairs_checked, 6u);
    }
}

TEST(Equivalence, StructuralVerdictsMatchPathOracle) {
    // independent of equivalence_suite: compare node-set queries directly
    Rng rng(46);
    for (int t = 0; t < 5; ++t) {
        const auto G = random_dag(4, rng, 0.5, 2, 1u << 14);
        const auto F = build_fsm(G);
        const auto all = G.all_nodes().mask();
        for (int k = 0; k < 60; ++k) {
            const NodeSet a(rng() & all), b(rng() & all), z(rng() & all);
            const bool expected = oracle::d_separated(G, a, b, z);
            const auto X = F.node_set_variable(a - z), Y = F.node_set_variable(b - z), Z = F.node_set_variable(z);
            ASSERT_EQ(structurally_independent(X, Y, Z), expected);
        }
        for (NodeId u = 0; u < G.size(); ++u) {
            for (NodeId v = 0; v < G.size(); ++v) {
                ASSERT_EQ(strictly_before(F.node_vars[u], F.node_vars[v]), G.is_ancestor(u, v));
            }
        }
    }
}

TEST(Corpus, AllDagCounts) {
    EXPECT_EQ(all_dags(1).size(), 1u);
    EXPECT_EQ(all_dags(2).size(), 3u);
    EXPECT_EQ(all_dags(3).size(), 25u);
    EXPECT_EQ(all_dags(4).size(), 543u);
}
