#pragma once

// Brute-force reference implementations used as test oracles. They work on
// plain decoded points and rationals and share no code with the library's
// algorithms beyond the data types.

#include "fsm/bayesnet.hpp"
#include "fsm/distribution.hpp"
#include "fsm/space.hpp"
#include "fsm/variable.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace oracle {

using fsm::IndexSubset;
using fsm::Rational;

inline std::vector<std::vector<std::uint32_t>> all_points(const fsm::FactoredSpace& space) {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> w(space.num_factors(), 0);
    for (std::uint64_t k = 0; k < space.size(); ++k) {
        out.push_back(w);
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (++w[i] < space.factors()[i].cardinality) break;
            w[i] = 0;
        }
    }
    return out;
}

inline std::vector<std::uint32_t> restrict_to(const std::vector<std::uint32_t>& w, IndexSubset J) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < w.size(); ++i) {
        if (J.contains(fsm::FactorId{i})) out.push_back(w[i]);
    }
    return out;
}

/// C = C_J x C_{I \ J}, checked by building the product and comparing sizes.
inline bool disintegrates(IndexSubset J, const fsm::Event& C) {
    const auto& space = C.space();
    const auto points = all_points(space);
    const auto K = J.complement(space.num_factors());
    std::set<std::vector<std::uint32_t>> cj, ck;
    std::size_t members = 0;
    for (std::uint64_t k = 0; k < points.size(); ++k) {
        if (!C.contains(k)) continue;
        ++members;
        cj.insert(restrict_to(points[k], J));
        ck.insert(restrict_to(points[k], K));
    }
    return members == 0 || members == cj.size() * ck.size();
}

inline bool generates(IndexSubset J, const fsm::Variable& X, const fsm::Event& C) {
    if (!oracle::disintegrates(J, C)) return false;
    const auto points = all_points(X.space());
    std::map<std::vector<std::uint32_t>, fsm::ValueId> seen;
    for (std::uint64_t k = 0; k < points.size(); ++k) {
        if (!C.contains(k)) continue;
        auto [it, fresh] = seen.emplace(restrict_to(points[k], J), X(k));
        if (!fresh && it->second != X(k)) return false;
    }
    return true;
}

/// The smallest generating set, found by scanning all subsets by size. It is
/// also checked to be contained in every other generating set.
inline std::optional<IndexSubset> history(const fsm::Variable& X, const fsm::Event& C) {
    const auto n = X.space().num_factors();
    std::optional<IndexSubset> best;
    std::vector<IndexSubset> generating;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        IndexSubset J(m);
        if (!oracle::generates(J, X, C)) continue;
        generating.push_back(J);
        if (!best || J.size() < best->size()) best = J;
    }
    for (auto J : generating) {
        if (!best->is_subset_of(J)) return std::nullopt;
    }
    return best;
}

inline Rational point_probability(const fsm::FactorizingDistribution& P, const std::vector<std::uint32_t>& w) {
    Rational p = 1;
    for (std::uint32_t i = 0; i < w.size(); ++i) p *= P.factor(fsm::FactorId{i})[w[i]];
    return p;
}

/// P(x, y, z) P(z) = P(x, z) P(y, z) for every value triple, by explicit sums.
inline bool cond_indep(const fsm::FactorizingDistribution& P, const fsm::Variable& X, const fsm::Variable& Y,
                       const std::optional<fsm::Variable>& Z) {
    const auto points = all_points(P.space());
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, Rational> xyz;
    std::map<std::pair<std::uint32_t, std::uint32_t>, Rational> xz, yz;
    std::map<std::uint32_t, Rational> pz;
    for (std::uint64_t k = 0; k < points.size(); ++k) {
        const auto p = oracle::point_probability(P, points[k]);
        const std::uint32_t z = Z ? (*Z)(k) : 0;
        xyz[{X(k), Y(k), z}] += p;
        xz[{X(k), z}] += p;
        yz[{Y(k), z}] += p;
        pz[z] += p;
    }
    for (const auto& [z, total] : pz) {
        for (fsm::ValueId x = 0; x < X.num_values(); ++x) {
            for (fsm::ValueId y = 0; y < Y.num_values(); ++y) {
                auto it = xyz.find({x, y, z});
                const Rational joint = it == xyz.end() ? Rational(0) : it->second;
                if (joint * total != xz[{x, z}] * yz[{y, z}]) return false;
            }
        }
    }
    return true;
}

/// d-separation from the path definition: every trail between a node of A and
/// a node of B has a non-collider in Z, or a collider with no descendant (itself
/// included) in Z. Nodes of A and B inside Z are removed first; a node in both
/// A and B is connected to itself by the trail with no edges.
inline bool d_separated(const fsm::Dag& G, fsm::NodeSet A, fsm::NodeSet B, fsm::NodeSet Z) {
    A = A - Z;
    B = B - Z;
    if (A.empty() || B.empty()) return true;
    if (!(A & B).empty()) return false;
    const auto n = static_cast<fsm::NodeId>(G.size());
    std::vector<std::vector<bool>> edge(n, std::vector<bool>(n, false));
    for (auto [u, v] : G.edges()) edge[u][v] = true;
    auto descendant_in_z = [&](fsm::NodeId v) {
        for (fsm::NodeId u = 0; u < n; ++u) {
            if (Z.contains(u) && (u == v || G.is_ancestor(v, u))) return true;
        }
        return false;
    };
    std::vector<fsm::NodeId> path;
    std::vector<bool> on_path(n, false);
    bool active_found = false;
    auto active = [&]() {
        for (std::size_t k = 1; k + 1 < path.size(); ++k) {
            const auto a = path[k - 1], m = path[k], b = path[k + 1];
            const bool collider = edge[a][m] && edge[b][m];
            if (collider ? !descendant_in_z(m) : Z.contains(m)) return false;
        }
        return true;
    };
    auto extend = [&](auto&& self, fsm::NodeId v) -> void {
        if (active_found) return;
        if (B.contains(v) && path.size() > 1) {
            if (active()) active_found = true;
            return;
        }
        for (fsm::NodeId u = 0; u < n; ++u) {
            if (on_path[u] || !(edge[v][u] || edge[u][v])) continue;
            path.push_back(u);
            on_path[u] = true;
            self(self, u);
            on_path[u] = false;
            path.pop_back();
        }
    };
    for (auto a : A.ids()) {
        path = {a};
        on_path.assign(n, false);
        on_path[a] = true;
        extend(extend, a);
        if (active_found) return false;
    }
    return true;
}

}  // namespace oracle
