#pragma once

#include "fsm/history.hpp"
#include "fsm/variable.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace fsm {

/// X and Y structurally independent given Z: h(X | z) and h(Y | z) are disjoint
/// for every value z with a non-empty fiber. Z absent is the unconditional query.
bool structurally_independent(const Variable& X, const Variable& Y, const std::optional<Variable>& Z = std::nullopt,
                              HistoryOptions options = {});

/// h(X) subset of h(Y).
bool structurally_before(const Variable& X, const Variable& Y, HistoryOptions options = {});
/// h(X) strict subset of h(Y).
bool strictly_before(const Variable& X, const Variable& Y, HistoryOptions options = {});

enum class Axiom { symmetry, decomposition, weak_union, contraction, intersection, composition };

std::string_view axiom_name(Axiom axiom);
/// Throws PreconditionError for an unknown name.
Axiom parse_axiom(std::string_view name);
inline constexpr Axiom kAllAxioms[] = {Axiom::symmetry,    Axiom::decomposition, Axiom::weak_union,
                                       Axiom::contraction, Axiom::intersection,  Axiom::composition};

struct AxiomInstance {
    Variable x, y, z;
    std::optional<Variable> w;
};

struct AxiomReport {
    Axiom axiom;
    /// The left-hand side held, so the instance was not vacuous.
    bool premise = false;
    bool holds = true;
    /// The instance, present iff the axiom fails on it.
    std::optional<AxiomInstance> counterexample;
};

/// Evaluates one instance of the axiom for structural independence, conditioning
/// on W (absent = nothing):
///
///   symmetry       X _|_ Y | W                          =>  Y _|_ X | W
///   decomposition  X _|_ (Y,Z) | W                      =>  X _|_ Y | W
///   weak union     X _|_ (Y,Z) | W                      =>  X _|_ Z | (Y,W)
///   contraction    X _|_ Y | W  and  X _|_ Z | (Y,W)     =>  X _|_ (Y,Z) | W
///   intersection   X _|_ Y | (Z,W) and X _|_ Z | (Y,W)
///                  and Y != Z                           =>  X _|_ (Y,Z) | W
///   composition    X _|_ Y | W  and  X _|_ Z | W         =>  X _|_ (Y,Z) | W
///
/// For intersection, Y != Z means the two variables induce different fiber
/// partitions of Omega.
AxiomReport check_axiom(Axiom axiom, const Variable& X, const Variable& Y, const Variable& Z,
                        const std::optional<Variable>& W = std::nullopt, HistoryOptions options = {});

/// structurally_before(X, Y) agrees with "for every background variable U_i,
/// Y _|_ U_i implies X _|_ U_i".
bool time_characterization_check(const Variable& X, const Variable& Y, HistoryOptions options = {});

}  // namespace fsm
