#include "fsm/structural.hpp"

#include "fsm/error.hpp"

namespace fsm {

namespace {

Variable condition_on(const Variable& Y, const std::optional<Variable>& W) {
    return W ? joint(Y, *W) : Y;
}

}  // namespace

bool structurally_independent(const Variable& X, const Variable& Y, const std::optional<Variable>& Z,
                              HistoryOptions options) {
    if (!same_space(X.space_ptr(), Y.space_ptr()) || (Z && !same_space(X.space_ptr(), Z->space_ptr()))) {
        throw SpaceMismatchError("structural independence query mixes spaces");
    }
    if (!Z) return !history(X, options).intersects(history(Y, options));
    std::vector<bool> seen(Z->num_values(), false);
    for (auto z : Z->table()) seen[z] = true;
    for (ValueId z = 0; z < Z->num_values(); ++z) {
        if (!seen[z]) continue;
        const Decomposition decomposition(fiber(*Z, z), options);
        if (history(X, decomposition).intersects(history(Y, decomposition))) return false;
    }
    return true;
}

bool structurally_before(const Variable& X, const Variable& Y, HistoryOptions options) {
    return history(X, options).is_subset_of(history(Y, options));
}

bool strictly_before(const Variable& X, const Variable& Y, HistoryOptions options) {
    const auto hx = history(X, options);
    const auto hy = history(Y, options);
    return hx.is_subset_of(hy) && hx != hy;
}

std::string_view axiom_name(Axiom axiom) {
    switch (axiom) {
        case Axiom::symmetry: return "symmetry";
        case Axiom::decomposition: return "decomposition";
        case Axiom::weak_union: return "weak-union";
        case Axiom::contraction: return "contraction";
        case Axiom::intersection: return "intersection";
        case Axiom::composition: return "composition";
    }
    return "unknown";
}

Axiom parse_axiom(std::string_view name) {
    for (auto a : kAllAxioms) {
        if (axiom_name(a) == name) return a;
    }
    throw PreconditionError("unknown axiom '" + std::string(name) + "'");
}

AxiomReport check_axiom(Axiom axiom, const Variable& X, const Variable& Y, const Variable& Z,
                        const std::optional<Variable>& W, HistoryOptions options) {
    auto indep = [&](const Variable& a, const Variable& b, const std::optional<Variable>& given) {
        return structurally_independent(a, b, given, options);
    };
    bool premise = false;
    bool conclusion = true;
    switch (axiom) {
        case Axiom::symmetry:
            premise = indep(X, Y, W);
            conclusion = !premise || indep(Y, X, W);
            break;
        case Axiom::decomposition:
            premise = indep(X, joint(Y, Z), W);
            conclusion = !premise || indep(X, Y, W);
            break;
        case Axiom::weak_union:
            premise = indep(X, joint(Y, Z), W);
            conclusion = !premise || indep(X, Z, condition_on(Y, W));
            break;
        case Axiom::contraction:
            premise = indep(X, Y, W) && indep(X, Z, condition_on(Y, W));
            conclusion = !premise || indep(X, joint(Y, Z), W);
            break;
        case Axiom::intersection:
            premise = !same_fibers(Y, Z) && indep(X, Y, condition_on(Z, W)) && indep(X, Z, condition_on(Y, W));
            conclusion = !premise || indep(X, joint(Y, Z), W);
            break;
        case Axiom::composition:
            premise = indep(X, Y, W) && indep(X, Z, W);
            conclusion = !premise || indep(X, joint(Y, Z), W);
            break;
    }
    AxiomReport report{axiom, premise, conclusion, std::nullopt};
    if (!conclusion) report.counterexample = AxiomInstance{X, Y, Z, W};
    return report;
}

bool time_characterization_check(const Variable& X, const Variable& Y, HistoryOptions options) {
    const bool before = structurally_before(X, Y, options);
    bool implication = true;
    const auto& space = X.space_ptr();
    for (std::uint32_t i = 0; i < space->num_factors() && implication; ++i) {
        const auto U = background(space, FactorId{i});
        implication = !structurally_independent(Y, U, std::nullopt, options) ||
                      structurally_independent(X, U, std::nullopt, options);
    }
    return before == implication;
}

}  // namespace fsm
