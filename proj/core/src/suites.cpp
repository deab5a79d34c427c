#include "fsm/suites.hpp"

#include "fsm/random.hpp"

namespace fsm {

std::vector<Triple> random_triples(const SpacePtr& space, std::size_t count, Rng& rng, ValueId max_values) {
    std::vector<Triple> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        auto x = random_variable(space, rng, max_values);
        auto y = random_variable(space, rng, max_values);
        std::optional<Variable> z;
        if (rng() % 4 != 0) z = random_variable(space, rng, max_values);
        out.push_back(Triple{std::move(x), std::move(y), std::move(z)});
    }
    return out;
}

SoundnessReport soundness_suite(const std::vector<Triple>& triples, std::size_t samples, Rng& rng,
                                std::uint32_t denominator_bound, const std::vector<FactorizingDistribution>& extra) {
    SoundnessReport report;
    for (const auto& t : triples) {
        ++report.triples;
        if (!structurally_independent(t.x, t.y, t.z)) continue;
        ++report.structurally_independent;
        auto check = [&](const FactorizingDistribution& P) {
            ++report.distributions_checked;
            if (!cond_indep_vars(P, t.x, t.y, t.z).independent) report.violations.push_back({t, P});
        };
        for (const auto& P : extra) check(P);
        for (std::size_t s = 0; s < samples; ++s) check(sample_factorizing(t.x.space_ptr(), rng, denominator_bound));
    }
    return report;
}

CompletenessReport completeness_suite(const std::vector<Triple>& triples, std::size_t trials, Rng& rng,
                                      std::uint32_t denominator_bound) {
    CompletenessReport report;
    for (const auto& t : triples) {
        ++report.triples;
        if (structurally_independent(t.x, t.y, t.z)) continue;
        ++report.structurally_dependent;
        if (completeness_witness(t.x, t.y, t.z, trials, rng, denominator_bound)) {
            ++report.witnessed;
        } else {
            report.failures.push_back(t);
        }
    }
    return report;
}

bool AxiomSuiteReport::clean() const {
    for (auto a : kAllAxioms) {
        if (a != Axiom::intersection && (*this)[a].failures > 0) return false;
    }
    return true;
}

AxiomSuiteReport axiom_suite(const std::vector<AxiomInstance>& instances, std::size_t keep_counterexamples) {
    AxiomSuiteReport report;
    for (const auto& inst : instances) {
        for (auto a : kAllAxioms) {
            auto& counts = report[a];
            ++counts.instances;
            auto result = check_axiom(a, inst.x, inst.y, inst.z, inst.w);
            if (result.premise) ++counts.applicable;
            if (result.holds) continue;
            ++counts.failures;
            if (counts.counterexamples.size() < keep_counterexamples) counts.counterexamples.push_back(inst);
        }
    }
    return report;
}

std::vector<AxiomInstance> random_axiom_instances(const SpacePtr& space, std::size_t count, Rng& rng,
                                                  ValueId max_values) {
    std::vector<AxiomInstance> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        auto x = random_variable(space, rng, max_values);
        auto y = random_variable(space, rng, max_values);
        auto z = random_variable(space, rng, max_values);
        std::optional<Variable> w;
        if (rng() % 2 == 0) w = random_variable(space, rng, max_values);
        out.push_back(AxiomInstance{std::move(x), std::move(y), std::move(z), std::move(w)});
    }
    return out;
}

}  // namespace fsm
