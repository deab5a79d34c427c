#pragma once

// Model files: JSON with the sections
//
//   "factors"        [{"label": "c1", "cardinality": 2}, ...]
//   "variables"      [{"name": "X", "expr": "..."} or {"name": "X", "values": k, "table": [...]}]
//   "events"         [{"name": "E", "points": [[...], ...]} or {"name": "E", "expr": "..."}]
//   "distributions"  [{"name": "P", "kind": "factorizing", "factors": [["1/2", "1/2"], ...]}
//                     or {"name": "P", "kind": "general", "probabilities": ["1/4", ...]}]
//   "dag"            {"nodes": [{"name": "a", "cardinality": 2}], "edges": [["a", "b"]],
//                     "cpts": {"a": [["1/2", "1/2"]], "b": [[...], [...]]}}
//
// Every section is optional. Probabilities are strings "num" or "num/den".
// Tables and points use the canonical encoding (factor 0 fastest); an event
// expression selects the points where it is non-zero. Variables and events
// share one namespace, and definitions may only refer to earlier ones.

#include "fsm/bayesnet.hpp"
#include "fsm/distribution.hpp"
#include "fsm/space.hpp"
#include "fsm/variable.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fsk {

struct VariableDef {
    std::string name;
    /// Canonical expression text; empty for a table.
    std::string expr;
    fsm::ValueId values = 0;
    std::vector<fsm::ValueId> table;
};

struct EventDef {
    std::string name;
    std::string expr;
    std::vector<std::vector<fsm::ValueId>> points;
};

struct DistributionDef {
    std::string name;
    bool factorizing = true;
    /// One row per factor, or a single row of point probabilities.
    std::vector<std::vector<fsm::Rational>> rows;
};

struct DagDef {
    std::vector<fsm::Node> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    std::optional<fsm::Cpt> cpt;
};

class Model {
public:
    /// The sections as written, in file order.
    std::vector<fsm::Factor> factors;
    std::vector<VariableDef> variable_defs;
    std::vector<EventDef> event_defs;
    std::vector<DistributionDef> distribution_defs;
    std::optional<DagDef> dag_def;

    /// Compiled objects.
    fsm::SpacePtr space;
    std::map<std::string, fsm::Variable, std::less<>> variables;
    std::map<std::string, fsm::Event, std::less<>> events;
    std::map<std::string, fsm::FactorizingDistribution, std::less<>> factorizing;
    std::map<std::string, fsm::GeneralDistribution, std::less<>> general;
    std::optional<fsm::Dag> dag;

    /// Variable or event (as its indicator) by name; nullptr if neither.
    const fsm::Variable* find_variable(std::string_view name) const;
    const fsm::Event* find_event(std::string_view name) const;
    std::vector<std::string> variable_names() const;

    /// Adds a table variable and its definition.
    void add_variable(const std::string& name, const fsm::Variable& X);
    void add_distribution(const std::string& name, const fsm::FactorizingDistribution& P);
    /// Registers a compiled event (the definition is left to the caller).
    void add_event(const std::string& name, const fsm::Event& E);

private:
    std::map<std::string, fsm::Variable, std::less<>> indicators_;
};

/// Throws fsm::ParseError with line and column of the offending JSON value, and
/// fsm::CapacityError when the space is too large.
Model parse_model(std::string_view text, std::size_t size_cap = fsm::FactoredSpace::kDefaultSizeCap);
Model load_model(const std::filesystem::path& path, std::size_t size_cap = fsm::FactoredSpace::kDefaultSizeCap);

/// An empty model whose factors section describes `space`.
Model model_on(fsm::SpacePtr space);

/// Deterministic text: two-space indentation, arrays of scalars on one line,
/// a trailing newline.
std::string emit_model(const Model& model);

/// emit-level equality of the written sections.
bool same_definitions(const Model& a, const Model& b);

}  // namespace fsk
