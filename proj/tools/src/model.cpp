#include "fsk/model.hpp"

#include "json_text.hpp"

#include "fsk/expression.hpp"
#include "fsm/error.hpp"
#include "fsm/rational.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <sstream>
#include <variant>

namespace fsk {

using Json = nlohmann::ordered_json;

namespace {

using PathToken = std::variant<std::string, std::size_t>;
using Path = std::vector<PathToken>;

// Finds the byte offset of the value at `path` in already validated JSON text.
// Stops at the deepest container it can reach when the path does not resolve.
class Locator {
public:
    explicit Locator(std::string_view text) : t_(text) {}

    std::size_t find(const Path& path) {
        pos_ = 0;
        for (const auto& token : path) {
            ws();
            if (pos_ >= t_.size()) break;
            const auto here = pos_;
            if (t_[pos_] == '{' && std::holds_alternative<std::string>(token)) {
                if (!enter_member(std::get<std::string>(token))) return here;
            } else if (t_[pos_] == '[' && std::holds_alternative<std::size_t>(token)) {
                if (!enter_element(std::get<std::size_t>(token))) return here;
            } else {
                return here;
            }
        }
        ws();
        return pos_;
    }

private:
    bool enter_member(const std::string& key) {
        ++pos_;
        ws();
        if (peek() == '}') return false;
        for (;;) {
            ws();
            const auto name = string();
            ws();
            if (peek() != ':') return false;
            ++pos_;
            if (name == key) return true;
            skip_value();
            ws();
            if (peek() != ',') return false;
            ++pos_;
        }
    }

    bool enter_element(std::size_t index) {
        ++pos_;
        ws();
        if (peek() == ']') return false;
        for (std::size_t k = 0;; ++k) {
            if (k == index) return true;
            skip_value();
            ws();
            if (peek() != ',') return false;
            ++pos_;
        }
    }

    void skip_value() {
        ws();
        const char c = peek();
        if (c == '"') {
            string();
        } else if (c == '{' || c == '[') {
            const char close = c == '{' ? '}' : ']';
            ++pos_;
            ws();
            if (peek() == close) {
                ++pos_;
                return;
            }
            for (;;) {
                if (c == '{') {
                    ws();
                    string();
                    ws();
                    ++pos_;  // ':'
                }
                skip_value();
                ws();
                if (peek() != ',') break;
                ++pos_;
            }
            ++pos_;
        } else {
            while (pos_ < t_.size() && std::string_view(",]} \t\r\n").find(t_[pos_]) == std::string_view::npos) ++pos_;
        }
    }

    std::string string() {
        std::string out;
        if (peek() != '"') return out;
        ++pos_;
        while (pos_ < t_.size() && t_[pos_] != '"') {
            if (t_[pos_] == '\\' && pos_ + 1 < t_.size()) {
                out += t_[pos_ + 1];
                pos_ += 2;
            } else {
                out += t_[pos_++];
            }
        }
        ++pos_;
        return out;
    }

    void ws() {
        while (pos_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[pos_]))) ++pos_;
    }
    char peek() const { return pos_ < t_.size() ? t_[pos_] : '\0'; }

    std::string_view t_;
    std::size_t pos_ = 0;
};

std::pair<int, int> line_column(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    int line = 1;
    std::size_t line_start = 0;
    for (std::size_t k = 0; k < offset; ++k) {
        if (text[k] == '\n') {
            ++line;
            line_start = k + 1;
        }
    }
    return {line, static_cast<int>(offset - line_start + 1)};
}

bool is_identifier(std::string_view name) {
    if (name.empty() || std::isdigit(static_cast<unsigned char>(name[0]))) return false;
    for (char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

class Reader {
public:
    Reader(std::string_view text, std::size_t size_cap) : text_(text), cap_(size_cap) {}

    Model read() {
        Json root;
        try {
            root = Json::parse(text_);
        } catch (const Json::parse_error& e) {
            std::string message = e.what();
            if (auto p = message.find("column "); p != std::string::npos) {
                if (auto q = message.find(": ", p); q != std::string::npos) message = message.substr(q + 2);
            }
            auto [line, column] = line_column(text_, e.byte == 0 ? 0 : e.byte - 1);
            throw fsm::ParseError(message, line, column);
        }
        if (!root.is_object()) fail("a model must be a JSON object");
        for (const auto& [key, value] : root.items()) {
            if (key != "factors" && key != "variables" && key != "events" && key != "distributions" && key != "dag") {
                Scope s(*this, key);
                fail("unknown section '" + key + "'");
            }
        }
        Model m;
        read_factors(root, m);
        read_variables(root, m);
        read_events(root, m);
        read_distributions(root, m);
        read_dag(root, m);
        return m;
    }

private:
    struct Scope {
        Scope(Reader& r, PathToken token) : r_(r) { r_.path_.push_back(std::move(token)); }
        ~Scope() { r_.path_.pop_back(); }
        Reader& r_;
    };

    [[noreturn]] void fail(const std::string& message) const {
        auto [line, column] = line_column(text_, Locator(text_).find(path_));
        throw fsm::ParseError(message, line, column);
    }

    const Json& array(const Json& j) const {
        if (!j.is_array()) fail("expected an array");
        return j;
    }
    const Json& object(const Json& j) const {
        if (!j.is_object()) fail("expected an object");
        return j;
    }
    std::string string(const Json& j) const {
        if (!j.is_string()) fail("expected a string");
        return j.get<std::string>();
    }
    std::uint32_t unsigned32(const Json& j) const {
        if (!j.is_number_unsigned() || j.get<std::uint64_t>() > 0xffffffffULL) fail("expected a non-negative integer");
        return j.get<std::uint32_t>();
    }
    fsm::Rational rational(const Json& j) const {
        if (!j.is_string()) fail("probabilities are strings \"num/den\"");
        try {
            return fsm::parse_rational(j.get<std::string>());
        } catch (const fsm::ParseError& e) {
            fail(e.what());
        }
    }
    std::vector<fsm::Rational> probability_row(const Json& j, const std::string& what) {
        std::vector<fsm::Rational> row;
        for (std::size_t k = 0; k < array(j).size(); ++k) {
            Scope s(*this, k);
            row.push_back(rational(j[k]));
            if (sgn(row.back()) < 0) fail(what + " has a negative entry");
        }
        fsm::Rational total = 0;
        for (const auto& p : row) total += p;
        if (total != 1) fail(what + " sums to " + fsm::format_rational(total) + ", not 1");
        return row;
    }
    const Json& field(const Json& obj, const char* key) const {
        if (!obj.contains(key)) fail(std::string("missing \"") + key + "\"");
        return obj.at(key);
    }
    void allow_keys(const Json& obj, std::initializer_list<std::string_view> keys) {
        for (const auto& [key, value] : obj.items()) {
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                Scope s(*this, key);
                fail("unknown key '" + key + "'");
            }
        }
    }
    std::string name_field(const Json& obj) {
        Scope s(*this, "name");
        auto name = string(field(obj, "name"));
        if (!is_identifier(name)) fail("names are letters, digits and '_', not starting with a digit");
        return name;
    }

    void read_factors(const Json& root, Model& m) {
        if (root.contains("factors")) {
            Scope s(*this, "factors");
            const auto& list = array(root.at("factors"));
            for (std::size_t k = 0; k < list.size(); ++k) {
                Scope e(*this, k);
                const auto& f = object(list[k]);
                allow_keys(f, {"label", "cardinality"});
                fsm::Factor factor;
                {
                    Scope l(*this, "label");
                    factor.label = string(field(f, "label"));
                    if (factor.label.empty()) fail("factor labels must be non-empty");
                    for (const auto& other : m.factors) {
                        if (other.label == factor.label) fail("duplicate factor label '" + factor.label + "'");
                    }
                }
                {
                    Scope c(*this, "cardinality");
                    factor.cardinality = unsigned32(field(f, "cardinality"));
                    if (factor.cardinality == 0) fail("cardinality must be positive");
                }
                m.factors.push_back(std::move(factor));
            }
        }
        m.space = fsm::make_space(m.factors, cap_);
    }

    void check_fresh(const Model& m, const std::string& name) {
        if (m.find_variable(name) != nullptr) fail("'" + name + "' is already defined");
    }

    VariableLookup lookup(const Model& m) const {
        return [&m](std::string_view name) { return m.find_variable(name); };
    }

    fsm::Variable compile(const Model& m, const Json& obj, std::string& canonical) {
        Scope s(*this, "expr");
        const auto text = string(obj.at("expr"));
        try {
            auto compiled = compile_expression(text, m.space, lookup(m));
            canonical = std::move(compiled.canonical);
            return std::move(compiled.variable);
        } catch (const fsm::ParseError& e) {
            std::string message = e.what();
            message = message.substr(message.find(": ") + 2);
            fail("expression column " + std::to_string(e.column()) + ": " + message);
        } catch (const fsm::CapacityError&) {
            throw;
        } catch (const fsm::Error& e) {
            fail(e.what());
        }
    }

    void read_variables(const Json& root, Model& m) {
        if (!root.contains("variables")) return;
        Scope s(*this, "variables");
        const auto& list = array(root.at("variables"));
        for (std::size_t k = 0; k < list.size(); ++k) {
            Scope e(*this, k);
            const auto& obj = object(list[k]);
            allow_keys(obj, {"name", "expr", "values", "table"});
            VariableDef def;
            def.name = name_field(obj);
            {
                Scope n(*this, "name");
                check_fresh(m, def.name);
            }
            std::optional<fsm::Variable> X;
            if (obj.contains("expr")) {
                if (obj.contains("table") || obj.contains("values")) fail("give either \"expr\" or \"values\" and \"table\"");
                X = compile(m, obj, def.expr);
            } else {
                {
                    Scope v(*this, "values");
                    def.values = unsigned32(field(obj, "values"));
                    if (def.values == 0) fail("a variable needs at least one value");
                }
                Scope t(*this, "table");
                const auto& table = array(field(obj, "table"));
                if (table.size() != m.space->size()) {
                    fail("table has " + std::to_string(table.size()) + " entries, the space has " +
                         std::to_string(m.space->size()) + " points");
                }
                for (std::size_t w = 0; w < table.size(); ++w) {
                    Scope c(*this, w);
                    def.table.push_back(unsigned32(table[w]));
                    if (def.table.back() >= def.values) fail("value out of range");
                }
                X = fsm::Variable(m.space, def.table, def.values);
            }
            m.variables.emplace(def.name, *X);
            m.variable_defs.push_back(std::move(def));
        }
    }

    void read_events(const Json& root, Model& m) {
        if (!root.contains("events")) return;
        Scope s(*this, "events");
        const auto& list = array(root.at("events"));
        for (std::size_t k = 0; k < list.size(); ++k) {
            Scope e(*this, k);
            const auto& obj = object(list[k]);
            allow_keys(obj, {"name", "expr", "points"});
            EventDef def;
            def.name = name_field(obj);
            {
                Scope n(*this, "name");
                check_fresh(m, def.name);
            }
            boost::dynamic_bitset<> bits(m.space->size());
            if (obj.contains("expr")) {
                if (obj.contains("points")) fail("give either \"expr\" or \"points\"");
                const auto X = compile(m, obj, def.expr);
                for (fsm::PointIndex w = 0; w < bits.size(); ++w) bits[w] = X(w) != 0;
            } else {
                Scope p(*this, "points");
                const auto& points = array(field(obj, "points"));
                for (std::size_t q = 0; q < points.size(); ++q) {
                    Scope c(*this, q);
                    std::vector<fsm::ValueId> coords;
                    for (const auto& v : array(points[q])) coords.push_back(unsigned32(v));
                    try {
                        bits.set(fsm::encode(*m.space, fsm::Point{coords}));
                    } catch (const fsm::Error& err) {
                        fail(err.what());
                    }
                    def.points.push_back(std::move(coords));
                }
            }
            m.add_event(def.name, fsm::Event(m.space, std::move(bits)));
            m.event_defs.push_back(std::move(def));
        }
    }

    void read_distributions(const Json& root, Model& m) {
        if (!root.contains("distributions")) return;
        Scope s(*this, "distributions");
        const auto& list = array(root.at("distributions"));
        for (std::size_t k = 0; k < list.size(); ++k) {
            Scope e(*this, k);
            const auto& obj = object(list[k]);
            DistributionDef def;
            def.name = name_field(obj);
            if (m.factorizing.count(def.name) || m.general.count(def.name)) {
                Scope n(*this, "name");
                fail("distribution '" + def.name + "' is already defined");
            }
            std::string kind;
            {
                Scope c(*this, "kind");
                kind = string(field(obj, "kind"));
                if (kind != "factorizing" && kind != "general") fail("kind is \"factorizing\" or \"general\"");
            }
            def.factorizing = kind == "factorizing";
            if (def.factorizing) {
                allow_keys(obj, {"name", "kind", "factors"});
                Scope f(*this, "factors");
                const auto& rows = array(field(obj, "factors"));
                if (rows.size() != m.space->num_factors()) {
                    fail("expected " + std::to_string(m.space->num_factors()) + " factor rows, got " +
                         std::to_string(rows.size()));
                }
                for (std::uint32_t i = 0; i < rows.size(); ++i) {
                    Scope r(*this, std::size_t{i});
                    def.rows.push_back(probability_row(rows[i], "factor row " + std::to_string(i)));
                    if (def.rows.back().size() != m.space->cardinality(fsm::FactorId{i})) {
                        fail("factor row " + std::to_string(i) + " needs " +
                             std::to_string(m.space->cardinality(fsm::FactorId{i})) + " entries");
                    }
                }
                m.factorizing.emplace(def.name, fsm::FactorizingDistribution(m.space, def.rows));
            } else {
                allow_keys(obj, {"name", "kind", "probabilities"});
                Scope f(*this, "probabilities");
                def.rows.push_back(probability_row(field(obj, "probabilities"), "probability vector"));
                if (def.rows[0].size() != m.space->size()) {
                    fail("expected " + std::to_string(m.space->size()) + " probabilities");
                }
                m.general.emplace(def.name, fsm::GeneralDistribution(m.space, def.rows[0]));
            }
            m.distribution_defs.push_back(std::move(def));
        }
    }

    void read_dag(const Json& root, Model& m) {
        if (!root.contains("dag")) return;
        Scope s(*this, "dag");
        const auto& obj = object(root.at("dag"));
        allow_keys(obj, {"nodes", "edges", "cpts"});
        DagDef def;
        {
            Scope n(*this, "nodes");
            const auto& nodes = array(field(obj, "nodes"));
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                Scope e(*this, k);
                const auto& node = object(nodes[k]);
                allow_keys(node, {"name", "cardinality"});
                fsm::Node v{name_field(node), 2};
                for (const auto& other : def.nodes) {
                    if (other.name == v.name) fail("duplicate node '" + v.name + "'");
                }
                if (node.contains("cardinality")) {
                    Scope c(*this, "cardinality");
                    v.cardinality = unsigned32(node.at("cardinality"));
                    if (v.cardinality < 2) fail("node cardinality must be at least 2");
                }
                def.nodes.push_back(std::move(v));
            }
        }
        auto node_id = [&](const std::string& name) -> std::optional<fsm::NodeId> {
            for (fsm::NodeId v = 0; v < def.nodes.size(); ++v) {
                if (def.nodes[v].name == name) return v;
            }
            return std::nullopt;
        };
        std::vector<std::pair<fsm::NodeId, fsm::NodeId>> edges;
        if (obj.contains("edges")) {
            Scope e(*this, "edges");
            const auto& list = array(obj.at("edges"));
            for (std::size_t k = 0; k < list.size(); ++k) {
                Scope i(*this, k);
                const auto& edge = array(list[k]);
                if (edge.size() != 2) fail("an edge is [\"from\", \"to\"]");
                std::array<fsm::NodeId, 2> ends{};
                for (std::size_t side = 0; side < 2; ++side) {
                    Scope p(*this, side);
                    const auto name = string(edge[side]);
                    auto id = node_id(name);
                    if (!id) fail("unknown node '" + name + "'");
                    ends[side] = *id;
                }
                edges.emplace_back(ends[0], ends[1]);
                def.edges.emplace_back(def.nodes[ends[0]].name, def.nodes[ends[1]].name);
            }
            try {
                m.dag.emplace(def.nodes, edges);
            } catch (const fsm::PreconditionError&) {
                fail("the edges contain a directed cycle");
            } catch (const fsm::Error& err) {
                fail(err.what());
            }
        } else {
            m.dag.emplace(def.nodes, edges);
        }
        if (obj.contains("cpts")) {
            Scope c(*this, "cpts");
            const auto& cpts = object(obj.at("cpts"));
            fsm::Cpt cpt;
            cpt.rows.resize(def.nodes.size());
            for (const auto& [name, rows] : cpts.items()) {
                Scope n(*this, name);
                auto id = node_id(name);
                if (!id) fail("unknown node '" + name + "'");
                const auto configs = m.dag->num_parent_configurations(*id);
                if (array(rows).size() != configs) {
                    fail("node '" + name + "' needs " + std::to_string(configs) + " CPT rows, got " +
                         std::to_string(rows.size()));
                }
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    Scope i(*this, r);
                    auto row = probability_row(rows[r], "CPT row " + std::to_string(r) + " of node '" + name + "'");
                    if (row.size() != def.nodes[*id].cardinality) {
                        fail("CPT row " + std::to_string(r) + " of node '" + name + "' needs " +
                             std::to_string(def.nodes[*id].cardinality) + " entries");
                    }
                    cpt.rows[*id].push_back(std::move(row));
                }
            }
            for (fsm::NodeId v = 0; v < def.nodes.size(); ++v) {
                if (cpt.rows[v].empty()) fail("missing CPT for node '" + def.nodes[v].name + "'");
            }
            def.cpt = std::move(cpt);
        }
        m.dag_def = std::move(def);
    }

    std::string_view text_;
    std::size_t cap_;
    Path path_;
};

Json rationals(const std::vector<fsm::Rational>& row) {
    Json out = Json::array();
    for (const auto& p : row) out.push_back(fsm::format_rational(p));
    return out;
}

}  // namespace

namespace detail {

void print(std::ostream& out, const Json& j, int indent) {
    auto scalar = [](const Json& v) { return !v.is_object() && !v.is_array(); };
    const bool flat = std::all_of(j.begin(), j.end(), scalar);
    const std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
    if (j.is_array()) {
        if (j.empty() || flat) {
            out << '[';
            for (std::size_t k = 0; k < j.size(); ++k) out << (k ? ", " : "") << j[k].dump();
            out << ']';
            return;
        }
        out << "[\n";
        for (std::size_t k = 0; k < j.size(); ++k) {
            out << pad;
            print(out, j[k], indent + 2);
            out << (k + 1 < j.size() ? ",\n" : "\n");
        }
        out << std::string(static_cast<std::size_t>(indent), ' ') << ']';
    } else if (j.is_object()) {
        if (j.empty() || flat) {
            out << '{';
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                out << (first ? "" : ", ") << Json(key).dump() << ": " << value.dump();
                first = false;
            }
            out << '}';
            return;
        }
        out << "{\n";
        std::size_t k = 0;
        for (const auto& [key, value] : j.items()) {
            out << pad << Json(key).dump() << ": ";
            print(out, value, indent + 2);
            out << (++k < j.size() ? ",\n" : "\n");
        }
        out << std::string(static_cast<std::size_t>(indent), ' ') << '}';
    } else {
        out << j.dump();
    }
}

std::string json_text(const Json& j) {
    std::ostringstream out;
    print(out, j, 0);
    return out.str();
}

}  // namespace detail

const fsm::Variable* Model::find_variable(std::string_view name) const {
    if (auto it = variables.find(name); it != variables.end()) return &it->second;
    if (auto it = indicators_.find(name); it != indicators_.end()) return &it->second;
    return nullptr;
}

const fsm::Event* Model::find_event(std::string_view name) const {
    auto it = events.find(name);
    return it == events.end() ? nullptr : &it->second;
}

std::vector<std::string> Model::variable_names() const {
    std::vector<std::string> out;
    for (const auto& def : variable_defs) out.push_back(def.name);
    return out;
}

void Model::add_variable(const std::string& name, const fsm::Variable& X) {
    if (find_variable(name) != nullptr) throw fsm::PreconditionError("'" + name + "' is already defined");
    variable_defs.push_back(VariableDef{name, "", X.num_values(), X.table()});
    variables.emplace(name, X);
}

void Model::add_distribution(const std::string& name, const fsm::FactorizingDistribution& P) {
    distribution_defs.push_back(DistributionDef{name, true, P.factors()});
    factorizing.emplace(name, P);
}

void Model::add_event(const std::string& name, const fsm::Event& E) {
    events.emplace(name, E);
    indicators_.emplace(name, fsm::indicator(E));
}

Model parse_model(std::string_view text, std::size_t size_cap) { return Reader(text, size_cap).read(); }

Model load_model(const std::filesystem::path& path, std::size_t size_cap) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fsm::ParseError("cannot read model file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str(), size_cap);
}

Model model_on(fsm::SpacePtr space) {
    Model m;
    m.factors = space->factors();
    m.space = std::move(space);
    return m;
}

std::string emit_model(const Model& m) {
    Json root = Json::object();
    root["factors"] = Json::array();
    for (const auto& f : m.factors) root["factors"].push_back(Json{{"label", f.label}, {"cardinality", f.cardinality}});
    if (!m.variable_defs.empty()) {
        auto& list = root["variables"] = Json::array();
        for (const auto& def : m.variable_defs) {
            if (!def.expr.empty()) {
                list.push_back(Json{{"name", def.name}, {"expr", def.expr}});
            } else {
                list.push_back(Json{{"name", def.name}, {"values", def.values}, {"table", def.table}});
            }
        }
    }
    if (!m.event_defs.empty()) {
        auto& list = root["events"] = Json::array();
        for (const auto& def : m.event_defs) {
            if (!def.expr.empty()) {
                list.push_back(Json{{"name", def.name}, {"expr", def.expr}});
            } else {
                Json points = Json::array();
                for (const auto& p : def.points) points.push_back(p);
                list.push_back(Json{{"name", def.name}, {"points", points}});
            }
        }
    }
    if (!m.distribution_defs.empty()) {
        auto& list = root["distributions"] = Json::array();
        for (const auto& def : m.distribution_defs) {
            Json d{{"name", def.name}, {"kind", def.factorizing ? "factorizing" : "general"}};
            if (def.factorizing) {
                Json rows = Json::array();
                for (const auto& row : def.rows) rows.push_back(rationals(row));
                d["factors"] = rows;
            } else {
                d["probabilities"] = rationals(def.rows.at(0));
            }
            list.push_back(std::move(d));
        }
    }
    if (m.dag_def) {
        const auto& def = *m.dag_def;
        Json dag = Json::object();
        dag["nodes"] = Json::array();
        for (const auto& v : def.nodes) dag["nodes"].push_back(Json{{"name", v.name}, {"cardinality", v.cardinality}});
        dag["edges"] = Json::array();
        for (const auto& [from, to] : def.edges) dag["edges"].push_back(Json::array({from, to}));
        if (def.cpt) {
            Json cpts = Json::object();
            for (std::size_t v = 0; v < def.nodes.size(); ++v) {
                Json rows = Json::array();
                for (const auto& row : def.cpt->rows[v]) rows.push_back(rationals(row));
                cpts[def.nodes[v].name] = rows;
            }
            dag["cpts"] = cpts;
        }
        root["dag"] = std::move(dag);
    }
    return detail::json_text(root) + "\n";
}

bool same_definitions(const Model& a, const Model& b) { return emit_model(a) == emit_model(b); }

}  // namespace fsk
