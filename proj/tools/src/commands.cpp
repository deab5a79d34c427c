#include "fsk/commands.hpp"

#include "fsk/model.hpp"
#include "json_text.hpp"

#include "fsm/bayesnet.hpp"
#include "fsm/error.hpp"
#include "fsm/history.hpp"
#include "fsm/random.hpp"
#include "fsm/structural.hpp"
#include "fsm/suites.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <optional>
#include <ostream>
#include <sstream>

namespace fsk {

namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string model_path;
    std::vector<std::string> given;
    bool witness = false;
    std::uint64_t seed = 1;
    std::size_t trials = 200;
    bool json = false;
    bool strict = false;
    std::string random_shape;
    std::string output;
    std::vector<std::string> positional;
};

std::vector<std::string> split(std::string_view list, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto end = list.find(sep, start);
        auto item = list.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if (!item.empty()) out.emplace_back(item);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

Model load(const Options& opt) {
    if (opt.model_path.empty()) throw UsageError("--model PATH is required");
    try {
        return load_model(opt.model_path);
    } catch (const fsm::ParseError& e) {
        throw fsm::ParseError(opt.model_path + ":" + e.what());
    }
}

// A name or a comma-separated list of names (their joint variable).
fsm::Variable resolve(const Model& m, std::string_view list) {
    std::vector<fsm::Variable> parts;
    for (const auto& name : split(list)) {
        const auto* v = m.find_variable(name);
        if (v == nullptr) throw UsageError("unknown variable or event '" + name + "'");
        parts.push_back(*v);
    }
    if (parts.empty()) throw UsageError("empty variable list");
    return fsm::joint(m.space, parts);
}

std::optional<fsm::Variable> resolve_given_variables(const Model& m, const std::vector<std::string>& given) {
    std::vector<fsm::Variable> parts;
    for (const auto& g : given) {
        if (g.find('=') != std::string::npos) {
            throw UsageError("conditioning here is on variables; use --given NAME");
        }
        parts.push_back(resolve(m, g));
    }
    if (parts.empty()) return std::nullopt;
    return fsm::joint(m.space, parts);
}

fsm::ValueId parse_value(std::string_view text) {
    fsm::ValueId v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size()) throw UsageError("bad value '" + std::string(text) + "'");
    return v;
}

// Intersection of NAME=VALUE fibers and named events.
fsm::Event resolve_given_event(const Model& m, const std::vector<std::string>& given) {
    auto C = fsm::Event::full(m.space);
    for (const auto& g : given) {
        if (auto eq = g.find('='); eq != std::string::npos) {
            const auto X = resolve(m, std::string_view(g).substr(0, eq));
            const auto x = parse_value(std::string_view(g).substr(eq + 1));
            if (x >= X.num_values()) throw UsageError("value " + std::to_string(x) + " out of range in '" + g + "'");
            C = C & fsm::fiber(X, x);
        } else if (const auto* E = m.find_event(g)) {
            C = C & *E;
        } else if (m.find_variable(g) != nullptr) {
            throw UsageError("a history is conditioned on an event; use --given " + g + "=VALUE");
        } else {
            throw UsageError("unknown event '" + g + "'");
        }
    }
    return C;
}

std::vector<std::string> labels(const fsm::FactoredSpace& space, fsm::IndexSubset J) {
    std::vector<std::string> out;
    for (auto i : J.ids()) out.push_back(space.label(i));
    return out;
}

std::string braces(const std::vector<std::string>& items) {
    std::string s = "{";
    for (std::size_t k = 0; k < items.size(); ++k) s += (k ? ", " : "") + items[k];
    return s + "}";
}

Json distribution_json(const std::string& name, const fsm::FactorizingDistribution& P) {
    Json rows = Json::array();
    for (const auto& row : P.factors()) {
        Json r = Json::array();
        for (const auto& p : row) r.push_back(fsm::format_rational(p));
        rows.push_back(std::move(r));
    }
    return Json{{"name", name}, {"kind", "factorizing"}, {"factors", rows}};
}

int cmd_history(const Options& opt, std::ostream& out) {
    if (opt.positional.size() != 1) throw UsageError("usage: fsk history --model PATH X [--given NAME=VALUE|EVENT]...");
    const auto m = load(opt);
    const auto X = resolve(m, opt.positional[0]);
    const auto C = resolve_given_event(m, opt.given);
    const auto h = fsm::history(X, C);
    const auto names = labels(*m.space, h);
    if (opt.json) {
        out << Json{{"command", "history"}, {"variable", opt.positional[0]}, {"given", opt.given}, {"history", names}}.dump()
            << '\n';
    } else {
        out << braces(names) << '\n';
    }
    return kClean;
}

int cmd_indep(const Options& opt, std::ostream& out) {
    if (opt.positional.size() != 2) throw UsageError("usage: fsk indep --model PATH X Y [--given Z]... [--witness]");
    const auto m = load(opt);
    const auto X = resolve(m, opt.positional[0]);
    const auto Y = resolve(m, opt.positional[1]);
    const auto Z = resolve_given_variables(m, opt.given);
    const bool independent = fsm::structurally_independent(X, Y, Z);
    std::optional<fsm::FactorizingDistribution> witness;
    bool searched = false;
    if (opt.witness && !independent) {
        fsm::Rng rng(opt.seed);
        witness = fsm::completeness_witness(X, Y, Z, opt.trials, rng);
        searched = true;
    }
    if (opt.json) {
        Json j{{"command", "indep"},
               {"x", opt.positional[0]},
               {"y", opt.positional[1]},
               {"given", opt.given},
               {"independent", independent}};
        if (searched) j["witness"] = witness ? distribution_json("witness", *witness) : Json(nullptr);
        out << j.dump() << '\n';
    } else {
        out << (independent ? "structurally independent" : "structurally dependent") << '\n';
        if (searched && witness) {
            out << "witness (dependent under this factorizing distribution):\n"
                << detail::json_text(distribution_json("witness", *witness)) << '\n';
        } else if (searched) {
            out << "no witness found in " << opt.trials << " trials\n";
        }
    }
    return independent ? kClean : kViolation;
}

int cmd_before(const Options& opt, std::ostream& out) {
    if (opt.positional.size() != 2) throw UsageError("usage: fsk before --model PATH X Y [--strict]");
    const auto m = load(opt);
    const auto X = resolve(m, opt.positional[0]);
    const auto Y = resolve(m, opt.positional[1]);
    const bool before = opt.strict ? fsm::strictly_before(X, Y) : fsm::structurally_before(X, Y);
    if (opt.json) {
        out << Json{{"command", "before"},
                    {"x", opt.positional[0]},
                    {"y", opt.positional[1]},
                    {"strict", opt.strict},
                    {"before", before}}
                   .dump()
            << '\n';
    } else {
        out << opt.positional[0] << (before ? " is " : " is not ") << (opt.strict ? "strictly " : "")
            << "structurally before " << opt.positional[1] << '\n';
    }
    return before ? kClean : kViolation;
}

fsm::NodeSet resolve_nodes(const fsm::Dag& G, std::string_view list) {
    fsm::NodeSet out;
    for (const auto& name : split(list)) {
        auto v = G.find(name);
        if (!v) throw UsageError("unknown node '" + name + "'");
        out.insert(*v);
    }
    return out;
}

const fsm::Dag& require_dag(const Model& m) {
    if (!m.dag) throw UsageError("the model has no dag section");
    return *m.dag;
}

int cmd_dsep(const Options& opt, std::ostream& out) {
    if (opt.positional.size() != 2) throw UsageError("usage: fsk dsep --model PATH V1 V2 [--given V3]...");
    const auto m = load(opt);
    const auto& G = require_dag(m);
    const auto V1 = resolve_nodes(G, opt.positional[0]);
    const auto V2 = resolve_nodes(G, opt.positional[1]);
    fsm::NodeSet V3;
    for (const auto& g : opt.given) V3 = V3 | resolve_nodes(G, g);
    const bool separated = fsm::d_separated(G, V1, V2, V3);
    if (opt.json) {
        out << Json{{"command", "dsep"},
                    {"v1", opt.positional[0]},
                    {"v2", opt.positional[1]},
                    {"given", opt.given},
                    {"d_separated", separated}}
                   .dump()
            << '\n';
    } else {
        out << (separated ? "d-separated" : "d-connected") << '\n';
    }
    return separated ? kClean : kViolation;
}

Model fsm_model(const fsm::Dag& G, const DagDef& def) {
    const auto construction = fsm::build_fsm(G);
    auto m = model_on(construction.space);
    for (fsm::NodeId v = 0; v < G.size(); ++v) m.add_variable(G.node(v).name, construction.node_vars[v]);
    if (def.cpt) m.add_distribution("P", fsm::tau_inverse(construction, G, *def.cpt));
    m.dag_def = def;
    m.dag = G;
    return m;
}

int cmd_from_dag(const Options& opt, std::ostream& out) {
    if (!opt.positional.empty()) throw UsageError("usage: fsk from-dag --model PATH");
    const auto m = load(opt);
    const auto& G = require_dag(m);
    out << emit_model(fsm_model(G, *m.dag_def));
    return kClean;
}

// --- verify ---------------------------------------------------------------

std::vector<std::uint32_t> parse_shape(const std::string& shape) {
    std::vector<std::uint32_t> cards;
    for (const auto& part : split(shape, 'x')) {
        const auto c = parse_value(part);
        if (c == 0) throw UsageError("cardinalities in --random must be positive");
        cards.push_back(c);
    }
    if (cards.empty()) throw UsageError("--random takes a shape like 3x2x2");
    return cards;
}

struct Subject {
    Model model;
    bool random = false;
};

Subject verify_subject(const Options& opt) {
    if (!opt.model_path.empty() && !opt.random_shape.empty()) throw UsageError("give --model or --random, not both");
    if (!opt.random_shape.empty()) return {model_on(fsm::make_space_from_cardinalities(parse_shape(opt.random_shape))), true};
    return {load(opt), false};
}

std::vector<fsm::Triple> model_triples(const Model& m) {
    const auto names = m.variable_names();
    if (names.size() < 2) throw UsageError("the model needs at least two variables");
    std::vector<fsm::Triple> out;
    for (const auto& x : names) {
        for (const auto& y : names) {
            if (x == y) continue;
            out.push_back({m.variables.at(x), m.variables.at(y), std::nullopt});
            for (const auto& z : names) out.push_back({m.variables.at(x), m.variables.at(y), m.variables.at(z)});
        }
    }
    return out;
}

Model counterexample_model(const fsm::SpacePtr& space, const std::vector<std::pair<std::string, fsm::Variable>>& vars,
                           const fsm::FactorizingDistribution* P = nullptr) {
    auto m = model_on(space);
    for (const auto& [name, X] : vars) m.add_variable(name, X);
    if (P != nullptr) m.add_distribution("P", *P);
    return m;
}

std::vector<std::pair<std::string, fsm::Variable>> triple_vars(const fsm::Triple& t) {
    std::vector<std::pair<std::string, fsm::Variable>> vars{{"X", t.x}, {"Y", t.y}};
    if (t.z) vars.emplace_back("Z", *t.z);
    return vars;
}

class Report {
public:
    Report(std::string suite, bool json, std::ostream& out) : suite_(std::move(suite)), json_(json), out_(out) {
        j_["suite"] = suite_;
    }

    void count(const std::string& key, std::size_t value) { j_[key] = value; }
    void line(const std::string& text) {
        if (!json_) out_ << text << '\n';
    }
    void counterexample(const std::string& title, const Model& m, const std::string& rerun) {
        if (json_) {
            j_["counterexamples"].push_back(Json{{"title", title}, {"rerun", rerun}, {"model", Json::parse(emit_model(m))}});
        } else {
            out_ << "counterexample: " << title << "\n# re-run: " << rerun << '\n' << emit_model(m);
        }
    }
    int finish(bool clean) {
        j_["clean"] = clean;
        if (json_) {
            if (!j_.contains("counterexamples")) j_["counterexamples"] = Json::array();
            out_ << j_.dump() << '\n';
        } else {
            out_ << suite_ << ": " << (clean ? "clean" : "VIOLATIONS FOUND") << '\n';
        }
        return clean ? kClean : kViolation;
    }

private:
    std::string suite_;
    bool json_;
    std::ostream& out_;
    Json j_;
};

std::string rerun_indep(const fsm::Triple& t) {
    return std::string("fsk indep --model FILE X Y") + (t.z ? " --given Z" : "");
}

int verify_soundness(const Options& opt, std::ostream& out) {
    auto subject = verify_subject(opt);
    fsm::Rng rng(opt.seed);
    const auto triples =
        subject.random ? fsm::random_triples(subject.model.space, 20, rng) : model_triples(subject.model);
    std::vector<fsm::FactorizingDistribution> extra;
    for (const auto& [name, P] : subject.model.factorizing) extra.push_back(P);
    const auto r = fsm::soundness_suite(triples, opt.trials, rng, 64, extra);
    Report report("soundness", opt.json, out);
    report.count("triples", r.triples);
    report.count("structurally_independent", r.structurally_independent);
    report.count("distributions_checked", r.distributions_checked);
    report.count("violations", r.violations.size());
    report.line(std::to_string(r.triples) + " triples, " + std::to_string(r.structurally_independent) +
                " structurally independent, " + std::to_string(r.distributions_checked) +
                " distributions checked, " + std::to_string(r.violations.size()) + " violations");
    for (const auto& v : r.violations) {
        report.counterexample("structurally independent but dependent under P",
                              counterexample_model(subject.model.space, triple_vars(v.triple), &v.distribution),
                              rerun_indep(v.triple));
    }
    return report.finish(r.violations.empty());
}

int verify_completeness(const Options& opt, std::ostream& out) {
    auto subject = verify_subject(opt);
    fsm::Rng rng(opt.seed);
    const auto triples =
        subject.random ? fsm::random_triples(subject.model.space, 20, rng) : model_triples(subject.model);
    const auto r = fsm::completeness_suite(triples, opt.trials, rng);
    Report report("completeness", opt.json, out);
    report.count("triples", r.triples);
    report.count("structurally_dependent", r.structurally_dependent);
    report.count("witnessed", r.witnessed);
    report.count("failures", r.failures.size());
    report.line(std::to_string(r.triples) + " triples, " + std::to_string(r.structurally_dependent) +
                " structurally dependent, " + std::to_string(r.witnessed) + " witnessed within " +
                std::to_string(opt.trials) + " trials, " + std::to_string(r.failures.size()) + " without witness");
    for (const auto& t : r.failures) {
        report.counterexample("structurally dependent, no witness found",
                              counterexample_model(subject.model.space, triple_vars(t)),
                              rerun_indep(t) + " --witness --trials " + std::to_string(opt.trials));
    }
    return report.finish(r.failures.empty());
}

int verify_axioms(const Options& opt, std::ostream& out) {
    auto subject = verify_subject(opt);
    fsm::Rng rng(opt.seed);
    std::vector<fsm::AxiomInstance> instances;
    if (subject.random) {
        instances = fsm::random_axiom_instances(subject.model.space, opt.trials, rng);
    } else {
        const auto names = subject.model.variable_names();
        if (names.empty()) throw UsageError("the model has no variables");
        const auto& vars = subject.model.variables;
        for (const auto& x : names) {
            for (const auto& y : names) {
                for (const auto& z : names) {
                    instances.push_back({vars.at(x), vars.at(y), vars.at(z), std::nullopt});
                    for (const auto& w : names) instances.push_back({vars.at(x), vars.at(y), vars.at(z), vars.at(w)});
                }
            }
        }
    }
    const auto r = fsm::axiom_suite(instances, 1);
    Report report("axioms", opt.json, out);
    for (auto a : fsm::kAllAxioms) {
        const auto& c = r[a];
        const std::string name(fsm::axiom_name(a));
        report.count(name + "_instances", c.instances);
        report.count(name + "_applicable", c.applicable);
        report.count(name + "_failures", c.failures);
        std::string text = name + ": " + std::to_string(c.instances) + " instances, " + std::to_string(c.applicable) +
                           " with premise, " + std::to_string(c.failures) + " failures";
        if (a == fsm::Axiom::intersection) text += " (does not hold in general)";
        report.line(text);
        for (const auto& inst : c.counterexamples) {
            std::vector<std::pair<std::string, fsm::Variable>> v{{"X", inst.x}, {"Y", inst.y}, {"Z", inst.z}};
            if (inst.w) v.emplace_back("W", *inst.w);
            report.counterexample(name + " fails", counterexample_model(subject.model.space, v),
                                  "fsk verify axioms --model FILE");
        }
    }
    return report.finish(r.clean());
}

int verify_dag(const Options& opt, std::ostream& out, bool tau_suite) {
    if (!opt.model_path.empty() && !opt.random_shape.empty()) throw UsageError("give --model or --random, not both");
    fsm::Rng rng(opt.seed);
    std::optional<fsm::Dag> G;
    DagDef def;
    if (!opt.random_shape.empty()) {
        G = fsm::random_dag(parse_shape(opt.random_shape), rng);
        for (const auto& v : G->nodes()) def.nodes.push_back(v);
        for (auto [a, b] : G->edges()) def.edges.emplace_back(G->node(a).name, G->node(b).name);
    } else {
        const auto m = load(opt);
        G = require_dag(m);
        def = *m.dag_def;
        def.cpt.reset();
    }
    fsm::EquivalenceOptions options;
    options.seed = opt.seed;
    options.tau_samples = tau_suite ? opt.trials : 0;
    const auto r = fsm::equivalence_suite(*G, options);
    Report report(tau_suite ? "tau" : "dsep", opt.json, out);
    Model dag_model;
    dag_model.dag_def = def;
    const auto rerun = std::string("fsk verify ") + (tau_suite ? "tau" : "dsep") + " --model FILE";
    bool clean = true;
    if (tau_suite) {
        report.count("round_trips", r.tau_round_trips);
        report.count("failures", r.tau_failures);
        report.count("factorization_checks", r.factorization_checks);
        report.count("factorization_mismatches", r.factorization_mismatches);
        report.line(std::to_string(r.tau_round_trips) + " round trips, " + std::to_string(r.tau_failures) +
                    " failures; " + std::to_string(r.factorization_checks) + " factorization checks, " +
                    std::to_string(r.factorization_mismatches) + " mismatches");
        clean = r.tau_failures == 0 && r.factorization_mismatches == 0;
    } else {
        report.count("triples", r.triples_checked);
        report.count("dsep_mismatches", r.dsep_mismatches.size());
        report.count("pairs", r.pairs_checked);
        report.count("ancestor_mismatches", r.ancestor_mismatches.size());
        report.count("history_formula_mismatches", r.history_formula_mismatches.size());
        report.line(std::to_string(r.triples_checked) + " node-set triples, " +
                    std::to_string(r.dsep_mismatches.size()) + " d-separation mismatches; " +
                    std::to_string(r.pairs_checked) + " ordered pairs, " +
                    std::to_string(r.ancestor_mismatches.size()) + " ancestor mismatches; " +
                    std::to_string(r.history_formula_mismatches.size()) + " node history mismatches");
        clean = r.dsep_mismatches.empty() && r.ancestor_mismatches.empty() && r.history_formula_mismatches.empty() &&
                r.spot_check_mismatches == 0;
    }
    if (!clean) report.counterexample("equivalence failure on this DAG", dag_model, rerun);
    return report.finish(clean);
}

int cmd_verify(const Options& opt, std::ostream& out) {
    if (opt.positional.size() != 1) {
        throw UsageError("usage: fsk verify soundness|completeness|axioms|dsep|tau (--model PATH | --random SHAPE)");
    }
    const auto& suite = opt.positional[0];
    if (opt.model_path.empty() && opt.random_shape.empty()) throw UsageError("give --model PATH or --random SHAPE");
    if (suite == "soundness") return verify_soundness(opt, out);
    if (suite == "completeness") return verify_completeness(opt, out);
    if (suite == "axioms") return verify_axioms(opt, out);
    if (suite == "dsep") return verify_dag(opt, out, false);
    if (suite == "tau") return verify_dag(opt, out, true);
    throw UsageError("unknown suite '" + suite + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Histories, structural independence and Bayesian-network conversion on factored spaces", "fsk"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--model", opt.model_path, "model file (JSON)");
        cmd->add_flag("--json", opt.json, "machine-readable output");
    };
    auto* history = app.add_subcommand("history", "history of a variable, optionally given an event");
    add_common(history);
    history->add_option("--given", opt.given, "NAME=VALUE or an event name; repeatable");
    history->add_option("variable", opt.positional, "variable (comma list = joint)")->expected(1);

    auto* indep = app.add_subcommand("indep", "structural independence of two variables");
    add_common(indep);
    indep->add_option("--given", opt.given, "conditioning variable; repeatable");
    indep->add_flag("--witness", opt.witness, "search a factorizing distribution showing dependence");
    indep->add_option("--seed", opt.seed, "random seed");
    indep->add_option("--trials", opt.trials, "witness search budget");
    indep->add_option("variables", opt.positional, "X Y")->expected(2);

    auto* before = app.add_subcommand("before", "structural time: h(X) within h(Y)");
    add_common(before);
    before->add_flag("--strict", opt.strict, "require a strict inclusion");
    before->add_option("variables", opt.positional, "X Y")->expected(2);

    auto* dsep = app.add_subcommand("dsep", "d-separation in the model's DAG");
    add_common(dsep);
    dsep->add_option("--given", opt.given, "conditioning nodes (comma list); repeatable");
    dsep->add_option("nodes", opt.positional, "V1 V2 as comma lists")->expected(2);

    auto* from_dag = app.add_subcommand("from-dag", "emit the factored space model of the DAG");
    add_common(from_dag);

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    add_common(verify);
    verify->add_option("--random", opt.random_shape, "random space or DAG shape, e.g. 3x2x2");
    verify->add_option("--seed", opt.seed, "random seed");
    verify->add_option("--trials", opt.trials, "samples, witness budget or instances");
    verify->add_option("suite", opt.positional, "soundness|completeness|axioms|dsep|tau")->expected(1);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kClean : kUsage;
    }

    try {
        if (history->parsed()) return cmd_history(opt, out);
        if (indep->parsed()) return cmd_indep(opt, out);
        if (before->parsed()) return cmd_before(opt, out);
        if (dsep->parsed()) return cmd_dsep(opt, out);
        if (from_dag->parsed()) return cmd_from_dag(opt, out);
        return cmd_verify(opt, out);
    } catch (const fsm::CapacityError& e) {
        err << "fsk: capacity: " << e.what() << '\n';
        return kCapacity;
    } catch (const UsageError& e) {
        err << "fsk: " << e.what() << '\n';
        return kUsage;
    } catch (const fsm::Error& e) {
        err << "fsk: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace fsk
