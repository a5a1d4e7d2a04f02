#include "cabq/renderer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"

namespace cabq {

namespace {

const std::map<std::string, std::string> kCypherDefaults = {
    {"triple", "{subject}-[{predicate}]->{object}"},
    {"path", "{subject}-[{predicate}*1..{max}]->{object}"},
    {"value", "{anchor}.{property} {op} {value}"},
};

const std::map<std::string, std::string> kSparqlDefaults = {
    {"triple", "{subject} {predicate} {object} ."},
    {"path", "{subject} {path} {object} ."},
    {"value", "{anchor} {predicate} {var} .\n  FILTER ({var} {op} {value})"},
};

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string cypher_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out;
}

std::string dquote_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string cypher_literal(const Literal& lit) {
    switch (lit.kind()) {
        case LiteralKind::String: return "'" + cypher_escape(lit.as_string()) + "'";
        case LiteralKind::Int: return std::to_string(lit.as_int());
        case LiteralKind::Decimal: return format_decimal(lit.as_decimal());
        case LiteralKind::Bool: return lit.as_bool() ? "true" : "false";
    }
    return {};
}

std::string sparql_literal(const Literal& lit) {
    switch (lit.kind()) {
        case LiteralKind::String: return "\"" + dquote_escape(lit.as_string()) + "\"";
        case LiteralKind::Int: return std::to_string(lit.as_int());
        case LiteralKind::Decimal: return format_decimal(lit.as_decimal());
        case LiteralKind::Bool: return lit.as_bool() ? "true" : "false";
    }
    return {};
}

const char* cypher_op(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "<>";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "=";
}

const char* sparql_op(CompareOp op) {
    return op == CompareOp::Ne ? "!=" : cypher_op(op);
}

struct Fragmenter {
    const RenderDialect& dialect;

    bool url() const { return dialect.id_style == RenderDialect::IdStyle::UrlBacktick; }

    std::string name(const std::string& n) const { return url() ? "`" + n + "`" : n; }

    std::string cypher_node(const std::optional<std::string>& var,
                            const std::optional<std::string>& label,
                            const std::optional<std::string>& const_id) const {
        std::string out = "(";
        if (var) out += *var;
        if (label) out += ":" + name(*label);
        if (const_id) {
            if (var || label) out += " ";
            out += url() ? "{`~id`: \"" + dquote_escape(*const_id) + "\"}"
                         : "{id: '" + cypher_escape(*const_id) + "'}";
        }
        out += ")";
        return out;
    }

    std::string cypher_term(const Term& t, const std::optional<std::string>& type) const {
        if (const auto* v = std::get_if<Variable>(&t)) return cypher_node(v->name, type, std::nullopt);
        if (const auto* e = std::get_if<EntityRef>(&t)) return cypher_node(std::nullopt, type, e->id);
        throw Error("literal term cannot appear as a node element");
    }

    std::string sparql_term(const Term& t) const {
        if (const auto* v = std::get_if<Variable>(&t)) return "?" + v->name;
        if (const auto* e = std::get_if<EntityRef>(&t)) return url() ? "<" + e->id + ">" : ":" + e->id;
        return sparql_literal(std::get<Literal>(t));
    }

    std::string sparql_iri(const std::string& n) const { return url() ? "<" + n + ">" : ":" + n; }
};

std::string mapping_for(const RenderDialect& dialect, const std::string& kind, ConstraintId id) {
    auto it = dialect.mappings.find(kind);
    if (it == dialect.mappings.end()) throw UnmappedConstraint(id);
    return it->second;
}

struct BranchPieces {
    std::vector<std::string> match_elements;
    std::vector<std::string> where_conditions;
    std::vector<std::string> sparql_statements;
};

void render_cypher_branch(const QueryPlan& plan, const std::vector<ConstraintId>& branch,
                          const RenderDialect& dialect, const Fragmenter& frag, BranchPieces& out) {
    std::set<std::string> pattern_vars;
    struct Cond { ConstraintId id; std::string text; };
    std::vector<Cond> conds;

    for (ConstraintId id : branch) {
        const ScoredConstraint& sc = plan.table.get(id);
        if (const auto* p = sc.constraint.get_if<TriplePattern>()) {
            if (std::holds_alternative<Literal>(p->object)) {
                // Literal-object patterns canonicalize to property conditions.
                const auto* sv = as_variable(p->subject);
                if (!sv) throw UnmappedConstraint(id);
                const auto* pred = std::get_if<std::string>(&p->predicate);
                if (!pred) throw UnmappedConstraint(id);
                conds.push_back({id, sv->name + "." + frag.name(*pred) + " = " +
                                         cypher_literal(std::get<Literal>(p->object))});
                pattern_vars.insert(sv->name);
                continue;
            }
            std::string predicate;
            if (const auto* pv = std::get_if<Variable>(&p->predicate)) {
                predicate = pv->name;
                pattern_vars.insert(pv->name);
            } else {
                predicate = ":" + frag.name(std::get<std::string>(p->predicate));
            }
            std::string text = mapping_for(dialect, "triple", id);
            text = replace_all(text, "{subject}", frag.cypher_term(p->subject, p->subject_type));
            text = replace_all(text, "{predicate}", predicate);
            text = replace_all(text, "{object}", frag.cypher_term(p->object, p->object_type));
            out.match_elements.push_back(std::move(text));
            if (const auto* v = as_variable(p->subject)) pattern_vars.insert(v->name);
            if (const auto* v = as_variable(p->object)) pattern_vars.insert(v->name);
        } else if (const auto* b = sc.constraint.get_if<BoundedPath>()) {
            std::string text = mapping_for(dialect, "path", id);
            text = replace_all(text, "{subject}", frag.cypher_term(b->subject, std::nullopt));
            text = replace_all(text, "{predicate}", ":" + frag.name(b->predicate));
            text = replace_all(text, "{max}", std::to_string(b->max_length));
            text = replace_all(text, "{object}", frag.cypher_term(b->object, std::nullopt));
            out.match_elements.push_back(std::move(text));
            if (const auto* v = as_variable(b->subject)) pattern_vars.insert(v->name);
            if (const auto* v = as_variable(b->object)) pattern_vars.insert(v->name);
        } else if (const auto* v = sc.constraint.get_if<ValueConstraint>()) {
            std::string text = mapping_for(dialect, "value", id);
            text = replace_all(text, "{anchor}", v->anchor.name);
            text = replace_all(text, "{property}", frag.name(v->property));
            text = replace_all(text, "{op}", cypher_op(v->op));
            text = replace_all(text, "{value}", cypher_literal(v->value));
            conds.push_back({id, std::move(text)});
        } else {
            throw UnmappedConstraint(id);
        }
    }

    // Free variables referenced by conditions (and the answer variable) need
    // their own node elements, with the answer type when declared.
    std::set<std::string> free_vars;
    for (ConstraintId id : branch) {
        const ScoredConstraint& sc = plan.table.get(id);
        if (const auto* v = sc.constraint.get_if<ValueConstraint>()) {
            if (!pattern_vars.count(v->anchor.name)) free_vars.insert(v->anchor.name);
        }
    }
    if (!pattern_vars.count(plan.answer_var)) free_vars.insert(plan.answer_var);

    std::vector<std::string> nodes;
    if (free_vars.count(plan.answer_var)) {
        nodes.push_back(frag.cypher_node(plan.answer_var, plan.answer_type, std::nullopt));
        free_vars.erase(plan.answer_var);
    }
    for (const auto& v : free_vars) nodes.push_back(frag.cypher_node(v, std::nullopt, std::nullopt));
    out.match_elements.insert(out.match_elements.begin(), nodes.begin(), nodes.end());

    std::sort(conds.begin(), conds.end(), [](const Cond& a, const Cond& b) { return a.id < b.id; });
    for (auto& c : conds) out.where_conditions.push_back(std::move(c.text));
}

void render_sparql_branch(const QueryPlan& plan, const std::vector<ConstraintId>& branch,
                          const RenderDialect& dialect, const Fragmenter& frag, int& fresh,
                          BranchPieces& out) {
    // Type statements first, for each typed slot (and the free answer var).
    std::set<std::pair<std::string, std::string>> typed;
    std::set<std::string> pattern_vars;
    for (ConstraintId id : branch) {
        const ScoredConstraint& sc = plan.table.get(id);
        if (const auto* p = sc.constraint.get_if<TriplePattern>()) {
            if (const auto* v = as_variable(p->subject)) {
                pattern_vars.insert(v->name);
                if (p->subject_type) typed.insert({v->name, *p->subject_type});
            }
            if (const auto* v = as_variable(p->object)) {
                pattern_vars.insert(v->name);
                if (p->object_type) typed.insert({v->name, *p->object_type});
            }
        }
    }
    if (!pattern_vars.count(plan.answer_var) && plan.answer_type) {
        typed.insert({plan.answer_var, *plan.answer_type});
    }
    for (const auto& [var, type] : typed) {
        out.sparql_statements.push_back("?" + var + " a " + frag.sparql_iri(type) + " .");
    }

    for (ConstraintId id : branch) {
        const ScoredConstraint& sc = plan.table.get(id);
        if (const auto* p = sc.constraint.get_if<TriplePattern>()) {
            std::string predicate;
            if (const auto* pv = std::get_if<Variable>(&p->predicate)) predicate = "?" + pv->name;
            else predicate = frag.sparql_iri(std::get<std::string>(p->predicate));
            std::string text = mapping_for(dialect, "triple", id);
            text = replace_all(text, "{subject}", frag.sparql_term(p->subject));
            text = replace_all(text, "{predicate}", predicate);
            text = replace_all(text, "{object}", frag.sparql_term(p->object));
            out.sparql_statements.push_back(std::move(text));
        } else if (const auto* b = sc.constraint.get_if<BoundedPath>()) {
            std::string alternation;
            std::string chain;
            for (int len = 1; len <= b->max_length; ++len) {
                if (!chain.empty()) chain += "/";
                chain += frag.sparql_iri(b->predicate);
                if (!alternation.empty()) alternation += "|";
                alternation += chain;
            }
            std::string text = mapping_for(dialect, "path", id);
            text = replace_all(text, "{subject}", frag.sparql_term(b->subject));
            text = replace_all(text, "{path}", alternation);
            text = replace_all(text, "{object}", frag.sparql_term(b->object));
            out.sparql_statements.push_back(std::move(text));
        } else if (const auto* v = sc.constraint.get_if<ValueConstraint>()) {
            const std::string fresh_var = "?v" + std::to_string(fresh++);
            std::string text = mapping_for(dialect, "value", id);
            text = replace_all(text, "{anchor}", "?" + v->anchor.name);
            text = replace_all(text, "{predicate}", frag.sparql_iri(v->property));
            text = replace_all(text, "{var}", fresh_var);
            text = replace_all(text, "{op}", sparql_op(v->op));
            text = replace_all(text, "{value}", sparql_literal(v->value));
            out.sparql_statements.push_back(std::move(text));
        } else {
            throw UnmappedConstraint(id);
        }
    }
}

std::vector<std::string> deferred_comments(const QueryPlan& plan, const char* marker) {
    std::vector<std::string> out;
    for (const auto& d : plan.table.deferred()) {
        out.push_back(std::string(marker) + " deferred: " + constraint_text(d));
    }
    return out;
}

} // namespace

RenderDialect RenderDialect::cypher(IdStyle style) {
    RenderDialect d;
    d.target = Target::Cypher;
    d.id_style = style;
    d.mappings = kCypherDefaults;
    return d;
}

RenderDialect RenderDialect::sparql(IdStyle style) {
    RenderDialect d;
    d.target = Target::Sparql;
    d.id_style = style;
    d.mappings = kSparqlDefaults;
    return d;
}

RenderDialect RenderDialect::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mapping-set file '" + path + "'");
    nlohmann::json j;
    in >> j;
    const std::string target = j.value("target", std::string("cypher"));
    const std::string style = j.value("id_style", std::string("plain"));
    const IdStyle id_style = style == "url" ? IdStyle::UrlBacktick : IdStyle::Plain;
    RenderDialect d = target == "sparql" ? sparql(id_style) : cypher(id_style);
    if (j.value("strict", false)) d.mappings.clear();
    if (j.contains("mappings")) {
        for (auto it = j["mappings"].begin(); it != j["mappings"].end(); ++it) {
            d.mappings[it.key()] = it.value().get<std::string>();
        }
    }
    return d;
}

RenderedQuery render(const QueryPlan& plan, const RenderDialect& dialect) {
    Fragmenter frag{dialect};
    std::vector<std::vector<ConstraintId>> branches = plan.table.branches();
    if (branches.empty()) branches.emplace_back();

    std::ostringstream text;
    if (dialect.target == RenderDialect::Target::Cypher) {
        bool first_branch = true;
        for (const auto& branch : branches) {
            if (!first_branch) text << "\nUNION\n";
            first_branch = false;
            BranchPieces pieces;
            render_cypher_branch(plan, branch, dialect, frag, pieces);
            text << "MATCH ";
            for (std::size_t i = 0; i < pieces.match_elements.size(); ++i) {
                if (i) text << ", ";
                text << pieces.match_elements[i];
            }
            if (!pieces.where_conditions.empty()) {
                text << "\nWHERE ";
                for (std::size_t i = 0; i < pieces.where_conditions.size(); ++i) {
                    if (i) text << " AND ";
                    text << pieces.where_conditions[i];
                }
            }
            text << "\nRETURN " << plan.answer_var;
            if (plan.return_property) text << "." << frag.name(*plan.return_property);
        }
        for (const auto& line : deferred_comments(plan, "//")) text << "\n" << line;
    } else {
        int fresh = 0;
        text << "SELECT ?" << plan.answer_var << "\nWHERE {\n";
        const bool unions = branches.size() > 1;
        bool first_branch = true;
        for (const auto& branch : branches) {
            if (!first_branch) text << "  UNION\n";
            first_branch = false;
            BranchPieces pieces;
            render_sparql_branch(plan, branch, dialect, frag, fresh, pieces);
            if (unions) text << "  {\n";
            for (const auto& stmt : pieces.sparql_statements) {
                text << (unions ? "    " : "  ") << stmt << "\n";
            }
            if (unions) text << "  }\n";
        }
        text << "}";
        if (plan.return_property) text << "\n# project: " << *plan.return_property;
        for (const auto& line : deferred_comments(plan, "#")) text << "\n" << line;
    }

    RenderedQuery out;
    out.text = text.str();
    out.dialect = dialect;
    out.source_plan = plan;
    return out;
}

RenderedQuery fallback_render(const QueryPlan& plan, const RenderDialect& dialect,
                              const FallbackGenerator& hook, const Graph& g) {
    if (!hook) throw ConfigError("fallback rendering requested but no generator hook configured");
    const std::string text = hook(plan, dialect);

    if (dialect.target == RenderDialect::Target::Cypher) {
        QueryPlan parsed;
        try {
            parsed = parse_cypher_subset(text);
        } catch (const CypherSyntaxError& e) {
            throw FallbackRejected(std::string("candidate text does not parse: ") + e.what());
        }
        const auto expected = evaluate(g, plan).projected;
        const auto actual = evaluate(g, parsed).projected;
        if (expected != actual) {
            throw FallbackRejected("answer sets differ: expected " +
                                   std::to_string(expected.size()) + " values, got " +
                                   std::to_string(actual.size()));
        }
    } else {
        const std::string canonical = render(plan, dialect).text;
        if (strip_whitespace(text) != strip_whitespace(canonical)) {
            throw FallbackRejected("candidate text differs structurally from the plan rendering");
        }
    }

    RenderedQuery out;
    out.text = text;
    out.dialect = dialect;
    out.source_plan = plan;
    return out;
}

std::string strip_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    }
    return out;
}

} // namespace cabq
