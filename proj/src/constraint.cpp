#include "cabq/constraint.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"

namespace cabq {

bool is_variable(const Term& t) { return std::holds_alternative<Variable>(t); }

const Variable* as_variable(const Term& t) { return std::get_if<Variable>(&t); }

bool Constraint::is_monotone() const {
    return is<TriplePattern>() || is<ValueConstraint>() || is<BoundedPath>();
}

bool Constraint::is_structural() const {
    return is<OptionalGroup>() || is<UnionBranchTag>();
}

bool Constraint::is_deferred_kind() const {
    return is<Negation>() || is<CardinalityLimit>() || is<AggregateSpec>() || is<OrderLimitSpec>();
}

std::vector<Variable> Constraint::variables() const {
    std::vector<Variable> out;
    auto push_term = [&out](const Term& t) {
        if (const auto* v = as_variable(t)) out.push_back(*v);
    };
    if (const auto* p = get_if<TriplePattern>()) {
        push_term(p->subject);
        if (const auto* pv = std::get_if<Variable>(&p->predicate)) out.push_back(*pv);
        push_term(p->object);
    } else if (const auto* v = get_if<ValueConstraint>()) {
        out.push_back(v->anchor);
    } else if (const auto* b = get_if<BoundedPath>()) {
        push_term(b->subject);
        push_term(b->object);
    }
    return out;
}

std::string Constraint::kind_name() const {
    if (is<TriplePattern>()) return "triple";
    if (is<ValueConstraint>()) return "value";
    if (is<BoundedPath>()) return "path";
    if (is<OptionalGroup>()) return "optional";
    if (is<UnionBranchTag>()) return "union-tag";
    if (is<Negation>()) return "negation";
    if (is<CardinalityLimit>()) return "cardinality";
    if (is<AggregateSpec>()) return "aggregate";
    return "order-limit";
}

bool operator==(const TriplePattern& a, const TriplePattern& b) {
    return a.subject == b.subject && a.predicate == b.predicate && a.object == b.object &&
           a.subject_type == b.subject_type && a.object_type == b.object_type;
}
bool operator==(const ValueConstraint& a, const ValueConstraint& b) {
    return a.anchor == b.anchor && a.property == b.property && a.op == b.op && a.value == b.value;
}
bool operator==(const BoundedPath& a, const BoundedPath& b) {
    return a.subject == b.subject && a.predicate == b.predicate && a.object == b.object &&
           a.max_length == b.max_length;
}
bool operator==(const OptionalGroup& a, const OptionalGroup& b) { return a.members == b.members; }
bool operator==(const UnionBranchTag& a, const UnionBranchTag& b) { return a.branch == b.branch; }
bool operator==(const Negation& a, const Negation& b) { return a.inner == b.inner; }
bool operator==(const CardinalityLimit& a, const CardinalityLimit& b) {
    return a.mode == b.mode && a.k == b.k;
}
bool operator==(const AggregateSpec& a, const AggregateSpec& b) { return a.function == b.function; }
bool operator==(const OrderLimitSpec& a, const OrderLimitSpec& b) {
    return a.variable == b.variable && a.property == b.property && a.descending == b.descending &&
           a.limit == b.limit;
}

bool operator==(const Constraint& a, const Constraint& b) { return a.body == b.body; }

nlohmann::json term_to_json(const Term& t) {
    if (const auto* v = std::get_if<Variable>(&t)) return {{"var", v->name}};
    if (const auto* e = std::get_if<EntityRef>(&t)) return {{"entity", e->id}};
    return {{"literal", std::get<Literal>(t).to_json()}};
}

Term term_from_json(const nlohmann::json& j) {
    if (j.contains("var")) return Variable{j.at("var").get<std::string>()};
    if (j.contains("entity")) return EntityRef{j.at("entity").get<std::string>()};
    if (j.contains("literal")) return Literal::from_json(j.at("literal"));
    throw Error("unparseable term json: " + j.dump());
}

nlohmann::json constraint_to_json(const Constraint& c) {
    nlohmann::json j;
    j["kind"] = c.kind_name();
    if (const auto* p = c.get_if<TriplePattern>()) {
        j["subject"] = term_to_json(p->subject);
        if (const auto* pv = std::get_if<Variable>(&p->predicate)) j["predicate"] = {{"var", pv->name}};
        else j["predicate"] = std::get<std::string>(p->predicate);
        j["object"] = term_to_json(p->object);
        if (p->subject_type) j["subject_type"] = *p->subject_type;
        if (p->object_type) j["object_type"] = *p->object_type;
    } else if (const auto* v = c.get_if<ValueConstraint>()) {
        j["anchor"] = v->anchor.name;
        j["property"] = v->property;
        j["op"] = to_symbol(v->op);
        j["value"] = v->value.to_json();
    } else if (const auto* b = c.get_if<BoundedPath>()) {
        j["subject"] = term_to_json(b->subject);
        j["predicate"] = b->predicate;
        j["object"] = term_to_json(b->object);
        j["max_length"] = b->max_length;
    } else if (const auto* o = c.get_if<OptionalGroup>()) {
        nlohmann::json members = nlohmann::json::array();
        for (const auto& m : o->members) members.push_back(constraint_to_json(m));
        j["members"] = std::move(members);
    } else if (const auto* u = c.get_if<UnionBranchTag>()) {
        j["branch"] = u->branch;
    } else if (const auto* n = c.get_if<Negation>()) {
        j["inner"] = constraint_to_json(n->inner.at(0));
    } else if (const auto* card = c.get_if<CardinalityLimit>()) {
        j["mode"] = card->mode == CardinalityLimit::Mode::AtMost ? "at-most" : "exactly";
        j["k"] = card->k;
    } else if (const auto* agg = c.get_if<AggregateSpec>()) {
        j["function"] = agg->function;
    } else if (const auto* ol = c.get_if<OrderLimitSpec>()) {
        j["variable"] = ol->variable.name;
        j["property"] = ol->property;
        j["descending"] = ol->descending;
        j["limit"] = ol->limit;
    }
    return j;
}

Constraint constraint_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "triple") {
        TriplePattern p;
        p.subject = term_from_json(j.at("subject"));
        const auto& pred = j.at("predicate");
        if (pred.is_object()) p.predicate = Variable{pred.at("var").get<std::string>()};
        else p.predicate = pred.get<std::string>();
        p.object = term_from_json(j.at("object"));
        if (j.contains("subject_type")) p.subject_type = j.at("subject_type").get<std::string>();
        if (j.contains("object_type")) p.object_type = j.at("object_type").get<std::string>();
        return Constraint{std::move(p)};
    }
    if (kind == "value") {
        ValueConstraint v;
        v.anchor = Variable{j.at("anchor").get<std::string>()};
        v.property = j.at("property").get<std::string>();
        const auto op = compare_op_from(j.at("op").get<std::string>());
        if (!op) throw Error("bad comparison op in " + j.dump());
        v.op = *op;
        v.value = Literal::from_json(j.at("value"));
        return Constraint{std::move(v)};
    }
    if (kind == "path") {
        BoundedPath b;
        b.subject = term_from_json(j.at("subject"));
        b.predicate = j.at("predicate").get<std::string>();
        b.object = term_from_json(j.at("object"));
        b.max_length = j.at("max_length").get<int>();
        return Constraint{std::move(b)};
    }
    if (kind == "optional") {
        OptionalGroup o;
        for (const auto& m : j.at("members")) o.members.push_back(constraint_from_json(m));
        return Constraint{std::move(o)};
    }
    if (kind == "union-tag") {
        return Constraint{UnionBranchTag{j.at("branch").get<int>()}};
    }
    if (kind == "negation") {
        Negation n;
        n.inner.push_back(constraint_from_json(j.at("inner")));
        return Constraint{std::move(n)};
    }
    if (kind == "cardinality") {
        CardinalityLimit c;
        c.mode = j.at("mode").get<std::string>() == "exactly" ? CardinalityLimit::Mode::Exactly
                                                              : CardinalityLimit::Mode::AtMost;
        c.k = j.at("k").get<int>();
        return Constraint{c};
    }
    if (kind == "aggregate") {
        return Constraint{AggregateSpec{j.at("function").get<std::string>()}};
    }
    if (kind == "order-limit") {
        OrderLimitSpec ol;
        ol.variable = Variable{j.at("variable").get<std::string>()};
        ol.property = j.at("property").get<std::string>();
        ol.descending = j.value("descending", false);
        ol.limit = j.at("limit").get<int>();
        return Constraint{std::move(ol)};
    }
    throw Error("unknown constraint kind '" + kind + "'");
}

std::string constraint_text(const Constraint& c) {
    return constraint_to_json(c).dump();
}

Constraint make_pattern(Term s, std::variant<std::string, Variable> p, Term o,
                        std::optional<std::string> stype, std::optional<std::string> otype) {
    TriplePattern pat;
    pat.subject = std::move(s);
    pat.predicate = std::move(p);
    pat.object = std::move(o);
    pat.subject_type = std::move(stype);
    pat.object_type = std::move(otype);
    return Constraint{std::move(pat)};
}

Constraint make_value(std::string anchor, std::string property, CompareOp op, Literal value) {
    ValueConstraint v;
    v.anchor = Variable{std::move(anchor)};
    v.property = std::move(property);
    v.op = op;
    v.value = std::move(value);
    return Constraint{std::move(v)};
}

Constraint make_path(Term s, std::string p, Term o, int max_length) {
    BoundedPath b;
    b.subject = std::move(s);
    b.predicate = std::move(p);
    b.object = std::move(o);
    b.max_length = max_length;
    return Constraint{std::move(b)};
}

} // namespace cabq
