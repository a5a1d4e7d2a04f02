#include "cabq/query_eval.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"

namespace cabq {

nlohmann::json QueryPlan::to_json() const {
    nlohmann::json j;
    j["ctable"] = table.to_json();
    j["answer_var"] = answer_var;
    if (answer_type) j["answer_type"] = *answer_type;
    j["return_vars"] = return_vars;
    if (return_property) j["return_property"] = *return_property;
    return j;
}

QueryPlan QueryPlan::from_json(const nlohmann::json& j) {
    QueryPlan plan;
    plan.table = CTable::from_json(j.at("ctable"));
    plan.answer_var = j.at("answer_var").get<std::string>();
    if (j.contains("answer_type")) plan.answer_type = j.at("answer_type").get<std::string>();
    if (j.contains("return_vars")) plan.return_vars = j.at("return_vars").get<std::vector<std::string>>();
    if (j.contains("return_property")) plan.return_property = j.at("return_property").get<std::string>();
    return plan;
}

namespace {

// Does entity `id` carry `prop` (as a node property or literal-object triple)
// with a value satisfying `op value`?  With strict=true an incomparable pair
// raises TypeMismatch; otherwise it counts as a non-match.
bool property_satisfies(const Graph& g, const std::string& id, const std::string& prop,
                        CompareOp op, const Literal& value, bool strict) {
    const Entity* e = g.find(id);
    if (!e) return false;
    auto check = [&](const Literal& lit) -> bool {
        if (strict) return lit.satisfies(op, value);
        return lit.try_satisfies(op, value).value_or(false);
    };
    auto it = e->properties.find(prop);
    if (it != e->properties.end() && check(it->second)) return true;
    for (std::size_t idx : g.triples_with_subject(id)) {
        const Triple& t = g.triples()[idx];
        if (t.predicate == prop && !t.object_is_entity() && check(t.object_literal())) return true;
    }
    return false;
}

bool entity_has_type(const Graph& g, const std::string& id, const std::string& type) {
    const Entity* e = g.find(id);
    return e && e->types.count(type) > 0;
}

std::optional<Value> resolve_term(const Term& t, const Binding& b) {
    if (const auto* v = std::get_if<Variable>(&t)) {
        auto it = b.find(v->name);
        if (it == b.end()) return std::nullopt;
        return it->second;
    }
    if (const auto* e = std::get_if<EntityRef>(&t)) return Value{e->id};
    return Value{std::get<Literal>(t)};
}

// Entities reachable from `start` by 1..max_len hops along `pred` edges.
std::set<std::string> reachable(const Graph& g, const std::string& start, const std::string& pred,
                                int max_len, bool reverse) {
    std::set<std::string> seen;
    std::deque<std::pair<std::string, int>> frontier{{start, 0}};
    std::set<std::string> expanded;
    while (!frontier.empty()) {
        auto [id, d] = frontier.front();
        frontier.pop_front();
        if (d >= max_len || expanded.count(id)) continue;
        expanded.insert(id);
        const auto& idxs = reverse ? g.triples_with_object_entity(id) : g.triples_with_subject(id);
        for (std::size_t idx : idxs) {
            const Triple& t = g.triples()[idx];
            if (t.predicate != pred) continue;
            if (!reverse && !t.object_is_entity()) continue;
            const std::string& next = reverse ? t.subject : t.object_entity();
            seen.insert(next);
            frontier.emplace_back(next, d + 1);
        }
    }
    return seen;
}

bool path_exists(const Graph& g, const std::string& from, const std::string& to,
                 const std::string& pred, int max_len) {
    return reachable(g, from, pred, max_len, false).count(to) > 0;
}

// Extends `binding` with every way `pattern` can match a triple of `g`.
void join_pattern(const Graph& g, const TriplePattern& pattern, const Binding& binding,
                  std::vector<Binding>& out) {
    // Narrow the candidate triples with the most selective available index.
    const std::vector<std::size_t>* candidates = nullptr;
    const auto subj = resolve_term(pattern.subject, binding);
    const auto obj = resolve_term(pattern.object, binding);
    if (subj && subj->index() == 0) {
        candidates = &g.triples_with_subject(std::get<std::string>(*subj));
    } else if (obj && obj->index() == 0) {
        candidates = &g.triples_with_object_entity(std::get<std::string>(*obj));
    } else if (const auto* pred = std::get_if<std::string>(&pattern.predicate)) {
        candidates = &g.triples_with_predicate(*pred);
    }

    auto try_triple = [&](const Triple& t) {
        Binding next = binding;

        // subject
        if (const auto* v = as_variable(pattern.subject)) {
            auto it = next.find(v->name);
            if (it != next.end()) {
                if (it->second != Value{t.subject}) return;
            } else {
                next[v->name] = Value{t.subject};
            }
        } else if (const auto* e = std::get_if<EntityRef>(&pattern.subject)) {
            if (e->id != t.subject) return;
        } else {
            return; // literal subjects never match
        }
        if (pattern.subject_type && !entity_has_type(g, t.subject, *pattern.subject_type)) return;

        // predicate
        if (const auto* pred = std::get_if<std::string>(&pattern.predicate)) {
            if (*pred != t.predicate) return;
        } else {
            const auto& pv = std::get<Variable>(pattern.predicate);
            const Value label{Literal::str(t.predicate)};
            auto it = next.find(pv.name);
            if (it != next.end()) {
                if (it->second != label) return;
            } else {
                next[pv.name] = label;
            }
        }

        // object
        const Value object_value = t.object_is_entity() ? Value{t.object_entity()} : Value{t.object_literal()};
        if (const auto* v = as_variable(pattern.object)) {
            auto it = next.find(v->name);
            if (it != next.end()) {
                if (it->second != object_value) return;
            } else {
                next[v->name] = object_value;
            }
        } else if (const auto* e = std::get_if<EntityRef>(&pattern.object)) {
            if (!t.object_is_entity() || e->id != t.object_entity()) return;
        } else {
            if (t.object_is_entity() || !(std::get<Literal>(pattern.object) == t.object_literal())) return;
        }
        if (pattern.object_type) {
            if (!t.object_is_entity() || !entity_has_type(g, t.object_entity(), *pattern.object_type)) return;
        }

        out.push_back(std::move(next));
    };

    if (candidates) {
        for (std::size_t idx : *candidates) try_triple(g.triples()[idx]);
    } else {
        for (const Triple& t : g.triples()) try_triple(t);
    }
}

void join_path(const Graph& g, const BoundedPath& path, const Binding& binding,
               std::vector<Binding>& out) {
    const auto subj = resolve_term(path.subject, binding);
    const auto obj = resolve_term(path.object, binding);
    if (subj && subj->index() != 0) return; // literal endpoints never match
    if (obj && obj->index() != 0) return;

    auto emit = [&](const std::string& s, const std::string& o) {
        Binding next = binding;
        if (const auto* v = as_variable(path.subject); v && !subj) next[v->name] = Value{s};
        if (const auto* v = as_variable(path.object); v && !obj) next[v->name] = Value{o};
        out.push_back(std::move(next));
    };

    if (subj) {
        const std::string s = std::get<std::string>(*subj);
        if (obj) {
            if (path_exists(g, s, std::get<std::string>(*obj), path.predicate, path.max_length)) {
                emit(s, std::get<std::string>(*obj));
            }
        } else {
            for (const auto& o : reachable(g, s, path.predicate, path.max_length, false)) emit(s, o);
        }
        return;
    }
    if (obj) {
        const std::string o = std::get<std::string>(*obj);
        for (const auto& s : reachable(g, o, path.predicate, path.max_length, true)) emit(s, o);
        return;
    }
    for (const auto& [s, e] : g.entities()) {
        (void)e;
        for (const auto& o : reachable(g, s, path.predicate, path.max_length, false)) emit(s, o);
    }
}

// Conjunctive evaluation of one branch.  strict controls whether incomparable
// literal comparisons raise TypeMismatch (query evaluation) or count as
// non-matches (consistency re-checks).
std::set<Binding> eval_branch(const Graph& g, const std::vector<const Constraint*>& atoms,
                              const QueryPlan& plan, bool strict = true) {
    std::vector<Binding> partial{Binding{}};

    for (const Constraint* c : atoms) {
        if (!c->is_monotone()) continue;
        if (c->is<ValueConstraint>()) continue; // filters run after all joins
        std::vector<Binding> next;
        for (const Binding& b : partial) {
            if (const auto* p = c->get_if<TriplePattern>()) join_pattern(g, *p, b, next);
            else join_path(g, *c->get_if<BoundedPath>(), b, next);
        }
        partial = std::move(next);
        if (partial.empty()) return {};
    }

    for (const Constraint* c : atoms) {
        const auto* v = c->get_if<ValueConstraint>();
        if (!v) continue;
        std::vector<Binding> next;
        for (const Binding& b : partial) {
            auto it = b.find(v->anchor.name);
            if (it != b.end()) {
                if (it->second.index() != 0) continue; // literal-bound anchor has no properties
                if (property_satisfies(g, std::get<std::string>(it->second), v->property, v->op,
                                       v->value, strict)) {
                    next.push_back(b);
                }
            } else {
                // Free anchor: ranges over all entities carrying a satisfying value.
                for (const auto& [id, e] : g.entities()) {
                    (void)e;
                    if (property_satisfies(g, id, v->property, v->op, v->value, strict)) {
                        Binding nb = b;
                        nb[v->anchor.name] = Value{id};
                        next.push_back(std::move(nb));
                    }
                }
            }
        }
        partial = std::move(next);
        if (partial.empty()) return {};
    }

    // A free answer variable ranges over all entities of the declared type
    // (all entities when untyped).  This is also the whole semantics of an
    // empty branch.
    const bool answer_bound = !partial.empty() && partial.front().count(plan.answer_var) > 0;
    if (!answer_bound) {
        std::vector<Binding> next;
        for (const Binding& b : partial) {
            for (const auto& [id, e] : g.entities()) {
                if (plan.answer_type && e.types.count(*plan.answer_type) == 0) continue;
                Binding nb = b;
                nb[plan.answer_var] = Value{id};
                next.push_back(std::move(nb));
            }
        }
        partial = std::move(next);
    }

    for (const auto& rv : plan.effective_return_vars()) {
        if (!partial.empty() && partial.front().count(rv) == 0) throw UnboundVariable(rv);
    }

    return {partial.begin(), partial.end()};
}

std::vector<std::vector<const Constraint*>> branch_atoms(const CTable& t) {
    std::vector<std::vector<const Constraint*>> out;
    if (t.branches().empty()) {
        out.emplace_back();
        return out;
    }
    for (const auto& branch : t.branches()) {
        std::vector<const Constraint*> atoms;
        for (ConstraintId id : branch) atoms.push_back(&t.get(id).constraint);
        out.push_back(std::move(atoms));
    }
    return out;
}

} // namespace

AnswerSet evaluate(const Graph& g, const QueryPlan& plan) {
    std::set<Binding> all;
    for (const auto& atoms : branch_atoms(plan.table)) {
        auto bindings = eval_branch(g, atoms, plan);
        all.insert(bindings.begin(), bindings.end());
    }
    AnswerSet result;
    result.bindings.assign(all.begin(), all.end());
    for (const auto& b : result.bindings) {
        auto it = b.find(plan.answer_var);
        if (it != b.end()) result.projected.insert(it->second);
    }
    return result;
}

long long count_matches(const Graph& g, const Constraint& c) {
    if (!c.is_monotone()) {
        throw Error("count_matches requires a monotone-core constraint, got " + c.kind_name());
    }
    if (const auto* v = c.get_if<ValueConstraint>()) {
        long long n = 0;
        for (const auto& [id, e] : g.entities()) {
            (void)e;
            if (property_satisfies(g, id, v->property, v->op, v->value, /*strict=*/false)) ++n;
        }
        return n;
    }

    // Distinct assignments of the constraint's own variables.
    QueryPlan probe;
    probe.answer_var = "#probe";
    std::vector<const Constraint*> atoms{&c};
    std::set<Binding> bindings = eval_branch(g, atoms, probe, /*strict=*/false);
    std::set<Binding> distinct;
    const auto vars = c.variables();
    for (const auto& b : bindings) {
        Binding projected;
        for (const auto& v : vars) {
            auto it = b.find(v.name);
            if (it != b.end()) projected[v.name] = it->second;
        }
        distinct.insert(std::move(projected));
    }
    return static_cast<long long>(distinct.size());
}

bool binding_satisfies(const Graph& g, const Binding& binding, const Constraint& c) {
    if (const auto* p = c.get_if<TriplePattern>()) {
        std::vector<Binding> out;
        join_pattern(g, *p, binding, out);
        return !out.empty();
    }
    if (const auto* v = c.get_if<ValueConstraint>()) {
        auto it = binding.find(v->anchor.name);
        if (it == binding.end() || it->second.index() != 0) return false;
        return property_satisfies(g, std::get<std::string>(it->second), v->property, v->op, v->value,
                                  /*strict=*/false);
    }
    if (const auto* b = c.get_if<BoundedPath>()) {
        std::vector<Binding> out;
        join_path(g, *b, binding, out);
        return !out.empty();
    }
    return true; // deferred kinds are not part of the monotone check
}

std::vector<std::string> consistency_violations(const Graph& g, const QueryPlan& plan) {
    std::vector<std::string> violations;
    const auto branches = branch_atoms(plan.table);
    for (std::size_t bi = 0; bi < branches.size(); ++bi) {
        const auto bindings = eval_branch(g, branches[bi], plan);
        for (const auto& binding : bindings) {
            for (const Constraint* c : branches[bi]) {
                if (!binding_satisfies(g, binding, *c)) {
                    std::string vars;
                    for (const auto& [k, v] : binding) vars += k + "=" + value_text(v) + " ";
                    violations.push_back("branch " + std::to_string(bi) + ": binding [" + vars +
                                         "] violates " + constraint_text(*c));
                }
            }
        }
    }
    return violations;
}

} // namespace cabq
