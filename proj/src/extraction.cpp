#include "cabq/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"

namespace cabq {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

} // namespace

MentionDictionary load_dictionary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dictionary file '" + path + "'");
    nlohmann::json j;
    in >> j;
    MentionDictionary dict;
    for (auto it = j.begin(); it != j.end(); ++it) {
        dict[lower(it.key())] = it.value().get<std::string>();
    }
    return dict;
}

LinkedEntities link_entities(const NLQuery& q, const Graph& g, const MentionDictionary& dict) {
    const std::string text = lower(q.text);
    LinkedEntities out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (!word_char(text[pos])) {
            ++pos;
            continue;
        }
        // Longest dictionary surface starting at this word boundary.
        std::size_t best_len = 0;
        const std::string* best_id = nullptr;
        for (const auto& [surface, id] : dict) {
            if (surface.empty() || surface.size() < best_len) continue;
            if (text.compare(pos, surface.size(), surface) != 0) continue;
            const std::size_t end = pos + surface.size();
            if (end < text.size() && word_char(text[end]) && word_char(surface.back())) continue;
            if (surface.size() > best_len) {
                best_len = surface.size();
                best_id = &id;
            }
        }
        if (best_id && g.has_entity(*best_id)) {
            out.mentions.push_back({pos, pos + best_len, *best_id});
            out.ids.insert(*best_id);
            pos += best_len;
        } else {
            while (pos < text.size() && word_char(text[pos])) ++pos;
        }
    }
    return out;
}

namespace {

// Tokens of the question with a light plural normalization, enough to let
// "cities" reach the label "City".
std::set<std::string> question_tokens(const std::string& text) {
    std::set<std::string> tokens;
    std::string word;
    auto flush = [&]() {
        if (word.empty()) return;
        tokens.insert(word);
        if (word.size() > 3 && word.compare(word.size() - 3, 3, "ies") == 0) {
            tokens.insert(word.substr(0, word.size() - 3) + "y");
        }
        if (word.size() > 2 && word.back() == 's') {
            tokens.insert(word.substr(0, word.size() - 1));
        }
        word.clear();
    };
    for (char c : lower(text)) {
        if (word_char(c)) word += c;
        else flush();
    }
    flush();
    return tokens;
}

bool mentions_label(const std::set<std::string>& tokens, const std::string& label) {
    return tokens.count(lower(label)) > 0;
}

} // namespace

ConstraintSuggester::Suggestion TokenOverlapSuggester::suggest(
    const NLQuery& q, const Graph&, const std::vector<Constraint>& candidates) const {
    const auto tokens = question_tokens(q.text);
    Suggestion s;
    for (const auto& c : candidates) {
        bool keep = false;
        if (const auto* p = c.get_if<TriplePattern>()) {
            if (const auto* pred = std::get_if<std::string>(&p->predicate)) {
                keep = keep || mentions_label(tokens, *pred);
            }
            if (p->subject_type) keep = keep || mentions_label(tokens, *p->subject_type);
            if (p->object_type) keep = keep || mentions_label(tokens, *p->object_type);
        } else if (const auto* v = c.get_if<ValueConstraint>()) {
            keep = mentions_label(tokens, v->property);
        }
        if (keep) s.selected.push_back(c);
    }
    return s;
}

ScriptedSuggester::ScriptedSuggester(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open suggester fixture '" + path + "'");
    nlohmann::json j;
    in >> j;
    for (auto it = j.begin(); it != j.end(); ++it) {
        Script script;
        if (it.value().contains("select")) script.select = it.value().at("select").get<std::vector<int>>();
        if (it.value().contains("inject")) {
            for (const auto& c : it.value().at("inject")) script.inject.push_back(constraint_from_json(c));
        }
        scripts_[it.key()] = std::move(script);
    }
}

ConstraintSuggester::Suggestion ScriptedSuggester::suggest(
    const NLQuery& q, const Graph&, const std::vector<Constraint>& candidates) const {
    Suggestion s;
    auto it = scripts_.find(q.id);
    if (it == scripts_.end()) {
        s.selected = candidates;
        return s;
    }
    for (int idx : it->second.select) {
        if (idx < 0 || idx >= static_cast<int>(candidates.size())) {
            throw ConfigError("suggester fixture for '" + q.id + "' selects candidate " +
                              std::to_string(idx) + " out of " + std::to_string(candidates.size()));
        }
        s.selected.push_back(candidates[idx]);
    }
    s.injected = it->second.inject;
    return s;
}

namespace {

// Canonical slot type of an entity: its lexicographically first label.
std::string slot_type(const Graph& g, const std::string& id) {
    const Entity* e = g.find(id);
    if (!e || e->types.empty()) return {};
    return *e->types.begin();
}

} // namespace

std::vector<Constraint> parameterize_triples(const Graph& subgraph, const LinkedEntities& linked) {
    struct TemplateKey {
        std::string subject; // type label, or "#<id>" for linked constants
        std::string predicate;
        std::string object; // type label, "#<id>", or "~<literal kind>"
        bool operator<(const TemplateKey& o) const {
            return std::tie(subject, predicate, object) < std::tie(o.subject, o.predicate, o.object);
        }
    };

    std::set<TemplateKey> keys;
    for (const auto& t : subgraph.triples()) {
        TemplateKey key;
        key.subject = linked.ids.count(t.subject) ? "#" + t.subject : slot_type(subgraph, t.subject);
        key.predicate = t.predicate;
        if (t.object_is_entity()) {
            key.object = linked.ids.count(t.object_entity()) ? "#" + t.object_entity()
                                                             : slot_type(subgraph, t.object_entity());
        } else {
            key.object = "~" + std::to_string(static_cast<int>(t.object_literal().kind()));
        }
        keys.insert(std::move(key));
    }

    // One canonical variable per slot type, x0, x1, ... in discovery order;
    // untyped slots always get a fresh variable.
    std::map<std::string, std::string> type_vars;
    int fresh = 0;
    auto var_for_type = [&](const std::string& type) {
        if (type.empty()) return "x" + std::to_string(fresh++);
        auto it = type_vars.find(type);
        if (it == type_vars.end()) {
            it = type_vars.emplace(type, "x" + std::to_string(fresh++)).first;
        }
        return it->second;
    };

    std::vector<Constraint> out;
    for (const auto& key : keys) {
        Term subject;
        std::optional<std::string> subject_type;
        if (key.subject.rfind('#', 0) == 0) {
            subject = EntityRef{key.subject.substr(1)};
        } else {
            subject = Variable{var_for_type(key.subject)};
            if (!key.subject.empty()) subject_type = key.subject;
        }

        if (key.object.rfind('~', 0) == 0) {
            // Literal-object template: property existence, fresh object variable.
            Term object = Variable{"x" + std::to_string(fresh++)};
            out.push_back(make_pattern(subject, key.predicate, object, subject_type, std::nullopt));
            continue;
        }

        Term object;
        std::optional<std::string> object_type;
        if (key.object.rfind('#', 0) == 0) {
            object = EntityRef{key.object.substr(1)};
        } else {
            object = Variable{var_for_type(key.object)};
            if (!key.object.empty()) object_type = key.object;
        }
        out.push_back(make_pattern(subject, key.predicate, object, subject_type, object_type));
    }
    return out;
}

CTable build_ctable_with_subgraph(const NLQuery& q, const Graph& g, const Graph& subgraph,
                                  const LinkedEntities& linked, const ConstraintSuggester& suggester,
                                  long long match_cap) {
    const auto candidates = parameterize_triples(subgraph, linked);
    const auto suggestion = suggester.suggest(q, subgraph, candidates);

    std::vector<Constraint> raw = suggestion.selected;
    raw.insert(raw.end(), suggestion.injected.begin(), suggestion.injected.end());
    CTable table = normalize(raw);
    return score(g, table, match_cap);
}

CTable build_ctable_linked(const NLQuery& q, const Graph& g, const LinkedEntities& linked,
                           const ConstraintSuggester& suggester, int k, long long match_cap) {
    Graph subgraph = k_hop_subgraph(g, linked.ids, k);
    return build_ctable_with_subgraph(q, g, subgraph, linked, suggester, match_cap);
}

CTable build_ctable(const NLQuery& q, const Graph& g, const EntityLinker& linker,
                    const ConstraintSuggester& suggester, int k, long long match_cap) {
    return build_ctable_linked(q, g, linker.link(q, g), suggester, k, match_cap);
}

PlanShape derive_plan_shape(const CTable& table) {
    PlanShape shape;
    for (const auto& sc : table.constraints()) {
        if (const auto* p = sc.constraint.get_if<TriplePattern>()) {
            if (const auto* v = as_variable(p->subject)) {
                shape.answer_var = v->name;
                shape.answer_type = p->subject_type;
                return shape;
            }
        }
    }
    for (const auto& sc : table.constraints()) {
        const auto vars = sc.constraint.variables();
        if (!vars.empty()) {
            shape.answer_var = vars.front().name;
            return shape;
        }
    }
    return shape;
}

} // namespace cabq
