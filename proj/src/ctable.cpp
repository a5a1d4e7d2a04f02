#include "cabq/ctable.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"
#include "cabq/query_eval.hpp"

namespace cabq {

CTable::CTable(std::vector<ScoredConstraint> constraints, std::vector<std::vector<ConstraintId>> branches,
               std::vector<Constraint> deferred, long long normalizer)
    : constraints_(std::move(constraints)),
      branches_(std::move(branches)),
      deferred_(std::move(deferred)),
      normalizer_(normalizer) {
    std::sort(constraints_.begin(), constraints_.end(),
              [](const ScoredConstraint& a, const ScoredConstraint& b) { return a.id < b.id; });
}

bool CTable::empty_core() const { return constraints_.empty(); }

bool CTable::contains(ConstraintId id) const {
    return std::any_of(constraints_.begin(), constraints_.end(),
                       [id](const ScoredConstraint& sc) { return sc.id == id; });
}

const ScoredConstraint& CTable::get(ConstraintId id) const {
    for (const auto& sc : constraints_) {
        if (sc.id == id) return sc;
    }
    throw UnknownConstraint(id);
}

int CTable::branch_of(ConstraintId id) const {
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        if (std::find(branches_[b].begin(), branches_[b].end(), id) != branches_[b].end()) {
            return static_cast<int>(b);
        }
    }
    throw UnknownConstraint(id);
}

std::vector<ConstraintId> CTable::ids() const {
    std::vector<ConstraintId> out;
    out.reserve(constraints_.size());
    for (const auto& sc : constraints_) out.push_back(sc.id);
    return out;
}

CTable CTable::remove(ConstraintId id) const {
    if (!contains(id)) throw UnknownConstraint(id);
    CTable out = *this;
    out.constraints_.erase(
        std::remove_if(out.constraints_.begin(), out.constraints_.end(),
                       [id](const ScoredConstraint& sc) { return sc.id == id; }),
        out.constraints_.end());
    for (auto& branch : out.branches_) {
        branch.erase(std::remove(branch.begin(), branch.end(), id), branch.end());
    }
    return out;
}

CTable CTable::add(const ScoredConstraint& sc, int branch) const {
    if (contains(sc.id)) throw Error("constraint id " + std::to_string(sc.id) + " already present");
    CTable out = *this;
    out.constraints_.push_back(sc);
    std::sort(out.constraints_.begin(), out.constraints_.end(),
              [](const ScoredConstraint& a, const ScoredConstraint& b) { return a.id < b.id; });
    while (static_cast<int>(out.branches_.size()) <= branch) out.branches_.emplace_back();
    out.branches_[branch].push_back(sc.id);
    std::sort(out.branches_[branch].begin(), out.branches_[branch].end());
    return out;
}

namespace {

// Branch contents as sorted constraint texts; id-independent shape.
std::multiset<std::vector<std::string>> branch_shape(const CTable& t) {
    std::multiset<std::vector<std::string>> shape;
    for (const auto& branch : t.branches()) {
        std::vector<std::string> texts;
        for (ConstraintId id : branch) texts.push_back(constraint_text(t.get(id).constraint));
        std::sort(texts.begin(), texts.end());
        shape.insert(std::move(texts));
    }
    return shape;
}

std::multiset<std::string> deferred_shape(const CTable& t) {
    std::multiset<std::string> shape;
    for (const auto& c : t.deferred()) shape.insert(constraint_text(c));
    return shape;
}

} // namespace

bool CTable::equivalent(const CTable& other) const {
    return branch_shape(*this) == branch_shape(other) && deferred_shape(*this) == deferred_shape(other);
}

nlohmann::json CTable::to_json() const {
    nlohmann::json j;
    auto cons = nlohmann::json::array();
    for (const auto& sc : constraints_) {
        nlohmann::json c = constraint_to_json(sc.constraint);
        c["id"] = sc.id;
        c["n"] = sc.matches;
        c["u"] = sc.uncertainty;
        cons.push_back(std::move(c));
    }
    j["constraints"] = std::move(cons);
    j["branches"] = branches_;
    auto def = nlohmann::json::array();
    for (const auto& d : deferred_) def.push_back(constraint_to_json(d));
    j["deferred"] = std::move(def);
    j["m"] = normalizer_;
    return j;
}

CTable CTable::from_json(const nlohmann::json& j) {
    std::vector<ScoredConstraint> constraints;
    for (const auto& c : j.at("constraints")) {
        ScoredConstraint sc;
        sc.id = c.at("id").get<int>();
        sc.matches = c.value("n", 0ll);
        sc.uncertainty = c.value("u", 0.0);
        sc.constraint = constraint_from_json(c);
        constraints.push_back(std::move(sc));
    }
    std::vector<std::vector<ConstraintId>> branches =
        j.at("branches").get<std::vector<std::vector<ConstraintId>>>();
    std::vector<Constraint> deferred;
    for (const auto& d : j.at("deferred")) deferred.push_back(constraint_from_json(d));
    return CTable(std::move(constraints), std::move(branches), std::move(deferred),
                  j.value("m", 0ll));
}

namespace {

std::string term_cell(const Term& t) {
    if (const auto* v = std::get_if<Variable>(&t)) return "?" + v->name;
    if (const auto* e = std::get_if<EntityRef>(&t)) return e->id;
    return std::get<Literal>(t).lexical();
}

} // namespace

std::string CTable::to_markdown() const {
    std::ostringstream out;
    out << "| ID | subject | predicate | object | filter |\n";
    out << "|----|---------|-----------|--------|--------|\n";
    for (const auto& sc : constraints_) {
        std::string subject, predicate, object, filter;
        if (const auto* p = sc.constraint.get_if<TriplePattern>()) {
            subject = term_cell(p->subject);
            if (p->subject_type) subject += ":" + *p->subject_type;
            if (const auto* pv = std::get_if<Variable>(&p->predicate)) predicate = "?" + pv->name;
            else predicate = std::get<std::string>(p->predicate);
            object = term_cell(p->object);
            if (p->object_type) object += ":" + *p->object_type;
        } else if (const auto* v = sc.constraint.get_if<ValueConstraint>()) {
            filter = "?" + v->anchor.name + "." + v->property + " " + to_symbol(v->op) + " " +
                     v->value.lexical();
        } else if (const auto* b = sc.constraint.get_if<BoundedPath>()) {
            subject = term_cell(b->subject);
            predicate = b->predicate + "*1.." + std::to_string(b->max_length);
            object = term_cell(b->object);
        }
        out << "| c" << sc.id << " | " << subject << " | " << predicate << " | " << object << " | "
            << filter << " |\n";
    }
    return out.str();
}

namespace {

struct BranchDraft {
    std::vector<Constraint> atoms;
};

} // namespace

CTable normalize(const std::vector<Constraint>& raw) {
    // First pass: route atoms to branches keyed by declared branch id,
    // collecting optional groups per branch and deferring non-monotone kinds.
    std::map<int, std::vector<BranchDraft>> variants; // branch id -> expansion variants
    std::vector<Constraint> deferred;
    std::vector<int> branch_order;
    int current = 0;

    auto ensure_branch = [&](int b) -> std::vector<BranchDraft>& {
        auto it = variants.find(b);
        if (it == variants.end()) {
            branch_order.push_back(b);
            it = variants.emplace(b, std::vector<BranchDraft>{BranchDraft{}}).first;
        }
        return it->second;
    };

    int position = 0;
    for (const auto& c : raw) {
        ++position;
        if (const auto* tag = c.get_if<UnionBranchTag>()) {
            current = tag->branch;
            ensure_branch(current);
            continue;
        }
        if (const auto* opt = c.get_if<OptionalGroup>()) {
            std::vector<Constraint> atoms;
            for (const auto& m : opt->members) {
                if (m.is_deferred_kind()) {
                    deferred.push_back(m);
                } else if (m.is_monotone()) {
                    atoms.push_back(m);
                } else {
                    throw MalformedConstraint(position, "nested structural constraint inside OPTIONAL");
                }
            }
            // Split every variant of the current branch into with/without.
            auto& vs = ensure_branch(current);
            std::vector<BranchDraft> expanded;
            expanded.reserve(vs.size() * 2);
            for (const auto& v : vs) {
                BranchDraft with = v;
                with.atoms.insert(with.atoms.end(), atoms.begin(), atoms.end());
                expanded.push_back(std::move(with));
            }
            for (const auto& v : vs) expanded.push_back(v);
            vs = std::move(expanded);
            continue;
        }
        if (c.is_deferred_kind()) {
            deferred.push_back(c);
            continue;
        }
        if (!c.is_monotone()) {
            throw MalformedConstraint(position, "unsupported constraint kind " + c.kind_name());
        }
        for (auto& v : ensure_branch(current)) v.atoms.push_back(c);
    }

    std::vector<ScoredConstraint> constraints;
    std::vector<std::vector<ConstraintId>> branches;
    int next_id = 0;
    for (int b : branch_order) {
        for (const auto& variant : variants.at(b)) {
            std::vector<ConstraintId> branch_ids;
            for (const auto& atom : variant.atoms) {
                ScoredConstraint sc;
                sc.id = next_id++;
                sc.constraint = atom;
                branch_ids.push_back(sc.id);
                constraints.push_back(std::move(sc));
            }
            branches.push_back(std::move(branch_ids));
        }
    }
    if (branches.empty() && !constraints.empty()) branches.emplace_back();
    return CTable(std::move(constraints), std::move(branches), std::move(deferred), 0);
}

std::vector<Constraint> flatten(const CTable& table) {
    std::vector<Constraint> raw;
    const bool tag_branches = table.branches().size() > 1;
    int branch_no = 0;
    for (const auto& branch : table.branches()) {
        if (tag_branches) raw.push_back(Constraint{UnionBranchTag{branch_no}});
        for (ConstraintId id : branch) raw.push_back(table.get(id).constraint);
        ++branch_no;
    }
    for (const auto& d : table.deferred()) raw.push_back(d);
    return raw;
}

CTable score(const Graph& g, const CTable& table, long long match_cap) {
    if (match_cap <= 0) throw ConfigError("match cap must be positive");

    std::map<ConstraintId, long long> counts;
    long long max_n = 0;
    for (const auto& sc : table.constraints()) {
        const long long n = count_matches(g, sc.constraint);
        counts[sc.id] = n;
        max_n = std::max(max_n, n);
    }
    if (max_n == 0) throw EmptyAfterPruning();

    const long long m = std::min(max_n, match_cap);
    std::vector<ScoredConstraint> kept;
    std::set<ConstraintId> kept_ids;
    for (const auto& sc : table.constraints()) {
        const long long n = counts[sc.id];
        if (n == 0) continue;
        ScoredConstraint scored = sc;
        scored.matches = n;
        scored.uncertainty = std::min(1.0, static_cast<double>(n) / static_cast<double>(m));
        kept_ids.insert(sc.id);
        kept.push_back(std::move(scored));
    }
    if (kept.empty()) throw EmptyAfterPruning();

    // Rebuild branches; a branch emptied by pruning held nothing but noise,
    // so it is dropped rather than left behind as a match-all member.
    std::vector<std::vector<ConstraintId>> branches;
    for (const auto& branch : table.branches()) {
        std::vector<ConstraintId> ids;
        for (ConstraintId id : branch) {
            if (kept_ids.count(id)) ids.push_back(id);
        }
        const bool was_empty = branch.empty();
        if (!ids.empty() || was_empty) branches.push_back(std::move(ids));
    }
    return CTable(std::move(kept), std::move(branches), table.deferred(), m);
}

} // namespace cabq
