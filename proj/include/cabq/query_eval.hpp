#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cabq/ctable.hpp"
#include "cabq/graph.hpp"

namespace cabq {

/// Executable logical plan: a monotone-core constraint table plus the
/// projection shape.  Deferred non-monotone constraints ride along in the
/// table but are only applied by post-validation, never here.
struct QueryPlan {
    CTable table;
    std::string answer_var;
    std::optional<std::string> answer_type; // used when no constraint binds answer_var
    std::vector<std::string> return_vars;   // defaults to {answer_var} when empty
    std::optional<std::string> return_property; // rendering only, e.g. RETURN c.name

    std::vector<std::string> effective_return_vars() const {
        return return_vars.empty() ? std::vector<std::string>{answer_var} : return_vars;
    }

    nlohmann::json to_json() const;
    static QueryPlan from_json(const nlohmann::json& j);
};

/// Conjunctive evaluation within each branch, union of projections across
/// branches.  Variables bound by no pattern range over all entities (the
/// answer variable additionally honors answer_type).  Output ordering is
/// deterministic: bindings sort lexicographically.
AnswerSet evaluate(const Graph& g, const QueryPlan& plan);

/// Number of distinct assignments of the constraint's own variables.
/// Monotone-core constraints only.  Incomparable literal comparisons count
/// as non-matches rather than erroring.
long long count_matches(const Graph& g, const Constraint& c);

/// Does this (complete, per-branch) binding satisfy the constraint?
bool binding_satisfies(const Graph& g, const Binding& binding, const Constraint& c);

/// Re-checks every evaluated binding against every constraint of its branch.
/// Returns descriptions of violations; empty means consistent.
std::vector<std::string> consistency_violations(const Graph& g, const QueryPlan& plan);

} // namespace cabq
