#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cabq/constraint.hpp"

namespace cabq {

class Graph;

using ConstraintId = int;

struct ScoredConstraint {
    ConstraintId id = 0;
    Constraint constraint;
    long long matches = 0;    // support count n in the graph
    double uncertainty = 0.0; // n / min(max n, match cap), clamped to <= 1
};

/// Constraint table: the intermediate representation refined by the engine.
///
/// Values are immutable; remove/add return modified copies, so tables can be
/// shared freely across threads and beam candidates.
class CTable {
public:
    CTable() = default;
    CTable(std::vector<ScoredConstraint> constraints, std::vector<std::vector<ConstraintId>> branches,
           std::vector<Constraint> deferred, long long normalizer = 0);

    const std::vector<ScoredConstraint>& constraints() const { return constraints_; }
    const std::vector<std::vector<ConstraintId>>& branches() const { return branches_; }
    const std::vector<Constraint>& deferred() const { return deferred_; }
    long long normalizer() const { return normalizer_; }

    bool empty_core() const;
    std::size_t size() const { return constraints_.size(); }

    bool contains(ConstraintId id) const;
    const ScoredConstraint& get(ConstraintId id) const; // throws UnknownConstraint
    int branch_of(ConstraintId id) const;               // throws UnknownConstraint
    std::vector<ConstraintId> ids() const;              // ascending

    /// Copy without the given constraint.  Branches that become empty are
    /// kept: they evaluate as match-all, which preserves the rule that
    /// removing a constraint can only enlarge the answer set.
    CTable remove(ConstraintId id) const;

    /// Copy with the constraint appended to the given branch (default 0).
    CTable add(const ScoredConstraint& sc, int branch = 0) const;

    /// Structural equality ignoring constraint order within branches.
    bool equivalent(const CTable& other) const;

    nlohmann::json to_json() const;
    static CTable from_json(const nlohmann::json& j);

    /// Markdown table (ID | subject | predicate | object | filter) used by
    /// the table-construction exchange format.
    std::string to_markdown() const;

private:
    std::vector<ScoredConstraint> constraints_; // ascending id
    std::vector<std::vector<ConstraintId>> branches_;
    std::vector<Constraint> deferred_;
    long long normalizer_ = 0;
};

/// Normalize a raw constraint list into the monotone core:
///  - UnionBranchTag(k) routes subsequent constraints to branch k;
///  - each OptionalGroup splits its branch into with/without variants;
///  - non-monotone constraints move to the deferred list;
///  - ids are assigned in branch-then-position order.
/// Idempotent: normalizing the flattened output reproduces the same table.
CTable normalize(const std::vector<Constraint>& raw);

/// Flatten a table back to a raw list (with branch tags); normalize() of the
/// result is equivalent to the input table.
std::vector<Constraint> flatten(const CTable& table);

/// Count supports of every constraint in the graph, set the table-wide
/// normalizer m = min(max n, match_cap), score u = min(1, n/m), and prune
/// zero-match constraints.  Branches emptied purely by pruning are dropped.
/// Throws EmptyAfterPruning when nothing survives.
CTable score(const Graph& g, const CTable& table, long long match_cap);

inline constexpr long long kDefaultMatchCap = 10000;

} // namespace cabq
