#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cabq/literal.hpp"

namespace cabq {

struct Variable {
    std::string name;
    bool operator==(const Variable&) const = default;
    bool operator<(const Variable& o) const { return name < o.name; }
};

struct EntityRef {
    std::string id;
    bool operator==(const EntityRef&) const = default;
};

/// Pattern slot: a variable, an entity constant, or a literal constant.
using Term = std::variant<Variable, EntityRef, Literal>;

bool is_variable(const Term& t);
const Variable* as_variable(const Term& t);

struct Constraint; // recursive via OptionalGroup / Negation

/// Directed edge pattern with optional type labels on both endpoints.
struct TriplePattern {
    Term subject;
    std::variant<std::string, Variable> predicate;
    Term object;
    std::optional<std::string> subject_type;
    std::optional<std::string> object_type;
};

/// Comparison between a node property and a constant literal.
struct ValueConstraint {
    Variable anchor;
    std::string property;
    CompareOp op = CompareOp::Eq;
    Literal value;
};

/// Existence of a directed path of length 1..max_length along one predicate.
struct BoundedPath {
    Term subject;
    std::string predicate;
    Term object;
    int max_length = 1;
};

/// Structural marker: atoms of an OPTIONAL block; normalize() rewrites the
/// group into an explicit with/without branch pair.
struct OptionalGroup {
    std::vector<Constraint> members;
};

/// Structural marker: subsequent raw constraints belong to this UNION branch.
struct UnionBranchTag {
    int branch = 0;
};

// Non-monotone constraints; normalize() defers them to post-validation.

struct Negation {
    std::vector<Constraint> inner; // exactly one element
};

struct CardinalityLimit {
    enum class Mode { AtMost, Exactly };
    Mode mode = Mode::AtMost;
    int k = 0;
};

struct AggregateSpec {
    std::string function; // only "count" is applied; others are rejected late
};

struct OrderLimitSpec {
    Variable variable;
    std::string property;
    bool descending = false;
    int limit = 0;
};

using ConstraintBody = std::variant<TriplePattern, ValueConstraint, BoundedPath, OptionalGroup,
                                    UnionBranchTag, Negation, CardinalityLimit, AggregateSpec,
                                    OrderLimitSpec>;

struct Constraint {
    ConstraintBody body;

    template <typename T>
    const T* get_if() const { return std::get_if<T>(&body); }
    template <typename T>
    bool is() const { return std::holds_alternative<T>(body); }

    /// Monotone-core atoms: triple patterns, value constraints, bounded paths.
    bool is_monotone() const;
    /// Structural markers consumed by normalize().
    bool is_structural() const;
    /// Non-monotone constraints deferred to post-validation.
    bool is_deferred_kind() const;

    /// Variables occurring in this constraint (monotone kinds only).
    std::vector<Variable> variables() const;

    std::string kind_name() const;
};

bool operator==(const Constraint& a, const Constraint& b);
inline bool operator!=(const Constraint& a, const Constraint& b) { return !(a == b); }

bool operator==(const TriplePattern& a, const TriplePattern& b);
bool operator==(const ValueConstraint& a, const ValueConstraint& b);
bool operator==(const BoundedPath& a, const BoundedPath& b);
bool operator==(const OptionalGroup& a, const OptionalGroup& b);
bool operator==(const UnionBranchTag& a, const UnionBranchTag& b);
bool operator==(const Negation& a, const Negation& b);
bool operator==(const CardinalityLimit& a, const CardinalityLimit& b);
bool operator==(const AggregateSpec& a, const AggregateSpec& b);
bool operator==(const OrderLimitSpec& a, const OrderLimitSpec& b);

nlohmann::json term_to_json(const Term& t);
Term term_from_json(const nlohmann::json& j);

nlohmann::json constraint_to_json(const Constraint& c);
Constraint constraint_from_json(const nlohmann::json& j);

/// Stable text form used for hashing, dedup keys and debugging.
std::string constraint_text(const Constraint& c);

// Convenience builders.
Constraint make_pattern(Term s, std::variant<std::string, Variable> p, Term o,
                        std::optional<std::string> stype = std::nullopt,
                        std::optional<std::string> otype = std::nullopt);
Constraint make_value(std::string anchor, std::string property, CompareOp op, Literal value);
Constraint make_path(Term s, std::string p, Term o, int max_length);

} // namespace cabq
