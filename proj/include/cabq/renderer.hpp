#pragma once

#include <functional>
#include <map>
#include <string>

#include "cabq/query_eval.hpp"

namespace cabq {

/// Target language plus the id rendering convention.  `mappings` holds the
/// per-constraint-kind fragment templates; a missing entry makes rendering
/// raise UnmappedConstraint (or consult the fallback hook).
struct RenderDialect {
    enum class Target { Cypher, Sparql };
    enum class IdStyle { Plain, UrlBacktick };

    Target target = Target::Cypher;
    IdStyle id_style = IdStyle::Plain;
    std::map<std::string, std::string> mappings;

    static RenderDialect cypher(IdStyle style = IdStyle::Plain);
    static RenderDialect sparql(IdStyle style = IdStyle::Plain);

    /// Mapping-set file: {"target": "cypher"|"sparql", "id_style": ...,
    /// "mappings": {kind: template}}; omitted kinds fall back to built-ins
    /// unless "strict" is true.
    static RenderDialect load_file(const std::string& path);

    std::string target_name() const { return target == Target::Cypher ? "cypher" : "sparql"; }
};

struct RenderedQuery {
    std::string text;
    RenderDialect dialect;
    QueryPlan source_plan;
};

/// Deterministic text generation; clause order follows constraint ids.
/// Deferred non-monotone constraints surface as trailing comment lines only.
RenderedQuery render(const QueryPlan& plan, const RenderDialect& dialect);

/// Parser for the emitted Cypher subset (MATCH / WHERE / UNION / RETURN, both
/// id styles, the six comparison operators, bounded-path ranges).  Keywords
/// are case-insensitive; comment lines are ignored.
QueryPlan parse_cypher_subset(const std::string& text);

using FallbackGenerator = std::function<std::string(const QueryPlan&, const RenderDialect&)>;

/// Prompt-based rendering hook with execution-gated acceptance: Cypher output
/// must parse and evaluate to exactly the plan's answers on g; SPARQL output
/// must match the canonical rendering modulo whitespace.
RenderedQuery fallback_render(const QueryPlan& plan, const RenderDialect& dialect,
                              const FallbackGenerator& hook, const Graph& g);

/// Declared normalization for golden comparisons: drop all whitespace.
std::string strip_whitespace(const std::string& s);

} // namespace cabq
