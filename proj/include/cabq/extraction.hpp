#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cabq/ctable.hpp"
#include "cabq/graph.hpp"

namespace cabq {

struct NLQuery {
    std::string text;
    std::string id;
};

struct Mention {
    std::size_t begin = 0; // byte offsets into the question text
    std::size_t end = 0;
    std::string entity;
};

struct LinkedEntities {
    std::vector<Mention> mentions;
    std::set<std::string> ids;
};

/// Surface form (lowercase) -> entity id.
using MentionDictionary = std::map<std::string, std::string>;

MentionDictionary load_dictionary_file(const std::string& path);

/// Longest-match, case-insensitive scan over the question text; matches must
/// start and end on word boundaries.
LinkedEntities link_entities(const NLQuery& q, const Graph& g, const MentionDictionary& dict);

class EntityLinker {
public:
    virtual ~EntityLinker() = default;
    virtual LinkedEntities link(const NLQuery& q, const Graph& g) const = 0;
};

class DictionaryLinker : public EntityLinker {
public:
    explicit DictionaryLinker(MentionDictionary dict) : dict_(std::move(dict)) {}
    LinkedEntities link(const NLQuery& q, const Graph& g) const override {
        return link_entities(q, g, dict_);
    }
    const MentionDictionary& dictionary() const { return dict_; }

private:
    MentionDictionary dict_;
};

/// Relevance selection and implicit-constraint injection hook.
class ConstraintSuggester {
public:
    virtual ~ConstraintSuggester() = default;

    struct Suggestion {
        std::vector<Constraint> selected; // subset of the offered candidates
        std::vector<Constraint> injected; // extra implicit constraints
    };

    virtual Suggestion suggest(const NLQuery& q, const Graph& subgraph,
                               const std::vector<Constraint>& candidates) const = 0;
};

/// Keeps candidates whose predicate or type label shares a (lightly stemmed)
/// token with the question text; injects nothing.
class TokenOverlapSuggester : public ConstraintSuggester {
public:
    Suggestion suggest(const NLQuery& q, const Graph& subgraph,
                       const std::vector<Constraint>& candidates) const override;
};

/// Replays selections and injections from a fixture file keyed by question
/// id: {"<qid>": {"select": [indices], "inject": [constraint objects]}}.
/// Unknown question ids select everything and inject nothing.
class ScriptedSuggester : public ConstraintSuggester {
public:
    explicit ScriptedSuggester(const std::string& path);
    Suggestion suggest(const NLQuery& q, const Graph& subgraph,
                       const std::vector<Constraint>& candidates) const override;

private:
    struct Script {
        std::vector<int> select;
        std::vector<Constraint> inject;
    };
    std::map<std::string, Script> scripts_;
};

/// One triple pattern per distinct (subject type, predicate, object type or
/// literal kind) template in the subgraph.  Linked entities stay constants;
/// everything else becomes a canonical type-keyed variable (x0, x1, ... in
/// template discovery order).  Literal-object templates surface as
/// property-existence patterns with a fresh object variable.
std::vector<Constraint> parameterize_triples(const Graph& subgraph, const LinkedEntities& linked);

/// Full table construction: link, induce the k-hop subgraph, parameterize,
/// consult the suggester, normalize, score.  Throws EmptyAfterPruning for
/// degenerate questions.
CTable build_ctable(const NLQuery& q, const Graph& g, const EntityLinker& linker,
                    const ConstraintSuggester& suggester, int k, long long match_cap);

/// As above but with precomputed entity links (hint path / cache path).
CTable build_ctable_linked(const NLQuery& q, const Graph& g, const LinkedEntities& linked,
                           const ConstraintSuggester& suggester, int k, long long match_cap);

/// As above but with a precomputed context subgraph; scoring always counts
/// supports against the full graph.
CTable build_ctable_with_subgraph(const NLQuery& q, const Graph& g, const Graph& subgraph,
                                  const LinkedEntities& linked, const ConstraintSuggester& suggester,
                                  long long match_cap);

/// Projection shape derived from a table: the answer variable is the subject
/// variable of the lowest-id triple pattern, falling back to the first
/// variable seen anywhere, then to a free typed variable.
struct PlanShape {
    std::string answer_var = "x0";
    std::optional<std::string> answer_type;
};

PlanShape derive_plan_shape(const CTable& table);

inline constexpr int kDefaultHops = 2;

} // namespace cabq
