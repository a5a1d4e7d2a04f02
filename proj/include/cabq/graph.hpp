#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cabq/literal.hpp"

namespace cabq {

/// A node: opaque id, zero or more type labels, and literal properties.
struct Entity {
    std::string id;
    std::set<std::string> types;
    std::map<std::string, Literal> properties;
};

/// Object position of a triple: another entity (by id) or a literal.
using TripleObject = std::variant<std::string, Literal>;

struct Triple {
    std::string subject;
    std::string predicate;
    TripleObject object;

    bool object_is_entity() const { return object.index() == 0; }
    const std::string& object_entity() const { return std::get<std::string>(object); }
    const Literal& object_literal() const { return std::get<Literal>(object); }
};

/// A bound value: an entity id or a literal.
using Value = std::variant<std::string, Literal>;

std::string value_text(const Value& v);

/// Variable assignment produced by query evaluation.  std::map keeps the
/// natural lexicographic order used for deterministic output.
using Binding = std::map<std::string, Value>;

struct AnswerSet {
    std::vector<Binding> bindings;
    std::set<Value> projected;

    std::vector<std::string> projected_text() const;
};

/// In-memory labeled property multigraph.  Immutable once loaded; all
/// evaluation entry points take it by const reference and may be called
/// concurrently from any number of threads.
class Graph {
public:
    void add_entity(Entity e);
    void add_property(const std::string& id, const std::string& key, Literal value);
    void add_triple(Triple t);

    bool has_entity(const std::string& id) const { return entities_.count(id) > 0; }
    const Entity* find(const std::string& id) const;
    const std::map<std::string, Entity>& entities() const { return entities_; }
    const std::vector<Triple>& triples() const { return triples_; }

    std::size_t entity_count() const { return entities_.size(); }
    std::size_t triple_count() const { return triples_.size(); }

    const std::vector<std::size_t>& triples_with_subject(const std::string& id) const;
    const std::vector<std::size_t>& triples_with_predicate(const std::string& p) const;
    const std::vector<std::size_t>& triples_with_object_entity(const std::string& id) const;

    /// Content hash over the canonical serialization; cache keying.
    std::uint64_t fingerprint() const;

private:
    std::map<std::string, Entity> entities_;
    std::vector<Triple> triples_;
    std::map<std::string, std::vector<std::size_t>> by_subject_;
    std::map<std::string, std::vector<std::size_t>> by_predicate_;
    std::map<std::string, std::vector<std::size_t>> by_object_entity_;
};

/// Parse the line-oriented graph file format:
///   N <id> <type>[,<type>...]   node declaration
///   P <id> <key> <literal>      node property
///   T <s> <predicate> <o>       entity-object triple
///   L <s> <predicate> <literal> literal-object triple
/// Literals: "str", i:42, d:3.5, b:true.  '#' starts a comment line.
/// Dangling entity references are rejected.
Graph load_graph(std::istream& in);
Graph load_graph_file(const std::string& path);

/// Canonical textual form; load_graph(write_graph(g)) reproduces g.
void write_graph(const Graph& g, std::ostream& out);
std::string graph_to_text(const Graph& g);

/// Induced subgraph of every node within undirected distance k of a seed,
/// plus all triples and properties among the kept nodes.
Graph k_hop_subgraph(const Graph& g, const std::set<std::string>& seeds, int k);

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 1469598103934665603ull);

} // namespace cabq
