#include "cabq/graph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

#include "cabq/errors.hpp"

namespace cabq {

std::string value_text(const Value& v) {
    if (v.index() == 0) return std::get<std::string>(v);
    return std::get<Literal>(v).lexical();
}

std::vector<std::string> AnswerSet::projected_text() const {
    std::vector<std::string> out;
    out.reserve(projected.size());
    for (const auto& v : projected) out.push_back(value_text(v));
    return out;
}

void Graph::add_entity(Entity e) {
    entities_[e.id] = std::move(e);
}

void Graph::add_property(const std::string& id, const std::string& key, Literal value) {
    auto it = entities_.find(id);
    if (it == entities_.end()) throw DanglingReference(id);
    it->second.properties[key] = std::move(value);
}

void Graph::add_triple(Triple t) {
    if (!has_entity(t.subject)) throw DanglingReference(t.subject);
    if (t.object_is_entity() && !has_entity(t.object_entity())) throw DanglingReference(t.object_entity());
    const std::size_t idx = triples_.size();
    by_subject_[t.subject].push_back(idx);
    by_predicate_[t.predicate].push_back(idx);
    if (t.object_is_entity()) by_object_entity_[t.object_entity()].push_back(idx);
    triples_.push_back(std::move(t));
}

const Entity* Graph::find(const std::string& id) const {
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : &it->second;
}

namespace {
const std::vector<std::size_t> kNoTriples;

const std::vector<std::size_t>& lookup(const std::map<std::string, std::vector<std::size_t>>& m,
                                       const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? kNoTriples : it->second;
}
} // namespace

const std::vector<std::size_t>& Graph::triples_with_subject(const std::string& id) const {
    return lookup(by_subject_, id);
}
const std::vector<std::size_t>& Graph::triples_with_predicate(const std::string& p) const {
    return lookup(by_predicate_, p);
}
const std::vector<std::size_t>& Graph::triples_with_object_entity(const std::string& id) const {
    return lookup(by_object_entity_, id);
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t Graph::fingerprint() const {
    return fnv1a(graph_to_text(*this));
}

namespace {

// Splits a line into whitespace-separated fields, keeping quoted strings
// (with backslash escapes) as single fields.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        std::string field;
        if (line[i] == '"') {
            field += line[i++];
            while (i < line.size()) {
                if (line[i] == '\\' && i + 1 < line.size()) {
                    field += line[i];
                    field += line[i + 1];
                    i += 2;
                    continue;
                }
                field += line[i];
                if (line[i] == '"') { ++i; break; }
                ++i;
            }
        } else {
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) field += line[i++];
        }
        fields.push_back(std::move(field));
    }
    return fields;
}

} // namespace

Graph load_graph(std::istream& in) {
    struct PendingProperty { int line; std::string id, key, literal; };
    struct PendingTriple { int line; std::string s, p, o; bool literal_object; };

    Graph g;
    std::vector<PendingProperty> properties;
    std::vector<PendingTriple> triples;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        const auto first = trimmed.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (trimmed[first] == '#') continue;

        const auto fields = split_fields(trimmed);
        const std::string& tag = fields[0];
        if (tag == "N") {
            if (fields.size() < 2 || fields.size() > 3) throw ParseError(lineno, "expected: N <id> [<type>,...]");
            Entity e;
            e.id = fields[1];
            if (fields.size() == 3) {
                std::stringstream ss(fields[2]);
                std::string t;
                while (std::getline(ss, t, ',')) {
                    if (t.empty()) throw ParseError(lineno, "empty type label");
                    e.types.insert(t);
                }
            }
            g.add_entity(std::move(e));
        } else if (tag == "P") {
            if (fields.size() != 4) throw ParseError(lineno, "expected: P <id> <key> <literal>");
            if (fields[2].empty()) throw ParseError(lineno, "empty property name");
            properties.push_back({lineno, fields[1], fields[2], fields[3]});
        } else if (tag == "T") {
            if (fields.size() != 4) throw ParseError(lineno, "expected: T <s> <predicate> <o>");
            triples.push_back({lineno, fields[1], fields[2], fields[3], false});
        } else if (tag == "L") {
            if (fields.size() != 4) throw ParseError(lineno, "expected: L <s> <predicate> <literal>");
            triples.push_back({lineno, fields[1], fields[2], fields[3], true});
        } else {
            throw ParseError(lineno, "unknown record tag '" + tag + "'");
        }
    }

    for (const auto& p : properties) {
        Literal lit;
        try {
            lit = Literal::parse(p.literal);
        } catch (const Error&) {
            throw ParseError(p.line, "bad literal '" + p.literal + "'");
        }
        g.add_property(p.id, p.key, std::move(lit));
    }
    for (const auto& t : triples) {
        Triple triple;
        triple.subject = t.s;
        triple.predicate = t.p;
        if (t.literal_object) {
            try {
                triple.object = Literal::parse(t.o);
            } catch (const Error&) {
                throw ParseError(t.line, "bad literal '" + t.o + "'");
            }
        } else {
            triple.object = t.o;
        }
        g.add_triple(std::move(triple));
    }
    return g;
}

Graph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open graph file '" + path + "'");
    return load_graph(in);
}

void write_graph(const Graph& g, std::ostream& out) {
    for (const auto& [id, e] : g.entities()) {
        out << "N " << id;
        if (!e.types.empty()) {
            out << ' ';
            bool first = true;
            for (const auto& t : e.types) {
                if (!first) out << ',';
                out << t;
                first = false;
            }
        }
        out << '\n';
    }
    for (const auto& [id, e] : g.entities()) {
        for (const auto& [key, v] : e.properties) {
            out << "P " << id << ' ' << key << ' ' << v.encoded() << '\n';
        }
    }
    // Triples in a canonical order so equal graphs serialize identically.
    std::vector<std::string> lines;
    lines.reserve(g.triple_count());
    for (const auto& t : g.triples()) {
        std::ostringstream ss;
        ss << (t.object_is_entity() ? "T " : "L ") << t.subject << ' ' << t.predicate << ' ';
        if (t.object_is_entity()) ss << t.object_entity();
        else ss << t.object_literal().encoded();
        lines.push_back(ss.str());
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) out << l << '\n';
}

std::string graph_to_text(const Graph& g) {
    std::ostringstream ss;
    write_graph(g, ss);
    return ss.str();
}

Graph k_hop_subgraph(const Graph& g, const std::set<std::string>& seeds, int k) {
    for (const auto& s : seeds) {
        if (!g.has_entity(s)) throw UnknownEntity(s);
    }

    // Undirected BFS over entity-to-entity edges up to depth k.
    std::map<std::string, int> dist;
    std::deque<std::string> frontier;
    for (const auto& s : seeds) {
        dist[s] = 0;
        frontier.push_back(s);
    }
    while (!frontier.empty()) {
        const std::string id = frontier.front();
        frontier.pop_front();
        const int d = dist[id];
        if (d >= k) continue;
        auto visit = [&](const std::string& other) {
            if (dist.count(other)) return;
            dist[other] = d + 1;
            frontier.push_back(other);
        };
        for (std::size_t idx : g.triples_with_subject(id)) {
            const Triple& t = g.triples()[idx];
            if (t.object_is_entity()) visit(t.object_entity());
        }
        for (std::size_t idx : g.triples_with_object_entity(id)) {
            visit(g.triples()[idx].subject);
        }
    }

    Graph out;
    for (const auto& [id, d] : dist) {
        out.add_entity(*g.find(id));
    }
    for (const auto& t : g.triples()) {
        if (!dist.count(t.subject)) continue;
        if (t.object_is_entity() && !dist.count(t.object_entity())) continue;
        out.add_triple(t);
    }
    return out;
}

} // namespace cabq
