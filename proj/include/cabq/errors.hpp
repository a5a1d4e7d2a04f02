#pragma once

#include <stdexcept>
#include <string>

namespace cabq {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& reason)
        : Error("parse error at line " + std::to_string(line) + ": " + reason), line(line) {}
    int line;
};

class DanglingReference : public Error {
public:
    explicit DanglingReference(const std::string& id)
        : Error("reference to unknown entity '" + id + "'"), id(id) {}
    std::string id;
};

class UnknownEntity : public Error {
public:
    explicit UnknownEntity(const std::string& id)
        : Error("unknown entity '" + id + "'"), id(id) {}
    std::string id;
};

class UnboundVariable : public Error {
public:
    explicit UnboundVariable(const std::string& name)
        : Error("unbound variable '" + name + "'"), name(name) {}
    std::string name;
};

class TypeMismatch : public Error {
public:
    explicit TypeMismatch(const std::string& detail)
        : Error("type mismatch in literal comparison: " + detail) {}
};

class MalformedConstraint : public Error {
public:
    MalformedConstraint(int id, const std::string& reason)
        : Error("malformed constraint " + std::to_string(id) + ": " + reason), id(id) {}
    int id;
};

class EmptyAfterPruning : public Error {
public:
    EmptyAfterPruning() : Error("constraint table is empty after zero-match pruning") {}
};

class UnknownConstraint : public Error {
public:
    explicit UnknownConstraint(int id)
        : Error("no constraint with id " + std::to_string(id)), id(id) {}
    int id;
};

class MissingRecording : public Error {
public:
    explicit MissingRecording(const std::string& key)
        : Error("no recording for key '" + key + "'"), key(key) {}
    std::string key;
};

class OracleUnavailable : public Error {
public:
    explicit OracleUnavailable(const std::string& cause)
        : Error("oracle unavailable: " + cause) {}
};

class MalformedResponse : public Error {
public:
    explicit MalformedResponse(const std::string& excerpt)
        : Error("malformed oracle response: " + excerpt) {}
};

class EmptyAggregate : public Error {
public:
    EmptyAggregate() : Error("reference aggregation eliminated every answer") {}
};

class UnmappedConstraint : public Error {
public:
    explicit UnmappedConstraint(int id)
        : Error("no dialect mapping for constraint " + std::to_string(id)), id(id) {}
    int id;
};

class CypherSyntaxError : public Error {
public:
    CypherSyntaxError(std::size_t position, const std::string& expected)
        : Error("syntax error at offset " + std::to_string(position) + ", expected " + expected),
          position(position), expected(expected) {}
    std::size_t position;
    std::string expected;
};

class FallbackRejected : public Error {
public:
    explicit FallbackRejected(const std::string& diff)
        : Error("fallback rendering rejected: " + diff) {}
};

class UnsupportedAggregate : public Error {
public:
    explicit UnsupportedAggregate(const std::string& spec)
        : Error("unsupported aggregate '" + spec + "'"), spec(spec) {}
    std::string spec;
};

class EmptySamples : public Error {
public:
    EmptySamples() : Error("latency summary requires at least one sample") {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace cabq
