#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json_fwd.hpp>

namespace cabq {

enum class LiteralKind { String, Int, Decimal, Bool };

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* to_symbol(CompareOp op);
std::optional<CompareOp> compare_op_from(std::string_view symbol);

/// Tagged literal value: string, integer, decimal or boolean.
///
/// Equality never crosses tags (an int is never == a decimal).  Ordering is
/// numeric across int/decimal, lexicographic for strings, and a TypeMismatch
/// for every other cross-kind pair and for booleans.
class Literal {
public:
    Literal() : value_(std::string{}) {}

    static Literal str(std::string s) { return Literal(std::move(s)); }
    static Literal integer(std::int64_t i) { return Literal(i); }
    static Literal decimal(double d) { return Literal(d); }
    static Literal boolean(bool b) { return Literal(b); }

    LiteralKind kind() const { return static_cast<LiteralKind>(value_.index()); }

    const std::string& as_string() const { return std::get<std::string>(value_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(value_); }
    double as_decimal() const { return std::get<double>(value_); }
    bool as_bool() const { return std::get<bool>(value_); }

    bool operator==(const Literal& other) const { return value_ == other.value_; }
    bool operator!=(const Literal& other) const { return !(*this == other); }

    /// Total order used for deterministic container keys and output sorting.
    /// This is a storage order (kind index, then value), not filter semantics.
    bool operator<(const Literal& other) const;

    /// Filter semantics.  Eq/Ne are total; the four orderings throw
    /// TypeMismatch on incomparable kinds.
    bool satisfies(CompareOp op, const Literal& rhs) const;

    /// Like satisfies() but reports incomparable kinds as nullopt instead of
    /// throwing; used where a failed comparison should count as a non-match.
    std::optional<bool> try_satisfies(CompareOp op, const Literal& rhs) const noexcept;

    /// Display form, e.g. for answers and markdown tables.
    std::string lexical() const;

    /// Graph-file form: "str", i:42, d:3.5, b:true.
    std::string encoded() const;
    static Literal parse(std::string_view text);

    nlohmann::json to_json() const;
    static Literal from_json(const nlohmann::json& j);

private:
    explicit Literal(std::string s) : value_(std::move(s)) {}
    explicit Literal(std::int64_t i) : value_(i) {}
    explicit Literal(double d) : value_(d) {}
    explicit Literal(bool b) : value_(b) {}

    std::variant<std::string, std::int64_t, double, bool> value_;
};

/// Shortest decimal text that parses back to exactly the same double.
std::string format_decimal(double d);

} // namespace cabq
