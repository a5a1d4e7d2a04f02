#include "cabq/literal.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"

namespace cabq {

const char* to_symbol(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

std::optional<CompareOp> compare_op_from(std::string_view s) {
    if (s == "=" || s == "==") return CompareOp::Eq;
    if (s == "!=" || s == "<>" || s == "≠") return CompareOp::Ne;
    if (s == "<") return CompareOp::Lt;
    if (s == "<=" || s == "≤") return CompareOp::Le;
    if (s == ">") return CompareOp::Gt;
    if (s == ">=" || s == "≥") return CompareOp::Ge;
    return std::nullopt;
}

bool Literal::operator<(const Literal& other) const {
    if (value_.index() != other.value_.index()) return value_.index() < other.value_.index();
    return value_ < other.value_;
}

namespace {

// Three-way compare for orderable kind pairs; nullopt when incomparable.
std::optional<int> order_literals(const Literal& a, const Literal& b) {
    const LiteralKind ka = a.kind(), kb = b.kind();
    auto numeric = [](const Literal& l) { return l.kind() == LiteralKind::Int ? static_cast<double>(l.as_int()) : l.as_decimal(); };
    const bool a_num = ka == LiteralKind::Int || ka == LiteralKind::Decimal;
    const bool b_num = kb == LiteralKind::Int || kb == LiteralKind::Decimal;
    if (a_num && b_num) {
        const double x = numeric(a), y = numeric(b);
        if (x < y) return -1;
        if (x > y) return 1;
        return 0;
    }
    if (ka == LiteralKind::String && kb == LiteralKind::String) {
        return a.as_string().compare(b.as_string());
    }
    return std::nullopt;
}

} // namespace

bool Literal::satisfies(CompareOp op, const Literal& rhs) const {
    if (op == CompareOp::Eq) return *this == rhs;
    if (op == CompareOp::Ne) return !(*this == rhs);
    const auto cmp = order_literals(*this, rhs);
    if (!cmp) throw TypeMismatch(lexical() + " " + to_symbol(op) + " " + rhs.lexical());
    switch (op) {
        case CompareOp::Lt: return *cmp < 0;
        case CompareOp::Le: return *cmp <= 0;
        case CompareOp::Gt: return *cmp > 0;
        case CompareOp::Ge: return *cmp >= 0;
        default: return false;
    }
}

std::optional<bool> Literal::try_satisfies(CompareOp op, const Literal& rhs) const noexcept {
    if (op == CompareOp::Eq) return *this == rhs;
    if (op == CompareOp::Ne) return !(*this == rhs);
    const auto cmp = order_literals(*this, rhs);
    if (!cmp) return std::nullopt;
    switch (op) {
        case CompareOp::Lt: return *cmp < 0;
        case CompareOp::Le: return *cmp <= 0;
        case CompareOp::Gt: return *cmp > 0;
        case CompareOp::Ge: return *cmp >= 0;
        default: return std::nullopt;
    }
}

std::string format_decimal(double d) {
    char buf[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, d);
        if (std::strtod(buf, nullptr) == d) break;
    }
    std::string out(buf);
    // Keep a decimal point so the graph-file and query forms stay unambiguous.
    if (out.find('.') == std::string::npos && out.find('e') == std::string::npos &&
        out.find("inf") == std::string::npos && out.find("nan") == std::string::npos) {
        out += ".0";
    }
    return out;
}

std::string Literal::lexical() const {
    switch (kind()) {
        case LiteralKind::String: return as_string();
        case LiteralKind::Int: return std::to_string(as_int());
        case LiteralKind::Decimal: return format_decimal(as_decimal());
        case LiteralKind::Bool: return as_bool() ? "true" : "false";
    }
    return {};
}

std::string Literal::encoded() const {
    switch (kind()) {
        case LiteralKind::String: {
            std::string out = "\"";
            for (char c : as_string()) {
                if (c == '"' || c == '\\') out += '\\';
                out += c;
            }
            out += '"';
            return out;
        }
        case LiteralKind::Int: return "i:" + std::to_string(as_int());
        case LiteralKind::Decimal: return "d:" + format_decimal(as_decimal());
        case LiteralKind::Bool: return std::string("b:") + (as_bool() ? "true" : "false");
    }
    return {};
}

Literal Literal::parse(std::string_view text) {
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < text.size(); ++i) {
            if (text[i] == '\\' && i + 2 < text.size()) ++i;
            out += text[i];
        }
        return Literal::str(std::move(out));
    }
    if (text.rfind("i:", 0) == 0) {
        return Literal::integer(std::stoll(std::string(text.substr(2))));
    }
    if (text.rfind("d:", 0) == 0) {
        return Literal::decimal(std::stod(std::string(text.substr(2))));
    }
    if (text == "b:true") return Literal::boolean(true);
    if (text == "b:false") return Literal::boolean(false);
    throw Error("unparseable literal '" + std::string(text) + "'");
}

nlohmann::json Literal::to_json() const {
    switch (kind()) {
        case LiteralKind::String: return {{"s", as_string()}};
        case LiteralKind::Int: return {{"i", as_int()}};
        case LiteralKind::Decimal: return {{"d", as_decimal()}};
        case LiteralKind::Bool: return {{"b", as_bool()}};
    }
    return {};
}

Literal Literal::from_json(const nlohmann::json& j) {
    if (j.contains("s")) return Literal::str(j.at("s").get<std::string>());
    if (j.contains("i")) return Literal::integer(j.at("i").get<std::int64_t>());
    if (j.contains("d")) return Literal::decimal(j.at("d").get<double>());
    if (j.contains("b")) return Literal::boolean(j.at("b").get<bool>());
    throw Error("unparseable literal json: " + j.dump());
}

} // namespace cabq
