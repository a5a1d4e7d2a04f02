#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cabq/errors.hpp"
#include "cabq/renderer.hpp"

namespace cabq {

namespace {

enum class Tok {
    Ident,     // bare name or keyword
    Backtick,  // `quoted name`
    Str,       // 'single' or "double" quoted
    Int,
    Dec,
    LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    Colon, Dot, DotDot, Comma, Dash, Arrow, Star,
    Op,        // = <> != < <= > >=
    End,
};

struct Token {
    Tok kind;
    std::string text;  // cooked value for Str/Backtick, raw otherwise
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { next(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        next();
        return t;
    }

private:
    void next() {
        skip_trivia();
        current_.pos = pos_;
        if (pos_ >= text_.size()) {
            current_ = {Tok::End, "", pos_};
            return;
        }
        const char c = text_[pos_];
        if (c == '(') { current_ = {Tok::LParen, "(", pos_++}; return; }
        if (c == ')') { current_ = {Tok::RParen, ")", pos_++}; return; }
        if (c == '[') { current_ = {Tok::LBracket, "[", pos_++}; return; }
        if (c == ']') { current_ = {Tok::RBracket, "]", pos_++}; return; }
        if (c == '{') { current_ = {Tok::LBrace, "{", pos_++}; return; }
        if (c == '}') { current_ = {Tok::RBrace, "}", pos_++}; return; }
        if (c == ':') { current_ = {Tok::Colon, ":", pos_++}; return; }
        if (c == ',') { current_ = {Tok::Comma, ",", pos_++}; return; }
        if (c == '*') { current_ = {Tok::Star, "*", pos_++}; return; }
        if (c == '.') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '.') {
                current_ = {Tok::DotDot, "..", pos_};
                pos_ += 2;
                return;
            }
            current_ = {Tok::Dot, ".", pos_++};
            return;
        }
        if (c == '-') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
                current_ = {Tok::Arrow, "->", pos_};
                pos_ += 2;
                return;
            }
            if (pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
                lex_number();
                return;
            }
            current_ = {Tok::Dash, "-", pos_++};
            return;
        }
        if (c == '=' ) { current_ = {Tok::Op, "=", pos_++}; return; }
        if (c == '<') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') { current_ = {Tok::Op, "<>", pos_}; pos_ += 2; return; }
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') { current_ = {Tok::Op, "<=", pos_}; pos_ += 2; return; }
            current_ = {Tok::Op, "<", pos_++};
            return;
        }
        if (c == '>') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') { current_ = {Tok::Op, ">=", pos_}; pos_ += 2; return; }
            current_ = {Tok::Op, ">", pos_++};
            return;
        }
        if (c == '!') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') { current_ = {Tok::Op, "!=", pos_}; pos_ += 2; return; }
            throw CypherSyntaxError(pos_, "'='");
        }
        if (c == '\'' || c == '"') { lex_string(c); return; }
        if (c == '`') { lex_backtick(); return; }
        if (std::isdigit(static_cast<unsigned char>(c))) { lex_number(); return; }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '~') { lex_ident(); return; }
        throw CypherSyntaxError(pos_, "a token");
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    void lex_string(char quote) {
        const std::size_t start = pos_;
        ++pos_;
        std::string out;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (quote == '\'' && c == '\'') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
                    out += '\'';
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                current_ = {Tok::Str, out, start};
                return;
            }
            if (quote == '"' && c == '\\' && pos_ + 1 < text_.size()) {
                out += text_[pos_ + 1];
                pos_ += 2;
                continue;
            }
            if (quote == '"' && c == '"') {
                ++pos_;
                current_ = {Tok::Str, out, start};
                return;
            }
            out += c;
            ++pos_;
        }
        throw CypherSyntaxError(start, "closing quote");
    }

    void lex_backtick() {
        const std::size_t start = pos_;
        ++pos_;
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '`') out += text_[pos_++];
        if (pos_ >= text_.size()) throw CypherSyntaxError(start, "closing backtick");
        ++pos_;
        current_ = {Tok::Backtick, out, start};
    }

    void lex_number() {
        const std::size_t start = pos_;
        std::string out;
        if (text_[pos_] == '-') out += text_[pos_++];
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            out += text_[pos_++];
        }
        bool decimal = false;
        if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
            decimal = true;
            out += text_[pos_++];
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                out += text_[pos_++];
            }
        }
        current_ = {decimal ? Tok::Dec : Tok::Int, out, start};
    }

    void lex_ident() {
        const std::size_t start = pos_;
        std::string out;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '~')) {
            out += text_[pos_++];
        }
        current_ = {Tok::Ident, out, start};
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    Token current_{Tok::End, "", 0};
};

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

bool is_keyword(const Token& t, const char* kw) {
    return t.kind == Tok::Ident && upper(t.text) == kw;
}

struct NodeElement {
    std::optional<std::string> var;
    std::optional<std::string> label;
    std::optional<std::string> const_id;
    std::size_t pos = 0;
};

struct EdgeElement {
    std::variant<std::string, Variable> predicate{std::string{}};
    std::optional<std::pair<int, int>> range;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) {}

    QueryPlan parse() {
        parse_branch();
        while (is_keyword(lexer_.peek(), "UNION")) {
            lexer_.take();
            parse_branch();
        }
        expect_end();

        CTable table(std::move(constraints_), std::move(branches_), {}, 0);
        QueryPlan plan;
        plan.table = std::move(table);
        plan.answer_var = answer_var_;
        plan.answer_type = answer_type_;
        plan.return_vars = {answer_var_};
        plan.return_property = return_property_;
        return plan;
    }

private:
    void parse_branch() {
        expect_keyword("MATCH");
        std::vector<ConstraintId> branch_ids;
        std::set<std::pair<std::string, std::string>> bare_typed;

        // elements: node (edge node)* (',' ...)*
        while (true) {
            NodeElement node = parse_node();
            bool had_edge = false;
            while (lexer_.peek().kind == Tok::Dash) {
                had_edge = true;
                EdgeElement edge = parse_edge();
                NodeElement next = parse_node();
                branch_ids.push_back(add_pattern(node, edge, next));
                node = next;
            }
            if (!had_edge && node.var && node.label) {
                bare_typed.insert({*node.var, *node.label});
            }
            if (lexer_.peek().kind == Tok::Comma) {
                lexer_.take();
                continue;
            }
            break;
        }

        if (is_keyword(lexer_.peek(), "WHERE")) {
            lexer_.take();
            branch_ids.push_back(parse_condition());
            while (is_keyword(lexer_.peek(), "AND")) {
                lexer_.take();
                branch_ids.push_back(parse_condition());
            }
        }

        expect_keyword("RETURN");
        const Token var = expect_name("a return variable");
        std::string ret_prop;
        bool has_prop = false;
        if (lexer_.peek().kind == Tok::Dot) {
            lexer_.take();
            ret_prop = expect_name("a property name").text;
            has_prop = true;
        }
        if (first_branch_) {
            answer_var_ = var.text;
            if (has_prop) return_property_ = ret_prop;
            for (const auto& [v, label] : bare_typed) {
                if (v == answer_var_) answer_type_ = label;
            }
            first_branch_ = false;
        }
        branches_.push_back(std::move(branch_ids));
    }

    NodeElement parse_node() {
        NodeElement node;
        node.pos = lexer_.peek().pos;
        expect(Tok::LParen, "'('");
        if (lexer_.peek().kind == Tok::Ident || lexer_.peek().kind == Tok::Backtick) {
            node.var = lexer_.take().text;
        }
        if (lexer_.peek().kind == Tok::Colon) {
            lexer_.take();
            node.label = expect_name("a type label").text;
        }
        if (lexer_.peek().kind == Tok::LBrace) {
            lexer_.take();
            const Token key = expect_name("an id key");
            if (key.text != "id" && key.text != "~id") {
                throw CypherSyntaxError(key.pos, "'id' or '~id'");
            }
            expect(Tok::Colon, "':'");
            const Token value = lexer_.take();
            if (value.kind != Tok::Str) throw CypherSyntaxError(value.pos, "a quoted entity id");
            node.const_id = value.text;
            expect(Tok::RBrace, "'}'");
        }
        expect(Tok::RParen, "')'");
        return node;
    }

    EdgeElement parse_edge() {
        expect(Tok::Dash, "'-'");
        expect(Tok::LBracket, "'['");
        EdgeElement edge;
        if (lexer_.peek().kind == Tok::Colon) {
            lexer_.take();
            edge.predicate = expect_name("a predicate").text;
            if (lexer_.peek().kind == Tok::Star) {
                lexer_.take();
                const Token lo = expect(Tok::Int, "a path length");
                expect(Tok::DotDot, "'..'");
                const Token hi = expect(Tok::Int, "a path length");
                edge.range = {std::stoi(lo.text), std::stoi(hi.text)};
            }
        } else {
            const Token var = expect_name("a predicate variable");
            edge.predicate = Variable{var.text};
            if (lexer_.peek().kind == Tok::Star) {
                throw CypherSyntaxError(lexer_.peek().pos, "']' (path ranges need a predicate label)");
            }
        }
        expect(Tok::RBracket, "']'");
        expect(Tok::Arrow, "'->'");
        return edge;
    }

    Term node_term(const NodeElement& node) {
        if (node.const_id) return EntityRef{*node.const_id};
        if (node.var) return Variable{*node.var};
        return Variable{"_anon" + std::to_string(anon_++)};
    }

    ConstraintId add_pattern(const NodeElement& from, const EdgeElement& edge, const NodeElement& to) {
        ScoredConstraint sc;
        sc.id = next_id_++;
        if (edge.range) {
            if (const auto* label = std::get_if<std::string>(&edge.predicate)) {
                sc.constraint = make_path(node_term(from), *label, node_term(to), edge.range->second);
            }
        } else {
            std::variant<std::string, Variable> pred = edge.predicate;
            sc.constraint = make_pattern(node_term(from), pred, node_term(to),
                                         from.const_id ? std::nullopt : from.label,
                                         to.const_id ? std::nullopt : to.label);
        }
        constraints_.push_back(sc);
        return sc.id;
    }

    ConstraintId parse_condition() {
        const Token anchor = expect_name("a variable");
        expect(Tok::Dot, "'.'");
        const Token prop = expect_name("a property name");
        const Token op_tok = expect(Tok::Op, "a comparison operator");
        const auto op = compare_op_from(op_tok.text);
        if (!op) throw CypherSyntaxError(op_tok.pos, "a comparison operator");

        const Token value = lexer_.take();
        Literal lit;
        switch (value.kind) {
            case Tok::Str: lit = Literal::str(value.text); break;
            case Tok::Int: lit = Literal::integer(std::stoll(value.text)); break;
            case Tok::Dec: lit = Literal::decimal(std::stod(value.text)); break;
            case Tok::Ident:
                if (upper(value.text) == "TRUE") lit = Literal::boolean(true);
                else if (upper(value.text) == "FALSE") lit = Literal::boolean(false);
                else throw CypherSyntaxError(value.pos, "a literal");
                break;
            default:
                throw CypherSyntaxError(value.pos, "a literal");
        }

        ScoredConstraint sc;
        sc.id = next_id_++;
        sc.constraint = make_value(anchor.text, prop.text, *op, std::move(lit));
        constraints_.push_back(sc);
        return sc.id;
    }

    Token expect(Tok kind, const char* what) {
        if (lexer_.peek().kind != kind) throw CypherSyntaxError(lexer_.peek().pos, what);
        return lexer_.take();
    }

    Token expect_name(const char* what) {
        if (lexer_.peek().kind != Tok::Ident && lexer_.peek().kind != Tok::Backtick) {
            throw CypherSyntaxError(lexer_.peek().pos, what);
        }
        return lexer_.take();
    }

    void expect_keyword(const char* kw) {
        if (!is_keyword(lexer_.peek(), kw)) {
            throw CypherSyntaxError(lexer_.peek().pos, std::string("'") + kw + "'");
        }
        lexer_.take();
    }

    void expect_end() {
        if (lexer_.peek().kind != Tok::End) throw CypherSyntaxError(lexer_.peek().pos, "end of query");
    }

    Lexer lexer_;
    std::vector<ScoredConstraint> constraints_;
    std::vector<std::vector<ConstraintId>> branches_;
    std::string answer_var_ = "x0";
    std::optional<std::string> answer_type_;
    std::optional<std::string> return_property_;
    bool first_branch_ = true;
    int next_id_ = 0;
    int anon_ = 0;
};

} // namespace

QueryPlan parse_cypher_subset(const std::string& text) {
    Parser parser(text);
    return parser.parse();
}

} // namespace cabq
