#pragma once

// Syntax validation for the embedded engine's SELECT dialect.
//
// Recursive-descent recognizer over the token stream: WITH/CTEs, compound
// selects, joins, subqueries, expressions with the usual precedence,
// aggregate and window invocations, CASE and CAST. Write statements are
// outside the dialect and rejected up front, as is multi-statement input.
// This is a recognizer, not an evaluator: name resolution is the engine's
// job at execution time.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqlscout/sql/lexer.hpp"

namespace sqlscout::sql {

struct SyntaxIssue {
    std::string message;
    std::size_t offset = 0;
    std::size_t token_ordinal = 0;  // 1-based
    bool multi_statement = false;

    std::string render() const {
        return "syntax error at token " + std::to_string(token_ordinal) + " (offset " +
               std::to_string(offset) + "): " + message;
    }
};

struct ParseCheck {
    bool ok = true;
    std::optional<SyntaxIssue> issue;
};

namespace detail {

class SelectParser {
public:
    explicit SelectParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    void parse_statement() {
        parse_select_stmt();
        if (cur().is_punct(";")) {
            advance();
            if (!at_end()) fail("multiple statements are not allowed", true);
        }
        if (!at_end()) fail("unexpected trailing input");
    }

private:
    struct Abort {
        SyntaxIssue issue;
    };

    [[noreturn]] void fail(const std::string& msg, bool multi = false) const {
        const Token& t = cur();
        std::string what = msg;
        if (t.kind != TokenKind::End) {
            what += " near \"" + (t.kind == TokenKind::String ? "'" + t.text + "'" : t.text) + "\"";
        } else {
            what += " at end of input";
        }
        throw Abort{SyntaxIssue{what, t.offset, pos_ + 1, multi}};
    }

    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t k = 1) const {
        return toks_[std::min(pos_ + k, toks_.size() - 1)];
    }
    bool at_end() const { return cur().kind == TokenKind::End; }
    void advance() {
        if (pos_ + 1 < toks_.size()) ++pos_;
    }

    bool accept_kw(std::string_view kw) {
        if (cur().is_kw(kw)) {
            advance();
            return true;
        }
        return false;
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail("expected " + std::string(kw));
    }
    bool accept_punct(std::string_view p) {
        if (cur().is_punct(p)) {
            advance();
            return true;
        }
        return false;
    }
    void expect_punct(std::string_view p) {
        if (!accept_punct(p)) fail("expected \"" + std::string(p) + "\"");
    }

    bool at_select_head() const {
        return cur().is_kw("SELECT") || cur().is_kw("VALUES") || cur().is_kw("WITH");
    }

    // identifiers that end an expression / alias position
    static bool reserved_follow(const Token& t) {
        static const std::set<std::string> kw = {
            "FROM",  "WHERE",  "GROUP",   "HAVING", "ORDER",  "LIMIT",  "OFFSET",
            "UNION", "EXCEPT", "INTERSECT", "ON",   "USING",  "JOIN",   "LEFT",
            "RIGHT", "FULL",   "INNER",   "CROSS",  "NATURAL", "AND",   "OR",
            "NOT",   "AS",     "WHEN",    "THEN",   "ELSE",   "END",    "CASE",
            "IN",    "IS",     "BETWEEN", "LIKE",   "GLOB",   "REGEXP", "MATCH",
            "ESCAPE", "COLLATE", "ISNULL", "NOTNULL", "ASC",  "DESC",   "NULLS",
            "WINDOW", "FILTER", "OVER",   "PARTITION", "RANGE", "ROWS", "GROUPS",
            "EXCLUDE", "SET",   "RETURNING", "BY", "INDEXED"};
        return t.kind == TokenKind::Identifier && !t.quoted && kw.contains(t.upper);
    }

    void parse_ident(const char* what) {
        if (cur().kind != TokenKind::Identifier) fail(std::string("expected ") + what);
        advance();
    }

    // name for aliases: identifier or string literal (SQLite accepts both)
    bool accept_alias() {
        if (accept_kw("AS")) {
            if (cur().kind == TokenKind::Identifier || cur().kind == TokenKind::String) {
                advance();
                return true;
            }
            fail("expected alias name after AS");
        }
        if (cur().kind == TokenKind::Identifier && !reserved_follow(cur()) && !cur().is_kw("SELECT")) {
            advance();
            return true;
        }
        if (cur().kind == TokenKind::String) {
            advance();
            return true;
        }
        return false;
    }

    void parse_select_stmt() {
        if (accept_kw("WITH")) {
            accept_kw("RECURSIVE");
            do {
                parse_ident("CTE name");
                if (accept_punct("(")) {
                    do parse_ident("column name");
                    while (accept_punct(","));
                    expect_punct(")");
                }
                expect_kw("AS");
                accept_kw("NOT");  // AS [NOT] MATERIALIZED
                accept_kw("MATERIALIZED");
                expect_punct("(");
                parse_select_stmt();
                expect_punct(")");
            } while (accept_punct(","));
        }
        parse_select_core();
        while (true) {
            if (accept_kw("UNION")) {
                accept_kw("ALL");
            } else if (accept_kw("INTERSECT") || accept_kw("EXCEPT")) {
                // no modifier
            } else {
                break;
            }
            parse_select_core();
        }
        if (accept_kw("ORDER")) {
            expect_kw("BY");
            do parse_ordering_term();
            while (accept_punct(","));
        }
        if (accept_kw("LIMIT")) {
            parse_expr();
            if (accept_kw("OFFSET") || accept_punct(",")) parse_expr();
        }
    }

    void parse_select_core() {
        if (accept_kw("VALUES")) {
            do {
                expect_punct("(");
                do parse_expr();
                while (accept_punct(","));
                expect_punct(")");
            } while (accept_punct(","));
            return;
        }
        expect_kw("SELECT");
        if (!accept_kw("DISTINCT")) accept_kw("ALL");
        do parse_result_column();
        while (accept_punct(","));
        if (accept_kw("FROM")) parse_join_clause();
        if (accept_kw("WHERE")) parse_expr();
        if (accept_kw("GROUP")) {
            expect_kw("BY");
            do parse_expr();
            while (accept_punct(","));
        }
        if (accept_kw("HAVING")) parse_expr();
        if (accept_kw("WINDOW")) {
            do {
                parse_ident("window name");
                expect_kw("AS");
                parse_window_spec();
            } while (accept_punct(","));
        }
    }

    void parse_result_column() {
        if (accept_punct("*")) return;
        // qualified star: ident (. ident)* . *
        if (cur().kind == TokenKind::Identifier) {
            std::size_t look = pos_;
            while (toks_[look].kind == TokenKind::Identifier &&
                   toks_[look + 1].is_punct(".")) {
                if (toks_[look + 2].is_punct("*")) {
                    pos_ = look + 3;
                    return;
                }
                if (toks_[look + 2].kind != TokenKind::Identifier) break;
                look += 2;
            }
        }
        parse_expr();
        accept_alias();
    }

    void parse_join_clause() {
        parse_table_or_subquery();
        while (true) {
            if (accept_punct(",")) {
                parse_table_or_subquery();
                continue;
            }
            bool natural = false;
            std::size_t save = pos_;
            if (accept_kw("NATURAL")) natural = true;
            bool joined = false;
            if (accept_kw("LEFT") || accept_kw("RIGHT") || accept_kw("FULL")) {
                accept_kw("OUTER");
                expect_kw("JOIN");
                joined = true;
            } else if (accept_kw("INNER") || accept_kw("CROSS")) {
                expect_kw("JOIN");
                joined = true;
            } else if (accept_kw("JOIN")) {
                joined = true;
            }
            if (!joined) {
                if (natural) pos_ = save;
                break;
            }
            parse_table_or_subquery();
            if (!natural) {
                if (accept_kw("ON")) {
                    parse_expr();
                } else if (accept_kw("USING")) {
                    expect_punct("(");
                    do parse_ident("column name");
                    while (accept_punct(","));
                    expect_punct(")");
                }
            }
        }
    }

    void parse_table_or_subquery() {
        if (accept_punct("(")) {
            if (at_select_head()) {
                parse_select_stmt();
                expect_punct(")");
                accept_alias();
            } else {
                parse_join_clause();
                expect_punct(")");
                accept_alias();
            }
            return;
        }
        if (cur().kind != TokenKind::Identifier) fail("expected table name");
        advance();
        while (accept_punct(".")) parse_ident("name after \".\"");
        if (accept_punct("(")) {  // table-valued function
            if (!accept_punct(")")) {
                do parse_expr();
                while (accept_punct(","));
                expect_punct(")");
            }
        }
        accept_alias();
        if (accept_kw("INDEXED")) {
            expect_kw("BY");
            parse_ident("index name");
        } else if (cur().is_kw("NOT") && peek().is_kw("INDEXED")) {
            advance();
            advance();
        }
    }

    void parse_ordering_term() {
        parse_expr();
        if (accept_kw("COLLATE")) parse_ident("collation name");
        if (!accept_kw("ASC")) accept_kw("DESC");
        if (accept_kw("NULLS")) {
            if (!accept_kw("FIRST") && !accept_kw("LAST")) fail("expected FIRST or LAST");
        }
    }

    // expression precedence ladder
    void parse_expr() { parse_or(); }

    void parse_or() {
        parse_and();
        while (accept_kw("OR")) parse_and();
    }

    void parse_and() {
        parse_not();
        while (accept_kw("AND")) parse_not();
    }

    void parse_not() {
        // prefix position only; postfix "x NOT NULL" lives in parse_comparison
        if (cur().is_kw("NOT")) {
            advance();
            parse_not();
            return;
        }
        parse_comparison();
    }

    void parse_comparison() {
        parse_relational();
        while (true) {
            if (accept_punct("=") || accept_punct("==") || accept_punct("!=") ||
                accept_punct("<>")) {
                parse_relational();
                continue;
            }
            if (accept_kw("IS")) {
                accept_kw("NOT");
                if (accept_kw("DISTINCT")) expect_kw("FROM");
                parse_relational();
                continue;
            }
            if (accept_kw("ISNULL") || accept_kw("NOTNULL")) continue;
            bool negated = false;
            if (cur().is_kw("NOT")) {
                if (peek().is_kw("NULL")) {
                    advance();
                    advance();
                    continue;
                }
                if (peek().is_kw("IN") || peek().is_kw("LIKE") || peek().is_kw("GLOB") ||
                    peek().is_kw("REGEXP") || peek().is_kw("MATCH") ||
                    peek().is_kw("BETWEEN")) {
                    advance();
                    negated = true;
                }
            }
            if (accept_kw("IN")) {
                if (accept_punct("(")) {
                    if (accept_punct(")")) continue;  // empty list
                    if (at_select_head()) {
                        parse_select_stmt();
                    } else {
                        do parse_expr();
                        while (accept_punct(","));
                    }
                    expect_punct(")");
                } else {
                    parse_ident("table name after IN");
                    while (accept_punct(".")) parse_ident("name after \".\"");
                }
                continue;
            }
            if (accept_kw("LIKE") || accept_kw("GLOB") || accept_kw("REGEXP") ||
                accept_kw("MATCH")) {
                parse_relational();
                if (accept_kw("ESCAPE")) parse_relational();
                continue;
            }
            if (accept_kw("BETWEEN")) {
                parse_relational();
                expect_kw("AND");
                parse_relational();
                continue;
            }
            if (negated) fail("expected IN, LIKE, GLOB, REGEXP, MATCH or BETWEEN after NOT");
            break;
        }
    }

    void parse_relational() {
        parse_bitwise();
        while (accept_punct("<") || accept_punct("<=") || accept_punct(">") ||
               accept_punct(">="))
            parse_bitwise();
    }

    void parse_bitwise() {
        parse_additive();
        while (accept_punct("&") || accept_punct("|") || accept_punct("<<") ||
               accept_punct(">>"))
            parse_additive();
    }

    void parse_additive() {
        parse_multiplicative();
        while (accept_punct("+") || accept_punct("-")) parse_multiplicative();
    }

    void parse_multiplicative() {
        parse_concat();
        while (accept_punct("*") || accept_punct("/") || accept_punct("%")) parse_concat();
    }

    void parse_concat() {
        parse_collate();
        while (accept_punct("||") || accept_punct("->") || accept_punct("->>"))
            parse_collate();
    }

    void parse_collate() {
        parse_unary();
        while (accept_kw("COLLATE")) parse_ident("collation name");
    }

    void parse_unary() {
        if (accept_punct("-") || accept_punct("+") || accept_punct("~")) {
            parse_unary();
            return;
        }
        parse_primary();
    }

    void parse_primary() {
        const Token& t = cur();
        switch (t.kind) {
            case TokenKind::Number:
            case TokenKind::String:
            case TokenKind::Blob:
            case TokenKind::Param:
                advance();
                return;
            default:
                break;
        }
        if (t.is_kw("NULL") || t.is_kw("TRUE") || t.is_kw("FALSE") ||
            t.is_kw("CURRENT_TIME") || t.is_kw("CURRENT_DATE") ||
            t.is_kw("CURRENT_TIMESTAMP")) {
            advance();
            return;
        }
        if (accept_kw("CASE")) {
            if (!cur().is_kw("WHEN")) parse_expr();
            if (!cur().is_kw("WHEN")) fail("expected WHEN in CASE expression");
            while (accept_kw("WHEN")) {
                parse_expr();
                expect_kw("THEN");
                parse_expr();
            }
            if (accept_kw("ELSE")) parse_expr();
            expect_kw("END");
            return;
        }
        if (accept_kw("CAST")) {
            expect_punct("(");
            parse_expr();
            expect_kw("AS");
            parse_type_name();
            expect_punct(")");
            return;
        }
        if (accept_kw("EXISTS")) {
            expect_punct("(");
            if (!at_select_head()) fail("expected SELECT inside EXISTS");
            parse_select_stmt();
            expect_punct(")");
            return;
        }
        if (accept_punct("(")) {
            if (at_select_head()) {
                parse_select_stmt();
            } else {
                do parse_expr();
                while (accept_punct(","));
            }
            expect_punct(")");
            return;
        }
        if (t.kind == TokenKind::Identifier) {
            advance();
            if (cur().is_punct("(")) {
                parse_function_tail();
                return;
            }
            while (accept_punct(".")) parse_ident("name after \".\"");
            return;
        }
        fail("expected expression");
    }

    void parse_function_tail() {
        expect_punct("(");
        if (accept_punct("*")) {
            expect_punct(")");
        } else if (accept_punct(")")) {
            // no arguments
        } else {
            accept_kw("DISTINCT");
            do parse_expr();
            while (accept_punct(","));
            if (accept_kw("ORDER")) {  // aggregate ORDER BY, e.g. group_concat
                expect_kw("BY");
                do parse_ordering_term();
                while (accept_punct(","));
            }
            expect_punct(")");
        }
        if (accept_kw("FILTER")) {
            expect_punct("(");
            expect_kw("WHERE");
            parse_expr();
            expect_punct(")");
        }
        if (accept_kw("OVER")) {
            if (cur().is_punct("(")) parse_window_spec();
            else parse_ident("window name");
        }
    }

    void parse_window_spec() {
        expect_punct("(");
        if (cur().kind == TokenKind::Identifier && !reserved_follow(cur()))
            advance();  // base window
        if (accept_kw("PARTITION")) {
            expect_kw("BY");
            do parse_expr();
            while (accept_punct(","));
        }
        if (accept_kw("ORDER")) {
            expect_kw("BY");
            do parse_ordering_term();
            while (accept_punct(","));
        }
        if (accept_kw("RANGE") || accept_kw("ROWS") || accept_kw("GROUPS")) {
            if (accept_kw("BETWEEN")) {
                parse_frame_bound();
                expect_kw("AND");
                parse_frame_bound();
            } else {
                parse_frame_bound();
            }
            if (accept_kw("EXCLUDE")) {
                if (accept_kw("NO")) expect_kw("OTHERS");
                else if (accept_kw("CURRENT")) expect_kw("ROW");
                else if (!accept_kw("GROUP") && !accept_kw("TIES"))
                    fail("expected frame exclusion");
            }
        }
        expect_punct(")");
    }

    void parse_frame_bound() {
        if (accept_kw("UNBOUNDED")) {
            if (!accept_kw("PRECEDING") && !accept_kw("FOLLOWING"))
                fail("expected PRECEDING or FOLLOWING");
            return;
        }
        if (accept_kw("CURRENT")) {
            expect_kw("ROW");
            return;
        }
        parse_expr();
        if (!accept_kw("PRECEDING") && !accept_kw("FOLLOWING"))
            fail("expected PRECEDING or FOLLOWING");
    }

    void parse_type_name() {
        if (cur().kind != TokenKind::Identifier) fail("expected type name");
        advance();
        while (cur().kind == TokenKind::Identifier && !reserved_follow(cur())) advance();
        if (accept_punct("(")) {
            accept_punct("-") || accept_punct("+");
            if (cur().kind != TokenKind::Number) fail("expected numeric type argument");
            advance();
            if (accept_punct(",")) {
                accept_punct("-") || accept_punct("+");
                if (cur().kind != TokenKind::Number) fail("expected numeric type argument");
                advance();
            }
            expect_punct(")");
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    friend ParseCheck run_parse_check(std::string_view sql);
};

inline ParseCheck run_parse_check(std::string_view sql) {
    std::vector<Token> toks;
    try {
        toks = tokenize(sql);
    } catch (const LexIssue& e) {
        return ParseCheck{false, SyntaxIssue{e.what(), e.offset, e.token_ordinal, false}};
    }
    if (toks.size() == 1)  // just End
        return ParseCheck{false, SyntaxIssue{"empty statement", 0, 1, false}};
    SelectParser p(std::move(toks));
    if (!p.at_select_head()) {
        return ParseCheck{false, SyntaxIssue{"expected a SELECT, VALUES or WITH statement",
                                             p.cur().offset, 1, false}};
    }
    try {
        p.parse_statement();
    } catch (const SelectParser::Abort& a) {
        return ParseCheck{false, a.issue};
    }
    return ParseCheck{true, std::nullopt};
}

}  // namespace detail

// ok, or a syntax issue carrying the 1-based token ordinal and byte offset.
// Multi-statement input is rejected with issue.multi_statement set.
inline ParseCheck parse_check(std::string_view sql) { return detail::run_parse_check(sql); }

}  // namespace sqlscout::sql
