#pragma once

// SQL tokenizer. Feeds the syntax validator, identifier-based context
// pruning, and the ORDER BY sensitivity rule for result comparison.

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sqlscout/errors.hpp"

namespace sqlscout::sql {

enum class TokenKind { Identifier, Number, String, Blob, Punct, Param, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;   // identifiers: unquoted value; strings: unescaped body
    std::string upper;  // bare identifiers only, for keyword checks
    std::size_t offset = 0;
    bool quoted = false;

    bool is_kw(std::string_view kw) const {
        return kind == TokenKind::Identifier && !quoted && upper == kw;
    }
    bool is_punct(std::string_view p) const {
        return kind == TokenKind::Punct && text == p;
    }
};

struct LexIssue : Error {
    LexIssue(const std::string& what, std::size_t offset, std::size_t token_ordinal)
        : Error(what), offset(offset), token_ordinal(token_ordinal) {}
    std::size_t offset;
    std::size_t token_ordinal;  // 1-based position of the offending token
};

inline std::string to_upper_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Throws LexIssue on unterminated strings/comments or stray bytes.
inline std::vector<Token> tokenize(std::string_view sql) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = sql.size();
    auto is_ident_start = [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    };
    auto is_ident_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    };
    auto ordinal = [&] { return out.size() + 1; };

    while (i < n) {
        char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        // comments
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            std::size_t start = i;
            i += 2;
            while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
            if (i + 1 >= n)
                throw LexIssue("unterminated block comment", start, ordinal());
            i += 2;
            continue;
        }
        std::size_t start = i;
        // string literal
        if (c == '\'') {
            std::string body;
            ++i;
            bool closed = false;
            while (i < n) {
                if (sql[i] == '\'') {
                    if (i + 1 < n && sql[i + 1] == '\'') {
                        body += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                body += sql[i++];
            }
            if (!closed) throw LexIssue("unterminated string literal", start, ordinal());
            out.push_back(Token{TokenKind::String, body, "", start, true});
            continue;
        }
        // quoted identifiers: "x", `x`, [x]
        if (c == '"' || c == '`' || c == '[') {
            char close = c == '[' ? ']' : c;
            std::string body;
            ++i;
            bool closed = false;
            while (i < n) {
                if (sql[i] == close) {
                    if (close != ']' && i + 1 < n && sql[i + 1] == close) {
                        body += close;
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                body += sql[i++];
            }
            if (!closed)
                throw LexIssue("unterminated quoted identifier", start, ordinal());
            out.push_back(Token{TokenKind::Identifier, body, "", start, true});
            continue;
        }
        // blob literal x'...'
        if ((c == 'x' || c == 'X') && i + 1 < n && sql[i + 1] == '\'') {
            i += 2;
            std::string body;
            bool closed = false;
            while (i < n) {
                if (sql[i] == '\'') {
                    ++i;
                    closed = true;
                    break;
                }
                body += sql[i++];
            }
            if (!closed) throw LexIssue("unterminated blob literal", start, ordinal());
            out.push_back(Token{TokenKind::Blob, body, "", start, false});
            continue;
        }
        if (is_ident_start(c)) {
            while (i < n && is_ident_char(sql[i])) ++i;
            std::string text(sql.substr(start, i - start));
            out.push_back(Token{TokenKind::Identifier, text, to_upper_ascii(text), start, false});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            if (c == '0' && i + 1 < n && (sql[i + 1] == 'x' || sql[i + 1] == 'X')) {
                i += 2;
                while (i < n && std::isxdigit(static_cast<unsigned char>(sql[i]))) ++i;
            } else {
                while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                if (i < n && sql[i] == '.') {
                    ++i;
                    while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                }
                if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                    std::size_t save = i;
                    ++i;
                    if (i < n && (sql[i] == '+' || sql[i] == '-')) ++i;
                    if (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) {
                        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                    } else {
                        i = save;  // "1e" alone: let the parser complain
                    }
                }
            }
            out.push_back(Token{TokenKind::Number,
                                std::string(sql.substr(start, i - start)), "", start, false});
            continue;
        }
        // parameters
        if (c == '?') {
            ++i;
            while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
            out.push_back(Token{TokenKind::Param,
                                std::string(sql.substr(start, i - start)), "", start, false});
            continue;
        }
        if ((c == ':' || c == '@') && i + 1 < n && is_ident_start(sql[i + 1])) {
            ++i;
            while (i < n && is_ident_char(sql[i])) ++i;
            out.push_back(Token{TokenKind::Param,
                                std::string(sql.substr(start, i - start)), "", start, false});
            continue;
        }
        // multi-char operators, longest first
        static const std::string_view ops3[] = {"->>"};
        static const std::string_view ops2[] = {"||", "<<", ">>", "<=", ">=",
                                                "==", "!=", "<>", "->"};
        std::string_view rest = sql.substr(i);
        bool matched = false;
        for (auto op : ops3) {
            if (rest.starts_with(op)) {
                out.push_back(Token{TokenKind::Punct, std::string(op), "", start, false});
                i += op.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        for (auto op : ops2) {
            if (rest.starts_with(op)) {
                out.push_back(Token{TokenKind::Punct, std::string(op), "", start, false});
                i += op.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        static const std::string_view singles = "+-*/%&|~=<>(),.;";
        if (singles.find(c) != std::string_view::npos) {
            out.push_back(Token{TokenKind::Punct, std::string(1, c), "", start, false});
            ++i;
            continue;
        }
        throw LexIssue(std::string("unexpected character '") + c + "'", start, ordinal());
    }
    out.push_back(Token{TokenKind::End, "", "", n, false});
    return out;
}

// Every identifier token, lowercased, plus every dotted identifier chain
// ("a.b.c") joined as one entry. Used to decide which schema components a
// piece of SQL actually references.
inline std::set<std::string> identifier_index(std::string_view sql) {
    std::set<std::string> out;
    std::vector<Token> toks;
    try {
        toks = tokenize(sql);
    } catch (const LexIssue&) {
        return out;  // unlexable SQL references nothing reliably
    }
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != TokenKind::Identifier) continue;
        out.insert(to_lower_ascii(toks[i].text));
        std::string chain = to_lower_ascii(toks[i].text);
        std::size_t j = i;
        while (j + 2 < toks.size() && toks[j + 1].is_punct(".") &&
               toks[j + 2].kind == TokenKind::Identifier) {
            chain += "." + to_lower_ascii(toks[j + 2].text);
            out.insert(chain);
            j += 2;
        }
    }
    return out;
}

// True when the statement carries an ORDER BY at paren depth zero.
inline bool has_top_level_order_by(std::string_view sql) {
    std::vector<Token> toks;
    try {
        toks = tokenize(sql);
    } catch (const LexIssue&) {
        return false;
    }
    int depth = 0;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].is_punct("(")) ++depth;
        else if (toks[i].is_punct(")")) --depth;
        else if (depth == 0 && toks[i].is_kw("ORDER") && toks[i + 1].is_kw("BY"))
            return true;
    }
    return false;
}

}  // namespace sqlscout::sql
