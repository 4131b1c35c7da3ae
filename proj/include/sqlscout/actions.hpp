#pragma once

// Discrete action space for query construction and the strict line grammar
// the policy answers in. One line per action:
//
//   SelectUnusedColumn <table>.<column>
//   AddPredicateConstraint <table>.<column> [sketch...]
//   IntroduceJoin <table>
//   IntroduceJoin <table> ON <table>.<column> = <table>.<column>
//   ApplyAggregationFunction <FUNC> <table>.<column>
//   AddGroupByClause <table>.<column>
//   AddOrderingClause <table>.<column> <ASC|DESC>
//   AddHavingClause <FUNC> <table>.<column> [sketch...]
//
// <table> may be the fully-qualified name (db.schema.table) or the bare
// table name when unambiguous. Legality is structural: kind plus target
// column/table/join endpoints. Sketches, aggregate function and sort
// direction are free parameters the policy fills in.

#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sqlscout/errors.hpp"

namespace sqlscout {

enum class ActionKind {
    SelectUnusedColumn,
    AddPredicateConstraint,
    IntroduceJoin,
    ApplyAggregationFunction,
    AddGroupByClause,
    AddOrderingClause,
    AddHavingClause,
};

inline const char* to_string(ActionKind k) {
    switch (k) {
        case ActionKind::SelectUnusedColumn: return "SelectUnusedColumn";
        case ActionKind::AddPredicateConstraint: return "AddPredicateConstraint";
        case ActionKind::IntroduceJoin: return "IntroduceJoin";
        case ActionKind::ApplyAggregationFunction: return "ApplyAggregationFunction";
        case ActionKind::AddGroupByClause: return "AddGroupByClause";
        case ActionKind::AddOrderingClause: return "AddOrderingClause";
        case ActionKind::AddHavingClause: return "AddHavingClause";
    }
    return "?";
}

inline std::optional<ActionKind> action_kind_from_string(std::string_view s) {
    if (s == "SelectUnusedColumn") return ActionKind::SelectUnusedColumn;
    if (s == "AddPredicateConstraint") return ActionKind::AddPredicateConstraint;
    if (s == "IntroduceJoin") return ActionKind::IntroduceJoin;
    if (s == "ApplyAggregationFunction") return ActionKind::ApplyAggregationFunction;
    if (s == "AddGroupByClause") return ActionKind::AddGroupByClause;
    if (s == "AddOrderingClause") return ActionKind::AddOrderingClause;
    if (s == "AddHavingClause") return ActionKind::AddHavingClause;
    return std::nullopt;
}

inline constexpr std::array<const char*, 5> kAggregateFunctions = {"COUNT", "SUM", "AVG",
                                                                   "MAX", "MIN"};

inline bool is_aggregate_function(std::string_view f) {
    for (const char* k : kAggregateFunctions)
        if (f == k) return true;
    return false;
}

struct ColumnRef {
    std::string table;   // fully-qualified table name
    std::string column;  // bare column name
    std::string field_node;  // graph field node id, filled by the enumerator

    std::string qualified() const { return table + "." + column; }
    bool empty() const { return table.empty() && column.empty(); }

    bool operator==(const ColumnRef&) const = default;
};

// True when `seen` (possibly bare) refers to the fully-qualified `legal`.
inline bool table_name_matches(const std::string& legal_fqn, const std::string& seen) {
    return legal_fqn == seen || legal_fqn.ends_with("." + seen);
}

inline bool column_ref_matches(const ColumnRef& legal, const ColumnRef& seen) {
    return legal.column == seen.column && table_name_matches(legal.table, seen.table);
}

struct Action {
    ActionKind kind = ActionKind::SelectUnusedColumn;
    ColumnRef column;                 // primary target column
    std::string table;                // IntroduceJoin target table
    ColumnRef join_left, join_right;  // IntroduceJoin ON pair, may be empty
    std::string function;             // aggregate function name
    std::string direction;            // ASC | DESC
    std::string sketch;               // free-form constraint sketch

    bool operator==(const Action&) const = default;
};

// Structural identity; free parameters (sketch/function/direction) and the
// bare-vs-qualified table spelling do not participate.
inline bool actions_match(const Action& legal, const Action& seen) {
    if (legal.kind != seen.kind) return false;
    switch (legal.kind) {
        case ActionKind::IntroduceJoin:
            if (!table_name_matches(legal.table, seen.table)) return false;
            if (legal.join_left.empty() != seen.join_left.empty()) return false;
            if (!legal.join_left.empty()) {
                bool straight = column_ref_matches(legal.join_left, seen.join_left) &&
                                column_ref_matches(legal.join_right, seen.join_right);
                bool swapped = column_ref_matches(legal.join_left, seen.join_right) &&
                               column_ref_matches(legal.join_right, seen.join_left);
                if (!straight && !swapped) return false;
            }
            return true;
        default:
            return column_ref_matches(legal.column, seen.column);
    }
}

namespace detail {

inline std::optional<ColumnRef> split_column_ref(const std::string& dotted) {
    auto pos = dotted.rfind('.');
    if (pos == std::string::npos || pos == 0 || pos + 1 >= dotted.size()) return std::nullopt;
    return ColumnRef{dotted.substr(0, pos), dotted.substr(pos + 1), ""};
}

inline std::vector<std::string> split_words(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

}  // namespace detail

inline std::string render_action(const Action& a) {
    switch (a.kind) {
        case ActionKind::SelectUnusedColumn:
            return std::string("SelectUnusedColumn ") + a.column.qualified();
        case ActionKind::AddPredicateConstraint: {
            std::string s = "AddPredicateConstraint " + a.column.qualified();
            if (!a.sketch.empty()) s += " " + a.sketch;
            return s;
        }
        case ActionKind::IntroduceJoin: {
            std::string s = "IntroduceJoin " + a.table;
            if (!a.join_left.empty())
                s += " ON " + a.join_left.qualified() + " = " + a.join_right.qualified();
            return s;
        }
        case ActionKind::ApplyAggregationFunction:
            return "ApplyAggregationFunction " + (a.function.empty() ? "COUNT" : a.function) +
                   " " + a.column.qualified();
        case ActionKind::AddGroupByClause:
            return "AddGroupByClause " + a.column.qualified();
        case ActionKind::AddOrderingClause:
            return "AddOrderingClause " + a.column.qualified() + " " +
                   (a.direction.empty() ? "ASC" : a.direction);
        case ActionKind::AddHavingClause: {
            std::string s = "AddHavingClause " + (a.function.empty() ? "COUNT" : a.function) +
                            " " + a.column.qualified();
            if (!a.sketch.empty()) s += " " + a.sketch;
            return s;
        }
    }
    return "?";
}

// Parses one grammar line. Throws PolicyFault on anything unparseable.
inline Action parse_action_line(const std::string& line) {
    auto words = detail::split_words(line);
    if (words.empty()) throw PolicyFault("empty action response");
    auto kind = action_kind_from_string(words[0]);
    if (!kind) throw PolicyFault("unknown action kind \"" + words[0] + "\"");
    Action a;
    a.kind = *kind;
    auto need = [&](std::size_t i, const char* what) -> const std::string& {
        if (i >= words.size())
            throw PolicyFault(std::string("action response missing ") + what + ": \"" + line +
                              "\"");
        return words[i];
    };
    auto column_at = [&](std::size_t i, const char* what) {
        auto ref = detail::split_column_ref(need(i, what));
        if (!ref)
            throw PolicyFault(std::string("expected <table>.<column> for ") + what + ": \"" +
                              line + "\"");
        return *ref;
    };
    auto join_rest = [&](std::size_t from) {
        std::string s;
        for (std::size_t i = from; i < words.size(); ++i) {
            if (!s.empty()) s += " ";
            s += words[i];
        }
        return s;
    };
    switch (a.kind) {
        case ActionKind::SelectUnusedColumn:
            a.column = column_at(1, "target column");
            break;
        case ActionKind::AddPredicateConstraint:
            a.column = column_at(1, "target column");
            a.sketch = join_rest(2);
            break;
        case ActionKind::IntroduceJoin: {
            a.table = need(1, "target table");
            if (words.size() > 2) {
                if (words.size() < 6 || words[2] != "ON" || words[4] != "=")
                    throw PolicyFault("malformed join clause: \"" + line + "\"");
                a.join_left = column_at(3, "join endpoint");
                a.join_right = column_at(5, "join endpoint");
            }
            break;
        }
        case ActionKind::ApplyAggregationFunction:
            a.function = need(1, "aggregate function");
            if (!is_aggregate_function(a.function))
                throw PolicyFault("unknown aggregate function \"" + a.function + "\"");
            a.column = column_at(2, "target column");
            break;
        case ActionKind::AddGroupByClause:
            a.column = column_at(1, "target column");
            break;
        case ActionKind::AddOrderingClause: {
            a.column = column_at(1, "target column");
            const std::string& dir = need(2, "sort direction");
            if (dir != "ASC" && dir != "DESC")
                throw PolicyFault("sort direction must be ASC or DESC, got \"" + dir + "\"");
            a.direction = dir;
            break;
        }
        case ActionKind::AddHavingClause:
            a.function = need(1, "aggregate function");
            if (!is_aggregate_function(a.function))
                throw PolicyFault("unknown aggregate function \"" + a.function + "\"");
            a.column = column_at(2, "target column");
            a.sketch = join_rest(3);
            break;
    }
    return a;
}

}  // namespace sqlscout
