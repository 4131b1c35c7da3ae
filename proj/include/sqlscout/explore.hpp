#pragma once

// Exploration stage: policy-guided tree search over the schema graph.
//
// Each iteration expands one node (selection and expansion are a single
// policy step), asks the policy to complete the node's partial query into
// executable SQL, validates it through the syntax/execution/classification
// layers, and backpropagates the outcome. Validated queries become
// (fragment, SQL, description) triplets; failures raise failure counts
// along the path, and nodes at the failure threshold stop being offered.
//
// Node selection is deterministic: candidates order by ascending
// failure_count, then ascending visit_count, then creation order, and the
// first is expanded. Up to candidate_fanout frontier nodes are summarized
// in the prompt for context.

#include <chrono>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlscout/actions.hpp"
#include "sqlscout/embedding.hpp"
#include "sqlscout/errors.hpp"
#include "sqlscout/gateway.hpp"
#include "sqlscout/knowledge.hpp"
#include "sqlscout/schema_graph.hpp"
#include "sqlscout/sql/executor.hpp"
#include "sqlscout/sql/parser.hpp"

namespace sqlscout {

// name equals "id", or ends in "id"/"_id" (case-insensitive), or declared key
inline bool is_key_column_name(std::string_view name, bool declared_key = false) {
    if (declared_key) return true;
    std::string lower = sql::to_lower_ascii(name);
    return lower == "id" || lower.ends_with("id");
}

// --- flattened table/column view over the graph ----------------------------

struct ColumnEntry {
    std::string name;
    std::string type;
    std::string description;
    std::vector<std::string> samples;
    bool is_key = false;
    std::string field_node;  // graph node id
};

struct TableEntry {
    std::string table_node;  // graph node id
    std::string fullname;
    std::string group_node;  // empty when ungrouped
    std::vector<ColumnEntry> columns;
};

class GraphView {
public:
    explicit GraphView(const SchemaGraph& graph) : graph_(&graph) {
        for (const auto& [id, node] : graph.nodes()) {
            if (node.kind != NodeKind::Table) continue;
            TableEntry t;
            t.table_node = id;
            t.fullname = node.fullname;
            for (const GraphEdge* e : graph.out_edges(id)) {
                if (e->kind == EdgeKind::HasUniqueField) {
                    t.columns.push_back(make_column(graph.at(e->to)));
                } else if (e->kind == EdgeKind::UsesFieldGroup) {
                    t.group_node = e->to;
                    for (const GraphEdge* ge : graph.out_edges(e->to))
                        if (ge->kind == EdgeKind::HasField)
                            t.columns.push_back(make_column(graph.at(ge->to)));
                }
            }
            order_.push_back(t.fullname);
            tables_.emplace(t.fullname, std::move(t));
        }
    }

    const SchemaGraph& graph() const { return *graph_; }

    std::vector<const TableEntry*> tables() const {
        std::vector<const TableEntry*> out;
        for (const auto& f : order_) out.push_back(&tables_.at(f));
        return out;
    }

    // exact fully-qualified match, else unique bare-name suffix match
    const TableEntry* find_table(const std::string& name) const {
        auto it = tables_.find(name);
        if (it != tables_.end()) return &it->second;
        const TableEntry* found = nullptr;
        for (const auto& [fqn, t] : tables_) {
            if (table_name_matches(fqn, name)) {
                if (found) return nullptr;  // ambiguous
                found = &t;
            }
        }
        return found;
    }

    const ColumnEntry* find_column(const TableEntry& t, const std::string& column) const {
        for (const auto& c : t.columns)
            if (c.name == column) return &c;
        return nullptr;
    }

private:
    static ColumnEntry make_column(const GraphNode& n) {
        return ColumnEntry{n.name, n.data_type, n.description, n.sample_data,
                           is_key_column_name(n.name, n.is_key), n.id};
    }

    const SchemaGraph* graph_;
    std::vector<std::string> order_;  // table fullnames in graph order
    std::map<std::string, TableEntry> tables_;
};

// --- query state ------------------------------------------------------------

struct QueryState {
    std::vector<Action> actions;
    std::vector<ColumnRef> selected_columns;
    std::vector<std::string> joined_tables;  // fullnames, join order
    int constraint_count = 0;
    bool has_aggregation = false;
    bool has_group_by = false;

    std::vector<ColumnRef> aggregated_columns;
    std::vector<ColumnRef> group_by_columns;
    std::vector<ColumnRef> ordered_columns;

    bool operator==(const QueryState&) const = default;

    bool table_joined(const std::string& fullname) const {
        for (const auto& t : joined_tables)
            if (t == fullname) return true;
        return false;
    }

    bool column_selected(const ColumnRef& c) const {
        for (const auto& s : selected_columns)
            if (s.table == c.table && s.column == c.column) return true;
        return false;
    }

    // child state = parent state + one action
    static QueryState extend(const QueryState& parent, const Action& a) {
        QueryState s = parent;
        s.actions.push_back(a);
        auto join_if_new = [&](const std::string& t) {
            if (!t.empty() && !s.table_joined(t)) s.joined_tables.push_back(t);
        };
        switch (a.kind) {
            case ActionKind::SelectUnusedColumn:
                join_if_new(a.column.table);
                if (!s.column_selected(a.column)) s.selected_columns.push_back(a.column);
                break;
            case ActionKind::AddPredicateConstraint:
                ++s.constraint_count;
                break;
            case ActionKind::IntroduceJoin:
                join_if_new(a.table);
                break;
            case ActionKind::ApplyAggregationFunction:
                s.has_aggregation = true;
                s.aggregated_columns.push_back(a.column);
                break;
            case ActionKind::AddGroupByClause:
                s.has_group_by = true;
                s.group_by_columns.push_back(a.column);
                break;
            case ActionKind::AddOrderingClause:
                s.ordered_columns.push_back(a.column);
                break;
            case ActionKind::AddHavingClause:
                break;
        }
        return s;
    }
};

// flags and derived lists must be reproducible from the action sequence
inline bool query_state_consistent(const QueryState& s) {
    QueryState replay;
    for (const auto& a : s.actions) replay = QueryState::extend(replay, a);
    return replay == s;
}

// --- tree --------------------------------------------------------------------

struct ExplorationNode {
    std::string id;
    std::string parent_id;  // empty for root
    QueryState state;
    int visit_count = 0;
    int failure_count = 0;
    std::vector<std::string> success_triplets;
    int depth = 0;
    int seq = 0;  // creation order
};

class ExplorationTree {
public:
    ExplorationTree() {
        ExplorationNode root;
        root.id = "n0";
        nodes_.push_back(std::move(root));
        by_id_["n0"] = 0;
    }

    ExplorationNode& root() { return nodes_.front(); }
    const ExplorationNode& root() const { return nodes_.front(); }

    ExplorationNode& at(const std::string& id) {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) throw Error("tree: unknown node \"" + id + "\"");
        return nodes_[it->second];
    }
    const ExplorationNode& at(const std::string& id) const {
        return const_cast<ExplorationTree*>(this)->at(id);
    }

    ExplorationNode& add_child(const std::string& parent_id, QueryState state) {
        ExplorationNode& parent = at(parent_id);
        ExplorationNode child;
        child.seq = static_cast<int>(nodes_.size());
        child.id = "n" + std::to_string(child.seq);
        child.parent_id = parent_id;
        child.depth = parent.depth + 1;
        child.state = std::move(state);
        by_id_[child.id] = nodes_.size();
        nodes_.push_back(std::move(child));
        return nodes_.back();
    }

    // node itself first, root last
    std::vector<ExplorationNode*> path_to_root(const std::string& id) {
        std::vector<ExplorationNode*> out;
        ExplorationNode* n = &at(id);
        while (true) {
            out.push_back(n);
            if (n->parent_id.empty()) break;
            n = &at(n->parent_id);
        }
        return out;
    }

    std::size_t size() const { return nodes_.size(); }
    const std::deque<ExplorationNode>& nodes() const { return nodes_; }
    std::deque<ExplorationNode>& nodes() { return nodes_; }

private:
    std::deque<ExplorationNode> nodes_;  // stable references
    std::unordered_map<std::string, std::size_t> by_id_;
};

// --- legality ----------------------------------------------------------------

inline std::vector<Action> enumerate_legal_actions(const QueryState& state,
                                                   const GraphView& view) {
    std::vector<Action> out;
    auto tables = view.tables();

    // SelectUnusedColumn: before any table is in play, any column of any
    // table starts the query; afterwards, unselected columns of joined
    // tables, with key columns always on offer.
    if (state.joined_tables.empty()) {
        for (const TableEntry* t : tables)
            for (const auto& c : t->columns)
                out.push_back(Action{.kind = ActionKind::SelectUnusedColumn,
                                     .column = ColumnRef{t->fullname, c.name, c.field_node}});
    } else {
        for (const auto& fqn : state.joined_tables) {
            const TableEntry* t = view.find_table(fqn);
            if (!t) continue;
            for (const auto& c : t->columns) {
                ColumnRef ref{t->fullname, c.name, c.field_node};
                if (!state.column_selected(ref) || c.is_key)
                    out.push_back(Action{.kind = ActionKind::SelectUnusedColumn,
                                         .column = std::move(ref)});
            }
        }
    }

    // AddPredicateConstraint: any column of a joined table
    for (const auto& fqn : state.joined_tables) {
        const TableEntry* t = view.find_table(fqn);
        if (!t) continue;
        for (const auto& c : t->columns)
            out.push_back(Action{.kind = ActionKind::AddPredicateConstraint,
                                 .column = ColumnRef{t->fullname, c.name, c.field_node}});
    }

    // IntroduceJoin: root picks a base table; afterwards a new table needs a
    // shared key column with some joined table, or a shared field group.
    if (state.joined_tables.empty()) {
        for (const TableEntry* t : tables)
            out.push_back(Action{.kind = ActionKind::IntroduceJoin, .table = t->fullname});
    } else {
        for (const TableEntry* cand : tables) {
            if (state.table_joined(cand->fullname)) continue;
            Action join;
            bool found = false;
            for (const auto& fqn : state.joined_tables) {
                const TableEntry* joined = view.find_table(fqn);
                if (!joined) continue;
                std::vector<std::pair<std::string, bool>> common;  // name, keyish
                for (const auto& c : joined->columns) {
                    const ColumnEntry* other = view.find_column(*cand, c.name);
                    if (other) common.emplace_back(c.name, c.is_key || other->is_key);
                }
                std::sort(common.begin(), common.end());
                std::string pick;
                for (const auto& [name, keyish] : common)
                    if (keyish) {
                        pick = name;
                        break;
                    }
                bool same_group =
                    !cand->group_node.empty() && cand->group_node == joined->group_node;
                if (pick.empty() && same_group && !common.empty()) pick = common.front().first;
                if (pick.empty()) continue;
                const ColumnEntry* lc = view.find_column(*joined, pick);
                const ColumnEntry* rc = view.find_column(*cand, pick);
                join = Action{.kind = ActionKind::IntroduceJoin,
                              .table = cand->fullname,
                              .join_left = ColumnRef{joined->fullname, pick, lc->field_node},
                              .join_right = ColumnRef{cand->fullname, pick, rc->field_node}};
                found = true;
                break;
            }
            if (found) out.push_back(std::move(join));
        }
    }

    // ApplyAggregationFunction: a selected, not yet aggregated column
    for (const auto& c : state.selected_columns) {
        bool done = false;
        for (const auto& a : state.aggregated_columns)
            if (a.table == c.table && a.column == c.column) done = true;
        if (!done)
            out.push_back(Action{.kind = ActionKind::ApplyAggregationFunction,
                                 .column = c,
                                 .function = "COUNT"});
    }

    // AddGroupByClause: aggregation present, target a selected non-aggregated
    // column not already grouped
    if (state.has_aggregation) {
        for (const auto& c : state.selected_columns) {
            bool aggregated = false, grouped = false;
            for (const auto& a : state.aggregated_columns)
                if (a.table == c.table && a.column == c.column) aggregated = true;
            for (const auto& gcol : state.group_by_columns)
                if (gcol.table == c.table && gcol.column == c.column) grouped = true;
            if (!aggregated && !grouped)
                out.push_back(Action{.kind = ActionKind::AddGroupByClause, .column = c});
        }
    }

    // AddOrderingClause: a selected column not already ordered
    for (const auto& c : state.selected_columns) {
        bool ordered = false;
        for (const auto& o : state.ordered_columns)
            if (o.table == c.table && o.column == c.column) ordered = true;
        if (!ordered)
            out.push_back(Action{.kind = ActionKind::AddOrderingClause,
                                 .column = c,
                                 .direction = "ASC"});
    }

    // AddHavingClause: group-by present, filter on an aggregated column
    if (state.has_group_by) {
        for (const auto& c : state.aggregated_columns)
            out.push_back(Action{.kind = ActionKind::AddHavingClause,
                                 .column = c,
                                 .function = "COUNT"});
    }

    return out;
}

inline std::vector<Action> enumerate_legal_actions(const ExplorationNode& node,
                                                   const GraphView& view) {
    return enumerate_legal_actions(node.state, view);
}

// --- outcomes ----------------------------------------------------------------

enum class SimStatus { SyntaxError, ExecutionError, EmptyResult, TrivialResult, Success };

inline const char* to_string(SimStatus s) {
    switch (s) {
        case SimStatus::SyntaxError: return "SyntaxError";
        case SimStatus::ExecutionError: return "ExecutionError";
        case SimStatus::EmptyResult: return "EmptyResult";
        case SimStatus::TrivialResult: return "TrivialResult";
        case SimStatus::Success: return "Success";
    }
    return "?";
}

struct SimulationOutcome {
    SimStatus status = SimStatus::ExecutionError;
    std::string sql;
    std::string description;
    std::string error_detail;

    bool success() const { return status == SimStatus::Success; }
};

struct ExplorationConfig {
    int target_triplets = 50;
    int max_iterations = 200;
    int candidate_fanout = 4;
    int failure_threshold = 3;
    int row_limit = 100;
    std::chrono::milliseconds exec_timeout{5000};
    double temperature = 0.7;
    std::int64_t provenance_epoch = 0;  // created_at stamp; 0 keeps runs reproducible

    void validate() const {
        if (target_triplets <= 0 || max_iterations <= 0 || candidate_fanout <= 0 ||
            failure_threshold <= 0 || row_limit <= 0)
            throw Error("exploration config: all limits must be positive");
    }
};

// --- prompts -----------------------------------------------------------------

namespace detail {

inline std::string strip_code_fences(const std::string& text) {
    std::string s = text;
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    auto last = s.find_last_not_of(" \t\r\n");
    s = s.substr(first, last - first + 1);
    if (s.starts_with("```")) {
        auto nl = s.find('\n');
        if (nl != std::string::npos) s = s.substr(nl + 1);
        if (auto fence = s.rfind("```"); fence != std::string::npos) s = s.substr(0, fence);
        auto b = s.find_first_not_of(" \t\r\n");
        auto e = s.find_last_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        s = s.substr(b, e - b + 1);
    }
    return s;
}

inline std::string render_query_state(const QueryState& s) {
    std::string out;
    out += "actions so far:";
    if (s.actions.empty()) out += " (none)";
    out += "\n";
    for (const auto& a : s.actions) out += "  - " + render_action(a) + "\n";
    out += "selected columns:";
    for (const auto& c : s.selected_columns) out += " " + c.qualified();
    if (s.selected_columns.empty()) out += " (none)";
    out += "\njoined tables:";
    for (const auto& t : s.joined_tables) out += " " + t;
    if (s.joined_tables.empty()) out += " (none)";
    out += "\nconstraints: " + std::to_string(s.constraint_count);
    out += s.has_aggregation ? ", aggregation present" : "";
    out += s.has_group_by ? ", group-by present" : "";
    out += "\n";
    return out;
}

// Simplified JSON structure of the reachable schema: joined tables plus
// every table a further join could reach (all tables when nothing is
// joined yet). Feedback counts surface prior successes per column.
inline nlohmann::json reachable_schema_json(const QueryState& s, const GraphView& view) {
    nlohmann::json tables = nlohmann::json::array();
    auto add_table = [&](const TableEntry& t, bool joined) {
        nlohmann::json cols = nlohmann::json::array();
        for (const auto& c : t.columns) {
            nlohmann::json jc{{"name", c.name}, {"type", c.type}};
            if (!c.description.empty()) jc["description"] = c.description;
            if (!c.samples.empty()) jc["samples"] = c.samples;
            std::size_t fb = view.graph().feedback_for(c.field_node).size();
            if (fb > 0) jc["validated_examples"] = fb;
            cols.push_back(std::move(jc));
        }
        tables.push_back(nlohmann::json{
            {"table", t.fullname}, {"joined", joined}, {"columns", std::move(cols)}});
    };
    if (s.joined_tables.empty()) {
        for (const TableEntry* t : view.tables()) add_table(*t, false);
    } else {
        std::set<std::string> seen;
        for (const auto& fqn : s.joined_tables) {
            if (const TableEntry* t = view.find_table(fqn)) {
                add_table(*t, true);
                seen.insert(fqn);
            }
        }
        for (const TableEntry* t : view.tables())
            if (!seen.contains(t->fullname)) add_table(*t, false);
    }
    return nlohmann::json{{"tables", std::move(tables)}};
}

inline std::string render_fragment(const QueryState& s) {
    std::string out = "tables:";
    for (const auto& t : s.joined_tables) out += " " + t;
    out += "\ncolumns:";
    for (const auto& c : s.selected_columns) out += " " + c.qualified();
    for (const auto& a : s.actions) {
        if (a.kind == ActionKind::IntroduceJoin && !a.join_left.empty())
            out += "\njoin: " + a.join_left.qualified() + " = " + a.join_right.qualified();
        if (a.kind == ActionKind::AddPredicateConstraint)
            out += "\nconstraint on " + a.column.qualified() +
                   (a.sketch.empty() ? "" : " (" + a.sketch + ")");
        if (a.kind == ActionKind::ApplyAggregationFunction)
            out += "\naggregate: " + a.function + "(" + a.column.qualified() + ")";
        if (a.kind == ActionKind::AddGroupByClause)
            out += "\ngroup by " + a.column.qualified();
        if (a.kind == ActionKind::AddOrderingClause)
            out += "\norder by " + a.column.qualified() + " " + a.direction;
        if (a.kind == ActionKind::AddHavingClause)
            out += "\nhaving " + a.function + "(" + a.column.qualified() + ")" +
                   (a.sketch.empty() ? "" : " " + a.sketch);
    }
    out += "\n";
    return out;
}

}  // namespace detail

// --- selection + expansion -----------------------------------------------------

struct ExpandStep {
    ExplorationNode* child = nullptr;
    bool frontier_exhausted = false;
    std::vector<std::string> candidate_ids;  // offered frontier, best first
    std::string expanded_node;
    std::string fault;  // policy fault note when the step was skipped
};

inline std::vector<ExplorationNode*> exploration_candidates(ExplorationTree& tree,
                                                            const GraphView& view,
                                                            const ExplorationConfig& config) {
    std::vector<ExplorationNode*> candidates;
    for (auto& n : tree.nodes()) {
        if (n.failure_count >= config.failure_threshold) continue;
        if (enumerate_legal_actions(n.state, view).empty()) continue;
        candidates.push_back(&n);
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const ExplorationNode* a, const ExplorationNode* b) {
                  if (a->failure_count != b->failure_count)
                      return a->failure_count < b->failure_count;
                  if (a->visit_count != b->visit_count) return a->visit_count < b->visit_count;
                  return a->seq < b->seq;
              });
    return candidates;
}

inline ExpandStep select_and_expand(ExplorationTree& tree, const GraphView& view,
                                    Gateway& gateway, const ExplorationConfig& config) {
    ExpandStep step;
    auto candidates = exploration_candidates(tree, view, config);
    if (candidates.empty()) {
        step.frontier_exhausted = true;
        return step;
    }
    std::size_t fanout = std::min<std::size_t>(candidates.size(),
                                               static_cast<std::size_t>(config.candidate_fanout));
    for (std::size_t i = 0; i < fanout; ++i) step.candidate_ids.push_back(candidates[i]->id);

    ExplorationNode* target = candidates.front();
    step.expanded_node = target->id;
    auto legal = enumerate_legal_actions(target->state, view);

    std::string user;
    user += "Current query state (node " + target->id + "):\n";
    user += detail::render_query_state(target->state);
    user += "node failures: " + std::to_string(target->failure_count) +
            ", visits: " + std::to_string(target->visit_count) + "\n";
    user += "\nReachable schema:\n" +
            detail::reachable_schema_json(target->state, view).dump(2) + "\n";
    if (fanout > 1) {
        user += "\nOther frontier nodes (for context):\n";
        for (std::size_t i = 1; i < fanout; ++i) {
            const ExplorationNode* n = candidates[i];
            user += "  " + n->id + ": depth " + std::to_string(n->depth) + ", visits " +
                    std::to_string(n->visit_count) + ", failures " +
                    std::to_string(n->failure_count) + "\n";
        }
    }
    user += "\nLegal actions (answer with exactly one of these lines, filling in any "
            "free parts):\n";
    for (const auto& a : legal) user += render_action(a) + "\n";

    PolicyRequest request{RequestKind::ActionSelection,
                          "You are exploring a relational database to build useful, "
                          "validated example queries. Favor columns with documentation or "
                          "recorded examples, and avoid combinations that keep failing.",
                          user, config.temperature};

    Action chosen;
    bool ok = false;
    for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
        std::string response;
        try {
            response = gateway.complete(request);
            chosen = parse_action_response(response, legal);
            ok = true;
        } catch (const PolicyFault& e) {
            step.fault = e.what();
            request.user += "\nYour previous answer was rejected: " + std::string(e.what()) +
                            "\nAnswer with exactly one legal action line.";
        }
    }
    if (!ok) {
        // skip the step: negative mark on the offending node, visits along
        // its path so iteration accounting stays exact
        target->failure_count += 1;
        for (ExplorationNode* n : tree.path_to_root(target->id)) n->visit_count += 1;
        return step;
    }
    step.fault.clear();
    step.child = &tree.add_child(target->id, QueryState::extend(target->state, chosen));
    return step;
}

// --- simulation -----------------------------------------------------------------

inline SimulationOutcome simulate(const ExplorationNode& node, const GraphView& view,
                                  Gateway& gateway, sql::Executor& executor,
                                  const ExplorationConfig& config) {
    SimulationOutcome out;

    std::string user;
    user += "Write one executable SQL SELECT statement for the schema fragment below. ";
    user += "Stay consistent with the recorded structure. Prioritize using tables and "
            "columns that have associated documentation or comments. Respond with SQL "
            "only.\n\n";
    user += "Fragment:\n" + detail::render_fragment(node.state);
    user += "\nSchema detail:\n" +
            detail::reachable_schema_json(node.state, view).dump(2) + "\n";

    std::string sqltext = detail::strip_code_fences(gateway.complete(
        PolicyRequest{RequestKind::SqlCompletion,
                      "You are an expert SQL data analyst completing partial queries.",
                      user, config.temperature}));
    out.sql = sqltext;

    auto check = sql::parse_check(sqltext);
    if (!check.ok) {
        out.status = SimStatus::SyntaxError;
        out.error_detail = check.issue->render();
        return out;
    }

    sql::ExecutionResult result;
    try {
        result = executor.execute(sqltext, config.row_limit, config.exec_timeout);
    } catch (const SqlError& e) {
        out.status = SimStatus::ExecutionError;
        out.error_detail = e.what();
        return out;
    }

    switch (sql::classify(result, sqltext)) {
        case sql::ResultClass::Empty:
            out.status = SimStatus::EmptyResult;
            return out;
        case sql::ResultClass::Trivial:
            out.status = SimStatus::TrivialResult;
            return out;
        default:
            break;
    }

    std::string desc_user =
        "Given this schema fragment and validated SQL query, write one concise natural "
        "language sentence describing what the query retrieves. Respond with the "
        "sentence only.\n\nFragment:\n" +
        detail::render_fragment(node.state) + "\nSQL:\n" + sqltext + "\n";
    out.description = detail::strip_code_fences(gateway.complete(
        PolicyRequest{RequestKind::NlDescription,
                      "You describe SQL queries in plain language.", desc_user,
                      config.temperature}));
    out.status = SimStatus::Success;
    return out;
}

// --- backpropagation -------------------------------------------------------------

// Entity node ids a state touches: joined tables plus every referenced column.
inline std::vector<std::string> entity_nodes_of(const QueryState& state,
                                                const GraphView& view) {
    std::set<std::string> ids;
    for (const auto& fqn : state.joined_tables)
        if (const TableEntry* t = view.find_table(fqn)) ids.insert(t->table_node);
    auto add_col = [&](const ColumnRef& c) {
        if (!c.field_node.empty()) ids.insert(c.field_node);
    };
    for (const auto& c : state.selected_columns) add_col(c);
    for (const auto& a : state.actions) {
        add_col(a.column);
        add_col(a.join_left);
        add_col(a.join_right);
    }
    return {ids.begin(), ids.end()};
}

inline void backpropagate(ExplorationTree& tree, SchemaGraph& graph, const GraphView& view,
                          const std::string& node_id, const SimulationOutcome& outcome,
                          const std::string& triplet_id = "") {
    auto path = tree.path_to_root(node_id);
    for (ExplorationNode* n : path) n->visit_count += 1;
    if (outcome.success()) {
        if (triplet_id.empty()) throw Error("backpropagate: success without a triplet id");
        for (ExplorationNode* n : path) n->success_triplets.push_back(triplet_id);
        const ExplorationNode& node = tree.at(node_id);
        for (const auto& entity : entity_nodes_of(node.state, view))
            graph.append_feedback(entity, triplet_id);
    } else {
        for (ExplorationNode* n : path) n->failure_count += 1;
    }
}

// --- full run ----------------------------------------------------------------------

inline SchemaFragment fragment_of(const QueryState& state, const GraphView& view) {
    SchemaFragment f;
    f.tables = state.joined_tables;
    std::set<std::string> cols, groups;
    std::vector<std::string> col_order;
    auto add = [&](const ColumnRef& c) {
        if (c.empty()) return;
        std::string q = c.qualified();
        if (cols.insert(q).second) col_order.push_back(q);
    };
    for (const auto& c : state.selected_columns) add(c);
    for (const auto& a : state.actions) {
        add(a.column);
        if (a.kind == ActionKind::IntroduceJoin && !a.join_left.empty()) {
            add(a.join_left);
            add(a.join_right);
            f.joins.emplace_back(a.join_left.qualified(), a.join_right.qualified());
        }
    }
    f.columns = std::move(col_order);
    for (const auto& fqn : state.joined_tables)
        if (const TableEntry* t = view.find_table(fqn))
            if (!t->group_node.empty()) groups.insert(t->group_node);
    f.groups.assign(groups.begin(), groups.end());
    return f;
}

struct ExplorationIterationLog {
    int iteration = 0;
    std::vector<std::string> candidates;
    std::string expanded_node;
    std::string child;
    std::string status;  // SimStatus, "skipped" or "exhausted"
    std::string triplet_id;
};

struct ExplorationRun {
    std::vector<Triplet> triplets;
    int iterations = 0;
    int llm_calls = 0;
    int db_calls = 0;
    bool aborted = false;
    std::string abort_reason;
    std::vector<ExplorationIterationLog> log;
};

inline ExplorationRun run_exploration(SchemaGraph& graph, const ExplorationConfig& config,
                                      Gateway& gateway, sql::Executor& executor,
                                      Embedder& embedder, ExplorationTree* tree_out = nullptr) {
    config.validate();
    GraphView view(graph);
    ExplorationTree local_tree;
    ExplorationTree& tree = tree_out ? *tree_out : local_tree;

    ExplorationRun run;
    int llm_before = gateway.llm_call_count();
    int db_before = executor.db_call_count();

    while (static_cast<int>(run.triplets.size()) < config.target_triplets &&
           run.iterations < config.max_iterations) {
        run.iterations += 1;
        ExplorationIterationLog log;
        log.iteration = run.iterations;
        try {
            ExpandStep step = select_and_expand(tree, view, gateway, config);
            log.candidates = step.candidate_ids;
            log.expanded_node = step.expanded_node;
            if (step.frontier_exhausted) {
                log.status = "exhausted";
                run.log.push_back(std::move(log));
                run.iterations -= 1;  // nothing was attempted
                break;
            }
            if (!step.child) {
                log.status = "skipped";
                run.log.push_back(std::move(log));
                continue;
            }
            log.child = step.child->id;
            SimulationOutcome outcome = simulate(*step.child, view, gateway, executor, config);
            log.status = to_string(outcome.status);
            if (outcome.success()) {
                Triplet t;
                t.id = "t" + std::to_string(run.triplets.size() + 1);
                t.fragment = fragment_of(step.child->state, view);
                t.sql = outcome.sql;
                t.description = outcome.description;
                t.embedding = embedder.embed(outcome.sql);
                t.provenance.path_id = step.child->id;
                t.provenance.iteration = run.iterations;
                t.provenance.created_at = config.provenance_epoch;
                backpropagate(tree, graph, view, step.child->id, outcome, t.id);
                log.triplet_id = t.id;
                run.triplets.push_back(std::move(t));
            } else {
                backpropagate(tree, graph, view, step.child->id, outcome);
            }
        } catch (const ScriptError& e) {
            run.aborted = true;
            run.abort_reason = e.what();
            log.status = "aborted";
            run.log.push_back(std::move(log));
            run.iterations -= 1;  // did not complete, keeps visit accounting exact
            break;
        } catch (const BackendError& e) {
            run.aborted = true;
            run.abort_reason = e.what();
            log.status = "aborted";
            run.log.push_back(std::move(log));
            run.iterations -= 1;
            break;
        }
        run.log.push_back(std::move(log));
    }

    run.llm_calls = gateway.llm_call_count() - llm_before;
    run.db_calls = executor.db_call_count() - db_before;
    return run;
}

}  // namespace sqlscout
