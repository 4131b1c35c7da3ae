#pragma once

// Traversable graph representation of a relational catalog.
//
// Five node kinds (database, schema, table, shared_field_group, field) and
// five edge kinds. Tables that belong to a shared field group link to it
// with a single USES_FIELD_GROUP edge instead of per-field edges, so N
// structurally identical tables over M fields cost N+M field-related edges
// rather than N*M.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlscout/catalog.hpp"
#include "sqlscout/errors.hpp"
#include "sqlscout/signature.hpp"

namespace sqlscout {

enum class NodeKind { Database, Schema, Table, SharedFieldGroup, Field };
enum class EdgeKind { HasSchema, HasTable, UsesFieldGroup, HasUniqueField, HasField };

inline const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Database: return "database";
        case NodeKind::Schema: return "schema";
        case NodeKind::Table: return "table";
        case NodeKind::SharedFieldGroup: return "shared_field_group";
        case NodeKind::Field: return "field";
    }
    return "?";
}

inline const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::HasSchema: return "HAS_SCHEMA";
        case EdgeKind::HasTable: return "HAS_TABLE";
        case EdgeKind::UsesFieldGroup: return "USES_FIELD_GROUP";
        case EdgeKind::HasUniqueField: return "HAS_UNIQUE_FIELD";
        case EdgeKind::HasField: return "HAS_FIELD";
    }
    return "?";
}

inline std::optional<EdgeKind> edge_kind_from_string(const std::string& s) {
    if (s == "HAS_SCHEMA") return EdgeKind::HasSchema;
    if (s == "HAS_TABLE") return EdgeKind::HasTable;
    if (s == "USES_FIELD_GROUP") return EdgeKind::UsesFieldGroup;
    if (s == "HAS_UNIQUE_FIELD") return EdgeKind::HasUniqueField;
    if (s == "HAS_FIELD") return EdgeKind::HasField;
    return std::nullopt;
}

// One record per node; kind decides which properties are meaningful.
struct GraphNode {
    std::string id;
    NodeKind kind = NodeKind::Database;
    std::string name;
    std::string database;
    std::string schema;
    std::string description;

    // table
    std::string fullname;
    std::string ddl_summary;

    // shared field group
    std::string field_hash;
    int field_count = 0;

    // field
    std::string data_type;
    std::string table;  // owning table name, unique fields only
    bool grouped = false;
    bool is_key = false;
    std::vector<std::string> sample_data;

    bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
    std::string from;
    EdgeKind kind = EdgeKind::HasSchema;
    std::string to;

    bool operator==(const GraphEdge&) const = default;
};

struct GraphStats {
    std::map<std::string, std::size_t> node_counts;  // by kind name
    std::map<std::string, std::size_t> edge_counts;  // by kind name
    std::size_t total_nodes = 0;
    std::size_t total_edges = 0;
    std::size_t group_count = 0;
    double avg_fanout = 0.0;  // USES_FIELD_GROUP edges per group, 0 with no groups
    std::size_t max_fanout = 0;
};

namespace detail {

// Allowed (start kind, edge kind, end kind) triples.
inline bool edge_allowed(NodeKind from, EdgeKind kind, NodeKind to) {
    switch (kind) {
        case EdgeKind::HasSchema:
            return from == NodeKind::Database && to == NodeKind::Schema;
        case EdgeKind::HasTable:
            return from == NodeKind::Schema && to == NodeKind::Table;
        case EdgeKind::UsesFieldGroup:
            return from == NodeKind::Table && to == NodeKind::SharedFieldGroup;
        case EdgeKind::HasUniqueField:
            return from == NodeKind::Table && to == NodeKind::Field;
        case EdgeKind::HasField:
            return from == NodeKind::SharedFieldGroup && to == NodeKind::Field;
    }
    return false;
}

}  // namespace detail

class SchemaGraph {
public:
    using FeedbackMap = std::map<std::string, std::vector<std::string>>;

    void add_node(GraphNode node) {
        if (node.id.empty()) throw GraphError("graph: node with empty id");
        auto [it, inserted] = nodes_.emplace(node.id, std::move(node));
        if (!inserted) throw GraphError("graph: duplicate node id \"" + it->first + "\"");
    }

    void add_edge(const std::string& from, EdgeKind kind, const std::string& to) {
        const GraphNode* a = find(from);
        const GraphNode* b = find(to);
        if (!a || !b)
            throw GraphError("graph: edge endpoint missing (" + from + " -> " + to + ")");
        if (!detail::edge_allowed(a->kind, kind, b->kind))
            throw GraphError(std::string("graph: edge kind ") + to_string(kind) +
                             " not allowed from " + to_string(a->kind) + " to " +
                             to_string(b->kind));
        out_index_[from].push_back(edges_.size());
        in_index_[to].push_back(edges_.size());
        edges_.push_back(GraphEdge{from, kind, to});
    }

    const GraphNode* find(const std::string& id) const {
        auto it = nodes_.find(id);
        return it == nodes_.end() ? nullptr : &it->second;
    }

    const GraphNode& at(const std::string& id) const {
        const GraphNode* n = find(id);
        if (!n) throw GraphError("graph: unknown node id \"" + id + "\"");
        return *n;
    }

    bool contains(const std::string& id) const { return nodes_.contains(id); }

    const std::map<std::string, GraphNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }

    std::vector<const GraphEdge*> out_edges(const std::string& id) const {
        return collect(out_index_, id);
    }
    std::vector<const GraphEdge*> in_edges(const std::string& id) const {
        return collect(in_index_, id);
    }

    // Feedback appends require exclusive access; a finalized graph is
    // otherwise immutable.
    void append_feedback(const std::string& node_id, const std::string& triplet_id) {
        if (!contains(node_id))
            throw GraphError("graph: feedback for unknown node \"" + node_id + "\"");
        feedback_[node_id].push_back(triplet_id);
    }

    const std::vector<std::string>& feedback_for(const std::string& node_id) const {
        static const std::vector<std::string> empty;
        auto it = feedback_.find(node_id);
        return it == feedback_.end() ? empty : it->second;
    }

    const FeedbackMap& feedback() const { return feedback_; }
    void set_feedback(FeedbackMap fb) { feedback_ = std::move(fb); }

    bool operator==(const SchemaGraph& other) const {
        return nodes_ == other.nodes_ && edges_ == other.edges_ &&
               feedback_ == other.feedback_;
    }

private:
    std::vector<const GraphEdge*> collect(
        const std::unordered_map<std::string, std::vector<std::size_t>>& index,
        const std::string& id) const {
        std::vector<const GraphEdge*> out;
        auto it = index.find(id);
        if (it == index.end()) return out;
        out.reserve(it->second.size());
        for (std::size_t i : it->second) out.push_back(&edges_[i]);
        return out;
    }

    std::map<std::string, GraphNode> nodes_;  // ordered for deterministic serialization
    std::vector<GraphEdge> edges_;
    std::unordered_map<std::string, std::vector<std::size_t>> out_index_;
    std::unordered_map<std::string, std::vector<std::size_t>> in_index_;
    FeedbackMap feedback_;
};

// Content-derived node ids: reproducible serialization, diffable fixtures.
namespace node_id {

inline std::string database(const std::string& db) { return "db:" + db; }
inline std::string schema(const std::string& db, const std::string& s) {
    return "schema:" + db + "." + s;
}
inline std::string table(const std::string& fqn) { return "table:" + fqn; }
inline std::string group(const std::string& db, const std::string& sig_hex) {
    return "group:" + db + "." + sig_hex;
}
inline std::string unique_field(const std::string& table_fqn, const std::string& field) {
    return "field:" + table_fqn + "." + field;
}
inline std::string group_field(const std::string& db, const std::string& sig_hex,
                               const std::string& field) {
    return "gfield:" + db + "." + sig_hex + "." + field;
}

}  // namespace node_id

inline SchemaGraph build_graph(const CatalogDef& catalog,
                               const std::vector<SharedFieldGroup>& groups) {
    catalog.validate();
    if (catalog.all_tables().empty())
        throw GraphError("graph: catalog has no tables");

    SchemaGraph g;
    const std::string& db = catalog.database_name;
    const std::string db_id = node_id::database(db);
    g.add_node(GraphNode{.id = db_id, .kind = NodeKind::Database, .name = db});

    std::map<std::string, std::string> table_schema;  // fqn -> schema name
    for (const auto& s : catalog.schemas) {
        std::string sid = node_id::schema(db, s.name);
        g.add_node(GraphNode{.id = sid,
                             .kind = NodeKind::Schema,
                             .name = s.name,
                             .database = db,
                             .description = s.description});
        g.add_edge(db_id, EdgeKind::HasSchema, sid);
        for (const auto& t : s.tables) {
            std::string tid = node_id::table(t.fullname());
            g.add_node(GraphNode{.id = tid,
                                 .kind = NodeKind::Table,
                                 .name = t.name,
                                 .database = db,
                                 .schema = s.name,
                                 .fullname = t.fullname(),
                                 .ddl_summary = t.ddl_summary});
            g.add_edge(sid, EdgeKind::HasTable, tid);
            table_schema[t.fullname()] = s.name;
        }
    }

    // group nodes first, so member tables can link to them
    std::map<std::string, std::string> grouped_table_to_group;  // table fqn -> group id
    for (const auto& grp : groups) {
        for (const auto& m : grp.member_tables)
            if (!table_schema.contains(m))
                throw GraphError("graph: group " + grp.name +
                                 " references unknown table \"" + m + "\"");
        const std::string& first_member = grp.member_tables.front();
        std::string gid = node_id::group(db, grp.signature.hex);
        g.add_node(GraphNode{.id = gid,
                             .kind = NodeKind::SharedFieldGroup,
                             .name = grp.name,
                             .database = db,
                             .schema = table_schema.at(first_member),
                             .description = "FieldGroup_" + grp.signature.hex,
                             .field_hash = grp.signature.hex,
                             .field_count = grp.field_count});
        for (const auto& f : grp.fields) {
            std::string fid = node_id::group_field(db, grp.signature.hex, f.name);
            g.add_node(GraphNode{.id = fid,
                                 .kind = NodeKind::Field,
                                 .name = f.name,
                                 .database = db,
                                 .schema = table_schema.at(first_member),
                                 .description = f.description,
                                 .data_type = f.data_type,
                                 .grouped = true,
                                 .is_key = f.is_key,
                                 .sample_data = f.sample_values});
            g.add_edge(gid, EdgeKind::HasField, fid);
        }
        for (const auto& m : grp.member_tables) {
            g.add_edge(node_id::table(m), EdgeKind::UsesFieldGroup, gid);
            grouped_table_to_group[m] = gid;
        }
    }

    // ungrouped tables own their fields directly
    for (const auto& s : catalog.schemas) {
        for (const auto& t : s.tables) {
            if (grouped_table_to_group.contains(t.fullname())) continue;
            std::string tid = node_id::table(t.fullname());
            for (const auto& f : t.fields) {
                std::string fid = node_id::unique_field(t.fullname(), f.name);
                g.add_node(GraphNode{.id = fid,
                                     .kind = NodeKind::Field,
                                     .name = f.name,
                                     .database = db,
                                     .schema = s.name,
                                     .description = f.description,
                                     .data_type = f.data_type,
                                     .table = t.name,
                                     .grouped = false,
                                     .is_key = f.is_key,
                                     .sample_data = f.sample_values});
                g.add_edge(tid, EdgeKind::HasUniqueField, fid);
            }
        }
    }
    return g;
}

inline GraphStats graph_stats(const SchemaGraph& g) {
    GraphStats st;
    for (const auto& [id, n] : g.nodes()) st.node_counts[to_string(n.kind)]++;
    for (const auto& e : g.edges()) st.edge_counts[to_string(e.kind)]++;
    st.total_nodes = g.nodes().size();
    st.total_edges = g.edges().size();
    st.group_count = st.node_counts.contains("shared_field_group")
                         ? st.node_counts.at("shared_field_group")
                         : 0;
    std::map<std::string, std::size_t> fanout;  // group id -> member count
    for (const auto& e : g.edges())
        if (e.kind == EdgeKind::UsesFieldGroup) fanout[e.to]++;
    std::size_t uses_total = 0;
    for (const auto& [gid, n] : fanout) {
        uses_total += n;
        st.max_fanout = std::max(st.max_fanout, n);
    }
    st.avg_fanout =
        st.group_count == 0 ? 0.0 : static_cast<double>(uses_total) / st.group_count;
    return st;
}

inline nlohmann::json stats_to_json(const GraphStats& st) {
    return nlohmann::json{{"nodes", st.node_counts},
                          {"edges", st.edge_counts},
                          {"total_nodes", st.total_nodes},
                          {"total_edges", st.total_edges},
                          {"group_count", st.group_count},
                          {"avg_fanout", st.avg_fanout},
                          {"max_fanout", st.max_fanout}};
}

inline constexpr int kGraphFormatVersion = 1;

namespace detail {

inline nlohmann::json node_to_json(const GraphNode& n) {
    nlohmann::json j{{"id", n.id}, {"name", n.name}};
    switch (n.kind) {
        case NodeKind::Database:
            j["type"] = "database";
            break;
        case NodeKind::Schema:
            j["type"] = "schema";
            j["database"] = n.database;
            j["description"] = n.description;
            break;
        case NodeKind::Table:
            j["type"] = "table";
            j["database"] = n.database;
            j["schema"] = n.schema;
            j["fullname"] = n.fullname;
            j["ddl_summary"] = n.ddl_summary;
            break;
        case NodeKind::SharedFieldGroup:
            j["type"] = "shared_field_group";
            j["database"] = n.database;
            j["schema"] = n.schema;
            j["description"] = n.description;
            j["field_count"] = n.field_count;
            j["field_hash"] = n.field_hash;
            break;
        case NodeKind::Field:
            // fields carry the data type in "type"; "node_type" tells
            // grouped fields from table-owned ones
            j["node_type"] = n.grouped ? "group_field" : "unique_field";
            j["type"] = n.data_type;
            j["database"] = n.database;
            j["schema"] = n.schema;
            if (!n.grouped) j["table"] = n.table;
            j["description"] = n.description;
            j["sample_data"] = n.sample_data;
            if (n.is_key) j["key"] = true;
            break;
    }
    return j;
}

inline GraphNode node_from_json(const nlohmann::json& j) {
    GraphNode n;
    if (!j.contains("id") || !j.contains("name"))
        throw SerializationError("graph file: node missing id/name");
    n.id = j["id"].get<std::string>();
    n.name = j["name"].get<std::string>();
    auto get_str = [&](const char* key) -> std::string {
        return j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : "";
    };
    if (j.contains("node_type")) {
        std::string nt = j["node_type"].get<std::string>();
        if (nt != "unique_field" && nt != "group_field")
            throw SerializationError("graph file: bad node_type \"" + nt + "\"");
        n.kind = NodeKind::Field;
        n.grouped = (nt == "group_field");
        n.data_type = get_str("type");
        n.database = get_str("database");
        n.schema = get_str("schema");
        n.table = get_str("table");
        n.description = get_str("description");
        if (j.contains("sample_data"))
            n.sample_data = j["sample_data"].get<std::vector<std::string>>();
        n.is_key = j.contains("key") && j["key"].get<bool>();
        return n;
    }
    std::string ty = get_str("type");
    if (ty == "database") {
        n.kind = NodeKind::Database;
    } else if (ty == "schema") {
        n.kind = NodeKind::Schema;
        n.database = get_str("database");
        n.description = get_str("description");
    } else if (ty == "table") {
        n.kind = NodeKind::Table;
        n.database = get_str("database");
        n.schema = get_str("schema");
        n.fullname = get_str("fullname");
        n.ddl_summary = get_str("ddl_summary");
    } else if (ty == "shared_field_group") {
        n.kind = NodeKind::SharedFieldGroup;
        n.database = get_str("database");
        n.schema = get_str("schema");
        n.description = get_str("description");
        n.field_count = j.contains("field_count") ? j["field_count"].get<int>() : 0;
        n.field_hash = get_str("field_hash");
    } else {
        throw SerializationError("graph file: unknown node type \"" + ty + "\"");
    }
    return n;
}

}  // namespace detail

inline std::string serialize_graph(const SchemaGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [id, n] : g.nodes()) nodes.push_back(detail::node_to_json(n));
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges())
        edges.push_back(nlohmann::json{{"from", e.from}, {"kind", to_string(e.kind)}, {"to", e.to}});
    nlohmann::json feedback = nlohmann::json::array();
    for (const auto& [node, triplets] : g.feedback())
        feedback.push_back(nlohmann::json{{"node", node}, {"triplets", triplets}});
    nlohmann::json doc{{"version", kGraphFormatVersion},
                       {"nodes", std::move(nodes)},
                       {"edges", std::move(edges)},
                       {"feedback", std::move(feedback)}};
    return doc.dump(2) + "\n";
}

inline SchemaGraph load_graph(std::string_view bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw SerializationError(std::string("graph file corrupted: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("version"))
        throw SerializationError("graph file corrupted: missing version");
    int version = doc["version"].get<int>();
    if (version != kGraphFormatVersion)
        throw SerializationError("graph file version mismatch: have " +
                                 std::to_string(version) + ", expected " +
                                 std::to_string(kGraphFormatVersion));
    if (!doc.contains("nodes") || !doc.contains("edges"))
        throw SerializationError("graph file corrupted: missing nodes/edges");
    SchemaGraph g;
    try {
        for (const auto& jn : doc["nodes"]) g.add_node(detail::node_from_json(jn));
        for (const auto& je : doc["edges"]) {
            auto kind = edge_kind_from_string(je.at("kind").get<std::string>());
            if (!kind)
                throw SerializationError("graph file corrupted: unknown edge kind");
            g.add_edge(je.at("from").get<std::string>(), *kind,
                       je.at("to").get<std::string>());
        }
        SchemaGraph::FeedbackMap fb;
        if (doc.contains("feedback")) {
            for (const auto& jf : doc["feedback"])
                fb[jf.at("node").get<std::string>()] =
                    jf.at("triplets").get<std::vector<std::string>>();
        }
        for (const auto& [node, ids] : fb)
            if (!g.contains(node))
                throw SerializationError("graph file corrupted: feedback for unknown node \"" +
                                         node + "\"");
        g.set_feedback(std::move(fb));
    } catch (const nlohmann::json::exception& e) {
        throw SerializationError(std::string("graph file corrupted: ") + e.what());
    } catch (const GraphError& e) {
        throw SerializationError(std::string("graph file corrupted: ") + e.what());
    }
    return g;
}

inline void save_graph_file(const SchemaGraph& g, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write graph file: " + path);
        out << serialize_graph(g);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("cannot finalize graph file: " + path);
}

inline SchemaGraph load_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_graph(buf.str());
}

}  // namespace sqlscout
