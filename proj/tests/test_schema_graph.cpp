#include "sqlscout/schema_graph.hpp"

#include <gtest/gtest.h>

#include "sqlscout/signature.hpp"

using namespace sqlscout;

namespace {

FieldDef field(const std::string& name, const std::string& type) {
    return FieldDef{name, type, "", {}, false};
}

TableDef table(const std::string& db, const std::string& schema, const std::string& name,
               std::vector<FieldDef> fields) {
    TableDef t;
    t.name = name;
    t.schema_name = schema;
    t.database_name = db;
    t.fields = std::move(fields);
    return t;
}

CatalogDef sharded_catalog(int shards, int width, int standalone_tables = 0) {
    CatalogDef cat;
    cat.database_name = "db";
    SchemaDef s;
    s.name = "main";
    std::vector<FieldDef> shard_fields;
    for (int i = 0; i < width; ++i)
        shard_fields.push_back(field("c" + std::to_string(i), "TEXT"));
    for (int i = 0; i < shards; ++i)
        s.tables.push_back(
            table("db", "main", "shard_" + std::to_string(1000 + i), shard_fields));
    for (int i = 0; i < standalone_tables; ++i)
        s.tables.push_back(table("db", "main", "solo_" + std::to_string(i),
                                 {field("a" + std::to_string(i), "INTEGER"),
                                  field("b" + std::to_string(i), "TEXT")}));
    cat.schemas.push_back(std::move(s));
    return cat;
}

SchemaGraph build(const CatalogDef& cat) {
    return build_graph(cat, select_groups(find_candidate_groups(cat)));
}

}  // namespace

TEST(BuildGraph, EdgeCountLawForSharedGroup) {
    // 10 tables sharing 24 fields: 10 USES_FIELD_GROUP + 24 HAS_FIELD field
    // edges, versus 240 one-per-table links
    CatalogDef cat = sharded_catalog(10, 24);
    SchemaGraph g = build(cat);
    GraphStats st = graph_stats(g);
    EXPECT_EQ(st.edge_counts["USES_FIELD_GROUP"], 10u);
    EXPECT_EQ(st.edge_counts["HAS_FIELD"], 24u);
    EXPECT_EQ(st.edge_counts.count("HAS_UNIQUE_FIELD"), 0u);
    EXPECT_EQ(st.edge_counts["USES_FIELD_GROUP"] + st.edge_counts["HAS_FIELD"], 34u);
    EXPECT_EQ(st.group_count, 1u);
}

TEST(BuildGraph, StandaloneTableKeepsDirectFields) {
    CatalogDef cat;
    cat.database_name = "db";
    SchemaDef s;
    s.name = "main";
    s.tables.push_back(table("db", "main", "solo",
                             {field("a", "TEXT"), field("b", "TEXT"), field("c", "TEXT")}));
    cat.schemas.push_back(std::move(s));
    SchemaGraph g = build(cat);
    GraphStats st = graph_stats(g);
    EXPECT_EQ(st.edge_counts["HAS_UNIQUE_FIELD"], 3u);
    EXPECT_EQ(st.group_count, 0u);
    EXPECT_EQ(st.avg_fanout, 0.0);
}

TEST(BuildGraph, MixedCatalogHoldsBothInvariants) {
    CatalogDef cat = sharded_catalog(5, 4, 1);
    SchemaGraph g = build(cat);
    GraphStats st = graph_stats(g);
    EXPECT_EQ(st.edge_counts["USES_FIELD_GROUP"], 5u);
    EXPECT_EQ(st.edge_counts["HAS_FIELD"], 4u);
    EXPECT_EQ(st.edge_counts["HAS_UNIQUE_FIELD"], 2u);
    // no member of the group has a direct field edge
    for (const auto& e : g.edges()) {
        if (e.kind == EdgeKind::HasUniqueField)
            EXPECT_EQ(g.at(e.from).name.rfind("solo_", 0), 0u);
    }
}

TEST(BuildGraph, EveryEdgeRespectsTypeTable) {
    CatalogDef cat = sharded_catalog(4, 3, 2);
    SchemaGraph g = build(cat);
    for (const auto& e : g.edges()) {
        const GraphNode& from = g.at(e.from);
        const GraphNode& to = g.at(e.to);
        switch (e.kind) {
            case EdgeKind::HasSchema:
                EXPECT_EQ(from.kind, NodeKind::Database);
                EXPECT_EQ(to.kind, NodeKind::Schema);
                break;
            case EdgeKind::HasTable:
                EXPECT_EQ(from.kind, NodeKind::Schema);
                EXPECT_EQ(to.kind, NodeKind::Table);
                break;
            case EdgeKind::UsesFieldGroup:
                EXPECT_EQ(from.kind, NodeKind::Table);
                EXPECT_EQ(to.kind, NodeKind::SharedFieldGroup);
                break;
            case EdgeKind::HasUniqueField:
                EXPECT_EQ(from.kind, NodeKind::Table);
                EXPECT_EQ(to.kind, NodeKind::Field);
                EXPECT_FALSE(to.grouped);
                break;
            case EdgeKind::HasField:
                EXPECT_EQ(from.kind, NodeKind::SharedFieldGroup);
                EXPECT_EQ(to.kind, NodeKind::Field);
                EXPECT_TRUE(to.grouped);
                break;
        }
    }
}

TEST(BuildGraph, GroupedTableLinksOnlyThroughGroup) {
    CatalogDef cat = sharded_catalog(3, 2);
    SchemaGraph g = build(cat);
    for (const auto& [id, node] : g.nodes()) {
        if (node.kind != NodeKind::Table) continue;
        int uses = 0, direct = 0;
        for (const GraphEdge* e : g.out_edges(id)) {
            if (e->kind == EdgeKind::UsesFieldGroup) ++uses;
            if (e->kind == EdgeKind::HasUniqueField) ++direct;
        }
        EXPECT_EQ(uses, 1);
        EXPECT_EQ(direct, 0);
    }
}

TEST(BuildGraph, GroupReferencingUnknownTableRejected) {
    CatalogDef cat = sharded_catalog(2, 2);
    auto groups = select_groups(find_candidate_groups(cat));
    ASSERT_EQ(groups.size(), 1u);
    groups[0].member_tables.push_back("db.main.ghost");
    EXPECT_THROW(build_graph(cat, groups), GraphError);
}

TEST(BuildGraph, IllegalEdgeKindRejected) {
    SchemaGraph g;
    g.add_node(GraphNode{.id = "db:x", .kind = NodeKind::Database, .name = "x"});
    g.add_node(GraphNode{.id = "table:x.s.t", .kind = NodeKind::Table, .name = "t"});
    EXPECT_THROW(g.add_edge("db:x", EdgeKind::HasTable, "table:x.s.t"), GraphError);
    EXPECT_THROW(g.add_edge("db:x", EdgeKind::HasSchema, "missing"), GraphError);
}

TEST(GraphStats, FanoutArithmetic) {
    // groups of 2 and 4 members -> avg 3, max 4
    CatalogDef cat;
    cat.database_name = "db";
    SchemaDef s;
    s.name = "main";
    std::vector<FieldDef> fa = {field("x", "TEXT")};
    std::vector<FieldDef> fb = {field("y", "INTEGER"), field("z", "TEXT")};
    for (int i = 0; i < 2; ++i) s.tables.push_back(table("db", "main", "a" + std::to_string(i), fa));
    for (int i = 0; i < 4; ++i) s.tables.push_back(table("db", "main", "b" + std::to_string(i), fb));
    cat.schemas.push_back(std::move(s));
    SchemaGraph g = build(cat);
    GraphStats st = graph_stats(g);
    EXPECT_EQ(st.group_count, 2u);
    EXPECT_DOUBLE_EQ(st.avg_fanout, 3.0);
    EXPECT_EQ(st.max_fanout, 4u);
}

TEST(GraphSerialize, EmptyButValidGraphRoundTrips) {
    SchemaGraph g;
    g.add_node(GraphNode{.id = "db:solo", .kind = NodeKind::Database, .name = "solo"});
    SchemaGraph back = load_graph(serialize_graph(g));
    EXPECT_EQ(g, back);
}

TEST(GraphSerialize, FullGraphWithFeedbackRoundTrips) {
    CatalogDef cat = sharded_catalog(5, 3, 2);
    SchemaGraph g = build(cat);
    g.append_feedback("table:db.main.shard_1000", "t1");
    g.append_feedback("table:db.main.shard_1000", "t2");
    SchemaGraph back = load_graph(serialize_graph(g));
    EXPECT_EQ(g, back);
    EXPECT_EQ(back.feedback_for("table:db.main.shard_1000").size(), 2u);
    // canonical re-serialization is byte-identical
    EXPECT_EQ(serialize_graph(g), serialize_graph(back));
}

TEST(GraphSerialize, VersionMismatchRejected) {
    SchemaGraph g;
    g.add_node(GraphNode{.id = "db:x", .kind = NodeKind::Database, .name = "x"});
    std::string text = serialize_graph(g);
    auto pos = text.find("\"version\": 1");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, std::string("\"version\": 1").size(), "\"version\": 99");
    EXPECT_THROW(load_graph(text), SerializationError);
}

TEST(GraphSerialize, TruncatedPayloadRejected) {
    CatalogDef cat = sharded_catalog(3, 2);
    std::string text = serialize_graph(build(cat));
    EXPECT_THROW(load_graph(text.substr(0, text.size() / 2)), SerializationError);
    EXPECT_THROW(load_graph("not json at all"), SerializationError);
}

TEST(GraphSerialize, LargeGraphRoundTrips) {
    // scaled to the reported corpus: ~90k nodes dominated by fields
    CatalogDef cat;
    cat.database_name = "big";
    SchemaDef s;
    s.name = "main";
    std::vector<FieldDef> shard_fields;
    for (int i = 0; i < 20; ++i) shard_fields.push_back(field("c" + std::to_string(i), "TEXT"));
    for (int i = 0; i < 300; ++i)
        s.tables.push_back(table("big", "main", "shard_" + std::to_string(i), shard_fields));
    for (int t = 0; t < 2900; ++t) {
        std::vector<FieldDef> fields;
        for (int i = 0; i < 30; ++i)
            fields.push_back(field("u" + std::to_string(t) + "_" + std::to_string(i), "TEXT"));
        s.tables.push_back(table("big", "main", "wide_" + std::to_string(t), fields));
    }
    cat.schemas.push_back(std::move(s));
    SchemaGraph g = build(cat);
    ASSERT_GT(g.nodes().size(), 90000u);
    SchemaGraph back = load_graph(serialize_graph(g));
    EXPECT_EQ(g.nodes().size(), back.nodes().size());
    EXPECT_EQ(g.edges().size(), back.edges().size());
    EXPECT_EQ(g, back);
}

TEST(GraphFeedback, UnknownNodeRejected) {
    SchemaGraph g;
    g.add_node(GraphNode{.id = "db:x", .kind = NodeKind::Database, .name = "x"});
    EXPECT_THROW(g.append_feedback("nope", "t1"), GraphError);
}
