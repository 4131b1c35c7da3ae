#include "sqlscout/catalog.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "sqlscout/introspect.hpp"
#include "sqlscout/sql/executor.hpp"

using namespace sqlscout;

namespace {

const char* kTwoTableCatalog = R"({
  "database": "shop",
  "schemas": [
    {
      "name": "main",
      "description": "retail schema",
      "tables": [
        {
          "name": "users",
          "ddl_summary": "Table with 2 columns",
          "fields": [
            {"name": "user_id", "type": "INTEGER", "pk": true},
            {"name": "name", "type": "TEXT", "description": "display name"}
          ]
        },
        {
          "name": "orders",
          "fields": [
            {"name": "order_id", "type": "INTEGER"},
            {"name": "amount", "type": "REAL", "samples": ["10.5", "99.0"]}
          ]
        }
      ]
    }
  ]
})";

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path(std::string(::testing::TempDir()) + name) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST(CatalogFile, TwoTablesParse) {
    CatalogDef cat = parse_catalog_json(kTwoTableCatalog);
    EXPECT_EQ(cat.database_name, "shop");
    ASSERT_EQ(cat.schemas.size(), 1u);
    ASSERT_EQ(cat.schemas[0].tables.size(), 2u);
    const TableDef& users = cat.schemas[0].tables[0];
    EXPECT_EQ(users.fullname(), "shop.main.users");
    ASSERT_EQ(users.fields.size(), 2u);
    EXPECT_TRUE(users.fields[0].is_key);
    EXPECT_EQ(users.fields[1].description, "display name");
    EXPECT_EQ(cat.schemas[0].tables[1].fields[1].sample_values.size(), 2u);
}

TEST(CatalogFile, MissingTypeKeyNamesField) {
    const char* bad = R"({
      "database": "d",
      "schemas": [{"name": "s", "tables": [
        {"name": "t", "fields": [{"name": "ok", "type": "TEXT"}, {"name": "broken"}]}
      ]}]
    })";
    try {
        parse_catalog_json(bad);
        FAIL() << "expected CatalogError";
    } catch (const CatalogError& e) {
        EXPECT_NE(std::string(e.what()).find("broken"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("type"), std::string::npos);
    }
}

TEST(CatalogFile, NullTypeBecomesUnknownSentinel) {
    const char* doc = R"({
      "database": "d",
      "schemas": [{"name": "s", "tables": [
        {"name": "t", "fields": [{"name": "x", "type": null}, {"name": "y", "type": ""}]}
      ]}]
    })";
    CatalogDef cat = parse_catalog_json(doc);
    EXPECT_EQ(cat.schemas[0].tables[0].fields[0].data_type, kUnknownType);
    EXPECT_EQ(cat.schemas[0].tables[0].fields[1].data_type, kUnknownType);
}

TEST(CatalogFile, ZeroColumnTableRejected) {
    const char* bad = R"({
      "database": "d",
      "schemas": [{"name": "s", "tables": [{"name": "empty", "fields": []}]}]
    })";
    EXPECT_THROW(parse_catalog_json(bad), CatalogError);
}

TEST(CatalogFile, SyntaxErrorReportsPosition) {
    try {
        parse_catalog_json("{\"database\": \"d\",\n  \"schemas\": [,]}");
        FAIL() << "expected CatalogError";
    } catch (const CatalogError& e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
    }
}

TEST(CatalogValidate, DuplicateFieldNames) {
    CatalogDef cat;
    cat.database_name = "d";
    SchemaDef s;
    s.name = "s";
    TableDef t;
    t.name = "t";
    t.schema_name = "s";
    t.database_name = "d";
    t.fields = {FieldDef{"x", "TEXT", "", {}, false}, FieldDef{"x", "INTEGER", "", {}, false}};
    s.tables.push_back(t);
    cat.schemas.push_back(s);
    EXPECT_THROW(cat.validate(), CatalogError);
}

TEST(CatalogValidate, DuplicateSchemaNames) {
    CatalogDef cat;
    cat.database_name = "d";
    cat.schemas.push_back(SchemaDef{"s", "", {}});
    cat.schemas.push_back(SchemaDef{"s", "", {}});
    EXPECT_THROW(cat.validate(), CatalogError);
}

TEST(CatalogFile, RoundTripThroughJson) {
    CatalogDef cat = parse_catalog_json(kTwoTableCatalog);
    CatalogDef again = parse_catalog_json(catalog_to_json(cat).dump());
    EXPECT_EQ(cat, again);
}

TEST(CatalogFile, LoadFromDisk) {
    TempFile f("catalog_ok.json", kTwoTableCatalog);
    CatalogDef cat = load_catalog_file(f.path);
    EXPECT_EQ(cat.database_name, "shop");
    EXPECT_THROW(load_catalog_file(f.path + ".does_not_exist"), CatalogError);
}

TEST(Introspect, EmbeddedTableMatchesCreation) {
    sql::Connection conn = sql::Connection::open_writable_memory();
    conn.run_script("CREATE TABLE users (user_id INTEGER PRIMARY KEY, name TEXT);"
                    "INSERT INTO users VALUES (1, 'ada'), (2, 'grace');");
    // introspect through a temp file so the locator path is exercised
    TempFile script("introspect_fixture.sql",
                    "CREATE TABLE users (user_id INTEGER PRIMARY KEY, name TEXT);\n"
                    "INSERT INTO users VALUES (1, 'ada'), (2, 'grace');\n");
    CatalogDef cat = introspect_catalog(script.path);
    ASSERT_EQ(cat.schemas.size(), 1u);
    ASSERT_EQ(cat.schemas[0].tables.size(), 1u);
    const TableDef& t = cat.schemas[0].tables[0];
    EXPECT_EQ(t.name, "users");
    ASSERT_EQ(t.fields.size(), 2u);
    EXPECT_EQ(t.fields[0].name, "user_id");
    EXPECT_EQ(t.fields[0].data_type, "INTEGER");
    EXPECT_TRUE(t.fields[0].is_key);
    EXPECT_EQ(t.fields[1].name, "name");
    EXPECT_EQ(t.fields[1].data_type, "TEXT");
    EXPECT_EQ(t.ddl_summary, "Table with 2 columns");
    // samples harvested deterministically
    ASSERT_EQ(t.fields[1].sample_values.size(), 2u);
    EXPECT_EQ(t.fields[1].sample_values[0], "ada");
}

TEST(Introspect, UntypedColumnGetsSentinel) {
    TempFile script("untyped.sql", "CREATE TABLE t (x, y TEXT);");
    CatalogDef cat = introspect_catalog(script.path);
    EXPECT_EQ(cat.schemas[0].tables[0].fields[0].data_type, kUnknownType);
}

TEST(Introspect, UnreachableSource) {
    EXPECT_THROW(introspect_catalog("/nonexistent/path/to.db"), CatalogError);
}

TEST(Introspect, JsonSuffixDispatchesToCatalogFile) {
    TempFile f("dispatch.json", kTwoTableCatalog);
    CatalogDef cat = introspect_catalog(f.path);
    EXPECT_EQ(cat.database_name, "shop");
}
