#pragma once

// Catalog acquisition: either a documented JSON catalog file or an embedded
// database reachable through a connection locator. Sources ending in .json
// are parsed as catalog files; everything else goes through the engine
// (":memory:", fixture scripts, database files).

#include <sqlite3.h>

#include <filesystem>
#include <string>
#include <vector>

#include "sqlscout/catalog.hpp"
#include "sqlscout/errors.hpp"
#include "sqlscout/sql/executor.hpp"

namespace sqlscout {

namespace detail {

inline std::string db_display_name(const std::string& locator) {
    if (locator == ":memory:") return "main";
    std::filesystem::path p(locator);
    std::string stem = p.stem().string();
    return stem.empty() ? "main" : stem;
}

inline std::vector<std::string> sample_column(sqlite3* db, const std::string& table,
                                              const std::string& column, int limit = 3) {
    std::vector<std::string> out;
    std::string q = "SELECT DISTINCT \"" + column + "\" FROM \"" + table + "\" WHERE \"" +
                    column + "\" IS NOT NULL ORDER BY 1 LIMIT " + std::to_string(limit);
    sqlite3_stmt* raw = nullptr;
    if (sqlite3_prepare_v2(db, q.c_str(), -1, &raw, nullptr) != SQLITE_OK) return out;
    sql::detail::StmtPtr stmt(raw);
    while (sqlite3_step(stmt.get()) == SQLITE_ROW) {
        const unsigned char* txt = sqlite3_column_text(stmt.get(), 0);
        out.push_back(txt ? reinterpret_cast<const char*>(txt) : "");
    }
    return out;
}

}  // namespace detail

inline CatalogDef introspect_database(const std::string& locator) {
    sql::Connection conn = [&] {
        try {
            return sql::Connection::open(locator);
        } catch (const SqlError& e) {
            throw CatalogError("unreachable source \"" + locator + "\": " + e.what());
        }
    }();
    sqlite3* db = conn.handle();

    CatalogDef cat;
    cat.database_name = detail::db_display_name(locator);
    SchemaDef schema;
    schema.name = "main";

    std::vector<std::string> tables;
    {
        sqlite3_stmt* raw = nullptr;
        const char* q =
            "SELECT name FROM sqlite_master WHERE type='table' "
            "AND name NOT LIKE 'sqlite_%' ORDER BY name";
        if (sqlite3_prepare_v2(db, q, -1, &raw, nullptr) != SQLITE_OK)
            throw CatalogError(std::string("introspection failed: ") + sqlite3_errmsg(db));
        sql::detail::StmtPtr stmt(raw);
        while (sqlite3_step(stmt.get()) == SQLITE_ROW)
            tables.emplace_back(
                reinterpret_cast<const char*>(sqlite3_column_text(stmt.get(), 0)));
    }

    for (const auto& tname : tables) {
        TableDef t;
        t.name = tname;
        t.schema_name = schema.name;
        t.database_name = cat.database_name;
        sqlite3_stmt* raw = nullptr;
        std::string q = "PRAGMA table_info(\"" + tname + "\")";
        if (sqlite3_prepare_v2(db, q.c_str(), -1, &raw, nullptr) != SQLITE_OK)
            throw CatalogError(std::string("introspection failed: ") + sqlite3_errmsg(db));
        sql::detail::StmtPtr stmt(raw);
        while (sqlite3_step(stmt.get()) == SQLITE_ROW) {
            FieldDef f;
            const auto* nm = sqlite3_column_text(stmt.get(), 1);
            const auto* ty = sqlite3_column_text(stmt.get(), 2);
            f.name = nm ? reinterpret_cast<const char*>(nm) : "";
            std::string declared = ty ? reinterpret_cast<const char*>(ty) : "";
            f.data_type = declared.empty() ? kUnknownType : declared;
            f.is_key = sqlite3_column_int(stmt.get(), 5) > 0;
            t.fields.push_back(std::move(f));
        }
        if (t.fields.empty())
            throw CatalogError("introspection: table \"" + tname + "\" has zero columns");
        for (auto& f : t.fields) f.sample_values = detail::sample_column(db, tname, f.name);
        t.ddl_summary = "Table with " + std::to_string(t.fields.size()) + " columns";
        schema.tables.push_back(std::move(t));
    }

    cat.schemas.push_back(std::move(schema));
    cat.validate();
    return cat;
}

inline CatalogDef introspect_catalog(const std::string& source) {
    if (source.size() > 5 && source.ends_with(".json")) return load_catalog_file(source);
    return introspect_database(source);
}

}  // namespace sqlscout
