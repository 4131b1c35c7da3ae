#pragma once

// Relational catalog model and the JSON catalog file contract.
//
// Catalog file shape (stable):
//   {
//     "database": "...",
//     "schemas": [
//       {"name": "...", "description": "...",
//        "tables": [
//          {"name": "...", "ddl_summary": "...",
//           "fields": [{"name": "...", "type": "...", "description": "...",
//                       "samples": ["..."], "pk": false}]}]}]
//   }
// "description", "samples", "ddl_summary" and "pk" are optional. The "type"
// key itself is mandatory (absence is a malformed file); a null or empty
// value records the UNKNOWN sentinel so untyped columns still participate
// in signatures.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlscout/errors.hpp"

namespace sqlscout {

inline constexpr const char* kUnknownType = "UNKNOWN";

struct FieldDef {
    std::string name;
    std::string data_type;
    std::string description;
    std::vector<std::string> sample_values;
    bool is_key = false;  // declared PK when the source reports one

    bool operator==(const FieldDef&) const = default;
};

struct TableDef {
    std::string name;
    std::string schema_name;
    std::string database_name;
    std::vector<FieldDef> fields;
    std::string ddl_summary;

    std::string fullname() const {
        return database_name + "." + schema_name + "." + name;
    }

    bool operator==(const TableDef&) const = default;
};

struct SchemaDef {
    std::string name;
    std::string description;
    std::vector<TableDef> tables;

    bool operator==(const SchemaDef&) const = default;
};

struct CatalogDef {
    std::string database_name;
    std::vector<SchemaDef> schemas;

    bool operator==(const CatalogDef&) const = default;

    std::vector<const TableDef*> all_tables() const {
        std::vector<const TableDef*> out;
        for (const auto& s : schemas)
            for (const auto& t : s.tables) out.push_back(&t);
        return out;
    }

    // Throws CatalogError on the first violated invariant.
    void validate() const {
        if (database_name.empty()) throw CatalogError("catalog: empty database name");
        std::set<std::string> schema_names;
        std::set<std::string> table_fqns;
        for (const auto& s : schemas) {
            if (s.name.empty()) throw CatalogError("catalog: empty schema name");
            if (!schema_names.insert(s.name).second)
                throw CatalogError("catalog: duplicate schema \"" + s.name + "\"");
            for (const auto& t : s.tables) {
                if (t.name.empty())
                    throw CatalogError("catalog: empty table name in schema \"" + s.name + "\"");
                if (t.fields.empty())
                    throw CatalogError("catalog: table \"" + t.fullname() +
                                       "\" has zero columns");
                if (!table_fqns.insert(t.fullname()).second)
                    throw CatalogError("catalog: duplicate table \"" + t.fullname() + "\"");
                std::set<std::string> field_names;
                for (const auto& f : t.fields) {
                    if (f.name.empty())
                        throw CatalogError("catalog: empty field name in table \"" +
                                           t.fullname() + "\"");
                    if (f.data_type.empty())
                        throw CatalogError("catalog: empty data type on field \"" +
                                           t.fullname() + "." + f.name + "\"");
                    if (!field_names.insert(f.name).second)
                        throw CatalogError("catalog: duplicate field \"" + f.name +
                                           "\" in table \"" + t.fullname() + "\"");
                }
            }
        }
    }
};

namespace detail {

inline std::string json_type_name(const nlohmann::json& j) { return j.type_name(); }

inline FieldDef parse_field(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw CatalogError(where + ": field entry is not an object");
    FieldDef f;
    if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty())
        throw CatalogError(where + ": missing or empty \"name\"");
    f.name = j["name"].get<std::string>();
    if (!j.contains("type"))
        throw CatalogError(where + ".\"" + f.name + "\": missing \"type\"");
    const auto& ty = j["type"];
    if (ty.is_null())
        f.data_type = kUnknownType;
    else if (ty.is_string())
        f.data_type = ty.get<std::string>().empty() ? kUnknownType : ty.get<std::string>();
    else
        throw CatalogError(where + ".\"" + f.name + "\": \"type\" must be a string or null");
    if (j.contains("description") && !j["description"].is_null())
        f.description = j["description"].get<std::string>();
    if (j.contains("samples") && !j["samples"].is_null()) {
        for (const auto& s : j["samples"])
            f.sample_values.push_back(s.is_string() ? s.get<std::string>() : s.dump());
    }
    if (j.contains("pk") && j["pk"].is_boolean()) f.is_key = j["pk"].get<bool>();
    return f;
}

}  // namespace detail

// Parses the documented catalog file format. Error messages carry the JSON
// path of the offending entry; syntax errors carry nlohmann's line/column.
inline CatalogDef parse_catalog_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw CatalogError(std::string("malformed catalog file: ") + e.what());
    }
    if (!j.is_object() || !j.contains("database") || !j["database"].is_string())
        throw CatalogError("malformed catalog file: missing top-level \"database\"");
    CatalogDef cat;
    cat.database_name = j["database"].get<std::string>();
    if (!j.contains("schemas") || !j["schemas"].is_array())
        throw CatalogError("malformed catalog file: missing \"schemas\" array");
    int si = 0;
    for (const auto& js : j["schemas"]) {
        std::string swhere = "schemas[" + std::to_string(si++) + "]";
        if (!js.is_object() || !js.contains("name") || !js["name"].is_string())
            throw CatalogError("malformed catalog file: " + swhere + " missing \"name\"");
        SchemaDef sd;
        sd.name = js["name"].get<std::string>();
        if (js.contains("description") && js["description"].is_string())
            sd.description = js["description"].get<std::string>();
        if (js.contains("tables")) {
            int ti = 0;
            for (const auto& jt : js["tables"]) {
                std::string twhere = swhere + ".tables[" + std::to_string(ti++) + "]";
                if (!jt.is_object() || !jt.contains("name") || !jt["name"].is_string())
                    throw CatalogError("malformed catalog file: " + twhere + " missing \"name\"");
                TableDef td;
                td.name = jt["name"].get<std::string>();
                td.schema_name = sd.name;
                td.database_name = cat.database_name;
                if (jt.contains("ddl_summary") && jt["ddl_summary"].is_string())
                    td.ddl_summary = jt["ddl_summary"].get<std::string>();
                if (!jt.contains("fields") || !jt["fields"].is_array() || jt["fields"].empty())
                    throw CatalogError("catalog: table \"" + td.name +
                                       "\" has zero columns (" + twhere + ")");
                int fi = 0;
                for (const auto& jf : jt["fields"]) {
                    std::string fwhere = twhere + ".fields[" + std::to_string(fi++) + "]";
                    td.fields.push_back(detail::parse_field(jf, fwhere));
                }
                sd.tables.push_back(std::move(td));
            }
        }
        cat.schemas.push_back(std::move(sd));
    }
    cat.validate();
    return cat;
}

inline nlohmann::json catalog_to_json(const CatalogDef& cat) {
    nlohmann::json schemas = nlohmann::json::array();
    for (const auto& s : cat.schemas) {
        nlohmann::json tables = nlohmann::json::array();
        for (const auto& t : s.tables) {
            nlohmann::json fields = nlohmann::json::array();
            for (const auto& f : t.fields) {
                nlohmann::json jf{{"name", f.name}, {"type", f.data_type}};
                if (!f.description.empty()) jf["description"] = f.description;
                if (!f.sample_values.empty()) jf["samples"] = f.sample_values;
                if (f.is_key) jf["pk"] = true;
                fields.push_back(std::move(jf));
            }
            tables.push_back(nlohmann::json{{"name", t.name},
                                            {"ddl_summary", t.ddl_summary},
                                            {"fields", std::move(fields)}});
        }
        schemas.push_back(nlohmann::json{{"name", s.name},
                                         {"description", s.description},
                                         {"tables", std::move(tables)}});
    }
    return nlohmann::json{{"database", cat.database_name}, {"schemas", std::move(schemas)}};
}

inline CatalogDef load_catalog_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CatalogError("cannot open catalog file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_catalog_json(buf.str());
}

}  // namespace sqlscout
