#pragma once

// Triplet store: (schema fragment, SQL, description) plus an embedding of
// the SQL, retrievable by cosine similarity. Column documents rendered from
// graph field nodes feed a second index used for schema grounding.
//
// KB file: one JSON record per line with keys
//   {id, fragment, sql, description, embedding, provenance}
// written atomically (temp file + rename).

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlscout/catalog.hpp"
#include "sqlscout/embedding.hpp"
#include "sqlscout/errors.hpp"
#include "sqlscout/schema_graph.hpp"
#include "sqlscout/vector_index.hpp"

namespace sqlscout {

struct SchemaFragment {
    std::vector<std::string> tables;   // fully-qualified names
    std::vector<std::string> columns;  // fully-qualified column names
    std::vector<std::pair<std::string, std::string>> joins;
    std::vector<std::string> groups;  // shared-field-group ids touched

    bool operator==(const SchemaFragment&) const = default;
};

struct TripletProvenance {
    std::string path_id;      // exploration node that produced the SQL
    std::int64_t iteration = 0;
    std::int64_t created_at = 0;  // unix seconds; 0 in deterministic runs

    bool operator==(const TripletProvenance&) const = default;
};

struct Triplet {
    std::string id;
    SchemaFragment fragment;
    std::string sql;
    std::string description;
    std::vector<double> embedding;
    TripletProvenance provenance;

    bool operator==(const Triplet&) const = default;
};

// Appendix-style column rendering: "[Name]: n; [Type]: t; [Desc]: d".
// A ';' inside the description is escaped as "\;" so the document stays
// parseable.
inline std::string render_column_document(const std::string& name, const std::string& type,
                                          const std::string& description) {
    std::string desc;
    desc.reserve(description.size());
    for (char c : description) {
        if (c == ';') desc += "\\;";
        else desc += c;
    }
    return "[Name]: " + name + "; [Type]: " + type + "; [Desc]: " + desc;
}

inline std::string render_column_document(const FieldDef& field) {
    return render_column_document(field.name, field.data_type, field.description);
}

struct ParsedColumnDocument {
    std::string name;
    std::string type;
    std::string description;
};

inline std::optional<ParsedColumnDocument> parse_column_document(std::string_view doc) {
    constexpr std::string_view name_label = "[Name]: ";
    constexpr std::string_view type_label = "; [Type]: ";
    constexpr std::string_view desc_label = "; [Desc]: ";
    if (!doc.starts_with(name_label)) return std::nullopt;
    auto tpos = doc.find(type_label);
    if (tpos == std::string_view::npos) return std::nullopt;
    auto dpos = doc.find(desc_label, tpos + type_label.size());
    if (dpos == std::string_view::npos) return std::nullopt;
    ParsedColumnDocument out;
    out.name = std::string(doc.substr(name_label.size(), tpos - name_label.size()));
    out.type = std::string(doc.substr(tpos + type_label.size(), dpos - tpos - type_label.size()));
    std::string_view raw = doc.substr(dpos + desc_label.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\\' && i + 1 < raw.size() && raw[i + 1] == ';') {
            out.description += ';';
            ++i;
        } else {
            out.description += raw[i];
        }
    }
    return out;
}

struct ColumnDocument {
    std::string column_id;  // graph field node id
    std::string text;
    std::vector<double> embedding;
};

namespace detail {

inline nlohmann::json triplet_to_json(const Triplet& t) {
    nlohmann::json joins = nlohmann::json::array();
    for (const auto& [l, r] : t.fragment.joins)
        joins.push_back(nlohmann::json::array({l, r}));
    return nlohmann::json{
        {"id", t.id},
        {"fragment",
         {{"tables", t.fragment.tables},
          {"columns", t.fragment.columns},
          {"joins", std::move(joins)},
          {"groups", t.fragment.groups}}},
        {"sql", t.sql},
        {"description", t.description},
        {"embedding", t.embedding},
        {"provenance",
         {{"path", t.provenance.path_id},
          {"iteration", t.provenance.iteration},
          {"created_at", t.provenance.created_at}}}};
}

inline Triplet triplet_from_json(const nlohmann::json& j) {
    Triplet t;
    t.id = j.at("id").get<std::string>();
    const auto& jf = j.at("fragment");
    t.fragment.tables = jf.at("tables").get<std::vector<std::string>>();
    t.fragment.columns = jf.at("columns").get<std::vector<std::string>>();
    for (const auto& jp : jf.at("joins")) {
        if (!jp.is_array() || jp.size() != 2) throw SerializationError("bad join pair");
        t.fragment.joins.emplace_back(jp[0].get<std::string>(), jp[1].get<std::string>());
    }
    t.fragment.groups = jf.at("groups").get<std::vector<std::string>>();
    t.sql = j.at("sql").get<std::string>();
    t.description = j.at("description").get<std::string>();
    t.embedding = j.at("embedding").get<std::vector<double>>();
    const auto& jp = j.at("provenance");
    t.provenance.path_id = jp.at("path").get<std::string>();
    t.provenance.iteration = jp.at("iteration").get<std::int64_t>();
    t.provenance.created_at = jp.at("created_at").get<std::int64_t>();
    if (t.sql.empty()) throw SerializationError("triplet with empty sql");
    return t;
}

}  // namespace detail

class KnowledgeBase {
public:
    explicit KnowledgeBase(int dimension = kFallbackEmbeddingDim)
        : dim_(dimension), triplet_index_(dimension), column_index_(dimension) {}

    int dimension() const { return dim_; }

    void add_triplet(Triplet t) {
        if (t.sql.empty()) throw Error("triplet with empty sql");
        if (static_cast<int>(t.embedding.size()) != dim_)
            throw Error("triplet embedding dimension mismatch for \"" + t.id + "\"");
        triplet_index_.insert(t.id, t.embedding);
        triplets_.push_back(std::move(t));
    }

    const std::vector<Triplet>& triplets() const { return triplets_; }

    const Triplet* find_triplet(const std::string& id) const {
        for (const auto& t : triplets_)
            if (t.id == id) return &t;
        return nullptr;
    }

    // Builds the column-document index over every field node in the graph.
    void index_columns(const SchemaGraph& graph, Embedder& embedder) {
        columns_.clear();
        column_index_ = VectorIndex(dim_);
        for (const auto& [id, node] : graph.nodes()) {
            if (node.kind != NodeKind::Field) continue;
            ColumnDocument doc;
            doc.column_id = id;
            doc.text = render_column_document(node.name, node.data_type, node.description);
            doc.embedding = embedder.embed(doc.text);
            column_index_.insert(doc.column_id, doc.embedding);
            columns_.push_back(std::move(doc));
        }
    }

    const std::vector<ColumnDocument>& column_documents() const { return columns_; }

    std::vector<VectorIndex::Hit> retrieve_columns(std::string_view question,
                                                   Embedder& embedder, int k) const {
        if (column_index_.size() == 0) return {};
        return column_index_.top_k(embedder.embed(question), k);
    }

    std::vector<VectorIndex::Hit> retrieve_triplets(std::string_view question,
                                                    Embedder& embedder, int k) const {
        if (triplet_index_.size() == 0) return {};
        return triplet_index_.top_k(embedder.embed(question), k);
    }

    // --- persistence -------------------------------------------------------

    std::string serialize() const {
        std::string out;
        for (const auto& t : triplets_) out += detail::triplet_to_json(t).dump() + "\n";
        return out;
    }

    static KnowledgeBase deserialize(std::string_view text, int dimension) {
        KnowledgeBase kb(dimension);
        std::size_t lineno = 0;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string_view::npos) eol = text.size();
            std::string_view line = text.substr(pos, eol - pos);
            pos = eol + 1;
            ++lineno;
            if (line.empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                Triplet t = detail::triplet_from_json(j);
                if (static_cast<int>(t.embedding.size()) != dimension)
                    throw SerializationError("embedding dimension mismatch");
                kb.add_triplet(std::move(t));
            } catch (const std::exception& e) {
                throw SerializationError("kb file: bad record at line " +
                                         std::to_string(lineno) + ": " + e.what());
            }
        }
        return kb;
    }

    void persist(const std::string& path) const {
        std::string tmp = path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot write kb file: " + path);
            out << serialize();
        }
        if (std::rename(tmp.c_str(), path.c_str()) != 0)
            throw Error("cannot finalize kb file: " + path);
    }

    static KnowledgeBase load(const std::string& path, int dimension = kFallbackEmbeddingDim) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open kb file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return deserialize(buf.str(), dimension);
    }

private:
    int dim_;
    std::vector<Triplet> triplets_;
    VectorIndex triplet_index_;
    std::vector<ColumnDocument> columns_;
    VectorIndex column_index_;
};

}  // namespace sqlscout
