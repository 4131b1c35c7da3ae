#pragma once

// Schema signatures and shared-field-group selection.
//
// A table's signature is the MD5 of its canonical field string: each field
// rendered as "name:type", rendered strings sorted by code point, joined
// with "|". Identical field multisets hash identically regardless of the
// declared column order.

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sqlscout/catalog.hpp"
#include "sqlscout/detail/md5.hpp"
#include "sqlscout/errors.hpp"

namespace sqlscout {

struct SchemaSignature {
    std::string hex;  // 32 lowercase hex chars

    auto operator<=>(const SchemaSignature&) const = default;

    std::string short_tag() const { return hex.substr(0, 8); }
};

inline std::string canonical_field_string(std::span<const FieldDef> fields) {
    std::vector<std::string> rendered;
    rendered.reserve(fields.size());
    for (const auto& f : fields) rendered.push_back(f.name + ":" + f.data_type);
    std::sort(rendered.begin(), rendered.end());
    std::string joined;
    for (std::size_t i = 0; i < rendered.size(); ++i) {
        if (i > 0) joined += '|';
        joined += rendered[i];
    }
    return joined;
}

inline SchemaSignature generate_signature(std::span<const FieldDef> fields) {
    return SchemaSignature{detail::md5_hex(canonical_field_string(fields))};
}

inline SchemaSignature generate_signature(const std::vector<FieldDef>& fields) {
    return generate_signature(std::span<const FieldDef>(fields));
}

// One signature class over a catalog: the tables whose full field set
// hashes identically. Field list comes from the lexicographically first
// member, which acts as the class representative.
struct CandidateGroup {
    SchemaSignature signature;
    std::vector<FieldDef> fields;
    std::vector<std::string> member_tables;  // fully-qualified, sorted

    bool operator==(const CandidateGroup&) const = default;
};

struct SharedFieldGroup {
    SchemaSignature signature;
    std::string name;  // FieldGroup_<first 8 hex chars>
    std::vector<FieldDef> fields;
    std::vector<std::string> member_tables;
    int field_count = 0;

    bool operator==(const SharedFieldGroup&) const = default;
};

inline std::vector<CandidateGroup> find_candidate_groups(const CatalogDef& catalog) {
    struct Bucket {
        const TableDef* representative = nullptr;
        std::vector<std::string> members;
    };
    std::map<std::string, Bucket> buckets;  // signature hex -> bucket
    for (const TableDef* t : catalog.all_tables()) {
        auto sig = generate_signature(t->fields);
        auto& b = buckets[sig.hex];
        b.members.push_back(t->fullname());
        if (!b.representative || t->fullname() < b.representative->fullname())
            b.representative = t;
    }
    std::vector<CandidateGroup> out;
    out.reserve(buckets.size());
    for (auto& [hex, bucket] : buckets) {
        CandidateGroup g;
        g.signature = SchemaSignature{hex};
        g.fields = bucket.representative->fields;
        std::sort(bucket.members.begin(), bucket.members.end());
        g.member_tables = std::move(bucket.members);
        out.push_back(std::move(g));
    }
    return out;  // keyed map iteration: ascending signature hex
}

// Greedy non-overlapping selection. Candidates with fewer than two members
// are dropped; survivors are ordered by descending member count, then
// descending field count, then ascending signature hex, and admitted only
// when none of their members is already assigned.
inline std::vector<SharedFieldGroup> select_groups(std::vector<CandidateGroup> candidates) {
    std::erase_if(candidates,
                  [](const CandidateGroup& g) { return g.member_tables.size() < 2; });
    std::sort(candidates.begin(), candidates.end(),
              [](const CandidateGroup& a, const CandidateGroup& b) {
                  if (a.member_tables.size() != b.member_tables.size())
                      return a.member_tables.size() > b.member_tables.size();
                  if (a.fields.size() != b.fields.size())
                      return a.fields.size() > b.fields.size();
                  return a.signature.hex < b.signature.hex;
              });
    std::vector<SharedFieldGroup> out;
    std::set<std::string> assigned;
    for (auto& cand : candidates) {
        bool overlaps = std::any_of(
            cand.member_tables.begin(), cand.member_tables.end(),
            [&](const std::string& m) { return assigned.contains(m); });
        if (overlaps) continue;
        assigned.insert(cand.member_tables.begin(), cand.member_tables.end());
        SharedFieldGroup g;
        g.signature = cand.signature;
        g.name = "FieldGroup_" + cand.signature.short_tag();
        g.fields = std::move(cand.fields);
        g.member_tables = std::move(cand.member_tables);
        g.field_count = static_cast<int>(g.fields.size());
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace sqlscout
