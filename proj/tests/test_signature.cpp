#include "sqlscout/signature.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sqlscout/detail/md5.hpp"

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

CatalogDef catalog_of(std::vector<TableDef> tables) {
    CatalogDef cat;
    cat.database_name = tables.empty() ? "db" : tables.front().database_name;
    SchemaDef s;
    s.name = tables.empty() ? "main" : tables.front().schema_name;
    s.tables = std::move(tables);
    cat.schemas.push_back(std::move(s));
    return cat;
}

}  // namespace

// Digests computed with an independent MD5 implementation and frozen here.
TEST(Md5, ReferenceDigests) {
    EXPECT_EQ(detail::md5_hex(""), "d41d8cd98f00b204e9800998ecf8427e");
    EXPECT_EQ(detail::md5_hex("name:TEXT|user_id:INTEGER"),
              "7428b537debb7b734870eb008c86c950");
    EXPECT_EQ(detail::md5_hex("The quick brown fox jumps over the lazy dog"),
              "9e107d9d372bb6826bd81d3542a419d6");
    // block-boundary lengths
    EXPECT_EQ(detail::md5_hex(std::string(55, 'a')), "ef1772b6dff9a122358552954ad0df65");
    EXPECT_EQ(detail::md5_hex(std::string(56, 'a')), "3b0c8ac703f828b04c6c197006d17218");
    EXPECT_EQ(detail::md5_hex(std::string(63, 'a')), "b06521f39153d618550606be297466d5");
    EXPECT_EQ(detail::md5_hex(std::string(64, 'a')), "014842d480b571495a4a0363793f7367");
    EXPECT_EQ(detail::md5_hex(std::string(120, 'a')), "5f61c0ccad4cac44c75ff505e1f1e537");
}

TEST(Md5, IncrementalMatchesOneShot) {
    std::string data(200, 'x');
    detail::Md5 h;
    h.update(data.data(), 7);
    h.update(data.data() + 7, 64);
    h.update(data.data() + 71, 129);
    auto digest = h.finish();
    std::string hex;
    static const char* alphabet = "0123456789abcdef";
    for (auto b : digest) {
        hex += alphabet[b >> 4];
        hex += alphabet[b & 0x0f];
    }
    EXPECT_EQ(hex, detail::md5_hex(data));
}

TEST(Signature, CanonicalStringAndDigest) {
    std::vector<FieldDef> fields = {field("user_id", "INTEGER"), field("name", "TEXT")};
    EXPECT_EQ(canonical_field_string(fields), "name:TEXT|user_id:INTEGER");
    EXPECT_EQ(generate_signature(fields).hex, "7428b537debb7b734870eb008c86c950");
}

TEST(Signature, ColumnOrderInvariance) {
    std::vector<FieldDef> a = {field("user_id", "INTEGER"), field("name", "TEXT")};
    std::vector<FieldDef> b = {field("name", "TEXT"), field("user_id", "INTEGER")};
    EXPECT_EQ(generate_signature(a), generate_signature(b));
}

TEST(Signature, EmptyFieldList) {
    std::vector<FieldDef> none;
    EXPECT_EQ(generate_signature(none).hex, "d41d8cd98f00b204e9800998ecf8427e");
}

TEST(Signature, PermutationProperty) {
    std::mt19937 rng(7);
    std::vector<FieldDef> fields;
    for (int i = 0; i < 9; ++i)
        fields.push_back(field("col" + std::to_string(i), i % 2 ? "TEXT" : "INTEGER"));
    auto expected = generate_signature(fields);
    for (int trial = 0; trial < 50; ++trial) {
        std::shuffle(fields.begin(), fields.end(), rng);
        EXPECT_EQ(generate_signature(fields), expected);
    }
}

TEST(Signature, TypeDifferenceChangesSignature) {
    std::vector<FieldDef> a = {field("x", "TEXT")};
    std::vector<FieldDef> b = {field("x", "INTEGER")};
    EXPECT_NE(generate_signature(a), generate_signature(b));
}

TEST(Signature, CaseSensitiveRendering) {
    std::vector<FieldDef> a = {field("X", "TEXT")};
    std::vector<FieldDef> b = {field("x", "TEXT")};
    EXPECT_NE(generate_signature(a), generate_signature(b));
}

TEST(CandidateGroups, ShardedTablesCollapse) {
    std::vector<TableDef> tables;
    std::vector<FieldDef> shard_fields = {field("event_id", "INTEGER"),
                                          field("event_name", "TEXT")};
    for (int i = 0; i < 30; ++i)
        tables.push_back(
            table("db", "main", "events_" + std::to_string(1000 + i), shard_fields));
    auto candidates = find_candidate_groups(catalog_of(std::move(tables)));
    ASSERT_EQ(candidates.size(), 1u);
    EXPECT_EQ(candidates[0].member_tables.size(), 30u);
    EXPECT_TRUE(std::is_sorted(candidates[0].member_tables.begin(),
                               candidates[0].member_tables.end()));
}

TEST(CandidateGroups, TypeMismatchSplits) {
    auto candidates = find_candidate_groups(catalog_of({
        table("db", "main", "a", {field("x", "TEXT"), field("y", "INTEGER")}),
        table("db", "main", "b", {field("x", "TEXT"), field("y", "REAL")}),
    }));
    EXPECT_EQ(candidates.size(), 2u);
}

TEST(CandidateGroups, SingletonKept) {
    auto candidates =
        find_candidate_groups(catalog_of({table("db", "main", "solo", {field("x", "TEXT")})}));
    ASSERT_EQ(candidates.size(), 1u);
    EXPECT_EQ(candidates[0].member_tables.size(), 1u);
}

TEST(SelectGroups, SingletonsDropped) {
    CandidateGroup g;
    g.signature = generate_signature(std::vector<FieldDef>{field("x", "TEXT")});
    g.fields = {field("x", "TEXT")};
    g.member_tables = {"db.main.solo"};
    EXPECT_TRUE(select_groups({g}).empty());
}

TEST(SelectGroups, GreedyOverlapGuard) {
    // gA: 3 tables, 5 fields; gB: 2 tables, one member shared with gA.
    // Hand trace: gA sorts first (more members) and is admitted; gB overlaps
    // on t2 and is rejected.
    CandidateGroup a;
    a.signature = SchemaSignature{std::string(32, 'a')};
    for (int i = 0; i < 5; ++i) a.fields.push_back(field("f" + std::to_string(i), "TEXT"));
    a.member_tables = {"db.main.t1", "db.main.t2", "db.main.t3"};
    CandidateGroup b;
    b.signature = SchemaSignature{std::string(32, 'b')};
    b.fields = {field("g0", "TEXT")};
    b.member_tables = {"db.main.t2", "db.main.t9"};
    auto groups = select_groups({b, a});
    ASSERT_EQ(groups.size(), 1u);
    EXPECT_EQ(groups[0].signature.hex, std::string(32, 'a'));
    EXPECT_EQ(groups[0].field_count, 5);
    EXPECT_EQ(groups[0].name, "FieldGroup_aaaaaaaa");
}

TEST(SelectGroups, DisjointCandidatesBothReturnedLargestFirst) {
    CandidateGroup big;
    big.signature = SchemaSignature{std::string(32, 'c')};
    big.fields = {field("x", "TEXT")};
    big.member_tables = {"db.main.a", "db.main.b", "db.main.c", "db.main.d"};
    CandidateGroup small;
    small.signature = SchemaSignature{std::string(32, 'd')};
    small.fields = {field("y", "TEXT")};
    small.member_tables = {"db.main.e", "db.main.f"};
    auto groups = select_groups({small, big});
    ASSERT_EQ(groups.size(), 2u);
    EXPECT_EQ(groups[0].member_tables.size(), 4u);
    EXPECT_EQ(groups[1].member_tables.size(), 2u);
}

TEST(SelectGroups, TieBreaksByFieldCountThenSignature) {
    CandidateGroup narrow, wide, third;
    narrow.signature = SchemaSignature{std::string(32, '9')};
    narrow.fields = {field("x", "TEXT")};
    narrow.member_tables = {"db.main.a", "db.main.b"};
    wide.signature = SchemaSignature{std::string(32, 'f')};
    wide.fields = {field("x", "TEXT"), field("y", "TEXT")};
    wide.member_tables = {"db.main.c", "db.main.d"};
    third.signature = SchemaSignature{std::string(32, '0')};
    third.fields = {field("z", "TEXT")};
    third.member_tables = {"db.main.e", "db.main.g"};
    auto groups = select_groups({narrow, wide, third});
    ASSERT_EQ(groups.size(), 3u);
    // field count desc first, then equal (members, fields) order by hex asc
    EXPECT_EQ(groups[0].signature.hex, std::string(32, 'f'));
    EXPECT_EQ(groups[1].signature.hex, std::string(32, '0'));
    EXPECT_EQ(groups[2].signature.hex, std::string(32, '9'));
}

TEST(SelectGroups, OutputNonOverlappingAndDeterministic) {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<CandidateGroup> candidates;
        int ngroups = 1 + static_cast<int>(rng() % 6);
        for (int gi = 0; gi < ngroups; ++gi) {
            CandidateGroup g;
            std::string hex;
            for (int i = 0; i < 32; ++i) hex += "0123456789abcdef"[rng() % 16];
            g.signature = SchemaSignature{hex};
            int nfields = 1 + static_cast<int>(rng() % 4);
            for (int i = 0; i < nfields; ++i)
                g.fields.push_back(field("f" + std::to_string(i), "TEXT"));
            int nmembers = 1 + static_cast<int>(rng() % 5);
            std::set<std::string> members;
            for (int i = 0; i < nmembers; ++i)
                members.insert("db.main.t" + std::to_string(rng() % 12));
            g.member_tables.assign(members.begin(), members.end());
            candidates.push_back(std::move(g));
        }
        auto once = select_groups(candidates);
        auto twice = select_groups(candidates);
        EXPECT_EQ(once, twice);
        std::set<std::string> assigned;
        for (const auto& g : once) {
            for (const auto& m : g.member_tables) {
                EXPECT_TRUE(assigned.insert(m).second)
                    << "member " << m << " appears in two selected groups";
            }
        }
    }
}
