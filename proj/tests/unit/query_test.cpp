#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "support.hpp"

namespace sia {
namespace {

using test::Rng;
using test::TempDir;

std::vector<std::string> ids_of(const ResultPage& page) {
    std::vector<std::string> out;
    for (const auto& item : page.items) out.push_back(item.id);
    return out;
}

std::vector<std::string> all_ids(const QueryEngine& q, const QuerySpec& spec) {
    auto page = q.search(spec, 0, kMaxPageLimit);
    EXPECT_TRUE(page) << page.error().describe();
    EXPECT_EQ(page->total, page->items.size()) << "fixture larger than one page";
    return ids_of(*page);
}

std::vector<std::string> authors_of(const ReferenceData& ref) { return ref.find_vocabulary(kAuthorFacet)->terms; }

// A store of `n` random records with a tenth of them archived.
std::unique_ptr<Store> random_store(const TempDir& dir, Rng& rng, const ReferenceData& ref, int n) {
    auto store = test::make_populated_store(dir / "data", ref, true);
    for (int i = 0; i < n; ++i) {
        auto r = store->ingest(test::random_draft(rng, ref, store->schema()), Role::expert);
        EXPECT_TRUE(r) << r.error().describe();
        if (r && i % 10 == 3) EXPECT_TRUE(store->archive(r->id, Role::expert));
    }
    return store;
}

class CastleQueries : public ::testing::Test {
protected:
    void SetUp() override {
        store = test::make_store(dir / "data");
        fx = test::build_castle(*store, dir / "assets");
    }
    TempDir dir;
    std::unique_ptr<Store> store;
    test::CastleFixture fx;
};

TEST_F(CastleQueries, FacetsListVocabulariesAndDerivedFacets) {
    QueryEngine q(*store);
    auto facets = q.list_facets();
    ASSERT_TRUE(facets);
    EXPECT_EQ(facets->at("subject"), (std::vector<std::string>{"chapel", "hall", "yard"}));
    EXPECT_EQ(facets->at("place"), (std::vector<std::string>{"castle", "chapel", "hall", "yard"}));
    EXPECT_EQ(facets->at("period"), (std::vector<std::string>{"1100", "1150"}));
    EXPECT_EQ(facets->at("kind"), (std::vector<std::string>{"model3d", "photo", "vectorPlan"}));
    EXPECT_EQ(facets->at("author"), std::vector<std::string>{"Survey team"});

    ASSERT_TRUE(store->add_vocabulary_term("subject", "apse", Role::expert));
    EXPECT_EQ(q.list_facets()->at("subject"), (std::vector<std::string>{"chapel", "hall", "yard", "apse"}));
}

TEST(Facets, EmptyStoreHasEmptyLists) {
    TempDir dir;
    auto store = test::make_store(dir / "data");
    auto facets = QueryEngine(*store).list_facets();
    ASSERT_TRUE(facets);
    EXPECT_FALSE(facets->empty());
    for (const auto& [name, terms] : *facets) EXPECT_TRUE(terms.empty()) << name;
}

TEST_F(CastleQueries, PlaceAndEpochSelectsMatchingRecordsOnly) {
    QueryEngine q(*store);
    QuerySpec spec;
    spec.placeIds = {"chapel"};
    spec.epochInterval = std::make_pair(1100, 1150);
    auto got = all_ids(q, spec);
    EXPECT_EQ(got, test::oracle_search(*store->all_records(), store->reference(), spec));
    EXPECT_EQ(got.size(), 6u);
    for (const auto& id : got) {
        auto r = *store->read(id);
        EXPECT_EQ(r.placeRefs, std::vector<std::string>{"chapel"});
    }
    // kind order: model3d, photo, vectorPlan
    EXPECT_EQ(store->read(got.front())->kind.tag, KindTag::model3d);
    EXPECT_EQ(store->read(got.back())->kind.tag, KindTag::vectorPlan);
}

TEST_F(CastleQueries, EmptySpecReturnsEverything) {
    QueryEngine q(*store);
    auto page = q.search({});
    ASSERT_TRUE(page);
    EXPECT_EQ(page->total, fx.all.size());
    EXPECT_EQ(ids_of(*page), test::oracle_search(*store->all_records(), store->reference(), {}));
    EXPECT_EQ(*q.search({}), *page);
}

TEST_F(CastleQueries, BrowseByHistory) {
    QueryEngine q(*store);
    auto page = q.browse_by_history("1100");
    ASSERT_TRUE(page);
    EXPECT_EQ(page->total, 9u);
    for (const auto& place : test::kCastlePlaces) {
        auto model = fx.models.at({place, "1100"});
        EXPECT_TRUE(std::any_of(page->items.begin(), page->items.end(), [&](const ResultItem& i) { return i.id == model; }))
            << place;
    }
    for (const auto& item : page->items) {
        auto refs = store->read(item.id)->periodRefs;
        EXPECT_NE(std::find(refs.begin(), refs.end(), "1100"), refs.end());
    }
    ASSERT_TRUE(store->put_period({"1300", "Year 1300", 1300, 1300, ""}, Role::expert));
    auto empty = q.browse_by_history("1300");
    ASSERT_TRUE(empty);
    EXPECT_EQ(empty->total, 0u);
    EXPECT_EQ(q.browse_by_history("1999").error().code, ErrorCode::unknown_period);
}

TEST_F(CastleQueries, BrowseByPlace) {
    QueryEngine q(*store);
    auto castle = q.browse_by_place("castle");
    ASSERT_TRUE(castle);
    std::set<std::string> union_of_children{fx.all.back()};  // the root-level overview photo
    for (const auto& place : test::kCastlePlaces)
        for (const auto& id : ids_of(*q.browse_by_place(place))) union_of_children.insert(id);
    auto got = ids_of(*castle);
    EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), union_of_children);

    // a leaf with a single photo
    ASSERT_TRUE(store->put_place({"apse", "Apse", std::string("chapel"), "", std::nullopt}, Role::expert));
    RecordDraft d;
    d.kind.tag = KindTag::photo;
    d.title = "Apse window";
    d.placeRefs = {"apse"};
    d.content = {"external/apse.jpg", "image/jpeg", std::string(64, 'e'), 1};
    auto photo = *store->ingest(d, Role::expert);
    EXPECT_EQ(ids_of(*q.browse_by_place("apse")), std::vector<std::string>{photo.id});
    EXPECT_EQ(q.browse_by_place("moat").error().code, ErrorCode::unknown_place);
}

TEST_F(CastleQueries, RelatedScoresSharedPlaceAndPeriod) {
    QueryEngine q(*store);
    RecordDraft d;
    d.kind.tag = KindTag::photo;
    d.placeRefs = {"chapel"};
    d.periodRefs = {"1100"};
    d.content = {"external/x.jpg", "image/jpeg", std::string(64, 'f'), 1};
    d.title = "Chapel north";
    auto a = *store->ingest(d, Role::expert);
    d.title = "Chapel south";
    auto b = *store->ingest(d, Role::expert);

    auto related = q.related_documents(a.id);
    ASSERT_TRUE(related);
    auto hit = std::find_if(related->items.begin(), related->items.end(), [&](const ResultItem& i) { return i.id == b.id; });
    ASSERT_NE(hit, related->items.end());
    EXPECT_EQ(hit->score, 4);
    auto back = q.related_documents(b.id);
    auto hit_back = std::find_if(back->items.begin(), back->items.end(), [&](const ResultItem& i) { return i.id == a.id; });
    ASSERT_NE(hit_back, back->items.end());
    EXPECT_EQ(hit_back->score, 4);

    d.placeRefs.clear();
    d.periodRefs.clear();
    d.title = "Loose sheet";
    auto loner = *store->ingest(d, Role::expert);
    EXPECT_EQ(q.related_documents(loner.id)->total, 0u);
    EXPECT_EQ(q.related_documents("nope").error().code, ErrorCode::not_found);
}

TEST(Search, InvalidSpecsAreRejected) {
    TempDir dir;
    auto store = test::make_store(dir / "data");
    ASSERT_TRUE(store->merge_reference(test::castle_reference(), Role::expert));
    QueryEngine q(*store);
    auto code = [&](QuerySpec s) {
        auto r = q.search(s);
        return r ? std::string("ok") : std::string(to_string(r.error().code));
    };
    QuerySpec s;
    s.epochInterval = std::make_pair(1150, 1100);
    EXPECT_EQ(code(s), "invalid-spec");
    s = {};
    s.placeIds = {"moat"};
    EXPECT_EQ(code(s), "invalid-spec");
    s = {};
    s.keywords = {"castrum"};
    EXPECT_EQ(code(s), "invalid-spec");
    s = {};
    s.author = "Nobody";
    EXPECT_EQ(code(s), "invalid-spec");
    s = {};
    s.keywords = {"chapel"};
    EXPECT_EQ(code(s), "ok");
}

TEST(Search, PaginationClampsAndSlices) {
    TempDir dir;
    Rng rng(1);
    auto ref = test::random_reference(rng, 4, 2, 2);
    auto store = random_store(dir, rng, ref, 60);
    QueryEngine q(*store);
    auto first = *q.search({});
    EXPECT_EQ(first.limit, kDefaultPageLimit);
    EXPECT_EQ(first.items.size(), 50u);
    auto all = *q.search({}, 0, 100000);
    EXPECT_EQ(all.limit, kMaxPageLimit);
    auto second = *q.search({}, 50, 50);
    EXPECT_EQ(second.offset, 50u);
    auto joined = ids_of(first);
    for (const auto& id : ids_of(second)) joined.push_back(id);
    EXPECT_EQ(joined, ids_of(all));
    EXPECT_TRUE(q.search({}, 1000, 10)->items.empty());
}

TEST(Search, MatchesLinearScanOracle) {
    TempDir dir;
    Rng rng(2);
    auto ref = test::random_reference(rng, 25, 12, 10);
    auto store = random_store(dir, rng, ref, 500);
    auto records = test::scan_record_files(dir / "data");
    ASSERT_EQ(records.size(), 500u);
    QueryEngine q(*store);
    for (int i = 0; i < 100; ++i) {
        auto spec = test::random_spec(rng, ref, authors_of(ref));
        auto expected = test::oracle_search(records, ref, spec);
        auto page = q.search(spec, 0, kMaxPageLimit);
        ASSERT_TRUE(page) << page.error().describe();
        EXPECT_EQ(page->total, expected.size());
        expected.resize(std::min(expected.size(), kMaxPageLimit));
        EXPECT_EQ(ids_of(*page), expected) << "spec " << i;
    }
}

TEST(Search, AddingCriteriaNeverGrowsResults) {
    TempDir dir;
    Rng rng(3);
    auto ref = test::random_reference(rng, 12, 8, 6);
    auto store = random_store(dir, rng, ref, 150);
    QueryEngine q(*store);
    for (int i = 0; i < 60; ++i) {
        auto base = test::random_spec(rng, ref, authors_of(ref));
        auto narrower = base;
        switch (i % 4) {
            case 0: narrower.kinds.insert(KindTag::photo); if (!base.kinds.empty()) narrower.kinds = base.kinds; break;
            case 1: narrower.keywords = {ref.find_vocabulary(kSubjectFacet)->terms[static_cast<std::size_t>(i) % 6]}; break;
            case 2: narrower.author = authors_of(ref)[static_cast<std::size_t>(i) % 4]; break;
            default: narrower.epochInterval = std::make_pair(1100, 1200); break;
        }
        if (i % 4 == 1 && !base.keywords.empty()) continue;  // replacing a keyword set is not narrowing
        if (i % 4 == 2 && base.author) continue;
        if (i % 4 == 3 && base.epochInterval) continue;
        auto wide = all_ids(q, base);
        auto narrow = all_ids(q, narrower);
        std::set<std::string> wide_set(wide.begin(), wide.end());
        for (const auto& id : narrow) EXPECT_TRUE(wide_set.count(id)) << id;
    }
}

TEST(Search, KeywordsOrWithinAndAcrossFacets) {
    TempDir dir;
    Rng rng(4);
    auto ref = test::random_reference(rng, 10, 6, 6);
    auto store = random_store(dir, rng, ref, 200);
    QueryEngine q(*store);
    const auto& terms = ref.find_vocabulary(kSubjectFacet)->terms;
    for (int i = 0; i < 30; ++i) {
        auto other = test::random_spec(rng, ref, authors_of(ref));
        other.keywords.clear();
        const auto& a = terms[static_cast<std::size_t>(i) % terms.size()];
        const auto& b = terms[static_cast<std::size_t>(i * 7 + 1) % terms.size()];
        auto both = other;
        both.keywords = {a, b};
        auto only_a = other;
        only_a.keywords = {a};
        auto only_b = other;
        only_b.keywords = {b};
        auto rest = all_ids(q, other);
        std::set<std::string> rest_set(rest.begin(), rest.end());
        std::set<std::string> expected;
        for (const auto& id : all_ids(q, only_a)) expected.insert(id);
        for (const auto& id : all_ids(q, only_b)) expected.insert(id);
        for (const auto& id : expected) EXPECT_TRUE(rest_set.count(id));
        auto got = all_ids(q, both);
        EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), expected);
    }
}

TEST(Related, RankingMatchesScoreAllOracle) {
    TempDir dir;
    Rng rng(5);
    auto ref = test::random_reference(rng, 10, 6, 8);
    auto store = random_store(dir, rng, ref, 200);
    auto records = *store->all_records();
    QueryEngine q(*store);
    for (int i = 0; i < 40; ++i) {
        const auto& source = records[static_cast<std::size_t>(i) * 5];
        auto expected = test::oracle_related(records, source.id);
        auto page = q.related_documents(source.id, kMaxPageLimit);
        ASSERT_TRUE(page);
        EXPECT_EQ(page->total, expected.size());
        std::vector<std::pair<std::string, int>> got;
        for (const auto& item : page->items) got.emplace_back(item.id, item.score.value_or(-1));
        EXPECT_EQ(got, expected) << source.id;
    }
}

TEST(Search, RepeatedQueriesAreIdentical) {
    TempDir dir;
    Rng rng(6);
    auto ref = test::random_reference(rng, 10, 6, 6);
    auto store = random_store(dir, rng, ref, 120);
    QueryEngine q(*store);
    for (int i = 0; i < 20; ++i) {
        auto spec = test::random_spec(rng, ref, authors_of(ref));
        EXPECT_EQ(*q.search(spec, 3, 17), *q.search(spec, 3, 17));
    }
}

}  // namespace
}  // namespace sia
