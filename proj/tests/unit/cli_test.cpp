#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "oracles.hpp"
#include "service_harness.hpp"
#include "sia/cli.hpp"
#include "sia/record_xml.hpp"
#include "sia/xml.hpp"
#include "support.hpp"

namespace sia {
namespace {

using test::TempDir;
namespace fs = std::filesystem;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome sia_cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"sia"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_files(const fs::path& dir) {
    std::size_t n = 0;
    std::error_code ec;
    for (const auto& e : fs::recursive_directory_iterator(dir, ec))
        if (e.is_regular_file()) ++n;
    return n;
}

// Castle data as an ingest manifest: reference data plus one model, plan and
// photo per place x period pair, with assets next to the manifest.
fs::path write_castle_manifest(const fs::path& dir, std::vector<RecordDraft> extra = {}) {
    xml::Element root("manifest");
    auto ref = test::castle_reference();
    for (const auto& v : ref.vocabularies) root.children.push_back({vocabulary_to_element(v)});
    for (const auto& p : ref.periods) root.children.push_back({period_to_element(p)});
    for (const auto& p : ref.places) root.children.push_back({place_to_element(p)});

    auto entry = [&](KindTag kind, const std::string& place, const std::string& period, const std::string& file,
                     const std::string& format) {
        RecordDraft d;
        d.kind.tag = kind;
        d.title = place + " " + file;
        d.author = "Survey team";
        d.placeRefs = {place};
        d.periodRefs = {period};
        d.subjectKeywords = {place};
        d.content = {"assets/" + file, format, "", 0};
        root.children.push_back({draft_to_entry_element(d)});
    };
    double offset = 0;
    for (const auto& place : test::kCastlePlaces) {
        for (const auto& period : test::kCastlePeriods) {
            const std::string stem = place + "-" + period;
            test::write_file(dir / "assets" / (stem + ".x3d"), "<X3D><Scene><Shape><Box/></Shape></Scene></X3D>\n");
            test::write_file(dir / "assets" / (stem + ".svg"), test::sample_svg(offset, 0, 40, 30));
            test::write_file(dir / "assets" / (stem + ".jpg"), "\xFF\xD8\xFF jpeg " + stem);
            entry(KindTag::model3d, place, period, stem + ".x3d", "model/x3d+xml");
            entry(KindTag::vectorPlan, place, period, stem + ".svg", "image/svg+xml");
            entry(KindTag::photo, place, period, stem + ".jpg", "image/jpeg");
        }
        offset += 50;
    }
    for (const auto& d : extra) root.children.push_back({draft_to_entry_element(d)});
    test::write_file(dir / "manifest.xml", xml::write(root));
    return dir / "manifest.xml";
}

class CliStore : public ::testing::Test {
protected:
    void SetUp() override { ASSERT_EQ(sia_cli({"init", "--data-dir", data()}).code, cli::kExitOk); }
    std::string data() const { return (dir / "data").string(); }

    TempDir dir;
};

TEST(Cli, UsageErrors) {
    EXPECT_EQ(sia_cli({}).code, cli::kExitUsage);
    EXPECT_EQ(sia_cli({"frobnicate"}).code, cli::kExitUsage);
    EXPECT_EQ(sia_cli({"search", "--format", "yaml"}).code, cli::kExitUsage);
    EXPECT_EQ(sia_cli({"compose-model", "--data-dir", "x", "--places", "a"}).code, cli::kExitUsage);
}

TEST_F(CliStore, InitThenValidateEmptyStore) {
    auto r = sia_cli({"validate", "--data-dir", data()});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("0 records, 0 with violations"), std::string::npos);
    EXPECT_EQ(sia_cli({"init", "--data-dir", data()}).code, cli::kExitStorage);
    EXPECT_EQ(sia_cli({"validate", "--data-dir", (dir / "nowhere").string()}).code, cli::kExitStorage);
}

TEST_F(CliStore, IngestManifestThenComposeModel) {
    auto manifest = write_castle_manifest(dir / "in");
    auto r = sia_cli({"ingest", "--data-dir", data(), "--manifest", manifest.string(), "--format", "json"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    auto report = nlohmann::json::parse(r.out);
    EXPECT_EQ(report["ingested"].size(), 18u);
    EXPECT_TRUE(report["failed"].empty());

    auto model = sia_cli({"compose-model", "--data-dir", data(), "--places", "yard,chapel,hall", "--periods", "1100,1150"});
    ASSERT_EQ(model.code, cli::kExitOk) << model.err;
    auto census = test::census_x3d(model.out);
    EXPECT_EQ(census.error, "");
    EXPECT_EQ(census.groupNames.size(), 6u);
    EXPECT_EQ(census.colors, (std::set<std::string>{"1 0.9 0", "1 0.6 0.75"}));

    auto out = dir / "plan.svg";
    auto plan = sia_cli({"compose-plan", "--data-dir", data(), "--places", "chapel", "--periods", "1100,1150", "--out",
                         out.string()});
    ASSERT_EQ(plan.code, cli::kExitOk) << plan.err;
    EXPECT_EQ(test::census_svg(*read_file(out)).layerIds.size(), 2u);

    auto warned = sia_cli({"compose-model", "--data-dir", data(), "--places", "castle", "--periods", "1100"});
    EXPECT_EQ(warned.code, cli::kExitFailed);
    EXPECT_NE(warned.err.find("empty-composition"), std::string::npos);

    auto v = sia_cli({"validate", "--data-dir", data()});
    EXPECT_EQ(v.code, cli::kExitOk);
    EXPECT_NE(v.out.find("18 records, 0 with violations"), std::string::npos);
}

TEST_F(CliStore, FailedEntryLeavesNoOrphanAsset) {
    RecordDraft bad;
    bad.kind.tag = KindTag::photo;
    bad.title = "unknown keyword";
    bad.placeRefs = {"yard"};
    bad.subjectKeywords = {"dragon"};
    bad.content = {"assets/orphan.jpg", "image/jpeg", "", 0};
    RecordDraft missing = bad;
    missing.subjectKeywords = {"yard"};
    missing.content.href = "assets/absent.jpg";
    auto manifest = write_castle_manifest(dir / "in", {bad, missing});
    test::write_file(dir / "in" / "assets" / "orphan.jpg", "\xFF\xD8\xFF unique orphan bytes");

    auto r = sia_cli({"ingest", "--data-dir", data(), "--manifest", manifest.string(), "--format", "json"});
    EXPECT_EQ(r.code, cli::kExitFailed);
    auto report = nlohmann::json::parse(r.out);
    EXPECT_EQ(report["ingested"].size(), 18u);
    ASSERT_EQ(report["failed"].size(), 2u);
    EXPECT_EQ(report["failed"][0]["violations"][0]["path"], "subjectKeywords[0]");
    EXPECT_EQ(report["failed"][1]["violations"][0]["rule"], "missing-asset");
    // media is content addressed: one file per distinct accepted asset, none for the rejected entry
    std::set<std::string> accepted;
    for (const auto& e : fs::directory_iterator(dir / "in" / "assets"))
        if (e.path().filename() != "orphan.jpg") accepted.insert(*read_file(e.path()));
    EXPECT_EQ(count_files(dir / "data" / "media"), accepted.size());
}

TEST_F(CliStore, SearchMatchesHttpListing) {
    ASSERT_EQ(sia_cli({"ingest", "--data-dir", data(), "--manifest", write_castle_manifest(dir / "in").string()}).code,
              cli::kExitOk);
    auto cli_json = [&](std::vector<std::string> args) {
        args.insert(args.begin(), {"search", "--data-dir", data(), "--format", "json"});
        auto r = sia_cli(args);
        EXPECT_EQ(r.code, cli::kExitOk) << r.err;
        return nlohmann::json::parse(r.out);
    };
    auto a = cli_json({"--place", "chapel", "--kind", "photo,vectorPlan", "--limit", "3"});
    auto b = cli_json({"--period-from", "1120", "--period-to", "1200", "--keyword", "hall"});
    auto c = cli_json({});

    auto store = test::reopen_store(dir / "data");
    test::ServiceHarness http(*store);
    auto ha = http.get("/records?place=chapel&kind=photo&kind=vectorPlan&limit=3", "");
    auto hb = http.get("/records?from=1120&to=1200&keyword=hall", "");
    auto hc = http.get("/records", "");
    ASSERT_EQ(ha->status, 200);
    EXPECT_EQ(a, nlohmann::json::parse(ha->body));
    EXPECT_EQ(b, nlohmann::json::parse(hb->body));
    EXPECT_EQ(c, nlohmann::json::parse(hc->body));
    EXPECT_EQ(a["total"], 4);
    EXPECT_EQ(a["items"].size(), 3u);
    EXPECT_EQ(b["total"], 3);

    auto text = sia_cli({"search", "--data-dir", data(), "--place", "yard"});
    EXPECT_NE(text.out.find("6 of 6 records"), std::string::npos);
    EXPECT_EQ(sia_cli({"search", "--data-dir", data(), "--place", "moat"}).code, cli::kExitFailed);
}

TEST_F(CliStore, ExportReindexAndWriterLock) {
    ASSERT_EQ(sia_cli({"ingest", "--data-dir", data(), "--manifest", write_castle_manifest(dir / "in").string()}).code,
              cli::kExitOk);
    auto ids = test::reopen_store(dir / "data")->record_ids();
    ASSERT_EQ(ids.size(), 18u);
    auto exported = sia_cli({"export", "--data-dir", data(), "--id", ids.front()});
    ASSERT_EQ(exported.code, cli::kExitOk);
    EXPECT_EQ(exported.out, *read_file(dir / "data" / "records" / (ids.front() + ".xml")));
    auto parsed = record_from_xml(exported.out);
    ASSERT_TRUE(parsed);
    EXPECT_EQ(parsed->id, ids.front());
    EXPECT_EQ(sia_cli({"export", "--data-dir", data(), "--id", "missing"}).code, cli::kExitFailed);

    auto reindexed = sia_cli({"reindex", "--data-dir", data()});
    EXPECT_EQ(reindexed.code, cli::kExitOk);
    EXPECT_NE(reindexed.out.find("18 records indexed"), std::string::npos);

    {
        auto holder = test::reopen_store(dir / "data");
        EXPECT_EQ(sia_cli({"reindex", "--data-dir", data()}).code, cli::kExitStorage);
        EXPECT_EQ(sia_cli({"search", "--data-dir", data()}).code, cli::kExitOk);
    }
    EXPECT_EQ(sia_cli({"reindex", "--data-dir", data()}).code, cli::kExitOk);
}

TEST_F(CliStore, MigrateProposesThenApplies) {
    auto delta = dir / "delta.xml";
    test::write_file(delta, "<delta><add path=\"photo/lens\" type=\"text\" required=\"false\" repeatable=\"false\"/></delta>");
    auto proposed = sia_cli({"migrate", "--data-dir", data(), "--delta", delta.string()});
    ASSERT_EQ(proposed.code, cli::kExitOk) << proposed.err;
    EXPECT_NE(proposed.out.find("version 1 -> 2"), std::string::npos);
    EXPECT_NE(proposed.out.find("fill-empty"), std::string::npos);
    auto applied = sia_cli({"migrate", "--data-dir", data(), "--delta", delta.string(), "--apply", "--format", "json"});
    ASSERT_EQ(applied.code, cli::kExitOk) << applied.err;
    EXPECT_EQ(nlohmann::json::parse(applied.out)["version"], 2);
    EXPECT_EQ(sia_cli({"migrate", "--data-dir", data(), "--delta", delta.string()}).code, cli::kExitFailed);
}

}  // namespace
}  // namespace sia
