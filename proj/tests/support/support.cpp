#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include "sia/record_xml.hpp"

namespace sia::test {

namespace {

[[noreturn]] void die(const std::string& what, const Error& e) {
    std::cerr << "test setup failed: " << what << ": " << e.describe() << '\n';
    for (const auto& v : e.violations) std::cerr << "  " << v.path << ": " << v.message << '\n';
    std::abort();
}

template <typename T>
T must(Result<T> r, const std::string& what) {
    if (!r) die(what, r.error());
    return std::move(r).value();
}

void must(Result<void> r, const std::string& what) {
    if (!r) die(what, r.error());
}

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))];
}

template <typename T>
std::vector<T> sample(Rng& rng, const std::vector<T>& from, int max_count) {
    std::vector<T> pool = from;
    std::shuffle(pool.begin(), pool.end(), rng);
    int n = std::min<int>(uniform(rng, 0, max_count), static_cast<int>(pool.size()));
    pool.resize(static_cast<std::size_t>(n));
    return pool;
}

std::string hex(Rng& rng, int digits) {
    static const char* kHex = "0123456789abcdef";
    std::string out;
    for (int i = 0; i < digits; ++i) out += kHex[uniform(rng, 0, 15)];
    return out;
}

std::string slug(Rng& rng) {
    static const std::vector<std::string> kWords{"wall", "tower", "gate", "chapel", "hall", "yard", "keep",
                                                 "moat", "stair", "vault", "well", "2", "west", "north"};
    std::string out = pick(rng, kWords);
    for (int n = uniform(rng, 0, 2); n > 0; --n) out += "-" + pick(rng, kWords);
    return out + "-" + std::to_string(uniform(rng, 0, 9999));
}

CalendarDate random_date(Rng& rng, int lo, int hi) {
    return {uniform(rng, lo, hi), static_cast<unsigned>(uniform(rng, 1, 12)), static_cast<unsigned>(uniform(rng, 1, 28))};
}

Timestamp random_timestamp(Rng& rng) {
    std::uniform_int_distribution<std::int64_t> ms(0, 4'102'444'800'000LL);  // up to 2100
    return Timestamp{std::chrono::milliseconds{ms(rng)}};
}

double random_double(Rng& rng) {
    switch (uniform(rng, 0, 3)) {
        case 0: return static_cast<double>(uniform(rng, -500, 500));
        case 1: return std::uniform_real_distribution<double>(-1e6, 1e6)(rng);
        case 2: return std::uniform_real_distribution<double>(-1e-3, 1e-3)(rng);
        default: return std::ldexp(std::uniform_real_distribution<double>(0.5, 1)(rng), uniform(rng, -60, 60));
    }
}

std::string value_for(Rng& rng, const AttributeNode& node, const ReferenceData& ref) {
    switch (node.valueType) {
        case ValueType::integer: return std::to_string(uniform(rng, -5000, 5000));
        case ValueType::decimal: return std::to_string(uniform(rng, 0, 999)) + "." + std::to_string(uniform(rng, 0, 99));
        case ValueType::date: return format_date(random_date(rng, 1900, 2007));
        case ValueType::enumeration: return pick(rng, ref.find_vocabulary(node.facet)->terms);
        case ValueType::text:
        case ValueType::group: break;
    }
    return random_text(rng, 1, 24);
}

AttributeSet random_set(Rng& rng, const std::vector<AttributeNode>& nodes, const ReferenceData& ref, int depth) {
    AttributeSet set;
    for (const auto& node : nodes) {
        if (!node.required && coin(rng, 0.4)) continue;
        AttributeEntry entry;
        int count = node.repeatable ? uniform(rng, 1, 3) : 1;
        for (int i = 0; i < count; ++i) {
            if (node.valueType == ValueType::group) entry.groups.push_back(random_set(rng, node.children, ref, depth + 1));
            else entry.values.push_back(value_for(rng, node, ref));
        }
        set.entries.emplace(node.name, std::move(entry));
    }
    return set;
}

AttributeSet arbitrary_set(Rng& rng, int depth) {
    AttributeSet set;
    for (int n = uniform(rng, 0, depth == 0 ? 4 : 2); n > 0; --n) {
        AttributeEntry entry;
        if (depth < 2 && coin(rng, 0.3)) {
            for (int g = uniform(rng, 1, 2); g > 0; --g) entry.groups.push_back(arbitrary_set(rng, depth + 1));
        } else {
            for (int v = uniform(rng, 1, 3); v > 0; --v) entry.values.push_back(random_text(rng, 0, 16));
        }
        set.entries["a" + std::to_string(uniform(rng, 0, 20))] = std::move(entry);
    }
    return set;
}

}  // namespace

TempDir::TempDir() {
    std::string pattern = (fs::temp_directory_path() / "sia-test-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) std::abort();
    path_ = pattern;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::function<Timestamp()> ticking_clock(Timestamp start) {
    auto next = std::make_shared<std::atomic<std::int64_t>>(start.time_since_epoch().count());
    return [next] { return Timestamp{std::chrono::milliseconds{next->fetch_add(1)}}; };
}

StoreOptions test_options(StoreOptions base) {
    if (!base.clock) base.clock = ticking_clock();
    base.durable = false;
    return base;
}

std::unique_ptr<Store> make_store(const fs::path& dir, StoreOptions options) {
    must(Store::init(dir), "init " + dir.string());
    return reopen_store(dir, std::move(options));
}

std::unique_ptr<Store> reopen_store(const fs::path& dir, StoreOptions options) {
    return must(Store::open(dir, test_options(std::move(options))), "open " + dir.string());
}

void write_file(const fs::path& path, const std::string& bytes) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << bytes;
}

std::string random_text(Rng& rng, std::size_t min_len, std::size_t max_len) {
    static const std::vector<std::string> kPieces{
        "a", "b", "c", "x", "Q", "Z", "0", "7", " ", " ", "-", "_", ".", ",", "&", "<", ">", "\"", "'",
        "\xC3\xA9",          // e acute
        "\xC3\x9F",          // sharp s
        "\xE5\x9F\x8E",      // CJK "castle"
        "\xF0\x9F\x8F\xB0",  // castle emoji, outside the BMP
        "\t", "\n", "]]>", "&amp;"};
    std::size_t len = static_cast<std::size_t>(uniform(rng, static_cast<int>(min_len), static_cast<int>(max_len)));
    std::string out;
    for (std::size_t i = 0; i < len; ++i) out += pick(rng, kPieces);
    return out;
}

ReferenceData random_reference(Rng& rng, int places, int periods, int keywords) {
    ReferenceData ref;
    for (int i = 0; i < places; ++i) {
        Place p;
        p.id = "p" + std::to_string(i);
        p.name = "Place " + std::to_string(i);
        if (i > 0 && coin(rng, 0.66)) p.parentId = "p" + std::to_string(uniform(rng, 0, i - 1));
        ref.places.push_back(std::move(p));
    }
    for (int i = 0; i < periods; ++i) {
        Period p;
        p.id = "e" + std::to_string(i);
        p.startYear = uniform(rng, 1000, 1400);
        p.endYear = p.startYear + uniform(rng, 0, 80);
        p.label = "Phase " + std::to_string(i);
        ref.periods.push_back(std::move(p));
    }
    Vocabulary subject{std::string(kSubjectFacet), {}};
    for (int i = 0; i < keywords; ++i) subject.terms.push_back("k" + std::to_string(i));
    ref.vocabularies.push_back(std::move(subject));
    ref.vocabularies.push_back({std::string(kAuthorFacet), {"Ann Roe", "B. Ito", "C. Diaz", "D. Okafor"}});
    ref.vocabularies.push_back({"material", {"stone", "wood", "plaster"}});
    return ref;
}

SchemaDelta rich_schema_delta() {
    auto add = [](std::string path, ValueType type, bool required = false, bool repeatable = false,
                  std::string facet = {}) {
        AddNode a;
        a.path = std::move(path);
        a.node.valueType = type;
        a.node.required = required;
        a.node.repeatable = repeatable;
        a.node.facet = std::move(facet);
        return SchemaChange{std::move(a)};
    };
    return SchemaDelta{{
        add("photo/film", ValueType::text),
        add("photo/exposure", ValueType::decimal),
        add("photo/frame", ValueType::integer, false, true),
        add("photo/shot", ValueType::date),
        add("photo/material", ValueType::enumeration, false, true, "material"),
        add("photo/dimensions", ValueType::group, false, true),
        add("photo/dimensions/width", ValueType::decimal),
        add("photo/dimensions/height", ValueType::decimal),
        add("drawing/technique", ValueType::text),
        add("model3d/software", ValueType::text),
        add("model3d/lod", ValueType::integer),
        add("vectorPlan/scale", ValueType::integer),
        add("vectorPlan/surveyed", ValueType::date),
    }};
}

AttributeValueTree random_attributes(Rng& rng, const std::vector<AttributeNode>& nodes, const ReferenceData& ref) {
    return AttributeValueTree{random_set(rng, nodes, ref, 0), {}};
}

RecordDraft random_draft(Rng& rng, const ReferenceData& ref, const MetadataSchema& schema) {
    RecordDraft d;
    d.kind.tag = pick(rng, std::vector<KindTag>(kAllKinds.begin(), kAllKinds.end()));
    if (d.kind.tag == KindTag::rasterPlan) d.kind.planSubkind = static_cast<PlanSubkind>(uniform(rng, 0, 6));
    d.title = "T" + random_text(rng, 0, 20);
    const auto* authors = ref.find_vocabulary(kAuthorFacet);
    d.author = authors != nullptr && coin(rng, 0.9) ? pick(rng, authors->terms) : random_text(rng, 0, 10);
    d.provenance = random_text(rng, 0, 20);
    if (const auto* subject = ref.find_vocabulary(kSubjectFacet)) d.subjectKeywords = sample(rng, subject->terms, 3);
    if (coin(rng, 0.7)) d.captureDate = random_date(rng, 1990, 2007);
    std::vector<std::string> place_ids, period_ids;
    for (const auto& p : ref.places) place_ids.push_back(p.id);
    for (const auto& p : ref.periods) period_ids.push_back(p.id);
    d.placeRefs = sample(rng, place_ids, 2);
    d.periodRefs = sample(rng, period_ids, 2);
    if (coin(rng, 0.5)) d.coordinates = Coordinates{random_double(rng), random_double(rng), random_double(rng)};
    d.content = ContentRef{"external/" + slug(rng) + ".bin", "application/octet-stream", hex(rng, 64),
                           uniform(rng, 0, 1 << 20)};
    if (auto it = schema.perKind.find(std::string(to_string(d.kind.tag))); it != schema.perKind.end())
        d.attributes = random_attributes(rng, it->second, ref);
    return d;
}

DocumentRecord random_record(Rng& rng) {
    DocumentRecord r;
    r.id = slug(rng);
    r.kind.tag = pick(rng, std::vector<KindTag>(kAllKinds.begin(), kAllKinds.end()));
    if (r.kind.tag == KindTag::rasterPlan || coin(rng, 0.05))
        r.kind.planSubkind = static_cast<PlanSubkind>(uniform(rng, 0, 6));
    r.title = random_text(rng, 0, 30);
    r.author = random_text(rng, 0, 12);
    r.provenance = random_text(rng, 0, 40);
    for (int n = uniform(rng, 0, 4); n > 0; --n) r.subjectKeywords.push_back(random_text(rng, 1, 8));
    if (coin(rng, 0.6)) r.captureDate = random_date(rng, 1, 9999);
    for (int n = uniform(rng, 0, 3); n > 0; --n) r.placeRefs.push_back(slug(rng));
    for (int n = uniform(rng, 0, 3); n > 0; --n) r.periodRefs.push_back(slug(rng));
    if (coin(rng, 0.5)) r.coordinates = Coordinates{random_double(rng), random_double(rng), random_double(rng)};
    r.content = ContentRef{random_text(rng, 1, 20), random_text(rng, 1, 10), hex(rng, 64), uniform(rng, 0, 1 << 30)};
    r.attributes.root = arbitrary_set(rng, 0);
    for (int n = uniform(rng, 0, 3); n > 0; --n)
        r.attributes.legacy.push_back({"photo/" + slug(rng), random_text(rng, 0, 12), uniform(rng, 1, 9),
                                       coin(rng, 0.5) ? "removed" : "unconvertible to integer"});
    r.schemaVersion = uniform(rng, 1, 12);
    r.createdAt = random_timestamp(rng);
    r.updatedAt = random_timestamp(rng);
    if (coin(rng, 0.2)) r.archivedAt = random_timestamp(rng);
    return r;
}

QuerySpec random_spec(Rng& rng, const ReferenceData& ref, const std::vector<std::string>& authors) {
    QuerySpec spec;
    if (coin(rng, 0.3))
        for (int n = uniform(rng, 1, 2); n > 0; --n) spec.kinds.insert(kAllKinds[static_cast<std::size_t>(uniform(rng, 0, 5))]);
    if (coin(rng, 0.4) && !ref.places.empty())
        for (int n = uniform(rng, 1, 2); n > 0; --n) spec.placeIds.insert(pick(rng, ref.places).id);
    if (coin(rng, 0.4)) {
        int lo = uniform(rng, 990, 1420);
        spec.epochInterval = std::make_pair(lo, lo + uniform(rng, 0, 60));
    }
    const auto* subject = ref.find_vocabulary(kSubjectFacet);
    if (coin(rng, 0.3) && subject != nullptr && !subject->terms.empty())
        for (int n = uniform(rng, 1, 2); n > 0; --n) spec.keywords.insert(pick(rng, subject->terms));
    if (coin(rng, 0.15) && !authors.empty()) spec.author = pick(rng, authors);
    spec.includeArchived = coin(rng, 0.2);
    return spec;
}

RecordPatch random_patch(Rng& rng, const ReferenceData& ref) {
    RecordPatch p;
    if (coin(rng, 0.5)) p.title = "Edited " + random_text(rng, 0, 12);
    if (coin(rng, 0.3)) {
        if (const auto* subject = ref.find_vocabulary(kSubjectFacet)) p.subjectKeywords = sample(rng, subject->terms, 3);
    }
    std::vector<std::string> place_ids, period_ids;
    for (const auto& x : ref.places) place_ids.push_back(x.id);
    for (const auto& x : ref.periods) period_ids.push_back(x.id);
    if (coin(rng, 0.3)) p.placeRefs = sample(rng, place_ids, 2);
    if (coin(rng, 0.3)) p.periodRefs = sample(rng, period_ids, 2);
    if (coin(rng, 0.2)) p.captureDate = coin(rng, 0.5) ? std::optional(random_date(rng, 1990, 2007)) : std::nullopt;
    if (coin(rng, 0.2)) {
        const auto* authors = ref.find_vocabulary(kAuthorFacet);
        if (authors != nullptr) p.author = pick(rng, authors->terms);
    }
    return p;
}

std::unique_ptr<Store> make_populated_store(const fs::path& dir, const ReferenceData& reference, bool rich,
                                            StoreOptions options) {
    auto store = make_store(dir, std::move(options));
    must(store->merge_reference(reference, Role::expert), "merge reference");
    if (rich) {
        auto plan = must(store->propose_schema(rich_schema_delta()), "propose rich schema");
        must(store->apply_migration(plan, Role::expert), "apply rich schema");
    }
    return store;
}

ReferenceData castle_reference() {
    ReferenceData ref;
    ref.places.push_back({"castle", "Castle", std::nullopt, "The whole site", std::nullopt});
    ref.places.push_back({"yard", "Yard", "castle", "Inner yard", std::vector<Point2>{{0, 0}, {40, 0}, {40, 30}, {0, 30}}});
    ref.places.push_back({"chapel", "Chapel", "castle", "Castle chapel", std::nullopt});
    ref.places.push_back({"hall", "Hall", "castle", "Great hall", std::nullopt});
    ref.periods.push_back({"1100", "Year 1100", 1100, 1100, "Castle around 1100"});
    ref.periods.push_back({"1150", "Year 1150", 1150, 1150, "Castle around 1150"});
    ref.vocabularies.push_back({std::string(kSubjectFacet), {"chapel", "hall", "yard"}});
    return ref;
}

std::string sample_svg(double x, double y, double w, double h) {
    auto n = [](double v) { return format_double(v); };
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + n(x) + " " + n(y) + " " + n(w) + " " + n(h) +
           "\">\n  <rect x=\"" + n(x + 1) + "\" y=\"" + n(y + 1) + "\" width=\"" + n(w / 2) + "\" height=\"" +
           n(h / 2) + "\"/>\n  <path d=\"M " + n(x) + " " + n(y) + " L " + n(x + w) + " " + n(y + h) +
           "\"/>\n</svg>\n";
}

CastleFixture build_castle(Store& store, const fs::path& assets) {
    must(store.merge_reference(castle_reference(), Role::expert), "castle reference");
    CastleFixture fx;
    auto ingest = [&](KindTag kind, const std::string& title, const fs::path& file, const std::string& format,
                      std::vector<std::string> places, std::vector<std::string> periods, std::vector<std::string> keywords,
                      std::optional<Coordinates> at) {
        RecordDraft d;
        d.kind.tag = kind;
        d.title = title;
        d.author = "Survey team";
        d.provenance = "Synthetic castle fixture";
        d.placeRefs = std::move(places);
        d.periodRefs = std::move(periods);
        d.subjectKeywords = std::move(keywords);
        d.coordinates = at;
        d.captureDate = CalendarDate{2006, 5, 12};
        d.content = must(store.store_asset(file, format), "store asset " + file.string());
        auto record = must(store.ingest(d, Role::expert), "ingest " + title);
        fx.all.push_back(record.id);
        return record.id;
    };

    double offset = 0;
    for (const auto& place : kCastlePlaces) {
        for (const auto& period : kCastlePeriods) {
            auto key = std::make_pair(place, period);
            const std::string stem = place + "-" + period;
            write_file(assets / (stem + ".x3d"),
                       "<X3D><Scene><Shape><Box size=\"" + format_double(offset + 1) + " 2 3\"/></Shape></Scene></X3D>\n");
            write_file(assets / (stem + ".svg"), sample_svg(offset, 0, 40, 30));
            write_file(assets / (stem + ".jpg"), "\xFF\xD8\xFF jpeg " + stem);
            Coordinates at{offset, offset / 2, period == "1100" ? 0.0 : 4.0};
            fx.models[key] = ingest(KindTag::model3d, place + " model " + period, assets / (stem + ".x3d"),
                                    "model/x3d+xml", {place}, {period}, {place}, at);
            fx.plans[key] = ingest(KindTag::vectorPlan, place + " plan " + period, assets / (stem + ".svg"),
                                   "image/svg+xml", {place}, {period}, {place}, std::nullopt);
            fx.photos[key] = ingest(KindTag::photo, place + " photo " + period, assets / (stem + ".jpg"), "image/jpeg",
                                    {place}, {period}, {place}, std::nullopt);
        }
        offset += 50;
    }
    write_file(assets / "overview.jpg", "\xFF\xD8\xFF jpeg overview");
    ingest(KindTag::photo, "castle overview today", assets / "overview.jpg", "image/jpeg", {"castle"}, {}, {}, std::nullopt);
    return fx;
}

}  // namespace sia::test
