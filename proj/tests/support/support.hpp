#pragma once

// Shared test scaffolding: scratch directories, deterministic clocks, random
// generators for reference data, records and queries, and the castle fixture
// (three places under one root, two single-year periods).

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sia/model.hpp"
#include "sia/query.hpp"
#include "sia/schema_evolution.hpp"
#include "sia/store.hpp"

namespace sia::test {

namespace fs = std::filesystem;
using Rng = std::mt19937_64;

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

/// Clock that advances by one millisecond on every reading.
std::function<Timestamp()> ticking_clock(Timestamp start = Timestamp{std::chrono::milliseconds{1'700'000'000'000}});

StoreOptions test_options(StoreOptions base = {});

/// init + open with a ticking clock and no fsync; aborts the test binary on failure.
std::unique_ptr<Store> make_store(const fs::path& dir, StoreOptions options = {});
std::unique_ptr<Store> reopen_store(const fs::path& dir, StoreOptions options = {});

void write_file(const fs::path& path, const std::string& bytes);

// ---- random data ----------------------------------------------------------

std::string random_text(Rng& rng, std::size_t min_len, std::size_t max_len);

/// Places form a forest (roughly a third are roots); periods are random
/// intervals within 1000..1400; the subject, author and material
/// vocabularies get `keywords`, 4 and 3 terms.
ReferenceData random_reference(Rng& rng, int places, int periods, int keywords);

/// Delta from the empty version-1 schema to one exercising every value type,
/// repeatable nodes and a group, for photos, models and vector plans.
SchemaDelta rich_schema_delta();

AttributeValueTree random_attributes(Rng& rng, const std::vector<AttributeNode>& nodes,
                                     const ReferenceData& reference);

/// A draft that validates against `schema` and `reference`.
RecordDraft random_draft(Rng& rng, const ReferenceData& reference, const MetadataSchema& schema);

/// Structurally arbitrary record (id, audit, legacy values, archive flag),
/// not tied to any schema; for serialization round trips.
DocumentRecord random_record(Rng& rng);

QuerySpec random_spec(Rng& rng, const ReferenceData& reference, const std::vector<std::string>& authors);

/// Random patch over the fields an expert edits, valid against `reference`.
RecordPatch random_patch(Rng& rng, const ReferenceData& reference);

/// Opens `dir` as a store with `reference` merged in and, when `rich`, the
/// rich schema installed.
std::unique_ptr<Store> make_populated_store(const fs::path& dir, const ReferenceData& reference, bool rich,
                                            StoreOptions options = {});

// ---- castle fixture --------------------------------------------------------

inline const std::vector<std::string> kCastlePlaces{"yard", "chapel", "hall"};
inline const std::vector<std::string> kCastlePeriods{"1100", "1150"};

ReferenceData castle_reference();

/// Minimal vector plan with the given viewBox, one rect and one path.
std::string sample_svg(double x, double y, double w, double h);

struct CastleFixture {
    // keyed by (place, period)
    std::map<std::pair<std::string, std::string>, std::string> models;
    std::map<std::pair<std::string, std::string>, std::string> plans;
    std::map<std::pair<std::string, std::string>, std::string> photos;
    std::vector<std::string> all;
};

/// Ingests one 3D model, one vector plan and one photo per place x period
/// pair, plus a root-level overview photo. Assets are written under `assets`.
CastleFixture build_castle(Store& store, const fs::path& assets);

}  // namespace sia::test
