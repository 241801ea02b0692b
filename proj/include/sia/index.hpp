#pragma once

// Relational projection of the record files, kept in an embedded SQLite
// database. The record files stay authoritative; everything here can be
// rebuilt from them.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sia/model.hpp"
#include "sia/result.hpp"

struct sqlite3;

namespace sia {

struct IndexRow {
    std::string id;
    std::string kind;
    std::string title;
    std::string author;
    std::optional<std::string> captureDate;
    int schemaVersion = 1;
    bool archived = false;
    std::optional<std::string> thumbnail;
    std::string fileDigest;

    bool operator==(const IndexRow&) const = default;
};

using LinkRow = std::pair<std::string, std::string>;  // (record id, target)

struct IndexSnapshot {
    std::vector<IndexRow> rows;  // sorted by id
    std::vector<LinkRow> recordPlaces;
    std::vector<LinkRow> recordPeriods;
    std::vector<LinkRow> recordKeywords;

    bool operator==(const IndexSnapshot&) const = default;
    std::size_t size() const { return rows.size(); }
};

/// Row set a single record contributes to the index.
IndexSnapshot project_record(const DocumentRecord& record, const std::string& fileDigest);

/// Filter in index terms: place and period criteria are already expanded to
/// id sets. An engaged but empty set matches nothing.
struct IndexFilter {
    std::set<std::string> kinds;
    std::optional<std::set<std::string>> placeIds;
    std::optional<std::set<std::string>> periodIds;
    std::set<std::string> keywords;
    std::optional<std::string> author;
    bool includeArchived = false;
};

struct IndexHit {
    std::string id;
    std::string kind;
    std::string title;
    std::optional<std::string> thumbnail;

    bool operator==(const IndexHit&) const = default;
};

struct RelatednessWeights {
    int place = 2;
    int period = 2;
    int keyword = 1;
};

struct ScoredHit {
    IndexHit hit;
    int score = 0;
    bool operator==(const ScoredHit&) const = default;
};

class RecordIndex {
public:
    static Result<std::unique_ptr<RecordIndex>> open(const std::filesystem::path& file, bool read_only);
    ~RecordIndex();

    RecordIndex(const RecordIndex&) = delete;
    RecordIndex& operator=(const RecordIndex&) = delete;

    /// Replaces the rows of one record inside a single transaction.
    /// `before_commit` runs after the rows are written but before COMMIT.
    Result<void> upsert(const IndexSnapshot& rows, const std::function<void()>& before_commit = {});

    /// Replaces the whole index inside a single transaction.
    Result<void> replace_all(const IndexSnapshot& snapshot);

    Result<IndexSnapshot> snapshot() const;
    Result<std::map<std::string, std::string>> digests() const;

    struct Page {
        std::size_t total = 0;
        std::vector<IndexHit> items;
    };
    Result<Page> search(const IndexFilter& filter, std::size_t offset, std::size_t limit) const;
    Result<std::vector<ScoredHit>> related(const std::string& id, const RelatednessWeights& weights) const;
    Result<std::vector<std::string>> distinct_authors() const;
    Result<std::vector<std::string>> distinct_kinds() const;

private:
    RecordIndex() = default;

    class Lease;
    Lease acquire_reader() const;
    Result<std::vector<std::string>> distinct_column(const char* column) const;

    std::filesystem::path file_;
    bool read_only_ = false;
    sqlite3* writer_ = nullptr;
    mutable std::mutex pool_mutex_;
    mutable std::vector<sqlite3*> readers_;
};

}  // namespace sia
