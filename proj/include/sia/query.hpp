#pragma once

// Document inquiry: faceted search, browsing by period or place, and
// relatedness navigation from one record. Everything here reads the index
// and the current reference data; nothing mutates the store.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sia/index.hpp"
#include "sia/model.hpp"
#include "sia/result.hpp"

namespace sia {

class Store;

inline constexpr std::size_t kDefaultPageLimit = 50;
inline constexpr std::size_t kMaxPageLimit = 500;

// Facet names of the derived facets returned next to the vocabularies.
inline constexpr std::string_view kKindFacet = "kind";
inline constexpr std::string_view kPlaceFacet = "place";
inline constexpr std::string_view kPeriodFacet = "period";

struct QuerySpec {
    std::set<KindTag> kinds;          // empty = all
    std::set<std::string> placeIds;   // empty = all; each expands to its descendants
    std::optional<std::pair<int, int>> epochInterval;
    std::set<std::string> keywords;   // subject terms
    std::optional<std::string> author;
    bool includeArchived = false;

    bool operator==(const QuerySpec&) const = default;
};

struct ResultItem {
    std::string id;
    KindTag kind = KindTag::photo;
    std::string title;
    std::optional<std::string> thumbnail;
    std::optional<int> score;  // related_documents only

    bool operator==(const ResultItem&) const = default;
};

struct ResultPage {
    std::size_t total = 0;
    std::vector<ResultItem> items;
    std::size_t offset = 0;
    std::size_t limit = kDefaultPageLimit;

    bool operator==(const ResultPage&) const = default;
};

using FacetMap = std::map<std::string, std::vector<std::string>>;

class QueryEngine {
public:
    explicit QueryEngine(const Store& store, RelatednessWeights weights = {})
        : store_(store), weights_(weights) {}

    /// Every vocabulary plus the derived facets: kinds present in the store,
    /// place ids, period ids in chronological order, and authors (taken from
    /// the records when no author vocabulary exists).
    Result<FacetMap> list_facets() const;

    Result<ResultPage> search(const QuerySpec& spec, std::size_t offset = 0,
                              std::size_t limit = kDefaultPageLimit) const;
    Result<ResultPage> browse_by_history(const std::string& periodId, std::size_t offset = 0,
                                         std::size_t limit = kDefaultPageLimit) const;
    Result<ResultPage> browse_by_place(const std::string& placeId, std::size_t offset = 0,
                                       std::size_t limit = kDefaultPageLimit) const;
    Result<ResultPage> related_documents(const std::string& recordId,
                                         std::size_t limit = kDefaultPageLimit) const;

    /// Resolves a spec against the reference data into index terms.
    Result<IndexFilter> resolve(const QuerySpec& spec) const;

private:
    Result<ResultPage> run(const IndexFilter& filter, std::size_t offset, std::size_t limit) const;

    const Store& store_;
    RelatednessWeights weights_;
};

std::size_t clamp_limit(std::size_t limit);

}  // namespace sia
