#pragma once

// Domain entities of the site documentation store: reference entities
// (periods, places, vocabularies), document records and metadata schemas.

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sia/result.hpp"

namespace sia {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

std::string format_timestamp(Timestamp t);
std::optional<Timestamp> parse_timestamp(std::string_view text);

struct CalendarDate {
    int year = 1;
    unsigned month = 1;
    unsigned day = 1;

    auto operator<=>(const CalendarDate&) const = default;
    bool valid() const;
};

std::string format_date(const CalendarDate& d);
std::optional<CalendarDate> parse_date(std::string_view text);

enum class Role { visitor, expert };

std::string_view to_string(Role role);

struct Period {
    std::string id;
    std::string label;
    int startYear = 0;
    int endYear = 0;
    std::string description;

    bool operator==(const Period&) const = default;
};

struct Point2 {
    double x = 0;
    double y = 0;
    bool operator==(const Point2&) const = default;
};

struct Place {
    std::string id;
    std::string name;
    std::optional<std::string> parentId;
    std::string description;
    std::optional<std::vector<Point2>> footprint;

    bool operator==(const Place&) const = default;
};

enum class KindTag { photo, drawing, text, rasterPlan, vectorPlan, model3d };

enum class PlanSubkind {
    axonometry,
    map,
    section,
    plan,
    elevation,
    excavationProfile,
    excavationPlan,
};

inline constexpr std::array<KindTag, 6> kAllKinds{KindTag::photo,      KindTag::drawing,
                                                  KindTag::text,       KindTag::rasterPlan,
                                                  KindTag::vectorPlan, KindTag::model3d};

std::string_view to_string(KindTag tag);
std::optional<KindTag> parse_kind_tag(std::string_view text);
std::string_view to_string(PlanSubkind sub);
std::optional<PlanSubkind> parse_plan_subkind(std::string_view text);

struct DocumentKind {
    KindTag tag = KindTag::photo;
    std::optional<PlanSubkind> planSubkind;

    bool operator==(const DocumentKind&) const = default;
};

/// Kinds whose content is a viewable raster image.
bool is_image_bearing(KindTag tag);

struct Coordinates {
    double x = 0;
    double y = 0;
    double z = 0;
    bool operator==(const Coordinates&) const = default;
};

struct ContentRef {
    std::string href;
    std::string mediaFormat;
    std::string checksum;
    std::int64_t byteSize = 0;

    bool operator==(const ContentRef&) const = default;
};

struct AttributeSet;

/// Values recorded under one schema node. Leaf nodes fill `values`, group
/// nodes fill `groups` (one entry per group instance).
struct AttributeEntry {
    std::vector<std::string> values;
    std::vector<AttributeSet> groups;

    bool operator==(const AttributeEntry&) const;
    bool empty() const { return values.empty() && groups.empty(); }
};

struct AttributeSet {
    std::map<std::string, AttributeEntry> entries;

    bool operator==(const AttributeSet&) const = default;
};

/// A value quarantined by a schema migration: its node was removed or it
/// could not be converted to the node's new type.
struct LegacyValue {
    std::string path;
    std::string value;
    int fromVersion = 0;
    std::string reason;

    bool operator==(const LegacyValue&) const = default;
};

struct AttributeValueTree {
    AttributeSet root;
    std::vector<LegacyValue> legacy;

    bool operator==(const AttributeValueTree&) const = default;
};

struct DocumentRecord {
    std::string id;
    DocumentKind kind;
    std::string title;
    std::string author;
    std::string provenance;
    std::vector<std::string> subjectKeywords;
    std::optional<CalendarDate> captureDate;
    std::vector<std::string> placeRefs;
    std::vector<std::string> periodRefs;
    std::optional<Coordinates> coordinates;
    ContentRef content;
    AttributeValueTree attributes;
    int schemaVersion = 1;
    Timestamp createdAt{};
    Timestamp updatedAt{};
    std::optional<Timestamp> archivedAt;

    bool operator==(const DocumentRecord&) const = default;
    bool archived() const { return archivedAt.has_value(); }
};

/// Fields an expert supplies through data entry; the store assigns the rest.
struct RecordDraft {
    DocumentKind kind;
    std::string title;
    std::string author;
    std::string provenance;
    std::vector<std::string> subjectKeywords;
    std::optional<CalendarDate> captureDate;
    std::vector<std::string> placeRefs;
    std::vector<std::string> periodRefs;
    std::optional<Coordinates> coordinates;
    ContentRef content;
    AttributeValueTree attributes;

    bool operator==(const RecordDraft&) const = default;
};

/// Partial draft: absent members leave the stored value untouched.
struct RecordPatch {
    std::optional<DocumentKind> kind;
    std::optional<std::string> title;
    std::optional<std::string> author;
    std::optional<std::string> provenance;
    std::optional<std::vector<std::string>> subjectKeywords;
    std::optional<std::optional<CalendarDate>> captureDate;
    std::optional<std::vector<std::string>> placeRefs;
    std::optional<std::vector<std::string>> periodRefs;
    std::optional<std::optional<Coordinates>> coordinates;
    std::optional<ContentRef> content;
    std::optional<AttributeValueTree> attributes;
};

RecordDraft draft_of(const DocumentRecord& record);
void apply_patch(DocumentRecord& record, const RecordPatch& patch);

struct Vocabulary {
    std::string facetName;
    std::vector<std::string> terms;

    bool operator==(const Vocabulary&) const = default;
};

inline constexpr std::string_view kSubjectFacet = "subject";
inline constexpr std::string_view kAuthorFacet = "author";

enum class ValueType { text, integer, decimal, date, enumeration, group };

std::string_view to_string(ValueType type);
std::optional<ValueType> parse_value_type(std::string_view text);

struct AttributeNode {
    std::string name;
    ValueType valueType = ValueType::text;
    std::string facet;  // enumeration only
    bool required = false;
    bool repeatable = false;
    std::vector<AttributeNode> children;  // group only

    bool operator==(const AttributeNode&) const = default;
};

struct MetadataSchema {
    int version = 1;
    // keyed by kind tag name
    std::map<std::string, std::vector<AttributeNode>> perKind;

    bool operator==(const MetadataSchema&) const = default;
};

/// Periods, places and controlled vocabularies shared by every record.
struct ReferenceData {
    std::vector<Period> periods;
    std::vector<Place> places;
    std::vector<Vocabulary> vocabularies;

    bool operator==(const ReferenceData&) const = default;

    const Period* find_period(std::string_view id) const;
    const Place* find_place(std::string_view id) const;
    const Vocabulary* find_vocabulary(std::string_view facet) const;
};

/// True if `text` parses under the lexical rules of `type` (group never parses).
bool value_parses_as(ValueType type, std::string_view text);

/// Lowercase URL-safe slug: [a-z0-9] runs joined by single hyphens.
bool is_slug(std::string_view text);
std::string slugify(std::string_view text);

}  // namespace sia
