#include "sia/model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace sia {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view text, const std::array<std::string_view, N>& names) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == text) return static_cast<Enum>(i);
    }
    return std::nullopt;
}

constexpr std::array<std::string_view, 6> kKindNames{"photo",      "drawing",    "text",
                                                     "rasterPlan", "vectorPlan", "model3d"};
constexpr std::array<std::string_view, 7> kSubkindNames{
    "axonometry", "map", "section", "plan", "elevation", "excavationProfile", "excavationPlan"};
constexpr std::array<std::string_view, 6> kValueTypeNames{"text", "integer", "decimal",
                                                          "date", "enum",    "group"};

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

template <typename Int>
bool parse_fixed(std::string_view s, Int& out) {
    if (!all_digits(s)) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::validation_failed: return "validation-failed";
        case ErrorCode::permission_denied: return "permission-denied";
        case ErrorCode::unauthenticated: return "unauthenticated";
        case ErrorCode::storage_failure: return "storage-failure";
        case ErrorCode::not_found: return "not-found";
        case ErrorCode::parse_error: return "parse-error";
        case ErrorCode::schema_version_unknown: return "schema-version-unknown";
        case ErrorCode::corrupt_record_file: return "corrupt-record-file";
        case ErrorCode::invalid_interval: return "invalid-interval";
        case ErrorCode::unknown_place: return "unknown-place";
        case ErrorCode::unknown_period: return "unknown-period";
        case ErrorCode::invalid_spec: return "invalid-spec";
        case ErrorCode::invalid_delta: return "invalid-delta";
        case ErrorCode::stale_plan: return "stale-plan";
        case ErrorCode::default_missing: return "default-missing";
        case ErrorCode::invalid_request: return "invalid-request";
        case ErrorCode::empty_composition: return "empty-composition";
        case ErrorCode::not_an_image: return "not-an-image";
        case ErrorCode::invalid_opacity: return "invalid-opacity";
        case ErrorCode::malformed_source_vector: return "malformed-source-vector";
        case ErrorCode::conflict: return "conflict";
    }
    return "unknown";
}

std::string Error::describe() const {
    std::string out{to_string(code)};
    if (!message.empty()) out += ": " + message;
    if (line > 0) out += " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
    for (const auto& v : violations) out += "\n  " + v.path + ": " + v.rule;
    return out;
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    auto day = floor<days>(t);
    year_month_day ymd{day};
    hh_mm_ss hms{t - day};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
                  int(hms.minutes().count()), int(hms.seconds().count()),
                  int(hms.subseconds().count()));
    return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SS.mmmZ
    if (s.size() != 24 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
        s[16] != ':' || s[19] != '.' || s[23] != 'Z')
        return std::nullopt;
    auto date = parse_date(s.substr(0, 10));
    int hh = 0, mm = 0, ss = 0, ms = 0;
    if (!date || !parse_fixed(s.substr(11, 2), hh) || !parse_fixed(s.substr(14, 2), mm) ||
        !parse_fixed(s.substr(17, 2), ss) || !parse_fixed(s.substr(20, 3), ms))
        return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
    using namespace std::chrono;
    sys_days day{year{date->year} / month{date->month} / std::chrono::day{date->day}};
    return Timestamp{day} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{ms};
}

bool CalendarDate::valid() const {
    using namespace std::chrono;
    if (year < 1 || year > 9999) return false;
    return std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                       std::chrono::day{day}}
        .ok();
}

std::string format_date(const CalendarDate& d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

std::optional<CalendarDate> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    CalendarDate d;
    if (!parse_fixed(s.substr(0, 4), d.year) || !parse_fixed(s.substr(5, 2), d.month) ||
        !parse_fixed(s.substr(8, 2), d.day))
        return std::nullopt;
    if (!d.valid()) return std::nullopt;
    return d;
}

std::string_view to_string(Role role) { return role == Role::expert ? "expert" : "visitor"; }

std::string_view to_string(KindTag tag) { return kKindNames[static_cast<std::size_t>(tag)]; }
std::optional<KindTag> parse_kind_tag(std::string_view text) {
    return lookup<KindTag>(text, kKindNames);
}
std::string_view to_string(PlanSubkind sub) { return kSubkindNames[static_cast<std::size_t>(sub)]; }
std::optional<PlanSubkind> parse_plan_subkind(std::string_view text) {
    return lookup<PlanSubkind>(text, kSubkindNames);
}
std::string_view to_string(ValueType type) { return kValueTypeNames[static_cast<std::size_t>(type)]; }
std::optional<ValueType> parse_value_type(std::string_view text) {
    return lookup<ValueType>(text, kValueTypeNames);
}

bool is_image_bearing(KindTag tag) {
    return tag == KindTag::photo || tag == KindTag::drawing || tag == KindTag::rasterPlan;
}

bool AttributeEntry::operator==(const AttributeEntry& other) const {
    return values == other.values && groups == other.groups;
}

RecordDraft draft_of(const DocumentRecord& r) {
    return RecordDraft{r.kind,       r.title,     r.author,      r.provenance,
                       r.subjectKeywords, r.captureDate, r.placeRefs, r.periodRefs,
                       r.coordinates, r.content,  r.attributes};
}

void apply_patch(DocumentRecord& r, const RecordPatch& p) {
    if (p.kind) r.kind = *p.kind;
    if (p.title) r.title = *p.title;
    if (p.author) r.author = *p.author;
    if (p.provenance) r.provenance = *p.provenance;
    if (p.subjectKeywords) r.subjectKeywords = *p.subjectKeywords;
    if (p.captureDate) r.captureDate = *p.captureDate;
    if (p.placeRefs) r.placeRefs = *p.placeRefs;
    if (p.periodRefs) r.periodRefs = *p.periodRefs;
    if (p.coordinates) r.coordinates = *p.coordinates;
    if (p.content) r.content = *p.content;
    if (p.attributes) r.attributes = *p.attributes;
}

const Period* ReferenceData::find_period(std::string_view id) const {
    auto it = std::find_if(periods.begin(), periods.end(), [&](const Period& p) { return p.id == id; });
    return it == periods.end() ? nullptr : &*it;
}

const Place* ReferenceData::find_place(std::string_view id) const {
    auto it = std::find_if(places.begin(), places.end(), [&](const Place& p) { return p.id == id; });
    return it == places.end() ? nullptr : &*it;
}

const Vocabulary* ReferenceData::find_vocabulary(std::string_view facet) const {
    auto it = std::find_if(vocabularies.begin(), vocabularies.end(),
                           [&](const Vocabulary& v) { return v.facetName == facet; });
    return it == vocabularies.end() ? nullptr : &*it;
}

bool value_parses_as(ValueType type, std::string_view s) {
    switch (type) {
        case ValueType::text: return true;
        case ValueType::enumeration: return !s.empty();
        case ValueType::group: return false;
        case ValueType::date: return parse_date(s).has_value();
        case ValueType::integer: {
            if (!s.empty() && s.front() == '-') s.remove_prefix(1);
            return all_digits(s) && s.size() <= 18;
        }
        case ValueType::decimal: {
            if (!s.empty() && s.front() == '-') s.remove_prefix(1);
            auto dot = s.find('.');
            if (dot == std::string_view::npos) return all_digits(s);
            return all_digits(s.substr(0, dot)) && all_digits(s.substr(dot + 1));
        }
    }
    return false;
}

bool is_slug(std::string_view s) {
    if (s.empty() || s.front() == '-' || s.back() == '-') return false;
    char prev = 0;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
        if (!ok || (c == '-' && prev == '-')) return false;
        prev = c;
    }
    return true;
}

std::string slugify(std::string_view text) {
    std::string out;
    for (unsigned char c : text) {
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            out.push_back(static_cast<char>(c));
        } else if (c < 0x80 && !out.empty() && out.back() != '-') {
            out.push_back('-');
        }
        if (out.size() >= 48) break;
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out;
}

}  // namespace sia
