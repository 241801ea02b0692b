#include "oracles.hpp"

#include <expat.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <tuple>
#include <variant>

#include "sia/record_xml.hpp"

namespace sia::test {

namespace {

using Attrs = std::map<std::string, std::string>;

// Runs expat over `bytes`, calling back on element starts and ends.
std::string walk(std::string_view bytes, const std::function<void(const std::string&, const Attrs&)>& on_start,
                 const std::function<void(const std::string&)>& on_end) {
    struct Ctx {
        const std::function<void(const std::string&, const Attrs&)>* start;
        const std::function<void(const std::string&)>* end;
    } ctx{&on_start, &on_end};
    XML_Parser parser = XML_ParserCreate("UTF-8");
    XML_SetUserData(parser, &ctx);
    XML_SetElementHandler(
        parser,
        [](void* data, const XML_Char* name, const XML_Char** atts) {
            auto* c = static_cast<Ctx*>(data);
            Attrs attrs;
            for (int i = 0; atts[i] != nullptr; i += 2) attrs[atts[i]] = atts[i + 1];
            if (*c->start) (*c->start)(name, attrs);
        },
        [](void* data, const XML_Char* name) {
            auto* c = static_cast<Ctx*>(data);
            if (*c->end) (*c->end)(name);
        });
    std::string error;
    if (XML_Parse(parser, bytes.data(), static_cast<int>(bytes.size()), XML_TRUE) == XML_STATUS_ERROR) {
        std::ostringstream msg;
        msg << XML_ErrorString(XML_GetErrorCode(parser)) << " at line " << XML_GetCurrentLineNumber(parser);
        error = msg.str();
    }
    XML_ParserFree(parser);
    return error;
}

bool standard_less(const DocumentRecord& a, const DocumentRecord& b) {
    const std::string ka(to_string(a.kind.tag)), kb(to_string(b.kind.tag));
    if (ka != kb) return ka < kb;
    if (a.captureDate.has_value() != b.captureDate.has_value()) return a.captureDate.has_value();
    if (a.captureDate && *a.captureDate != *b.captureDate) return *a.captureDate < *b.captureDate;
    return a.id < b.id;
}

bool shares_any(const std::vector<std::string>& a, const std::set<std::string>& b) {
    return std::any_of(a.begin(), a.end(), [&](const std::string& x) { return b.count(x) > 0; });
}

int shared(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    int n = 0;
    for (const auto& x : a) n += static_cast<int>(std::count(b.begin(), b.end(), x));
    return n;
}

}  // namespace

std::vector<DocumentRecord> scan_record_files(const std::filesystem::path& dataDir) {
    std::vector<DocumentRecord> out;
    for (const auto& entry : std::filesystem::directory_iterator(dataDir / "records")) {
        const auto name = entry.path().filename().string();
        if (name.front() == '.' || entry.path().extension() != ".xml") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        auto record = record_from_xml(buf.str());
        if (record) out.push_back(std::move(*record));
    }
    return out;
}

bool overlaps_by_enumeration(const Period& p, int lo, int hi) {
    for (int y = lo; y <= hi; ++y)
        if (p.startYear <= y && y <= p.endYear) return true;
    return false;
}

std::set<std::string> descendants_by_fixpoint(const std::string& placeId, const std::vector<Place>& places) {
    std::set<std::string> out{placeId};
    for (bool grew = true; grew;) {
        grew = false;
        for (const auto& p : places)
            if (p.parentId && out.count(*p.parentId) && out.insert(p.id).second) grew = true;
    }
    return out;
}

std::vector<std::string> oracle_search(const std::vector<DocumentRecord>& records, const ReferenceData& ref,
                                       const QuerySpec& spec) {
    std::set<std::string> places;
    for (const auto& id : spec.placeIds) {
        auto below = descendants_by_fixpoint(id, ref.places);
        places.insert(below.begin(), below.end());
    }
    std::set<std::string> periods;
    if (spec.epochInterval)
        for (const auto& p : ref.periods)
            if (overlaps_by_enumeration(p, spec.epochInterval->first, spec.epochInterval->second)) periods.insert(p.id);

    std::vector<DocumentRecord> hits;
    for (const auto& r : records) {
        if (r.archived() && !spec.includeArchived) continue;
        if (!spec.kinds.empty() && !spec.kinds.count(r.kind.tag)) continue;
        if (!spec.placeIds.empty() && !shares_any(r.placeRefs, places)) continue;
        if (spec.epochInterval && !shares_any(r.periodRefs, periods)) continue;
        if (!spec.keywords.empty() && !shares_any(r.subjectKeywords, spec.keywords)) continue;
        if (spec.author && r.author != *spec.author) continue;
        hits.push_back(r);
    }
    std::sort(hits.begin(), hits.end(), standard_less);
    std::vector<std::string> ids;
    for (const auto& r : hits) ids.push_back(r.id);
    return ids;
}

std::vector<std::pair<std::string, int>> oracle_related(const std::vector<DocumentRecord>& records,
                                                        const std::string& id) {
    auto source = std::find_if(records.begin(), records.end(), [&](const DocumentRecord& r) { return r.id == id; });
    if (source == records.end()) return {};
    std::vector<std::pair<const DocumentRecord*, int>> scored;
    for (const auto& r : records) {
        if (r.id == id || r.archived()) continue;
        int score = 2 * shared(source->placeRefs, r.placeRefs) + 2 * shared(source->periodRefs, r.periodRefs) +
                    shared(source->subjectKeywords, r.subjectKeywords);
        if (score > 0) scored.emplace_back(&r, score);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return standard_less(*a.first, *b.first);
    });
    std::vector<std::pair<std::string, int>> out;
    for (const auto& [r, score] : scored) out.emplace_back(r->id, score);
    return out;
}

std::string xml_error(std::string_view bytes) { return walk(bytes, {}, {}); }

X3dCensus census_x3d(std::string_view bytes) {
    X3dCensus c;
    std::vector<std::string> groups;
    c.error = walk(
        bytes,
        [&](const std::string& name, const Attrs& a) {
            if (name == "Group") {
                auto def = a.count("DEF") ? a.at("DEF") : std::string();
                groups.push_back(def);
                c.groupNames.push_back(def);
            } else if (name == "Material") {
                ++c.materials;
                auto color = a.count("diffuseColor") ? a.at("diffuseColor") : std::string();
                c.colors.insert(color);
                if (!groups.empty()) c.groupColor[groups.back()] = color;
            } else if (name == "Inline" && !groups.empty()) {
                c.groupInline[groups.back()] = a.count("url") ? a.at("url") : std::string();
            }
        },
        [&](const std::string& name) {
            if (name == "Group") groups.pop_back();
        });
    return c;
}

SvgCensus census_svg(std::string_view bytes) {
    SvgCensus c;
    int depth = 0;
    bool in_layer = false;
    std::string layer_opacity;
    c.error = walk(
        bytes,
        [&](const std::string& name, const Attrs& a) {
            ++depth;
            auto attr = [&](const char* key) { return a.count(key) ? a.at(key) : std::string(); };
            if (depth == 1) c.viewBox = attr("viewBox");
            if (a.count("data-record-id")) c.annotatedIds.insert(a.at("data-record-id"));
            if (depth == 2 && name == "g" && attr("class") == "layer") {
                in_layer = true;
                layer_opacity = attr("opacity");
                c.layerIds.push_back(attr("id"));
                c.layerRecords.push_back(attr("data-record-id"));
            }
            if (depth == 3 && in_layer && !a.count("data-record-id")) ++c.unannotatedDrawables;
            if (in_layer && name == "image") {
                c.imageRecords.push_back(attr("data-record-id"));
                c.imageOpacities.push_back(layer_opacity);
            }
            if (name == "g" && attr("class") == "legend-entry") ++c.legendEntries;
        },
        [&](const std::string&) {
            if (depth == 2) in_layer = false;
            --depth;
        });
    return c;
}

namespace {

void collect(const AttributeSet& set, const std::string& prefix, std::multiset<std::pair<std::string, std::string>>& out) {
    for (const auto& [name, entry] : set.entries) {
        for (const auto& v : entry.values) out.emplace(prefix + "/" + name, v);
        for (const auto& g : entry.groups) collect(g, prefix + "/" + name, out);
    }
}

std::string path_of(const SchemaChange& c) {
    return std::visit([](const auto& x) { return x.path; }, c);
}

bool under(const std::string& path, const std::string& root) {
    return path == root || (path.size() > root.size() && path.compare(0, root.size(), root) == 0 && path[root.size()] == '/');
}

// Maps a path as it reads after the first `stage` changes back to its original spelling.
std::string original_path(std::string path, const SchemaDelta& delta, std::size_t stage) {
    for (std::size_t k = stage; k-- > 0;) {
        const auto* rename = std::get_if<RenameNode>(&delta.changes[k]);
        if (rename == nullptr) continue;
        std::string renamed = rename->path.substr(0, rename->path.rfind('/') + 1) + rename->newName;
        if (under(path, renamed)) path = rename->path + path.substr(renamed.size());
    }
    return path;
}

}  // namespace

std::multiset<std::pair<std::string, std::string>> attribute_values(const DocumentRecord& record) {
    std::multiset<std::pair<std::string, std::string>> out;
    collect(record.attributes.root, std::string(to_string(record.kind.tag)), out);
    return out;
}

std::string check_lossless(const DocumentRecord& before, const DocumentRecord& after, const SchemaDelta& delta) {
    auto expected = attribute_values(before);
    std::multiset<std::pair<std::string, std::string>> found;
    for (const auto& [path, value] : attribute_values(after)) found.emplace(original_path(path, delta, delta.changes.size()), value);
    if (after.attributes.legacy.size() < before.attributes.legacy.size()) return before.id + ": legacy values dropped";
    for (std::size_t i = 0; i < before.attributes.legacy.size(); ++i)
        if (!(after.attributes.legacy[i] == before.attributes.legacy[i])) return before.id + ": legacy value rewritten";
    for (std::size_t i = before.attributes.legacy.size(); i < after.attributes.legacy.size(); ++i) {
        const auto& l = after.attributes.legacy[i];
        std::optional<std::size_t> stage;
        for (std::size_t k = 0; k < delta.changes.size(); ++k) {
            bool quarantines = std::holds_alternative<RemoveNode>(delta.changes[k]) ||
                               std::holds_alternative<RetypeNode>(delta.changes[k]);
            if (quarantines && under(l.path, path_of(delta.changes[k]))) stage = k;
        }
        if (!stage) return before.id + ": legacy value at unexpected path " + l.path;
        found.emplace(original_path(l.path, delta, *stage), l.value);
    }
    if (found != expected) {
        std::ostringstream msg;
        msg << before.id << ": " << expected.size() << " values before, " << found.size() << " accounted for after";
        for (const auto& e : expected)
            if (found.count(e) != expected.count(e)) {
                msg << "; first mismatch " << e.first << "=" << e.second;
                break;
            }
        return msg.str();
    }
    return {};
}

}  // namespace sia::test
