#include "sia/validation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

namespace sia {

namespace {

struct Collector {
    std::vector<Violation> out;
    void add(std::string path, std::string rule, std::string message) {
        out.push_back({std::move(path), std::move(rule), std::move(message)});
    }
};

bool is_node_name(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '-' || c == '_';
    });
}

bool is_lower_hex(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

const Vocabulary* find_facet(std::span<const Vocabulary> vocabularies, std::string_view facet) {
    for (const auto& v : vocabularies)
        if (v.facetName == facet) return &v;
    return nullptr;
}

bool contains(const std::vector<std::string>& terms, std::string_view term) {
    return std::find(terms.begin(), terms.end(), term) != terms.end();
}

void check_text(Collector& c, const std::string& path, std::string_view value) {
    if (!is_xml_safe_text(value)) c.add(path, "xml-text", "contains characters that cannot be stored");
}

void check_refs(Collector& c, std::string_view field, const std::vector<std::string>& refs,
                const std::set<std::string_view>& known, std::string_view rule) {
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        std::string path = std::string(field) + "[" + std::to_string(i) + "]";
        if (!known.contains(refs[i])) c.add(path, std::string(rule), "'" + refs[i] + "' does not resolve");
        if (!seen.insert(refs[i]).second) c.add(path, "duplicate", "'" + refs[i] + "' listed twice");
    }
}

void check_attribute_set(Collector& c, const AttributeSet& set, std::span<const AttributeNode> nodes,
                         std::span<const Vocabulary> vocabularies, const std::string& prefix) {
    for (const auto& node : nodes) {
        std::string path = prefix + node.name;
        auto it = set.entries.find(node.name);
        if (it == set.entries.end() || it->second.empty()) {
            if (node.required) c.add(path, "required", "required attribute missing");
            continue;
        }
        const auto& entry = it->second;
        if (node.valueType == ValueType::group) {
            if (!entry.values.empty()) c.add(path, "group-shape", "group node carries leaf values");
            if (!node.repeatable && entry.groups.size() > 1)
                c.add(path, "not-repeatable", "attribute may occur once");
            for (std::size_t i = 0; i < entry.groups.size(); ++i) {
                std::string inner = node.repeatable ? path + "[" + std::to_string(i) + "]." : path + ".";
                check_attribute_set(c, entry.groups[i], node.children, vocabularies, inner);
            }
            continue;
        }
        if (!entry.groups.empty()) c.add(path, "group-shape", "leaf node carries group instances");
        if (!node.repeatable && entry.values.size() > 1)
            c.add(path, "not-repeatable", "attribute may occur once");
        const Vocabulary* facet =
            node.valueType == ValueType::enumeration ? find_facet(vocabularies, node.facet) : nullptr;
        for (std::size_t i = 0; i < entry.values.size(); ++i) {
            const auto& value = entry.values[i];
            std::string vpath = entry.values.size() > 1 || node.repeatable
                                    ? path + "[" + std::to_string(i) + "]"
                                    : path;
            check_text(c, vpath, value);
            if (!value_parses_as(node.valueType, value)) {
                c.add(vpath, "type", "'" + value + "' is not a valid " + std::string(to_string(node.valueType)));
            } else if (node.valueType == ValueType::enumeration &&
                       (facet == nullptr || !contains(facet->terms, value))) {
                c.add(vpath, "unknown-term", "'" + value + "' not in facet '" + node.facet + "'");
            }
        }
    }
    for (const auto& [name, entry] : set.entries) {
        bool known = std::any_of(nodes.begin(), nodes.end(),
                                 [&](const AttributeNode& n) { return n.name == name; });
        if (!known) c.add(prefix + name, "unknown-attribute", "no schema node named '" + name + "'");
    }
}

void check_schema_nodes(Collector& c, std::span<const AttributeNode> nodes,
                        std::span<const Vocabulary> vocabularies, const std::string& prefix) {
    std::set<std::string_view> names;
    for (const auto& node : nodes) {
        std::string path = prefix + node.name;
        if (!is_node_name(node.name)) c.add(path, "node-name", "node names use [A-Za-z0-9_-]");
        if (!names.insert(node.name).second) c.add(path, "duplicate", "sibling names must be unique");
        if (node.valueType == ValueType::group) {
            if (node.children.empty()) c.add(path, "group-children", "group needs at least one child");
            check_schema_nodes(c, node.children, vocabularies, path + "/");
        } else if (!node.children.empty()) {
            c.add(path, "leaf-children", "only group nodes have children");
        }
        if (node.valueType == ValueType::enumeration) {
            if (find_facet(vocabularies, node.facet) == nullptr)
                c.add(path, "unknown-facet", "facet '" + node.facet + "' does not exist");
        } else if (!node.facet.empty()) {
            c.add(path, "facet", "only enum nodes reference a facet");
        }
    }
}

}  // namespace

bool is_xml_safe_text(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::uint32_t cp = 0;
        std::size_t len = 0;
        if (c < 0x80) {
            cp = c;
            len = 1;
        } else if ((c & 0xE0) == 0xC0) {
            cp = c & 0x1F;
            len = 2;
        } else if ((c & 0xF0) == 0xE0) {
            cp = c & 0x0F;
            len = 3;
        } else if ((c & 0xF8) == 0xF0) {
            cp = c & 0x07;
            len = 4;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000))
            return false;
        bool allowed = cp == 0x9 || cp == 0xA || cp == 0xD || (cp >= 0x20 && cp <= 0xD7FF) ||
                       (cp >= 0xE000 && cp <= 0xFFFD) || (cp >= 0x10000 && cp <= 0x10FFFF);
        if (!allowed) return false;
        i += len;
    }
    return true;
}

std::vector<Violation> validate_attributes(const AttributeValueTree& tree,
                                           std::span<const AttributeNode> nodes,
                                           std::span<const Vocabulary> vocabularies) {
    Collector c;
    check_attribute_set(c, tree.root, nodes, vocabularies, "attributes.");
    for (std::size_t i = 0; i < tree.legacy.size(); ++i) {
        const auto& l = tree.legacy[i];
        std::string path = "attributes.legacy[" + std::to_string(i) + "]";
        check_text(c, path, l.value);
        check_text(c, path, l.path);
        check_text(c, path, l.reason);
    }
    return std::move(c.out);
}

std::vector<Violation> validate_record(const DocumentRecord& r, const MetadataSchema& schema,
                                       std::span<const Vocabulary> vocabularies,
                                       std::span<const Period> periods,
                                       std::span<const Place> places) {
    Collector c;
    if (!r.id.empty() && !is_slug(r.id)) c.add("id", "slug-format", "ids are lowercase URL-safe slugs");
    if (r.schemaVersion != schema.version)
        c.add("schemaVersion", "version-mismatch",
              "record at version " + std::to_string(r.schemaVersion) + ", schema at " +
                  std::to_string(schema.version));

    bool is_raster = r.kind.tag == KindTag::rasterPlan;
    if (is_raster != r.kind.planSubkind.has_value())
        c.add("kind.planSubkind", "plan-subkind", "plan subkind is required for raster plans only");

    if (r.title.empty()) c.add("title", "non-empty", "title is required");
    check_text(c, "title", r.title);
    check_text(c, "author", r.author);
    check_text(c, "provenance", r.provenance);

    const Vocabulary* subject = find_facet(vocabularies, kSubjectFacet);
    std::set<std::string_view> seen_kw;
    for (std::size_t i = 0; i < r.subjectKeywords.size(); ++i) {
        const auto& kw = r.subjectKeywords[i];
        std::string path = "subjectKeywords[" + std::to_string(i) + "]";
        if (subject == nullptr || !contains(subject->terms, kw))
            c.add(path, "unknown-term", "'" + kw + "' is not in the subject vocabulary");
        if (!seen_kw.insert(kw).second) c.add(path, "duplicate", "'" + kw + "' listed twice");
    }

    if (r.captureDate && !r.captureDate->valid())
        c.add("captureDate", "invalid-date", "not a calendar date in years 1..9999");

    std::set<std::string_view> place_ids, period_ids;
    for (const auto& p : places) place_ids.insert(p.id);
    for (const auto& p : periods) period_ids.insert(p.id);
    check_refs(c, "placeRefs", r.placeRefs, place_ids, "unknown-place");
    check_refs(c, "periodRefs", r.periodRefs, period_ids, "unknown-period");

    if (r.coordinates && !(std::isfinite(r.coordinates->x) && std::isfinite(r.coordinates->y) &&
                           std::isfinite(r.coordinates->z)))
        c.add("coordinates", "finite", "coordinates must be finite numbers");

    if (r.content.href.empty()) c.add("content.href", "non-empty", "content href is required");
    check_text(c, "content.href", r.content.href);
    if (r.content.mediaFormat.empty()) c.add("content.format", "non-empty", "media format is required");
    check_text(c, "content.format", r.content.mediaFormat);
    if (!is_lower_hex(r.content.checksum))
        c.add("content.checksum", "hex", "checksum must be lowercase hexadecimal");
    if (r.content.byteSize < 0) c.add("content.size", "non-negative", "byte size cannot be negative");

    auto kind_nodes = schema.perKind.find(std::string(to_string(r.kind.tag)));
    std::span<const AttributeNode> nodes;
    if (kind_nodes != schema.perKind.end()) nodes = kind_nodes->second;
    auto attr = validate_attributes(r.attributes, nodes, vocabularies);
    c.out.insert(c.out.end(), attr.begin(), attr.end());
    return std::move(c.out);
}

std::vector<Violation> validate_record(const DocumentRecord& record, const MetadataSchema& schema,
                                       const ReferenceData& reference) {
    return validate_record(record, schema, reference.vocabularies, reference.periods,
                           reference.places);
}

Result<bool> period_overlaps(const Period& p, int lo, int hi) {
    if (lo > hi)
        return make_error(ErrorCode::invalid_interval,
                          "interval [" + std::to_string(lo) + ", " + std::to_string(hi) + "] is reversed");
    return std::max(p.startYear, lo) <= std::min(p.endYear, hi);
}

Result<std::set<std::string>> place_descendants(std::string_view placeId,
                                                std::span<const Place> places) {
    std::multimap<std::string_view, std::string_view> children;
    bool found = false;
    for (const auto& p : places) {
        if (p.id == placeId) found = true;
        if (p.parentId) children.emplace(*p.parentId, p.id);
    }
    if (!found) return make_error(ErrorCode::unknown_place, "no place '" + std::string(placeId) + "'");

    std::set<std::string> result{std::string(placeId)};
    std::deque<std::string_view> pending{placeId};
    while (!pending.empty()) {
        auto current = pending.front();
        pending.pop_front();
        auto [lo, hi] = children.equal_range(current);
        for (auto it = lo; it != hi; ++it) {
            if (result.insert(std::string(it->second)).second) pending.push_back(it->second);
        }
    }
    return result;
}

std::vector<Violation> validate_period(const Period& p) {
    Collector c;
    if (!is_slug(p.id)) c.add("period.id", "slug-format", "ids are lowercase URL-safe slugs");
    if (p.label.empty()) c.add("period.label", "non-empty", "label is required");
    if (p.startYear > p.endYear) c.add("period.years", "interval", "startYear must not exceed endYear");
    check_text(c, "period.label", p.label);
    check_text(c, "period.description", p.description);
    return std::move(c.out);
}

std::vector<Violation> validate_place(const Place& p) {
    Collector c;
    if (!is_slug(p.id)) c.add("place.id", "slug-format", "ids are lowercase URL-safe slugs");
    if (p.name.empty()) c.add("place.name", "non-empty", "name is required");
    check_text(c, "place.name", p.name);
    check_text(c, "place.description", p.description);
    if (p.parentId && *p.parentId == p.id) c.add("place.parentId", "cycle", "a place cannot contain itself");
    if (p.footprint) {
        const auto& f = *p.footprint;
        if (f.size() < 3) c.add("place.footprint", "vertices", "footprint needs at least 3 vertices");
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            if (f[i] == f[i + 1]) {
                c.add("place.footprint[" + std::to_string(i + 1) + "]", "repeated-vertex",
                      "consecutive vertices coincide");
            }
        }
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!std::isfinite(f[i].x) || !std::isfinite(f[i].y))
                c.add("place.footprint[" + std::to_string(i) + "]", "finite", "vertex must be finite");
        }
    }
    return std::move(c.out);
}

std::vector<Violation> validate_vocabulary(const Vocabulary& v) {
    Collector c;
    if (v.facetName.empty() || !is_node_name(v.facetName))
        c.add("vocabulary.facetName", "facet-name", "facet names use [A-Za-z0-9_-]");
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < v.terms.size(); ++i) {
        std::string path = "vocabulary." + v.facetName + "[" + std::to_string(i) + "]";
        if (v.terms[i].empty()) c.add(path, "non-empty", "terms cannot be empty");
        if (!seen.insert(v.terms[i]).second) c.add(path, "duplicate", "'" + v.terms[i] + "' listed twice");
        check_text(c, path, v.terms[i]);
    }
    return std::move(c.out);
}

std::vector<Violation> validate_reference(const ReferenceData& ref) {
    Collector c;
    std::set<std::string_view> period_ids, place_ids, facets;
    for (const auto& p : ref.periods) {
        auto v = validate_period(p);
        c.out.insert(c.out.end(), v.begin(), v.end());
        if (!period_ids.insert(p.id).second) c.add("period." + p.id, "duplicate", "period id reused");
    }
    for (const auto& p : ref.places) {
        auto v = validate_place(p);
        c.out.insert(c.out.end(), v.begin(), v.end());
        if (!place_ids.insert(p.id).second) c.add("place." + p.id, "duplicate", "place id reused");
    }
    std::map<std::string_view, std::string_view> parent;
    for (const auto& p : ref.places) {
        if (!p.parentId) continue;
        if (!place_ids.contains(*p.parentId))
            c.add("place." + p.id + ".parentId", "unknown-place", "parent '" + *p.parentId + "' does not exist");
        else
            parent[p.id] = *p.parentId;
    }
    for (const auto& p : ref.places) {
        std::set<std::string_view> chain{p.id};
        auto it = parent.find(p.id);
        while (it != parent.end()) {
            if (!chain.insert(it->second).second) {
                c.add("place." + p.id + ".parentId", "cycle", "parent links form a cycle");
                break;
            }
            it = parent.find(it->second);
        }
    }
    for (const auto& v : ref.vocabularies) {
        auto vs = validate_vocabulary(v);
        c.out.insert(c.out.end(), vs.begin(), vs.end());
        if (!facets.insert(v.facetName).second)
            c.add("vocabulary." + v.facetName, "duplicate", "facet defined twice");
    }
    return std::move(c.out);
}

std::vector<Violation> validate_schema(const MetadataSchema& schema,
                                       std::span<const Vocabulary> vocabularies) {
    Collector c;
    if (schema.version < 1) c.add("schema.version", "version", "schema versions start at 1");
    for (const auto& [kind, nodes] : schema.perKind) {
        if (!parse_kind_tag(kind)) c.add(kind, "unknown-kind", "'" + kind + "' is not a document kind");
        check_schema_nodes(c, nodes, vocabularies, kind + "/");
    }
    return std::move(c.out);
}

}  // namespace sia
