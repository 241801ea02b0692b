#include "sia/json_codec.hpp"

#include <charconv>
#include <limits>

namespace sia::json {

namespace {

// Collects structural problems while walking a JSON body.
class Decoder {
public:
    explicit Decoder(ErrorCode code = ErrorCode::invalid_request) : code_(code) {}

    void fail(std::string path, std::string message) {
        problems_.push_back({std::move(path), "json-shape", std::move(message)});
    }

    bool object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        fail(path, "expected an object");
        return false;
    }

    std::optional<std::string> string(const json& j, const std::string& key, const std::string& path,
                                      bool required = false) {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) fail(path + key, "is required");
            return std::nullopt;
        }
        if (!it->is_string()) {
            fail(path + key, "expected a string");
            return std::nullopt;
        }
        return it->get<std::string>();
    }

    std::optional<double> number(const json& j, const std::string& key, const std::string& path,
                                 bool required = false) {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) fail(path + key, "is required");
            return std::nullopt;
        }
        if (!it->is_number()) {
            fail(path + key, "expected a number");
            return std::nullopt;
        }
        return it->get<double>();
    }

    std::optional<std::int64_t> integer(const json& j, const std::string& key, const std::string& path,
                                        bool required = false) {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) fail(path + key, "is required");
            return std::nullopt;
        }
        if (!it->is_number_integer()) {
            fail(path + key, "expected an integer");
            return std::nullopt;
        }
        return it->get<std::int64_t>();
    }

    std::optional<bool> boolean(const json& j, const std::string& key, const std::string& path) {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return std::nullopt;
        if (!it->is_boolean()) {
            fail(path + key, "expected true or false");
            return std::nullopt;
        }
        return it->get<bool>();
    }

    std::optional<std::vector<std::string>> strings(const json& j, const std::string& key,
                                                    const std::string& path) {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return std::nullopt;
        if (!it->is_array()) {
            fail(path + key, "expected an array of strings");
            return std::nullopt;
        }
        std::vector<std::string> out;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& v = (*it)[i];
            if (!v.is_string()) {
                fail(path + key + "[" + std::to_string(i) + "]", "expected a string");
                continue;
            }
            out.push_back(v.get<std::string>());
        }
        return out;
    }

    template <typename T>
    Result<T> finish(T value, const std::string& what) {
        if (problems_.empty()) return value;
        Error e = make_error(code_, what + " is malformed");
        e.violations = std::move(problems_);
        return e;
    }

    bool ok() const { return problems_.empty(); }

private:
    ErrorCode code_;
    std::vector<Violation> problems_;
};

json set_to_json(const AttributeSet& set) {
    json out = json::object();
    for (const auto& [name, entry] : set.entries) {
        json e = json::object();
        if (!entry.values.empty()) e["values"] = entry.values;
        if (!entry.groups.empty()) {
            json groups = json::array();
            for (const auto& g : entry.groups) groups.push_back(set_to_json(g));
            e["groups"] = std::move(groups);
        }
        out[name] = std::move(e);
    }
    return out;
}

void set_from_json(Decoder& d, const json& j, const std::string& path, AttributeSet& out) {
    if (!d.object(j, path)) return;
    for (const auto& [name, e] : j.items()) {
        std::string at = path + "." + name;
        if (!d.object(e, at)) continue;
        AttributeEntry entry;
        if (auto values = d.strings(e, "values", at + ".")) entry.values = std::move(*values);
        if (auto it = e.find("groups"); it != e.end()) {
            if (!it->is_array()) {
                d.fail(at + ".groups", "expected an array");
            } else {
                for (std::size_t i = 0; i < it->size(); ++i) {
                    AttributeSet g;
                    set_from_json(d, (*it)[i], at + "[" + std::to_string(i) + "]", g);
                    entry.groups.push_back(std::move(g));
                }
            }
        }
        out.entries.emplace(name, std::move(entry));
    }
}

void tree_from_json(Decoder& d, const json& j, AttributeValueTree& out) {
    if (!d.object(j, "attributes")) return;
    if (auto it = j.find("root"); it != j.end()) set_from_json(d, *it, "attributes", out.root);
    if (auto it = j.find("legacy"); it != j.end()) {
        if (!it->is_array()) {
            d.fail("attributes.legacy", "expected an array");
            return;
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            std::string at = "attributes.legacy[" + std::to_string(i) + "].";
            const auto& v = (*it)[i];
            if (!d.object(v, at)) continue;
            LegacyValue lv;
            lv.path = d.string(v, "path", at, true).value_or("");
            lv.value = d.string(v, "value", at, true).value_or("");
            lv.fromVersion = static_cast<int>(d.integer(v, "fromVersion", at, true).value_or(0));
            lv.reason = d.string(v, "reason", at).value_or("");
            out.legacy.push_back(std::move(lv));
        }
    }
}

std::optional<DocumentKind> kind_from_json(Decoder& d, const json& j) {
    auto tag_text = d.string(j, "kind", "", true);
    if (!tag_text) return std::nullopt;
    auto tag = parse_kind_tag(*tag_text);
    if (!tag) {
        d.fail("kind", "unknown kind '" + *tag_text + "'");
        return std::nullopt;
    }
    DocumentKind kind{*tag, std::nullopt};
    if (auto sub_text = d.string(j, "planSubkind", "")) {
        auto sub = parse_plan_subkind(*sub_text);
        if (!sub) {
            d.fail("planSubkind", "unknown plan subkind '" + *sub_text + "'");
            return std::nullopt;
        }
        kind.planSubkind = *sub;
    }
    return kind;
}

std::optional<CalendarDate> date_from_json(Decoder& d, const json& j) {
    auto text = d.string(j, "captureDate", "");
    if (!text) return std::nullopt;
    auto date = parse_date(*text);
    if (!date) d.fail("captureDate", "expected YYYY-MM-DD");
    return date;
}

std::optional<Coordinates> coordinates_from_json(Decoder& d, const json& j) {
    auto it = j.find("coordinates");
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!d.object(*it, "coordinates")) return std::nullopt;
    Coordinates c;
    c.x = d.number(*it, "x", "coordinates.", true).value_or(0);
    c.y = d.number(*it, "y", "coordinates.", true).value_or(0);
    c.z = d.number(*it, "z", "coordinates.", true).value_or(0);
    return c;
}

ContentRef content_from_json(Decoder& d, const json& j) {
    ContentRef c;
    if (!d.object(j, "content")) return c;
    c.href = d.string(j, "href", "content.", true).value_or("");
    c.mediaFormat = d.string(j, "mediaFormat", "content.", true).value_or("");
    c.checksum = d.string(j, "checksum", "content.").value_or("");
    c.byteSize = d.integer(j, "byteSize", "content.").value_or(0);
    return c;
}

std::optional<Timestamp> timestamp_from_json(Decoder& d, const json& j, const std::string& key, bool required) {
    auto text = d.string(j, key, "", required);
    if (!text) return std::nullopt;
    auto t = parse_timestamp(*text);
    if (!t) d.fail(key, "expected YYYY-MM-DDTHH:MM:SS.mmmZ");
    return t;
}

json node_to_json(const AttributeNode& n) {
    json out{{"name", n.name},
             {"type", std::string(to_string(n.valueType))},
             {"required", n.required},
             {"repeatable", n.repeatable}};
    if (!n.facet.empty()) out["facet"] = n.facet;
    if (!n.children.empty()) {
        json children = json::array();
        for (const auto& c : n.children) children.push_back(node_to_json(c));
        out["children"] = std::move(children);
    }
    return out;
}

std::optional<ValueType> type_from_json(Decoder& d, const json& j, const std::string& path) {
    auto text = d.string(j, "type", path, true);
    if (!text) return std::nullopt;
    auto type = parse_value_type(*text);
    if (!type) d.fail(path + "type", "unknown value type '" + *text + "'");
    return type;
}

std::optional<int> parse_int(std::string_view text) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

}  // namespace

json to_json(const Violation& v) { return {{"path", v.path}, {"rule", v.rule}, {"message", v.message}}; }

json to_json(const Error& e) {
    json out{{"error", std::string(to_string(e.code))}, {"message", e.message}};
    if (!e.violations.empty()) {
        json list = json::array();
        for (const auto& v : e.violations) list.push_back(to_json(v));
        out["violations"] = std::move(list);
    }
    if (e.line > 0) {
        out["line"] = e.line;
        out["column"] = e.column;
    }
    return out;
}

json to_json(const AttributeValueTree& tree) {
    json out{{"root", set_to_json(tree.root)}};
    json legacy = json::array();
    for (const auto& lv : tree.legacy)
        legacy.push_back({{"path", lv.path}, {"value", lv.value}, {"fromVersion", lv.fromVersion}, {"reason", lv.reason}});
    out["legacy"] = std::move(legacy);
    return out;
}

Result<AttributeValueTree> attributes_from_json(const json& j) {
    Decoder d;
    AttributeValueTree tree;
    tree_from_json(d, j, tree);
    return d.finish(std::move(tree), "attributes");
}

json to_json(const DocumentRecord& r) {
    json out{{"id", r.id},
             {"kind", std::string(to_string(r.kind.tag))},
             {"title", r.title},
             {"author", r.author},
             {"provenance", r.provenance},
             {"subjectKeywords", r.subjectKeywords},
             {"placeRefs", r.placeRefs},
             {"periodRefs", r.periodRefs},
             {"content",
              {{"href", r.content.href},
               {"mediaFormat", r.content.mediaFormat},
               {"checksum", r.content.checksum},
               {"byteSize", r.content.byteSize}}},
             {"attributes", to_json(r.attributes)},
             {"schemaVersion", r.schemaVersion},
             {"createdAt", format_timestamp(r.createdAt)},
             {"updatedAt", format_timestamp(r.updatedAt)}};
    if (r.kind.planSubkind) out["planSubkind"] = std::string(to_string(*r.kind.planSubkind));
    if (r.captureDate) out["captureDate"] = format_date(*r.captureDate);
    if (r.coordinates) out["coordinates"] = {{"x", r.coordinates->x}, {"y", r.coordinates->y}, {"z", r.coordinates->z}};
    if (r.archivedAt) out["archivedAt"] = format_timestamp(*r.archivedAt);
    return out;
}

Result<RecordDraft> draft_from_json(const json& j) {
    Decoder d;
    RecordDraft draft;
    if (!d.object(j, "body")) return d.finish(std::move(draft), "record");
    if (auto kind = kind_from_json(d, j)) draft.kind = *kind;
    draft.title = d.string(j, "title", "").value_or("");
    draft.author = d.string(j, "author", "").value_or("");
    draft.provenance = d.string(j, "provenance", "").value_or("");
    draft.subjectKeywords = d.strings(j, "subjectKeywords", "").value_or(std::vector<std::string>{});
    draft.captureDate = date_from_json(d, j);
    draft.placeRefs = d.strings(j, "placeRefs", "").value_or(std::vector<std::string>{});
    draft.periodRefs = d.strings(j, "periodRefs", "").value_or(std::vector<std::string>{});
    draft.coordinates = coordinates_from_json(d, j);
    if (auto it = j.find("content"); it != j.end())
        draft.content = content_from_json(d, *it);
    else
        d.fail("content", "is required");
    if (auto it = j.find("attributes"); it != j.end() && !it->is_null()) tree_from_json(d, *it, draft.attributes);
    return d.finish(std::move(draft), "record");
}

Result<DocumentRecord> record_from_json(const json& j) {
    auto draft = draft_from_json(j);
    if (!draft) return std::move(draft).error();
    Decoder d;
    DocumentRecord r;
    r.id = d.string(j, "id", "", true).value_or("");
    r.kind = draft->kind;
    r.title = draft->title;
    r.author = draft->author;
    r.provenance = draft->provenance;
    r.subjectKeywords = draft->subjectKeywords;
    r.captureDate = draft->captureDate;
    r.placeRefs = draft->placeRefs;
    r.periodRefs = draft->periodRefs;
    r.coordinates = draft->coordinates;
    r.content = draft->content;
    r.attributes = draft->attributes;
    r.schemaVersion = static_cast<int>(d.integer(j, "schemaVersion", "", true).value_or(0));
    r.createdAt = timestamp_from_json(d, j, "createdAt", true).value_or(Timestamp{});
    r.updatedAt = timestamp_from_json(d, j, "updatedAt", true).value_or(Timestamp{});
    r.archivedAt = timestamp_from_json(d, j, "archivedAt", false);
    return d.finish(std::move(r), "record");
}

Result<RecordPatch> patch_from_json(const json& j) {
    Decoder d;
    RecordPatch p;
    if (!d.object(j, "body")) return d.finish(std::move(p), "patch");
    static const std::set<std::string> known{"kind",       "planSubkind", "title",     "author",
                                             "provenance", "subjectKeywords", "captureDate", "placeRefs",
                                             "periodRefs", "coordinates", "content",   "attributes"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) d.fail(key, "is not an editable field");
    if (j.contains("kind")) p.kind = kind_from_json(d, j);
    else if (j.contains("planSubkind")) d.fail("planSubkind", "send kind together with planSubkind");
    p.title = d.string(j, "title", "");
    p.author = d.string(j, "author", "");
    p.provenance = d.string(j, "provenance", "");
    p.subjectKeywords = d.strings(j, "subjectKeywords", "");
    if (j.contains("captureDate")) p.captureDate = date_from_json(d, j);
    p.placeRefs = d.strings(j, "placeRefs", "");
    p.periodRefs = d.strings(j, "periodRefs", "");
    if (j.contains("coordinates")) p.coordinates = coordinates_from_json(d, j);
    if (auto it = j.find("content"); it != j.end()) p.content = content_from_json(d, *it);
    if (auto it = j.find("attributes"); it != j.end()) {
        AttributeValueTree tree;
        tree_from_json(d, *it, tree);
        p.attributes = std::move(tree);
    }
    return d.finish(std::move(p), "patch");
}

json to_json(const Period& p) {
    return {{"id", p.id}, {"label", p.label}, {"startYear", p.startYear}, {"endYear", p.endYear},
            {"description", p.description}};
}

json to_json(const Place& p) {
    json out{{"id", p.id}, {"name", p.name}, {"description", p.description}};
    if (p.parentId) out["parentId"] = *p.parentId;
    if (p.footprint) {
        json vertices = json::array();
        for (const auto& v : *p.footprint) vertices.push_back({{"x", v.x}, {"y", v.y}});
        out["footprint"] = std::move(vertices);
    }
    return out;
}

json to_json(const Vocabulary& v) { return {{"facet", v.facetName}, {"terms", v.terms}}; }

Result<Period> period_from_json(const json& j) {
    Decoder d;
    Period p;
    if (!d.object(j, "body")) return d.finish(std::move(p), "period");
    p.id = d.string(j, "id", "", true).value_or("");
    p.label = d.string(j, "label", "").value_or("");
    p.startYear = static_cast<int>(d.integer(j, "startYear", "", true).value_or(0));
    p.endYear = static_cast<int>(d.integer(j, "endYear", "", true).value_or(0));
    p.description = d.string(j, "description", "").value_or("");
    return d.finish(std::move(p), "period");
}

Result<Place> place_from_json(const json& j) {
    Decoder d;
    Place p;
    if (!d.object(j, "body")) return d.finish(std::move(p), "place");
    p.id = d.string(j, "id", "", true).value_or("");
    p.name = d.string(j, "name", "").value_or("");
    p.parentId = d.string(j, "parentId", "");
    p.description = d.string(j, "description", "").value_or("");
    if (auto it = j.find("footprint"); it != j.end() && !it->is_null()) {
        std::vector<Point2> vertices;
        if (!it->is_array()) d.fail("footprint", "expected an array");
        else
            for (std::size_t i = 0; i < it->size(); ++i) {
                std::string at = "footprint[" + std::to_string(i) + "].";
                if (!d.object((*it)[i], at)) continue;
                vertices.push_back({d.number((*it)[i], "x", at, true).value_or(0),
                                    d.number((*it)[i], "y", at, true).value_or(0)});
            }
        p.footprint = std::move(vertices);
    }
    return d.finish(std::move(p), "place");
}

json to_json(const MetadataSchema& schema) {
    json kinds = json::object();
    for (const auto& [kind, nodes] : schema.perKind) {
        json list = json::array();
        for (const auto& n : nodes) list.push_back(node_to_json(n));
        kinds[kind] = std::move(list);
    }
    return {{"version", schema.version}, {"kinds", std::move(kinds)}};
}

json to_json(const SchemaDelta& delta) {
    json changes = json::array();
    for (const auto& change : delta.changes) {
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                json out{{"path", c.path}};
                if constexpr (std::is_same_v<T, AddNode>) {
                    out["op"] = "add";
                    out["type"] = std::string(to_string(c.node.valueType));
                    out["required"] = c.node.required;
                    out["repeatable"] = c.node.repeatable;
                    if (!c.node.facet.empty()) out["facet"] = c.node.facet;
                    if (c.defaultValue) out["default"] = *c.defaultValue;
                } else if constexpr (std::is_same_v<T, RemoveNode>) {
                    out["op"] = "remove";
                } else if constexpr (std::is_same_v<T, RenameNode>) {
                    out["op"] = "rename";
                    out["to"] = c.newName;
                } else {
                    out["op"] = "retype";
                    out["type"] = std::string(to_string(c.newType));
                    if (!c.facet.empty()) out["facet"] = c.facet;
                    if (c.defaultValue) out["default"] = *c.defaultValue;
                }
                changes.push_back(std::move(out));
            },
            change);
    }
    return {{"changes", std::move(changes)}};
}

Result<SchemaDelta> delta_from_json(const json& j) {
    Decoder d(ErrorCode::invalid_delta);
    SchemaDelta delta;
    if (!d.object(j, "body")) return d.finish(std::move(delta), "delta");
    auto it = j.find("changes");
    if (it == j.end() || !it->is_array()) {
        d.fail("changes", "expected an array of changes");
        return d.finish(std::move(delta), "delta");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& c = (*it)[i];
        std::string at = "changes[" + std::to_string(i) + "].";
        if (!d.object(c, at)) continue;
        auto op = d.string(c, "op", at, true);
        auto path = d.string(c, "path", at, true).value_or("");
        if (!op) continue;
        if (*op == "add") {
            AddNode add;
            add.path = path;
            add.node.name = path.substr(path.rfind('/') + 1);
            if (auto type = type_from_json(d, c, at)) add.node.valueType = *type;
            add.node.facet = d.string(c, "facet", at).value_or("");
            add.node.required = d.boolean(c, "required", at).value_or(false);
            add.node.repeatable = d.boolean(c, "repeatable", at).value_or(false);
            add.defaultValue = d.string(c, "default", at);
            delta.changes.emplace_back(std::move(add));
        } else if (*op == "remove") {
            delta.changes.emplace_back(RemoveNode{path});
        } else if (*op == "rename") {
            delta.changes.emplace_back(RenameNode{path, d.string(c, "to", at, true).value_or("")});
        } else if (*op == "retype") {
            RetypeNode retype;
            retype.path = path;
            if (auto type = type_from_json(d, c, at)) retype.newType = *type;
            retype.facet = d.string(c, "facet", at).value_or("");
            retype.defaultValue = d.string(c, "default", at);
            delta.changes.emplace_back(std::move(retype));
        } else {
            d.fail(at + "op", "unknown operation '" + *op + "'");
        }
    }
    return d.finish(std::move(delta), "delta");
}

json to_json(const MigrationPlan& plan) {
    json actions = json::array();
    for (auto a : plan.recordActions) actions.push_back(std::string(to_string(a)));
    return {{"fromVersion", plan.fromVersion},
            {"toVersion", plan.toVersion},
            {"delta", to_json(plan.delta)},
            {"recordActions", std::move(actions)},
            {"target", to_json(plan.target)}};
}

Result<MigrationPlan> plan_from_json(const json& j) {
    Decoder d(ErrorCode::invalid_delta);
    MigrationPlan plan;
    if (!d.object(j, "body")) return d.finish(std::move(plan), "plan");
    plan.fromVersion = static_cast<int>(d.integer(j, "fromVersion", "", true).value_or(0));
    plan.toVersion = static_cast<int>(d.integer(j, "toVersion", "", true).value_or(0));
    auto it = j.find("delta");
    if (it == j.end()) {
        d.fail("delta", "is required");
        return d.finish(std::move(plan), "plan");
    }
    auto delta = delta_from_json(*it);
    if (!delta) return std::move(delta).error();
    plan.delta = std::move(*delta);
    return d.finish(std::move(plan), "plan");
}

json to_json(const ResultPage& page) {
    json items = json::array();
    for (const auto& item : page.items) {
        json i{{"id", item.id}, {"kind", std::string(to_string(item.kind))}, {"title", item.title}};
        if (item.thumbnail) i["thumbnail"] = *item.thumbnail;
        if (item.score) i["score"] = *item.score;
        items.push_back(std::move(i));
    }
    return {{"total", page.total}, {"offset", page.offset}, {"limit", page.limit}, {"items", std::move(items)}};
}

json to_json(const FacetMap& facets) {
    json out = json::object();
    for (const auto& [name, terms] : facets) out[name] = terms;
    return out;
}

json to_json(const QuerySpec& spec) {
    json kinds = json::array();
    for (auto k : spec.kinds) kinds.push_back(std::string(to_string(k)));
    json out{{"kinds", std::move(kinds)},
             {"placeIds", spec.placeIds},
             {"keywords", spec.keywords},
             {"includeArchived", spec.includeArchived}};
    if (spec.epochInterval) out["epochInterval"] = {spec.epochInterval->first, spec.epochInterval->second};
    if (spec.author) out["author"] = *spec.author;
    return out;
}

Result<QuerySpec> spec_from_json(const json& j) {
    Decoder d(ErrorCode::invalid_spec);
    QuerySpec spec;
    if (!d.object(j, "body")) return d.finish(std::move(spec), "query");
    for (const auto& k : d.strings(j, "kinds", "").value_or(std::vector<std::string>{})) {
        if (auto tag = parse_kind_tag(k)) spec.kinds.insert(*tag);
        else d.fail("kinds", "unknown kind '" + k + "'");
    }
    for (auto& p : d.strings(j, "placeIds", "").value_or(std::vector<std::string>{})) spec.placeIds.insert(p);
    for (auto& k : d.strings(j, "keywords", "").value_or(std::vector<std::string>{})) spec.keywords.insert(k);
    spec.author = d.string(j, "author", "");
    spec.includeArchived = d.boolean(j, "includeArchived", "").value_or(false);
    if (auto it = j.find("epochInterval"); it != j.end() && !it->is_null()) {
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() || !(*it)[1].is_number_integer())
            d.fail("epochInterval", "expected [from, to] years");
        else
            spec.epochInterval = std::make_pair((*it)[0].get<int>(), (*it)[1].get<int>());
    }
    return d.finish(std::move(spec), "query");
}

Result<QuerySpec> spec_from_params(const std::multimap<std::string, std::string>& params) {
    QuerySpec spec;
    std::vector<Violation> problems;
    auto each = [&](const std::string& key, auto&& fn) {
        auto [lo, hi] = params.equal_range(key);
        for (auto it = lo; it != hi; ++it) {
            std::string_view rest = it->second;
            while (!rest.empty()) {
                auto comma = rest.find(',');
                auto piece = rest.substr(0, comma);
                if (!piece.empty()) fn(std::string(piece));
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
        }
    };
    each("kind", [&](std::string v) {
        if (auto tag = parse_kind_tag(v)) spec.kinds.insert(*tag);
        else problems.push_back({"kind", "unknown-term", "unknown kind '" + v + "'"});
    });
    each("place", [&](std::string v) { spec.placeIds.insert(std::move(v)); });
    each("keyword", [&](std::string v) { spec.keywords.insert(std::move(v)); });

    auto year = [&](const char* key) -> std::optional<int> {
        auto it = params.find(key);
        if (it == params.end() || it->second.empty()) return std::nullopt;
        auto v = parse_int(it->second);
        if (!v) problems.push_back({key, "integer", "'" + it->second + "' is not a year"});
        return v;
    };
    auto from = year("from");
    auto to = year("to");
    if (from || to)
        spec.epochInterval = std::make_pair(from.value_or(std::numeric_limits<int>::min()),
                                            to.value_or(std::numeric_limits<int>::max()));
    if (auto it = params.find("author"); it != params.end() && !it->second.empty()) spec.author = it->second;
    if (auto it = params.find("archived"); it != params.end())
        spec.includeArchived = it->second == "1" || it->second == "true";

    if (!problems.empty()) {
        Error e = make_error(ErrorCode::invalid_spec, "query parameters are malformed");
        e.violations = std::move(problems);
        return e;
    }
    return spec;
}

json to_json(const Rgb& c) { return json::array({c.r, c.g, c.b}); }

Result<CompositionRequest> composition_from_json(const json& j) {
    Decoder d;
    CompositionRequest req;
    if (!d.object(j, "body")) return d.finish(std::move(req), "composition request");
    for (auto& p : d.strings(j, "placeIds", "").value_or(std::vector<std::string>{})) req.placeIds.insert(p);
    for (auto& p : d.strings(j, "periodIds", "").value_or(std::vector<std::string>{})) req.periodIds.insert(p);
    if (auto it = j.find("palette"); it != j.end() && !it->is_null()) {
        std::map<std::string, Rgb> palette;
        if (d.object(*it, "palette")) {
            for (const auto& [id, c] : it->items()) {
                if (!c.is_array() || c.size() != 3 || !c[0].is_number() || !c[1].is_number() || !c[2].is_number()) {
                    d.fail("palette." + id, "expected [r, g, b]");
                    continue;
                }
                palette[id] = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
            }
        }
        req.palette = std::move(palette);
    }
    return d.finish(std::move(req), "composition request");
}

json to_json(const CompositionWarning& w) {
    return {{"placeId", w.placeId}, {"periodId", w.periodId}, {"reason", w.reason}};
}

Result<std::pair<std::string, std::vector<Overlay>>> montage_from_json(const json& j) {
    Decoder d;
    std::pair<std::string, std::vector<Overlay>> out;
    if (!d.object(j, "body")) return d.finish(std::move(out), "montage request");
    out.first = d.string(j, "baseRecordId", "", true).value_or("");
    if (auto it = j.find("overlays"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) d.fail("overlays", "expected an array");
        else
            for (std::size_t i = 0; i < it->size(); ++i) {
                std::string at = "overlays[" + std::to_string(i) + "].";
                if (!d.object((*it)[i], at)) continue;
                out.second.push_back({d.string((*it)[i], "recordId", at, true).value_or(""),
                                      d.number((*it)[i], "opacity", at, true).value_or(1.0)});
            }
    }
    return d.finish(std::move(out), "montage request");
}

}  // namespace sia::json
