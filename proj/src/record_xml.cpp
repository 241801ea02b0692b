#include "sia/record_xml.hpp"

#include <charconv>
#include <cmath>

namespace sia {

namespace {

Error structure_error(const xml::Element& at, std::string message) {
    Error err = make_error(ErrorCode::parse_error, std::move(message));
    err.line = at.line;
    err.column = at.column;
    return err;
}

Result<std::string> required_attr(const xml::Element& e, std::string_view name) {
    const std::string* v = e.attribute(name);
    if (v == nullptr)
        return structure_error(e, "<" + e.name + "> lacks attribute '" + std::string(name) + "'");
    return *v;
}

Result<int> int_attr(const xml::Element& e, std::string_view name) {
    auto text = required_attr(e, name);
    if (!text) return std::move(text).error();
    int value = 0;
    const auto& s = *text;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        return structure_error(e, "attribute '" + std::string(name) + "' is not an integer");
    return value;
}

Result<double> double_attr(const xml::Element& e, std::string_view name) {
    auto text = required_attr(e, name);
    if (!text) return std::move(text).error();
    auto v = parse_double(*text);
    if (!v) return structure_error(e, "attribute '" + std::string(name) + "' is not a number");
    return *v;
}

Result<bool> bool_attr(const xml::Element& e, std::string_view name) {
    const std::string* v = e.attribute(name);
    if (v == nullptr || *v == "false") return false;
    if (*v == "true") return true;
    return structure_error(e, "attribute '" + std::string(name) + "' must be true or false");
}

/// Walks child elements in a fixed order.
class Cursor {
public:
    explicit Cursor(const xml::Element& parent) : parent_(parent), children_(parent.elements()) {}

    const xml::Element* optional(std::string_view name) {
        if (pos_ < children_.size() && children_[pos_]->name == name) return children_[pos_++];
        return nullptr;
    }

    Result<const xml::Element*> required(std::string_view name) {
        if (const auto* e = optional(name)) return e;
        const xml::Element& at = pos_ < children_.size() ? *children_[pos_] : parent_;
        return structure_error(at, "expected <" + std::string(name) + "> in <" + parent_.name + ">");
    }

    Result<void> finish() const {
        if (pos_ < children_.size())
            return structure_error(*children_[pos_],
                                   "unexpected <" + children_[pos_]->name + "> in <" + parent_.name + ">");
        return {};
    }

private:
    const xml::Element& parent_;
    std::vector<const xml::Element*> children_;
    std::size_t pos_ = 0;
};

Result<void> text_only(const xml::Element& e) {
    if (e.has_element_children()) return structure_error(e, "<" + e.name + "> must hold text only");
    return {};
}

Result<std::vector<std::string>> string_list(const xml::Element& e, std::string_view item) {
    std::vector<std::string> out;
    for (const auto* child : e.elements()) {
        if (child->name != item)
            return structure_error(*child, "expected <" + std::string(item) + "> in <" + e.name + ">");
        if (auto ok = text_only(*child); !ok) return std::move(ok).error();
        out.push_back(child->text());
    }
    if (!e.elements().empty() || e.text().find_first_not_of(" \t\r\n") == std::string::npos) return out;
    return structure_error(e, "<" + e.name + "> must not hold text");
}

void add_text_child(xml::Element& parent, std::string name, const std::string& text) {
    auto& e = parent.add_element(std::move(name));
    if (!text.empty()) e.add_text(text);
}

xml::Element kind_attrs(xml::Element e, const DocumentKind& kind) {
    e.set("kind", std::string(to_string(kind.tag)));
    if (kind.planSubkind) e.set("planSubkind", std::string(to_string(*kind.planSubkind)));
    return e;
}

Result<DocumentKind> kind_from(const xml::Element& e) {
    auto tag_text = required_attr(e, "kind");
    if (!tag_text) return std::move(tag_text).error();
    auto tag = parse_kind_tag(*tag_text);
    if (!tag) return structure_error(e, "unknown kind '" + *tag_text + "'");
    DocumentKind kind{*tag, std::nullopt};
    if (const auto* sub = e.attribute("planSubkind")) {
        auto parsed = parse_plan_subkind(*sub);
        if (!parsed) return structure_error(e, "unknown plan subkind '" + *sub + "'");
        kind.planSubkind = *parsed;
    }
    return kind;
}

void write_attribute_set(xml::Element& parent, const AttributeSet& set) {
    for (const auto& [name, entry] : set.entries) {
        for (const auto& value : entry.values) {
            auto& a = parent.add_element("attr");
            a.set("name", name);
            if (!value.empty()) a.add_text(value);
        }
        for (const auto& group : entry.groups) {
            auto& g = parent.add_element("group");
            g.set("name", name);
            write_attribute_set(g, group);
        }
    }
}

Result<AttributeSet> read_attribute_set(const xml::Element& parent, bool allow_legacy,
                                        std::vector<LegacyValue>* legacy) {
    AttributeSet set;
    auto children = parent.elements();
    for (std::size_t i = 0; i < children.size(); ++i) {
        const auto* child = children[i];
        if (child->name == "legacy" && allow_legacy && i + 1 == children.size()) {
            for (const auto* v : child->elements()) {
                if (v->name != "value") return structure_error(*v, "expected <value> in <legacy>");
                if (auto ok = text_only(*v); !ok) return std::move(ok).error();
                auto path = required_attr(*v, "path");
                if (!path) return std::move(path).error();
                auto version = int_attr(*v, "from-version");
                if (!version) return std::move(version).error();
                auto reason = required_attr(*v, "reason");
                if (!reason) return std::move(reason).error();
                legacy->push_back({*path, v->text(), *version, *reason});
            }
            continue;
        }
        if (child->name != "attr" && child->name != "group")
            return structure_error(*child, "unexpected <" + child->name + "> in <" + parent.name + ">");
        auto name = required_attr(*child, "name");
        if (!name) return std::move(name).error();
        auto& entry = set.entries[*name];
        if (child->name == "attr") {
            if (auto ok = text_only(*child); !ok) return std::move(ok).error();
            entry.values.push_back(child->text());
        } else {
            auto inner = read_attribute_set(*child, false, nullptr);
            if (!inner) return std::move(inner).error();
            entry.groups.push_back(std::move(*inner));
        }
    }
    return set;
}

void write_body(xml::Element& root, const RecordDraft& d, bool with_hash) {
    add_text_child(root, "title", d.title);
    add_text_child(root, "author", d.author);
    add_text_child(root, "provenance", d.provenance);
    if (d.captureDate) add_text_child(root, "capture-date", format_date(*d.captureDate));
    auto& subject = root.add_element("subject");
    for (const auto& k : d.subjectKeywords) add_text_child(subject, "keyword", k);
    auto& places = root.add_element("places");
    for (const auto& p : d.placeRefs) add_text_child(places, "ref", p);
    auto& periods = root.add_element("periods");
    for (const auto& p : d.periodRefs) add_text_child(periods, "ref", p);
    if (d.coordinates) {
        auto& c = root.add_element("coordinates");
        c.set("x", format_double(d.coordinates->x));
        c.set("y", format_double(d.coordinates->y));
        c.set("z", format_double(d.coordinates->z));
    }
    auto& content = root.add_element("content");
    content.set("href", d.content.href);
    content.set("format", d.content.mediaFormat);
    if (with_hash || !d.content.checksum.empty()) {
        content.set("checksum", d.content.checksum);
        content.set("size", std::to_string(d.content.byteSize));
    }
    auto& attrs = root.add_element("attributes");
    write_attribute_set(attrs, d.attributes.root);
    if (!d.attributes.legacy.empty()) {
        auto& legacy = attrs.add_element("legacy");
        for (const auto& l : d.attributes.legacy) {
            auto& v = legacy.add_element("value");
            v.set("path", l.path);
            v.set("from-version", std::to_string(l.fromVersion));
            v.set("reason", l.reason);
            if (!l.value.empty()) v.add_text(l.value);
        }
    }
}

Result<void> read_body(Cursor& cur, RecordDraft& d, bool require_hash) {
    auto text_field = [&](std::string_view name, std::string& out) -> Result<void> {
        auto e = cur.required(name);
        if (!e) return std::move(e).error();
        if (auto ok = text_only(**e); !ok) return ok;
        out = (*e)->text();
        return {};
    };
    if (auto ok = text_field("title", d.title); !ok) return ok;
    if (auto ok = text_field("author", d.author); !ok) return ok;
    if (auto ok = text_field("provenance", d.provenance); !ok) return ok;
    if (const auto* cd = cur.optional("capture-date")) {
        if (auto ok = text_only(*cd); !ok) return ok;
        auto date = parse_date(cd->text());
        if (!date) return structure_error(*cd, "capture-date is not YYYY-MM-DD");
        d.captureDate = *date;
    }
    struct ListSpec {
        std::string_view element;
        std::string_view item;
        std::vector<std::string>* target;
    };
    for (auto spec : {ListSpec{"subject", "keyword", &d.subjectKeywords},
                      ListSpec{"places", "ref", &d.placeRefs}, ListSpec{"periods", "ref", &d.periodRefs}}) {
        auto e = cur.required(spec.element);
        if (!e) return std::move(e).error();
        auto list = string_list(**e, spec.item);
        if (!list) return std::move(list).error();
        *spec.target = std::move(*list);
    }
    if (const auto* c = cur.optional("coordinates")) {
        auto x = double_attr(*c, "x");
        auto y = double_attr(*c, "y");
        auto z = double_attr(*c, "z");
        if (!x) return std::move(x).error();
        if (!y) return std::move(y).error();
        if (!z) return std::move(z).error();
        d.coordinates = Coordinates{*x, *y, *z};
    }
    auto content = cur.required("content");
    if (!content) return std::move(content).error();
    const auto& ce = **content;
    auto href = required_attr(ce, "href");
    if (!href) return std::move(href).error();
    auto format = required_attr(ce, "format");
    if (!format) return std::move(format).error();
    d.content.href = *href;
    d.content.mediaFormat = *format;
    if (require_hash || ce.attribute("checksum") != nullptr) {
        auto checksum = required_attr(ce, "checksum");
        if (!checksum) return std::move(checksum).error();
        auto size_text = required_attr(ce, "size");
        if (!size_text) return std::move(size_text).error();
        std::int64_t size = 0;
        const auto& s = *size_text;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), size);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
            return structure_error(ce, "content size is not an integer");
        d.content.checksum = *checksum;
        d.content.byteSize = size;
    }
    auto attrs = cur.required("attributes");
    if (!attrs) return std::move(attrs).error();
    auto set = read_attribute_set(**attrs, true, &d.attributes.legacy);
    if (!set) return std::move(set).error();
    d.attributes.root = std::move(*set);
    return {};
}

void write_nodes(xml::Element& parent, const std::vector<AttributeNode>& nodes) {
    for (const auto& n : nodes) {
        auto& e = parent.add_element("node");
        e.set("name", n.name);
        e.set("type", std::string(to_string(n.valueType)));
        if (!n.facet.empty()) e.set("facet", n.facet);
        e.set("required", n.required ? "true" : "false");
        e.set("repeatable", n.repeatable ? "true" : "false");
        write_nodes(e, n.children);
    }
}

Result<AttributeNode> read_node(const xml::Element& e) {
    AttributeNode n;
    auto name = required_attr(e, "name");
    if (!name) return std::move(name).error();
    n.name = *name;
    auto type_text = required_attr(e, "type");
    if (!type_text) return std::move(type_text).error();
    auto type = parse_value_type(*type_text);
    if (!type) return structure_error(e, "unknown value type '" + *type_text + "'");
    n.valueType = *type;
    if (const auto* f = e.attribute("facet")) n.facet = *f;
    auto req = bool_attr(e, "required");
    if (!req) return std::move(req).error();
    auto rep = bool_attr(e, "repeatable");
    if (!rep) return std::move(rep).error();
    n.required = *req;
    n.repeatable = *rep;
    for (const auto* c : e.elements()) {
        if (c->name != "node") return structure_error(*c, "expected <node>");
        auto child = read_node(*c);
        if (!child) return child;
        n.children.push_back(std::move(*child));
    }
    return n;
}

Result<xml::Element> parse_root(std::string_view bytes, std::string_view expected) {
    auto root = xml::parse(bytes);
    if (!root) return root;
    if (root->name != expected)
        return structure_error(*root, "root element must be <" + std::string(expected) + ">");
    return root;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

xml::Element record_to_element(const DocumentRecord& r) {
    xml::Element root = kind_attrs(xml::Element{"record"}, r.kind);
    root.set("id", r.id);
    root.set("schemaVersion", std::to_string(r.schemaVersion));
    write_body(root, draft_of(r), true);
    auto& audit = root.add_element("audit");
    add_text_child(audit, "created", format_timestamp(r.createdAt));
    add_text_child(audit, "updated", format_timestamp(r.updatedAt));
    if (r.archivedAt) add_text_child(audit, "archived", format_timestamp(*r.archivedAt));
    return root;
}

std::string record_to_xml(const DocumentRecord& record) { return xml::write(record_to_element(record)); }

Result<DocumentRecord> record_from_element(const xml::Element& root) {
    if (root.name != "record") return structure_error(root, "root element must be <record>");
    DocumentRecord r;
    auto id = required_attr(root, "id");
    if (!id) return std::move(id).error();
    r.id = *id;
    auto kind = kind_from(root);
    if (!kind) return std::move(kind).error();
    auto version = int_attr(root, "schemaVersion");
    if (!version) return std::move(version).error();
    r.schemaVersion = *version;

    Cursor cur(root);
    RecordDraft body;
    body.kind = *kind;
    if (auto ok = read_body(cur, body, true); !ok) return std::move(ok).error();
    r.kind = body.kind;
    r.title = std::move(body.title);
    r.author = std::move(body.author);
    r.provenance = std::move(body.provenance);
    r.subjectKeywords = std::move(body.subjectKeywords);
    r.captureDate = body.captureDate;
    r.placeRefs = std::move(body.placeRefs);
    r.periodRefs = std::move(body.periodRefs);
    r.coordinates = body.coordinates;
    r.content = std::move(body.content);
    r.attributes = std::move(body.attributes);

    auto audit = cur.required("audit");
    if (!audit) return std::move(audit).error();
    if (auto ok = cur.finish(); !ok) return std::move(ok).error();
    Cursor ac(**audit);
    auto stamp = [&](std::string_view name, bool required) -> Result<std::optional<Timestamp>> {
        const xml::Element* e = ac.optional(name);
        if (e == nullptr) {
            if (!required) return std::optional<Timestamp>{};
            return structure_error(**audit, "<audit> lacks <" + std::string(name) + ">");
        }
        auto t = parse_timestamp(e->text());
        if (!t || e->has_element_children())
            return structure_error(*e, "<" + std::string(name) + "> is not a UTC timestamp");
        return std::optional<Timestamp>{*t};
    };
    auto created = stamp("created", true);
    if (!created) return std::move(created).error();
    auto updated = stamp("updated", true);
    if (!updated) return std::move(updated).error();
    auto archived = stamp("archived", false);
    if (!archived) return std::move(archived).error();
    if (auto ok = ac.finish(); !ok) return std::move(ok).error();
    r.createdAt = **created;
    r.updatedAt = **updated;
    r.archivedAt = *archived;
    return r;
}

Result<DocumentRecord> record_from_xml(std::string_view bytes) {
    auto root = xml::parse(bytes);
    if (!root) return std::move(root).error();
    return record_from_element(*root);
}

xml::Element schema_to_element(const MetadataSchema& schema) {
    xml::Element root{"schema"};
    root.set("version", std::to_string(schema.version));
    for (const auto& [kind, nodes] : schema.perKind) {
        if (nodes.empty()) continue;
        auto& k = root.add_element("kind");
        k.set("tag", kind);
        write_nodes(k, nodes);
    }
    return root;
}

std::string schema_to_xml(const MetadataSchema& schema) { return xml::write(schema_to_element(schema)); }

Result<MetadataSchema> schema_from_xml(std::string_view bytes) {
    auto root = parse_root(bytes, "schema");
    if (!root) return std::move(root).error();
    MetadataSchema schema;
    auto version = int_attr(*root, "version");
    if (!version) return std::move(version).error();
    schema.version = *version;
    for (const auto* k : root->elements()) {
        if (k->name != "kind") return structure_error(*k, "expected <kind>");
        auto tag = required_attr(*k, "tag");
        if (!tag) return std::move(tag).error();
        auto& nodes = schema.perKind[*tag];
        for (const auto* n : k->elements()) {
            if (n->name != "node") return structure_error(*n, "expected <node>");
            auto node = read_node(*n);
            if (!node) return std::move(node).error();
            nodes.push_back(std::move(*node));
        }
    }
    return schema;
}

xml::Element period_to_element(const Period& p) {
    xml::Element e{"period"};
    e.set("id", p.id);
    e.set("start", std::to_string(p.startYear));
    e.set("end", std::to_string(p.endYear));
    add_text_child(e, "label", p.label);
    add_text_child(e, "description", p.description);
    return e;
}

xml::Element place_to_element(const Place& p) {
    xml::Element e{"place"};
    e.set("id", p.id);
    if (p.parentId) e.set("parent", *p.parentId);
    add_text_child(e, "name", p.name);
    add_text_child(e, "description", p.description);
    if (p.footprint) {
        auto& f = e.add_element("footprint");
        for (const auto& v : *p.footprint) {
            auto& vx = f.add_element("vertex");
            vx.set("x", format_double(v.x));
            vx.set("y", format_double(v.y));
        }
    }
    return e;
}

xml::Element vocabulary_to_element(const Vocabulary& v) {
    xml::Element e{"vocabulary"};
    e.set("facet", v.facetName);
    for (const auto& t : v.terms) add_text_child(e, "term", t);
    return e;
}

Result<Period> period_from_element(const xml::Element& e) {
    Period p;
    auto id = required_attr(e, "id");
    if (!id) return std::move(id).error();
    auto start = int_attr(e, "start");
    if (!start) return std::move(start).error();
    auto end = int_attr(e, "end");
    if (!end) return std::move(end).error();
    p.id = *id;
    p.startYear = *start;
    p.endYear = *end;
    Cursor cur(e);
    auto label = cur.required("label");
    if (!label) return std::move(label).error();
    p.label = (*label)->text();
    if (const auto* d = cur.optional("description")) p.description = d->text();
    if (auto ok = cur.finish(); !ok) return std::move(ok).error();
    return p;
}

Result<Place> place_from_element(const xml::Element& e) {
    Place p;
    auto id = required_attr(e, "id");
    if (!id) return std::move(id).error();
    p.id = *id;
    if (const auto* parent = e.attribute("parent")) p.parentId = *parent;
    Cursor cur(e);
    auto name = cur.required("name");
    if (!name) return std::move(name).error();
    p.name = (*name)->text();
    if (const auto* d = cur.optional("description")) p.description = d->text();
    if (const auto* f = cur.optional("footprint")) {
        std::vector<Point2> vertices;
        for (const auto* v : f->elements()) {
            if (v->name != "vertex") return structure_error(*v, "expected <vertex>");
            auto x = double_attr(*v, "x");
            if (!x) return std::move(x).error();
            auto y = double_attr(*v, "y");
            if (!y) return std::move(y).error();
            vertices.push_back({*x, *y});
        }
        p.footprint = std::move(vertices);
    }
    if (auto ok = cur.finish(); !ok) return std::move(ok).error();
    return p;
}

Result<Vocabulary> vocabulary_from_element(const xml::Element& e) {
    Vocabulary v;
    auto facet = required_attr(e, "facet");
    if (!facet) return std::move(facet).error();
    v.facetName = *facet;
    auto terms = string_list(e, "term");
    if (!terms) return std::move(terms).error();
    v.terms = std::move(*terms);
    return v;
}

std::string reference_to_xml(const ReferenceData& ref) {
    xml::Element root{"reference"};
    auto& vocabularies = root.add_element("vocabularies");
    for (const auto& v : ref.vocabularies) vocabularies.children.push_back({vocabulary_to_element(v)});
    auto& periods = root.add_element("periods");
    for (const auto& p : ref.periods) periods.children.push_back({period_to_element(p)});
    auto& places = root.add_element("places");
    for (const auto& p : ref.places) places.children.push_back({place_to_element(p)});
    return xml::write(root);
}

Result<ReferenceData> reference_from_xml(std::string_view bytes) {
    auto root = parse_root(bytes, "reference");
    if (!root) return std::move(root).error();
    ReferenceData ref;
    Cursor cur(*root);
    auto vocabularies = cur.required("vocabularies");
    if (!vocabularies) return std::move(vocabularies).error();
    for (const auto* e : (*vocabularies)->elements()) {
        auto v = vocabulary_from_element(*e);
        if (!v) return std::move(v).error();
        ref.vocabularies.push_back(std::move(*v));
    }
    auto periods = cur.required("periods");
    if (!periods) return std::move(periods).error();
    for (const auto* e : (*periods)->elements()) {
        auto p = period_from_element(*e);
        if (!p) return std::move(p).error();
        ref.periods.push_back(std::move(*p));
    }
    auto places = cur.required("places");
    if (!places) return std::move(places).error();
    for (const auto* e : (*places)->elements()) {
        auto p = place_from_element(*e);
        if (!p) return std::move(p).error();
        ref.places.push_back(std::move(*p));
    }
    if (auto ok = cur.finish(); !ok) return std::move(ok).error();
    return ref;
}

std::string delta_to_xml(const SchemaDelta& delta) {
    xml::Element root{"delta"};
    for (const auto& change : delta.changes) {
        if (const auto* add = std::get_if<AddNode>(&change)) {
            auto& e = root.add_element("add");
            e.set("path", add->path);
            e.set("type", std::string(to_string(add->node.valueType)));
            if (!add->node.facet.empty()) e.set("facet", add->node.facet);
            e.set("required", add->node.required ? "true" : "false");
            e.set("repeatable", add->node.repeatable ? "true" : "false");
            if (add->defaultValue) e.set("default", *add->defaultValue);
            write_nodes(e, add->node.children);
        } else if (const auto* rm = std::get_if<RemoveNode>(&change)) {
            root.add_element("remove").set("path", rm->path);
        } else if (const auto* rn = std::get_if<RenameNode>(&change)) {
            auto& e = root.add_element("rename");
            e.set("path", rn->path);
            e.set("to", rn->newName);
        } else if (const auto* rt = std::get_if<RetypeNode>(&change)) {
            auto& e = root.add_element("retype");
            e.set("path", rt->path);
            e.set("type", std::string(to_string(rt->newType)));
            if (!rt->facet.empty()) e.set("facet", rt->facet);
            if (rt->defaultValue) e.set("default", *rt->defaultValue);
        }
    }
    return xml::write(root);
}

Result<SchemaDelta> delta_from_element(const xml::Element& root) {
    if (root.name != "delta") return structure_error(root, "root element must be <delta>");
    SchemaDelta delta;
    for (const auto* e : root.elements()) {
        auto path = required_attr(*e, "path");
        if (!path) return std::move(path).error();
        std::optional<std::string> def;
        if (const auto* d = e->attribute("default")) def = *d;
        if (e->name == "add") {
            xml::Element node_el = *e;
            node_el.set("name", path->substr(path->rfind('/') + 1));
            auto node = read_node(node_el);
            if (!node) return std::move(node).error();
            delta.changes.push_back(AddNode{*path, std::move(*node), def});
        } else if (e->name == "remove") {
            delta.changes.push_back(RemoveNode{*path});
        } else if (e->name == "rename") {
            auto to = required_attr(*e, "to");
            if (!to) return std::move(to).error();
            delta.changes.push_back(RenameNode{*path, *to});
        } else if (e->name == "retype") {
            auto type_text = required_attr(*e, "type");
            if (!type_text) return std::move(type_text).error();
            auto type = parse_value_type(*type_text);
            if (!type) return structure_error(*e, "unknown value type '" + *type_text + "'");
            const std::string* facet = e->attribute("facet");
            delta.changes.push_back(RetypeNode{*path, *type, facet ? *facet : std::string{}, def});
        } else {
            return structure_error(*e, "unknown change <" + e->name + ">");
        }
    }
    return delta;
}

Result<SchemaDelta> delta_from_xml(std::string_view bytes) {
    auto root = xml::parse(bytes);
    if (!root) return std::move(root).error();
    return delta_from_element(*root);
}

xml::Element draft_to_entry_element(const RecordDraft& draft) {
    xml::Element e = kind_attrs(xml::Element{"entry"}, draft.kind);
    write_body(e, draft, false);
    return e;
}

Result<Manifest> manifest_from_xml(std::string_view bytes) {
    auto root = parse_root(bytes, "manifest");
    if (!root) return std::move(root).error();
    Manifest m;
    for (const auto* e : root->elements()) {
        if (e->name == "vocabulary") {
            auto v = vocabulary_from_element(*e);
            if (!v) return std::move(v).error();
            m.reference.vocabularies.push_back(std::move(*v));
        } else if (e->name == "period") {
            auto p = period_from_element(*e);
            if (!p) return std::move(p).error();
            m.reference.periods.push_back(std::move(*p));
        } else if (e->name == "place") {
            auto p = place_from_element(*e);
            if (!p) return std::move(p).error();
            m.reference.places.push_back(std::move(*p));
        } else if (e->name == "entry") {
            ManifestEntry entry;
            entry.line = e->line;
            auto kind = kind_from(*e);
            if (!kind) return std::move(kind).error();
            entry.draft.kind = *kind;
            Cursor cur(*e);
            if (auto ok = read_body(cur, entry.draft, false); !ok) return std::move(ok).error();
            if (auto ok = cur.finish(); !ok) return std::move(ok).error();
            m.entries.push_back(std::move(entry));
        } else {
            return structure_error(*e, "unexpected <" + e->name + "> in <manifest>");
        }
    }
    return m;
}

}  // namespace sia
