#include "sia/html_view.hpp"

#include "sia/record_xml.hpp"
#include "sia/schema_evolution.hpp"
#include "sia/xml.hpp"

namespace sia {

namespace {

constexpr const char* kStyle =
    "body{font-family:sans-serif;margin:2em}"
    "table.metadata{border-collapse:collapse}"
    "table.metadata th,table.metadata td{border:1px solid #bbb;padding:4px 8px;text-align:left;"
    "vertical-align:top}"
    "img.thumbnail{max-width:320px;max-height:240px;border:1px solid #888}";

std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

void row(xml::Element& table, const std::string& label, const std::string& value) {
    auto& tr = table.add_element("tr");
    tr.add_element("th").add_text(label);
    auto& td = tr.add_element("td");
    if (!value.empty()) td.add_text(value);
}

}  // namespace

std::string render_record_html(const DocumentRecord& r, const ReferenceData& ref,
                               const HtmlViewOptions& options) {
    xml::Element html{"html"};
    html.set("xmlns", "http://www.w3.org/1999/xhtml");
    html.set("lang", "en");
    auto& head = html.add_element("head");
    head.add_element("meta").set("charset", "utf-8");
    head.add_element("title").add_text(r.title.empty() ? r.id : r.title);
    head.add_element("style").add_text(kStyle);

    auto& body = html.add_element("body");
    body.set("data-record-id", r.id);
    body.add_element("h1").add_text(r.title.empty() ? r.id : r.title);

    if (is_image_bearing(r.kind.tag)) {
        std::string url = options.asset_url ? options.asset_url(r) : r.content.href;
        auto& link = body.add_element("a");
        link.set("class", "original");
        link.set("href", url);
        auto& img = link.add_element("img");
        img.set("class", "thumbnail");
        img.set("src", url);
        img.set("alt", r.title);
    }

    auto& table = body.add_element("table");
    table.set("class", "metadata");
    std::string kind{to_string(r.kind.tag)};
    if (r.kind.planSubkind) kind += " (" + std::string(to_string(*r.kind.planSubkind)) + ")";
    row(table, "Identifier", r.id);
    row(table, "Kind", kind);
    row(table, "Title", r.title);
    row(table, "Author", r.author);
    row(table, "Provenance", r.provenance);
    row(table, "Subject", join(r.subjectKeywords));
    row(table, "Capture date", r.captureDate ? format_date(*r.captureDate) : std::string{});

    std::vector<std::string> places;
    for (const auto& id : r.placeRefs) {
        const Place* p = ref.find_place(id);
        places.push_back(p ? p->name + " [" + id + "]" : id);
    }
    row(table, "Places", join(places));
    std::vector<std::string> periods;
    for (const auto& id : r.periodRefs) {
        const Period* p = ref.find_period(id);
        periods.push_back(p ? p->label + " (" + std::to_string(p->startYear) + " to " +
                                  std::to_string(p->endYear) + ")"
                            : id);
    }
    row(table, "Periods", join(periods));
    if (r.coordinates) {
        row(table, "Coordinates",
            format_double(r.coordinates->x) + " " + format_double(r.coordinates->y) + " " +
                format_double(r.coordinates->z));
    }
    row(table, "Content", r.content.href);
    row(table, "Format", r.content.mediaFormat);
    row(table, "Checksum", r.content.checksum);
    row(table, "Size (bytes)", std::to_string(r.content.byteSize));
    for (const auto& [path, value] : flatten_values(r.attributes.root, {})) row(table, path, value);
    for (const auto& l : r.attributes.legacy)
        row(table, "legacy: " + l.path + " (v" + std::to_string(l.fromVersion) + ", " + l.reason + ")", l.value);
    row(table, "Schema version", std::to_string(r.schemaVersion));
    row(table, "Created", format_timestamp(r.createdAt));
    row(table, "Updated", format_timestamp(r.updatedAt));
    if (r.archivedAt) row(table, "Archived", format_timestamp(*r.archivedAt));

    return "<!DOCTYPE html>\n" + xml::write(html, false);
}

}  // namespace sia
