#include "sia/plan.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "sia/record_xml.hpp"
#include "sia/store.hpp"

namespace sia {

namespace {

constexpr double kMargin = 0.05;
constexpr double kVectorFillOpacity = 0.35;

Error malformed(const std::string& recordId, const std::string& why) {
    return make_error(ErrorCode::malformed_source_vector, "vector plan of record '" + recordId + "': " + why);
}

std::string format_box(const ViewBox& b) {
    return format_double(b.x) + " " + format_double(b.y) + " " + format_double(b.width) + " " +
           format_double(b.height);
}

// "none" keeps layer ids well formed for records without a place or period
std::string first_or_none(const std::vector<std::string>& refs) { return refs.empty() ? "none" : refs.front(); }

ViewBox with_margin(ViewBox b) {
    double dx = b.width * kMargin;
    double dy = b.height * kMargin;
    return {b.x - dx, b.y - dy, b.width + 2 * dx, b.height + 2 * dy};
}

ViewBox union_of(const std::vector<PlanLayer>& layers) {
    double x0 = layers.front().frame.x, y0 = layers.front().frame.y;
    double x1 = x0 + layers.front().frame.width, y1 = y0 + layers.front().frame.height;
    for (const auto& l : layers) {
        x0 = std::min(x0, l.frame.x);
        y0 = std::min(y0, l.frame.y);
        x1 = std::max(x1, l.frame.x + l.frame.width);
        y1 = std::max(y1, l.frame.y + l.frame.height);
    }
    return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

std::string_view to_string(ContentMode mode) {
    return mode == ContentMode::vector_inline ? "vector-inline" : "raster-embed";
}

std::optional<ViewBox> parse_view_box(std::string_view text) {
    std::string normalized(text);
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::istringstream in(normalized);
    std::string token;
    std::vector<double> numbers;
    while (in >> token) {
        auto v = parse_double(token);
        if (!v) return std::nullopt;
        numbers.push_back(*v);
    }
    if (numbers.size() != 4 || numbers[2] <= 0 || numbers[3] <= 0) return std::nullopt;
    return ViewBox{numbers[0], numbers[1], numbers[2], numbers[3]};
}

std::string PlanLayer::element_id() const { return "layer-" + periodId + "-" + placeId + "-" + sourceRecordId; }

Result<std::pair<ViewBox, std::vector<xml::Element>>> load_vector_source(std::string_view bytes,
                                                                        const std::string& recordId) {
    auto root = xml::parse(bytes);
    if (!root) return malformed(recordId, root.error().describe());
    if (root->name != "svg") return malformed(recordId, "root element is <" + root->name + ">, not <svg>");
    const std::string* box_text = root->attribute("viewBox");
    if (box_text == nullptr) return malformed(recordId, "missing viewBox");
    auto box = parse_view_box(*box_text);
    if (!box) return malformed(recordId, "viewBox '" + *box_text + "' is not four numbers with a positive size");
    std::vector<xml::Element> children;
    for (const auto& child : root->children) {
        if (!child.is_element()) {
            if (child.text().find_first_not_of(" \t\r\n") != std::string::npos)
                return malformed(recordId, "stray text directly under <svg>");
            continue;
        }
        children.push_back(child.element());
    }
    return std::make_pair(*box, std::move(children));
}

Result<PlanDocument> compose_plan(const Store& store, const CompositionRequest& request) {
    auto sel = select_pairs(store, request, KindTag::vectorPlan);
    if (!sel) return std::move(sel).error();

    PlanDocument doc;
    doc.warnings = std::move(sel->warnings);
    auto reference = store.state()->reference;
    for (const auto& id : sel->periodOrder) {
        const Period* p = reference.find_period(id);
        doc.legend.push_back({id, p != nullptr ? p->label : id, sel->palette.at(id)});
    }
    for (const auto& m : sel->matches) {
        auto path = store.resolve_asset(m.record.content);
        if (!path) return malformed(m.record.id, "asset '" + m.record.content.href + "' is not in the store");
        auto bytes = read_file(*path);
        if (!bytes) return malformed(m.record.id, "asset unreadable");
        auto source = load_vector_source(*bytes, m.record.id);
        if (!source) return std::move(source).error();

        PlanLayer layer;
        layer.periodId = m.periodId;
        layer.placeId = m.placeId;
        layer.sourceRecordId = m.record.id;
        layer.contentMode = ContentMode::vector_inline;
        layer.colorOverride = sel->palette.at(m.periodId);
        layer.href = m.record.content.href;
        layer.frame = source->first;
        layer.content = std::move(source->second);
        doc.layers.push_back(std::move(layer));
    }
    std::sort(doc.layers.begin(), doc.layers.end(), [](const PlanLayer& a, const PlanLayer& b) {
        return std::tie(a.periodId, a.placeId, a.sourceRecordId) < std::tie(b.periodId, b.placeId, b.sourceRecordId);
    });
    doc.canvas = with_margin(union_of(doc.layers));
    return doc;
}

Result<PlanDocument> compose_photomontage(const Store& store, const std::string& baseRecordId,
                                          const std::vector<Overlay>& overlays) {
    std::vector<Overlay> stack{{baseRecordId, 1.0}};
    stack.insert(stack.end(), overlays.begin(), overlays.end());

    std::set<std::string> seen;
    PlanDocument doc;
    for (const auto& o : stack) {
        if (!std::isfinite(o.opacity) || o.opacity < 0.0 || o.opacity > 1.0)
            return make_error(ErrorCode::invalid_opacity,
                              "opacity of '" + o.recordId + "' must lie in [0, 1], got " + format_double(o.opacity));
        auto record = store.read(o.recordId);
        if (!record) return std::move(record).error();
        if (!is_image_bearing(record->kind.tag))
            return make_error(ErrorCode::not_an_image, "record '" + o.recordId + "' is a " +
                                                           std::string(to_string(record->kind.tag)) +
                                                           ", not an image");
        if (!seen.insert(o.recordId).second)
            return make_error(ErrorCode::invalid_request, "record '" + o.recordId + "' appears twice in the montage");

        PlanLayer layer;
        layer.periodId = first_or_none(record->periodRefs);
        layer.placeId = first_or_none(record->placeRefs);
        layer.sourceRecordId = record->id;
        layer.contentMode = ContentMode::raster_embed;
        layer.opacity = o.opacity;
        layer.href = record->content.href;
        layer.frame = {0, 0, kRasterCanvasWidth, kRasterCanvasHeight};
        doc.layers.push_back(std::move(layer));
    }
    doc.canvas = {0, 0, kRasterCanvasWidth, kRasterCanvasHeight};
    return doc;
}

Result<std::string> serialize_svg(const PlanDocument& doc, const SvgOptions& options) {
    if (doc.layers.empty()) return make_error(ErrorCode::empty_composition, "plan has no layers");

    xml::Element svg("svg");
    svg.set("xmlns", "http://www.w3.org/2000/svg");
    svg.set("version", "1.1");
    svg.set("viewBox", format_box(doc.canvas));
    svg.set("width", format_double(doc.canvas.width));
    svg.set("height", format_double(doc.canvas.height));

    for (const auto& layer : doc.layers) {
        auto& g = svg.add_element("g");
        g.set("id", layer.element_id());
        g.set("class", "layer");
        g.set("data-record-id", layer.sourceRecordId);
        g.set("data-period-id", layer.periodId);
        g.set("data-place-id", layer.placeId);
        g.set("data-content-mode", std::string(to_string(layer.contentMode)));
        if (layer.contentMode == ContentMode::vector_inline) {
            if (!layer.colorOverride) return malformed(layer.sourceRecordId, "vector layer without a color");
            std::string color = to_hex(*layer.colorOverride);
            g.set("stroke", color);
            g.set("fill", color);
            g.set("fill-opacity", format_double(kVectorFillOpacity));
            for (const auto& child : layer.content) {
                xml::Element copy = child;
                copy.set("data-record-id", layer.sourceRecordId);
                g.children.push_back(xml::Node{std::move(copy)});
            }
        } else {
            g.set("opacity", format_double(layer.opacity));
            auto& image = g.add_element("image");
            image.set("data-record-id", layer.sourceRecordId);
            image.set("href", options.image_url ? options.image_url(layer) : layer.href);
            image.set("x", format_double(layer.frame.x));
            image.set("y", format_double(layer.frame.y));
            image.set("width", format_double(layer.frame.width));
            image.set("height", format_double(layer.frame.height));
            image.set("preserveAspectRatio", "xMidYMid meet");
        }
    }

    auto& legend = svg.add_element("g");
    legend.set("id", "legend");
    legend.set("class", "legend");
    const double size = std::max(doc.canvas.width, doc.canvas.height) * 0.025;
    for (std::size_t i = 0; i < doc.legend.size(); ++i) {
        const auto& entry = doc.legend[i];
        double y = doc.canvas.y + size * (1.5 * static_cast<double>(i) + 0.5);
        auto& item = legend.add_element("g");
        item.set("class", "legend-entry");
        item.set("data-period-id", entry.periodId);
        auto& swatch = item.add_element("rect");
        swatch.set("x", format_double(doc.canvas.x + size * 0.5));
        swatch.set("y", format_double(y));
        swatch.set("width", format_double(size));
        swatch.set("height", format_double(size));
        swatch.set("fill", to_hex(entry.color));
        auto& label = item.add_element("text");
        label.set("x", format_double(doc.canvas.x + size * 2));
        label.set("y", format_double(y + size * 0.85));
        label.set("font-size", format_double(size));
        label.add_text(entry.label);
    }
    return xml::write(svg);
}

}  // namespace sia
