#include "sia/scene.hpp"

#include <algorithm>
#include <tuple>

#include "sia/record_xml.hpp"
#include "sia/store.hpp"
#include "sia/xml.hpp"

namespace sia {

namespace {

// X3D MFString: each url quoted, inner quotes and backslashes escaped
std::string mf_string(const std::string& value) {
    std::string out = "\"";
    for (char c : value) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string format_point(const std::array<double, 3>& p) {
    return format_double(p[0]) + " " + format_double(p[1]) + " " + format_double(p[2]);
}

}  // namespace

std::string SceneGroup::name() const { return placeId + "-" + periodId + "-" + sourceRecordId; }

Result<Scene> compose_model(const Store& store, const CompositionRequest& request) {
    auto sel = select_pairs(store, request, KindTag::model3d);
    if (!sel) return std::move(sel).error();

    Scene scene;
    scene.warnings = std::move(sel->warnings);
    auto reference = store.state()->reference;
    for (const auto& id : sel->periodOrder) {
        const Period* p = reference.find_period(id);
        scene.legend.push_back({id, p != nullptr ? p->label : id, sel->palette.at(id)});
    }
    for (const auto& m : sel->matches) {
        scene.groups.push_back({m.placeId, m.periodId, m.record.id, m.record.content, sel->palette.at(m.periodId)});
        if (!m.record.coordinates) continue;
        std::array<double, 3> at{m.record.coordinates->x, m.record.coordinates->y, m.record.coordinates->z};
        if (!scene.bounds) {
            scene.bounds = Bounds{at, at};
            continue;
        }
        for (int i = 0; i < 3; ++i) {
            scene.bounds->min[i] = std::min(scene.bounds->min[i], at[i]);
            scene.bounds->max[i] = std::max(scene.bounds->max[i], at[i]);
        }
    }
    return scene;
}

std::string serialize_x3d(const Scene& scene, const X3dOptions& options) {
    xml::Element root("X3D");
    root.set("profile", "Interchange");
    root.set("version", "3.3");

    auto& head = root.add_element("head");
    auto& generator = head.add_element("meta");
    generator.set("name", "generator");
    generator.set("content", "sia scene composer");
    for (const auto& entry : scene.legend) {
        auto& meta = head.add_element("meta");
        meta.set("name", "legend:" + entry.periodId);
        meta.set("content", entry.label + " " + to_hex(entry.color));
    }

    auto& body = root.add_element("Scene");
    auto& info = body.add_element("WorldInfo");
    info.set("title", "Composed site model");
    if (scene.bounds)
        info.set("info", mf_string("bounds " + format_point(scene.bounds->min) + " " + format_point(scene.bounds->max)));

    auto groups = scene.groups;
    std::sort(groups.begin(), groups.end(), [](const SceneGroup& a, const SceneGroup& b) {
        return std::tie(a.placeId, a.periodId, a.sourceRecordId) < std::tie(b.placeId, b.periodId, b.sourceRecordId);
    });
    for (const auto& g : groups) {
        auto& group = body.add_element("Group");
        group.set("DEF", g.name());
        auto& inline_node = group.add_element("Inline");
        inline_node.set("url", mf_string(options.geometry_url ? options.geometry_url(g) : g.geometryRef.href));
        auto& material = group.add_element("Shape").add_element("Appearance").add_element("Material");
        material.set("diffuseColor", to_x3d_color(g.colorOverride));
    }
    return xml::write(root);
}

}  // namespace sia
