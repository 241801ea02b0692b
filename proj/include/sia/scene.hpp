#pragma once

// On-the-fly 3D composition: one scene group per selected model record,
// colored by period, serialized to X3D. Geometry stays behind its href.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sia/composition.hpp"
#include "sia/model.hpp"
#include "sia/result.hpp"

namespace sia {

class Store;

struct SceneGroup {
    std::string placeId;
    std::string periodId;
    std::string sourceRecordId;
    ContentRef geometryRef;
    Rgb colorOverride;

    bool operator==(const SceneGroup&) const = default;
    /// Grouping node name, "<place>-<period>-<record>".
    std::string name() const;
};

struct Bounds {
    std::array<double, 3> min{};
    std::array<double, 3> max{};
    bool operator==(const Bounds&) const = default;
};

struct LegendEntry {
    std::string periodId;
    std::string label;
    Rgb color;
    bool operator==(const LegendEntry&) const = default;
};

struct Scene {
    std::vector<SceneGroup> groups;  // ordered by (place, period, record)
    std::vector<CompositionWarning> warnings;
    std::vector<LegendEntry> legend;
    // spans the recorded coordinates of the source models, when any have them
    std::optional<Bounds> bounds;

    bool operator==(const Scene&) const = default;
};

Result<Scene> compose_model(const Store& store, const CompositionRequest& request);

struct X3dOptions {
    // maps a group to the url written into its Inline node; defaults to the content href
    std::function<std::string(const SceneGroup&)> geometry_url;
};

std::string serialize_x3d(const Scene& scene, const X3dOptions& options = {});

}  // namespace sia
