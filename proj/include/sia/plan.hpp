#pragma once

// 2D composition: layered synthesis plans built from vector plan records and
// photo-montages of image records, serialized to SVG. Every drawable element
// carries the id of the record it came from.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sia/composition.hpp"
#include "sia/model.hpp"
#include "sia/result.hpp"
#include "sia/scene.hpp"
#include "sia/xml.hpp"

namespace sia {

class Store;

enum class ContentMode { vector_inline, raster_embed };

std::string_view to_string(ContentMode mode);

struct ViewBox {
    double x = 0;
    double y = 0;
    double width = 0;
    double height = 0;

    bool operator==(const ViewBox&) const = default;
};

/// Parses an SVG viewBox attribute: four numbers, positive width and height.
std::optional<ViewBox> parse_view_box(std::string_view text);

struct PlanLayer {
    std::string periodId;
    std::string placeId;
    std::string sourceRecordId;
    ContentMode contentMode = ContentMode::vector_inline;
    std::optional<Rgb> colorOverride;  // vector layers
    double opacity = 1.0;              // raster layers
    std::string href;                  // raster layers
    ViewBox frame;                     // source viewBox, or the raster canvas
    // top-level drawable children of the source document, vector layers only
    std::vector<xml::Element> content;

    bool operator==(const PlanLayer&) const = default;
    /// "layer-<period>-<place>-<record>"
    std::string element_id() const;
};

struct PlanDocument {
    std::vector<PlanLayer> layers;  // bottom to top
    ViewBox canvas;
    std::vector<LegendEntry> legend;
    std::vector<CompositionWarning> warnings;

    bool operator==(const PlanDocument&) const = default;
};

inline constexpr double kRasterCanvasWidth = 1024;
inline constexpr double kRasterCanvasHeight = 768;

/// Reads a vector plan asset and splits it into its viewBox and drawable
/// children. Fails with malformed-source-vector naming `recordId`.
Result<std::pair<ViewBox, std::vector<xml::Element>>> load_vector_source(std::string_view bytes,
                                                                        const std::string& recordId);

/// Layers ordered by (period, place, record); each tinted with its period color.
Result<PlanDocument> compose_plan(const Store& store, const CompositionRequest& request);

struct Overlay {
    std::string recordId;
    double opacity = 1.0;
};

/// Base image at full opacity under the overlays, in request order.
Result<PlanDocument> compose_photomontage(const Store& store, const std::string& baseRecordId,
                                          const std::vector<Overlay>& overlays);

struct SvgOptions {
    // url written into raster <image> elements; defaults to the layer href
    std::function<std::string(const PlanLayer&)> image_url;
};

Result<std::string> serialize_svg(const PlanDocument& doc, const SvgOptions& options = {});

}  // namespace sia
