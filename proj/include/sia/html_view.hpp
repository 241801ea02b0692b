#pragma once

#include <functional>
#include <string>

#include "sia/model.hpp"

namespace sia {

struct HtmlViewOptions {
    // maps a record to the URL its thumbnail links to; defaults to content.href
    std::function<std::string(const DocumentRecord&)> asset_url;
};

/// Self-contained XHTML page listing every metadata field of a record. Image
/// kinds get a thumbnail hyperlinked to the original asset.
std::string render_record_html(const DocumentRecord& record, const ReferenceData& reference,
                               const HtmlViewOptions& options = {});

}  // namespace sia
