#include "sia/composition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "sia/record_xml.hpp"
#include "sia/store.hpp"

namespace sia {

namespace {

bool unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

int channel(double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

std::string to_hex(const Rgb& c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", channel(c.r), channel(c.g), channel(c.b));
    return buf;
}

std::string to_x3d_color(const Rgb& c) {
    return format_double(c.r) + " " + format_double(c.g) + " " + format_double(c.b);
}

std::map<std::string, Rgb> default_palette(const std::vector<std::string>& periodIds) {
    std::map<std::string, Rgb> out;
    for (std::size_t i = 0; i < periodIds.size(); ++i)
        out.emplace(periodIds[i], kPaletteCycle[i % kPaletteCycle.size()]);
    return out;
}

Result<PairSelection> select_pairs(const Store& store, const CompositionRequest& req, KindTag kind) {
    auto state = store.state();
    const auto& ref = state->reference;

    std::vector<Violation> problems;
    if (req.placeIds.empty()) problems.push_back({"placeIds", "non-empty", "select at least one place"});
    if (req.periodIds.empty()) problems.push_back({"periodIds", "non-empty", "select at least one period"});
    for (const auto& id : req.placeIds)
        if (ref.find_place(id) == nullptr)
            problems.push_back({"placeIds", "unknown-place", "unknown place '" + id + "'"});
    for (const auto& id : req.periodIds)
        if (ref.find_period(id) == nullptr)
            problems.push_back({"periodIds", "unknown-period", "unknown period '" + id + "'"});
    if (req.palette) {
        for (const auto& [id, color] : *req.palette) {
            if (!req.periodIds.count(id))
                problems.push_back({"palette." + id, "unknown-period", "palette entry for an unrequested period"});
            if (!unit(color.r) || !unit(color.g) || !unit(color.b))
                problems.push_back({"palette." + id, "range", "color channels must lie in [0, 1]"});
        }
    }
    if (!problems.empty()) {
        Error e = make_error(ErrorCode::invalid_request, "composition request is invalid");
        e.violations = std::move(problems);
        return e;
    }

    PairSelection sel;
    std::vector<const Period*> periods;
    for (const auto& id : req.periodIds) periods.push_back(ref.find_period(id));
    std::sort(periods.begin(), periods.end(), [](const Period* a, const Period* b) {
        return std::tie(a->startYear, a->id) < std::tie(b->startYear, b->id);
    });
    for (const auto* p : periods) sel.periodOrder.push_back(p->id);
    sel.palette = default_palette(sel.periodOrder);
    if (req.palette)
        for (const auto& [id, color] : *req.palette) sel.palette[id] = color;

    for (const auto& place : req.placeIds) {
        for (const auto& period : req.periodIds) {
            IndexFilter filter;
            filter.kinds = {std::string(to_string(kind))};
            filter.placeIds = std::set<std::string>{place};
            filter.periodIds = std::set<std::string>{period};
            std::vector<std::string> ids;
            for (std::size_t offset = 0;;) {
                auto page = store.index().search(filter, offset, 1000);
                if (!page) return std::move(page).error();
                for (const auto& hit : page->items) ids.push_back(hit.id);
                offset += page->items.size();
                if (page->items.empty() || offset >= page->total) break;
            }
            if (ids.empty()) {
                sel.warnings.push_back({place, period, "no-" + std::string(to_string(kind))});
                continue;
            }
            std::sort(ids.begin(), ids.end());
            for (const auto& id : ids) {
                auto record = store.read(id);
                if (!record) return std::move(record).error();
                sel.matches.push_back({place, period, std::move(*record)});
            }
        }
    }
    if (sel.matches.empty())
        return make_error(ErrorCode::empty_composition, "no " + std::string(to_string(kind)) +
                                                            " record matches any requested place and period");
    return sel;
}

}  // namespace sia
