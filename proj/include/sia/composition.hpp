#pragma once

// Selection of place x period pairs shared by the 3D scene and 2D plan
// composers, and the period color palette.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sia/model.hpp"
#include "sia/result.hpp"

namespace sia {

class Store;

struct Rgb {
    double r = 0;
    double g = 0;
    double b = 0;

    auto operator<=>(const Rgb&) const = default;
};

/// "#rrggbb", each channel rounded to 8 bits.
std::string to_hex(const Rgb& color);
/// "r g b" with shortest round-trip decimals, as X3D expects.
std::string to_x3d_color(const Rgb& color);

inline constexpr std::array<Rgb, 12> kPaletteCycle{{
    {1.0, 0.9, 0.0},     // yellow
    {1.0, 0.6, 0.75},    // pink
    {0.2, 0.4, 1.0},     // blue
    {0.2, 0.7, 0.3},     // green
    {1.0, 0.55, 0.0},    // orange
    {0.55, 0.3, 0.75},   // purple
    {0.0, 0.8, 0.85},    // cyan
    {0.85, 0.1, 0.1},    // red
    {0.55, 0.35, 0.15},  // brown
    {0.5, 0.5, 0.5},     // grey
    {0.5, 0.5, 0.0},     // olive
    {0.0, 0.0, 0.5},     // navy
}};

/// Assigns cycle entries to `periodIds` in the given order.
std::map<std::string, Rgb> default_palette(const std::vector<std::string>& periodIds);

struct CompositionRequest {
    std::set<std::string> placeIds;
    std::set<std::string> periodIds;
    std::optional<std::map<std::string, Rgb>> palette;

    bool operator==(const CompositionRequest&) const = default;
};

struct CompositionWarning {
    std::string placeId;
    std::string periodId;
    std::string reason;

    bool operator==(const CompositionWarning&) const = default;
};

struct PairMatch {
    std::string placeId;
    std::string periodId;
    DocumentRecord record;
};

struct PairSelection {
    std::vector<PairMatch> matches;  // ordered by (place, period, record id)
    std::vector<CompositionWarning> warnings;
    std::map<std::string, Rgb> palette;  // every requested period
    std::vector<std::string> periodOrder;  // requested periods by (start year, id)
};

/// Checks the request against the reference data and collects, for every
/// requested pair, the non-archived records of `kind` referencing both ids.
/// Fails with empty-composition when no pair matched anything.
Result<PairSelection> select_pairs(const Store& store, const CompositionRequest& request, KindTag kind);

}  // namespace sia
