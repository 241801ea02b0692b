#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sia/model.hpp"
#include "sia/result.hpp"

namespace sia {

/// Checks every record invariant against the schema and reference entities.
/// Violations are collected exhaustively in a fixed field order.
std::vector<Violation> validate_record(const DocumentRecord& record, const MetadataSchema& schema,
                                       std::span<const Vocabulary> vocabularies,
                                       std::span<const Period> periods,
                                       std::span<const Place> places);

std::vector<Violation> validate_record(const DocumentRecord& record, const MetadataSchema& schema,
                                       const ReferenceData& reference);

/// Attribute-tree checks only; `prefix` is prepended to every violation path.
std::vector<Violation> validate_attributes(const AttributeValueTree& tree,
                                           std::span<const AttributeNode> nodes,
                                           std::span<const Vocabulary> vocabularies);

/// Closed-interval overlap of a period with [lo, hi].
Result<bool> period_overlaps(const Period& period, int lo, int hi);

/// The place itself plus all transitive children.
Result<std::set<std::string>> place_descendants(std::string_view placeId,
                                                std::span<const Place> places);

std::vector<Violation> validate_period(const Period& period);
std::vector<Violation> validate_place(const Place& place);
std::vector<Violation> validate_vocabulary(const Vocabulary& vocabulary);

/// Uniqueness, parent resolution and acyclicity over the whole reference set.
std::vector<Violation> validate_reference(const ReferenceData& reference);

/// Structural schema invariants; enum facets must exist in `vocabularies`.
std::vector<Violation> validate_schema(const MetadataSchema& schema,
                                       std::span<const Vocabulary> vocabularies);

/// UTF-8 well-formed and free of characters XML 1.0 cannot carry.
bool is_xml_safe_text(std::string_view text);

}  // namespace sia
