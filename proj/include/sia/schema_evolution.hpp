#pragma once

// Versioned changes to the metadata attribute tree and the record rewrites
// they imply. Everything here is pure; persistence lives in Store.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sia/model.hpp"
#include "sia/result.hpp"

namespace sia {

/// Paths are "<kind>/<node>/<child>...", e.g. "photo/dimensions/width".
struct AddNode {
    std::string path;
    AttributeNode node;  // name is taken from the last path segment
    std::optional<std::string> defaultValue;

    bool operator==(const AddNode&) const = default;
};

struct RemoveNode {
    std::string path;
    bool operator==(const RemoveNode&) const = default;
};

struct RenameNode {
    std::string path;
    std::string newName;
    bool operator==(const RenameNode&) const = default;
};

struct RetypeNode {
    std::string path;
    ValueType newType = ValueType::text;
    std::string facet;  // enumeration only
    // replaces the last value of a required node when none converts
    std::optional<std::string> defaultValue;

    bool operator==(const RetypeNode&) const = default;
};

using SchemaChange = std::variant<AddNode, RemoveNode, RenameNode, RetypeNode>;

struct SchemaDelta {
    std::vector<SchemaChange> changes;
    bool operator==(const SchemaDelta&) const = default;
};

enum class RecordAction { fill_empty, move_value, retype_or_legacy, archive_to_legacy };

std::string_view to_string(RecordAction action);

struct MigrationPlan {
    int fromVersion = 1;
    int toVersion = 2;
    SchemaDelta delta;
    std::vector<RecordAction> recordActions;  // one per change
    MetadataSchema target;

    bool operator==(const MigrationPlan&) const = default;
};

/// Applies one change to a schema, producing a schema with the same version.
/// A group may be left without children; propose_schema checks the end state.
Result<MetadataSchema> apply_change(const MetadataSchema& schema, const SchemaChange& change,
                                    std::span<const Vocabulary> vocabularies);

/// Validates the delta against `current` and describes the migration.
Result<MigrationPlan> propose_schema(const MetadataSchema& current, const SchemaDelta& delta,
                                     std::span<const Vocabulary> vocabularies);

/// Rewrites one record to plan.toVersion. Fails with default-missing when a
/// required node would end up empty and the change supplies no default.
Result<DocumentRecord> migrate_record(const DocumentRecord& record, const MigrationPlan& plan,
                                      const MetadataSchema& source,
                                      std::span<const Vocabulary> vocabularies);

/// Every leaf value of an attribute tree as ("<kind>/<path>", value) pairs.
std::vector<std::pair<std::string, std::string>> flatten_values(const AttributeSet& set,
                                                                const std::string& prefix);

}  // namespace sia
