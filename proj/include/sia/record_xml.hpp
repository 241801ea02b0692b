#pragma once

// Canonical XML forms of records, schemas, reference data and schema
// deltas, plus the ingest manifest reader.

#include <string>
#include <string_view>
#include <vector>

#include "sia/model.hpp"
#include "sia/result.hpp"
#include "sia/schema_evolution.hpp"
#include "sia/xml.hpp"

namespace sia {

xml::Element record_to_element(const DocumentRecord& record);
std::string record_to_xml(const DocumentRecord& record);

/// Structural parse only; the caller checks the schema version.
Result<DocumentRecord> record_from_element(const xml::Element& root);
Result<DocumentRecord> record_from_xml(std::string_view bytes);

xml::Element schema_to_element(const MetadataSchema& schema);
std::string schema_to_xml(const MetadataSchema& schema);
Result<MetadataSchema> schema_from_xml(std::string_view bytes);

xml::Element period_to_element(const Period& period);
xml::Element place_to_element(const Place& place);
xml::Element vocabulary_to_element(const Vocabulary& vocabulary);
Result<Period> period_from_element(const xml::Element& e);
Result<Place> place_from_element(const xml::Element& e);
Result<Vocabulary> vocabulary_from_element(const xml::Element& e);

std::string reference_to_xml(const ReferenceData& reference);
Result<ReferenceData> reference_from_xml(std::string_view bytes);

std::string delta_to_xml(const SchemaDelta& delta);
Result<SchemaDelta> delta_from_element(const xml::Element& root);
Result<SchemaDelta> delta_from_xml(std::string_view bytes);

/// One <entry> of an ingest manifest: the record body without id and audit.
/// content/@checksum and content/@size may be omitted; content/@href names
/// the asset file relative to the manifest.
struct ManifestEntry {
    RecordDraft draft;
    int line = 0;
};

struct Manifest {
    ReferenceData reference;
    std::vector<ManifestEntry> entries;
};

Result<Manifest> manifest_from_xml(std::string_view bytes);
xml::Element draft_to_entry_element(const RecordDraft& draft);

std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

}  // namespace sia
