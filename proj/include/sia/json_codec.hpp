#pragma once

// JSON projections of the domain types used by the HTTP API and by the CLI's
// machine-readable output. Decoders report bad input as invalid-request.

#include <map>
#include <string>

#include "json.hpp"
#include "sia/composition.hpp"
#include "sia/model.hpp"
#include "sia/plan.hpp"
#include "sia/query.hpp"
#include "sia/result.hpp"
#include "sia/scene.hpp"
#include "sia/schema_evolution.hpp"

namespace sia::json {

using nlohmann::json;

json to_json(const Error& error);
json to_json(const Violation& v);

json to_json(const DocumentRecord& record);
Result<DocumentRecord> record_from_json(const json& j);
Result<RecordDraft> draft_from_json(const json& j);
Result<RecordPatch> patch_from_json(const json& j);

json to_json(const AttributeValueTree& tree);
Result<AttributeValueTree> attributes_from_json(const json& j);

json to_json(const Period& p);
json to_json(const Place& p);
json to_json(const Vocabulary& v);
Result<Period> period_from_json(const json& j);
Result<Place> place_from_json(const json& j);

json to_json(const MetadataSchema& schema);
json to_json(const SchemaDelta& delta);
Result<SchemaDelta> delta_from_json(const json& j);
json to_json(const MigrationPlan& plan);
/// Reads the (fromVersion, toVersion, delta) part of a plan.
Result<MigrationPlan> plan_from_json(const json& j);

json to_json(const ResultPage& page);
json to_json(const FacetMap& facets);
json to_json(const QuerySpec& spec);
Result<QuerySpec> spec_from_json(const json& j);
/// Query-string form: kind, place and keyword may repeat or hold
/// comma-separated lists; from/to give the epoch; author; archived=1.
Result<QuerySpec> spec_from_params(const std::multimap<std::string, std::string>& params);

json to_json(const Rgb& color);
Result<CompositionRequest> composition_from_json(const json& j);
json to_json(const CompositionWarning& w);
Result<std::pair<std::string, std::vector<Overlay>>> montage_from_json(const json& j);

}  // namespace sia::json
