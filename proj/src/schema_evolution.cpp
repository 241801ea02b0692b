#include "sia/schema_evolution.hpp"

#include <algorithm>
#include <functional>

#include "sia/validation.hpp"

namespace sia {

namespace {

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> segs;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto slash = path.find('/', start);
        if (slash == std::string_view::npos) slash = path.size();
        segs.emplace_back(path.substr(start, slash - start));
        start = slash + 1;
    }
    return segs;
}

Error invalid(std::string message) { return make_error(ErrorCode::invalid_delta, std::move(message)); }

const std::string& change_path(const SchemaChange& change) {
    return std::visit([](const auto& c) -> const std::string& { return c.path; }, change);
}

/// Sibling list that holds (or will hold) the node named by the last segment.
Result<std::vector<AttributeNode>*> resolve_siblings(MetadataSchema& schema,
                                                     const std::vector<std::string>& segs,
                                                     bool create_kind) {
    if (segs.size() < 2 || std::any_of(segs.begin(), segs.end(), [](auto& s) { return s.empty(); }))
        return invalid("path needs the form <kind>/<node>[/<child>...]");
    if (!parse_kind_tag(segs[0])) return invalid("'" + segs[0] + "' is not a document kind");
    auto kind_it = schema.perKind.find(segs[0]);
    if (kind_it == schema.perKind.end()) {
        if (!create_kind) return invalid("no attribute nodes defined for kind '" + segs[0] + "'");
        kind_it = schema.perKind.emplace(segs[0], std::vector<AttributeNode>{}).first;
    }
    std::vector<AttributeNode>* nodes = &kind_it->second;
    for (std::size_t i = 1; i + 1 < segs.size(); ++i) {
        auto it = std::find_if(nodes->begin(), nodes->end(),
                               [&](const AttributeNode& n) { return n.name == segs[i]; });
        if (it == nodes->end()) return invalid("path segment '" + segs[i] + "' does not resolve");
        if (it->valueType != ValueType::group) return invalid("'" + segs[i] + "' is not a group");
        nodes = &it->children;
    }
    return nodes;
}

std::vector<AttributeNode>::iterator find_node(std::vector<AttributeNode>& nodes, std::string_view name) {
    return std::find_if(nodes.begin(), nodes.end(), [&](const AttributeNode& n) { return n.name == name; });
}

const AttributeNode* lookup_node(const MetadataSchema& schema, const std::vector<std::string>& segs) {
    auto kind_it = schema.perKind.find(segs[0]);
    if (kind_it == schema.perKind.end()) return nullptr;
    const std::vector<AttributeNode>* nodes = &kind_it->second;
    const AttributeNode* node = nullptr;
    for (std::size_t i = 1; i < segs.size(); ++i) {
        auto it = std::find_if(nodes->begin(), nodes->end(),
                               [&](const AttributeNode& n) { return n.name == segs[i]; });
        if (it == nodes->end()) return nullptr;
        node = &*it;
        nodes = &it->children;
    }
    return node;
}

bool facet_has(std::span<const Vocabulary> vocabularies, std::string_view facet, std::string_view term) {
    for (const auto& v : vocabularies)
        if (v.facetName == facet) return std::find(v.terms.begin(), v.terms.end(), term) != v.terms.end();
    return false;
}

bool converts(ValueType type, std::string_view facet, std::string_view value,
              std::span<const Vocabulary> vocabularies) {
    if (!value_parses_as(type, value)) return false;
    return type != ValueType::enumeration || facet_has(vocabularies, facet, value);
}

bool lossless_retype(const AttributeNode& from, const RetypeNode& to) {
    if (to.newType == ValueType::text) return true;
    if (from.valueType == to.newType) return to.newType != ValueType::enumeration || from.facet == to.facet;
    return from.valueType == ValueType::integer && to.newType == ValueType::decimal;
}

/// Calls `fn` on every attribute set that sits at the parent position of
/// `segs` (group instances are expanded).
void for_each_parent(AttributeSet& set, const std::vector<std::string>& segs, std::size_t depth,
                     const std::function<void(AttributeSet&)>& fn) {
    if (depth + 1 == segs.size()) {
        fn(set);
        return;
    }
    auto it = set.entries.find(segs[depth]);
    if (it == set.entries.end()) return;
    for (auto& instance : it->second.groups) for_each_parent(instance, segs, depth + 1, fn);
}

}  // namespace

std::string_view to_string(RecordAction action) {
    switch (action) {
        case RecordAction::fill_empty: return "fill-empty";
        case RecordAction::move_value: return "move-value";
        case RecordAction::retype_or_legacy: return "retype-or-legacy";
        case RecordAction::archive_to_legacy: return "archive-to-legacy";
    }
    return "unknown";
}

std::vector<std::pair<std::string, std::string>> flatten_values(const AttributeSet& set,
                                                                const std::string& prefix) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, entry] : set.entries) {
        std::string path = prefix.empty() ? name : prefix + "/" + name;
        for (const auto& v : entry.values) out.emplace_back(path, v);
        for (const auto& g : entry.groups) {
            auto inner = flatten_values(g, path);
            out.insert(out.end(), inner.begin(), inner.end());
        }
    }
    return out;
}

Result<MetadataSchema> apply_change(const MetadataSchema& schema, const SchemaChange& change,
                                    std::span<const Vocabulary> vocabularies) {
    MetadataSchema next = schema;
    auto segs = split_path(change_path(change));
    auto siblings = resolve_siblings(next, segs, std::holds_alternative<AddNode>(change));
    if (!siblings) return std::move(siblings).error();
    auto& nodes = **siblings;
    const std::string& name = segs.back();

    if (const auto* add = std::get_if<AddNode>(&change)) {
        if (find_node(nodes, name) != nodes.end()) return invalid("node '" + add->path + "' already exists");
        AttributeNode node = add->node;
        node.name = name;
        if (node.valueType == ValueType::group && node.required)
            return invalid("required groups cannot be added to existing records");
        if (add->defaultValue && !converts(node.valueType, node.facet, *add->defaultValue, vocabularies))
            return invalid("default for '" + add->path + "' does not match its type");
        nodes.push_back(std::move(node));
    } else if (std::holds_alternative<RemoveNode>(change)) {
        auto it = find_node(nodes, name);
        if (it == nodes.end()) return invalid("node '" + change_path(change) + "' does not exist");
        nodes.erase(it);
    } else if (const auto* rename = std::get_if<RenameNode>(&change)) {
        auto it = find_node(nodes, name);
        if (it == nodes.end()) return invalid("node '" + rename->path + "' does not exist");
        if (rename->newName != name && find_node(nodes, rename->newName) != nodes.end())
            return invalid("sibling '" + rename->newName + "' already exists");
        it->name = rename->newName;
    } else if (const auto* retype = std::get_if<RetypeNode>(&change)) {
        auto it = find_node(nodes, name);
        if (it == nodes.end()) return invalid("node '" + retype->path + "' does not exist");
        if (it->valueType == ValueType::group || retype->newType == ValueType::group)
            return invalid("group nodes cannot be retyped");
        if (retype->defaultValue &&
            !converts(retype->newType, retype->facet, *retype->defaultValue, vocabularies))
            return invalid("default for '" + retype->path + "' does not match its type");
        it->valueType = retype->newType;
        it->facet = retype->newType == ValueType::enumeration ? retype->facet : std::string{};
    }

    // drop kinds left without nodes so equal schemas compare equal
    std::erase_if(next.perKind, [](const auto& kv) { return kv.second.empty(); });
    // a group may stay childless until a later change of the same delta fills it
    auto problems = validate_schema(next, vocabularies);
    std::erase_if(problems, [](const Violation& v) { return v.rule == "group-children"; });
    if (!problems.empty()) {
        Error err = invalid(problems.front().path + ": " + problems.front().message);
        err.violations = std::move(problems);
        return err;
    }
    return next;
}

Result<MigrationPlan> propose_schema(const MetadataSchema& current, const SchemaDelta& delta,
                                     std::span<const Vocabulary> vocabularies) {
    if (delta.changes.empty()) return invalid("delta has no changes");
    MigrationPlan plan;
    plan.fromVersion = current.version;
    plan.toVersion = current.version + 1;
    plan.delta = delta;
    MetadataSchema working = current;
    for (const auto& change : delta.changes) {
        RecordAction action = RecordAction::move_value;
        if (std::holds_alternative<AddNode>(change)) {
            action = RecordAction::fill_empty;
        } else if (std::holds_alternative<RemoveNode>(change)) {
            action = RecordAction::archive_to_legacy;
        } else if (const auto* retype = std::get_if<RetypeNode>(&change)) {
            const AttributeNode* node = lookup_node(working, split_path(retype->path));
            if (node != nullptr && !lossless_retype(*node, *retype)) action = RecordAction::retype_or_legacy;
        }
        auto next = apply_change(working, change, vocabularies);
        if (!next) return std::move(next).error();
        working = std::move(*next);
        plan.recordActions.push_back(action);
    }
    working.version = plan.toVersion;
    if (auto problems = validate_schema(working, vocabularies); !problems.empty()) {
        Error err = invalid(problems.front().path + ": " + problems.front().message);
        err.violations = std::move(problems);
        return err;
    }
    plan.target = std::move(working);
    return plan;
}

Result<DocumentRecord> migrate_record(const DocumentRecord& record, const MigrationPlan& plan,
                                      const MetadataSchema& source,
                                      std::span<const Vocabulary> vocabularies) {
    DocumentRecord out = record;
    MetadataSchema schema = source;
    const std::string kind{to_string(record.kind.tag)};
    std::optional<Error> failure;

    for (const auto& change : plan.delta.changes) {
        auto segs = split_path(change_path(change));
        if (!segs.empty() && segs[0] == kind) {
            const std::string& name = segs.back();
            const AttributeNode* node = lookup_node(schema, segs);
            std::string path = change_path(change);

            if (const auto* add = std::get_if<AddNode>(&change)) {
                if (add->node.required) {
                    if (!add->defaultValue) {
                        return make_error(ErrorCode::default_missing,
                                          "required node '" + path + "' added without a default");
                    }
                    for_each_parent(out.attributes.root, segs, 1, [&](AttributeSet& set) {
                        auto& entry = set.entries[name];
                        if (entry.empty()) entry.values = {*add->defaultValue};
                    });
                }
            } else if (std::holds_alternative<RemoveNode>(change)) {
                for_each_parent(out.attributes.root, segs, 1, [&](AttributeSet& set) {
                    auto it = set.entries.find(name);
                    if (it == set.entries.end()) return;
                    AttributeSet holder;
                    holder.entries.insert(*it);
                    std::string parent = path.substr(0, path.size() - name.size() - 1);
                    for (auto& [p, v] : flatten_values(holder, parent))
                        out.attributes.legacy.push_back({p, v, plan.fromVersion, "removed"});
                    set.entries.erase(it);
                });
            } else if (const auto* rename = std::get_if<RenameNode>(&change)) {
                for_each_parent(out.attributes.root, segs, 1, [&](AttributeSet& set) {
                    auto it = set.entries.find(name);
                    if (it == set.entries.end() || rename->newName == name) return;
                    auto entry = std::move(it->second);
                    set.entries.erase(it);
                    set.entries[rename->newName] = std::move(entry);
                });
            } else if (const auto* retype = std::get_if<RetypeNode>(&change)) {
                bool required = node != nullptr && node->required;
                for_each_parent(out.attributes.root, segs, 1, [&](AttributeSet& set) {
                    auto it = set.entries.find(name);
                    if (it == set.entries.end()) return;
                    std::vector<std::string> kept;
                    for (auto& v : it->second.values) {
                        if (converts(retype->newType, retype->facet, v, vocabularies)) {
                            kept.push_back(std::move(v));
                        } else {
                            out.attributes.legacy.push_back(
                                {path, std::move(v), plan.fromVersion,
                                 "unconvertible to " + std::string(to_string(retype->newType))});
                        }
                    }
                    it->second.values = std::move(kept);
                    if (!it->second.empty()) return;
                    if (required && retype->defaultValue) {
                        it->second.values = {*retype->defaultValue};
                    } else {
                        set.entries.erase(it);
                        if (required && !failure)
                            failure = make_error(ErrorCode::default_missing,
                                                 "record '" + record.id + "' loses required '" + path +
                                                     "' and the change has no default");
                    }
                });
                if (failure) return *failure;
            }
        }
        auto next = apply_change(schema, change, vocabularies);
        if (!next) return std::move(next).error();
        schema = std::move(*next);
    }
    out.schemaVersion = plan.toVersion;
    return out;
}

}  // namespace sia
