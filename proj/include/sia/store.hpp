#pragma once

// The record store: canonical XML files under records/ are the source of
// truth, mirrored into a relational index under index/. Mutations are
// serialized through one writer slot; reads never take it.
//
// Layout of a data directory:
//   records/<id>.xml     one canonical record document per record
//   media/               binary assets, content addressed, never rewritten
//   schema/v<N>.xml      every metadata schema version ever activated
//   index/index.db       derived index
//   reference.xml        periods, places and controlled vocabularies
//   .sia.lock            held by the process that owns the writer slot

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sia/html_view.hpp"
#include "sia/index.hpp"
#include "sia/model.hpp"
#include "sia/result.hpp"
#include "sia/schema_evolution.hpp"

namespace sia {

/// Points in the record commit sequence where a fault can be injected.
enum class CommitStep {
    write_temp,    // before the temporary file is created
    partial_temp,  // half of the bytes written
    sync_temp,     // temporary file complete, before fsync
    rename,        // before the rename into records/
    index_rows,    // file committed, before the index transaction
    index_commit,  // index rows written, before COMMIT
};

inline constexpr std::array<CommitStep, 6> kAllCommitSteps{
    CommitStep::write_temp, CommitStep::partial_temp, CommitStep::sync_temp,
    CommitStep::rename,     CommitStep::index_rows,   CommitStep::index_commit};

std::string_view to_string(CommitStep step);

/// Thrown by fault hooks to emulate the process dying mid-commit. The store
/// never catches it.
struct SimulatedCrash : std::runtime_error {
    explicit SimulatedCrash(CommitStep at) : std::runtime_error("simulated crash"), step(at) {}
    CommitStep step;
};

struct StoreOptions {
    bool read_only = false;
    std::function<Timestamp()> clock;
    std::function<void(CommitStep)> fault_hook;
    bool durable = true;  // fsync files and directories on commit
};

/// Immutable view of the schema and reference entities at one point in time.
struct StoreState {
    MetadataSchema schema;
    ReferenceData reference;
    std::set<int> schemaVersions;
};

struct RecordProblem {
    std::string id;
    std::vector<Violation> violations;
};

class Store {
public:
    /// Creates an empty store (layout, schema v1, empty reference data).
    /// Fails if `dataDir` exists and is not empty.
    static Result<void> init(const std::filesystem::path& dataDir);

    /// Opens a store. Writers take the lock file, finish or discard any
    /// interrupted commit, and rebuild the index if it disagrees with the
    /// record files.
    static Result<std::unique_ptr<Store>> open(const std::filesystem::path& dataDir,
                                               StoreOptions options = {});

    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    const std::filesystem::path& data_dir() const { return dir_; }
    std::filesystem::path records_dir() const { return dir_ / "records"; }
    std::filesystem::path media_dir() const { return dir_ / "media"; }
    bool read_only() const { return options_.read_only; }

    std::shared_ptr<const StoreState> state() const;
    MetadataSchema schema() const { return state()->schema; }
    ReferenceData reference() const { return state()->reference; }
    Result<MetadataSchema> schema_version(int version) const;

    // reference entities (expert only)
    Result<void> put_period(const Period& period, Role actor);
    Result<void> put_place(const Place& place, Role actor);
    Result<void> add_vocabulary_term(const std::string& facet, const std::string& term, Role actor);
    /// Upserts every entity of `additions` in one commit.
    Result<void> merge_reference(const ReferenceData& additions, Role actor);

    Result<DocumentRecord> ingest(const RecordDraft& draft, Role actor);
    Result<DocumentRecord> read(std::string_view id) const;
    Result<DocumentRecord> update(std::string_view id, const RecordPatch& patch, Role actor);
    /// Soft delete: hides the record from default queries, keeps its file.
    Result<DocumentRecord> archive(std::string_view id, Role actor);

    Result<std::string> export_xml(std::string_view id) const;
    /// Parses a record document without persisting it.
    Result<DocumentRecord> import_xml(std::string_view bytes) const;
    Result<std::string> render_html_view(std::string_view id, const HtmlViewOptions& options = {}) const;

    /// Re-derives the index from records/ alone and swaps it in.
    Result<IndexSnapshot> rebuild_index();
    Result<IndexSnapshot> index_snapshot() const;
    const RecordIndex& index() const { return *index_; }

    std::vector<std::string> record_ids() const;
    Result<std::vector<DocumentRecord>> all_records() const;
    /// Re-validates every record file against its schema version.
    Result<std::vector<RecordProblem>> validate_all() const;

    /// Copies an asset into media/ (content addressed). `created` reports
    /// whether a new file was written.
    Result<ContentRef> store_asset(const std::filesystem::path& source, std::string mediaFormat,
                                   bool* created = nullptr);
    /// Local file behind a content reference, if it lives inside the store.
    std::optional<std::filesystem::path> resolve_asset(const ContentRef& content) const;

    Result<MigrationPlan> propose_schema(const SchemaDelta& delta) const;
    Result<MetadataSchema> apply_migration(const MigrationPlan& plan, Role actor);

private:
    Store(std::filesystem::path dir, StoreOptions options);

    Result<void> recover();
    Result<void> finish_migration();
    Result<void> load_state();
    Result<bool> index_matches_files() const;
    Result<IndexSnapshot> rebuild_locked();

    Timestamp now() const;
    void fault(CommitStep step) const;
    std::vector<Violation> check_record(const DocumentRecord& record, const StoreState& state) const;
    Result<DocumentRecord> commit(DocumentRecord record);
    Result<void> write_reference(const ReferenceData& reference);
    void publish(std::shared_ptr<const StoreState> next);
    std::string assign_id(const DocumentRecord& record) const;
    std::filesystem::path record_path(std::string_view id) const;

    std::filesystem::path dir_;
    StoreOptions options_;
    int lock_fd_ = -1;
    std::unique_ptr<RecordIndex> index_;

    std::mutex writer_;  // the single commit queue
    mutable std::mutex state_mutex_;
    std::shared_ptr<const StoreState> state_;
};

/// Writes `bytes` to `target` via a temporary sibling, fsync and rename.
Result<void> atomic_write_file(const std::filesystem::path& target, std::string_view bytes, bool durable);
Result<std::string> read_file(const std::filesystem::path& path);

}  // namespace sia
