#include "sia/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sia/checksum.hpp"
#include "sia/html_view.hpp"
#include "sia/record_xml.hpp"
#include "sia/validation.hpp"

namespace fs = std::filesystem;

namespace sia {

namespace {

constexpr const char* kStagingDir = ".migration";
constexpr const char* kCommitMarker = "COMMIT";

Error io_error(const std::string& what) {
    return make_error(ErrorCode::storage_failure, what + ": " + std::strerror(errno));
}

Error permission(std::string_view action) {
    return make_error(ErrorCode::permission_denied, std::string(action) + " requires the expert role");
}

class FileDescriptor {
public:
    explicit FileDescriptor(int fd) : fd_(fd) {}
    ~FileDescriptor() {
        if (fd_ >= 0) ::close(fd_);
    }
    FileDescriptor(const FileDescriptor&) = delete;
    FileDescriptor& operator=(const FileDescriptor&) = delete;
    int get() const { return fd_; }
    int release() { return std::exchange(fd_, -1); }

private:
    int fd_;
};

bool write_all(int fd, std::string_view bytes) {
    while (!bytes.empty()) {
        auto n = ::write(fd, bytes.data(), bytes.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

Result<void> sync_dir(const fs::path& dir) {
    FileDescriptor fd(::open(dir.c_str(), O_RDONLY | O_DIRECTORY));
    if (fd.get() < 0) return io_error("open directory " + dir.string());
    if (::fsync(fd.get()) != 0) return io_error("fsync directory " + dir.string());
    return {};
}

bool is_temp_name(const fs::path& p) { return p.filename().string().starts_with("."); }

std::vector<fs::path> record_files(const fs::path& records) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(records, ec)) {
        const auto& p = entry.path();
        if (entry.is_regular_file() && p.extension() == ".xml" && !is_temp_name(p)) out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void merge_into(IndexSnapshot& into, IndexSnapshot part) {
    for (auto& r : part.rows) into.rows.push_back(std::move(r));
    for (auto& l : part.recordPlaces) into.recordPlaces.push_back(std::move(l));
    for (auto& l : part.recordPeriods) into.recordPeriods.push_back(std::move(l));
    for (auto& l : part.recordKeywords) into.recordKeywords.push_back(std::move(l));
}

template <typename T, typename Key>
void upsert_by(std::vector<T>& items, const T& item, Key key) {
    auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return key(x) == key(item); });
    if (it == items.end())
        items.push_back(item);
    else
        *it = item;
}

}  // namespace

std::string_view to_string(CommitStep step) {
    switch (step) {
        case CommitStep::write_temp: return "write-temp";
        case CommitStep::partial_temp: return "partial-temp";
        case CommitStep::sync_temp: return "sync-temp";
        case CommitStep::rename: return "rename";
        case CommitStep::index_rows: return "index-rows";
        case CommitStep::index_commit: return "index-commit";
    }
    return "unknown";
}

Result<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return make_error(ErrorCode::not_found, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result<void> atomic_write_file(const fs::path& target, std::string_view bytes, bool durable) {
    fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp");
    {
        FileDescriptor fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644));
        if (fd.get() < 0) return io_error("create " + tmp.string());
        if (!write_all(fd.get(), bytes)) return io_error("write " + tmp.string());
        if (durable && ::fsync(fd.get()) != 0) return io_error("fsync " + tmp.string());
    }
    if (::rename(tmp.c_str(), target.c_str()) != 0) return io_error("rename " + tmp.string());
    if (durable) return sync_dir(target.parent_path());
    return {};
}

Store::Store(fs::path dir, StoreOptions options) : dir_(std::move(dir)), options_(std::move(options)) {}

Store::~Store() {
    index_.reset();
    if (lock_fd_ >= 0) ::close(lock_fd_);
}

Result<void> Store::init(const fs::path& dataDir) {
    std::error_code ec;
    if (fs::exists(dataDir, ec) && !fs::is_empty(dataDir, ec))
        return make_error(ErrorCode::conflict, dataDir.string() + " is not empty");
    for (const char* sub : {"records", "media", "schema", "index"}) {
        fs::create_directories(dataDir / sub, ec);
        if (ec) return make_error(ErrorCode::storage_failure, "cannot create " + (dataDir / sub).string());
    }
    MetadataSchema schema;
    schema.version = 1;
    if (auto ok = atomic_write_file(dataDir / "schema" / "v1.xml", schema_to_xml(schema), true); !ok) return ok;
    if (auto ok = atomic_write_file(dataDir / "reference.xml", reference_to_xml({}), true); !ok) return ok;
    // an empty index, so read-only opens work straight away
    auto index = RecordIndex::open(dataDir / "index" / "index.db", false);
    if (!index) return std::move(index).error();
    return {};
}

Result<std::unique_ptr<Store>> Store::open(const fs::path& dataDir, StoreOptions options) {
    std::error_code ec;
    for (const char* sub : {"records", "media", "schema", "index"}) {
        if (!fs::is_directory(dataDir / sub, ec))
            return make_error(ErrorCode::storage_failure, dataDir.string() + " is not a store (missing " + sub + "/)");
    }
    std::unique_ptr<Store> store{new Store(dataDir, std::move(options))};
    const bool read_only = store->options_.read_only;

    if (!read_only) {
        fs::path lock = dataDir / ".sia.lock";
        store->lock_fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (store->lock_fd_ < 0) return io_error("open " + lock.string());
        if (::flock(store->lock_fd_, LOCK_EX | LOCK_NB) != 0)
            return make_error(ErrorCode::storage_failure,
                              "store " + dataDir.string() + " is locked by another writer");
        if (auto ok = store->recover(); !ok) return std::move(ok).error();
    }
    if (auto ok = store->load_state(); !ok) return std::move(ok).error();

    fs::path db = dataDir / "index" / "index.db";
    auto index = RecordIndex::open(db, read_only);
    if (!index && !read_only) {
        // the index is a cache: a damaged database is discarded and rebuilt
        for (const char* suffix : {"", "-wal", "-shm"}) fs::remove(db.string() + suffix, ec);
        index = RecordIndex::open(db, false);
    }
    if (!index) return std::move(index).error();
    store->index_ = std::move(*index);

    auto matches = store->index_matches_files();
    if (!matches || !*matches) {
        if (read_only)
            return make_error(ErrorCode::storage_failure, "index is out of date; run reindex");
        auto rebuilt = store->rebuild_locked();
        if (!rebuilt) return std::move(rebuilt).error();
    }
    return store;
}

Result<void> Store::recover() {
    if (auto ok = finish_migration(); !ok) return ok;
    std::error_code ec;
    for (const auto& sub : {dir_ / "records", dir_ / "media", dir_ / "schema", dir_}) {
        for (const auto& entry : fs::directory_iterator(sub, ec)) {
            auto name = entry.path().filename().string();
            if (entry.is_regular_file() && name.starts_with(".") && name.ends_with(".tmp"))
                fs::remove(entry.path(), ec);
        }
    }
    return {};
}

Result<void> Store::finish_migration() {
    fs::path staging = dir_ / kStagingDir;
    std::error_code ec;
    if (!fs::exists(staging, ec)) return {};
    if (!fs::exists(staging / kCommitMarker, ec)) {
        fs::remove_all(staging, ec);
        return {};
    }
    for (const auto& entry : fs::directory_iterator(staging / "schema", ec)) {
        fs::rename(entry.path(), dir_ / "schema" / entry.path().filename(), ec);
        if (ec) return make_error(ErrorCode::storage_failure, "cannot move " + entry.path().string());
    }
    for (const auto& entry : fs::directory_iterator(staging / "records", ec)) {
        fs::rename(entry.path(), dir_ / "records" / entry.path().filename(), ec);
        if (ec) return make_error(ErrorCode::storage_failure, "cannot move " + entry.path().string());
    }
    if (options_.durable) {
        if (auto ok = sync_dir(dir_ / "schema"); !ok) return ok;
        if (auto ok = sync_dir(dir_ / "records"); !ok) return ok;
    }
    fs::remove_all(staging, ec);
    return {};
}

Result<void> Store::load_state() {
    auto next = std::make_shared<StoreState>();
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir_ / "schema", ec)) {
        auto name = entry.path().filename().string();
        if (name.size() < 6 || name[0] != 'v' || !name.ends_with(".xml")) continue;
        try {
            std::size_t used = 0;
            int v = std::stoi(name.substr(1, name.size() - 5), &used);
            if (used == name.size() - 5) next->schemaVersions.insert(v);
        } catch (const std::exception&) {
        }
    }
    if (next->schemaVersions.empty())
        return make_error(ErrorCode::storage_failure, "no schema documents under " + (dir_ / "schema").string());
    auto schema = schema_version(*next->schemaVersions.rbegin());
    if (!schema) return std::move(schema).error();
    next->schema = std::move(*schema);

    auto ref_bytes = read_file(dir_ / "reference.xml");
    if (ref_bytes) {
        auto ref = reference_from_xml(*ref_bytes);
        if (!ref) {
            Error err = std::move(ref).error();
            err.message = "reference.xml: " + err.message;
            return err;
        }
        next->reference = std::move(*ref);
    }
    publish(std::move(next));
    return {};
}

Result<MetadataSchema> Store::schema_version(int version) const {
    auto bytes = read_file(dir_ / "schema" / ("v" + std::to_string(version) + ".xml"));
    if (!bytes)
        return make_error(ErrorCode::schema_version_unknown, "no schema version " + std::to_string(version));
    auto schema = schema_from_xml(*bytes);
    if (!schema) return std::move(schema).error();
    if (schema->version != version)
        return make_error(ErrorCode::storage_failure, "schema file v" + std::to_string(version) +
                                                          ".xml declares version " +
                                                          std::to_string(schema->version));
    return schema;
}

std::shared_ptr<const StoreState> Store::state() const {
    std::lock_guard lock(state_mutex_);
    return state_;
}

void Store::publish(std::shared_ptr<const StoreState> next) {
    std::lock_guard lock(state_mutex_);
    state_ = std::move(next);
}

Timestamp Store::now() const {
    if (options_.clock) return options_.clock();
    return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

void Store::fault(CommitStep step) const {
    if (options_.fault_hook) options_.fault_hook(step);
}

fs::path Store::record_path(std::string_view id) const { return dir_ / "records" / (std::string(id) + ".xml"); }

std::vector<std::string> Store::record_ids() const {
    std::vector<std::string> ids;
    for (const auto& p : record_files(records_dir())) ids.push_back(p.stem().string());
    return ids;
}

Result<std::vector<DocumentRecord>> Store::all_records() const {
    std::vector<DocumentRecord> out;
    for (const auto& p : record_files(records_dir())) {
        auto bytes = read_file(p);
        if (!bytes) return make_error(ErrorCode::corrupt_record_file, p.string() + " unreadable");
        auto record = record_from_xml(*bytes);
        if (!record || record->id != p.stem().string()) {
            Error err = record ? make_error(ErrorCode::corrupt_record_file, "id does not match file name")
                               : std::move(record).error();
            err.code = ErrorCode::corrupt_record_file;
            err.message = p.string() + ": " + err.message;
            return err;
        }
        out.push_back(std::move(*record));
    }
    return out;
}

Result<bool> Store::index_matches_files() const {
    auto indexed = index_->digests();
    if (!indexed) return std::move(indexed).error();
    auto files = record_files(records_dir());
    if (files.size() != indexed->size()) return false;
    for (const auto& p : files) {
        auto it = indexed->find(p.stem().string());
        if (it == indexed->end()) return false;
        auto digest = sha256_file(p);
        if (!digest || *digest != it->second) return false;
    }
    return true;
}

Result<IndexSnapshot> Store::rebuild_locked() {
    IndexSnapshot snapshot;
    for (const auto& p : record_files(records_dir())) {
        auto bytes = read_file(p);
        if (!bytes) return make_error(ErrorCode::corrupt_record_file, p.string() + " unreadable");
        auto record = record_from_xml(*bytes);
        if (!record)
            return make_error(ErrorCode::corrupt_record_file, p.filename().string() + ": " + record.error().describe());
        if (record->id != p.stem().string())
            return make_error(ErrorCode::corrupt_record_file, p.filename().string() + ": id does not match file name");
        merge_into(snapshot, project_record(*record, sha256_hex(*bytes)));
    }
    if (auto ok = index_->replace_all(snapshot); !ok) return std::move(ok).error();
    return index_->snapshot();
}

Result<IndexSnapshot> Store::rebuild_index() {
    if (options_.read_only) return make_error(ErrorCode::storage_failure, "store opened read-only");
    std::lock_guard lock(writer_);
    return rebuild_locked();
}

Result<IndexSnapshot> Store::index_snapshot() const { return index_->snapshot(); }

std::optional<fs::path> Store::resolve_asset(const ContentRef& content) const {
    const std::string& href = content.href;
    if (href.empty() || href.find("://") != std::string::npos) return std::nullopt;
    fs::path rel(href);
    if (rel.is_absolute()) return std::nullopt;
    rel = rel.lexically_normal();
    if (rel.empty() || *rel.begin() == "..") return std::nullopt;
    fs::path full = dir_ / rel;
    std::error_code ec;
    if (!fs::is_regular_file(full, ec)) return std::nullopt;
    return full;
}

std::vector<Violation> Store::check_record(const DocumentRecord& record, const StoreState& st) const {
    auto violations = validate_record(record, st.schema, st.reference);
    if (auto asset = resolve_asset(record.content)) {
        auto digest = sha256_file(*asset);
        std::error_code ec;
        auto size = fs::file_size(*asset, ec);
        if (!digest || *digest != record.content.checksum)
            violations.push_back({"content.checksum", "asset-mismatch", "checksum differs from the stored asset"});
        if (ec || static_cast<std::int64_t>(size) != record.content.byteSize)
            violations.push_back({"content.size", "asset-mismatch", "size differs from the stored asset"});
    }
    return violations;
}

std::string Store::assign_id(const DocumentRecord& record) const {
    std::string base = slugify(record.title);
    if (base.empty()) base = std::string(slugify(to_string(record.kind.tag)));
    std::string id = base;
    std::error_code ec;
    for (int n = 2; fs::exists(record_path(id), ec); ++n) id = base + "-" + std::to_string(n);
    return id;
}

Result<DocumentRecord> Store::commit(DocumentRecord record) {
    const std::string bytes = record_to_xml(record);
    const std::string digest = sha256_hex(bytes);
    const fs::path target = record_path(record.id);
    const fs::path tmp = records_dir() / ("." + record.id + ".xml.tmp");

    fault(CommitStep::write_temp);
    {
        FileDescriptor fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644));
        if (fd.get() < 0) return io_error("create " + tmp.string());
        std::string_view all{bytes};
        auto half = all.size() / 2;
        if (!write_all(fd.get(), all.substr(0, half))) return io_error("write " + tmp.string());
        fault(CommitStep::partial_temp);
        if (!write_all(fd.get(), all.substr(half))) return io_error("write " + tmp.string());
        fault(CommitStep::sync_temp);
        if (options_.durable && ::fsync(fd.get()) != 0) return io_error("fsync " + tmp.string());
    }
    fault(CommitStep::rename);
    if (::rename(tmp.c_str(), target.c_str()) != 0) return io_error("rename " + tmp.string());
    if (options_.durable) {
        if (auto ok = sync_dir(records_dir()); !ok) return std::move(ok).error();
    }

    fault(CommitStep::index_rows);
    auto indexed = index_->upsert(project_record(record, digest), [this] { fault(CommitStep::index_commit); });
    if (!indexed) {
        // the file is committed; bring the index back in line with it
        auto rebuilt = rebuild_locked();
        if (!rebuilt) return std::move(rebuilt).error();
    }
    return record;
}

Result<DocumentRecord> Store::ingest(const RecordDraft& draft, Role actor) {
    if (actor != Role::expert) return permission("ingest");
    if (options_.read_only) return make_error(ErrorCode::storage_failure, "store opened read-only");
    std::lock_guard lock(writer_);
    auto st = state();
    DocumentRecord record;
    record.kind = draft.kind;
    record.title = draft.title;
    record.author = draft.author;
    record.provenance = draft.provenance;
    record.subjectKeywords = draft.subjectKeywords;
    record.captureDate = draft.captureDate;
    record.placeRefs = draft.placeRefs;
    record.periodRefs = draft.periodRefs;
    record.coordinates = draft.coordinates;
    record.content = draft.content;
    record.attributes = draft.attributes;
    record.schemaVersion = st->schema.version;
    record.createdAt = record.updatedAt = now();

    auto violations = check_record(record, *st);
    if (!violations.empty()) {
        Error err = make_error(ErrorCode::validation_failed, "draft has " + std::to_string(violations.size()) + " violation(s)");
        err.violations = std::move(violations);
        return err;
    }
    record.id = assign_id(record);
    return commit(std::move(record));
}

Result<DocumentRecord> Store::read(std::string_view id) const {
    if (!is_slug(id)) return make_error(ErrorCode::not_found, "no record '" + std::string(id) + "'");
    fs::path p = record_path(id);
    std::error_code ec;
    if (!fs::exists(p, ec)) return make_error(ErrorCode::not_found, "no record '" + std::string(id) + "'");
    auto bytes = read_file(p);
    if (!bytes) return make_error(ErrorCode::not_found, "no record '" + std::string(id) + "'");
    auto record = record_from_xml(*bytes);
    if (!record) {
        Error err = std::move(record).error();
        err.code = ErrorCode::corrupt_record_file;
        err.message = p.filename().string() + ": " + err.message;
        return err;
    }
    return record;
}

Result<DocumentRecord> Store::update(std::string_view id, const RecordPatch& patch, Role actor) {
    if (actor != Role::expert) return permission("update");
    if (options_.read_only) return make_error(ErrorCode::storage_failure, "store opened read-only");
    std::lock_guard lock(writer_);
    auto current = read(id);
    if (!current) return current;
    auto st = state();
    DocumentRecord record = *current;
    apply_patch(record, patch);
    record.updatedAt = std::max(now(), current->updatedAt);
    auto violations = check_record(record, *st);
    if (!violations.empty()) {
        Error err = make_error(ErrorCode::validation_failed, "patch leaves " + std::to_string(violations.size()) + " violation(s)");
        err.violations = std::move(violations);
        return err;
    }
    return commit(std::move(record));
}

Result<DocumentRecord> Store::archive(std::string_view id, Role actor) {
    if (actor != Role::expert) return permission("archive");
    if (options_.read_only) return make_error(ErrorCode::storage_failure, "store opened read-only");
    std::lock_guard lock(writer_);
    auto current = read(id);
    if (!current || current->archived()) return current;
    DocumentRecord record = *current;
    record.archivedAt = record.updatedAt = std::max(now(), current->updatedAt);
    return commit(std::move(record));
}

Result<std::string> Store::export_xml(std::string_view id) const {
    auto record = read(id);
    if (!record) return std::move(record).error();
    return record_to_xml(*record);
}

Result<DocumentRecord> Store::import_xml(std::string_view bytes) const {
    auto record = record_from_xml(bytes);
    if (!record) return record;
    if (!state()->schemaVersions.contains(record->schemaVersion))
        return make_error(ErrorCode::schema_version_unknown,
                          "record declares schema version " + std::to_string(record->schemaVersion));
    return record;
}

Result<std::string> Store::render_html_view(std::string_view id, const HtmlViewOptions& options) const {
    auto record = read(id);
    if (!record) return std::move(record).error();
    return render_record_html(*record, state()->reference, options);
}

Result<std::vector<RecordProblem>> Store::validate_all() const {
    auto st = state();
    std::map<int, MetadataSchema> schemas;
    std::vector<RecordProblem> problems;
    for (const auto& p : record_files(records_dir())) {
        auto bytes = read_file(p);
        auto record = bytes ? record_from_xml(*bytes) : Result<DocumentRecord>(std::move(bytes).error());
        if (!record) {
            problems.push_back({p.stem().string(), {{"file", "parse", record.error().describe()}}});
            continue;
        }
        auto it = schemas.find(record->schemaVersion);
        if (it == schemas.end()) {
            auto schema = schema_version(record->schemaVersion);
            if (!schema) {
                problems.push_back({record->id, {{"schemaVersion", "schema-version-unknown", schema.error().message}}});
                continue;
            }
            it = schemas.emplace(record->schemaVersion, std::move(*schema)).first;
        }
        StoreState at_version{it->second, st->reference, st->schemaVersions};
        auto violations = check_record(*record, at_version);
        if (record->id != p.stem().string())
            violations.push_back({"id", "file-name", "id does not match file name"});
        if (!violations.empty()) problems.push_back({record->id, std::move(violations)});
    }
    return problems;
}

Result<ContentRef> Store::store_asset(const fs::path& source, std::string mediaFormat, bool* created) {
    if (created) *created = false;
    if (options_.read_only) return make_error(ErrorCode::storage_failure, "store opened read-only");
    auto bytes = read_file(source);
    if (!bytes) return make_error(ErrorCode::not_found, "asset " + source.string() + " not readable");
    std::string digest = sha256_hex(*bytes);
    std::string ext = source.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!std::all_of(ext.begin(), ext.end(), [](char c) { return c == '.' || std::isalnum(static_cast<unsigned char>(c)); }))
        ext.clear();
    std::string name = digest + ext;
    fs::path target = media_dir() / name;
    std::error_code ec;
    if (!fs::exists(target, ec)) {
        if (auto ok = atomic_write_file(target, *bytes, options_.durable); !ok) return std::move(ok).error();
        if (created) *created = true;
    }
    return ContentRef{"media/" + name, std::move(mediaFormat), digest, static_cast<std::int64_t>(bytes->size())};
}

Result<void> Store::write_reference(const ReferenceData& reference) {
    return atomic_write_file(dir_ / "reference.xml", reference_to_xml(reference), options_.durable);
}

Result<void> Store::merge_reference(const ReferenceData& additions, Role actor) {
    if (actor != Role::expert) return permission("editing reference data");
    if (options_.read_only) return make_error(ErrorCode::storage_failure, "store opened read-only");
    std::lock_guard lock(writer_);
    auto st = state();
    ReferenceData next = st->reference;
    for (const auto& p : additions.periods) upsert_by(next.periods, p, [](const Period& x) { return x.id; });
    for (const auto& p : additions.places) upsert_by(next.places, p, [](const Place& x) { return x.id; });
    for (const auto& v : additions.vocabularies) {
        auto it = std::find_if(next.vocabularies.begin(), next.vocabularies.end(),
                               [&](const Vocabulary& x) { return x.facetName == v.facetName; });
        if (it == next.vocabularies.end()) {
            next.vocabularies.push_back(v);
            continue;
        }
        for (const auto& term : v.terms)
            if (std::find(it->terms.begin(), it->terms.end(), term) == it->terms.end()) it->terms.push_back(term);
    }
    auto violations = validate_reference(next);
    if (!violations.empty()) {
        Error err = make_error(ErrorCode::validation_failed, "reference data invalid");
        err.violations = std::move(violations);
        return err;
    }
    if (auto ok = write_reference(next); !ok) return ok;
    auto updated = std::make_shared<StoreState>(*st);
    updated->reference = std::move(next);
    publish(std::move(updated));
    return {};
}

Result<void> Store::put_period(const Period& period, Role actor) {
    ReferenceData r;
    r.periods.push_back(period);
    return merge_reference(r, actor);
}

Result<void> Store::put_place(const Place& place, Role actor) {
    ReferenceData r;
    r.places.push_back(place);
    return merge_reference(r, actor);
}

Result<void> Store::add_vocabulary_term(const std::string& facet, const std::string& term, Role actor) {
    ReferenceData r;
    r.vocabularies.push_back(Vocabulary{facet, {term}});
    return merge_reference(r, actor);
}

Result<MigrationPlan> Store::propose_schema(const SchemaDelta& delta) const {
    auto st = state();
    return sia::propose_schema(st->schema, delta, st->reference.vocabularies);
}

Result<MetadataSchema> Store::apply_migration(const MigrationPlan& plan, Role actor) {
    if (actor != Role::expert) return permission("schema migration");
    if (options_.read_only) return make_error(ErrorCode::storage_failure, "store opened read-only");
    std::lock_guard lock(writer_);
    auto st = state();
    if (plan.fromVersion != st->schema.version || plan.toVersion != plan.fromVersion + 1)
        return make_error(ErrorCode::stale_plan, "plan migrates v" + std::to_string(plan.fromVersion) +
                                                     " but the active schema is v" +
                                                     std::to_string(st->schema.version));
    // re-derive from the delta rather than trusting a client supplied target
    auto fresh = sia::propose_schema(st->schema, plan.delta, st->reference.vocabularies);
    if (!fresh) return std::move(fresh).error();
    const MetadataSchema& target = fresh->target;

    auto records = all_records();
    if (!records) return std::move(records).error();
    StoreState next_state{target, st->reference, st->schemaVersions};
    next_state.schemaVersions.insert(target.version);

    std::vector<DocumentRecord> migrated;
    migrated.reserve(records->size());
    std::vector<Violation> problems;
    for (const auto& r : *records) {
        auto m = migrate_record(r, *fresh, st->schema, st->reference.vocabularies);
        if (!m) return std::move(m).error();
        for (auto v : check_record(*m, next_state)) {
            v.path = r.id + ":" + v.path;
            problems.push_back(std::move(v));
        }
        migrated.push_back(std::move(*m));
    }
    if (!problems.empty()) {
        Error err = make_error(ErrorCode::validation_failed, "migrated records would not validate");
        err.violations = std::move(problems);
        return err;
    }

    fs::path staging = dir_ / kStagingDir;
    std::error_code ec;
    fs::remove_all(staging, ec);
    fs::create_directories(staging / "records", ec);
    fs::create_directories(staging / "schema", ec);
    if (ec) return make_error(ErrorCode::storage_failure, "cannot create " + staging.string());
    const bool durable = options_.durable;
    if (auto ok = atomic_write_file(staging / "schema" / ("v" + std::to_string(target.version) + ".xml"),
                                    schema_to_xml(target), durable);
        !ok)
        return std::move(ok).error();
    for (const auto& r : migrated) {
        if (auto ok = atomic_write_file(staging / "records" / (r.id + ".xml"), record_to_xml(r), durable); !ok)
            return std::move(ok).error();
    }
    // the marker is the commit point: recovery rolls forward once it exists
    if (auto ok = atomic_write_file(staging / kCommitMarker, std::to_string(target.version) + "\n", durable); !ok)
        return std::move(ok).error();
    if (durable) {
        if (auto ok = sync_dir(staging); !ok) return std::move(ok).error();
    }
    if (auto ok = finish_migration(); !ok) return std::move(ok).error();
    auto rebuilt = rebuild_locked();
    if (!rebuilt) return std::move(rebuilt).error();
    publish(std::make_shared<StoreState>(std::move(next_state)));
    return target;
}

}  // namespace sia
