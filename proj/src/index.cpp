#include "sia/index.hpp"

#include <sqlite3.h>

#include <algorithm>

namespace sia {

namespace {

constexpr const char* kSchemaSql = R"sql(
CREATE TABLE IF NOT EXISTS records (
  id TEXT PRIMARY KEY,
  kind TEXT NOT NULL,
  title TEXT NOT NULL,
  author TEXT NOT NULL,
  capture_date TEXT,
  schema_version INTEGER NOT NULL,
  archived INTEGER NOT NULL,
  thumbnail TEXT,
  file_digest TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS record_place (
  record_id TEXT NOT NULL, place_id TEXT NOT NULL, PRIMARY KEY (record_id, place_id));
CREATE TABLE IF NOT EXISTS record_period (
  record_id TEXT NOT NULL, period_id TEXT NOT NULL, PRIMARY KEY (record_id, period_id));
CREATE TABLE IF NOT EXISTS record_keyword (
  record_id TEXT NOT NULL, keyword TEXT NOT NULL, PRIMARY KEY (record_id, keyword));
CREATE INDEX IF NOT EXISTS record_place_target ON record_place (place_id);
CREATE INDEX IF NOT EXISTS record_period_target ON record_period (period_id);
CREATE INDEX IF NOT EXISTS record_keyword_target ON record_keyword (keyword);
)sql";

constexpr const char* kOrder = " ORDER BY r.kind, r.capture_date IS NULL, r.capture_date, r.id";

Error db_error(sqlite3* db, std::string_view what) {
    return make_error(ErrorCode::storage_failure,
                      std::string(what) + ": " + (db ? sqlite3_errmsg(db) : "no connection"));
}

class Statement {
public:
    Statement(sqlite3* db, const std::string& sql) {
        rc_ = sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr);
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    bool ok() const { return rc_ == SQLITE_OK; }

    void bind(int index, const std::string& value) {
        sqlite3_bind_text(stmt_, index, value.c_str(), static_cast<int>(value.size()), SQLITE_TRANSIENT);
    }
    void bind(int index, const std::optional<std::string>& value) {
        if (value)
            bind(index, *value);
        else
            sqlite3_bind_null(stmt_, index);
    }
    void bind(int index, std::int64_t value) { sqlite3_bind_int64(stmt_, index, value); }

    void reset() {
        sqlite3_reset(stmt_);
        sqlite3_clear_bindings(stmt_);
    }

    /// SQLITE_ROW, SQLITE_DONE or an error code.
    int step() { return sqlite3_step(stmt_); }

    std::string text(int col) const {
        const auto* p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char*>(p),
                               static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
                 : std::string{};
    }
    std::optional<std::string> optional_text(int col) const {
        if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
        return text(col);
    }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

private:
    sqlite3_stmt* stmt_ = nullptr;
    int rc_ = SQLITE_ERROR;
};

Result<void> exec(sqlite3* db, const char* sql) {
    char* msg = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &msg) != SQLITE_OK) {
        std::string text = msg ? msg : "unknown";
        sqlite3_free(msg);
        return make_error(ErrorCode::storage_failure, std::string("index: ") + text);
    }
    return {};
}

Result<sqlite3*> open_connection(const std::filesystem::path& file, bool read_only) {
    sqlite3* db = nullptr;
    int flags = (read_only ? SQLITE_OPEN_READONLY : SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE) |
                SQLITE_OPEN_NOMUTEX;
    if (sqlite3_open_v2(file.c_str(), &db, flags, nullptr) != SQLITE_OK) {
        Error err = db_error(db, "cannot open index " + file.string());
        sqlite3_close_v2(db);
        return err;
    }
    sqlite3_busy_timeout(db, 10000);
    return db;
}

Result<void> insert_rows(sqlite3* db, const IndexSnapshot& s) {
    Statement ins(db,
                  "INSERT INTO records (id, kind, title, author, capture_date, schema_version, archived,"
                  " thumbnail, file_digest) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)");
    if (!ins.ok()) return db_error(db, "prepare insert");
    for (const auto& r : s.rows) {
        ins.reset();
        ins.bind(1, r.id);
        ins.bind(2, r.kind);
        ins.bind(3, r.title);
        ins.bind(4, r.author);
        ins.bind(5, r.captureDate);
        ins.bind(6, std::int64_t{r.schemaVersion});
        ins.bind(7, std::int64_t{r.archived ? 1 : 0});
        ins.bind(8, r.thumbnail);
        ins.bind(9, r.fileDigest);
        if (ins.step() != SQLITE_DONE) return db_error(db, "insert record row");
    }
    auto links = [&](const char* sql, const std::vector<LinkRow>& rows) -> Result<void> {
        Statement link(db, sql);
        if (!link.ok()) return db_error(db, "prepare link insert");
        for (const auto& [rid, target] : rows) {
            link.reset();
            link.bind(1, rid);
            link.bind(2, target);
            if (link.step() != SQLITE_DONE) return db_error(db, "insert link row");
        }
        return {};
    };
    if (auto ok = links("INSERT INTO record_place VALUES (?1, ?2)", s.recordPlaces); !ok) return ok;
    if (auto ok = links("INSERT INTO record_period VALUES (?1, ?2)", s.recordPeriods); !ok) return ok;
    return links("INSERT INTO record_keyword VALUES (?1, ?2)", s.recordKeywords);
}

Result<void> delete_record(sqlite3* db, const std::string& id) {
    for (const char* sql : {"DELETE FROM records WHERE id = ?1", "DELETE FROM record_place WHERE record_id = ?1",
                            "DELETE FROM record_period WHERE record_id = ?1",
                            "DELETE FROM record_keyword WHERE record_id = ?1"}) {
        Statement st(db, sql);
        st.bind(1, id);
        if (st.step() != SQLITE_DONE) return db_error(db, "delete rows");
    }
    return {};
}

/// Rolls back on scope exit unless committed. A simulated crash (exception)
/// skips the commit and leaves nothing behind.
class Transaction {
public:
    explicit Transaction(sqlite3* db) : db_(db) {}
    ~Transaction() {
        if (active_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    }
    Result<void> begin(const char* sql = "BEGIN IMMEDIATE") {
        auto ok = exec(db_, sql);
        active_ = ok.has_value();
        return ok;
    }
    Result<void> commit() {
        auto ok = exec(db_, "COMMIT");
        if (ok) active_ = false;
        return ok;
    }

private:
    sqlite3* db_;
    bool active_ = false;
};

std::string placeholders(std::size_t first, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ", ";
        out += "?" + std::to_string(first + i);
    }
    return out;
}

}  // namespace

IndexSnapshot project_record(const DocumentRecord& r, const std::string& fileDigest) {
    IndexSnapshot s;
    IndexRow row;
    row.id = r.id;
    row.kind = std::string(to_string(r.kind.tag));
    row.title = r.title;
    row.author = r.author;
    if (r.captureDate) row.captureDate = format_date(*r.captureDate);
    row.schemaVersion = r.schemaVersion;
    row.archived = r.archived();
    if (is_image_bearing(r.kind.tag)) row.thumbnail = r.content.href;
    row.fileDigest = fileDigest;
    s.rows.push_back(std::move(row));
    auto link = [&](std::vector<LinkRow>& out, const std::vector<std::string>& targets) {
        std::set<std::string> unique(targets.begin(), targets.end());
        for (const auto& t : unique) out.emplace_back(r.id, t);
    };
    link(s.recordPlaces, r.placeRefs);
    link(s.recordPeriods, r.periodRefs);
    link(s.recordKeywords, r.subjectKeywords);
    return s;
}

class RecordIndex::Lease {
public:
    Lease(const RecordIndex& owner, sqlite3* db) : owner_(owner), db_(db) {}
    ~Lease() {
        if (db_ == nullptr) return;
        std::lock_guard lock(owner_.pool_mutex_);
        owner_.readers_.push_back(db_);
    }
    Lease(Lease&& other) noexcept : owner_(other.owner_), db_(std::exchange(other.db_, nullptr)) {}
    Lease(const Lease&) = delete;
    sqlite3* get() const { return db_; }

private:
    const RecordIndex& owner_;
    sqlite3* db_;
};

RecordIndex::Lease RecordIndex::acquire_reader() const {
    {
        std::lock_guard lock(pool_mutex_);
        if (!readers_.empty()) {
            sqlite3* db = readers_.back();
            readers_.pop_back();
            return Lease(*this, db);
        }
    }
    auto db = open_connection(file_, true);
    return Lease(*this, db ? *db : nullptr);
}

Result<std::unique_ptr<RecordIndex>> RecordIndex::open(const std::filesystem::path& file, bool read_only) {
    std::unique_ptr<RecordIndex> index{new RecordIndex()};
    index->file_ = file;
    index->read_only_ = read_only;
    if (read_only) {
        if (!std::filesystem::exists(file))
            return make_error(ErrorCode::storage_failure, "index " + file.string() + " does not exist");
        auto probe = open_connection(file, true);
        if (!probe) return std::move(probe).error();
        index->readers_.push_back(*probe);
        return index;
    }
    auto db = open_connection(file, false);
    if (!db) return std::move(db).error();
    index->writer_ = *db;
    if (auto ok = exec(*db, "PRAGMA journal_mode=WAL; PRAGMA synchronous=NORMAL;"); !ok)
        return std::move(ok).error();
    if (auto ok = exec(*db, kSchemaSql); !ok) return std::move(ok).error();
    return index;
}

RecordIndex::~RecordIndex() {
    for (sqlite3* db : readers_) sqlite3_close_v2(db);
    if (writer_) sqlite3_close_v2(writer_);
}

Result<void> RecordIndex::upsert(const IndexSnapshot& rows, const std::function<void()>& before_commit) {
    if (read_only_ || writer_ == nullptr) return make_error(ErrorCode::storage_failure, "index opened read-only");
    Transaction tx(writer_);
    if (auto ok = tx.begin(); !ok) return ok;
    for (const auto& r : rows.rows)
        if (auto ok = delete_record(writer_, r.id); !ok) return ok;
    if (auto ok = insert_rows(writer_, rows); !ok) return ok;
    if (before_commit) before_commit();
    return tx.commit();
}

Result<void> RecordIndex::replace_all(const IndexSnapshot& snapshot) {
    if (read_only_ || writer_ == nullptr) return make_error(ErrorCode::storage_failure, "index opened read-only");
    Transaction tx(writer_);
    if (auto ok = tx.begin(); !ok) return ok;
    if (auto ok = exec(writer_, "DELETE FROM records; DELETE FROM record_place; DELETE FROM record_period;"
                                " DELETE FROM record_keyword;");
        !ok)
        return ok;
    if (auto ok = insert_rows(writer_, snapshot); !ok) return ok;
    return tx.commit();
}

Result<IndexSnapshot> RecordIndex::snapshot() const {
    auto lease = acquire_reader();
    sqlite3* db = lease.get();
    if (db == nullptr) return make_error(ErrorCode::storage_failure, "cannot open index reader");
    Transaction tx(db);
    // a read transaction pins one consistent view across the four tables
    if (auto ok = tx.begin("BEGIN"); !ok) return std::move(ok).error();
    IndexSnapshot s;
    {
        Statement st(db,
                     "SELECT id, kind, title, author, capture_date, schema_version, archived, thumbnail,"
                     " file_digest FROM records ORDER BY id");
        while (st.step() == SQLITE_ROW) {
            s.rows.push_back(IndexRow{st.text(0), st.text(1), st.text(2), st.text(3), st.optional_text(4),
                                      static_cast<int>(st.integer(5)), st.integer(6) != 0,
                                      st.optional_text(7), st.text(8)});
        }
    }
    auto links = [&](const char* sql, std::vector<LinkRow>& out) {
        Statement st(db, sql);
        while (st.step() == SQLITE_ROW) out.emplace_back(st.text(0), st.text(1));
    };
    links("SELECT record_id, place_id FROM record_place ORDER BY 1, 2", s.recordPlaces);
    links("SELECT record_id, period_id FROM record_period ORDER BY 1, 2", s.recordPeriods);
    links("SELECT record_id, keyword FROM record_keyword ORDER BY 1, 2", s.recordKeywords);
    (void)tx.commit();
    return s;
}

Result<std::map<std::string, std::string>> RecordIndex::digests() const {
    auto lease = acquire_reader();
    sqlite3* db = lease.get();
    if (db == nullptr) return make_error(ErrorCode::storage_failure, "cannot open index reader");
    std::map<std::string, std::string> out;
    Statement st(db, "SELECT id, file_digest FROM records");
    if (!st.ok()) return db_error(db, "read digests");
    while (st.step() == SQLITE_ROW) out.emplace(st.text(0), st.text(1));
    return out;
}

Result<RecordIndex::Page> RecordIndex::search(const IndexFilter& f, std::size_t offset,
                                              std::size_t limit) const {
    Page page;
    if ((f.placeIds && f.placeIds->empty()) || (f.periodIds && f.periodIds->empty())) return page;

    std::string where = " WHERE 1 = 1";
    std::vector<std::string> binds;
    auto in_clause = [&](const std::set<std::string>& values) {
        std::string sql = "(" + placeholders(binds.size() + 1, values.size()) + ")";
        binds.insert(binds.end(), values.begin(), values.end());
        return sql;
    };
    if (!f.includeArchived) where += " AND r.archived = 0";
    if (!f.kinds.empty()) where += " AND r.kind IN " + in_clause(f.kinds);
    if (f.placeIds)
        where += " AND EXISTS (SELECT 1 FROM record_place l WHERE l.record_id = r.id AND l.place_id IN " +
                 in_clause(*f.placeIds) + ")";
    if (f.periodIds)
        where += " AND EXISTS (SELECT 1 FROM record_period l WHERE l.record_id = r.id AND l.period_id IN " +
                 in_clause(*f.periodIds) + ")";
    if (!f.keywords.empty())
        where += " AND EXISTS (SELECT 1 FROM record_keyword l WHERE l.record_id = r.id AND l.keyword IN " +
                 in_clause(f.keywords) + ")";
    if (f.author) {
        binds.push_back(*f.author);
        where += " AND r.author = ?" + std::to_string(binds.size());
    }

    auto lease = acquire_reader();
    sqlite3* db = lease.get();
    if (db == nullptr) return make_error(ErrorCode::storage_failure, "cannot open index reader");
    Transaction tx(db);
    if (auto ok = tx.begin("BEGIN"); !ok) return std::move(ok).error();
    {
        Statement count(db, "SELECT COUNT(*) FROM records r" + where);
        if (!count.ok()) return db_error(db, "prepare count");
        for (std::size_t i = 0; i < binds.size(); ++i) count.bind(static_cast<int>(i + 1), binds[i]);
        if (count.step() != SQLITE_ROW) return db_error(db, "count");
        page.total = static_cast<std::size_t>(count.integer(0));
    }
    {
        std::string sql = "SELECT r.id, r.kind, r.title, r.thumbnail FROM records r" + where + kOrder +
                          " LIMIT ?" + std::to_string(binds.size() + 1) + " OFFSET ?" +
                          std::to_string(binds.size() + 2);
        Statement st(db, sql);
        if (!st.ok()) return db_error(db, "prepare search");
        for (std::size_t i = 0; i < binds.size(); ++i) st.bind(static_cast<int>(i + 1), binds[i]);
        st.bind(static_cast<int>(binds.size() + 1), static_cast<std::int64_t>(limit));
        st.bind(static_cast<int>(binds.size() + 2), static_cast<std::int64_t>(offset));
        int rc = 0;
        while ((rc = st.step()) == SQLITE_ROW)
            page.items.push_back(IndexHit{st.text(0), st.text(1), st.text(2), st.optional_text(3)});
        if (rc != SQLITE_DONE) return db_error(db, "search");
    }
    (void)tx.commit();
    return page;
}

Result<std::vector<ScoredHit>> RecordIndex::related(const std::string& id,
                                                    const RelatednessWeights& w) const {
    auto lease = acquire_reader();
    sqlite3* db = lease.get();
    if (db == nullptr) return make_error(ErrorCode::storage_failure, "cannot open index reader");
    const std::string sql = R"sql(
WITH shared (other, weight) AS (
  SELECT b.record_id, ?2 FROM record_place a JOIN record_place b ON a.place_id = b.place_id
    WHERE a.record_id = ?1 AND b.record_id <> ?1
  UNION ALL
  SELECT b.record_id, ?3 FROM record_period a JOIN record_period b ON a.period_id = b.period_id
    WHERE a.record_id = ?1 AND b.record_id <> ?1
  UNION ALL
  SELECT b.record_id, ?4 FROM record_keyword a JOIN record_keyword b ON a.keyword = b.keyword
    WHERE a.record_id = ?1 AND b.record_id <> ?1
)
SELECT r.id, r.kind, r.title, r.thumbnail, SUM(s.weight) AS score
FROM shared s JOIN records r ON r.id = s.other
WHERE r.archived = 0
GROUP BY r.id
HAVING score > 0
ORDER BY score DESC, r.kind, r.capture_date IS NULL, r.capture_date, r.id)sql";
    Statement st(db, sql);
    if (!st.ok()) return db_error(db, "prepare related");
    st.bind(1, id);
    st.bind(2, std::int64_t{w.place});
    st.bind(3, std::int64_t{w.period});
    st.bind(4, std::int64_t{w.keyword});
    std::vector<ScoredHit> out;
    int rc = 0;
    while ((rc = st.step()) == SQLITE_ROW) {
        out.push_back(ScoredHit{IndexHit{st.text(0), st.text(1), st.text(2), st.optional_text(3)},
                                static_cast<int>(st.integer(4))});
    }
    if (rc != SQLITE_DONE) return db_error(db, "related");
    return out;
}

Result<std::vector<std::string>> RecordIndex::distinct_column(const char* column) const {
    auto lease = acquire_reader();
    sqlite3* db = lease.get();
    if (db == nullptr) return make_error(ErrorCode::storage_failure, "cannot open index reader");
    const std::string name = column;
    Statement st(db, "SELECT DISTINCT " + name + " FROM records WHERE " + name + " <> '' ORDER BY " + name);
    if (!st.ok()) return db_error(db, "prepare distinct " + name);
    std::vector<std::string> out;
    int rc = 0;
    while ((rc = st.step()) == SQLITE_ROW) out.push_back(st.text(0));
    if (rc != SQLITE_DONE) return db_error(db, "distinct " + name);
    return out;
}

Result<std::vector<std::string>> RecordIndex::distinct_authors() const { return distinct_column("author"); }

Result<std::vector<std::string>> RecordIndex::distinct_kinds() const { return distinct_column("kind"); }

}  // namespace sia
