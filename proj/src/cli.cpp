#include "sia/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sia/auth.hpp"
#include "sia/checksum.hpp"
#include "sia/json_codec.hpp"
#include "sia/plan.hpp"
#include "sia/query.hpp"
#include "sia/record_xml.hpp"
#include "sia/scene.hpp"
#include "sia/service.hpp"
#include "sia/store.hpp"

namespace sia::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;
namespace codec = sia::json;

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::storage_failure:
        case ErrorCode::corrupt_record_file:
        case ErrorCode::schema_version_unknown:
        case ErrorCode::conflict: return kExitStorage;
        default: return kExitFailed;
    }
}

namespace {

struct Options {
    std::string dataDir;
    std::string format = "text";

    // search
    std::vector<std::string> kinds, places, keywords;
    std::optional<int> periodFrom, periodTo;
    std::string author;
    bool archived = false;
    std::size_t offset = 0;
    std::size_t limit = kDefaultPageLimit;

    // compose
    std::vector<std::string> periods;
    std::string base;
    std::vector<std::string> overlays;

    std::string manifest, id, out, delta;
    bool apply = false;

    // serve
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string accounts, ui;
};

class Runner {
public:
    Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

    bool json() const { return o_.format == "json"; }

    int fail(const Error& e) {
        if (json()) {
            err_ << codec::to_json(e).dump() << '\n';
        } else {
            err_ << "error: " << e.describe() << '\n';
            for (const auto& v : e.violations) err_ << "  " << v.path << ": " << v.message << " [" << v.rule << "]\n";
        }
        return exit_code(e.code);
    }

    int usage(const std::string& message) {
        err_ << "error: " << message << '\n';
        return kExitUsage;
    }

    std::optional<std::unique_ptr<Store>> open(bool writer, int& code) {
        if (o_.dataDir.empty()) {
            code = usage("--data-dir is required (or set SIA_DATA_DIR)");
            return std::nullopt;
        }
        StoreOptions options;
        options.read_only = !writer;
        auto store = Store::open(o_.dataDir, options);
        if (!store) {
            code = fail(store.error());
            return std::nullopt;
        }
        return std::move(*store);
    }

    int write_output(const std::string& bytes) {
        if (o_.out.empty()) {
            out_ << bytes;
            return kExitOk;
        }
        if (auto ok = atomic_write_file(o_.out, bytes, true); !ok) return fail(ok.error());
        return kExitOk;
    }

    void report_warnings(const std::vector<CompositionWarning>& warnings) {
        for (const auto& w : warnings) {
            if (json()) err_ << codec::to_json(w).dump() << '\n';
            else err_ << "warning: no match for place " << w.placeId << " in period " << w.periodId << '\n';
        }
    }

    int init() {
        if (o_.dataDir.empty()) return usage("--data-dir is required (or set SIA_DATA_DIR)");
        if (auto ok = Store::init(o_.dataDir); !ok) return fail(ok.error());
        if (json()) out_ << Json{{"initialized", o_.dataDir}}.dump() << '\n';
        else out_ << "initialized " << o_.dataDir << '\n';
        return kExitOk;
    }

    int ingest();
    int validate();
    int reindex();
    int search();
    int compose_model();
    int compose_plan();
    int compose_montage();
    int export_record();
    int migrate();
    int serve();
    int hash_password();

private:
    const Options& o_;
    std::ostream& out_;
    std::ostream& err_;
};

int Runner::ingest() {
    int code = 0;
    auto bytes = read_file(o_.manifest);
    if (!bytes) return fail(bytes.error());
    auto manifest = manifest_from_xml(*bytes);
    if (!manifest) return fail(manifest.error());
    auto opened = open(true, code);
    if (!opened) return code;
    Store& store = **opened;

    const ReferenceData& ref = manifest->reference;
    if (!ref.periods.empty() || !ref.places.empty() || !ref.vocabularies.empty())
        if (auto ok = store.merge_reference(ref, Role::expert); !ok) return fail(ok.error());

    const fs::path base = fs::path(o_.manifest).parent_path();
    Json report{{"ingested", Json::array()}, {"failed", Json::array()}};
    std::size_t failures = 0;
    for (const auto& entry : manifest->entries) {
        RecordDraft draft = entry.draft;
        auto failed = [&](const Error& e) {
            ++failures;
            Json f = codec::to_json(e);
            f["line"] = entry.line;
            report["failed"].push_back(f);
            if (!json()) {
                err_ << "entry at line " << entry.line << ": " << e.message << '\n';
                for (const auto& v : e.violations) err_ << "  " << v.path << ": " << v.message << " [" << v.rule << "]\n";
            }
        };

        fs::path source = base / draft.content.href;
        std::error_code ec;
        if (!fs::is_regular_file(source, ec)) {
            Error e = make_error(ErrorCode::validation_failed, "asset " + source.string() + " not found");
            e.violations.push_back({"content.href", "missing-asset", "no file at " + source.string()});
            failed(e);
            continue;
        }
        if (!draft.content.checksum.empty()) {
            auto digest = sha256_file(source);
            if (!digest || *digest != draft.content.checksum) {
                Error e = make_error(ErrorCode::validation_failed, "asset checksum mismatch");
                e.violations.push_back({"content.checksum", "asset-mismatch", "declared checksum differs from " + source.string()});
                failed(e);
                continue;
            }
        }
        bool created = false;
        auto content = store.store_asset(source, draft.content.mediaFormat, &created);
        if (!content) {
            failed(content.error());
            continue;
        }
        draft.content = *content;
        auto record = store.ingest(draft, Role::expert);
        if (!record) {
            // a fresh asset nobody references must not outlive its failed entry
            if (created) {
                if (auto path = store.resolve_asset(*content)) fs::remove(*path, ec);
            }
            failed(record.error());
            continue;
        }
        report["ingested"].push_back({{"line", entry.line}, {"id", record->id}});
        if (!json()) out_ << "ingested " << record->id << '\n';
    }
    if (json()) out_ << report.dump() << '\n';
    else out_ << report["ingested"].size() << " ingested, " << failures << " failed\n";
    return failures == 0 ? kExitOk : kExitFailed;
}

int Runner::validate() {
    int code = 0;
    auto opened = open(false, code);
    if (!opened) return code;
    Store& store = **opened;
    auto problems = store.validate_all();
    if (!problems) return fail(problems.error());
    const auto count = store.record_ids().size();
    if (json()) {
        Json list = Json::array();
        for (const auto& p : *problems) {
            Json vs = Json::array();
            for (const auto& v : p.violations) vs.push_back(codec::to_json(v));
            list.push_back({{"id", p.id}, {"violations", vs}});
        }
        out_ << Json{{"records", count}, {"invalid", list}}.dump() << '\n';
    } else {
        for (const auto& p : *problems)
            for (const auto& v : p.violations) out_ << p.id << ": " << v.path << ": " << v.message << " [" << v.rule << "]\n";
        out_ << count << " records, " << problems->size() << " with violations\n";
    }
    return problems->empty() ? kExitOk : kExitFailed;
}

int Runner::reindex() {
    int code = 0;
    auto opened = open(true, code);
    if (!opened) return code;
    auto snapshot = (*opened)->rebuild_index();
    if (!snapshot) return fail(snapshot.error());
    if (json()) out_ << Json{{"indexed", snapshot->size()}}.dump() << '\n';
    else out_ << snapshot->size() << " records indexed\n";
    return kExitOk;
}

int Runner::search() {
    std::multimap<std::string, std::string> params;
    for (const auto& k : o_.kinds) params.emplace("kind", k);
    for (const auto& p : o_.places) params.emplace("place", p);
    for (const auto& k : o_.keywords) params.emplace("keyword", k);
    if (o_.periodFrom) params.emplace("from", std::to_string(*o_.periodFrom));
    if (o_.periodTo) params.emplace("to", std::to_string(*o_.periodTo));
    if (!o_.author.empty()) params.emplace("author", o_.author);
    if (o_.archived) params.emplace("archived", "1");
    auto spec = codec::spec_from_params(params);
    if (!spec) return fail(spec.error());

    int code = 0;
    auto opened = open(false, code);
    if (!opened) return code;
    QueryEngine engine(**opened);
    auto page = engine.search(*spec, o_.offset, o_.limit);
    if (!page) return fail(page.error());
    if (json()) {
        out_ << codec::to_json(*page).dump() << '\n';
    } else {
        for (const auto& item : page->items) out_ << item.id << '\t' << to_string(item.kind) << '\t' << item.title << '\n';
        out_ << page->items.size() << " of " << page->total << " records\n";
    }
    return kExitOk;
}

int Runner::compose_model() {
    int code = 0;
    auto opened = open(false, code);
    if (!opened) return code;
    CompositionRequest req{{o_.places.begin(), o_.places.end()}, {o_.periods.begin(), o_.periods.end()}, std::nullopt};
    auto scene = sia::compose_model(**opened, req);
    if (!scene) return fail(scene.error());
    report_warnings(scene->warnings);
    return write_output(serialize_x3d(*scene));
}

int Runner::compose_plan() {
    int code = 0;
    auto opened = open(false, code);
    if (!opened) return code;
    CompositionRequest req{{o_.places.begin(), o_.places.end()}, {o_.periods.begin(), o_.periods.end()}, std::nullopt};
    auto doc = sia::compose_plan(**opened, req);
    if (!doc) return fail(doc.error());
    auto svg = serialize_svg(*doc);
    if (!svg) return fail(svg.error());
    report_warnings(doc->warnings);
    return write_output(*svg);
}

int Runner::compose_montage() {
    std::vector<Overlay> overlays;
    for (const auto& spec : o_.overlays) {
        auto colon = spec.rfind(':');
        if (colon == std::string::npos) return usage("overlay '" + spec + "' must be RECORD:OPACITY");
        auto opacity = parse_double(spec.substr(colon + 1));
        if (!opacity) return usage("overlay '" + spec + "' has no numeric opacity");
        overlays.push_back({spec.substr(0, colon), *opacity});
    }
    int code = 0;
    auto opened = open(false, code);
    if (!opened) return code;
    auto doc = compose_photomontage(**opened, o_.base, overlays);
    if (!doc) return fail(doc.error());
    auto svg = serialize_svg(*doc);
    if (!svg) return fail(svg.error());
    return write_output(*svg);
}

int Runner::export_record() {
    int code = 0;
    auto opened = open(false, code);
    if (!opened) return code;
    auto bytes = (*opened)->export_xml(o_.id);
    if (!bytes) return fail(bytes.error());
    return write_output(*bytes);
}

int Runner::migrate() {
    auto bytes = read_file(o_.delta);
    if (!bytes) return fail(bytes.error());
    auto delta = delta_from_xml(*bytes);
    if (!delta) return fail(delta.error());
    int code = 0;
    auto opened = open(o_.apply, code);
    if (!opened) return code;
    Store& store = **opened;
    auto plan = store.propose_schema(*delta);
    if (!plan) return fail(plan.error());
    if (!o_.apply) {
        if (json()) {
            out_ << codec::to_json(*plan).dump() << '\n';
        } else {
            out_ << "version " << plan->fromVersion << " -> " << plan->toVersion << '\n';
            for (std::size_t i = 0; i < plan->recordActions.size(); ++i)
                out_ << "  change " << i + 1 << ": " << to_string(plan->recordActions[i]) << '\n';
        }
        return kExitOk;
    }
    auto schema = store.apply_migration(*plan, Role::expert);
    if (!schema) return fail(schema.error());
    if (json()) out_ << Json{{"version", schema->version}, {"records", store.record_ids().size()}}.dump() << '\n';
    else out_ << "schema now at version " << schema->version << '\n';
    return kExitOk;
}

int Runner::serve() {
    ServiceConfig config;
    config.host = o_.host;
    config.port = o_.port;
    if (!o_.accounts.empty()) {
        auto accounts = load_accounts(o_.accounts);
        if (!accounts) return fail(accounts.error());
        config.accounts = std::move(*accounts);
    }
    if (!o_.ui.empty()) config.uiDir = o_.ui;

    // Block the stop signals before any thread starts so only sigwait sees them.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    int code = 0;
    auto opened = open(true, code);
    if (!opened) return code;
    Service service(**opened, config);
    auto port = service.start();
    if (!port) return fail(port.error());
    err_ << "listening on " << config.host << ":" << *port << std::endl;
    int received = 0;
    sigwait(&stop_signals, &received);
    service.stop();
    return kExitOk;
}

int Runner::hash_password() {
    std::string password;
    std::getline(std::cin, password);
    if (password.empty()) return usage("read an empty password from standard input");
    auto hash = sia::hash_password(password);
    if (!hash) return fail(hash.error());
    out_ << *hash << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Site documentation store: records, queries and compositions"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    app.add_option("--data-dir", o.dataDir, "Store directory")->envname("SIA_DATA_DIR");
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));

    auto* init = app.add_subcommand("init", "Create an empty store");
    auto* ingest = app.add_subcommand("ingest", "Ingest the entries of a manifest");
    ingest->add_option("--manifest", o.manifest, "Manifest file")->required()->check(CLI::ExistingFile);
    auto* validate = app.add_subcommand("validate", "Re-validate every record file");
    auto* reindex = app.add_subcommand("reindex", "Rebuild the index from the record files");

    auto* search = app.add_subcommand("search", "Faceted search");
    search->add_option("--kind", o.kinds, "Document kind")->delimiter(',');
    search->add_option("--place", o.places, "Place id (includes sub-places)")->delimiter(',');
    search->add_option("--period-from", o.periodFrom, "Epoch start year");
    search->add_option("--period-to", o.periodTo, "Epoch end year");
    search->add_option("--keyword", o.keywords, "Subject keyword")->delimiter(',');
    search->add_option("--author", o.author, "Author");
    search->add_flag("--archived", o.archived, "Include archived records");
    search->add_option("--offset", o.offset, "First result");
    search->add_option("--limit", o.limit, "Page size (at most 500)");

    auto* model = app.add_subcommand("compose-model", "Compose a 3D scene (X3D)");
    auto* plan = app.add_subcommand("compose-plan", "Compose a synthesis plan (SVG)");
    for (auto* cmd : {model, plan}) {
        cmd->add_option("--places", o.places, "Place ids")->required()->delimiter(',');
        cmd->add_option("--periods", o.periods, "Period ids")->required()->delimiter(',');
        cmd->add_option("--out", o.out, "Output file (default: standard output)");
    }
    auto* montage = app.add_subcommand("compose-montage", "Compose a photo-montage (SVG)");
    montage->add_option("--base", o.base, "Base image record")->required();
    montage->add_option("--overlay", o.overlays, "RECORD:OPACITY, bottom to top");
    montage->add_option("--out", o.out, "Output file (default: standard output)");

    auto* exp = app.add_subcommand("export", "Write a record's XML document");
    exp->add_option("--id", o.id, "Record id")->required();
    exp->add_option("--out", o.out, "Output file (default: standard output)");

    auto* migrate = app.add_subcommand("migrate", "Propose or apply a schema delta");
    migrate->add_option("--delta", o.delta, "Delta XML file")->required()->check(CLI::ExistingFile);
    migrate->add_flag("--apply", o.apply, "Apply instead of only describing the plan");

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--host", o.host, "Listen address");
    serve->add_option("--port", o.port, "Listen port");
    serve->add_option("--accounts", o.accounts, "Account file (JSON)")->check(CLI::ExistingFile);
    serve->add_option("--ui", o.ui, "Directory of the web UI bundle")->check(CLI::ExistingDirectory);

    auto* hash = app.add_subcommand("hash-password", "Hash a password read from standard input");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    Runner r(o, out, err);
    if (init->parsed()) return r.init();
    if (ingest->parsed()) return r.ingest();
    if (validate->parsed()) return r.validate();
    if (reindex->parsed()) return r.reindex();
    if (search->parsed()) return r.search();
    if (model->parsed()) return r.compose_model();
    if (plan->parsed()) return r.compose_plan();
    if (montage->parsed()) return r.compose_montage();
    if (exp->parsed()) return r.export_record();
    if (migrate->parsed()) return r.migrate();
    if (serve->parsed()) return r.serve();
    if (hash->parsed()) return r.hash_password();
    return kExitUsage;
}

}  // namespace sia::cli
