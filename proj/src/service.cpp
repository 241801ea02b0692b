#include "sia/service.hpp"

#include <charconv>
#include <thread>

#include "httplib.h"
#include "sia/json_codec.hpp"
#include "sia/plan.hpp"
#include "sia/query.hpp"
#include "sia/record_xml.hpp"
#include "sia/scene.hpp"
#include "sia/store.hpp"

namespace sia {

namespace {

using Json = nlohmann::json;
namespace codec = sia::json;

constexpr const char* kJson = "application/json";
constexpr const char* kX3d = "model/x3d+xml";
constexpr const char* kSvg = "image/svg+xml";

// Page served at / when no UI bundle is configured.
constexpr const char* kFallbackIndex = R"(<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>SIA</title></head>
<body><h1>SIA documentation service</h1>
<p>The web interface is not installed. The JSON API is available under
<code>/facets</code>, <code>/records</code>, <code>/periods</code>, <code>/places</code>
and <code>/compose</code>.</p></body></html>
)";

std::string media_url(const std::string& recordId) { return "/media/" + recordId; }

std::optional<std::size_t> parse_size(const std::string& text) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::multimap<std::string, std::string> params_of(const httplib::Request& req) {
    return {req.params.begin(), req.params.end()};
}

}  // namespace

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::unauthenticated: return 401;
        case ErrorCode::permission_denied: return 403;
        case ErrorCode::not_found:
        case ErrorCode::unknown_place:
        case ErrorCode::unknown_period: return 404;
        case ErrorCode::stale_plan:
        case ErrorCode::conflict: return 409;
        case ErrorCode::empty_composition:
        case ErrorCode::malformed_source_vector:
        case ErrorCode::default_missing: return 422;
        case ErrorCode::storage_failure:
        case ErrorCode::corrupt_record_file:
        case ErrorCode::schema_version_unknown: return 500;
        case ErrorCode::validation_failed:
        case ErrorCode::parse_error:
        case ErrorCode::invalid_interval:
        case ErrorCode::invalid_spec:
        case ErrorCode::invalid_delta:
        case ErrorCode::invalid_request:
        case ErrorCode::not_an_image:
        case ErrorCode::invalid_opacity: return 400;
    }
    return 500;
}

struct Service::Impl {
    Impl(Store& s, ServiceConfig c)
        : store(s), config(std::move(c)), sessions(config.tokenLifetime, config.clock), query(store) {}

    Store& store;
    ServiceConfig config;
    SessionRegistry sessions;
    QueryEngine query;
    httplib::Server server;
    std::thread worker;
    int port = 0;

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;
    using ExpertHandler = std::function<void(const httplib::Request&, httplib::Response&, const Session&)>;

    static void send_error(httplib::Response& res, const Error& e) {
        res.status = http_status(e.code);
        res.set_content(codec::to_json(e).dump(), kJson);
    }

    static void send_json(httplib::Response& res, const Json& body, int status = 200) {
        res.status = status;
        res.set_content(body.dump(), kJson);
    }

    // Resolves the bearer token; 401 when absent, unknown or expired.
    std::optional<Session> authenticate(const httplib::Request& req, httplib::Response& res) {
        const std::string header = req.get_header_value("Authorization");
        const std::string prefix = "Bearer ";
        if (header.rfind(prefix, 0) != 0) {
            send_error(res, make_error(ErrorCode::unauthenticated, "bearer token required"));
            return std::nullopt;
        }
        auto session = sessions.check(std::string_view(header).substr(prefix.size()));
        if (!session) send_error(res, make_error(ErrorCode::unauthenticated, "token unknown or expired"));
        return session;
    }

    Handler expert(ExpertHandler fn) {
        return [this, fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            auto session = authenticate(req, res);
            if (!session) return;
            if (session->role != Role::expert) {
                send_error(res, make_error(ErrorCode::permission_denied, "expert role required"));
                return;
            }
            fn(req, res, *session);
        };
    }

    static std::optional<Json> body_json(const httplib::Request& req, httplib::Response& res) {
        auto body = Json::parse(req.body, nullptr, false);
        if (body.is_discarded()) {
            send_error(res, make_error(ErrorCode::invalid_request, "request body is not valid JSON"));
            return std::nullopt;
        }
        return body;
    }

    // offset and limit query parameters
    static bool paging(const httplib::Request& req, httplib::Response& res, std::size_t& offset, std::size_t& limit) {
        offset = 0;
        limit = kDefaultPageLimit;
        for (auto [key, target] : {std::pair{"offset", &offset}, std::pair{"limit", &limit}}) {
            if (!req.has_param(key)) continue;
            auto v = parse_size(req.get_param_value(key));
            if (!v) {
                send_error(res, make_error(ErrorCode::invalid_request, std::string(key) + " must be a non-negative integer"));
                return false;
            }
            *target = *v;
        }
        return true;
    }

    template <typename T>
    static bool ok_or_send(const Result<T>& r, httplib::Response& res) {
        if (r) return true;
        send_error(res, r.error());
        return false;
    }

    void send_page(httplib::Response& res, const Result<ResultPage>& page) {
        if (ok_or_send(page, res)) send_json(res, codec::to_json(*page));
    }

    void set_warnings(httplib::Response& res, const std::vector<CompositionWarning>& warnings) {
        Json list = Json::array();
        for (const auto& w : warnings) list.push_back(codec::to_json(w));
        res.set_header("X-Composition-Warnings", list.dump());
    }

    void routes();
};

void Service::Impl::routes() {
    auto& s = server;

    s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send_error(res, make_error(ErrorCode::storage_failure, what));
    });

    if (config.uiDir) s.set_mount_point("/", config.uiDir->string());
    s.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kFallbackIndex, "text/html"); });

    s.Get("/facets", [this](const httplib::Request&, httplib::Response& res) {
        auto facets = query.list_facets();
        if (ok_or_send(facets, res)) send_json(res, codec::to_json(*facets));
    });

    s.Get("/records", [this](const httplib::Request& req, httplib::Response& res) {
        std::size_t offset = 0, limit = 0;
        if (!paging(req, res, offset, limit)) return;
        auto spec = codec::spec_from_params(params_of(req));
        if (!ok_or_send(spec, res)) return;
        send_page(res, query.search(*spec, offset, limit));
    });

    s.Get("/records/:id", [this](const httplib::Request& req, httplib::Response& res) {
        auto record = store.read(req.path_params.at("id"));
        if (ok_or_send(record, res)) send_json(res, codec::to_json(*record));
    });

    s.Get("/records/:id/xml", [this](const httplib::Request& req, httplib::Response& res) {
        auto bytes = store.export_xml(req.path_params.at("id"));
        if (ok_or_send(bytes, res)) res.set_content(*bytes, "application/xml");
    });

    s.Get("/records/:id/view", [this](const httplib::Request& req, httplib::Response& res) {
        HtmlViewOptions options;
        options.asset_url = [](const DocumentRecord& r) { return media_url(r.id); };
        auto html = store.render_html_view(req.path_params.at("id"), options);
        if (ok_or_send(html, res)) res.set_content(*html, "text/html; charset=utf-8");
    });

    s.Get("/records/:id/related", [this](const httplib::Request& req, httplib::Response& res) {
        std::size_t offset = 0, limit = 0;
        if (!paging(req, res, offset, limit)) return;
        send_page(res, query.related_documents(req.path_params.at("id"), limit));
    });

    s.Get("/media/:id", [this](const httplib::Request& req, httplib::Response& res) {
        auto record = store.read(req.path_params.at("id"));
        if (!ok_or_send(record, res)) return;
        auto path = store.resolve_asset(record->content);
        if (!path) {
            send_error(res, make_error(ErrorCode::not_found, "asset of '" + record->id + "' is not held by this store"));
            return;
        }
        auto bytes = read_file(*path);
        if (ok_or_send(bytes, res)) res.set_content(std::move(*bytes), record->content.mediaFormat);
    });

    s.Get("/periods", [this](const httplib::Request&, httplib::Response& res) {
        auto state = store.state();
        Json list = Json::array();
        for (const auto& p : state->reference.periods) list.push_back(codec::to_json(p));
        send_json(res, list);
    });

    s.Get("/places", [this](const httplib::Request&, httplib::Response& res) {
        auto state = store.state();
        Json list = Json::array();
        for (const auto& p : state->reference.places) list.push_back(codec::to_json(p));
        send_json(res, list);
    });

    s.Get("/periods/:id/records", [this](const httplib::Request& req, httplib::Response& res) {
        std::size_t offset = 0, limit = 0;
        if (paging(req, res, offset, limit))
            send_page(res, query.browse_by_history(req.path_params.at("id"), offset, limit));
    });

    s.Get("/places/:id/records", [this](const httplib::Request& req, httplib::Response& res) {
        std::size_t offset = 0, limit = 0;
        if (paging(req, res, offset, limit))
            send_page(res, query.browse_by_place(req.path_params.at("id"), offset, limit));
    });

    s.Post("/auth/login", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = body_json(req, res);
        if (!body) return;
        if (!body->is_object() || !(*body)["account"].is_string() || !(*body)["password"].is_string()) {
            send_error(res, make_error(ErrorCode::invalid_request, "expected {\"account\", \"password\"}"));
            return;
        }
        auto session = sessions.login(config.accounts, (*body)["account"].get<std::string>(),
                                      (*body)["password"].get<std::string>());
        if (!session) {
            send_error(res, make_error(ErrorCode::unauthenticated, "unknown account or wrong password"));
            return;
        }
        send_json(res, {{"token", session->token},
                        {"account", session->subject},
                        {"role", std::string(to_string(session->role))},
                        {"expiresAt", format_timestamp(session->expiresAt)}});
    });

    s.Post("/records", expert([this](const httplib::Request& req, httplib::Response& res, const Session&) {
        auto body = body_json(req, res);
        if (!body) return;
        auto draft = codec::draft_from_json(*body);
        if (!ok_or_send(draft, res)) return;
        auto record = store.ingest(*draft, Role::expert);
        if (ok_or_send(record, res)) send_json(res, codec::to_json(*record), 201);
    }));

    s.Patch("/records/:id", expert([this](const httplib::Request& req, httplib::Response& res, const Session&) {
        auto body = body_json(req, res);
        if (!body) return;
        auto patch = codec::patch_from_json(*body);
        if (!ok_or_send(patch, res)) return;
        auto record = store.update(req.path_params.at("id"), *patch, Role::expert);
        if (ok_or_send(record, res)) send_json(res, codec::to_json(*record));
    }));

    s.Post("/records/:id/archive", expert([this](const httplib::Request& req, httplib::Response& res, const Session&) {
        auto record = store.archive(req.path_params.at("id"), Role::expert);
        if (ok_or_send(record, res)) send_json(res, codec::to_json(*record));
    }));

    s.Post("/periods", expert([this](const httplib::Request& req, httplib::Response& res, const Session&) {
        auto body = body_json(req, res);
        if (!body) return;
        auto period = codec::period_from_json(*body);
        if (!ok_or_send(period, res)) return;
        if (ok_or_send(store.put_period(*period, Role::expert), res)) send_json(res, codec::to_json(*period));
    }));

    s.Post("/places", expert([this](const httplib::Request& req, httplib::Response& res, const Session&) {
        auto body = body_json(req, res);
        if (!body) return;
        auto place = codec::place_from_json(*body);
        if (!ok_or_send(place, res)) return;
        if (ok_or_send(store.put_place(*place, Role::expert), res)) send_json(res, codec::to_json(*place));
    }));

    s.Post("/vocabularies/:facet/terms",
           expert([this](const httplib::Request& req, httplib::Response& res, const Session&) {
               auto body = body_json(req, res);
               if (!body) return;
               if (!body->is_object() || !(*body)["term"].is_string()) {
                   send_error(res, make_error(ErrorCode::invalid_request, "expected {\"term\"}"));
                   return;
               }
               const std::string facet = req.path_params.at("facet");
               auto ok = store.add_vocabulary_term(facet, (*body)["term"].get<std::string>(), Role::expert);
               if (!ok_or_send(ok, res)) return;
               auto state = store.state();
               const Vocabulary* v = state->reference.find_vocabulary(facet);
               send_json(res, v != nullptr ? codec::to_json(*v) : Json::object());
           }));

    s.Get("/schema", expert([this](const httplib::Request&, httplib::Response& res, const Session&) {
        auto state = store.state();
        send_json(res, {{"schema", codec::to_json(state->schema)}, {"versions", state->schemaVersions}});
    }));

    s.Post("/schema", expert([this](const httplib::Request& req, httplib::Response& res, const Session&) {
        Result<SchemaDelta> delta = make_error(ErrorCode::invalid_delta, "empty body");
        if (!req.body.empty() && req.body.front() == '<') {
            delta = delta_from_xml(req.body);
        } else {
            auto body = body_json(req, res);
            if (!body) return;
            delta = codec::delta_from_json(*body);
        }
        if (!ok_or_send(delta, res)) return;
        auto plan = store.propose_schema(*delta);
        if (ok_or_send(plan, res)) send_json(res, codec::to_json(*plan));
    }));

    s.Post("/schema/migrations", expert([this](const httplib::Request& req, httplib::Response& res, const Session&) {
        auto body = body_json(req, res);
        if (!body) return;
        auto plan = codec::plan_from_json(*body);
        if (!ok_or_send(plan, res)) return;
        auto schema = store.apply_migration(*plan, Role::expert);
        if (ok_or_send(schema, res)) send_json(res, codec::to_json(*schema));
    }));

    s.Post("/compose/model", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = body_json(req, res);
        if (!body) return;
        auto request = codec::composition_from_json(*body);
        if (!ok_or_send(request, res)) return;
        auto scene = compose_model(store, *request);
        if (!ok_or_send(scene, res)) return;
        X3dOptions options;
        options.geometry_url = [](const SceneGroup& g) { return media_url(g.sourceRecordId); };
        set_warnings(res, scene->warnings);
        res.set_content(serialize_x3d(*scene, options), kX3d);
    });

    auto send_plan = [this](httplib::Response& res, const Result<PlanDocument>& doc) {
        if (!ok_or_send(doc, res)) return;
        SvgOptions options;
        options.image_url = [](const PlanLayer& l) { return media_url(l.sourceRecordId); };
        auto svg = serialize_svg(*doc, options);
        if (!ok_or_send(svg, res)) return;
        set_warnings(res, doc->warnings);
        res.set_content(*svg, kSvg);
    };

    s.Post("/compose/plan", [this, send_plan](const httplib::Request& req, httplib::Response& res) {
        auto body = body_json(req, res);
        if (!body) return;
        auto request = codec::composition_from_json(*body);
        if (!ok_or_send(request, res)) return;
        send_plan(res, compose_plan(store, *request));
    });

    s.Post("/compose/montage", [this, send_plan](const httplib::Request& req, httplib::Response& res) {
        auto body = body_json(req, res);
        if (!body) return;
        auto request = codec::montage_from_json(*body);
        if (!ok_or_send(request, res)) return;
        send_plan(res, compose_photomontage(store, request->first, request->second));
    });
}

Service::Service(Store& store, ServiceConfig config) : impl_(std::make_unique<Impl>(store, std::move(config))) {
    const int threads = std::max(1, impl_->config.threads);
    impl_->server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
    impl_->routes();
}

Service::~Service() { stop(); }

Result<int> Service::bind() {
    auto& impl = *impl_;
    int port = impl.config.port == 0 ? impl.server.bind_to_any_port(impl.config.host)
                                     : (impl.server.bind_to_port(impl.config.host, impl.config.port)
                                            ? impl.config.port
                                            : -1);
    if (port < 0)
        return make_error(ErrorCode::storage_failure,
                          "cannot listen on " + impl.config.host + ":" + std::to_string(impl.config.port));
    impl.port = port;
    return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

Result<int> Service::start() {
    auto port = bind();
    if (!port) return port;
    impl_->worker = std::thread([this] { run(); });
    impl_->server.wait_until_ready();
    return port;
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace sia
