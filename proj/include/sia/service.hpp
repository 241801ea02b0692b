#pragma once

// HTTP front end: JSON API over the store, query engine and composers, plus
// the static UI bundle. Anonymous callers are visitors; experts present a
// bearer token obtained from POST /auth/login.

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sia/auth.hpp"
#include "sia/result.hpp"

namespace sia {

class Store;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::vector<Account> accounts;
    std::optional<std::filesystem::path> uiDir;
    std::chrono::milliseconds tokenLifetime = kSessionLifetime;
    std::function<Timestamp()> clock;
    int threads = 8;
};

/// HTTP status for an error code.
int http_status(ErrorCode code);

class Service {
public:
    Service(Store& store, ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listening socket and returns the bound port.
    Result<int> bind();
    /// Serves until stop(); call after bind().
    void run();
    /// bind() then run() on a background thread.
    Result<int> start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sia
