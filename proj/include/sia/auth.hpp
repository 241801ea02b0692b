#pragma once

// Accounts and bearer sessions for the HTTP service. Accounts come from a
// JSON file written by an operator; passwords are stored as argon2id hashes.

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sia/model.hpp"
#include "sia/result.hpp"

namespace sia {

/// Encoded argon2id hash (libsodium string format, salt included).
Result<std::string> hash_password(std::string_view password);
bool verify_password(std::string_view encodedHash, std::string_view password);

struct Account {
    std::string id;
    std::string passwordHash;
    Role role = Role::expert;
};

/// Reads {"accounts": [{"id", "passwordHash", "role"?}]}.
Result<std::vector<Account>> load_accounts(const std::filesystem::path& file);

struct Session {
    std::string token;
    std::string subject;
    Role role = Role::expert;
    Timestamp expiresAt{};
};

inline constexpr std::chrono::hours kSessionLifetime{12};

class SessionRegistry {
public:
    explicit SessionRegistry(std::chrono::milliseconds lifetime = kSessionLifetime,
                             std::function<Timestamp()> clock = {});

    /// Checks the credentials and opens a session with a fresh 256-bit token.
    std::optional<Session> login(const std::vector<Account>& accounts, std::string_view id,
                                 std::string_view password);
    Session issue(const Account& account);
    /// The live session behind `token`; expired sessions are dropped.
    std::optional<Session> check(std::string_view token);

private:
    Timestamp now() const;

    std::chrono::milliseconds lifetime_;
    std::function<Timestamp()> clock_;
    std::mutex mutex_;
    std::map<std::string, Session, std::less<>> sessions_;
};

}  // namespace sia
