#include "sia/auth.hpp"

#include <sodium.h>

#include "json.hpp"
#include "sia/checksum.hpp"
#include "sia/store.hpp"

namespace sia {

Result<std::string> hash_password(std::string_view password) {
    if (sodium_init() < 0) return make_error(ErrorCode::storage_failure, "libsodium failed to initialize");
    char out[crypto_pwhash_STRBYTES];
    if (crypto_pwhash_str(out, password.data(), password.size(), crypto_pwhash_OPSLIMIT_INTERACTIVE,
                          crypto_pwhash_MEMLIMIT_INTERACTIVE) != 0)
        return make_error(ErrorCode::storage_failure, "out of memory while hashing password");
    return std::string(out);
}

bool verify_password(std::string_view encodedHash, std::string_view password) {
    if (sodium_init() < 0 || encodedHash.size() >= crypto_pwhash_STRBYTES) return false;
    std::string hash(encodedHash);  // needs a terminated buffer
    return crypto_pwhash_str_verify(hash.c_str(), password.data(), password.size()) == 0;
}

Result<std::vector<Account>> load_accounts(const std::filesystem::path& file) {
    auto bytes = read_file(file);
    if (!bytes) return make_error(ErrorCode::not_found, "cannot read account file " + file.string());
    auto doc = nlohmann::json::parse(*bytes, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("accounts") || !doc["accounts"].is_array())
        return make_error(ErrorCode::parse_error, file.string() + ": expected {\"accounts\": [...]}");
    std::vector<Account> out;
    for (const auto& a : doc["accounts"]) {
        if (!a.is_object() || !a.contains("id") || !a["id"].is_string() || !a.contains("passwordHash") ||
            !a["passwordHash"].is_string())
            return make_error(ErrorCode::parse_error, file.string() + ": every account needs id and passwordHash");
        Account account{a["id"].get<std::string>(), a["passwordHash"].get<std::string>(), Role::expert};
        if (a.contains("role")) {
            auto role = a["role"].is_string() ? a["role"].get<std::string>() : std::string();
            if (role == "visitor") account.role = Role::visitor;
            else if (role != "expert")
                return make_error(ErrorCode::parse_error, file.string() + ": role must be expert or visitor");
        }
        out.push_back(std::move(account));
    }
    return out;
}

SessionRegistry::SessionRegistry(std::chrono::milliseconds lifetime, std::function<Timestamp()> clock)
    : lifetime_(lifetime), clock_(std::move(clock)) {}

Timestamp SessionRegistry::now() const {
    if (clock_) return clock_();
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

std::optional<Session> SessionRegistry::login(const std::vector<Account>& accounts, std::string_view id,
                                              std::string_view password) {
    for (const auto& a : accounts)
        if (a.id == id) return verify_password(a.passwordHash, password) ? std::optional(issue(a)) : std::nullopt;
    return std::nullopt;
}

Session SessionRegistry::issue(const Account& account) {
    Session s{random_hex(32), account.id, account.role, now() + lifetime_};
    std::lock_guard lock(mutex_);
    sessions_[s.token] = s;
    return s;
}

std::optional<Session> SessionRegistry::check(std::string_view token) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) return std::nullopt;
    if (now() >= it->second.expiresAt) {
        sessions_.erase(it);
        return std::nullopt;
    }
    return it->second;
}

}  // namespace sia
