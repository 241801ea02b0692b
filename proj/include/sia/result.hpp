#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sia {

enum class ErrorCode {
    validation_failed,
    permission_denied,
    unauthenticated,
    storage_failure,
    not_found,
    parse_error,
    schema_version_unknown,
    corrupt_record_file,
    invalid_interval,
    unknown_place,
    unknown_period,
    invalid_spec,
    invalid_delta,
    stale_plan,
    default_missing,
    invalid_request,
    empty_composition,
    not_an_image,
    invalid_opacity,
    malformed_source_vector,
    conflict,
};

std::string_view to_string(ErrorCode code);

/// One broken rule on one field of a record. `path` uses dotted field names
/// with bracketed list positions, e.g. "subjectKeywords[1]" or "attributes.film".
struct Violation {
    std::string path;
    std::string rule;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct Error {
    ErrorCode code;
    std::string message;
    std::vector<Violation> violations;
    // parse errors only; 0 when unknown
    int line = 0;
    int column = 0;

    std::string describe() const;
};

inline Error make_error(ErrorCode code, std::string message) {
    return Error{code, std::move(message), {}, 0, 0};
}

class BadResultAccess : public std::logic_error {
public:
    explicit BadResultAccess(const Error& e)
        : std::logic_error("result holds an error: " + e.describe()) {}
};

/// Value-or-error return type used across the library.
template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : data_(std::move(value)) {}
    Result(Error error) : data_(std::move(error)) {}

    bool has_value() const noexcept { return data_.index() == 0; }
    explicit operator bool() const noexcept { return has_value(); }

    T& value() & {
        check();
        return std::get<0>(data_);
    }
    const T& value() const& {
        check();
        return std::get<0>(data_);
    }
    T&& value() && {
        check();
        return std::get<0>(std::move(data_));
    }

    T& operator*() & { return value(); }
    const T& operator*() const& { return value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

    const Error& error() const& { return std::get<1>(data_); }
    Error&& error() && { return std::get<1>(std::move(data_)); }

private:
    void check() const {
        if (!has_value()) throw BadResultAccess(std::get<1>(data_));
    }

    std::variant<T, Error> data_;
};

template <>
class [[nodiscard]] Result<void> {
public:
    Result() = default;
    Result(Error error) : error_(std::move(error)), ok_(false) {}

    bool has_value() const noexcept { return ok_; }
    explicit operator bool() const noexcept { return ok_; }
    void value() const {
        if (!ok_) throw BadResultAccess(error_);
    }
    const Error& error() const& { return error_; }
    Error&& error() && { return std::move(error_); }

private:
    Error error_{ErrorCode::storage_failure, {}, {}, 0, 0};
    bool ok_ = true;
};

}  // namespace sia
