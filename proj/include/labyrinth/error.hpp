// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace labyrinth {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One field-level problem found while validating a document.
struct ValidationError {
    std::string path;
    std::string message;

    bool operator==(const ValidationError&) const = default;
};

using ValidationErrors = std::vector<ValidationError>;

std::string describe(const ValidationErrors& errors);

class ValidationFailure : public Error {
public:
    explicit ValidationFailure(ValidationErrors errors)
        : Error(describe(errors)), errors_(std::move(errors)) {}
    ValidationFailure(std::string path, std::string message)
        : ValidationFailure(ValidationErrors{{std::move(path), std::move(message)}}) {}

    const ValidationErrors& errors() const { return errors_; }

private:
    ValidationErrors errors_;
};

// Either a value or the full list of validation errors that prevented it.
template <typename T>
class Checked {
public:
    Checked(T value) : data_(std::move(value)) {}
    Checked(ValidationErrors errors) : data_(std::move(errors)) {}

    bool ok() const { return std::holds_alternative<T>(data_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& {
        if (!ok()) throw ValidationFailure(errors());
        return std::get<T>(data_);
    }
    T&& value() && {
        if (!ok()) throw ValidationFailure(errors());
        return std::get<T>(std::move(data_));
    }

    const ValidationErrors& errors() const {
        static const ValidationErrors none;
        if (ok()) return none;
        return std::get<ValidationErrors>(data_);
    }

private:
    std::variant<T, ValidationErrors> data_;
};

}  // namespace labyrinth
