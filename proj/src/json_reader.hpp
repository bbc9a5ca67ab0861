#pragma once

// Strict reader over a JSON object: every access is recorded so keys that
// were never read can be reported as unknown. Errors carry dotted key paths.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"

namespace psym::detail {

using nlohmann::json;

inline std::string join_path(const std::string& base, std::string_view key) {
    return base.empty() ? std::string(key) : fmt::format("{}.{}", base, key);
}

inline std::string index_path(const std::string& base, std::size_t i) {
    return fmt::format("{}[{}]", base, i);
}

class JsonReader {
public:
    JsonReader(const json& doc, std::string path, std::vector<std::string>& errors)
        : doc_(doc), path_(std::move(path)), errors_(errors) {
        if (!doc_.is_object()) {
            error("", "expected an object");
            valid_ = false;
        }
    }

    bool valid() const noexcept { return valid_; }
    const std::string& path() const noexcept { return path_; }
    std::string path(std::string_view key) const { return join_path(path_, key); }

    bool has(std::string_view key) const { return valid_ && doc_.contains(std::string(key)); }

    const json* child(std::string_view key) {
        if (!valid_) return nullptr;
        const auto it = doc_.find(std::string(key));
        if (it == doc_.end()) return nullptr;
        seen_.insert(std::string(key));
        return &*it;
    }

    std::optional<double> number(std::string_view key) {
        const json* v = child(key);
        if (v == nullptr) return std::nullopt;
        if (!v->is_number()) {
            error(key, "expected a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    double number_or(std::string_view key, double fallback) { return number(key).value_or(fallback); }

    std::optional<double> required_number(std::string_view key) {
        if (!has(key)) {
            error(key, "missing required number");
            return std::nullopt;
        }
        return number(key);
    }

    std::optional<std::uint64_t> unsigned_integer(std::string_view key) {
        const json* v = child(key);
        if (v == nullptr) return std::nullopt;
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
            error(key, "expected a non-negative integer");
            return std::nullopt;
        }
        return v->get<std::uint64_t>();
    }

    std::optional<std::string> string(std::string_view key) {
        const json* v = child(key);
        if (v == nullptr) return std::nullopt;
        if (!v->is_string()) {
            error(key, "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    // A number or a list of numbers.
    std::optional<std::vector<double>> numbers(std::string_view key) {
        const json* v = child(key);
        if (v == nullptr) return std::nullopt;
        return as_numbers(*v, path(key), errors_);
    }

    std::optional<bool> boolean(std::string_view key) {
        const json* v = child(key);
        if (v == nullptr) return std::nullopt;
        if (!v->is_boolean()) {
            error(key, "expected true or false");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    void error(std::string_view key, std::string_view message) {
        const std::string where = key.empty() ? path_ : path(key);
        errors_.push_back(where.empty() ? std::string(message) : fmt::format("{}: {}", where, message));
    }

    // Reports keys that were never read.
    void finish() {
        if (!valid_) return;
        for (const auto& [key, value] : doc_.items()) {
            if (!seen_.contains(key)) error(key, "unknown key");
        }
    }

    static std::optional<std::vector<double>> as_numbers(const json& v, const std::string& where,
                                                         std::vector<std::string>& errors) {
        if (v.is_number()) return std::vector<double>{v.get<double>()};
        if (!v.is_array()) {
            errors.push_back(fmt::format("{}: expected a number or a list of numbers", where));
            return std::nullopt;
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                errors.push_back(fmt::format("{}: expected a number", index_path(where, i)));
                return std::nullopt;
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

private:
    const json& doc_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
    bool valid_ = true;
};

}  // namespace psym::detail
