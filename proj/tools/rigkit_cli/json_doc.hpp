#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

// Deterministic JSON document builder for the CLI result files.  Keys keep
// insertion order, reals are serialized with 17 significant digits, and
// non-finite values are encoded as the sentinel strings "NaN", "Infinity",
// "-Infinity" so every emitted number parses back losslessly.

namespace rigkit::cli {

class JsonValue {
public:
    enum class Type { Null, Bool, Int, Real, String, Array, Object };

    JsonValue() : type_(Type::Null) {}
    static JsonValue boolean(bool b);
    static JsonValue integer(std::int64_t v);
    static JsonValue real(double v);
    static JsonValue string(std::string s);
    static JsonValue array();
    static JsonValue object();

    Type type() const { return type_; }

    // Array/object builders; no-ops on other types are programming errors
    // and throw std::logic_error.
    JsonValue& push_back(JsonValue v);
    JsonValue& set(const std::string& key, JsonValue v);

    std::string dump(int indent = 2) const;

private:
    void write(std::string& out, int indent, int depth) const;

    Type type_;
    bool bool_ = false;
    std::int64_t int_ = 0;
    double real_ = 0.0;
    std::string str_;
    std::vector<JsonValue> items_;
    std::vector<std::pair<std::string, JsonValue>> members_;
};

std::string format_real17(double v);

}  // namespace rigkit::cli
