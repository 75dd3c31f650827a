#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cdet::detail {

/// Streaming pretty-printer with fixed six-decimal numbers, so identical inputs give
/// byte-identical files regardless of how a double happens to round-trip.
class JsonWriter {
public:
    explicit JsonWriter(int indent = 2) : indent_(indent) {}

    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(std::string_view name);

    JsonWriter& value(std::string_view text);
    JsonWriter& value(const char* text) { return value(std::string_view(text)); }
    JsonWriter& value(const std::string& text) { return value(std::string_view(text)); }
    JsonWriter& value(double number);
    JsonWriter& value(bool flag);
    JsonWriter& value(std::int64_t number);
    JsonWriter& value(std::uint64_t number);
    JsonWriter& value(int number) { return value(static_cast<std::int64_t>(number)); }
    JsonWriter& null();

    template <typename T>
    JsonWriter& field(std::string_view name, const T& v) {
        key(name);
        return value(v);
    }

    const std::string& str() const { return out_; }

private:
    void before_value();
    void newline();

    std::string out_;
    int indent_;
    struct Frame {
        bool array;
        bool empty = true;
    };
    std::vector<Frame> stack_;
    bool after_key_ = false;
};

std::string format_fixed(double number);  // "%.6f" with "-0.000000" folded to "0.000000"
std::string json_escape(std::string_view text);

} // namespace cdet::detail
