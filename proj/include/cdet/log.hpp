#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

namespace cdet {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// One JSON object per line: {"level":..,"event":..,<fields>}.
class Logger {
public:
    using Value = std::variant<std::string, double, long long, bool>;

    struct Field {
        template <typename T>
        Field(std::string_view n, const T& v) : name(n), value(convert(v)) {}

        std::string_view name;
        Value value;

    private:
        template <typename T>
        static Value convert(const T& v) {
            if constexpr (std::is_same_v<T, bool>) {
                return v;
            } else if constexpr (std::is_integral_v<T>) {
                return static_cast<long long>(v);
            } else if constexpr (std::is_floating_point_v<T>) {
                return static_cast<double>(v);
            } else {
                return std::string(std::string_view(v));
            }
        }
    };

    explicit Logger(std::ostream& out, LogLevel level = LogLevel::Warn) : out_(&out), level_(level) {}

    /// A logger that writes nothing.
    static Logger& null();

    LogLevel level() const { return level_; }
    void set_level(LogLevel level) { level_ = level; }
    bool enabled(LogLevel level) const { return out_ != nullptr && level <= level_; }

    void log(LogLevel level, std::string_view event, std::initializer_list<Field> fields = {});
    void error(std::string_view event, std::initializer_list<Field> fields = {}) { log(LogLevel::Error, event, fields); }
    void warn(std::string_view event, std::initializer_list<Field> fields = {}) { log(LogLevel::Warn, event, fields); }
    void info(std::string_view event, std::initializer_list<Field> fields = {}) { log(LogLevel::Info, event, fields); }
    void debug(std::string_view event, std::initializer_list<Field> fields = {}) { log(LogLevel::Debug, event, fields); }

private:
    Logger() = default;
    std::ostream* out_ = nullptr;
    LogLevel level_ = LogLevel::Error;
};

} // namespace cdet
