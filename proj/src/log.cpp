#include "cdet/log.hpp"

#include <ostream>

#include <nlohmann/json.hpp>

namespace cdet {

Logger& Logger::null() {
    static Logger instance;
    return instance;
}

void Logger::log(LogLevel level, std::string_view event, std::initializer_list<Field> fields) {
    if (!enabled(level)) return;
    static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
    nlohmann::ordered_json line;
    line["level"] = kNames[static_cast<int>(level)];
    line["event"] = std::string(event);
    for (const auto& field : fields)
        std::visit([&](const auto& v) { line[std::string(field.name)] = v; }, field.value);
    *out_ << line.dump() << '\n';
}

} // namespace cdet
