#include "cdet/detail/strings.hpp"

#include <fstream>
#include <sstream>

#include "cdet/error.hpp"

namespace cdet::detail {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace cdet::detail
