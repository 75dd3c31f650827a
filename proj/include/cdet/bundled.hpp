#pragma once

#include <string_view>

// Default data files compiled into the library (see data/).
namespace cdet::bundled {

std::string_view lexicon();
std::string_view verbs();
std::string_view stopwords();
std::string_view gazetteer();
std::string_view allowlist();
std::string_view redirects();
std::string_view public_suffixes();

} // namespace cdet::bundled
