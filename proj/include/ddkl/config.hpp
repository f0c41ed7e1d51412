#pragma once

#include <map>
#include <string>

namespace ddkl {

// Flat key=value config file. Blank lines and lines starting with '#' are
// skipped; whitespace around keys and values is trimmed.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Rejects keys outside the allowed set; the diagnostic names the key.
void validate_keys(const std::map<std::string, std::string>& cfg,
                   const std::map<std::string, std::string>& allowed_with_help);

}  // namespace ddkl
